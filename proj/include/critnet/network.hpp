#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "critnet/plasticity.hpp"
#include "critnet/rng.hpp"
#include "critnet/spikes.hpp"

namespace critnet {

struct NeuronParams {
    double u_thresh = 554.0; // mV
    double u_leak = 384.0;   // mV
    double u_reset = 319.0;  // mV
    double c_m = 2.38;       // nF
    double tau_mem = 1.6;    // ms
    double tau_ref = 4.9;    // ms

    double g_leak() const { return c_m / tau_mem; } // nF/ms = uS
};

struct SynapseParams {
    double tau_syn_exc = 3.7; // ms
    double tau_syn_inh = 2.8; // ms
    double d_syn = 1.9;       // ms, rounded to the simulation step
    double gamma = 0.029;      // uA per unit weight (delta-pulse area, uA*ms); calibrated, see README
};

enum class TopologyMode { slot_exact, probabilistic };

/// One synapse slot of a postsynaptic neuron. A slot transmits either
/// external or recurrent events, never both.
struct Slot {
    int source = 0;          // external source id or presynaptic neuron id
    bool external = false;
    bool inhibitory = false;
};

struct Topology {
    int n_neurons = 32;
    int k_ext = 8;
    int n_inh = 6;
    TopologyMode mode = TopologyMode::slot_exact;
    std::uint64_t seed = 0;
    std::vector<std::vector<Slot>> slots; // [post][slot]

    std::size_t n_synapses() const {
        std::size_t n = 0;
        for (const auto& row : slots) n += row.size();
        return n;
    }
};

/// Slot-exact mode: every neuron gets exactly N slots, exactly k_ext of them
/// external and exactly n_inh inhibitory; recurrent sources are drawn without
/// replacement from all N neurons (autapses permitted). Probabilistic mode:
/// each (input, neuron) pair is wired with probability k_ext/N, each neuron
/// pair with probability (N - k_ext)/N, and each slot is inhibitory with
/// probability n_inh/N.
Topology build_topology(int n_neurons, int k_ext, int n_inh, TopologyMode mode,
                        std::uint64_t seed);

struct NetworkConfig {
    NeuronParams neuron;
    SynapseParams synapse;
    PlasticityParams plasticity;
    Topology topology;
    double dt = 0.1;    // ms
    double w_max = 63.0; // weight clip
};

struct WeightTrace {
    double cadence_ms = 0.0;      // 0 = final snapshot only
    std::vector<double> times;    // ms
    std::vector<std::vector<double>> snapshots; // flattened [post*slot]
};

struct RunOptions {
    bool plasticity_on = false;
    double weight_snapshot_every_ms = 0.0; // 0: only the final weights
    bool record_spikes = true;
    // Initial membrane potentials: default all at u_leak. With a jitter seed,
    // drawn uniformly in [u_reset, u_thresh) -- the trial-to-trial noise
    // source for frozen-weight repeat trials.
    std::optional<std::uint64_t> init_jitter_seed;
};

struct RunResult {
    SpikeRecord spikes;
    WeightTrace weights;
    double mean_rate_hz = 0.0; // per neuron
};

/// Clock-driven emulation of the current-based LIF network with delayed
/// delta-current synapses. Exact exponential propagators between events.
class Simulator {
public:
    Simulator(NetworkConfig config, std::uint64_t seed);

    const NetworkConfig& config() const { return config_; }
    const std::vector<double>& weights() const { return weights_; }
    void set_weights(std::vector<double> w);
    /// Replaces the topology (task-switch rewiring): slots that keep their
    /// (source, external, inhibitory) role keep their weight, reassigned
    /// slots are zeroed. Slot counts must match.
    void rewire(const Topology& topo);

    RunResult run(const SpikeRecord& stimulus, double duration_ms,
                  const RunOptions& options);

    // state introspection (valid after run)
    const std::vector<double>& membrane() const { return u_; }
    const std::vector<double>& current_exc() const { return i_exc_; }
    const std::vector<double>& current_inh() const { return i_inh_; }

private:
    void reset_state(const RunOptions& options);
    void on_pre_spike(int post, int slot, double t_ms);

    NetworkConfig config_;
    Rng rng_;
    int delay_steps_ = 1;

    // flattened synapse tables
    std::vector<int> slot_offset_;       // per post neuron
    std::vector<double> weights_;        // per slot
    std::vector<double> f_acc_;          // STDP accumulator per slot
    // reverse maps: for each source, the flat slot indices it feeds
    std::vector<std::vector<int>> ext_fanout_; // [external source]
    std::vector<std::vector<int>> rec_fanout_; // [presynaptic neuron]
    std::vector<int> slot_post_;         // flat slot -> post neuron
    std::vector<std::uint8_t> slot_inh_; // flat slot -> inhibitory

    // live state
    std::vector<double> u_, i_exc_, i_inh_;
    std::vector<double> refractory_until_, last_post_;
    std::vector<std::vector<double>> ring_exc_, ring_inh_; // [ring slot][neuron]
};

// Weight snapshot CSV: header row of slot indices, then one row per snapshot.
void write_weights_csv(const std::string& path, const WeightTrace& trace);
std::vector<double> read_weights_csv_final(const std::string& path);

} // namespace critnet
