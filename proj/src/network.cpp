#include "critnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace critnet {

Topology build_topology(int n_neurons, int k_ext, int n_inh, TopologyMode mode,
                        std::uint64_t seed) {
    if (n_neurons <= 0 || k_ext < 0 || k_ext > n_neurons || n_inh < 0 ||
        n_inh > n_neurons)
        throw std::invalid_argument("build_topology: parameter out of range");

    Topology topo;
    topo.n_neurons = n_neurons;
    topo.k_ext = k_ext;
    topo.n_inh = n_inh;
    topo.mode = mode;
    topo.seed = seed;
    topo.slots.resize(n_neurons);

    Rng rng(seed);
    if (mode == TopologyMode::slot_exact) {
        // Synapse array layout: slot i of neuron j carries source i, either
        // the external train i or the spikes of neuron i.
        std::vector<int> idx(n_neurons);
        for (int j = 0; j < n_neurons; ++j) {
            auto& row = topo.slots[j];
            row.resize(n_neurons);
            for (int i = 0; i < n_neurons; ++i) row[i] = {i, false, false};
            for (int i = 0; i < n_neurons; ++i) idx[i] = i;
            for (int k = 0; k < k_ext; ++k) { // partial Fisher-Yates
                const int pick = k + static_cast<int>(rng.below(n_neurons - k));
                std::swap(idx[k], idx[pick]);
                row[idx[k]].external = true;
            }
            for (int i = 0; i < n_neurons; ++i) idx[i] = i;
            for (int k = 0; k < n_inh; ++k) {
                const int pick = k + static_cast<int>(rng.below(n_neurons - k));
                std::swap(idx[k], idx[pick]);
                row[idx[k]].inhibitory = true;
            }
        }
    } else {
        const double p_ext = static_cast<double>(k_ext) / n_neurons;
        const double p_rec = static_cast<double>(n_neurons - k_ext) / n_neurons;
        const double p_inh = static_cast<double>(n_inh) / n_neurons;
        for (int j = 0; j < n_neurons; ++j) {
            auto& row = topo.slots[j];
            for (int i = 0; i < n_neurons; ++i)
                if (rng.uniform() < p_ext)
                    row.push_back({i, true, rng.uniform() < p_inh});
            for (int i = 0; i < n_neurons; ++i)
                if (rng.uniform() < p_rec)
                    row.push_back({i, false, rng.uniform() < p_inh});
        }
    }
    return topo;
}

namespace {

/// Exact one-step propagator of the LIF membrane driven by exponentially
/// decaying synaptic currents (dynamics are linear between events):
///   u' = u_leak + (u - u_leak)*e_mem + k_exc*I_exc - k_inh*I_inh
struct LifPropagator {
    double e_mem, e_exc, e_inh, k_exc, k_inh;

    LifPropagator(const NeuronParams& np, const SynapseParams& sp, double dt) {
        e_mem = std::exp(-dt / np.tau_mem);
        e_exc = std::exp(-dt / sp.tau_syn_exc);
        e_inh = std::exp(-dt / sp.tau_syn_inh);
        k_exc = coeff(np, sp.tau_syn_exc, e_exc, dt);
        k_inh = coeff(np, sp.tau_syn_inh, e_inh, dt);
    }

    static double coeff(const NeuronParams& np, double tau_syn, double e_syn,
                        double dt) {
        // u is in mV while I/g_leak (uA/uS) comes out in V
        constexpr double mv_per_v = 1000.0;
        const double g = np.g_leak();
        if (std::abs(tau_syn - np.tau_mem) < 1e-9) {
            // degenerate limit tau_syn == tau_mem
            return mv_per_v * dt / (g * np.tau_mem) * std::exp(-dt / np.tau_mem);
        }
        const double e_mem = std::exp(-dt / np.tau_mem);
        return mv_per_v * (tau_syn / (g * (tau_syn - np.tau_mem))) * (e_syn - e_mem);
    }
};

} // namespace

Simulator::Simulator(NetworkConfig config, std::uint64_t seed)
    : config_(std::move(config)), rng_(seed) {
    const auto& topo = config_.topology;
    if (config_.dt <= 0.0) throw std::invalid_argument("simulator: dt must be > 0");

    const double steps = config_.synapse.d_syn / config_.dt;
    delay_steps_ = std::max(1, static_cast<int>(std::lround(steps)));
    if (std::abs(steps - delay_steps_) > 1e-9)
        std::cerr << "[critnet] warning: d_syn rounded from " << config_.synapse.d_syn
                  << " ms to " << delay_steps_ * config_.dt << " ms\n";

    const double period_steps = config_.plasticity.period / config_.dt;
    if (std::abs(period_steps - std::lround(period_steps)) > 1e-9)
        throw std::invalid_argument("simulator: dt must divide the plasticity period");

    const int n = topo.n_neurons;
    slot_offset_.assign(n + 1, 0);
    for (int j = 0; j < n; ++j)
        slot_offset_[j + 1] = slot_offset_[j] + static_cast<int>(topo.slots[j].size());
    const int n_syn = slot_offset_[n];
    weights_.assign(n_syn, 0.0);
    f_acc_.assign(n_syn, 0.0);
    slot_post_.assign(n_syn, 0);
    slot_inh_.assign(n_syn, 0);
    ext_fanout_.assign(n, {});
    rec_fanout_.assign(n, {});
    for (int j = 0; j < n; ++j) {
        for (std::size_t s = 0; s < topo.slots[j].size(); ++s) {
            const auto& slot = topo.slots[j][s];
            const int flat = slot_offset_[j] + static_cast<int>(s);
            slot_post_[flat] = j;
            slot_inh_[flat] = slot.inhibitory ? 1 : 0;
            (slot.external ? ext_fanout_ : rec_fanout_)[slot.source].push_back(flat);
        }
    }
}

void Simulator::set_weights(std::vector<double> w) {
    if (w.size() != weights_.size())
        throw std::invalid_argument("set_weights: size mismatch");
    weights_ = std::move(w);
}

void Simulator::rewire(const Topology& topo) {
    if (topo.n_neurons != config_.topology.n_neurons)
        throw std::invalid_argument("rewire: neuron count must match");
    const auto old_topo = config_.topology;
    const auto old_weights = weights_;
    const auto old_offset = slot_offset_;

    config_.topology = topo;
    *this = Simulator(config_, rng_.next());

    // Slots that keep their role keep their weight; reassigned slots are zeroed.
    for (int j = 0; j < topo.n_neurons; ++j) {
        const std::size_t common =
            std::min(topo.slots[j].size(), old_topo.slots[j].size());
        for (std::size_t s = 0; s < common; ++s) {
            const auto& a = topo.slots[j][s];
            const auto& b = old_topo.slots[j][s];
            if (a.source == b.source && a.external == b.external &&
                a.inhibitory == b.inhibitory)
                weights_[slot_offset_[j] + s] = old_weights[old_offset[j] + s];
        }
    }
}

void Simulator::reset_state(const RunOptions& options) {
    const int n = config_.topology.n_neurons;
    u_.assign(n, config_.neuron.u_leak);
    if (options.init_jitter_seed) {
        Rng jitter(*options.init_jitter_seed);
        for (int j = 0; j < n; ++j)
            u_[j] = jitter.uniform(config_.neuron.u_reset, config_.neuron.u_thresh);
    }
    i_exc_.assign(n, 0.0);
    i_inh_.assign(n, 0.0);
    refractory_until_.assign(n, -1.0);
    last_post_.assign(n, -1.0);
    std::fill(f_acc_.begin(), f_acc_.end(), 0.0);
    const int ring = delay_steps_ + 2;
    ring_exc_.assign(ring, std::vector<double>(n, 0.0));
    ring_inh_.assign(ring, std::vector<double>(n, 0.0));
}

RunResult Simulator::run(const SpikeRecord& stimulus, double duration_ms,
                         const RunOptions& options) {
    if (stimulus.duration_ms < duration_ms && duration_ms > 0.0)
        throw std::invalid_argument("run: stimulus shorter than run duration");

    const double dt = config_.dt;
    const auto& np = config_.neuron;
    const auto& sp = config_.synapse;
    const LifPropagator prop(np, sp, dt);
    const double jump_exc = sp.gamma / sp.tau_syn_exc; // uA per unit weight
    const double jump_inh = sp.gamma / sp.tau_syn_inh;
    const int n = config_.topology.n_neurons;
    const int ring = delay_steps_ + 2;
    const int steps_per_update =
        static_cast<int>(std::lround(config_.plasticity.period / dt));
    const std::int64_t n_steps = static_cast<std::int64_t>(std::llround(duration_ms / dt));

    reset_state(options);

    RunResult result;
    result.spikes.kind = SourceKind::neuron;
    result.spikes.n_sources = n;
    result.spikes.duration_ms = duration_ms;
    result.weights.cadence_ms = options.weight_snapshot_every_ms;
    const std::int64_t snap_steps =
        options.weight_snapshot_every_ms > 0.0
            ? static_cast<std::int64_t>(std::llround(options.weight_snapshot_every_ms / dt))
            : 0;

    std::size_t stim_idx = 0;
    std::vector<int> fired;
    fired.reserve(n);
    std::uint64_t n_spikes = 0;

    for (std::int64_t k = 0; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * dt;

        // stimulus events emitted in [t, t+dt): enqueue arrival at t + d_syn
        while (stim_idx < stimulus.events.size() &&
               stimulus.events[stim_idx].t < t + dt) {
            const auto& ev = stimulus.events[stim_idx++];
            if (ev.t < t) continue; // before run start
            const int arr = static_cast<int>((k + delay_steps_) % ring);
            for (int flat : ext_fanout_[ev.source]) {
                const double w = weights_[flat];
                if (slot_inh_[flat])
                    ring_inh_[arr][slot_post_[flat]] += jump_inh * w;
                else
                    ring_exc_[arr][slot_post_[flat]] += jump_exc * w;
                if (options.plasticity_on) on_pre_spike(slot_post_[flat], flat, ev.t);
            }
        }

        // deliver delayed events due at t
        {
            auto& de = ring_exc_[k % ring];
            auto& di = ring_inh_[k % ring];
            for (int j = 0; j < n; ++j) {
                i_exc_[j] += de[j];
                i_inh_[j] += di[j];
                de[j] = 0.0;
                di[j] = 0.0;
            }
        }

        // exact propagation over [t, t+dt]
        const double t_next = t + dt;
        fired.clear();
        for (int j = 0; j < n; ++j) {
            const double u_new = np.u_leak + (u_[j] - np.u_leak) * prop.e_mem +
                                 prop.k_exc * i_exc_[j] - prop.k_inh * i_inh_[j];
            i_exc_[j] *= prop.e_exc;
            i_inh_[j] *= prop.e_inh;
            if (t_next < refractory_until_[j]) {
                u_[j] = np.u_reset;
            } else if (u_new >= np.u_thresh) {
                u_[j] = np.u_reset;
                refractory_until_[j] = t_next + np.tau_ref;
                fired.push_back(j);
            } else {
                u_[j] = u_new;
            }
        }

        for (int j : fired) {
            if (t_next < duration_ms) ++n_spikes;
            if (options.record_spikes && t_next < duration_ms)
                result.spikes.events.push_back({j, t_next});
            // recurrent deliveries at t_next + d_syn
            const int arr = static_cast<int>((k + 1 + delay_steps_) % ring);
            for (int flat : rec_fanout_[j]) {
                const double w = weights_[flat];
                if (slot_inh_[flat])
                    ring_inh_[arr][slot_post_[flat]] += jump_inh * w;
                else
                    ring_exc_[arr][slot_post_[flat]] += jump_exc * w;
                if (options.plasticity_on) on_pre_spike(slot_post_[flat], flat, t_next);
            }
        }
        // post-spike bookkeeping after pairing: same-step pre/post pairs are
        // excluded by the strict anticausality condition anyway
        for (int j : fired) last_post_[j] = t_next;

        if (options.plasticity_on && (k + 1) % steps_per_update == 0) {
            update_weights(weights_, f_acc_, config_.plasticity, config_.w_max, rng_);
            std::fill(f_acc_.begin(), f_acc_.end(), 0.0);
            if (snap_steps > 0 && (k + 1) % snap_steps == 0) {
                result.weights.times.push_back(t_next);
                result.weights.snapshots.push_back(weights_);
            }
        }
    }

    result.weights.times.push_back(duration_ms);
    result.weights.snapshots.push_back(weights_);
    result.mean_rate_hz =
        duration_ms > 0.0
            ? static_cast<double>(n_spikes) / n / (duration_ms / 1000.0)
            : 0.0;
    result.spikes.events.shrink_to_fit();
    return result;
}

void Simulator::on_pre_spike(int post, int flat, double t_pre) {
    const double post_t = last_post_[post];
    if (post_t >= 0.0 && post_t < t_pre)
        f_acc_[flat] += config_.plasticity.eta_stdp *
                        std::exp((post_t - t_pre) / config_.plasticity.tau_stdp);
}

void write_weights_csv(const std::string& path, const WeightTrace& trace) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    if (trace.snapshots.empty()) return;
    os << "t_ms";
    for (std::size_t s = 0; s < trace.snapshots[0].size(); ++s) os << ",w" << s;
    os << "\n";
    char buf[32];
    for (std::size_t r = 0; r < trace.snapshots.size(); ++r) {
        os << trace.times[r];
        for (double w : trace.snapshots[r]) {
            std::snprintf(buf, sizeof(buf), ",%.9g", w);
            os << buf;
        }
        os << "\n";
    }
}

std::vector<double> read_weights_csv_final(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::string line, last;
    std::getline(is, line); // header
    while (std::getline(is, line))
        if (!line.empty()) last = line;
    std::vector<double> w;
    std::istringstream ss(last);
    std::string tok;
    bool first = true;
    while (std::getline(ss, tok, ',')) {
        if (first) { first = false; continue; } // t_ms column
        w.push_back(std::stod(tok));
    }
    return w;
}

} // namespace critnet
