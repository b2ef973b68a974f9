#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "critnet/network.hpp"
#include "critnet/reservoir.hpp"

namespace critnet {

/// Experiment durations in milliseconds. Desk-scale default shortens the
/// burn-in to 300 s; the full-scale value is 625 s.
struct Durations {
    double t_burnin = 300000.0;
    double t_exp = 104000.0;
    double t_static = 1000.0;
    double t_train = 104000.0;
    double t_test = 21000.0;
    double t_pert = 2000.0;
    double t_pert_at = 1000.0; // perturbation instant within the trial

    /// Throws std::invalid_argument on non-positive durations (t_burnin may
    /// be zero) or t_pert_at >= t_pert.
    void validate() const;
};

/// Everything needed to reproduce a full experiment: model parameters,
/// grid, seed policy, and durations.
struct ExperimentPlan {
    NeuronParams neuron;
    SynapseParams synapse;
    PlasticityParams plasticity;
    double w_max = 63.0;
    double dt = 0.1; // ms

    int n_neurons = 32;
    int n_inh = 6;
    TopologyMode topology_mode = TopologyMode::slot_exact;
    double nu = 29.0; // Hz, external input rate per source

    std::vector<int> kext_grid = {8, 10, 12, 16, 24, 32};
    int n_seeds = 10;
    int trials_per_weightmatrix = 10;
    Durations durations;
    std::uint64_t master_seed = 1;

    /// Full-scale statistics: 100 seeds, 625 s burn-in.
    void apply_paper_scale();
    void validate() const;

    /// Network configuration for one grid cell; the topology is drawn from
    /// the cell seed so that cells are independent.
    NetworkConfig make_config(int k_ext, std::uint64_t cell_seed) const;
    /// Counter-based per-cell seed, order-insensitive in the grid.
    std::uint64_t cell_seed(int k_ext, int seed_index) const;
};

struct BurnInResult {
    std::vector<double> weights; // final flattened weight matrix
    double rate_hz = 0.0;        // mean per-neuron rate over the burn-in
};

/// Plasticity-on run from all-zero weights for t_burnin under independent
/// Poisson drive. t_burnin = 0 returns the all-zero matrix.
BurnInResult burn_in(const ExperimentPlan& plan, int k_ext, int seed_index);

/// One sweep cell: burn-in, frozen-weight run of t_exp, then rate,
/// branching (binned at tau_ref) and avalanche analyses (binned at the
/// population mean inter-event interval).
struct CellResult {
    int k_ext = 0;
    int seed_index = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;

    double burnin_rate_hz = 0.0;
    double rate_hz = 0.0; // frozen-run per-neuron rate
    double m = 0.0;
    double h = 0.0;
    double tau_branch_ms = 0.0;
    double tau_corr_ms = 0.0;
    double fano = 0.0;
    double alpha_s = 0.0;
    double s_cut = 0.0;
    double p_value = 1.0;
    std::string preferred = "undecided";
    int n_avalanches = 0;

    // carried for pooled analyses; not serialized to the CSV
    std::vector<long long> avalanche_sizes;
    std::vector<double> weights;
};

CellResult run_cell(const ExperimentPlan& plan, int k_ext, int seed_index);

/// Runs every (k_ext, seed) cell; a failing cell is recorded with ok=false
/// and its error message, and the sweep continues.
std::vector<CellResult> sweep(const ExperimentPlan& plan);

/// Long-format result CSV with one row per cell; rows are emitted in grid
/// order so reruns are byte-identical.
std::string sweep_csv(const std::vector<CellResult>& cells);
void write_sweep_csv(const std::string& path,
                     const std::vector<CellResult>& cells);

/// Run manifest (JSON): plan parameters, derived cell seeds, and a plan
/// hash; replaying the manifest reproduces every CSV byte-identically.
std::string manifest_json(const ExperimentPlan& plan);
void write_manifest(const std::string& path, const ExperimentPlan& plan);

/// Median / quantile helpers (linear interpolation); used by the
/// aggregation convention "median with 5-95% interval".
double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);

/// Paired perturbation trials on a frozen weight matrix: each trial runs
/// the identical stimulus and initial state with and without a pulse of
/// n_pert extra spikes at t_pert_at, yielding susceptibility chi from the
/// perturbed run and the van-Rossum-style distance between the pair.
struct PerturbationStats {
    std::vector<double> chi; // one per trial
    std::vector<double> vrd;
};

PerturbationStats perturbation_trials(const ExperimentPlan& plan, int k_ext,
                                      int seed_index,
                                      const std::vector<double>& weights,
                                      int n_trials, int n_pert = 6);

/// Reservoir-task evaluation on a frozen weight matrix: shared Poisson
/// stimulus of t_train + t_test, 1 ms binning, labels over the last n_bits
/// stimulus bins, readout over a random n_read-neuron subset.
TaskResult evaluate_task(const ExperimentPlan& plan, int k_ext,
                         int seed_index, const std::vector<double>& weights,
                         TaskKind task, int n_bits, int n_read = 16);

/// Task-independent information fingerprint of a frozen-weight run under
/// independent Poisson drive: plug-in MI, AIS, TE, joint history MI and the
/// four BROJA decomposition parts over n_pairs random ordered neuron pairs,
/// each normalized by the target neuron's entropy; medians over pairs.
struct Fingerprint {
    double mi = 0.0;
    double ais = 0.0;
    double te = 0.0;
    double joint_mi = 0.0;
    double unq1 = 0.0;
    double unq2 = 0.0;
    double shd = 0.0;
    double syn = 0.0;
    double consistency_gap = 0.0; // worst decomposition residual, bits
};

Fingerprint info_fingerprint(const ExperimentPlan& plan, int k_ext,
                             int seed_index,
                             const std::vector<double>& weights, int l = 4,
                             int n_pairs = 12, double dt_bin = 0.0,
                             double duration_ms = 0.0);

/// Task-switch protocol: burn-in at from_k, rewire to to_k (weights kept on
/// slots that keep their role, zeroed elsewhere), continue plasticity, and
/// evaluate at each checkpoint (in weight-update counts, ascending).
struct SwitchPoint {
    long long updates = 0;
    double time_ms = 0.0; // updates * plasticity period
    double m = 0.0;
    double rate_hz = 0.0;
    double parity_info = 0.0; // normalized parity performance; NaN if skipped
};

std::vector<SwitchPoint> task_switch(const ExperimentPlan& plan, int from_k,
                                     int to_k,
                                     const std::vector<long long>& checkpoints,
                                     int seed_index, bool eval_parity = false,
                                     int parity_bits = 15,
                                     double eval_duration_ms = 21000.0);

/// Finite-size scan with probabilistic topology at fixed k_ext/N ratio.
/// Each (size, seed) cell is calibrated individually: the recurrent gain
/// is scanned over a small per-size grid of fresh burn-ins, and a
/// candidate is kept only if its full frozen run lands in the
/// near-critical band at a comparable population rate. For the cross-size
/// comparison, avalanches are re-extracted at one absolute bin width (the
/// mean inter-event interval of the 32-neuron operating point): the
/// rate-adaptive bin shrinks like 1/N at matched per-neuron rate and
/// fragments large-network cascades. Per size, s_cut is the median over
/// kept cells of the 99.5th-percentile avalanche size; the returned
/// exponent is the log-log regression of s_cut against N.
struct SizePoint {
    int n = 0;
    int k_ext = 0;
    bool ok = false;
    std::string error;
    double alpha_s = 0.0;
    double s_cut = 0.0;
    int n_avalanches = 0;
    std::vector<double> seed_m;   // kept cells: full-run branching ratio
    std::vector<double> seed_cut; // kept cells: tail-quantile cutoff
};

struct FssResult {
    std::vector<SizePoint> points;
    double exponent = 0.0;  // slope of log s_cut vs log N
    double intercept = 0.0; // log-space intercept
};

FssResult finite_size_scan(const ExperimentPlan& plan,
                           const std::vector<int>& n_grid,
                           double kext_ratio = 0.25, int seeds_per_size = 6);

/// Ordinary least squares in log-log space; returns {slope, intercept}.
/// Exposed so synthetic scaling data can be checked directly.
std::pair<double, double> loglog_fit(const std::vector<double>& x,
                                     const std::vector<double>& y);

/// Flat key = value configuration file (TOML-style scalars and [a, b, c]
/// integer lists; '#' comments). Keys mirror the parameter-table names.
std::map<std::string, std::string> parse_config_file(const std::string& path);
std::map<std::string, std::string> parse_config(std::istream& is);
/// Applies parsed keys onto a plan; unknown keys throw.
void apply_config(ExperimentPlan& plan,
                  const std::map<std::string, std::string>& kv);

} // namespace critnet
