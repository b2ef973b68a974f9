#pragma once

#include "critnet/spikes.hpp"

#include <vector>

namespace critnet {

/// AR(1) view of the binned population activity:
/// <a(t+1)|a(t)> = m*a(t) + h.
struct BranchingEstimate {
    double m = 0.0;          // branching ratio (OLS slope)
    double h = 0.0;          // drive offset (OLS intercept)
    double tau_branch = 0.0; // ms, -dt/ln(m); +inf when m >= 1
    double tau_corr = 0.0;   // ms, exponential fit of the autocorrelation;
                             // NaN when the fit is degenerate
    double fano = 0.0;       // F = sigma_a^2 / mu_a
    double dt_bin = 0.0;     // ms
};

/// OLS regression of a(t+1) on a(t). Requires >= 100 bins and
/// non-degenerate variance. tau_corr/fano are filled in as well.
BranchingEstimate estimate_branching(const std::vector<double>& population,
                                     double dt_bin);

/// Biased-normalization autocorrelation (1/(n*sigma^2), no lag-dependent
/// correction) fitted by A*exp(-lag/tau) over lags 1..min(200, n/10).
/// Returns tau in bin units; NaN if rho(1) <= 0.
double autocorrelation_time_bins(const std::vector<double>& population);

/// Fano factor of the binned population activity.
double fano_factor(const std::vector<double>& population);

/// Van-Rossum-style distance between two spike records: per-neuron
/// Gaussian-filtered traces compared by the normalized squared difference,
/// integrated over [0, duration) on a dt_int grid, prefactor 1/sigma.
/// Bins where both traces vanish contribute zero.
double vrd(const SpikeRecord& record_m, const SpikeRecord& record_n,
           double sigma = 4.9, double dt_int = 0.1);

/// chi = (a(t_pert + dt_bin) - a(t_pert)) / K_ext^2 with the population
/// binned at dt_bin (default: the synaptic delay).
double susceptibility(const SpikeRecord& record, double t_pert, int k_ext,
                      double dt_bin = 1.9);

} // namespace critnet
