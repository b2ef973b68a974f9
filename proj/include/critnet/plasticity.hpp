#pragma once

#include <vector>

#include "critnet/rng.hpp"

namespace critnet {

struct PlasticityParams {
    double lambda_stdp = 11.0 / 128.0;
    double lambda_drift = 1.0 / 512.0;
    double eta_stdp = 0.071;   // kernel amplitude
    double tau_stdp = 6.8;     // ms
    double n_amp = 15.0 / 16.0; // noise half-range
    double n_mean = 3.0 / 16.0; // noise bias; E[n] > 0 (net potentiation)
    double period = 2750.0;    // ms, update period T; calibrated, see README
};

/// Anticausal STDP kernel over one window: sum of eta*exp((t_post - t_pre)/tau)
/// over nearest-neighbor pairs with t_pre > t_post. Pre spikes must fall in
/// the window; a post spike is consumed once paired. Causal pairs contribute
/// zero. Times must be sorted ascending.
double stdp_kernel(const std::vector<double>& pre_times,
                   const std::vector<double>& post_times,
                   const PlasticityParams& params);

/// One weight update tick: w' = clip(w - lambda_stdp*f - lambda_drift*w + n, 0, w_max)
/// with n ~ unif(-n_amp, n_amp) + n_mean drawn i.i.d. per synapse.
/// f_acc holds the kernel value accumulated per synapse over the past window.
void update_weights(std::vector<double>& weights,
                    const std::vector<double>& f_acc,
                    const PlasticityParams& params, double w_max, Rng& rng);

} // namespace critnet
