#include "critnet/plasticity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace critnet {

double stdp_kernel(const std::vector<double>& pre_times,
                   const std::vector<double>& post_times,
                   const PlasticityParams& params) {
    double f = 0.0;
    std::size_t post_idx = 0;
    double last_post = -1.0;
    bool have_post = false;
    for (double t_pre : pre_times) {
        // most recent post spike strictly before this pre spike
        while (post_idx < post_times.size() && post_times[post_idx] < t_pre) {
            last_post = post_times[post_idx++];
            have_post = true;
        }
        if (have_post)
            f += params.eta_stdp * std::exp((last_post - t_pre) / params.tau_stdp);
    }
    return f;
}

void update_weights(std::vector<double>& weights,
                    const std::vector<double>& f_acc,
                    const PlasticityParams& params, double w_max, Rng& rng) {
    if (weights.size() != f_acc.size())
        throw std::invalid_argument("update_weights: size mismatch");
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double noise =
            rng.uniform(-params.n_amp, params.n_amp) + params.n_mean;
        const double dw = -params.lambda_stdp * f_acc[i]
                          - params.lambda_drift * weights[i] + noise;
        weights[i] = std::clamp(weights[i] + dw, 0.0, w_max);
    }
}

} // namespace critnet
