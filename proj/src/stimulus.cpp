#include "critnet/stimulus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "critnet/rng.hpp"

namespace critnet {

namespace {

// Exponential inter-arrival sampling, snapped to the grid. Two spikes
// landing in the same grid slot merge.
std::vector<double> poisson_train(double nu_hz, double duration_ms,
                                  double dt_grid, Rng& rng) {
    std::vector<double> times;
    if (nu_hz <= 0.0 || duration_ms <= 0.0) return times;
    const double rate_per_ms = nu_hz / 1000.0;
    double t = 0.0;
    std::int64_t last_slot = -1;
    for (;;) {
        t += rng.exponential(rate_per_ms);
        if (t >= duration_ms) break;
        const std::int64_t slot = static_cast<std::int64_t>(t / dt_grid);
        if (slot == last_slot) continue;
        last_slot = slot;
        times.push_back(static_cast<double>(slot) * dt_grid);
    }
    return times;
}

} // namespace

SpikeRecord generate(const StimulusConfig& config) {
    if (config.nu < 0.0) throw std::invalid_argument("stimulus: nu must be >= 0");
    if (config.perturbation &&
        (config.perturbation->t_pert < 0.0 ||
         config.perturbation->t_pert >= config.duration_ms))
        throw std::invalid_argument("stimulus: perturbation time outside duration");

    SpikeRecord record;
    record.kind = SourceKind::stimulus;
    record.n_sources = config.n_sources;
    record.duration_ms = config.duration_ms;

    Rng rng(config.seed);
    if (config.kind == StimulusKind::shared_poisson) {
        const auto train = poisson_train(config.nu, config.duration_ms,
                                         config.dt_grid, rng);
        for (double t : train)
            for (int i = 0; i < config.n_sources; ++i)
                record.events.push_back({i, t});
    } else {
        for (int i = 0; i < config.n_sources; ++i) {
            const auto train = poisson_train(config.nu, config.duration_ms,
                                             config.dt_grid, rng);
            for (double t : train) record.events.push_back({i, t});
        }
    }

    if (config.perturbation && config.perturbation->n_pert > 0) {
        const double t_pert =
            std::floor(config.perturbation->t_pert / config.dt_grid) * config.dt_grid;
        // n_pert distinct sources, drawn without replacement
        std::vector<int> ids(config.n_sources);
        for (int i = 0; i < config.n_sources; ++i) ids[i] = i;
        const int n = std::min(config.perturbation->n_pert, config.n_sources);
        for (int k = 0; k < n; ++k) {
            const int pick = k + static_cast<int>(rng.below(ids.size() - k));
            std::swap(ids[k], ids[pick]);
            record.events.push_back({ids[k], t_pert});
        }
    }

    std::stable_sort(record.events.begin(), record.events.end(),
                     [](const SpikeEvent& a, const SpikeEvent& b) { return a.t < b.t; });
    return record;
}

} // namespace critnet
