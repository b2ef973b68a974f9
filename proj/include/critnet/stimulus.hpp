#pragma once

#include <cstdint>
#include <optional>

#include "critnet/spikes.hpp"

namespace critnet {

enum class StimulusKind { independent_poisson, shared_poisson, replay };

struct Perturbation {
    double t_pert = 1000.0; // ms
    int n_pert = 6;         // extra spikes, on distinct sources
};

struct StimulusConfig {
    StimulusKind kind = StimulusKind::independent_poisson;
    double nu = 29.0; // Hz per source
    int n_sources = 32;
    double duration_ms = 0.0;
    std::uint64_t seed = 0;
    double dt_grid = 0.1; // ms; spike times snapped to this grid
    std::optional<Perturbation> perturbation;
};

/// Homogeneous Poisson spike trains on the simulation grid. Shared mode
/// duplicates one realization across all sources. A perturbation inserts
/// n_pert simultaneous extra spikes at t_pert on distinct random sources.
SpikeRecord generate(const StimulusConfig& config);

} // namespace critnet
