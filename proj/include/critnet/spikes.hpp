#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace critnet {

enum class SourceKind { neuron, stimulus };

struct SpikeEvent {
    int source = 0;
    double t = 0.0; // ms
};

/// Timestamped event stream, ordered by time. Covers [0, duration_ms).
struct SpikeRecord {
    SourceKind kind = SourceKind::neuron;
    int n_sources = 0;
    double duration_ms = 0.0;
    std::vector<SpikeEvent> events;

    std::size_t size() const { return events.size(); }
};

/// Per-source spike counts on a fixed time grid. Bin t covers
/// [t*dt_bin, (t+1)*dt_bin).
struct BinnedSeries {
    double dt_bin = 1.0; // ms
    int n_bins = 0;
    int n_sources = 0;
    std::vector<std::vector<int>> counts; // [source][bin]
    std::vector<int> population;          // column sum of counts

    int binary(int source, int bin) const {
        return counts[source][bin] > 0 ? 1 : 0;
    }
    std::vector<int> binary_row(int source) const;
};

BinnedSeries bin(const SpikeRecord& record, double dt_bin);

/// Mean gap between consecutive events of the merged population train.
/// Throws std::invalid_argument with fewer than two events.
double mean_iei(const SpikeRecord& record);

/// One avalanche size per maximal run of non-empty population bins.
std::vector<std::int64_t> extract_avalanches(const std::vector<int>& population);

// Newline-delimited spike file format:
//   # kind=<neuron|stimulus> duration_ms=<D> n_sources=<N>
//   source_id<TAB>time_ms
void write_spikes(std::ostream& os, const SpikeRecord& record);
void write_spikes_file(const std::string& path, const SpikeRecord& record);
SpikeRecord read_spikes(std::istream& is);
SpikeRecord read_spikes_file(const std::string& path);

} // namespace critnet
