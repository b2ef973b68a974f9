#include "critnet/spikes.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace critnet {

std::vector<int> BinnedSeries::binary_row(int source) const {
    std::vector<int> out(counts[source].size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = counts[source][i] > 0 ? 1 : 0;
    return out;
}

BinnedSeries bin(const SpikeRecord& record, double dt_bin) {
    if (dt_bin <= 0.0) throw std::invalid_argument("bin: dt_bin must be > 0");
    BinnedSeries series;
    series.dt_bin = dt_bin;
    series.n_sources = record.n_sources;
    series.n_bins = static_cast<int>(std::ceil(record.duration_ms / dt_bin));
    if (series.n_bins < 0) series.n_bins = 0;
    series.counts.assign(record.n_sources, std::vector<int>(series.n_bins, 0));
    series.population.assign(series.n_bins, 0);
    for (const auto& ev : record.events) {
        const int b = static_cast<int>(ev.t / dt_bin);
        if (b < 0 || b >= series.n_bins) continue;
        ++series.counts[ev.source][b];
        ++series.population[b];
    }
    return series;
}

double mean_iei(const SpikeRecord& record) {
    if (record.events.size() < 2)
        throw std::invalid_argument("mean_iei: need at least two events");
    const double span = record.events.back().t - record.events.front().t;
    return span / static_cast<double>(record.events.size() - 1);
}

std::vector<std::int64_t> extract_avalanches(const std::vector<int>& population) {
    std::vector<std::int64_t> sizes;
    std::int64_t current = 0;
    for (int a : population) {
        if (a > 0) {
            current += a;
        } else if (current > 0) {
            sizes.push_back(current);
            current = 0;
        }
    }
    if (current > 0) sizes.push_back(current);
    return sizes;
}

void write_spikes(std::ostream& os, const SpikeRecord& record) {
    os << "# kind=" << (record.kind == SourceKind::neuron ? "neuron" : "stimulus")
       << " duration_ms=" << record.duration_ms
       << " n_sources=" << record.n_sources << "\n";
    char line[64];
    for (const auto& ev : record.events) {
        std::snprintf(line, sizeof(line), "%d\t%.6f\n", ev.source, ev.t);
        os << line;
    }
}

void write_spikes_file(const std::string& path, const SpikeRecord& record) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_spikes(os, record);
}

SpikeRecord read_spikes(std::istream& is) {
    SpikeRecord record;
    std::string header;
    if (!std::getline(is, header) || header.rfind("# kind=", 0) != 0)
        throw std::runtime_error("spike file: missing header");
    std::string kind;
    {
        std::istringstream hs(header.substr(1));
        std::string tok;
        while (hs >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = tok.substr(0, eq);
            const std::string val = tok.substr(eq + 1);
            if (key == "kind") kind = val;
            else if (key == "duration_ms") record.duration_ms = std::stod(val);
            else if (key == "n_sources") record.n_sources = std::stoi(val);
        }
    }
    if (kind == "neuron") record.kind = SourceKind::neuron;
    else if (kind == "stimulus") record.kind = SourceKind::stimulus;
    else throw std::runtime_error("spike file: bad kind '" + kind + "'");

    int source;
    double t;
    while (is >> source >> t) record.events.push_back({source, t});
    return record;
}

SpikeRecord read_spikes_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return read_spikes(is);
}

} // namespace critnet
