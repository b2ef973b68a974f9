#include "critnet/info.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace critnet {

namespace {

double entropy_from_counts(const std::unordered_map<long long, long long>& c,
                           double n) {
    double h = 0.0;
    for (const auto& [key, cnt] : c) {
        (void)key;
        if (cnt == 0) continue;
        const double p = double(cnt) / n;
        h -= p * std::log2(p);
    }
    return h;
}

} // namespace

double entropy(const std::vector<int>& series) {
    if (series.empty()) throw std::invalid_argument("entropy: empty series");
    std::unordered_map<long long, long long> counts;
    for (int v : series) ++counts[v];
    return entropy_from_counts(counts, double(series.size()));
}

double joint_entropy(const std::vector<const std::vector<int>*>& columns) {
    if (columns.empty() || columns[0]->empty())
        throw std::invalid_argument("joint_entropy: empty input");
    const std::size_t n = columns[0]->size();
    for (const auto* c : columns)
        if (c->size() != n)
            throw std::invalid_argument("joint_entropy: length mismatch");
    std::unordered_map<long long, long long> counts;
    for (std::size_t t = 0; t < n; ++t) {
        long long key = 0;
        for (const auto* c : columns) key = key * 1'000'003 + (*c)[t];
        ++counts[key];
    }
    return entropy_from_counts(counts, double(n));
}

double mutual_information(const std::vector<int>& x,
                          const std::vector<int>& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("mutual_information: length mismatch");
    return entropy(x) + entropy(y) - joint_entropy({&x, &y});
}

Embedding embed_past(const std::vector<int>& x, int l) {
    if (l < 1) throw std::invalid_argument("embed_past: l must be >= 1");
    if (x.size() <= std::size_t(l))
        throw std::invalid_argument("embed_past: series shorter than l+1");
    Embedding e;
    const std::size_t n = x.size();
    e.current.reserve(n - l);
    e.past.reserve(n - l);
    for (std::size_t t = l; t < n; ++t) {
        int state = 0;
        for (int k = 1; k <= l; ++k)
            state = (state << 1) | (x[t - k] ? 1 : 0);
        e.current.push_back(x[t] ? 1 : 0);
        e.past.push_back(state);
    }
    return e;
}

double active_information_storage(const std::vector<int>& x, int l) {
    auto e = embed_past(x, l);
    return mutual_information(e.current, e.past);
}

double transfer_entropy(const std::vector<int>& src,
                        const std::vector<int>& tgt, int l) {
    if (src.size() != tgt.size())
        throw std::invalid_argument("transfer_entropy: length mismatch");
    auto es = embed_past(src, l);
    auto et = embed_past(tgt, l);
    // TE = H(x,g) - H(g) - H(x,g,s) + H(g,s) with x = tgt(t),
    // g = tgt past, s = src past.
    return joint_entropy({&et.current, &et.past}) -
           joint_entropy({&et.past}) -
           joint_entropy({&et.current, &et.past, &es.past}) +
           joint_entropy({&et.past, &es.past});
}

double joint_history_mi(const std::vector<int>& src,
                        const std::vector<int>& tgt, int l) {
    if (src.size() != tgt.size())
        throw std::invalid_argument("joint_history_mi: length mismatch");
    auto es = embed_past(src, l);
    auto et = embed_past(tgt, l);
    return joint_entropy({&et.current}) +
           joint_entropy({&et.past, &es.past}) -
           joint_entropy({&et.current, &et.past, &es.past});
}

double lagged_mi(const std::vector<int>& x, const std::vector<int>& y,
                 int tau) {
    if (x.size() != y.size())
        throw std::invalid_argument("lagged_mi: length mismatch");
    if (tau < 0 || x.size() <= std::size_t(tau))
        throw std::invalid_argument("lagged_mi: tau out of range");
    const std::size_t n = x.size() - tau;
    std::vector<int> xs(x.begin(), x.begin() + n);
    std::vector<int> ys(y.begin() + tau, y.end());
    return mutual_information(xs, ys);
}

double memory_capacity(const std::vector<int>& x, const std::vector<int>& y,
                       int n_tau, double dt_bin) {
    if (n_tau < 1) throw std::invalid_argument("memory_capacity: n_tau >= 1");
    if (x.size() <= std::size_t(n_tau))
        throw std::invalid_argument("memory_capacity: series too short");
    std::vector<double> i_tau(n_tau + 1, 0.0);
    for (int tau = 1; tau <= n_tau; ++tau) i_tau[tau] = lagged_mi(x, y, tau);
    double mc = 0.0;
    for (int tau = 1; tau <= n_tau; ++tau)
        mc += dt_bin * (i_tau[tau] - i_tau[n_tau]);
    return mc;
}

} // namespace critnet
