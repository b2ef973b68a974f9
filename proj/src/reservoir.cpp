#include "critnet/reservoir.hpp"

#include "critnet/info.hpp"
#include "critnet/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace critnet {

namespace {

// Solves A x = b in place by Gaussian elimination with partial pivoting.
std::vector<double> solve_linear(std::vector<std::vector<double>> a,
                                 std::vector<double> b) {
    const int n = int(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        if (std::abs(a[col][col]) < 1e-300)
            throw std::runtime_error("train_readout: singular system");
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return x;
}

std::vector<double> ridge_fit(const std::vector<std::vector<int>>& activity,
                              const std::vector<double>& targets,
                              const std::vector<double>& sample_weights) {
    const int d = int(activity.size()) + 1; // + intercept
    const std::size_t n = targets.size();
    std::vector<std::vector<double>> gram(d, std::vector<double>(d, 0.0));
    std::vector<double> rhs(d, 0.0);
    std::vector<double> x(d, 1.0);
    for (std::size_t t = 0; t < n; ++t) {
        for (int j = 0; j + 1 < d; ++j) x[j] = double(activity[j][t]);
        const double v = sample_weights[t];
        for (int i = 0; i < d; ++i) {
            rhs[i] += v * x[i] * targets[t];
            for (int j = i; j < d; ++j) gram[i][j] += v * x[i] * x[j];
        }
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < i; ++j) gram[i][j] = gram[j][i];
    double trace = 0.0;
    for (int i = 0; i < d; ++i) trace += gram[i][i];
    const double lambda = 1e-6 * trace / double(d);
    for (int i = 0; i < d; ++i) gram[i][i] += lambda;
    return solve_linear(std::move(gram), std::move(rhs));
}

std::vector<double> balance_weights(const std::vector<int>& labels,
                                    int n_classes) {
    std::vector<double> freq(n_classes, 0.0);
    for (int l : labels) freq[l] += 1.0;
    std::vector<double> w(labels.size(), 0.0);
    double sum = 0.0;
    for (std::size_t t = 0; t < labels.size(); ++t) {
        // Tempered inverse-frequency balancing. Full 1/freq lets a class
        // with a handful of samples dominate its unit's fit, which breaks
        // the winner-take-all comparison across units at 29 Hz bin
        // occupancy; the square root keeps rare classes influential
        // without letting them degenerate.
        w[t] = 1.0 / std::sqrt(freq[labels[t]]);
        sum += w[t];
    }
    const double scale = double(labels.size()) / sum; // mean 1
    for (auto& v : w) v *= scale;
    return w;
}

} // namespace

std::vector<int> label_parity(const std::vector<int>& s, int n) {
    if (n < 1) throw std::invalid_argument("label_parity: n must be >= 1");
    if (s.size() < std::size_t(n)) return {};
    std::vector<int> out;
    out.reserve(s.size() - n + 1);
    for (std::size_t t = n - 1; t < s.size(); ++t) {
        int p = 0;
        for (int k = 0; k < n; ++k) p ^= (s[t - k] ? 1 : 0);
        out.push_back(p);
    }
    return out;
}

std::vector<int> label_sum(const std::vector<int>& s, int n) {
    if (n < 1) throw std::invalid_argument("label_sum: n must be >= 1");
    if (s.size() < std::size_t(n)) return {};
    std::vector<int> out;
    out.reserve(s.size() - n + 1);
    for (std::size_t t = n - 1; t < s.size(); ++t) {
        int z = 0;
        for (int k = 0; k < n; ++k) z += (s[t - k] ? 1 : 0);
        out.push_back(z);
    }
    return out;
}

Readout train_readout(const std::vector<std::vector<int>>& activity,
                      const std::vector<int>& labels, TaskKind task) {
    if (activity.empty())
        throw std::invalid_argument("train_readout: no readout neurons");
    const std::size_t n = labels.size();
    for (const auto& row : activity)
        if (row.size() != n)
            throw std::invalid_argument("train_readout: length mismatch");

    const int max_label = *std::max_element(labels.begin(), labels.end());
    const int min_label = *std::min_element(labels.begin(), labels.end());
    if (max_label == min_label)
        throw std::runtime_error("train_readout: single-class labels");

    Readout r;
    r.task = task;
    if (task == TaskKind::parity) {
        if (max_label > 1 || min_label < 0)
            throw std::invalid_argument("train_readout: parity labels not binary");
        r.n_classes = 2;
        auto w = balance_weights(labels, 2);
        std::vector<double> y(n);
        for (std::size_t t = 0; t < n; ++t) y[t] = double(labels[t]);
        r.weights.push_back(ridge_fit(activity, y, w));
    } else {
        r.n_classes = max_label + 1;
        auto w = balance_weights(labels, r.n_classes);
        for (int cls = 0; cls < r.n_classes; ++cls) {
            std::vector<double> y(n);
            for (std::size_t t = 0; t < n; ++t)
                y[t] = labels[t] == cls ? 1.0 : 0.0;
            r.weights.push_back(ridge_fit(activity, y, w));
        }
    }
    return r;
}

std::vector<int> predict(const Readout& readout,
                         const std::vector<std::vector<int>>& activity) {
    if (activity.empty())
        throw std::invalid_argument("predict: no readout neurons");
    const std::size_t n = activity[0].size();
    const int d = int(activity.size());
    std::vector<int> out(n, 0);
    for (std::size_t t = 0; t < n; ++t) {
        if (readout.task == TaskKind::parity) {
            double s = readout.weights[0][d]; // intercept
            for (int j = 0; j < d; ++j)
                s += readout.weights[0][j] * double(activity[j][t]);
            out[t] = s >= 0.5 ? 1 : 0;
        } else {
            int best = 0;
            double best_score = -1e300;
            for (int cls = 0; cls < readout.n_classes; ++cls) {
                double s = readout.weights[cls][d];
                for (int j = 0; j < d; ++j)
                    s += readout.weights[cls][j] * double(activity[j][t]);
                if (s > best_score + 1e-12) { // ties go to the smaller class
                    best_score = s;
                    best = cls;
                }
            }
            out[t] = best;
        }
    }
    return out;
}

TaskResult run_task(const std::vector<std::vector<int>>& train_activity,
                    const std::vector<int>& train_labels,
                    const std::vector<std::vector<int>>& test_activity,
                    const std::vector<int>& test_labels, TaskKind task,
                    std::uint64_t shuffle_seed) {
    auto readout = train_readout(train_activity, train_labels, task);
    auto pred = predict(readout, test_activity);

    TaskResult res;
    res.i_raw = mutual_information(pred, test_labels);

    // identical pipeline on permuted training labels
    std::vector<int> shuffled = train_labels;
    Rng rng(shuffle_seed);
    for (std::size_t i = shuffled.size(); i > 1; --i)
        std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    auto base = train_readout(train_activity, shuffled, task);
    auto base_pred = predict(base, test_activity);
    res.i_shuffle = mutual_information(base_pred, test_labels);

    res.i_corrected = res.i_raw - res.i_shuffle;
    const double h = entropy(test_labels);
    res.normalized = h > 0.0 ? res.i_corrected / h : 0.0;
    return res;
}

} // namespace critnet
