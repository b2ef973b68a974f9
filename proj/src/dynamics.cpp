#include "critnet/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace critnet {

namespace {

double mean_of(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / double(x.size());
}

} // namespace

BranchingEstimate estimate_branching(const std::vector<double>& population,
                                     double dt_bin) {
    const std::size_t n = population.size();
    if (n < 100)
        throw std::invalid_argument("estimate_branching: need >= 100 bins");

    // OLS of a(t+1) on a(t) over the n-1 consecutive pairs.
    double mx = 0.0, my = 0.0;
    for (std::size_t t = 0; t + 1 < n; ++t) {
        mx += population[t];
        my += population[t + 1];
    }
    mx /= double(n - 1);
    my /= double(n - 1);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t t = 0; t + 1 < n; ++t) {
        const double dx = population[t] - mx;
        sxx += dx * dx;
        sxy += dx * (population[t + 1] - my);
    }
    if (sxx < 1e-12)
        throw std::runtime_error("estimate_branching: zero-variance activity");

    BranchingEstimate est;
    est.dt_bin = dt_bin;
    est.m = sxy / sxx;
    est.h = my - est.m * mx;
    est.tau_branch = (est.m > 0.0 && est.m < 1.0)
                         ? -dt_bin / std::log(est.m)
                         : std::numeric_limits<double>::infinity();
    est.tau_corr = autocorrelation_time_bins(population) * dt_bin;
    est.fano = fano_factor(population);
    return est;
}

double autocorrelation_time_bins(const std::vector<double>& population) {
    const std::size_t n = population.size();
    if (n < 100)
        throw std::invalid_argument("autocorrelation_time: need >= 100 bins");
    const double mu = mean_of(population);
    double var = 0.0;
    for (double a : population) var += (a - mu) * (a - mu);
    var /= double(n);
    if (var < 1e-12)
        throw std::runtime_error("autocorrelation_time: zero variance");

    const std::size_t max_lag = std::min<std::size_t>(200, n / 10);
    std::vector<double> rho(max_lag + 1, 0.0);
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double s = 0.0;
        for (std::size_t t = 0; t + k < n; ++t)
            s += (population[t] - mu) * (population[t + k] - mu);
        rho[k] = s / (double(n) * var);
    }
    if (rho[1] <= 0.0) return std::numeric_limits<double>::quiet_NaN();

    // Least squares of rho(k) against A*exp(-k/tau): for fixed tau the
    // optimal A is closed-form; golden-section search over log tau.
    auto sse = [&](double tau) {
        double se = 0.0, see = 0.0;
        for (std::size_t k = 1; k <= max_lag; ++k) {
            const double e = std::exp(-double(k) / tau);
            se += rho[k] * e;
            see += e * e;
        }
        const double a = se / see;
        double s = 0.0;
        for (std::size_t k = 1; k <= max_lag; ++k) {
            const double r = rho[k] - a * std::exp(-double(k) / tau);
            s += r * r;
        }
        return s;
    };
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = std::log(1e-2), hi = std::log(1e4);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = sse(std::exp(x1)), f2 = sse(std::exp(x2));
    while (hi - lo > 1e-10) {
        if (f1 > f2) {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = sse(std::exp(x2));
        } else {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = sse(std::exp(x1));
        }
    }
    return std::exp(0.5 * (lo + hi));
}

double fano_factor(const std::vector<double>& population) {
    if (population.empty())
        throw std::invalid_argument("fano_factor: empty series");
    const double mu = mean_of(population);
    if (mu <= 0.0)
        throw std::runtime_error("fano_factor: silent activity");
    double var = 0.0;
    for (double a : population) var += (a - mu) * (a - mu);
    var /= double(population.size());
    return var / mu;
}

double vrd(const SpikeRecord& record_m, const SpikeRecord& record_n,
           double sigma, double dt_int) {
    if (record_m.n_sources != record_n.n_sources)
        throw std::invalid_argument("vrd: neuron count mismatch");
    const double duration =
        std::max(record_m.duration_ms, record_n.duration_ms);
    const std::size_t n_grid =
        std::size_t(std::ceil(duration / dt_int)) + 1;
    const int n_src = record_m.n_sources;
    const double half_width = 5.0 * sigma;
    const int half_bins = int(std::ceil(half_width / dt_int));

    auto filter = [&](const SpikeRecord& rec, int src,
                      std::vector<double>& trace) {
        std::fill(trace.begin(), trace.end(), 0.0);
        for (const auto& ev : rec.events) {
            if (ev.source != src) continue;
            const int c = int(std::lround(ev.t / dt_int));
            const int lo = std::max(0, c - half_bins);
            const int hi = std::min(int(n_grid) - 1, c + half_bins);
            for (int b = lo; b <= hi; ++b) {
                const double d = double(b) * dt_int - ev.t;
                trace[b] += std::exp(-d * d / (2.0 * sigma * sigma));
            }
        }
    };

    std::vector<double> tm(n_grid), tn(n_grid);
    double total = 0.0;
    for (int src = 0; src < n_src; ++src) {
        filter(record_m, src, tm);
        filter(record_n, src, tn);
        for (std::size_t b = 0; b < n_grid; ++b) {
            const double sum = tm[b] + tn[b];
            if (sum < 1e-12) continue;
            const double diff = tm[b] - tn[b];
            total += (diff * diff) / (sum * sum);
        }
    }
    return total * dt_int / sigma;
}

double susceptibility(const SpikeRecord& record, double t_pert, int k_ext,
                      double dt_bin) {
    if (t_pert < 0.0 || t_pert + 2.0 * dt_bin > record.duration_ms)
        throw std::invalid_argument("susceptibility: t_pert outside run");
    if (k_ext <= 0)
        throw std::invalid_argument("susceptibility: K_ext must be positive");
    const std::size_t i = std::size_t(t_pert / dt_bin);
    double a0 = 0.0, a1 = 0.0;
    for (const auto& ev : record.events) {
        const std::size_t b = std::size_t(ev.t / dt_bin);
        if (b == i) a0 += 1.0;
        else if (b == i + 1) a1 += 1.0;
    }
    return (a1 - a0) / (double(k_ext) * double(k_ext));
}

} // namespace critnet
