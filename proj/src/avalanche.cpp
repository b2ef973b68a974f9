#include "critnet/avalanche.hpp"

#include "critnet/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace critnet {

namespace {

constexpr long long k_support_max = 1'000'000;

// log of Z(alpha, s_cut) = sum_{s=s_min}^{1e6} s^-alpha exp(-s/s_cut).
// The summand is monotone decreasing for alpha > 0, so the tail after the
// exponential cutoff is negligible; stop once it cannot affect the total.
double log_z_powerlaw(double alpha, double s_cut, long long s_min) {
    double z = 0.0;
    for (long long s = s_min; s <= k_support_max; ++s) {
        const double term = std::exp(-alpha * std::log(double(s)) - double(s) / s_cut);
        z += term;
        if (term < z * 1e-16 && double(s) > 10.0 * s_cut) break;
    }
    return std::log(z);
}

// log of Z(beta) = sum_{s=s_min}^{1e6} exp(-s/beta) (geometric, closed form).
double log_z_exponential(double beta, long long s_min) {
    const double lx = -1.0 / beta; // log of the ratio
    const double x = std::exp(lx);
    const double n_terms = double(k_support_max - s_min + 1);
    // log( x^s_min * (1 - x^n) / (1 - x) )
    const double log_num = n_terms * lx < -40.0
                               ? 0.0
                               : std::log1p(-std::exp(n_terms * lx));
    return double(s_min) * lx + log_num - std::log1p(-x);
}

struct SuffStats {
    std::size_t n = 0;
    double sum_log = 0.0;
    double sum = 0.0;
};

SuffStats in_range_stats(const std::vector<long long>& sizes, int lo, int hi) {
    SuffStats st;
    for (long long s : sizes) {
        if (s < lo || s > hi) continue;
        ++st.n;
        st.sum_log += std::log(double(s));
        st.sum += double(s);
    }
    return st;
}

double loglik_pl(const SuffStats& st, double alpha, double s_cut, int s_min) {
    return -alpha * st.sum_log - st.sum / s_cut -
           double(st.n) * log_z_powerlaw(alpha, s_cut, s_min);
}

double loglik_exp(const SuffStats& st, double beta, int s_min) {
    return -st.sum / beta - double(st.n) * log_z_exponential(beta, s_min);
}

// Two-parameter Nelder-Mead in (alpha, log s_cut), maximizing loglik_pl.
struct Vertex {
    double a, b; // alpha, log s_cut
    double f;    // negative log-likelihood
};

double objective(const SuffStats& st, int s_min, double a, double b) {
    if (a <= 1.0 + 1e-9 || b > std::log(1e7) || b < std::log(1e-2))
        return 1e300;
    return -loglik_pl(st, a, std::exp(b), s_min);
}

void nelder_mead(const SuffStats& st, int s_min, double& alpha, double& s_cut) {
    auto f = [&](double a, double b) { return objective(st, s_min, a, b); };
    std::array<Vertex, 3> v{};
    v[0] = {alpha, std::log(s_cut), 0.0};
    v[1] = {alpha + 0.25, std::log(s_cut), 0.0};
    v[2] = {alpha, std::log(s_cut) + 0.5, 0.0};
    for (auto& x : v) x.f = f(x.a, x.b);

    const int max_iter = 2000;
    for (int it = 0; it < max_iter; ++it) {
        std::sort(v.begin(), v.end(),
                  [](const Vertex& p, const Vertex& q) { return p.f < q.f; });
        if (std::abs(v[2].f - v[0].f) < 1e-6) break;
        const double ca = 0.5 * (v[0].a + v[1].a);
        const double cb = 0.5 * (v[0].b + v[1].b);
        Vertex r{ca + (ca - v[2].a), cb + (cb - v[2].b), 0.0};
        r.f = f(r.a, r.b);
        if (r.f < v[0].f) {
            Vertex e{ca + 2.0 * (ca - v[2].a), cb + 2.0 * (cb - v[2].b), 0.0};
            e.f = f(e.a, e.b);
            v[2] = e.f < r.f ? e : r;
        } else if (r.f < v[1].f) {
            v[2] = r;
        } else {
            Vertex c{ca + 0.5 * (v[2].a - ca), cb + 0.5 * (v[2].b - cb), 0.0};
            c.f = f(c.a, c.b);
            if (c.f < v[2].f) {
                v[2] = c;
            } else {
                for (int i = 1; i < 3; ++i) {
                    v[i].a = v[0].a + 0.5 * (v[i].a - v[0].a);
                    v[i].b = v[0].b + 0.5 * (v[i].b - v[0].b);
                    v[i].f = f(v[i].a, v[i].b);
                }
            }
        }
    }
    std::sort(v.begin(), v.end(),
              [](const Vertex& p, const Vertex& q) { return p.f < q.f; });
    if (v[0].f >= 1e300)
        throw std::runtime_error("fit_truncated_powerlaw: optimizer diverged");
    alpha = v[0].a;
    s_cut = std::exp(v[0].b);
}

// Golden-section maximization of the exponential log-likelihood over log beta.
double fit_exponential(const SuffStats& st, int s_min) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = std::log(1e-2), hi = std::log(1e7);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = loglik_exp(st, std::exp(x1), s_min);
    double f2 = loglik_exp(st, std::exp(x2), s_min);
    while (hi - lo > 1e-10) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = loglik_exp(st, std::exp(x2), s_min);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = loglik_exp(st, std::exp(x1), s_min);
        }
    }
    return std::exp(0.5 * (lo + hi));
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

} // namespace

AvalancheFit fit_truncated_powerlaw(const std::vector<long long>& sizes,
                                    int fit_min, int fit_max,
                                    double s_cut_init) {
    if (fit_min < 1 || fit_max <= fit_min)
        throw std::invalid_argument("fit_truncated_powerlaw: bad fit range");
    const SuffStats st = in_range_stats(sizes, fit_min, fit_max);
    if (st.n < 50)
        throw std::runtime_error(
            "fit_truncated_powerlaw: fewer than 50 samples in fit range");

    AvalancheFit fit;
    fit.fit_min = fit_min;
    fit.fit_max = fit_max;
    fit.n_fit = int(st.n);
    fit.alpha_s = 1.5;
    fit.s_cut = s_cut_init;
    nelder_mead(st, fit_min, fit.alpha_s, fit.s_cut);
    fit.loglik_pl = loglik_pl(st, fit.alpha_s, fit.s_cut, fit_min);
    return fit;
}

AvalancheFit compare_models(const std::vector<long long>& sizes, int fit_min,
                            int fit_max, double s_cut_init) {
    AvalancheFit fit = fit_truncated_powerlaw(sizes, fit_min, fit_max, s_cut_init);
    const SuffStats st = in_range_stats(sizes, fit_min, fit_max);
    fit.beta = fit_exponential(st, fit_min);
    fit.loglik_exp = loglik_exp(st, fit.beta, fit_min);

    // Vuong normalized likelihood-ratio statistic over per-sample terms.
    const double lz_pl = log_z_powerlaw(fit.alpha_s, fit.s_cut, fit_min);
    const double lz_exp = log_z_exponential(fit.beta, fit_min);
    double mean = 0.0, m2 = 0.0;
    std::size_t n = 0;
    for (long long s : sizes) {
        if (s < fit_min || s > fit_max) continue;
        const double lp = -fit.alpha_s * std::log(double(s)) -
                          double(s) / fit.s_cut - lz_pl;
        const double le = -double(s) / fit.beta - lz_exp;
        const double d = lp - le;
        ++n;
        const double delta = d - mean;
        mean += delta / double(n);
        m2 += delta * (d - mean);
    }
    const double sd = std::sqrt(m2 / double(n > 1 ? n - 1 : 1));
    if (sd < 1e-12) {
        fit.lr = 0.0;
        fit.p_value = 1.0;
        fit.preferred = PreferredModel::undecided;
        return fit;
    }
    fit.lr = std::sqrt(double(n)) * mean / sd;
    fit.p_value = 2.0 * normal_sf(std::abs(fit.lr));
    if (fit.p_value < 0.05)
        fit.preferred = fit.lr > 0.0 ? PreferredModel::power_law
                                     : PreferredModel::exponential;
    else
        fit.preferred = PreferredModel::undecided;
    return fit;
}

std::vector<long long> sample_truncated_powerlaw(double alpha, double s_cut,
                                                 int s_min, std::size_t n,
                                                 std::uint64_t seed) {
    // Build the CDF out to where the remaining tail is negligible.
    std::vector<double> cdf;
    double z = 0.0;
    for (long long s = s_min; s <= k_support_max; ++s) {
        z += std::exp(-alpha * std::log(double(s)) - double(s) / s_cut);
        cdf.push_back(z);
        if (cdf.back() > 0.0 && double(s) > 10.0 * s_cut &&
            (z - (cdf.size() > 1 ? cdf[cdf.size() - 2] : 0.0)) < z * 1e-15)
            break;
    }
    Rng rng(seed);
    std::vector<long long> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform() * z;
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        out.push_back(s_min + (it - cdf.begin()));
    }
    return out;
}

std::string to_string(PreferredModel m) {
    switch (m) {
    case PreferredModel::power_law: return "power-law";
    case PreferredModel::exponential: return "exponential";
    default: return "undecided";
    }
}

} // namespace critnet
