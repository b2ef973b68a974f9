#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "critnet/dynamics.hpp"
#include "critnet/rng.hpp"
#include "critnet/spikes.hpp"

#include <cmath>
#include <vector>

using namespace critnet;

namespace {

int poisson_sample(Rng& rng, double mean) {
    // Knuth's method; means here are small.
    const double limit = std::exp(-mean);
    double p = 1.0;
    int k = 0;
    do {
        ++k;
        p *= rng.uniform();
    } while (p > limit);
    return k - 1;
}

std::vector<double> ar1_poisson(double m, double h, std::size_t n,
                                std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> a(n);
    a[0] = h / (1.0 - m);
    for (std::size_t t = 1; t < n; ++t)
        a[t] = double(poisson_sample(rng, m * a[t - 1] + h));
    return a;
}

SpikeRecord make_record(int n_sources, double duration,
                        std::vector<SpikeEvent> events) {
    SpikeRecord r;
    r.kind = SourceKind::neuron;
    r.n_sources = n_sources;
    r.duration_ms = duration;
    r.events = std::move(events);
    return r;
}

} // namespace

TEST_CASE("noiseless linear map is recovered exactly") {
    std::vector<double> a(200);
    a[0] = 100.0;
    for (std::size_t t = 1; t < a.size(); ++t) a[t] = 0.5 * a[t - 1] + 2.0;
    auto est = estimate_branching(a, 1.0);
    CHECK(est.m == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(est.h == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("m = 1/e gives tau_branch equal to the bin width") {
    std::vector<double> a(200);
    a[0] = 100.0;
    const double m = std::exp(-1.0);
    for (std::size_t t = 1; t < a.size(); ++t) a[t] = m * a[t - 1] + 2.0;
    auto est = estimate_branching(a, 4.9);
    CHECK(est.tau_branch == doctest::Approx(4.9).epsilon(1e-6));
}

TEST_CASE("AR(1) oracle: slope, autocorrelation time, and consistency") {
    const double m = 0.9;
    auto a = ar1_poisson(m, 2.0, 100'000, 42);
    auto est = estimate_branching(a, 1.0);
    CHECK(est.m == doctest::Approx(0.9).epsilon(0.02 / 0.9));
    // tau_corr should match -1/ln(m) ~ 9.49 bins
    CHECK(est.tau_corr == doctest::Approx(-1.0 / std::log(m)).epsilon(0.10));
    // estimator-consistency invariant across the subcritical range
    for (double mm : {0.7, 0.8, 0.97}) {
        auto b = ar1_poisson(mm, 2.0, 100'000, 77 + std::uint64_t(mm * 100));
        auto e = estimate_branching(b, 1.0);
        const double tau_from_m = -1.0 / std::log(e.m);
        CHECK(std::abs(e.tau_corr - tau_from_m) / e.tau_corr < 0.10);
    }
}

TEST_CASE("supercritical slope reports infinite tau_branch") {
    auto a = ar1_poisson(0.9, 2.0, 1000, 5);
    for (auto& v : a) v *= 1.0; // keep Poisson structure
    // force a slope >= 1 with a deterministic ramp
    std::vector<double> ramp(500);
    for (std::size_t t = 0; t < ramp.size(); ++t) ramp[t] = double(t);
    auto est = estimate_branching(ramp, 1.0);
    CHECK(est.m >= 1.0);
    CHECK(std::isinf(est.tau_branch));
}

TEST_CASE("zero-variance activity is rejected") {
    std::vector<double> flat(500, 3.0);
    CHECK_THROWS(estimate_branching(flat, 1.0));
}

TEST_CASE("Fano factor closed forms") {
    std::vector<double> flat(500, 7.0);
    CHECK(fano_factor(flat) == doctest::Approx(0.0));
    const double c = 5.0;
    std::vector<double> alt(1000);
    for (std::size_t t = 0; t < alt.size(); ++t) alt[t] = (t % 2) ? 2.0 * c : 0.0;
    CHECK(fano_factor(alt) == doctest::Approx(c));
    Rng rng(3);
    std::vector<double> pois(200'000);
    for (auto& v : pois) v = double(poisson_sample(rng, 4.0));
    CHECK(fano_factor(pois) == doctest::Approx(1.0).epsilon(0.02));
    std::vector<double> silent(100, 0.0);
    CHECK_THROWS(fano_factor(silent));
}

TEST_CASE("white noise has a degenerate or near-zero correlation time") {
    Rng rng(9);
    std::vector<double> w(50'000);
    for (auto& v : w) v = rng.uniform();
    const double tau = autocorrelation_time_bins(w);
    CHECK((std::isnan(tau) || tau < 1.0));
}

TEST_CASE("near-exponential autocorrelation recovers its time constant") {
    // Gaussian AR(1) with rho(k) = exp(-k/10)
    const double m = std::exp(-0.1);
    Rng rng(21);
    std::vector<double> a(200'000);
    a[0] = 0.0;
    for (std::size_t t = 1; t < a.size(); ++t) {
        const double u1 = rng.uniform(), u2 = rng.uniform();
        const double g = std::sqrt(-2.0 * std::log(1.0 - u1)) *
                         std::cos(6.283185307179586 * u2);
        a[t] = m * a[t - 1] + g;
    }
    const double tau = autocorrelation_time_bins(a);
    CHECK(tau == doctest::Approx(10.0).epsilon(0.08));
}

TEST_CASE("vrd is zero for identical records and symmetric otherwise") {
    auto r1 = make_record(2, 100.0, {{0, 10.0}, {1, 42.5}, {0, 77.0}});
    CHECK(vrd(r1, r1) == doctest::Approx(0.0));

    auto r2 = make_record(2, 100.0, {{0, 12.0}, {1, 40.0}});
    const double d12 = vrd(r1, r2);
    const double d21 = vrd(r2, r1);
    CHECK(d12 > 0.0);
    CHECK(d12 == doctest::Approx(d21).epsilon(1e-12));
}

TEST_CASE("vrd single shared spike is zero; mismatch in count rejected") {
    auto r1 = make_record(1, 50.0, {{0, 25.0}});
    auto r2 = make_record(1, 50.0, {{0, 25.0}});
    CHECK(vrd(r1, r2) == doctest::Approx(0.0));
    auto r3 = make_record(2, 50.0, {{0, 25.0}});
    CHECK_THROWS(vrd(r1, r3));
}

TEST_CASE("vrd of well-separated spikes matches a fine-grid quadrature") {
    const double sigma = 4.9;
    auto r1 = make_record(1, 400.0, {{0, 100.0}});
    auto r2 = make_record(1, 400.0, {{0, 300.0}});
    const double coarse = vrd(r1, r2, sigma, 0.1);
    const double fine = vrd(r1, r2, sigma, 0.005);
    CHECK(coarse == doctest::Approx(fine).epsilon(0.01));
    // integrand ~1 on two supports of ~10 sigma each -> ~2*10 sigma/sigma
    CHECK(coarse > 10.0);
    CHECK(coarse < 30.0);
}

TEST_CASE("susceptibility arithmetic") {
    // 10 spikes in the t_pert bin, 26 in the next, dt_bin = 1.9
    std::vector<SpikeEvent> ev;
    for (int i = 0; i < 10; ++i) ev.push_back({0, 10.0 * 1.9 + 0.1 * i});
    for (int i = 0; i < 26; ++i) ev.push_back({0, 11.0 * 1.9 + 0.05 * i});
    auto rec = make_record(1, 100.0, ev);
    CHECK(susceptibility(rec, 19.0, 8, 1.9) == doctest::Approx(16.0 / 64.0));

    // equal bins -> zero
    std::vector<SpikeEvent> eq;
    for (int i = 0; i < 5; ++i) {
        eq.push_back({0, 10.0 * 1.9 + 0.1 * i});
        eq.push_back({0, 11.0 * 1.9 + 0.1 * i});
    }
    auto rec2 = make_record(1, 100.0, eq);
    CHECK(susceptibility(rec2, 19.0, 8, 1.9) == doctest::Approx(0.0));

    CHECK_THROWS(susceptibility(rec, 99.5, 8, 1.9));
    CHECK_THROWS(susceptibility(rec, -1.0, 8, 1.9));
}
