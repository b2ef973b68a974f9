#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "critnet/harness.hpp"

using namespace critnet;

namespace {

ExperimentPlan tiny_plan() {
    ExperimentPlan plan;
    plan.durations.t_burnin = 0.0;
    plan.durations.t_exp = 2000.0;
    plan.durations.t_train = 8000.0;
    plan.durations.t_test = 4000.0;
    plan.kext_grid = {32};
    plan.n_seeds = 2;
    plan.master_seed = 7;
    return plan;
}

} // namespace

TEST_CASE("plan validation rejects bad fields") {
    ExperimentPlan plan;
    CHECK_NOTHROW(plan.validate());

    ExperimentPlan bad = plan;
    bad.durations.t_exp = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = plan;
    bad.durations.t_pert_at = bad.durations.t_pert;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = plan;
    bad.kext_grid = {40};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = plan;
    bad.kext_grid.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = plan;
    bad.n_seeds = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("zero-duration burn-in returns the all-zero matrix") {
    auto plan = tiny_plan();
    const auto result = burn_in(plan, 8, 0);
    CHECK(result.weights.size() == 32u * 32u);
    for (double w : result.weights) CHECK(w == 0.0);
    CHECK(result.rate_hz == 0.0);
}

TEST_CASE("k_ext = N leaves no recurrent slots") {
    auto plan = tiny_plan();
    const auto cfg = plan.make_config(32, plan.cell_seed(32, 0));
    for (const auto& row : cfg.topology.slots)
        for (const auto& slot : row) CHECK(slot.external);
}

TEST_CASE("cell seeds are order-insensitive and distinct") {
    auto plan = tiny_plan();
    auto permuted = plan;
    permuted.kext_grid = {16, 8};
    plan.kext_grid = {8, 16};
    CHECK(plan.cell_seed(8, 3) == permuted.cell_seed(8, 3));
    CHECK(plan.cell_seed(8, 3) != plan.cell_seed(16, 3));
    CHECK(plan.cell_seed(8, 3) != plan.cell_seed(8, 4));
}

TEST_CASE("sweep equals per-cell composition and records failures") {
    auto plan = tiny_plan();
    // zero weights and no burn-in: the network stays silent, so the
    // analyses must fail and be recorded without aborting the sweep
    const auto cells = sweep(plan);
    REQUIRE(cells.size() == 2u);
    for (const auto& c : cells) {
        CHECK_FALSE(c.ok);
        CHECK_FALSE(c.error.empty());
    }
    const auto solo_a = run_cell(plan, 32, 0);
    const auto solo_b = run_cell(plan, 32, 1);
    CHECK(sweep_csv(cells) == sweep_csv({solo_a, solo_b}));
}

TEST_CASE("sweep csv reruns are byte-identical") {
    auto plan = tiny_plan();
    const auto first = sweep_csv(sweep(plan));
    const auto second = sweep_csv(sweep(plan));
    CHECK(first == second);
    CHECK(first.find("k_ext,seed_index,seed,ok,error") == 0u);
}

TEST_CASE("manifest is deterministic and seed-sensitive") {
    auto plan = tiny_plan();
    const auto a = manifest_json(plan);
    const auto b = manifest_json(plan);
    CHECK(a == b);
    CHECK(a.find("plan_hash") != std::string::npos);
    plan.master_seed += 1;
    CHECK(manifest_json(plan) != a);
}

TEST_CASE("median and quantile closed forms") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == doctest::Approx(2.5));
    CHECK(quantile({0.0, 1.0, 2.0, 3.0, 4.0}, 0.25) == doctest::Approx(1.0));
    CHECK(quantile({1.0, 9.0}, 0.05) == doctest::Approx(1.4));
    CHECK_THROWS_AS(quantile({}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(quantile({1.0}, 1.5), std::invalid_argument);
}

TEST_CASE("synthetic power-law scaling regresses to its own exponent") {
    std::vector<double> n = {16.0, 32.0, 64.0, 128.0};
    std::vector<double> cut;
    for (double v : n) cut.push_back(3.7 * std::pow(v, 1.6));
    const auto [slope, intercept] = loglog_fit(n, cut);
    CHECK(slope == doctest::Approx(1.6).epsilon(1e-12));
    CHECK(std::exp(intercept) == doctest::Approx(3.7).epsilon(1e-9));
    CHECK_THROWS_AS(loglog_fit({1.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(loglog_fit({1.0, -2.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("config parsing applies table names and rejects junk") {
    std::istringstream is(
        "# comment line\n"
        "u_thresh = 560.0\n"
        "N = 16\n"
        "N_inh = 3\n"
        "gamma = 0.05 # trailing comment\n"
        "T = 4000\n"
        "topology = \"probabilistic\"\n"
        "kext_grid = [4, 8, 16]\n"
        "n_seeds = 3\n"
        "master_seed = 99\n");
    auto kv = parse_config(is);
    ExperimentPlan plan;
    apply_config(plan, kv);
    CHECK(plan.neuron.u_thresh == 560.0);
    CHECK(plan.n_neurons == 16);
    CHECK(plan.n_inh == 3);
    CHECK(plan.synapse.gamma == 0.05);
    CHECK(plan.plasticity.period == 4000.0);
    CHECK(plan.topology_mode == TopologyMode::probabilistic);
    CHECK(plan.kext_grid == std::vector<int>{4, 8, 16});
    CHECK(plan.n_seeds == 3);
    CHECK(plan.master_seed == 99u);

    std::istringstream bad_line("just_words\n");
    CHECK_THROWS_AS(parse_config(bad_line), std::invalid_argument);

    ExperimentPlan fresh;
    CHECK_THROWS_AS(apply_config(fresh, {{"no_such_key", "1"}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(apply_config(fresh, {{"gamma", "abc"}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(apply_config(fresh, {{"kext_grid", "4, 8"}}),
                    std::invalid_argument);
}

TEST_CASE("task switch validates checkpoints") {
    auto plan = tiny_plan();
    CHECK_THROWS_AS(task_switch(plan, 8, 16, {}, 0), std::invalid_argument);
    CHECK_THROWS_AS(task_switch(plan, 8, 16, {2, 1}, 0), std::invalid_argument);
    CHECK_THROWS_AS(task_switch(plan, 8, 16, {-1}, 0), std::invalid_argument);
}

TEST_CASE("task switch checkpoint zero evaluates the rewired state") {
    auto plan = tiny_plan();
    const auto points = task_switch(plan, 8, 16, {0}, 0, false, 15, 2000.0);
    REQUIRE(points.size() == 1u);
    CHECK(points[0].updates == 0);
    CHECK(points[0].time_ms == 0.0);
    // zero weights after a zero-length burn-in: silent network
    CHECK(points[0].rate_hz == 0.0);
    CHECK(std::isnan(points[0].m));
    CHECK(std::isnan(points[0].parity_info));
}

TEST_CASE("perturbation trials are deterministic and well-formed") {
    auto plan = tiny_plan();
    std::vector<double> w(32 * 32, 20.0);
    const auto a = perturbation_trials(plan, 8, 0, w, 3);
    const auto b = perturbation_trials(plan, 8, 0, w, 3);
    REQUIRE(a.chi.size() == 3u);
    REQUIRE(a.vrd.size() == 3u);
    CHECK(a.chi == b.chi);
    CHECK(a.vrd == b.vrd);
    for (double v : a.vrd) CHECK(v >= 0.0);
    for (double v : a.chi) CHECK(std::isfinite(v));
    CHECK_THROWS_AS(perturbation_trials(plan, 8, 0, w, 0),
                    std::invalid_argument);
}

TEST_CASE("reservoir evaluation runs end to end on a driven network") {
    auto plan = tiny_plan();
    std::vector<double> w(32 * 32, 20.0);
    const auto parity = evaluate_task(plan, 8, 0, w, TaskKind::parity, 2);
    CHECK(std::isfinite(parity.normalized));
    CHECK(parity.normalized <= 1.0 + 1e-9);
    const auto again = evaluate_task(plan, 8, 0, w, TaskKind::parity, 2);
    CHECK(parity.i_raw == again.i_raw);
    CHECK(parity.normalized == again.normalized);
    CHECK_THROWS_AS(evaluate_task(plan, 8, 0, w, TaskKind::parity, 2, 0),
                    std::invalid_argument);
}

TEST_CASE("information fingerprint satisfies the decomposition identities") {
    auto plan = tiny_plan();
    plan.durations.t_exp = 20000.0;
    std::vector<double> w(32 * 32, 20.0);
    const auto fp = info_fingerprint(plan, 8, 0, w, 2, 3);
    CHECK(fp.consistency_gap < 1e-6);
    CHECK(fp.mi >= 0.0);
    CHECK(fp.ais >= 0.0);
    CHECK(fp.te >= 0.0);
    CHECK(fp.joint_mi + 1e-12 >= fp.ais);
    CHECK(fp.shd >= -1e-9);
    CHECK(fp.syn >= -1e-9);
}
