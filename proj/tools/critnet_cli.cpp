// critnet: command-line front end for the simulation and analysis library.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "critnet/avalanche.hpp"
#include "critnet/dynamics.hpp"
#include "critnet/harness.hpp"
#include "critnet/pid.hpp"
#include "critnet/stimulus.hpp"

namespace fs = std::filesystem;
using namespace critnet;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    return os;
}

WeightTrace final_only(const std::vector<double>& weights) {
    WeightTrace trace;
    trace.times = {0.0};
    trace.snapshots = {weights};
    return trace;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spiking network criticality workbench"};
    app.require_subcommand(1);
    app.fallthrough(true); // global flags may follow the subcommand

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t master_seed = 1;
    bool paper_scale = false;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--out-dir", out_dir, "output directory (created if absent)");
    app.add_option("--seed", master_seed, "master seed");
    app.add_flag("--paper-scale", paper_scale,
                 "full-scale statistics (100 seeds, 625 s burn-in)");

    int k_ext = 8;
    int seed_index = 0;
    double duration_ms = 0.0;
    std::string weights_path;
    std::string spikes_path;
    std::string task_name = "parity";
    int n_bits = 15;
    int n_read = 16;
    int from_k = 10, to_k = 26;
    std::vector<long long> checkpoints;
    bool eval_parity = false;
    std::vector<int> sizes = {16, 32, 64, 128};
    double kext_ratio = 0.25;
    int seeds_per_size = 2;
    std::string table_path;

    auto* simulate = app.add_subcommand(
        "simulate", "frozen-weight run: spike file + analysis row");
    simulate->add_option("--kext", k_ext, "external input degree");
    simulate->add_option("--seed-index", seed_index, "cell seed index");
    simulate->add_option("--duration", duration_ms, "run length, ms");
    simulate->add_option("--weights", weights_path,
                         "weight CSV (defaults to a fresh burn-in)");

    auto* burnin = app.add_subcommand(
        "burnin", "plasticity-on run from zero weights; writes the weight CSV");
    burnin->add_option("--kext", k_ext, "external input degree");
    burnin->add_option("--seed-index", seed_index, "cell seed index");

    auto* sweep_cmd = app.add_subcommand(
        "sweep", "full (k_ext x seed) grid: sweep.csv + manifest.json");

    auto* analyze = app.add_subcommand(
        "analyze", "rate/branching/avalanche analysis of a spike file");
    analyze->add_option("--spikes", spikes_path, "spike file")->required();

    auto* task_cmd = app.add_subcommand(
        "task", "reservoir benchmark on a burned-in network");
    task_cmd->add_option("--kext", k_ext, "external input degree");
    task_cmd->add_option("--seed-index", seed_index, "cell seed index");
    task_cmd->add_option("--task", task_name, "parity | sum");
    task_cmd->add_option("--n", n_bits, "history bits");
    task_cmd->add_option("--n-read", n_read, "readout neuron count");
    task_cmd->add_option("--weights", weights_path,
                         "weight CSV (defaults to a fresh burn-in)");

    auto* switch_cmd = app.add_subcommand(
        "switch", "topology switch protocol with checkpoint evaluation");
    switch_cmd->add_option("--from", from_k, "source k_ext");
    switch_cmd->add_option("--to", to_k, "target k_ext");
    switch_cmd->add_option("--checkpoints", checkpoints,
                           "update counts, ascending")->required();
    switch_cmd->add_option("--seed-index", seed_index, "cell seed index");
    switch_cmd->add_flag("--parity", eval_parity,
                         "also evaluate the parity task per checkpoint");

    auto* fss_cmd = app.add_subcommand(
        "fss", "finite-size scan of the avalanche cutoff");
    fss_cmd->add_option("--sizes", sizes, "network sizes");
    fss_cmd->add_option("--ratio", kext_ratio, "k_ext / N");
    fss_cmd->add_option("--seeds-per-size", seeds_per_size, "seeds pooled per N");

    auto* pid_cmd = app.add_subcommand(
        "pid", "information decomposition of a joint table (t s1 s2 prob)");
    pid_cmd->add_option("--table", table_path, "joint table file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentPlan plan;
        if (!config_path.empty()) apply_config(plan, parse_config_file(config_path));
        plan.master_seed = master_seed;
        if (paper_scale) plan.apply_paper_scale();
        // Single-cell subcommands take one explicit degree; the grid from
        // the config only matters for `sweep`, so narrow it to keep
        // validation aligned with what actually runs.
        if (*simulate || *burnin || *task_cmd) plan.kext_grid = {k_ext};
        if (*switch_cmd) plan.kext_grid = {from_k, to_k};
        fs::create_directories(out_dir);
        const fs::path out(out_dir);

        if (*burnin) {
            const auto result = burn_in(plan, k_ext, seed_index);
            write_weights_csv((out / "weights.csv").string(),
                              final_only(result.weights));
            write_manifest((out / "manifest.json").string(), plan);
            std::cout << "burnin_rate_hz," << fmt(result.rate_hz) << "\n";
        } else if (*simulate) {
            if (duration_ms <= 0.0) duration_ms = plan.durations.t_exp;
            std::vector<double> w =
                weights_path.empty()
                    ? burn_in(plan, k_ext, seed_index).weights
                    : read_weights_csv_final(weights_path);
            const std::uint64_t cell = plan.cell_seed(k_ext, seed_index);
            Simulator sim(plan.make_config(k_ext, cell), derive_seed(cell, 3, 9));
            sim.set_weights(w);
            StimulusConfig sc;
            sc.nu = plan.nu;
            sc.n_sources = plan.n_neurons;
            sc.duration_ms = duration_ms;
            sc.seed = derive_seed(cell, 4);
            sc.dt_grid = plan.dt;
            RunOptions frozen;
            frozen.init_jitter_seed = derive_seed(cell, 5);
            const auto run = sim.run(generate(sc), duration_ms, frozen);
            write_spikes_file((out / "spikes.txt").string(), run.spikes);
            write_weights_csv((out / "weights.csv").string(), final_only(w));
            write_manifest((out / "manifest.json").string(), plan);
            std::cout << "rate_hz," << fmt(run.mean_rate_hz) << "\n";
        } else if (*sweep_cmd) {
            const auto cells = sweep(plan);
            write_sweep_csv((out / "sweep.csv").string(), cells);
            write_manifest((out / "manifest.json").string(), plan);
            int failed = 0;
            for (const auto& c : cells) failed += c.ok ? 0 : 1;
            std::cout << "cells," << cells.size() << "\nfailed," << failed
                      << "\n";
        } else if (*analyze) {
            const auto spikes = read_spikes_file(spikes_path);
            auto os = open_out(out / "analysis.csv");
            os << "measure,value\n";
            const double rate =
                spikes.duration_ms > 0.0
                    ? 1000.0 * static_cast<double>(spikes.size()) /
                          (spikes.duration_ms * spikes.n_sources)
                    : 0.0;
            os << "rate_hz," << fmt(rate) << "\n";
            const auto pop = bin(spikes, plan.neuron.tau_ref).population;
            const auto est = estimate_branching(
                std::vector<double>(pop.begin(), pop.end()),
                plan.neuron.tau_ref);
            os << "m," << fmt(est.m) << "\ntau_corr_ms," << fmt(est.tau_corr)
               << "\ntau_branch_ms," << fmt(est.tau_branch) << "\nfano,"
               << fmt(est.fano) << "\n";
            const auto sizes64 =
                extract_avalanches(bin(spikes, mean_iei(spikes)).population);
            const std::vector<long long> av(sizes64.begin(), sizes64.end());
            const auto fit = compare_models(av, 4, 1'000'000, 32.0);
            os << "alpha_s," << fmt(fit.alpha_s) << "\ns_cut," << fmt(fit.s_cut)
               << "\np_value," << fmt(fit.p_value) << "\npreferred,"
               << to_string(fit.preferred) << "\nn_avalanches," << av.size()
               << "\n";
            std::cout << "wrote " << (out / "analysis.csv").string() << "\n";
        } else if (*task_cmd) {
            if (task_name != "parity" && task_name != "sum")
                throw std::runtime_error("unknown task " + task_name);
            const auto kind =
                task_name == "parity" ? TaskKind::parity : TaskKind::sum;
            std::vector<double> w =
                weights_path.empty()
                    ? burn_in(plan, k_ext, seed_index).weights
                    : read_weights_csv_final(weights_path);
            const auto r =
                evaluate_task(plan, k_ext, seed_index, w, kind, n_bits, n_read);
            auto os = open_out(out / "task.csv");
            os << "task,n,n_read,k_ext,seed_index,i_raw,i_shuffle,i_corrected,"
                  "normalized\n"
               << task_name << ',' << n_bits << ',' << n_read << ',' << k_ext
               << ',' << seed_index << ',' << fmt(r.i_raw) << ','
               << fmt(r.i_shuffle) << ',' << fmt(r.i_corrected) << ','
               << fmt(r.normalized) << "\n";
            std::cout << "normalized," << fmt(r.normalized) << "\n";
        } else if (*switch_cmd) {
            const auto points = task_switch(plan, from_k, to_k, checkpoints,
                                            seed_index, eval_parity);
            auto os = open_out(out / "switch.csv");
            os << "updates,time_ms,m,rate_hz,parity_info\n";
            for (const auto& p : points)
                os << p.updates << ',' << fmt(p.time_ms) << ',' << fmt(p.m)
                   << ',' << fmt(p.rate_hz) << ',' << fmt(p.parity_info)
                   << "\n";
            std::cout << "checkpoints," << points.size() << "\n";
        } else if (*fss_cmd) {
            const auto result =
                finite_size_scan(plan, sizes, kext_ratio, seeds_per_size);
            auto os = open_out(out / "fss.csv");
            os << "N,k_ext,ok,error,alpha_s,s_cut,n_avalanches\n";
            for (const auto& p : result.points) {
                std::string msg = p.error;
                std::replace(msg.begin(), msg.end(), ',', ';');
                os << p.n << ',' << p.k_ext << ',' << (p.ok ? 1 : 0) << ','
                   << msg << ',' << fmt(p.alpha_s) << ',' << fmt(p.s_cut)
                   << ',' << p.n_avalanches << "\n";
            }
            os << "# exponent = " << fmt(result.exponent) << "\n";
            std::cout << "exponent," << fmt(result.exponent) << "\n";
        } else if (*pid_cmd) {
            std::ifstream is(table_path);
            if (!is) throw std::runtime_error("cannot open " + table_path);
            const auto joint = read_joint_table(is);
            const auto r = broja_pid(joint);
            std::cout << "unq1,unq2,shd,syn,joint_mi\n"
                      << fmt(r.unq1) << ',' << fmt(r.unq2) << ',' << fmt(r.shd)
                      << ',' << fmt(r.syn) << ',' << fmt(r.joint_mi) << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
