// skewt_bench: Monte Carlo benchmarks for robust filtering/smoothing with
// skew-t measurement noise. Subcommands cover trajectory simulation, the
// 1-D positioning study, the satellite pseudorange study, the VB/particle
// convergence study, and the histogram-noise robustness study. Every run
// writes one results file (CSV or JSON) plus a manifest that pins the
// fully-resolved config, its digest and the master seed, so any results
// file can be reproduced exactly.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "skewt/config.hpp"
#include "skewt/experiments.hpp"
#include "skewt/manifest.hpp"
#include "skewt/table_io.hpp"
#include "skewt/version.hpp"

namespace {

using skewt::ExperimentConfig;
using skewt::ExperimentKind;
using skewt::ResolvedConfig;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<std::string> histogram;
    std::optional<unsigned> threads;
    std::optional<double> q;
    std::optional<double> delta;
    std::optional<int> n_mc;
    std::optional<int> particles;
    std::vector<int> iters;
    std::vector<int> particle_grid;
    std::string model = "positioning-1d";  // simulate subcommand
};

void drop_default(ResolvedConfig& resolved, const std::string& key) {
    auto& keys = resolved.defaulted_keys;
    keys.erase(std::remove(keys.begin(), keys.end(), key), keys.end());
}

ResolvedConfig resolve(const std::string& config_path, ExperimentKind kind, const Overrides& ov) {
    ResolvedConfig resolved;
    if (!config_path.empty()) {
        resolved = skewt::parse_config(config_path);
    } else {
        resolved = skewt::parse_config_json(nlohmann::json::object());
    }
    resolved.config.experiment = kind;
    drop_default(resolved, "experiment");

    auto apply = [&](const auto& opt, const char* key, auto&& setter) {
        if (opt) {
            setter(*opt);
            drop_default(resolved, key);
        }
    };
    apply(ov.seed, "seed", [&](std::uint64_t v) { resolved.config.seed = v; });
    apply(ov.out, "out", [&](const std::string& v) { resolved.config.out = v; });
    apply(ov.format, "format", [&](const std::string& v) { resolved.config.format = v; });
    apply(ov.histogram, "histogram",
          [&](const std::string& v) { resolved.config.histogram_path = v; });
    apply(ov.threads, "threads", [&](unsigned v) { resolved.config.threads = v; });
    apply(ov.q, "q", [&](double v) { resolved.config.q = v; });
    apply(ov.delta, "delta", [&](double v) { resolved.config.delta = v; });
    apply(ov.n_mc, "n_mc", [&](int v) { resolved.config.n_mc = v; });
    apply(ov.particles, "particles", [&](int v) { resolved.config.particles = v; });
    if (!ov.iters.empty()) {
        resolved.config.iteration_grid = ov.iters;
        drop_default(resolved, "iteration_grid");
    }
    if (!ov.particle_grid.empty()) {
        resolved.config.particle_grid = ov.particle_grid;
        drop_default(resolved, "particle_grid");
    }
    if (!(resolved.config.q >= 0.0))
        throw skewt::ValidationError("config: key 'q' must be >= 0");
    resolved.config.validate();
    if (resolved.config.out.empty())
        throw skewt::ValidationError("config: an output path is required (--out or key 'out')");
    return resolved;
}

void finish(const ResolvedConfig& resolved, const std::string& experiment, double wall_s) {
    skewt::RunManifest manifest;
    manifest.resolved = resolved;
    manifest.outputs.push_back({experiment, resolved.config.out, wall_s});
    manifest.write(resolved.config.out + ".manifest.json");
    std::printf("wrote %s and %s.manifest.json (%.2f s)\n", resolved.config.out.c_str(),
                resolved.config.out.c_str(), wall_s);
}

int run_simulate(const ResolvedConfig& resolved, const std::string& model_name) {
    const ExperimentConfig& cfg = resolved.config;
    const auto start = std::chrono::steady_clock::now();
    skewt::Trajectory traj;
    Eigen::Index nx = 0, ny = 0;
    skewt::RngStream rng = skewt::RngStream(cfg.seed).substream(0).substream(0);
    if (model_name == "positioning-1d") {
        const auto model = skewt::one_d_positioning_model(cfg.delta, cfg.nu);
        nx = model.state_dim();
        ny = model.meas_dim();
        traj = skewt::simulate(model, static_cast<std::size_t>(cfg.horizon), rng);
    } else if (model_name == "pseudorange") {
        skewt::RngStream geo = skewt::RngStream(cfg.seed).substream(0).substream(1);
        skewt::PseudorangeScenario sc;
        sc.satellites = skewt::default_constellation(geo.uniform() * 2.0 * skewt::special::kPi);
        sc.q = cfg.q;
        sc.noise = skewt::SkewTParams{0.0, 1.0, cfg.delta, cfg.nu};
        sc.horizon = cfg.horizon;
        sc.initial_position_std = cfg.initial_position_std;
        const auto model = skewt::build_pseudorange_model(sc);
        nx = model.state_dim();
        ny = model.meas_dim();
        traj = skewt::simulate_pseudorange(sc, model, rng);
    } else {
        throw skewt::ValidationError("simulate: unknown model '" + model_name +
                                     "'; valid: positioning-1d, pseudorange");
    }

    std::vector<std::string> columns = {"k"};
    for (Eigen::Index i = 0; i < nx; ++i) columns.push_back("x" + std::to_string(i + 1));
    for (Eigen::Index i = 0; i < ny; ++i) columns.push_back("y" + std::to_string(i + 1));
    skewt::ResultTable table(columns);
    for (std::size_t k = 0; k < traj.horizon(); ++k) {
        std::vector<skewt::ResultTable::Cell> row;
        row.emplace_back(static_cast<long long>(k + 1));
        for (Eigen::Index i = 0; i < nx; ++i) row.emplace_back(traj.states[k](i));
        for (Eigen::Index i = 0; i < ny; ++i) row.emplace_back(traj.measurements[k](i));
        table.add_row(std::move(row));
    }
    table.write(cfg.out, cfg.format);
    finish(resolved, "simulate",
           std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return 0;
}

int run_positioning(const ResolvedConfig& resolved) {
    const auto start = std::chrono::steady_clock::now();
    const auto stats = skewt::run_1d_positioning(resolved.config);
    skewt::ResultTable table({"algorithm", "rmse", "mean", "std", "skewness"});
    for (const auto& name : resolved.config.algorithms) {
        const auto& s = stats.at(name);
        table.add_row({name, s.rmse, s.mean, s.std, s.skewness});
        std::printf("%-6s rmse %.3f  mean %+.3f  std %.3f  skew %+.3f\n", name.c_str(), s.rmse,
                    s.mean, s.std, s.skewness);
    }
    table.write(resolved.config.out, resolved.config.format);
    finish(resolved, "positioning-1d",
           std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return 0;
}

int run_pseudorange_cmd(const ResolvedConfig& resolved) {
    const auto start = std::chrono::steady_clock::now();
    const auto result = skewt::run_pseudorange(resolved.config);
    skewt::ResultTable table({"algorithm", "replication", "rmse"});
    for (const auto& name : resolved.config.algorithms)
        for (std::size_t r = 0; r < result.rmse.at(name).size(); ++r)
            table.add_row({name, static_cast<long long>(r), result.rmse.at(name)[r]});
    table.write(resolved.config.out, resolved.config.format);
    for (const auto& name : resolved.config.algorithms) {
        if (name == result.reference) continue;
        const auto it = result.diff_quantiles.find(name);
        if (it == result.diff_quantiles.end()) continue;
        const auto& qs = it->second;
        std::printf("%-6s rmse diff vs %s (%%): 5%% %+.2f  25%% %+.2f  50%% %+.2f  75%% %+.2f  "
                    "95%% %+.2f\n",
                    name.c_str(), result.reference.c_str(), qs.q05, qs.q25, qs.q50, qs.q75,
                    qs.q95);
    }
    finish(resolved, "pseudorange",
           std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return 0;
}

int run_convergence_cmd(const ResolvedConfig& resolved) {
    const auto start = std::chrono::steady_clock::now();
    const auto rows = skewt::run_convergence_study(resolved.config);
    skewt::ResultTable table({"algorithm", "setting", "delta", "rmse", "wall_time_s"});
    for (const auto& row : rows) {
        table.add_row({row.algorithm, static_cast<long long>(row.setting), row.delta,
                       row.rmse_mean, row.wall_time_s});
        std::printf("delta %.1f  %-6s setting %6d  rmse %.4f  (%.2f s)\n", row.delta,
                    row.algorithm.c_str(), row.setting, row.rmse_mean, row.wall_time_s);
    }
    table.write(resolved.config.out, resolved.config.format);
    finish(resolved, "convergence",
           std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return 0;
}

int run_empirical_cmd(const ResolvedConfig& resolved) {
    if (resolved.config.histogram_path.empty())
        throw skewt::ValidationError("empirical-noise: a histogram file is required (--histogram)");
    const auto histogram = skewt::load_histogram_csv(resolved.config.histogram_path);
    const auto start = std::chrono::steady_clock::now();
    const auto result = skewt::run_empirical_noise(resolved.config, histogram);
    skewt::ResultTable table({"replication", "rmse_stvbf", "rmse_tvbf", "diff_percent"});
    for (std::size_t r = 0; r < result.rmse_stvbf.size(); ++r)
        table.add_row({static_cast<long long>(r), result.rmse_stvbf[r], result.rmse_tvbf[r],
                       100.0 * (result.rmse_tvbf[r] - result.rmse_stvbf[r]) /
                           result.rmse_stvbf[r]});
    table.write(resolved.config.out, resolved.config.format);
    std::printf("stvbf beats tvbf in %.1f%% of %zu replications\n", 100.0 * result.win_rate,
                result.rmse_stvbf.size());
    finish(resolved, "empirical-noise",
           std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo benchmarks for skew-t robust filtering and smoothing"};
    app.set_version_flag("--version", std::string("skewt_bench ") + skewt::kVersion);

    std::string config_path;
    Overrides ov;
    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);

    auto add_common = [&](CLI::App* sub) {
        sub->add_option_function<std::uint64_t>(
            "--seed", [&](const std::uint64_t& v) { ov.seed = v; }, "master seed");
        sub->add_option_function<std::string>(
            "--out", [&](const std::string& v) { ov.out = v; }, "results file path");
        sub->add_option_function<std::string>(
            "--format", [&](const std::string& v) { ov.format = v; }, "csv or json");
        sub->add_option_function<unsigned>(
            "--threads", [&](const unsigned& v) { ov.threads = v; },
            "worker threads (default: all cores; results do not depend on it)");
    };

    CLI::App* sim = app.add_subcommand("simulate", "emit one trajectory/measurement table");
    add_common(sim);
    sim->add_option("--model", ov.model, "positioning-1d or pseudorange");
    sim->add_option_function<double>("--q", [&](const double& v) { ov.q = v; });
    sim->add_option_function<double>("--delta", [&](const double& v) { ov.delta = v; });

    CLI::App* pos = app.add_subcommand("positioning-1d", "1-D positioning error statistics");
    add_common(pos);
    pos->add_option_function<int>("--n-mc", [&](const int& v) { ov.n_mc = v; });

    CLI::App* psr = app.add_subcommand("pseudorange", "satellite pseudorange RMSE study");
    add_common(psr);
    psr->add_option_function<double>("--q", [&](const double& v) { ov.q = v; });
    psr->add_option_function<double>("--delta", [&](const double& v) { ov.delta = v; });
    psr->add_option_function<int>("--n-mc", [&](const int& v) { ov.n_mc = v; });
    psr->add_option_function<int>("--particles", [&](const int& v) { ov.particles = v; });

    CLI::App* conv = app.add_subcommand("convergence", "VB-iteration / particle-count study");
    add_common(conv);
    conv->add_option_function<double>("--q", [&](const double& v) { ov.q = v; });
    conv->add_option_function<int>("--n-mc", [&](const int& v) { ov.n_mc = v; });
    conv->add_option("--iters", ov.iters, "VB sweep budgets")->delimiter(',');
    conv->add_option("--particles", ov.particle_grid, "particle counts")->delimiter(',');

    CLI::App* emp = app.add_subcommand("empirical-noise", "histogram-noise robustness study");
    add_common(emp);
    emp->add_option_function<double>("--q", [&](const double& v) { ov.q = v; });
    emp->add_option_function<int>("--n-mc", [&](const int& v) { ov.n_mc = v; });
    emp->add_option_function<std::string>(
        "--histogram", [&](const std::string& v) { ov.histogram = v; },
        "CSV of bin_left,bin_right,count");

    app.require_subcommand(1);
    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return run_simulate(resolve(config_path, ExperimentKind::Simulate, ov), ov.model);
        if (pos->parsed())
            return run_positioning(resolve(config_path, ExperimentKind::Positioning1d, ov));
        if (psr->parsed())
            return run_pseudorange_cmd(resolve(config_path, ExperimentKind::Pseudorange, ov));
        if (conv->parsed())
            return run_convergence_cmd(resolve(config_path, ExperimentKind::Convergence, ov));
        if (emp->parsed())
            return run_empirical_cmd(resolve(config_path, ExperimentKind::EmpiricalNoise, ov));
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
