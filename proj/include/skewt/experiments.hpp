#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skewt/histogram.hpp"
#include "skewt/metrics.hpp"
#include "skewt/parallel.hpp"
#include "skewt/particle_filter.hpp"
#include "skewt/pseudorange.hpp"
#include "skewt/smoothers.hpp"

// Monte Carlo benchmark studies. Every replication r derives its random
// stream purely from (master seed, r), all algorithms inside a replication
// consume the identical trajectory realization, and results are written to
// index-addressed storage, so outputs are bit-stable under any thread count.

namespace skewt {

enum class ExperimentKind { Simulate, Positioning1d, Pseudorange, Convergence, EmpiricalNoise };

inline const std::vector<std::string>& known_algorithms() {
    static const std::vector<std::string> names = {"stvbf", "tvbf", "kf-g",   "kf",  "pf",
                                                   "stvbs", "tvbs", "rtss-g", "rtss"};
    return names;
}

inline bool algorithm_is_smoother(const std::string& name) {
    return name == "stvbs" || name == "tvbs" || name == "rtss-g" || name == "rtss";
}

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::Positioning1d;
    std::uint64_t seed = 0;
    int n_mc = 1000;
    int horizon = 100;
    double q = 10.0;                  // pseudorange horizontal process-noise std
    double delta = 5.0;               // measurement-noise shape parameter
    double nu = 4.0;                  // measurement-noise degrees of freedom
    std::vector<std::string> algorithms = {"stvbf", "tvbf", "kf-g", "kf"};
    std::string reference = "stvbf";  // baseline for RMSE-difference summaries
    std::map<std::string, VbConfig> vb;
    int particles = 1000;
    std::vector<int> iteration_grid = {1, 2, 5, 10, 20, 30};
    std::vector<int> particle_grid = {100, 1000, 10000};
    std::vector<double> delta_grid = {2.0, 5.0};  // convergence study
    int convergence_n_mc = 0;         // 0: reuse n_mc (particle settings included)
    std::string histogram_path;
    double initial_position_std = 10.0;
    unsigned threads = 0;             // 0 = all hardware threads
    std::string out;
    std::string format = "csv";

    void validate() const {
        if (n_mc < 1) throw ValidationError("config: n_mc must be >= 1");
        if (horizon < 1) throw ValidationError("config: horizon must be >= 1");
        if (!(q >= 0.0)) throw ValidationError("config: q must be >= 0");
        if (!(nu > 0.0)) throw ValidationError("config: nu must be > 0");
        if (algorithms.empty()) throw ValidationError("config: algorithms must be non-empty");
        for (const auto& a : algorithms) {
            bool ok = false;
            for (const auto& k : known_algorithms()) ok |= (a == k);
            if (!ok) {
                std::string names;
                for (const auto& k : known_algorithms()) names += (names.empty() ? "" : ", ") + k;
                throw ValidationError("config: unknown algorithm '" + a + "'; valid names: " +
                                      names);
            }
        }
        if (particles < 1) throw ValidationError("config: particles must be >= 1");
        for (int i : iteration_grid)
            if (i < 1) throw ValidationError("config: iteration grid entries must be >= 1");
        for (int n : particle_grid)
            if (n < 1) throw ValidationError("config: particle grid entries must be >= 1");
        if (format != "csv" && format != "json")
            throw ValidationError("config: format must be csv or json");
    }
};

/// Per-algorithm VB settings with the documented defaults: the skew-t
/// algorithms run 30 sweeps, the symmetric-t baselines 10; positioning-1d
/// terminates on an estimate change of 0.01, the pseudorange studies run
/// the full sweep budget.
inline VbConfig vb_config_for(const ExperimentConfig& cfg, const std::string& algorithm) {
    const auto it = cfg.vb.find(algorithm);
    if (it != cfg.vb.end()) return it->second;
    VbConfig out;
    out.max_iters = (algorithm == "tvbf" || algorithm == "tvbs") ? 10 : 30;
    out.tol = cfg.experiment == ExperimentKind::Positioning1d ? 1e-2 : 0.0;
    return out;
}

/// The 1-D positioning model: scalar random walk observed by three
/// simultaneous skew-t range sensors.
inline StateSpaceModel one_d_positioning_model(double delta = 5.0, double nu = 4.0,
                                               double prior_var = 100.0) {
    StateSpaceModel m;
    m.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
    m.C = Eigen::MatrixXd::Ones(3, 1);
    m.Q = Eigen::MatrixXd::Constant(1, 1, 1.0);
    m.R = Eigen::VectorXd::Ones(3);
    m.Delta = Eigen::VectorXd::Constant(3, delta);
    m.nu = Eigen::VectorXd::Constant(3, nu);
    m.x0 = Eigen::VectorXd::Zero(1);
    m.P0 = Eigen::MatrixXd::Constant(1, 1, prior_var);
    return m;
}

namespace detail {

/// Point-estimate sequence of one named algorithm on one trajectory.
inline std::vector<Eigen::VectorXd> run_algorithm(const std::string& name,
                                                  const StateSpaceModel& model,
                                                  const std::vector<Eigen::VectorXd>& ys,
                                                  const ExperimentConfig& cfg, RngStream stream) {
    auto means_of = [](const std::vector<GaussianBelief>& beliefs) {
        std::vector<Eigen::VectorXd> out;
        out.reserve(beliefs.size());
        for (const auto& b : beliefs) out.push_back(b.mean);
        return out;
    };
    if (name == "stvbf") return means_of(stvbf_filter(model, ys, vb_config_for(cfg, name)).filtered);
    if (name == "tvbf") return means_of(tvbf_filter(model, ys, vb_config_for(cfg, name)).filtered);
    if (name == "kf") {
        const NoiseMoments nm = skew_noise_moments(model);
        return means_of(kf_filter(model, ys, nm.mean, nm.var).filtered);
    }
    if (name == "kf-g") {
        const NoiseMoments nm = skew_noise_moments(model);
        return means_of(kf_gated_filter(model, ys, nm.mean, nm.var).filtered);
    }
    if (name == "pf") {
        ParticleSet ps = pf_init(model, cfg.particles, stream);
        std::vector<Eigen::VectorXd> out;
        out.reserve(ys.size());
        for (const auto& y : ys) {
            auto step = pf_step(model, std::move(ps), y, stream);
            out.push_back(step.estimate);
            ps = std::move(step.particles);
        }
        return out;
    }
    if (name == "stvbs") return means_of(stvbs(model, ys, vb_config_for(cfg, name)).smoothed);
    if (name == "tvbs") return means_of(tvbs(model, ys, vb_config_for(cfg, name)).smoothed);
    if (name == "rtss") {
        const NoiseMoments nm = skew_noise_moments(model);
        const auto run = kf_filter(model, ys, nm.mean, nm.var);
        return means_of(rtss(model, run.filtered, run.predicted));
    }
    if (name == "rtss-g") return means_of(rtss_g(model, ys));
    throw ValidationError("unknown algorithm '" + name + "'");
}

template <typename Fn>
void for_each_replication(const ExperimentConfig& cfg, int n_mc, Fn&& body) {
    parallel_for(static_cast<std::size_t>(n_mc), cfg.threads, [&](std::size_t r) {
        try {
            body(r);
        } catch (const std::exception& err) {
            throw NumericalError("replication " + std::to_string(r) + " (master seed " +
                                 std::to_string(cfg.seed) + "): " + err.what());
        }
    });
}

}  // namespace detail

/// 1-D positioning study: pooled error statistics per algorithm over
/// n_mc trajectories of `horizon` steps.
inline std::map<std::string, ErrorStats> run_1d_positioning(const ExperimentConfig& cfg) {
    cfg.validate();
    const StateSpaceModel model = one_d_positioning_model(cfg.delta, cfg.nu);
    const RngStream master(cfg.seed);

    const std::size_t per_rep = static_cast<std::size_t>(cfg.horizon);
    std::map<std::string, std::vector<double>> pooled;
    for (const auto& name : cfg.algorithms)
        pooled[name].resize(static_cast<std::size_t>(cfg.n_mc) * per_rep);

    detail::for_each_replication(cfg, cfg.n_mc, [&](std::size_t r) {
        RngStream rep = master.substream(r);
        RngStream sim = rep.substream(0);
        const Trajectory traj = simulate(model, per_rep, sim);
        int algo_index = 0;
        for (const auto& name : cfg.algorithms) {
            const auto estimates =
                detail::run_algorithm(name, model, traj.measurements, cfg,
                                      rep.substream(10 + static_cast<std::uint64_t>(algo_index)));
            auto& sink = pooled[name];
            for (std::size_t k = 0; k < per_rep; ++k)
                sink[r * per_rep + k] = estimates[k](0) - traj.states[k](0);
            ++algo_index;
        }
    });

    std::map<std::string, ErrorStats> out;
    for (const auto& [name, errors] : pooled) out[name] = error_stats(errors);
    return out;
}

struct PseudorangeResult {
    std::map<std::string, std::vector<double>> rmse;        // per replication
    std::map<std::string, QuantileSummary> diff_quantiles;  // % of reference RMSE
    std::string reference;
};

namespace detail {

inline double position_rmse(const std::vector<Eigen::VectorXd>& estimates,
                            const Trajectory& traj) {
    double acc = 0.0;
    for (std::size_t k = 0; k < traj.horizon(); ++k)
        acc += (estimates[k].head<3>() - traj.states[k].head<3>()).squaredNorm();
    return std::sqrt(acc / static_cast<double>(traj.horizon()));
}

/// Shared pseudorange Monte Carlo loop; the noise factory receives the
/// replication stream index so histogram and skew-t noise stay seeded
/// identically.
template <typename NoiseFactory>
PseudorangeResult run_pseudorange_impl(const ExperimentConfig& cfg, NoiseFactory&& make_noise) {
    cfg.validate();
    const RngStream master(cfg.seed);

    PseudorangeResult result;
    result.reference = cfg.reference;
    for (const auto& name : cfg.algorithms)
        result.rmse[name].resize(static_cast<std::size_t>(cfg.n_mc));

    detail::for_each_replication(cfg, cfg.n_mc, [&](std::size_t r) {
        RngStream rep = master.substream(r);
        RngStream geo = rep.substream(1);
        PseudorangeScenario sc;
        sc.satellites = default_constellation(geo.uniform() * 2.0 * special::kPi);
        sc.q = cfg.q;
        sc.noise = SkewTParams{0.0, 1.0, cfg.delta, cfg.nu};
        sc.horizon = cfg.horizon;
        sc.initial_position_std = cfg.initial_position_std;
        const StateSpaceModel model = build_pseudorange_model(sc);

        RngStream sim = rep.substream(0);
        const Trajectory traj = simulate_pseudorange(sc, model, sim, make_noise(sc));

        int algo_index = 0;
        for (const auto& name : cfg.algorithms) {
            const auto estimates =
                detail::run_algorithm(name, model, traj.measurements, cfg,
                                      rep.substream(10 + static_cast<std::uint64_t>(algo_index)));
            result.rmse[name][r] = detail::position_rmse(estimates, traj);
            ++algo_index;
        }
    });

    const auto ref = result.rmse.find(cfg.reference);
    if (ref != result.rmse.end()) {
        for (const auto& name : cfg.algorithms) {
            if (name == cfg.reference) continue;
            std::vector<double> diffs(static_cast<std::size_t>(cfg.n_mc));
            for (std::size_t r = 0; r < diffs.size(); ++r)
                diffs[r] = 100.0 * (result.rmse[name][r] - ref->second[r]) / ref->second[r];
            result.diff_quantiles[name] = quantile_summary(std::move(diffs));
        }
    }
    return result;
}

}  // namespace detail

/// Pseudorange positioning study with skew-t noise: per-replication RMSE
/// over the position components, plus quantiles of the per-replication
/// RMSE difference against the reference algorithm (in percent).
inline PseudorangeResult run_pseudorange(const ExperimentConfig& cfg) {
    return detail::run_pseudorange_impl(cfg, [](const PseudorangeScenario& sc) {
        return [noise = sc.noise](RngStream& rng) { return sample_skew_t_one(noise, rng); };
    });
}

struct ConvergenceRow {
    std::string algorithm;
    int setting;  // VB sweep budget or particle count
    double delta;
    double rmse_mean;
    double wall_time_s;
};

/// VB-iteration / particle-count convergence study. All settings of one
/// delta share the same simulated trajectories (paired comparison).
inline std::vector<ConvergenceRow> run_convergence_study(const ExperimentConfig& cfg) {
    cfg.validate();
    const RngStream master(cfg.seed);
    const int n_mc = cfg.convergence_n_mc > 0 ? cfg.convergence_n_mc : cfg.n_mc;
    std::vector<ConvergenceRow> rows;

    for (const double delta : cfg.delta_grid) {
        // one shared trajectory set per delta
        std::vector<Trajectory> trajectories(static_cast<std::size_t>(n_mc));
        std::vector<StateSpaceModel> models(static_cast<std::size_t>(n_mc));
        detail::for_each_replication(cfg, n_mc, [&](std::size_t r) {
            RngStream rep = master.substream(r);
            RngStream geo = rep.substream(1);
            PseudorangeScenario sc;
            sc.satellites = default_constellation(geo.uniform() * 2.0 * special::kPi);
            sc.q = cfg.q;
            sc.noise = SkewTParams{0.0, 1.0, delta, cfg.nu};
            sc.horizon = cfg.horizon;
            sc.initial_position_std = cfg.initial_position_std;
            models[r] = build_pseudorange_model(sc);
            RngStream sim = rep.substream(0);
            trajectories[r] = simulate_pseudorange(sc, models[r], sim);
        });

        auto timed_setting = [&](const std::string& algorithm, int setting,
                                 ExperimentConfig setting_cfg) {
            const auto start = std::chrono::steady_clock::now();
            std::vector<double> rmse(static_cast<std::size_t>(n_mc));
            detail::for_each_replication(cfg, n_mc, [&](std::size_t r) {
                RngStream rep = master.substream(r);
                const auto estimates = detail::run_algorithm(
                    algorithm, models[r], trajectories[r].measurements, setting_cfg,
                    rep.substream(10));
                rmse[r] = detail::position_rmse(estimates, trajectories[r]);
            });
            double total = 0.0;
            for (double v : rmse) total += v;
            const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                              start)
                                    .count();
            rows.push_back({algorithm, setting, delta, total / n_mc, wall});
        };

        for (const int iters : cfg.iteration_grid) {
            ExperimentConfig sub = cfg;
            sub.vb["stvbf"] = VbConfig{iters, 0.0};
            timed_setting("stvbf", iters, sub);
        }
        {
            ExperimentConfig sub = cfg;
            sub.vb["tvbf"] = VbConfig{10, 0.0};
            timed_setting("tvbf", 10, sub);
        }
        for (const int count : cfg.particle_grid) {
            ExperimentConfig sub = cfg;
            sub.particles = count;
            timed_setting("pf", count, sub);
        }
    }
    return rows;
}

struct EmpiricalNoiseResult {
    double win_rate = 0.0;  // fraction of replications where stvbf beats tvbf
    std::vector<double> rmse_stvbf;
    std::vector<double> rmse_tvbf;
};

/// Robustness study: measurement noise drawn from a histogram distribution
/// while every filter keeps its configured skew-t noise model.
inline EmpiricalNoiseResult run_empirical_noise(const ExperimentConfig& cfg,
                                                const HistogramDistribution& histogram) {
    ExperimentConfig sub = cfg;
    sub.algorithms = {"stvbf", "tvbf"};
    sub.reference = "stvbf";
    const PseudorangeResult res = detail::run_pseudorange_impl(
        sub, [&histogram](const PseudorangeScenario&) {
            return [&histogram](RngStream& rng) { return histogram.sample(rng); };
        });

    EmpiricalNoiseResult out;
    out.rmse_stvbf = res.rmse.at("stvbf");
    out.rmse_tvbf = res.rmse.at("tvbf");
    int wins = 0;
    for (std::size_t r = 0; r < out.rmse_stvbf.size(); ++r)
        if (out.rmse_stvbf[r] < out.rmse_tvbf[r]) ++wins;
    out.win_rate = static_cast<double>(wins) / static_cast<double>(out.rmse_stvbf.size());
    return out;
}

}  // namespace skewt
