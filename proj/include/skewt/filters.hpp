#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "skewt/distributions.hpp"
#include "skewt/state_space.hpp"

namespace skewt {

/// Termination policy for the variational iterations: stop when the
/// infinity-norm change of the state estimate drops below tol, or after
/// max_iters coordinate sweeps. tol = 0 always runs max_iters sweeps.
struct VbConfig {
    int max_iters = 30;
    double tol = 1e-2;

    void validate() const {
        if (max_iters < 1) throw ValidationError("vb config: max_iters must be >= 1");
        if (!(tol >= 0.0)) throw ValidationError("vb config: tol must be >= 0");
    }
};

/// Per-step variational quantities of the skew-t filter/smoother.
/// All vectors have one entry per measurement component; the matrices they
/// represent (Lambda, U, Upsilon, Psi) are diagonal throughout because the
/// shape and spread matrices are diagonal.
struct VbLatentState {
    Eigen::VectorXd lambda_bar;  // E[Lambda_ii], the scale-mixing weights
    Eigen::VectorXd u_bar;       // posterior mean of the truncated latent u
    Eigen::VectorXd u_loc;       // location of the truncated-normal posterior
    Eigen::VectorXd u_cov;       // squared scale of the truncated-normal posterior
    Eigen::VectorXd upsilon;     // E[u_i^2]
    Eigen::VectorXd psi;         // quadratic-form diagonal feeding the Lambda update
    Eigen::VectorXd residual;    // y - C x under the current state estimate

    static VbLatentState initial(Eigen::Index ny) {
        VbLatentState s;
        s.lambda_bar = Eigen::VectorXd::Ones(ny);
        s.u_bar = Eigen::VectorXd::Zero(ny);
        s.u_loc = Eigen::VectorXd::Zero(ny);
        s.u_cov = Eigen::VectorXd::Ones(ny);
        s.upsilon = Eigen::VectorXd::Zero(ny);
        s.psi = Eigen::VectorXd::Zero(ny);
        s.residual = Eigen::VectorXd::Zero(ny);
        return s;
    }
};

/// Optional instrumentation for the VB loops.
struct VbTrace {
    std::vector<double> step_changes;      // estimate change per sweep, from sweep 2
    std::vector<VbLatentState> latents;    // filled only when capture_latents is set
    bool capture_latents = false;
};

inline GaussianBelief kf_predict(const StateSpaceModel& model, const GaussianBelief& belief) {
    GaussianBelief out;
    out.mean = model.A * belief.mean;
    out.cov = model.A * belief.cov * model.A.transpose() + model.Q;
    out.cov = 0.5 * (out.cov + out.cov.transpose());
    return out;
}

/// Measurement update with independent Gaussian noise N(noise_mean,
/// diag(noise_var)). The innovation covariance is factorized, never
/// inverted.
inline GaussianBelief kf_update(const GaussianBelief& belief, const Eigen::VectorXd& y,
                                const Eigen::MatrixXd& C, const Eigen::VectorXd& noise_mean,
                                const Eigen::VectorXd& noise_var) {
    if (!(noise_var.minCoeff() > 0.0))
        throw ValidationError("kf_update: noise variances must be positive");
    const Eigen::MatrixXd CP = C * belief.cov;  // ny x nx
    Eigen::MatrixXd S = CP * C.transpose();
    S.diagonal() += noise_var;
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success)
        throw NumericalError("kf_update: innovation covariance factorization failed");
    const Eigen::MatrixXd gain = llt.solve(CP).transpose();  // P C^T S^{-1}
    GaussianBelief out;
    out.mean = belief.mean + gain * (y - C * belief.mean - noise_mean);
    out.cov = belief.cov - gain * CP;
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    return out;
}

struct GatedUpdateResult {
    GaussianBelief posterior;
    std::vector<bool> kept;
};

/// Kalman update that discards measurement components whose normalized
/// squared innovation strictly exceeds the given chi-square threshold.
/// With everything gated out the prior is returned unchanged.
inline GatedUpdateResult kf_gated_update_with_threshold(
    const GaussianBelief& belief, const Eigen::VectorXd& y, const Eigen::MatrixXd& C,
    const Eigen::VectorXd& noise_mean, const Eigen::VectorXd& noise_var, double threshold) {
    const auto ny = C.rows();
    const Eigen::MatrixXd CP = C * belief.cov;
    const Eigen::VectorXd s_diag = CP.cwiseProduct(C).rowwise().sum() + noise_var;
    const Eigen::VectorXd innovation = y - C * belief.mean - noise_mean;

    GatedUpdateResult out;
    out.kept.assign(static_cast<std::size_t>(ny), true);
    Eigen::Index kept_count = 0;
    for (Eigen::Index i = 0; i < ny; ++i) {
        const double nis = innovation(i) * innovation(i) / s_diag(i);
        out.kept[static_cast<std::size_t>(i)] = !(nis > threshold);
        if (out.kept[static_cast<std::size_t>(i)]) ++kept_count;
    }
    if (kept_count == 0) {
        out.posterior = belief;
        return out;
    }
    if (kept_count == ny) {
        out.posterior = kf_update(belief, y, C, noise_mean, noise_var);
        return out;
    }
    Eigen::MatrixXd Ck(kept_count, C.cols());
    Eigen::VectorXd yk(kept_count), mk(kept_count), vk(kept_count);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < ny; ++i) {
        if (!out.kept[static_cast<std::size_t>(i)]) continue;
        Ck.row(r) = C.row(i);
        yk(r) = y(i);
        mk(r) = noise_mean(i);
        vk(r) = noise_var(i);
        ++r;
    }
    out.posterior = kf_update(belief, yk, Ck, mk, vk);
    return out;
}

inline GatedUpdateResult kf_gated_update(const GaussianBelief& belief, const Eigen::VectorXd& y,
                                         const Eigen::MatrixXd& C,
                                         const Eigen::VectorXd& noise_mean,
                                         const Eigen::VectorXd& noise_var, double gate_p = 0.99) {
    if (!(gate_p > 0.0 && gate_p < 1.0))
        throw ValidationError("kf_gated_update: gate_p must lie in (0, 1)");
    return kf_gated_update_with_threshold(belief, y, C, noise_mean, noise_var,
                                          chi2_quantile(gate_p, 1));
}

namespace detail {

/// Coordinate updates of q(u) and q(Lambda) given the current state
/// belief; shared by the skew-t filter and smoother. Updates latent in
/// place.
inline void update_skew_latent(const StateSpaceModel& model, const GaussianBelief& belief,
                               const Eigen::VectorXd& y, VbLatentState& latent) {
    const auto ny = model.meas_dim();
    latent.residual = y - model.C * belief.mean;
    const Eigen::VectorXd cpc =
        (model.C * belief.cov).cwiseProduct(model.C).rowwise().sum();
    for (Eigen::Index i = 0; i < ny; ++i) {
        const double delta = model.Delta(i);
        const double r = model.R(i);
        const double ku = delta / (delta * delta + r);
        latent.u_loc(i) = ku * latent.residual(i);
        latent.u_cov(i) = (1.0 - ku * delta) / latent.lambda_bar(i);
        const auto tm = trunc_normal_moments(latent.u_loc(i), latent.u_cov(i));
        latent.u_bar(i) = tm.mean;
        latent.upsilon(i) = tm.second_moment;
        double psi = (latent.residual(i) * latent.residual(i) + cpc(i)) / r +
                     (delta * delta / r + 1.0) * latent.upsilon(i) -
                     2.0 * delta * latent.u_bar(i) * latent.residual(i) / r;
        latent.psi(i) = std::max(psi, 0.0);
        latent.lambda_bar(i) = (model.nu(i) + 2.0) / (model.nu(i) + latent.psi(i));
    }
}

}  // namespace detail

struct StvbfStepResult {
    GaussianBelief posterior;
    VbLatentState latent;
    int iters = 0;
};

/// One measurement update of the skew-t variational Bayes filter.
///
/// Cyclic coordinate sweeps: the state update is a Kalman update with
/// effective noise covariance diag(R / lambda_bar) and measurement offset
/// Delta u_bar; then the truncated-normal latent and the gamma mixing
/// weights are refreshed from the new posterior. The latent state is
/// re-initialized at every time step.
inline StvbfStepResult stvbf_step(const StateSpaceModel& model, const GaussianBelief& predicted,
                                  const Eigen::VectorXd& y, const VbConfig& cfg,
                                  VbTrace* trace = nullptr) {
    cfg.validate();
    StvbfStepResult result;
    result.latent = VbLatentState::initial(model.meas_dim());
    Eigen::VectorXd prev_mean;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        result.iters = it;
        const Eigen::VectorXd noise_var = model.R.cwiseQuotient(result.latent.lambda_bar);
        const Eigen::VectorXd offset = model.Delta.cwiseProduct(result.latent.u_bar);
        try {
            result.posterior = kf_update(predicted, y, model.C, offset, noise_var);
        } catch (const NumericalError& err) {
            throw NumericalError("stvbf_step: sweep " + std::to_string(it) + ": " + err.what());
        }
        double change = std::numeric_limits<double>::infinity();
        if (it > 1) {
            change = (result.posterior.mean - prev_mean).lpNorm<Eigen::Infinity>();
            if (trace) trace->step_changes.push_back(change);
        }
        prev_mean = result.posterior.mean;
        detail::update_skew_latent(model, result.posterior, y, result.latent);
        if (trace && trace->capture_latents) trace->latents.push_back(result.latent);
        if (it > 1 && change < cfg.tol) break;
    }
    return result;
}

/// Location/scale parameters of the symmetric-t baseline noise model:
/// the true skew-t mean and (nu - 2)/nu times the true variance.
struct StudentTNoise {
    Eigen::VectorXd mean;
    Eigen::VectorXd shape;
};

inline StudentTNoise student_t_noise_for(const StateSpaceModel& model) {
    const auto ny = model.meas_dim();
    StudentTNoise out{Eigen::VectorXd(ny), Eigen::VectorXd(ny)};
    for (Eigen::Index i = 0; i < ny; ++i) {
        const auto [mean, var] = skew_t_moments(model.noise_component(i));
        out.mean(i) = mean;
        out.shape(i) = (model.nu(i) - 2.0) / model.nu(i) * var;
    }
    return out;
}

/// True mean/variance of each measurement-noise component, for the
/// moment-matched Kalman baselines.
struct NoiseMoments {
    Eigen::VectorXd mean;
    Eigen::VectorXd var;
};

inline NoiseMoments skew_noise_moments(const StateSpaceModel& model) {
    const auto ny = model.meas_dim();
    NoiseMoments out{Eigen::VectorXd(ny), Eigen::VectorXd(ny)};
    for (Eigen::Index i = 0; i < ny; ++i) {
        const auto [mean, var] = skew_t_moments(model.noise_component(i));
        out.mean(i) = mean;
        out.var(i) = var;
    }
    return out;
}

struct TvbfStepResult {
    GaussianBelief posterior;
    Eigen::VectorXd lambda_bar;
    int iters = 0;
};

/// One measurement update of the symmetric Student-t variational Bayes
/// filter baseline: gamma scale-mixture weights only, no skew latent.
inline TvbfStepResult tvbf_step(const StateSpaceModel& model, const StudentTNoise& noise,
                                const GaussianBelief& predicted, const Eigen::VectorXd& y,
                                const VbConfig& cfg, VbTrace* trace = nullptr) {
    cfg.validate();
    TvbfStepResult result;
    result.lambda_bar = Eigen::VectorXd::Ones(model.meas_dim());
    Eigen::VectorXd prev_mean;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        result.iters = it;
        const Eigen::VectorXd noise_var = noise.shape.cwiseQuotient(result.lambda_bar);
        try {
            result.posterior = kf_update(predicted, y, model.C, noise.mean, noise_var);
        } catch (const NumericalError& err) {
            throw NumericalError("tvbf_step: sweep " + std::to_string(it) + ": " + err.what());
        }
        double change = std::numeric_limits<double>::infinity();
        if (it > 1) {
            change = (result.posterior.mean - prev_mean).lpNorm<Eigen::Infinity>();
            if (trace) trace->step_changes.push_back(change);
        }
        prev_mean = result.posterior.mean;
        const Eigen::VectorXd eps = y - noise.mean - model.C * result.posterior.mean;
        const Eigen::VectorXd cpc =
            (model.C * result.posterior.cov).cwiseProduct(model.C).rowwise().sum();
        for (Eigen::Index i = 0; i < model.meas_dim(); ++i) {
            const double psi = (eps(i) * eps(i) + cpc(i)) / noise.shape(i);
            result.lambda_bar(i) = (model.nu(i) + 1.0) / (model.nu(i) + psi);
        }
        if (it > 1 && change < cfg.tol) break;
    }
    return result;
}

inline TvbfStepResult tvbf_step(const StateSpaceModel& model, const GaussianBelief& predicted,
                                const Eigen::VectorXd& y, const VbConfig& cfg) {
    return tvbf_step(model, student_t_noise_for(model), predicted, y, cfg);
}

/// Forward-pass output: filtered[k] is the posterior at step k, and
/// predicted[k] the prior used at step k (predicted[0] is the model prior).
struct FilterRun {
    std::vector<GaussianBelief> filtered;
    std::vector<GaussianBelief> predicted;
    long total_vb_iters = 0;
};

namespace detail {

template <typename Step>
FilterRun run_forward(const StateSpaceModel& model, const std::vector<Eigen::VectorXd>& ys,
                      Step&& step) {
    FilterRun run;
    run.filtered.reserve(ys.size());
    run.predicted.reserve(ys.size());
    GaussianBelief belief{model.x0, model.P0};
    for (std::size_t k = 0; k < ys.size(); ++k) {
        run.predicted.push_back(belief);
        try {
            run.filtered.push_back(step(belief, ys[k], k));
        } catch (const NumericalError& err) {
            throw NumericalError("filter step " + std::to_string(k) + ": " + err.what());
        }
        belief = kf_predict(model, run.filtered.back());
    }
    return run;
}

}  // namespace detail

inline FilterRun kf_filter(const StateSpaceModel& model, const std::vector<Eigen::VectorXd>& ys,
                           const Eigen::VectorXd& noise_mean, const Eigen::VectorXd& noise_var) {
    return detail::run_forward(model, ys,
                               [&](const GaussianBelief& b, const Eigen::VectorXd& y, std::size_t) {
                                   return kf_update(b, y, model.C, noise_mean, noise_var);
                               });
}

inline FilterRun kf_gated_filter(const StateSpaceModel& model,
                                 const std::vector<Eigen::VectorXd>& ys,
                                 const Eigen::VectorXd& noise_mean,
                                 const Eigen::VectorXd& noise_var, double gate_p = 0.99) {
    const double threshold = chi2_quantile(gate_p, 1);
    return detail::run_forward(
        model, ys, [&](const GaussianBelief& b, const Eigen::VectorXd& y, std::size_t) {
            return kf_gated_update_with_threshold(b, y, model.C, noise_mean, noise_var, threshold)
                .posterior;
        });
}

inline FilterRun stvbf_filter(const StateSpaceModel& model, const std::vector<Eigen::VectorXd>& ys,
                              const VbConfig& cfg) {
    FilterRun run = detail::run_forward(
        model, ys, [&](const GaussianBelief& b, const Eigen::VectorXd& y, std::size_t) {
            return stvbf_step(model, b, y, cfg).posterior;
        });
    return run;
}

inline FilterRun tvbf_filter(const StateSpaceModel& model, const std::vector<Eigen::VectorXd>& ys,
                             const VbConfig& cfg) {
    const StudentTNoise noise = student_t_noise_for(model);
    return detail::run_forward(model, ys,
                               [&](const GaussianBelief& b, const Eigen::VectorXd& y, std::size_t) {
                                   return tvbf_step(model, noise, b, y, cfg).posterior;
                               });
}

}  // namespace skewt
