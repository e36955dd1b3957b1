#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "skewt/filters.hpp"

namespace skewt {

/// Backward Rauch-Tung-Striebel pass over stored filtered/predicted
/// sequences. predicted[k] must be the prior used at step k. The gain is
/// obtained from a Cholesky solve of the predicted covariance.
inline std::vector<GaussianBelief> rtss(const StateSpaceModel& model,
                                        const std::vector<GaussianBelief>& filtered,
                                        const std::vector<GaussianBelief>& predicted) {
    if (filtered.size() != predicted.size())
        throw ValidationError("rtss: filtered and predicted sequences must have equal length");
    std::vector<GaussianBelief> smoothed = filtered;
    if (filtered.size() <= 1) return smoothed;
    for (std::size_t k = filtered.size() - 1; k-- > 0;) {
        const GaussianBelief& pred_next = predicted[k + 1];
        Eigen::LLT<Eigen::MatrixXd> llt(pred_next.cov);
        if (llt.info() != Eigen::Success)
            throw NumericalError("rtss: predicted covariance factorization failed at step " +
                                 std::to_string(k + 1));
        // G = P_f A^T P_pred^{-1}
        const Eigen::MatrixXd gain = llt.solve(model.A * filtered[k].cov).transpose();
        smoothed[k].mean =
            filtered[k].mean + gain * (smoothed[k + 1].mean - pred_next.mean);
        smoothed[k].cov = filtered[k].cov +
                          gain * (smoothed[k + 1].cov - pred_next.cov) * gain.transpose();
        smoothed[k].cov = 0.5 * (smoothed[k].cov + smoothed[k].cov.transpose()).eval();
    }
    return smoothed;
}

struct SmootherResult {
    std::vector<GaussianBelief> smoothed;
    std::vector<VbLatentState> latents;
    int outer_iters = 0;
};

/// Skew-t variational Bayes smoother.
///
/// Outer sweeps alternate a full forward filter pass using the current
/// per-step mixing weights and skew offsets, a backward RTS pass, and a
/// refresh of every step's truncated-normal/gamma latent from the smoothed
/// marginals. Terminates on the largest per-step estimate change, or after
/// cfg.max_iters sweeps.
inline SmootherResult stvbs(const StateSpaceModel& model, const std::vector<Eigen::VectorXd>& ys,
                            const VbConfig& cfg, VbTrace* trace = nullptr) {
    model.validate();
    cfg.validate();
    if (ys.empty()) throw ValidationError("stvbs: at least one measurement is required");
    const std::size_t horizon = ys.size();

    SmootherResult result;
    result.latents.assign(horizon, VbLatentState::initial(model.meas_dim()));
    std::vector<Eigen::VectorXd> prev_means;

    for (int outer = 1; outer <= cfg.max_iters; ++outer) {
        result.outer_iters = outer;
        FilterRun run = detail::run_forward(
            model, ys, [&](const GaussianBelief& b, const Eigen::VectorXd& y, std::size_t k) {
                const Eigen::VectorXd noise_var =
                    model.R.cwiseQuotient(result.latents[k].lambda_bar);
                const Eigen::VectorXd offset = model.Delta.cwiseProduct(result.latents[k].u_bar);
                return kf_update(b, y, model.C, offset, noise_var);
            });
        result.smoothed = rtss(model, run.filtered, run.predicted);

        double change = std::numeric_limits<double>::infinity();
        if (outer > 1) {
            change = 0.0;
            for (std::size_t k = 0; k < horizon; ++k)
                change = std::max(
                    change,
                    (result.smoothed[k].mean - prev_means[k]).lpNorm<Eigen::Infinity>());
            if (trace) trace->step_changes.push_back(change);
        }
        prev_means.resize(horizon);
        for (std::size_t k = 0; k < horizon; ++k) prev_means[k] = result.smoothed[k].mean;

        for (std::size_t k = 0; k < horizon; ++k)
            detail::update_skew_latent(model, result.smoothed[k], ys[k], result.latents[k]);
        if (outer > 1 && change < cfg.tol) break;
    }
    return result;
}

struct TvbsResult {
    std::vector<GaussianBelief> smoothed;
    int outer_iters = 0;
};

/// Symmetric Student-t variational Bayes smoother baseline: the stvbs
/// structure with the skew latent removed and the t-baseline noise
/// parameterization.
inline TvbsResult tvbs(const StateSpaceModel& model, const std::vector<Eigen::VectorXd>& ys,
                       const VbConfig& cfg) {
    model.validate();
    cfg.validate();
    if (ys.empty()) throw ValidationError("tvbs: at least one measurement is required");
    const std::size_t horizon = ys.size();
    const StudentTNoise noise = student_t_noise_for(model);

    TvbsResult result;
    std::vector<Eigen::VectorXd> lambdas(horizon, Eigen::VectorXd::Ones(model.meas_dim()));
    std::vector<Eigen::VectorXd> prev_means;

    for (int outer = 1; outer <= cfg.max_iters; ++outer) {
        result.outer_iters = outer;
        FilterRun run = detail::run_forward(
            model, ys, [&](const GaussianBelief& b, const Eigen::VectorXd& y, std::size_t k) {
                const Eigen::VectorXd noise_var = noise.shape.cwiseQuotient(lambdas[k]);
                return kf_update(b, y, model.C, noise.mean, noise_var);
            });
        result.smoothed = rtss(model, run.filtered, run.predicted);

        double change = std::numeric_limits<double>::infinity();
        if (outer > 1) {
            change = 0.0;
            for (std::size_t k = 0; k < horizon; ++k)
                change = std::max(
                    change,
                    (result.smoothed[k].mean - prev_means[k]).lpNorm<Eigen::Infinity>());
        }
        prev_means.resize(horizon);
        for (std::size_t k = 0; k < horizon; ++k) prev_means[k] = result.smoothed[k].mean;

        for (std::size_t k = 0; k < horizon; ++k) {
            const Eigen::VectorXd eps = ys[k] - noise.mean - model.C * result.smoothed[k].mean;
            const Eigen::VectorXd cpc =
                (model.C * result.smoothed[k].cov).cwiseProduct(model.C).rowwise().sum();
            for (Eigen::Index i = 0; i < model.meas_dim(); ++i) {
                const double psi = (eps(i) * eps(i) + cpc(i)) / noise.shape(i);
                lambdas[k](i) = (model.nu(i) + 1.0) / (model.nu(i) + psi);
            }
        }
        if (outer > 1 && change < cfg.tol) break;
    }
    return result;
}

/// Gated Kalman forward pass (true noise moments) followed by the RTS
/// backward pass.
inline std::vector<GaussianBelief> rtss_g(const StateSpaceModel& model,
                                          const std::vector<Eigen::VectorXd>& ys,
                                          double gate_p = 0.99) {
    const NoiseMoments nm = skew_noise_moments(model);
    const FilterRun run = kf_gated_filter(model, ys, nm.mean, nm.var, gate_p);
    return rtss(model, run.filtered, run.predicted);
}

}  // namespace skewt
