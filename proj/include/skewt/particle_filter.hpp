#pragma once

#include <Eigen/Dense>
#include <vector>

#include "skewt/distributions.hpp"
#include "skewt/state_space.hpp"

namespace skewt {

/// Bootstrap particle cloud. Rows of `particles` are states; log_weights
/// are kept normalized (they sum to 1 after exponentiation) between steps.
struct ParticleSet {
    Eigen::MatrixXd particles;    // N x nx
    Eigen::VectorXd log_weights;  // length N

    Eigen::Index count() const { return particles.rows(); }
};

inline ParticleSet pf_init(const StateSpaceModel& model, Eigen::Index n, RngStream& rng) {
    if (n < 1) throw ValidationError("pf_init: particle count must be >= 1");
    model.validate();
    const MvnSampler prior(model.P0);
    ParticleSet ps;
    ps.particles.resize(n, model.state_dim());
    for (Eigen::Index i = 0; i < n; ++i)
        ps.particles.row(i) = (model.x0 + prior.sample(rng)).transpose();
    ps.log_weights = Eigen::VectorXd::Constant(n, -std::log((double)n));
    return ps;
}

struct PfStepResult {
    ParticleSet particles;
    Eigen::VectorXd estimate;
    Eigen::VectorXd estimate_se;  // weighted-sample standard error per component
    double ess = 0.0;             // effective sample size 1 / sum(w^2)
};

/// One bootstrap step: propagate through the dynamics, weight with the
/// skew-t likelihood in the log domain, take the weighted mean as the
/// estimate, then resample systematically.
inline PfStepResult pf_step(const StateSpaceModel& model, ParticleSet ps, const Eigen::VectorXd& y,
                            RngStream& rng) {
    const Eigen::Index n = ps.count();
    const auto ny = model.meas_dim();
    const MvnSampler process(model.Q);

    std::vector<SkewTLogPdf> logpdf;
    logpdf.reserve(static_cast<std::size_t>(ny));
    for (Eigen::Index i = 0; i < ny; ++i) logpdf.emplace_back(model.noise_component(i));

    for (Eigen::Index p = 0; p < n; ++p) {
        ps.particles.row(p) =
            (model.A * ps.particles.row(p).transpose() + process.sample(rng)).transpose();
        const Eigen::VectorXd residual = y - model.C * ps.particles.row(p).transpose();
        double ll = 0.0;
        for (Eigen::Index i = 0; i < ny; ++i) ll += logpdf[static_cast<std::size_t>(i)](residual(i));
        ps.log_weights(p) += ll;
    }

    const double top = ps.log_weights.maxCoeff();
    if (!std::isfinite(top))
        throw DegeneracyError("pf_step: all particle weights underflowed");
    const Eigen::VectorXd w = (ps.log_weights.array() - top).exp();
    const double total = w.sum();

    PfStepResult out;
    out.estimate = (ps.particles.transpose() * w) / total;
    const Eigen::VectorXd wn = w / total;
    out.ess = 1.0 / wn.squaredNorm();
    out.estimate_se.setZero(ps.particles.cols());
    for (Eigen::Index p = 0; p < n; ++p) {
        const Eigen::VectorXd d = ps.particles.row(p).transpose() - out.estimate;
        out.estimate_se += (wn(p) * wn(p)) * d.cwiseProduct(d);
    }
    out.estimate_se = out.estimate_se.cwiseSqrt();

    // systematic resampling
    Eigen::MatrixXd resampled(n, ps.particles.cols());
    const double stride = total / (double)n;
    double target = rng.uniform() * stride;
    double cumulative = w(0);
    Eigen::Index src = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        while (cumulative < target && src + 1 < n) cumulative += w(++src);
        resampled.row(j) = ps.particles.row(src);
        target += stride;
    }
    out.particles.particles = std::move(resampled);
    out.particles.log_weights = Eigen::VectorXd::Constant(n, -std::log((double)n));
    return out;
}

}  // namespace skewt
