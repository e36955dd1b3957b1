#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "skewt/distributions.hpp"
#include "skewt/errors.hpp"
#include "skewt/rng.hpp"

namespace skewt {

/// Mean/covariance pair for a Gaussian (filtered, predicted or smoothed)
/// state estimate.
struct GaussianBelief {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

namespace detail {

inline bool is_symmetric(const Eigen::MatrixXd& m, double tol = 1e-9) {
    if (m.rows() != m.cols()) return false;
    const double scale = 1.0 + m.cwiseAbs().maxCoeff();
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

inline bool is_psd(const Eigen::MatrixXd& m, double tol = 1e-9) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) return false;
    const double top = std::max(1.0, es.eigenvalues().maxCoeff());
    return es.eigenvalues().minCoeff() >= -tol * top;
}

}  // namespace detail

/// Linear state-space model with skew-t measurement noise.
///
/// Dynamics   x_{k+1} = A x_k + w_k,  w_k ~ N(0, Q)
/// Measurement y_k = C x_k + e_k with [e_k]_i ~ ST(0, R_i, Delta_i, nu_i)
/// and Gaussian prior N(x0, P0) on the first state.
///
/// R and Delta are the diagonals of the (diagonal) spread and shape
/// matrices; measurement components are independent.
struct StateSpaceModel {
    Eigen::MatrixXd A;
    Eigen::MatrixXd C;
    Eigen::MatrixXd Q;
    Eigen::VectorXd R;
    Eigen::VectorXd Delta;
    Eigen::VectorXd nu;
    Eigen::VectorXd x0;
    Eigen::MatrixXd P0;

    Eigen::Index state_dim() const { return A.rows(); }
    Eigen::Index meas_dim() const { return C.rows(); }

    SkewTParams noise_component(Eigen::Index i) const {
        return SkewTParams{0.0, R(i), Delta(i), nu(i)};
    }

    /// Throws ValidationError naming the first violated invariant.
    void validate() const {
        const auto nx = A.rows();
        const auto ny = C.rows();
        if (A.cols() != nx) throw ValidationError("model: A must be square");
        if (nx < 1) throw ValidationError("model: state dimension must be >= 1");
        if (ny < 1) throw ValidationError("model: measurement dimension must be >= 1");
        if (C.cols() != nx) throw ValidationError("model: C column count must equal state dim");
        if (Q.rows() != nx || Q.cols() != nx)
            throw ValidationError("model: Q must be state dim x state dim");
        if (R.size() != ny) throw ValidationError("model: R diagonal must have meas dim entries");
        if (Delta.size() != ny)
            throw ValidationError("model: Delta diagonal must have meas dim entries");
        if (nu.size() != ny) throw ValidationError("model: nu must have meas dim entries");
        if (x0.size() != nx) throw ValidationError("model: x0 must have state dim entries");
        if (P0.rows() != nx || P0.cols() != nx)
            throw ValidationError("model: P0 must be state dim x state dim");
        if (!A.allFinite() || !C.allFinite() || !Q.allFinite() || !x0.allFinite() ||
            !P0.allFinite())
            throw ValidationError("model: matrices must be finite");
        if (!(R.minCoeff() > 0.0) || !R.allFinite())
            throw ValidationError("model: R entries must be positive and finite");
        if (!Delta.allFinite()) throw ValidationError("model: Delta entries must be finite");
        if (!(nu.minCoeff() > 0.0) || !nu.allFinite())
            throw ValidationError("model: nu entries must be positive and finite");
        if (!detail::is_symmetric(Q)) throw ValidationError("model: Q must be symmetric");
        if (!detail::is_psd(Q)) throw ValidationError("model: Q must be positive semidefinite");
        if (!detail::is_symmetric(P0)) throw ValidationError("model: P0 must be symmetric");
        if (!detail::is_psd(P0)) throw ValidationError("model: P0 must be positive semidefinite");
    }
};

/// Simulated states and measurements, equal length.
struct Trajectory {
    std::vector<Eigen::VectorXd> states;
    std::vector<Eigen::VectorXd> measurements;

    std::size_t horizon() const { return states.size(); }
};

/// Sampler for N(0, S) with S positive semidefinite (rank deficiency is
/// fine; null directions simply get no noise).
class MvnSampler {
public:
    explicit MvnSampler(const Eigen::MatrixXd& cov) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        if (es.info() != Eigen::Success)
            throw NumericalError("covariance eigendecomposition failed");
        factor_ = es.eigenvectors() *
                  es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }

    Eigen::VectorXd sample(RngStream& rng) const {
        Eigen::VectorXd z(factor_.cols());
        for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
        return factor_ * z;
    }

private:
    Eigen::MatrixXd factor_;
};

/// Draw a K-step trajectory and its measurements from the model.
inline Trajectory simulate(const StateSpaceModel& model, std::size_t horizon, RngStream& rng) {
    model.validate();
    Trajectory traj;
    if (horizon == 0) return traj;
    traj.states.reserve(horizon);
    traj.measurements.reserve(horizon);

    const MvnSampler prior(model.P0);
    const MvnSampler process(model.Q);
    const auto ny = model.meas_dim();

    Eigen::VectorXd x = model.x0 + prior.sample(rng);
    for (std::size_t k = 0; k < horizon; ++k) {
        traj.states.push_back(x);
        Eigen::VectorXd y = model.C * x;
        for (Eigen::Index i = 0; i < ny; ++i)
            y(i) += sample_skew_t_one(model.noise_component(i), rng);
        traj.measurements.push_back(std::move(y));
        if (k + 1 < horizon) x = model.A * x + process.sample(rng);
    }
    return traj;
}

}  // namespace skewt
