#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "skewt/state_space.hpp"

// Satellite pseudorange positioning scenario: a receiver doing a 3-D random
// walk plus a constant clock bias, measured through ranges to a synthetic
// satellite constellation with skew-t errors. The measurement is linearized
// at the prior mean; at satellite distances the linearization error is far
// below the noise floor.

namespace skewt {

struct PseudorangeScenario {
    std::vector<Eigen::Vector3d> satellites;
    double q = 10.0;                    // horizontal process-noise std (m)
    SkewTParams noise{0.0, 1.0, 5.0, 4.0};
    int horizon = 100;
    double bias_prior_std = 0.75;       // clock-bias prior std (m)
    double initial_position_std = 10.0; // position prior std per axis (m)

    void validate() const {
        if (satellites.size() < 4)
            throw ValidationError("scenario: at least 4 satellites are required");
        if (!(q >= 0.0) || !std::isfinite(q)) throw ValidationError("scenario: q must be >= 0");
        if (horizon < 0) throw ValidationError("scenario: horizon must be >= 0");
        if (!(bias_prior_std > 0.0))
            throw ValidationError("scenario: bias_prior_std must be > 0");
        if (!(initial_position_std > 0.0))
            throw ValidationError("scenario: initial_position_std must be > 0");
        noise.validate();
        for (const auto& s : satellites)
            if (!s.allFinite()) throw ValidationError("scenario: satellite positions must be finite");
    }
};

/// Eight satellites on a 26,600 km shell around the receiver, elevations
/// cycling {15, 35, 55, 75} degrees at 45-degree azimuth spacing. The
/// azimuth offset is randomized per replication to vary the geometry.
inline std::vector<Eigen::Vector3d> default_constellation(double azimuth_offset_rad) {
    constexpr double kRadiusMeters = 26'600e3;
    constexpr double kDeg = 3.14159265358979323846 / 180.0;
    const double elevations[4] = {15.0 * kDeg, 35.0 * kDeg, 55.0 * kDeg, 75.0 * kDeg};
    std::vector<Eigen::Vector3d> sats;
    sats.reserve(8);
    for (int i = 0; i < 8; ++i) {
        const double el = elevations[i % 4];
        const double az = azimuth_offset_rad + i * 45.0 * kDeg;
        sats.emplace_back(kRadiusMeters * std::cos(el) * std::sin(az),
                          kRadiusMeters * std::cos(el) * std::cos(az),
                          kRadiusMeters * std::sin(el));
    }
    return sats;
}

/// Range measured from `point` (position + clock bias state) to satellite i.
inline double pseudorange_value(const Eigen::Vector3d& satellite, const Eigen::Vector3d& position,
                                double bias) {
    return (satellite - position).norm() + bias;
}

/// Linearized measurement rows: row i is [-u_i^T, 1] with u_i the unit
/// line-of-sight vector from the linearization point to satellite i.
/// The constant range offset at the linearization point is folded into the
/// measurement residual by the caller.
inline Eigen::MatrixXd pseudorange_rows(const std::vector<Eigen::Vector3d>& satellites,
                                        const Eigen::Vector3d& point) {
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(satellites.size()), 4);
    for (std::size_t i = 0; i < satellites.size(); ++i) {
        const Eigen::Vector3d diff = satellites[i] - point;
        const double range = diff.norm();
        if (range < 1.0)
            throw ValidationError("pseudorange_rows: satellite coincides with linearization point");
        rows.row(static_cast<Eigen::Index>(i)).head<3>() = (-diff / range).transpose();
        rows(static_cast<Eigen::Index>(i), 3) = 1.0;
    }
    return rows;
}

/// Four-state model (3-D position + constant clock bias) linearized at the
/// prior mean. The bias row of Q is exactly zero; the bias is constant.
inline StateSpaceModel build_pseudorange_model(const PseudorangeScenario& scenario) {
    scenario.validate();
    const auto n = static_cast<Eigen::Index>(scenario.satellites.size());
    StateSpaceModel m;
    m.A = Eigen::MatrixXd::Identity(4, 4);
    m.Q = Eigen::Vector4d(scenario.q * scenario.q, scenario.q * scenario.q, 0.5 * 0.5, 0.0)
              .asDiagonal();
    m.x0 = Eigen::Vector4d::Zero();
    const double p2 = scenario.initial_position_std * scenario.initial_position_std;
    m.P0 = Eigen::Vector4d(p2, p2, p2, scenario.bias_prior_std * scenario.bias_prior_std)
               .asDiagonal();
    m.C = pseudorange_rows(scenario.satellites, m.x0.head<3>());
    m.R = Eigen::VectorXd::Constant(n, scenario.noise.sigma2);
    m.Delta = Eigen::VectorXd::Constant(n, scenario.noise.delta);
    m.nu = Eigen::VectorXd::Constant(n, scenario.noise.nu);
    m.validate();
    return m;
}

/// Truth simulation for the scenario: the state follows the linear dynamics,
/// measurements come from the exact (nonlinear) range equation, and the
/// returned measurements are residuals against the linearization point so
/// they live in the linear model's coordinates.
template <typename NoiseSampler>
inline Trajectory simulate_pseudorange(const PseudorangeScenario& scenario,
                                       const StateSpaceModel& model, RngStream& rng,
                                       NoiseSampler&& draw_noise) {
    Trajectory traj;
    const int horizon = scenario.horizon;
    if (horizon <= 0) return traj;
    traj.states.reserve(horizon);
    traj.measurements.reserve(horizon);

    const auto n = static_cast<Eigen::Index>(scenario.satellites.size());
    Eigen::VectorXd range0(n);
    for (Eigen::Index i = 0; i < n; ++i)
        range0(i) = pseudorange_value(scenario.satellites[i], model.x0.head<3>(), model.x0(3));

    const MvnSampler prior(model.P0);
    const MvnSampler process(model.Q);
    Eigen::VectorXd x = model.x0 + prior.sample(rng);
    for (int k = 0; k < horizon; ++k) {
        traj.states.push_back(x);
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i)
            y(i) = pseudorange_value(scenario.satellites[i], x.head<3>(), x(3)) + draw_noise(rng) -
                   range0(i);
        traj.measurements.push_back(std::move(y));
        if (k + 1 < horizon) x = model.A * x + process.sample(rng);
    }
    return traj;
}

inline Trajectory simulate_pseudorange(const PseudorangeScenario& scenario,
                                       const StateSpaceModel& model, RngStream& rng) {
    return simulate_pseudorange(scenario, model, rng, [&](RngStream& stream) {
        return sample_skew_t_one(scenario.noise, stream);
    });
}

}  // namespace skewt
