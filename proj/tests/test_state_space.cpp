#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "skewt/pseudorange.hpp"
#include "skewt/state_space.hpp"

using namespace skewt;

namespace {

StateSpaceModel scalar_model(double R = 1.0, double delta = 5.0, double nu = 4.0) {
    StateSpaceModel m;
    m.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
    m.C = Eigen::MatrixXd::Constant(1, 1, 1.0);
    m.Q = Eigen::MatrixXd::Constant(1, 1, 1.0);
    m.R = Eigen::VectorXd::Constant(1, R);
    m.Delta = Eigen::VectorXd::Constant(1, delta);
    m.nu = Eigen::VectorXd::Constant(1, nu);
    m.x0 = Eigen::VectorXd::Zero(1);
    m.P0 = Eigen::MatrixXd::Constant(1, 1, 1.0);
    return m;
}

}  // namespace

TEST_CASE("model validation names the violated invariant") {
    auto m = scalar_model();
    CHECK_NOTHROW(m.validate());

    auto bad = m;
    bad.R(0) = 0.0;
    CHECK_THROWS_MATCHES(bad.validate(), ValidationError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("R")));

    bad = m;
    bad.nu(0) = -1.0;
    CHECK_THROWS_MATCHES(bad.validate(), ValidationError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("nu")));

    bad = m;
    bad.Q(0, 0) = -1.0;
    CHECK_THROWS_MATCHES(bad.validate(), ValidationError,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("Q")));

    bad = m;
    bad.C = Eigen::MatrixXd::Ones(1, 3);
    CHECK_THROWS_AS(bad.validate(), ValidationError);

    StateSpaceModel asym = m;
    asym.A = Eigen::MatrixXd::Ones(2, 2);
    asym.Q = Eigen::MatrixXd::Zero(2, 2);
    asym.Q(0, 1) = 0.5;  // not symmetric
    asym.C = Eigen::MatrixXd::Ones(1, 2);
    asym.x0 = Eigen::VectorXd::Zero(2);
    asym.P0 = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_MATCHES(
        asym.validate(), ValidationError,
        Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("symmetric")));
}

TEST_CASE("simulate degenerate and empty cases") {
    auto m = scalar_model();
    m.Q.setZero();
    m.P0.setZero();
    m.x0(0) = 3.5;
    m.Delta.setZero();

    RngStream rng(1);
    const auto traj = simulate(m, 10, rng);
    REQUIRE(traj.horizon() == 10);
    for (const auto& x : traj.states) CHECK(x(0) == 3.5);

    RngStream rng2(1);
    const auto empty = simulate(m, 0, rng2);
    CHECK(empty.horizon() == 0);
    CHECK(empty.measurements.empty());
}

TEST_CASE("simulate is reproducible for a fixed seed") {
    const auto m = scalar_model();
    RngStream a(77), b(77);
    const auto t1 = simulate(m, 50, a);
    const auto t2 = simulate(m, 50, b);
    for (std::size_t k = 0; k < 50; ++k) {
        CHECK(t1.states[k] == t2.states[k]);
        CHECK(t1.measurements[k] == t2.measurements[k]);
    }
}

TEST_CASE("simulated measurement noise has the skew-t mean") {
    // 2 components x 500k steps = 1e6 noise draws
    StateSpaceModel m;
    m.A = Eigen::MatrixXd::Identity(1, 1);
    m.C = Eigen::MatrixXd::Ones(2, 1);
    m.Q = Eigen::MatrixXd::Zero(1, 1);
    m.R = Eigen::VectorXd::Ones(2);
    m.Delta = Eigen::VectorXd::Constant(2, 5.0);
    m.nu = Eigen::VectorXd::Constant(2, 4.0);
    m.x0 = Eigen::VectorXd::Zero(1);
    m.P0 = Eigen::MatrixXd::Zero(1, 1);

    RngStream rng(2024);
    const auto traj = simulate(m, 500'000, rng);
    double sum = 0.0;
    for (std::size_t k = 0; k < traj.horizon(); ++k) {
        const Eigen::VectorXd noise = traj.measurements[k] - m.C * traj.states[k];
        sum += noise.sum();
    }
    CHECK(sum / 1e6 == Catch::Approx(5.0).margin(0.05));
}

TEST_CASE("simulated noise variance approaches R in the Gaussian limit") {
    StateSpaceModel m = scalar_model(2.5, 0.0, 1e6);
    m.Q.setZero();
    m.P0.setZero();
    RngStream rng(5);
    const auto traj = simulate(m, 100'000, rng);
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t k = 0; k < traj.horizon(); ++k) {
        const double e = traj.measurements[k](0) - traj.states[k](0);
        sum += e;
        sumsq += e * e;
    }
    const double n = (double)traj.horizon();
    const double var = sumsq / n - (sum / n) * (sum / n);
    // 3 Monte Carlo standard errors of a normal sample variance
    const double se = 2.5 * std::sqrt(2.0 / (n - 1.0));
    CHECK(std::fabs(var - 2.5) < 3.0 * se);
}

TEST_CASE("pseudorange rows geometry") {
    std::vector<Eigen::Vector3d> sats = {{0, 0, 26'600e3}, {26'600e3, 0, 0},
                                         {0, 26'600e3, 0}, {0, 0, -26'600e3}};
    const auto rows = pseudorange_rows(sats, Eigen::Vector3d::Zero());
    REQUIRE(rows.rows() == 4);
    CHECK(rows(0, 0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(rows(0, 1) == Catch::Approx(0.0).margin(1e-15));
    CHECK(rows(0, 2) == Catch::Approx(-1.0).margin(1e-15));
    CHECK(rows(0, 3) == 1.0);
    for (int i = 0; i < 4; ++i) CHECK(rows.row(i).head<3>().norm() == Catch::Approx(1.0).margin(1e-14));

    CHECK_THROWS_AS(pseudorange_rows(sats, sats[0]), ValidationError);
}

TEST_CASE("pseudorange rows match finite differences of the range equation") {
    const auto sats = default_constellation(0.7);
    const Eigen::Vector3d point(120.0, -40.0, 10.0);
    const auto rows = pseudorange_rows(sats, point);
    const double step = 1e-2;
    for (std::size_t i = 0; i < sats.size(); ++i) {
        for (int j = 0; j < 3; ++j) {
            Eigen::Vector3d hi = point, lo = point;
            hi(j) += step;
            lo(j) -= step;
            const double diff = (pseudorange_value(sats[i], hi, 0.0) -
                                 pseudorange_value(sats[i], lo, 0.0)) /
                                (2.0 * step);
            CAPTURE(i, j);
            CHECK(rows(static_cast<Eigen::Index>(i), j) == Catch::Approx(diff).margin(1e-6));
        }
        // bias derivative is exactly 1
        CHECK(rows(static_cast<Eigen::Index>(i), 3) == 1.0);
    }
}

TEST_CASE("build_pseudorange_model wiring") {
    PseudorangeScenario sc;
    sc.satellites = default_constellation(0.0);
    sc.q = 10.0;
    const auto m = build_pseudorange_model(sc);
    CHECK(m.Q(0, 0) == 100.0);
    CHECK(m.Q(1, 1) == 100.0);
    CHECK(m.Q(2, 2) == 0.25);
    CHECK(m.Q(3, 3) == 0.0);
    CHECK(m.P0(3, 3) == Catch::Approx(0.5625));
    CHECK(m.meas_dim() == 8);
    CHECK_NOTHROW(m.validate());

    PseudorangeScenario few;
    few.satellites = {{1e7, 0, 0}, {0, 1e7, 0}, {0, 0, 1e7}};
    CHECK_THROWS_MATCHES(build_pseudorange_model(few), ValidationError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("satellites")));
}

TEST_CASE("pseudorange truth simulation stays near the linear model") {
    PseudorangeScenario sc;
    sc.satellites = default_constellation(1.2);
    sc.q = 10.0;
    sc.horizon = 100;
    const auto model = build_pseudorange_model(sc);

    RngStream rng(31);
    const auto traj = simulate_pseudorange(sc, model, rng);
    REQUIRE(traj.horizon() == 100);

    // folded measurements should equal C x + noise up to the (tiny)
    // linearization error; bound the systematic part by comparing the
    // exact range residual with its linearization
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.horizon(); ++k) {
        const Eigen::VectorXd linear = model.C * traj.states[k];
        for (Eigen::Index i = 0; i < model.meas_dim(); ++i) {
            const double exact =
                pseudorange_value(sc.satellites[i], traj.states[k].head<3>(), traj.states[k](3)) -
                pseudorange_value(sc.satellites[i], model.x0.head<3>(), model.x0(3));
            worst = std::max(worst, std::fabs(exact - linear(i)));
        }
    }
    CHECK(worst < 1e-2);  // meters; noise std is >= 1

    RngStream rng2(31);
    const auto traj2 = simulate_pseudorange(sc, model, rng2);
    CHECK(traj2.measurements[99] == traj.measurements[99]);
}
