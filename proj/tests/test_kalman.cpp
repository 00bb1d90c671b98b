#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "headlead/kalman.hpp"
#include "headlead/rng.hpp"

using namespace headlead;

namespace {

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

// Reference model built longhand, entry by entry.
CvModel reference_model(const KalmanConfig& cfg) {
    CvModel m;
    m.dt = cfg.dt;
    m.F = Matrix6d::Identity();
    for (int i = 0; i < 3; ++i) m.F(i, i + 3) = cfg.dt;
    m.H = Matrix36d::Zero();
    for (int i = 0; i < 3; ++i) m.H(i, i) = 1.0;
    const double dt2 = cfg.dt * cfg.dt;
    const double dt3 = dt2 * cfg.dt;
    const double dt4 = dt3 * cfg.dt;
    m.Q = Matrix6d::Zero();
    for (int i = 0; i < 3; ++i) {
        m.Q(i, i) = cfg.q_accel * dt4 / 4.0;
        m.Q(i, i + 3) = cfg.q_accel * dt3 / 2.0;
        m.Q(i + 3, i) = cfg.q_accel * dt3 / 2.0;
        m.Q(i + 3, i + 3) = cfg.q_accel * dt2;
    }
    m.Rm = cfg.r_pos * cfg.r_pos * Eigen::Matrix3d::Identity();
    return m;
}

} // namespace

TEST_CASE("model matrices match the hand-built reference") {
    KalmanConfig cfg;
    cfg.dt = 0.05;
    cfg.q_accel = 1.7;
    cfg.r_pos = 0.03;
    const CvModel got = CvModel::from_config(cfg);
    const CvModel want = reference_model(cfg);
    CHECK((got.F - want.F).cwiseAbs().maxCoeff() == 0.0);
    CHECK((got.H - want.H).cwiseAbs().maxCoeff() == 0.0);
    CHECK((got.Q - want.Q).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((got.Rm - want.Rm).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(got.dt == cfg.dt);
}

TEST_CASE("config validation") {
    KalmanConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.r_pos = -1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.q_accel = std::nan("");
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.r_yaw = 0.0;
    try {
        cfg.validate();
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
    }
}

TEST_CASE("initial state pins position and spreads velocity") {
    KalmanConfig cfg;
    const StateEstimate s = init_state({1.0, -0.5, 3.0}, cfg);
    CHECK(s.x_hat(0) == 1.0);
    CHECK(s.x_hat(1) == -0.5);
    CHECK(s.x_hat(2) == 3.0);
    CHECK(s.x_hat(3) == 0.0);
    CHECK(s.x_hat(4) == 0.0);
    CHECK(s.x_hat(5) == 0.0);
    for (int i = 0; i < 3; ++i) {
        CHECK(s.P(i, i) == cfg.r_pos * cfg.r_pos);
        CHECK(s.P(i + 3, i + 3) == kInitVelocityStd * kInitVelocityStd);
    }
    CHECK(s.P.cwiseAbs().sum() ==
          doctest::Approx(3 * cfg.r_pos * cfg.r_pos +
                          3 * kInitVelocityStd * kInitVelocityStd)
              .epsilon(1e-15));
}

TEST_CASE("predict step equals F x and F P F^T + Q") {
    KalmanConfig cfg;
    const CvModel model = CvModel::from_config(cfg);
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        StateEstimate s;
        for (int k = 0; k < 6; ++k) s.x_hat(k) = rng.uniform(-4, 4);
        Matrix6d A;
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 6; ++c) A(r, c) = rng.gauss();
        s.P = A * A.transpose();  // SPD by construction
        const StateEstimate p = predict_step(s, model);
        const Vector6d want_x = model.F * s.x_hat;
        const Matrix6d want_P =
            model.F * s.P * model.F.transpose() + model.Q;
        CHECK((p.x_hat - want_x).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((p.P - want_P).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("predict step moves position by dt * velocity") {
    KalmanConfig cfg;
    const CvModel model = CvModel::from_config(cfg);
    StateEstimate s = init_state({0.0, 0.0, 2.0}, cfg);
    s.x_hat(3) = 1.2;
    s.x_hat(5) = -0.9;
    const StateEstimate p = predict_step(s, model);
    CHECK(near(p.x_hat(0), 1.2 * cfg.dt, 1e-15));
    CHECK(near(p.x_hat(2), 2.0 - 0.9 * cfg.dt, 1e-15));
    CHECK(p.x_hat(3) == 1.2);
    CHECK(p.x_hat(5) == -0.9);
}

TEST_CASE("covariance stays symmetric and positive semidefinite") {
    KalmanConfig cfg;
    const CvModel model = CvModel::from_config(cfg);
    Rng rng(5);
    StateEstimate s = init_state({0, 0, 3}, cfg);
    for (int i = 0; i < 300; ++i) {
        s = predict_step(s, model);
        if (i % 3 != 2) {
            const Vec3 z{rng.uniform(-2, 2), rng.uniform(-1, 1),
                         rng.uniform(1, 5)};
            s = update_step(s, z, model);
        }
        const double scale = s.P.cwiseAbs().maxCoeff();
        CHECK((s.P - s.P.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale);
        Eigen::SelfAdjointEigenSolver<Matrix6d> es(s.P);
        CHECK(es.eigenvalues().minCoeff() >= -1e-9 * s.P.trace());
    }
}

TEST_CASE("zero innovation leaves the mean in place") {
    KalmanConfig cfg;
    const CvModel model = CvModel::from_config(cfg);
    StateEstimate s = init_state({1, 2, 3}, cfg);
    s = predict_step(s, model);
    const Vec3 z = s.position();
    const StateEstimate u = update_step(s, z, model);
    CHECK((u.x_hat - s.x_hat).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("decoupled unit-variance update halves toward the measurement") {
    // With prior mean 0, prior P = I, R = I, the posterior position for a
    // measurement z = (2,2,2) is exactly (1,1,1): gain = P H^T (H P H^T+R)^-1
    // = 1/2 on each measured axis.
    KalmanConfig cfg;
    CvModel model = CvModel::from_config(cfg);
    model.Rm = Eigen::Matrix3d::Identity();
    StateEstimate s;
    s.x_hat.setZero();
    s.P = Matrix6d::Identity();
    const StateEstimate u = update_step(s, {2.0, 2.0, 2.0}, model);
    for (int i = 0; i < 3; ++i) {
        CHECK(near(u.x_hat(i), 1.0, 1e-12));
        CHECK(near(u.x_hat(i + 3), 0.0, 1e-12));
        CHECK(near(u.P(i, i), 0.5, 1e-12));
    }
}

TEST_CASE("an uninformative measurement barely moves the state") {
    // init_state ties the prior position variance to r_pos, so build a
    // confident posterior by hand and pair it with a huge measurement noise.
    KalmanConfig cfg;
    cfg.r_pos = 1e3;
    const CvModel model = CvModel::from_config(cfg);
    StateEstimate s;
    s.x_hat << 1.0, 1.0, 1.0, 0.0, 0.0, 0.0;
    s.P = 1e-6 * Matrix6d::Identity();
    const Vector6d before = s.x_hat;
    const StateEstimate u = update_step(s, {50, 50, 50}, model);
    CHECK((u.x_hat - before).cwiseAbs().maxCoeff() <= 1e-6 * 50);
}

TEST_CASE("noiseless constant-velocity track is recovered") {
    KalmanConfig cfg;
    const CvModel model = CvModel::from_config(cfg);
    const Vec3 v{0.9, 0.0, -1.1};
    const Vec3 p0{-1.0, 0.2, 5.0};
    StateEstimate s = init_state(p0, cfg);
    double worst_after_60 = 0.0;
    for (int k = 1; k <= 90; ++k) {
        s = predict_step(s, model);
        const Vec3 truth = p0 + v * (k * cfg.dt);
        s = update_step(s, truth, model);
        if (k >= 60) {
            worst_after_60 =
                std::max(worst_after_60, distance(s.position(), truth));
        }
    }
    CHECK(worst_after_60 < 1e-6);
    CHECK(near(s.x_hat(3), v.x, 1e-4));
    CHECK(near(s.x_hat(5), v.z, 1e-4));
}

TEST_CASE("n-step baseline extrapolates position linearly") {
    KalmanConfig cfg;
    const CvModel model = CvModel::from_config(cfg);
    StateEstimate s;
    s.x_hat << 1.0, -0.5, 4.0, 0.3, 0.0, -1.2;
    const Vec3 p15 = baseline_predict_n(s, 15, model);
    CHECK(near(p15.x, 1.0 + 15 * cfg.dt * 0.3, 1e-12));
    CHECK(near(p15.y, -0.5, 1e-12));
    CHECK(near(p15.z, 4.0 - 15 * cfg.dt * 1.2, 1e-12));

    // agrees with repeated application of F
    Vector6d x = s.x_hat;
    for (int i = 0; i < 15; ++i) x = model.F * x;
    CHECK(near(p15.x, x(0), 1e-12));
    CHECK(near(p15.y, x(1), 1e-12));
    CHECK(near(p15.z, x(2), 1e-12));

    CHECK_THROWS_AS(baseline_predict_n(s, 0, model), Error);
    CHECK_THROWS_AS(baseline_predict_n(s, -1, model), Error);
}

TEST_CASE("angle filter locks onto a constant angle") {
    KalmanConfig cfg;
    AngleKalman f(cfg);
    CHECK_FALSE(f.initialized());
    for (int i = 0; i < 50; ++i) {
        f.predict();
        f.update(0.7);
    }
    CHECK(f.initialized());
    CHECK(near(f.angle(), 0.7, 1e-9));
    CHECK(near(f.rate(), 0.0, 1e-6));
}

TEST_CASE("angle filter tracks a ramp") {
    KalmanConfig cfg;
    AngleKalman f(cfg);
    const double rate = 0.8;  // rad/s
    double theta = -0.3;
    for (int i = 0; i < 120; ++i) {
        f.predict();
        f.update(theta);
        theta += rate * cfg.dt;
    }
    CHECK(near(f.angle(), theta - rate * cfg.dt, 1e-3));
    CHECK(near(f.rate(), rate, 1e-2));
}

TEST_CASE("angle filter follows observations across the branch cut") {
    KalmanConfig cfg;
    AngleKalman f(cfg);
    // ramp through +pi; the state stays wrapped to (-pi, pi], so check
    // agreement with the truth modulo 2*pi rather than unwrapped growth
    const double rate = 2.0;
    double unwrapped = M_PI - 0.4;
    for (int i = 0; i < 30; ++i) {
        f.predict();
        f.update(wrap_angle(unwrapped).theta);
        CHECK(std::abs(wrap_angle(f.angle() - unwrapped).theta) < 0.2);
        unwrapped += rate * cfg.dt;
    }
    // no innovation shock at the cut: the rate estimate stays on the ramp
    CHECK(near(f.rate(), rate, 0.1));
}

TEST_CASE("angle filter reset forgets state") {
    KalmanConfig cfg;
    AngleKalman f(cfg);
    f.predict();
    f.update(1.0);
    CHECK(f.initialized());
    f.reset();
    CHECK_FALSE(f.initialized());
    f.predict();  // no-op before re-initialization
    f.update(-0.5);
    CHECK(near(f.angle(), -0.5, 1e-12));
}
