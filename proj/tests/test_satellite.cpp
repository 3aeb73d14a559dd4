#include <gtest/gtest.h>

#include <random>

#include "frfvib/errors.hpp"
#include "frfvib/integrator.hpp"
#include "frfvib/satellite.hpp"
#include "frfvib/satellite_scenario.hpp"

using namespace frfvib;

namespace {

Vec3 random_ball(std::mt19937_64& gen, double radius) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Vec3 q(u(gen), u(gen), u(gen));
    if (q.norm() <= 1.0) return radius * q;
  }
}

SatelliteParams asymmetric() {
  SatelliteParams p;
  p.inertia << 10, 0.5, -0.3, 0.5, 15, 0.2, -0.3, 0.2, 20;
  return p;
}

}  // namespace

TEST(Skew, Examples) {
  EXPECT_TRUE(skew(Vec3::Zero()).isZero());
  Mat3 expected;
  expected << 0, 0, 0, 0, 0, -1, 0, 1, 0;
  EXPECT_EQ(skew(Vec3(1, 0, 0)), expected);
  std::mt19937_64 gen(1);
  for (int i = 0; i < 50; ++i) {
    const Vec3 v = random_ball(gen, 3.0);
    const Vec3 u = random_ball(gen, 3.0);
    EXPECT_LT((skew(v) * v).norm(), 1e-14);
    EXPECT_LT((skew(v) * u - v.cross(u)).norm(), 1e-14);
    EXPECT_TRUE((skew(v).transpose() + skew(v)).isZero());
  }
}

TEST(MrpJacobian, Examples) {
  EXPECT_TRUE(mrp_kinematics_jacobian(Vec3::Zero()).isApprox(0.25 * Mat3::Identity()));
  EXPECT_NEAR(mrp_kinematics_jacobian(Vec3(0.5, 0, 0))(0, 0), 0.3125, 1e-15);
  EXPECT_THROW(mrp_kinematics_jacobian(Vec3(1, 0, 0)), DomainError);
  EXPECT_THROW(mrp_kinematics_jacobian(Vec3(0.8, 0.8, 0)), DomainError);
}

TEST(MrpJacobian, DeterminantPositiveInsideBall) {
  std::mt19937_64 gen(2);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_GT(mrp_kinematics_jacobian(random_ball(gen, 0.999)).determinant(), 0.0);
  }
}

TEST(MrpJacobian, RateMatchesFiniteDifference) {
  std::mt19937_64 gen(3);
  for (int i = 0; i < 100; ++i) {
    const Vec3 q = random_ball(gen, 0.8);
    const Vec3 qd = random_ball(gen, 1.0);
    const double h = 1e-6;
    const Mat3 fd = (mrp_kinematics_jacobian(q + h * qd) - mrp_kinematics_jacobian(q - h * qd)) / (2 * h);
    EXPECT_LT((fd - mrp_kinematics_jacobian_rate(q, qd)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(MrpShadow, MapsOutsideToInside) {
  const Vec3 q(1.0, 0.5, 0.0);
  const Vec3 s = mrp_shadow(q);
  EXPECT_NEAR(s.x(), -0.8, 1e-15);
  EXPECT_NEAR(s.y(), -0.4, 1e-15);
  EXPECT_LT(s.norm(), 1.0);
  EXPECT_TRUE(mrp_shadow(s).isApprox(q));
  EXPECT_THROW(mrp_shadow(Vec3::Zero()), DomainError);
}

TEST(BodyDynamics, Examples) {
  SatelliteParams p;
  EXPECT_TRUE(eval_satellite_body_dynamics(p, Vec3::Zero(), Vec3::Zero()).isZero());
  SatelliteParams sphere;
  sphere.inertia = Mat3::Identity();
  EXPECT_LT(eval_satellite_body_dynamics(sphere, Vec3(0.3, -1, 2), Vec3::Zero()).norm(), 1e-15);
  SatelliteParams d;
  d.inertia = Vec3(2, 1, 1).asDiagonal();
  // omega x H omega = (0,1,1) x (0,1,1) = 0
  EXPECT_LT(eval_satellite_body_dynamics(d, Vec3(0, 1, 1), Vec3::Zero()).norm(), 1e-15);
  // (1,1,0) x (2,1,0) = (0,0,-1) -> omega' = -H^-1 (0,0,-1) = (0,0,1)
  EXPECT_TRUE(eval_satellite_body_dynamics(d, Vec3(1, 1, 0), Vec3::Zero()).isApprox(Vec3(0, 0, 1)));
  // torque only
  EXPECT_TRUE(eval_satellite_body_dynamics(d, Vec3::Zero(), Vec3(2, 1, 1)).isApprox(Vec3(1, 1, 1)));
}

TEST(LagrangianForm, OriginExample) {
  SatelliteParams p;
  p.inertia = Mat3::Identity();
  const auto lf = lagrangian_form(p, Vec3::Zero(), Vec3::Zero());
  EXPECT_TRUE(lf.inertia.isApprox(16.0 * Mat3::Identity()));
  EXPECT_TRUE(lf.coriolis.isZero());
  EXPECT_THROW(lagrangian_form(p, Vec3(1.2, 0, 0), Vec3::Zero()), DomainError);
}

TEST(LagrangianForm, InertiaSymmetricPositive) {
  std::mt19937_64 gen(4);
  const auto p = asymmetric();
  for (int i = 0; i < 100; ++i) {
    const auto lf = lagrangian_form(p, random_ball(gen, 0.95), random_ball(gen, 1.0));
    EXPECT_LT((lf.inertia - lf.inertia.transpose()).cwiseAbs().maxCoeff(), 1e-12 * lf.inertia.norm());
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat3>(lf.inertia).eigenvalues().minCoeff(), 0.0);
  }
}

TEST(LagrangianForm, SkewSymmetryOfInertiaRateMinusTwoCoriolis) {
  std::mt19937_64 gen(5);
  const auto p = asymmetric();
  for (int i = 0; i < 100; ++i) {
    const Vec3 q = random_ball(gen, 0.8);
    const Vec3 qd = random_ball(gen, 1.0);
    const Vec3 v = random_ball(gen, 1.0);
    const double h = 1e-6;
    const Mat3 hdot =
        (lagrangian_form(p, q + h * qd, qd).inertia - lagrangian_form(p, q - h * qd, qd).inertia) / (2 * h);
    const Mat3 c = lagrangian_form(p, q, qd).coriolis;
    EXPECT_LE(std::abs(v.dot((hdot - 2 * c) * v)), 1e-6 * v.squaredNorm() * hdot.norm());
  }
}

TEST(LagrangianForm, CoriolisReproducesBodyDynamics) {
  // H_s q'' + C_s q' must equal J^-T tau for the body-frame motion.
  std::mt19937_64 gen(6);
  const auto p = asymmetric();
  for (int i = 0; i < 50; ++i) {
    const Vec3 q = random_ball(gen, 0.8);
    const Vec3 w = random_ball(gen, 1.0);
    const Vec3 tau = random_ball(gen, 2.0);
    const Mat3 js = mrp_kinematics_jacobian(q);
    const Vec3 qd = js * w;
    const Vec3 wd = eval_satellite_body_dynamics(p, w, tau);
    const Vec3 qdd = mrp_kinematics_jacobian_rate(q, qd) * w + js * wd;
    const auto lf = lagrangian_form(p, q, qd);
    const Vec3 lhs = lf.inertia * qdd + lf.coriolis * qd;
    const Vec3 rhs = js.inverse().transpose() * tau;
    EXPECT_LT((lhs - rhs).norm(), 1e-10 * (1.0 + rhs.norm()));
  }
}

TEST(KineticEnergy, Examples) {
  SatelliteParams p;
  p.inertia = Mat3::Identity();
  EXPECT_DOUBLE_EQ(kinetic_energy(p, Vec3(0.2, 0.1, 0), Vec3::Zero()), 0.0);
  EXPECT_NEAR(kinetic_energy(p, Vec3::Zero(), Vec3(1, 0, 0)), 8.0, 1e-12);
  std::mt19937_64 gen(7);
  const auto a = asymmetric();
  for (int i = 0; i < 20; ++i) {
    const Vec3 q = random_ball(gen, 0.9);
    const Vec3 qd = random_ball(gen, 1.0);
    const auto lf = lagrangian_form(a, q, qd);
    EXPECT_NEAR(kinetic_energy(a, q, qd), 0.5 * qd.dot(lf.inertia * qd), 1e-10);
  }
}

TEST(RwDisturbance, Examples) {
  RwDisturbanceModel zero({1, 2}, {0, 0}, 3.0, WheelSpeedUnit::RevPerSecond, 11);
  EXPECT_DOUBLE_EQ(zero.torque(1.234), 0.0);
  RwDisturbanceModel one({1}, {1}, 2.0, WheelSpeedUnit::RevPerSecond, {{0.0}});
  EXPECT_NEAR(one.torque(0.0), 0.0, 1e-15);
  EXPECT_NEAR(one.torque(1.0 / 16.0), 4.0 * std::sin(M_PI / 4.0), 1e-12);
  EXPECT_NEAR(one.torque(1.0 / 16.0), 2.828, 1e-3);
  RwDisturbanceModel twice({1}, {1}, 4.0, WheelSpeedUnit::RevPerSecond, {{0.0}});
  EXPECT_NEAR(twice.torque(1.0 / 32.0), 4.0 * one.torque(1.0 / 16.0), 1e-12);
}

TEST(RwDisturbance, SeededPhasesReproducible) {
  const auto a = RwDisturbanceModel::standard(2.0, 42);
  const auto b = RwDisturbanceModel::standard(2.0, 42);
  const auto c = RwDisturbanceModel::standard(2.0, 43);
  EXPECT_EQ(a.phases(), b.phases());
  EXPECT_NE(a.phases(), c.phases());
  EXPECT_EQ(a.channels(), 3);
  for (const auto& row : a.phases()) {
    for (double alpha : row) {
      EXPECT_GE(alpha, 0.0);
      EXPECT_LT(alpha, 2 * M_PI);
    }
  }
  EXPECT_NE(a.phases()[0], a.phases()[1]);
}

TEST(RwDisturbance, UnitsAndValidation) {
  RwDisturbanceModel rad({1}, {1}, 2.0 * M_PI, WheelSpeedUnit::RadPerSecond, {{0.5}});
  EXPECT_NEAR(rad.wheel_speed_rev_s(), 1.0, 1e-15);
  EXPECT_NEAR(rad.angular_frequencies()[0], 2 * M_PI, 1e-12);
  EXPECT_NEAR(rad.torque_amplitudes()[0], 1.0, 1e-15);
  EXPECT_THROW(RwDisturbanceModel({0.5}, {1}, 1.0, WheelSpeedUnit::RevPerSecond, 1), ArgumentError);
  EXPECT_THROW(RwDisturbanceModel({1}, {-1}, 1.0, WheelSpeedUnit::RevPerSecond, 1), ArgumentError);
  EXPECT_THROW(RwDisturbanceModel({1, 2}, {1}, 1.0, WheelSpeedUnit::RevPerSecond, 1), ArgumentError);
}

TEST(SatelliteParams, Validation) {
  SatelliteParams p;
  EXPECT_NO_THROW(p.validate());
  p.inertia(0, 1) = 1.0;
  EXPECT_THROW(p.validate(), ArgumentError);
  SatelliteParams n;
  n.inertia = Vec3(1, -1, 1).asDiagonal();
  EXPECT_THROW(n.validate(), ArgumentError);
}

TEST(TorqueFree, ConservesEnergyAndMomentum) {
  const auto p = asymmetric();
  IntegratorConfig cfg;
  cfg.step_h = 1e-3;
  Vector x0(6);
  x0 << 0.1, -0.2, 0.3, 0.1, -0.05, 0.2;
  const auto traj = integrate(satellite_torque_free_field(p), x0, 0.0, 100.0, cfg, mrp_shadow_hook());
  auto energy = [&](const Vector& x) {
    const Vec3 w = x.segment<3>(3);
    return 0.5 * w.dot(p.inertia * w);
  };
  auto momentum = [&](const Vector& x) { return (p.inertia * Vec3(x.segment<3>(3))).norm(); };
  const double e0 = energy(x0);
  const double h0 = momentum(x0);
  double de = 0.0, dh = 0.0, dk = 0.0;
  for (const auto& x : traj.states) {
    de = std::max(de, std::abs(energy(x) - e0) / e0);
    dh = std::max(dh, std::abs(momentum(x) - h0) / h0);
    const Vec3 q = x.head<3>();
    dk = std::max(dk, std::abs(kinetic_energy(p, q, mrp_kinematics_jacobian(q) * Vec3(x.segment<3>(3))) - e0) / e0);
  }
  EXPECT_LE(de, 1e-6);
  EXPECT_LE(dh, 1e-6);
  EXPECT_LE(dk, 1e-6);
}

TEST(TorqueFree, BodyAndLagrangianFormsAgree) {
  // Integrate (q, q') with H_s q'' = -C_s q' and compare to the body-frame run.
  const auto p = asymmetric();
  Vector x0(6);
  x0 << 0.1, -0.2, 0.3, 0.1, -0.05, 0.2;
  IntegratorConfig cfg;
  cfg.step_h = 1e-3;
  const auto body = integrate(satellite_torque_free_field(p), x0, 0.0, 4.0, cfg);

  Vector y0(6);
  y0.head<3>() = x0.head<3>();
  y0.tail<3>() = mrp_kinematics_jacobian(x0.head<3>()) * Vec3(x0.tail<3>());
  VectorField lag = [&p](double, const Vector& y, Vector& dy) {
    const Vec3 q = y.head<3>();
    const Vec3 qd = y.tail<3>();
    const auto lf = lagrangian_form(p, q, qd);
    dy.head<3>() = qd;
    dy.tail<3>() = lf.inertia.ldlt().solve(-lf.coriolis * qd);
  };
  const auto lagr = integrate(lag, y0, 0.0, 4.0, cfg);
  ASSERT_EQ(body.states.size(), lagr.states.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < body.states.size(); ++i) {
    const Vec3 q = body.states[i].head<3>();
    const Vec3 qd = mrp_kinematics_jacobian(q) * Vec3(body.states[i].tail<3>());
    worst = std::max(worst, (q - Vec3(lagr.states[i].head<3>())).cwiseAbs().maxCoeff());
    worst = std::max(worst, (qd - Vec3(lagr.states[i].tail<3>())).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(ShadowHook, KeepsAttitudeInsideBall) {
  Vector x(6);
  x << 1.2, 0.0, 0.0, 1, 2, 3;
  mrp_shadow_hook()(x);
  EXPECT_NEAR(x[0], -1.0 / 1.2, 1e-15);
  EXPECT_EQ(x[3], 1.0);
}
