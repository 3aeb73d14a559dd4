#include "frfvib/satellite.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "frfvib/errors.hpp"

namespace frfvib {
namespace {

void require_inside_unit_ball(const Vec3& q) {
  if (!q.allFinite() || q.squaredNorm() >= 1.0) {
    throw DomainError("MRP vector must satisfy |q| < 1; switch to the shadow set first");
  }
}

}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

Mat3 detail::mrp_map(const Vec3& q) {
  return 0.25 * ((1.0 - q.squaredNorm()) * Mat3::Identity() + 2.0 * skew(q) +
                 2.0 * q * q.transpose());
}

Mat3 mrp_kinematics_jacobian(const Vec3& q) {
  require_inside_unit_ball(q);
  return detail::mrp_map(q);
}

Mat3 mrp_kinematics_jacobian_rate(const Vec3& q, const Vec3& qdot) {
  return 0.25 * (-2.0 * q.dot(qdot) * Mat3::Identity() + 2.0 * skew(qdot) +
                 2.0 * (qdot * q.transpose() + q * qdot.transpose()));
}

Vec3 mrp_shadow(const Vec3& q) {
  const double n2 = q.squaredNorm();
  if (!(n2 > 0.0)) throw DomainError("shadow set undefined at q = 0");
  return -q / n2;
}

void SatelliteParams::validate() const {
  if (!inertia.allFinite()) throw ArgumentError("inertia is not finite");
  if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12 * inertia.cwiseAbs().maxCoeff()) {
    throw ArgumentError("inertia is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(inertia, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 1e-12 * eig.eigenvalues().maxCoeff()) ||
      !(eig.eigenvalues().maxCoeff() > 0.0)) {
    throw ArgumentError("inertia is not positive definite");
  }
  if (!std::isfinite(disturbance_gain) || disturbance_gain < 0.0) {
    throw ArgumentError("disturbance gain must be finite and non-negative");
  }
}

Vec3 eval_satellite_body_dynamics(const SatelliteParams& params, const Vec3& omega,
                                  const Vec3& tau) {
  const Vec3 h = params.inertia * omega;
  return params.inertia.ldlt().solve(tau - omega.cross(h));
}

LagrangianForm lagrangian_form(const SatelliteParams& params, const Vec3& q,
                               const Vec3& qdot) {
  require_inside_unit_ball(q);
  return detail::lagrangian_form_unchecked(params, q, qdot);
}

LagrangianForm detail::lagrangian_form_unchecked(const SatelliteParams& params, const Vec3& q,
                                                 const Vec3& qdot) {
  const Mat3 js = mrp_map(q);
  const Mat3 js_inv = js.inverse();
  const Mat3 js_dot = mrp_kinematics_jacobian_rate(q, qdot);
  const Vec3 omega = js_inv * qdot;
  LagrangianForm out;
  out.inertia = js_inv.transpose() * params.inertia * js_inv;
  out.inertia = 0.5 * (out.inertia + out.inertia.transpose());
  out.coriolis = -out.inertia * js_dot * js_inv -
                 js_inv.transpose() * skew(params.inertia * omega) * js_inv;
  return out;
}

double kinetic_energy(const SatelliteParams& params, const Vec3& q, const Vec3& qdot) {
  const Mat3 js_inv = mrp_kinematics_jacobian(q).inverse();
  const Vec3 omega = js_inv * qdot;
  return 0.5 * omega.dot(params.inertia * omega);
}

RwDisturbanceModel::RwDisturbanceModel(std::vector<double> harmonics,
                                       std::vector<double> amplitudes, double wheel_speed,
                                       WheelSpeedUnit unit, std::uint64_t seed,
                                       int channels)
    : harmonics_(std::move(harmonics)), amplitudes_(std::move(amplitudes)) {
  omega_rev_ = unit == WheelSpeedUnit::RevPerSecond ? wheel_speed
                                                    : wheel_speed / (2.0 * std::numbers::pi);
  if (channels < 1) throw ArgumentError("disturbance needs at least one channel");
  // Explicit bit-to-double mapping keeps phases identical across standard libraries.
  std::mt19937_64 gen(seed);
  phases_.assign(channels, std::vector<double>(harmonics_.size()));
  for (auto& row : phases_) {
    for (auto& alpha : row) {
      alpha = 2.0 * std::numbers::pi * static_cast<double>(gen() >> 11) * 0x1.0p-53;
    }
  }
  validate();
}

RwDisturbanceModel::RwDisturbanceModel(std::vector<double> harmonics,
                                       std::vector<double> amplitudes, double wheel_speed,
                                       WheelSpeedUnit unit,
                                       std::vector<std::vector<double>> phases)
    : harmonics_(std::move(harmonics)),
      amplitudes_(std::move(amplitudes)),
      phases_(std::move(phases)) {
  omega_rev_ = unit == WheelSpeedUnit::RevPerSecond ? wheel_speed
                                                    : wheel_speed / (2.0 * std::numbers::pi);
  if (phases_.empty()) throw ArgumentError("disturbance needs at least one channel");
  for (const auto& row : phases_) {
    if (row.size() != harmonics_.size()) throw ArgumentError("one phase per harmonic required");
  }
  validate();
}

RwDisturbanceModel RwDisturbanceModel::standard(double wheel_speed_rev_s,
                                                std::uint64_t seed, int channels) {
  return RwDisturbanceModel({1.0, 2.0, 5.8}, {1e-4, 5e-5, 2e-5}, wheel_speed_rev_s,
                            WheelSpeedUnit::RevPerSecond, seed, channels);
}

void RwDisturbanceModel::validate() const {
  if (harmonics_.size() != amplitudes_.size()) {
    throw ArgumentError("harmonic and amplitude tables differ in length");
  }
  for (double h : harmonics_) {
    if (!std::isfinite(h) || h < 1.0) throw ArgumentError("harmonic numbers must be >= 1");
  }
  for (double a : amplitudes_) {
    if (!std::isfinite(a) || a < 0.0) throw ArgumentError("harmonic amplitudes must be >= 0");
  }
  if (!std::isfinite(omega_rev_) || omega_rev_ < 0.0) {
    throw ArgumentError("wheel speed must be finite and non-negative");
  }
}

double RwDisturbanceModel::torque(double t, int channel) const {
  if (channel < 0 || channel >= channels()) throw ArgumentError("disturbance channel out of range");
  const auto& alpha = phases_[channel];
  const double w2 = omega_rev_ * omega_rev_;
  double sum = 0.0;
  for (std::size_t i = 0; i < harmonics_.size(); ++i) {
    sum += amplitudes_[i] * w2 *
           std::sin(2.0 * std::numbers::pi * harmonics_[i] * omega_rev_ * t + alpha[i]);
  }
  return sum;
}

std::vector<double> RwDisturbanceModel::torque_amplitudes() const {
  std::vector<double> out;
  for (double a : amplitudes_) out.push_back(a * omega_rev_ * omega_rev_);
  return out;
}

std::vector<double> RwDisturbanceModel::angular_frequencies() const {
  std::vector<double> out;
  for (double h : harmonics_) out.push_back(2.0 * std::numbers::pi * h * omega_rev_);
  return out;
}

}  // namespace frfvib
