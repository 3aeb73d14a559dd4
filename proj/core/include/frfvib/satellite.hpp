#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace frfvib {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Cross-product matrix: skew(v) * u == v.cross(u).
Mat3 skew(const Vec3& v);

/// MRP kinematic map J_s with q' = J_s(q) omega. Throws DomainError for |q| >= 1.
Mat3 mrp_kinematics_jacobian(const Vec3& q);

/// Time derivative of J_s along q'.
Mat3 mrp_kinematics_jacobian_rate(const Vec3& q, const Vec3& qdot);

/// Shadow set -q / |q|^2 (same physical attitude). Throws DomainError at q = 0.
Vec3 mrp_shadow(const Vec3& q);

struct SatelliteParams {
  Mat3 inertia = Eigen::Vector3d(10.0, 15.0, 20.0).asDiagonal();
  /// Fraction of an external disturbance torque that reaches the hub.
  double disturbance_gain = 1.0;

  /// Throws ArgumentError unless the inertia is symmetric positive definite
  /// and the gain is finite and non-negative.
  void validate() const;
};

/// omega' = H^-1 (tau - omega x H omega).
Vec3 eval_satellite_body_dynamics(const SatelliteParams& params, const Vec3& omega,
                                  const Vec3& tau);

/// Attitude dynamics in MRP coordinates, H_s q'' + C_s q' = J_s^-T tau.
struct LagrangianForm {
  Mat3 inertia;   // H_s
  Mat3 coriolis;  // C_s
};

/// Coriolis matrix is the one for which H_s' - 2 C_s is skew-symmetric.
LagrangianForm lagrangian_form(const SatelliteParams& params, const Vec3& q,
                               const Vec3& qdot);

/// 1/2 q'^T H_s(q) q', equal to 1/2 omega^T H omega.
double kinetic_energy(const SatelliteParams& params, const Vec3& q, const Vec3& qdot);

namespace detail {
// Unchecked variants for vector fields: Runge-Kutta stages may land just
// outside the unit ball before the shadow switch gets a chance to run.
Mat3 mrp_map(const Vec3& q);
LagrangianForm lagrangian_form_unchecked(const SatelliteParams& params, const Vec3& q,
                                         const Vec3& qdot);
}  // namespace detail

enum class WheelSpeedUnit { RevPerSecond, RadPerSecond };

/// Reaction-wheel imbalance torque
///
///   w(t) = sum_i A_i Omega^2 sin(2 pi h_i Omega t + alpha_i)
///
/// with Omega in rev/s. Phases are drawn once from the seed, independently per
/// channel, so several axes can share one harmonic table.
class RwDisturbanceModel {
 public:
  RwDisturbanceModel(std::vector<double> harmonics, std::vector<double> amplitudes,
                     double wheel_speed, WheelSpeedUnit unit, std::uint64_t seed,
                     int channels = 1);

  /// Explicit phases: phases[channel][harmonic].
  RwDisturbanceModel(std::vector<double> harmonics, std::vector<double> amplitudes,
                     double wheel_speed, WheelSpeedUnit unit,
                     std::vector<std::vector<double>> phases);

  /// Library default table: h = (1, 2, 5.8), A = (1e-4, 5e-5, 2e-5).
  static RwDisturbanceModel standard(double wheel_speed_rev_s, std::uint64_t seed,
                                     int channels = 3);

  double torque(double t, int channel = 0) const;

  int channels() const noexcept { return static_cast<int>(phases_.size()); }
  double wheel_speed_rev_s() const noexcept { return omega_rev_; }
  const std::vector<double>& harmonics() const noexcept { return harmonics_; }
  const std::vector<double>& amplitudes() const noexcept { return amplitudes_; }
  const std::vector<std::vector<double>>& phases() const noexcept { return phases_; }

  /// Torque amplitude A_i Omega^2 of each harmonic.
  std::vector<double> torque_amplitudes() const;
  /// Angular frequency 2 pi h_i Omega (rad/s) of each harmonic.
  std::vector<double> angular_frequencies() const;

 private:
  void validate() const;

  std::vector<double> harmonics_;
  std::vector<double> amplitudes_;
  double omega_rev_;
  std::vector<std::vector<double>> phases_;
};

}  // namespace frfvib
