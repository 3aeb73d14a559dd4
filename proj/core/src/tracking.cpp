#include "frfvib/tracking.hpp"

#include "frfvib/errors.hpp"

namespace frfvib {

void TrackingControllerConfig::validate() const {
  if (!k_r.allFinite() || !lambda_r.allFinite() || !theta_r.allFinite()) {
    throw ArgumentError("tracking gains must be finite");
  }
  if ((k_r - k_r.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + k_r.cwiseAbs().maxCoeff())) {
    throw ArgumentError("K_r must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> ek(k_r, Eigen::EigenvaluesOnly);
  if (!(ek.eigenvalues().minCoeff() > 0.0)) throw ArgumentError("K_r must be positive definite");
  const Mat3 off = lambda_r - Mat3(lambda_r.diagonal().asDiagonal());
  if (off.cwiseAbs().maxCoeff() > 0.0 || !(lambda_r.diagonal().minCoeff() > 0.0)) {
    throw ArgumentError("Lambda_r must be positive diagonal");
  }
  if ((theta_r - theta_r.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * (1.0 + theta_r.cwiseAbs().maxCoeff())) {
    throw ArgumentError("Theta_r must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> et(theta_r, Eigen::EigenvaluesOnly);
  if (et.eigenvalues().minCoeff() < -1e-12) throw ArgumentError("Theta_r must be positive semidefinite");
}

TrackingError tracking_error(const Vec3& q, const Vec3& qdot, const Vec3& q_d,
                             const Vec3& qdot_d, const Mat3& lambda_r) {
  TrackingError out;
  out.e = q - q_d;
  out.edot = qdot - qdot_d;
  out.r = out.edot + lambda_r * out.e;
  return out;
}

Vec3 energy_tracking_control(const SatelliteParams& params, const Vec3& q, const Vec3& qdot,
                             const AttitudeReference& ref,
                             const TrackingControllerConfig& config) {
  mrp_kinematics_jacobian(q);
  return detail::energy_tracking_control_unchecked(params, q, qdot, ref, config);
}

Vec3 detail::energy_tracking_control_unchecked(const SatelliteParams& params, const Vec3& q,
                                               const Vec3& qdot, const AttitudeReference& ref,
                                               const TrackingControllerConfig& config) {
  const auto err = tracking_error(q, qdot, ref.q, ref.qdot, config.lambda_r);
  const Vec3 qr_dot = ref.qdot - config.lambda_r * err.e;
  const Vec3 qr_ddot = ref.qddot - config.lambda_r * err.edot;
  const auto lf = lagrangian_form_unchecked(params, q, qdot);
  return lf.inertia * qr_ddot + lf.coriolis * qr_dot - (config.k_r + config.theta_r) * err.r;
}

}  // namespace frfvib
