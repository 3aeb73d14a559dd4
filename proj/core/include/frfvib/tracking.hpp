#pragma once

#include "frfvib/satellite.hpp"

namespace frfvib {

struct TrackingControllerConfig {
  Mat3 k_r = Mat3::Identity();
  Mat3 lambda_r = Mat3::Identity();
  Mat3 theta_r = Mat3::Zero();

  /// k_r symmetric positive definite, lambda_r positive diagonal, theta_r symmetric >= 0.
  void validate() const;
};

struct AttitudeReference {
  Vec3 q = Vec3::Zero();
  Vec3 qdot = Vec3::Zero();
  Vec3 qddot = Vec3::Zero();
};

struct TrackingError {
  Vec3 e;
  Vec3 edot;
  Vec3 r;  // edot + lambda_r e
};

TrackingError tracking_error(const Vec3& q, const Vec3& qdot, const Vec3& q_d,
                             const Vec3& qdot_d, const Mat3& lambda_r);

/// Generalized torque in MRP coordinates
///
///   tau_s = H_s qr'' + C_s qr' - (K_r + Theta_r)(q' - qr')
///
/// with qr' = q_d' - Lambda_r e and qr'' = q_d'' - Lambda_r e'. The body torque is J_s^T tau_s.
Vec3 energy_tracking_control(const SatelliteParams& params, const Vec3& q, const Vec3& qdot,
                             const AttitudeReference& ref,
                             const TrackingControllerConfig& config);

namespace detail {
Vec3 energy_tracking_control_unchecked(const SatelliteParams& params, const Vec3& q,
                                       const Vec3& qdot, const AttitudeReference& ref,
                                       const TrackingControllerConfig& config);
}  // namespace detail

}  // namespace frfvib
