#pragma once

#include <functional>
#include <optional>

#include "frfvib/tracking.hpp"
#include "frfvib/tuner.hpp"

namespace frfvib {

/// Tracking-controlled satellite holding a fixed attitude. State x = (q, omega):
/// MRP attitude and body rate.
struct SatelliteScenario {
  SatelliteParams params;
  TrackingControllerConfig tracking;
  Vec3 q_desired = Vec3::Zero();
  Vec3 q_initial = Vec3::Zero();
  Vec3 omega_initial = Vec3::Zero();

  /// Maps an attitude with |q| >= 1 to its shadow set.
  static Vec3 normalize_attitude(const Vec3& q);

  void validate() const;
  Vector initial_state() const;
  AttitudeReference reference() const;
};

/// External body-frame torque before the disturbance gain is applied.
using TorqueProfile = std::function<Vec3(double t)>;

/// Closed loop with the energy-based tracking controller, the vibration PD term
/// u_s = -theta_p e - theta_d e' (MRP coordinates) and the disturbance.
VectorField satellite_closed_loop_field(const SatelliteScenario& scenario, const PdGains& vibration,
                                        TorqueProfile disturbance);

/// Free rigid body, state (q, omega).
VectorField satellite_torque_free_field(const SatelliteParams& params);

/// Switches q to its shadow set whenever |q| > 1.
StateHook mrp_shadow_hook();

struct SatelliteOutputs {
  Vec3 q;
  Vec3 qdot;
  TrackingError error;
};

SatelliteOutputs satellite_outputs(const SatelliteScenario& scenario, const Vector& x);

/// Residual of H_s r' + (C_s + K_r + Theta_r) r = 0 at state x for the tracking
/// loop alone, and the magnitude of its larger term.
struct ResidualSample {
  double residual = 0.0;
  double scale = 0.0;
};
ResidualSample tracking_residual(const SatelliteScenario& scenario, const Vector& x);

struct SatelliteProbeConfig {
  bool enabled = true;
  double offset = 0.05;
  double horizon = 400.0;
  double tolerance = 1e-3;
};

/// Axis k is excited by a sin(omega t) on body axis k and observes e_k (x1) and e_k' (x2).
class SatelliteFrfPlant : public FrfPlant {
 public:
  SatelliteFrfPlant(SatelliteScenario scenario, SatelliteProbeConfig probe = {});

  int axes() const override { return 3; }
  PlantResponse measure(const PdGains& gains, const ExcitationGrid& grid,
                        const IntegratorConfig& sim, const SweepOptions& sweep) const override;
  ProbeOutcome probe_convergence(const PdGains& gains, const ExcitationGrid& grid,
                                 const IntegratorConfig& sim) const override;

  SweepProblem sweep_problem(const PdGains& gains, int axis) const;
  const SatelliteScenario& scenario() const noexcept { return scenario_; }

 private:
  SatelliteScenario scenario_;
  SatelliteProbeConfig probe_;
};

struct SatelliteRun {
  Trajectory trajectory;  // states every `record_every` steps; inputs = (w_1..3, u_1..3)
  Vec3 rms_error = Vec3::Zero();
  double rms_error_norm = 0.0;
};

/// Fixed-step run over [0, duration]; RMS of e is taken over t >= rms_from.
SatelliteRun simulate_satellite(const SatelliteScenario& scenario, const PdGains& vibration,
                                const TorqueProfile& disturbance, double duration,
                                double rms_from, const IntegratorConfig& sim,
                                int record_every = 0);

struct RmsComparisonConfig {
  double settle_time = 0.0;  // 0: ten periods of the slowest harmonic
  double window = 0.0;       // 0: four periods of the slowest harmonic
};

struct RmsComparison {
  Vec3 rms_uncontrolled = Vec3::Zero();
  Vec3 rms_controlled = Vec3::Zero();
  double norm_uncontrolled = 0.0;
  double norm_controlled = 0.0;
  double window_start = 0.0;
  double window_end = 0.0;

  /// 1 - controlled / uncontrolled (0 when there is nothing to reduce).
  double reduction() const;
};

TorqueProfile rw_torque_profile(const RwDisturbanceModel& rw);

/// Steady-state error RMS under the RW disturbance with the tuned vibration
/// gains versus none; the tracking controller is active in both runs.
RmsComparison compare_rms(const SatelliteScenario& scenario, const RwDisturbanceModel& rw,
                          const PdGains& tuned, const IntegratorConfig& sim,
                          const RmsComparisonConfig& config,
                          SatelliteRun* uncontrolled = nullptr, SatelliteRun* controlled = nullptr,
                          int record_every = 0);

struct SatelliteVibrationResult {
  TuningHistory history;
  std::optional<RmsComparison> comparison;  // only when tuning converged
};

SatelliteVibrationResult satellite_vibration_scenario(
    const SatelliteScenario& scenario, const RwDisturbanceModel& rw,
    const AdaptationConfig& adaptation, const ExcitationGrid& grid, const IntegratorConfig& sim,
    const SweepOptions& sweep, const SatelliteProbeConfig& probe = {},
    const RmsComparisonConfig& comparison = {}, const IterationCallback& on_iteration = {});

}  // namespace frfvib
