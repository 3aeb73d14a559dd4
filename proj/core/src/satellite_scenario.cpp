#include "frfvib/satellite_scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "frfvib/errors.hpp"

namespace frfvib {
namespace {

Vec3 head3(const Vector& x) { return x.head<3>(); }
Vec3 tail3(const Vector& x) { return x.segment<3>(3); }

void require_gains3(const PdGains& g) { g.validate(3); }

}  // namespace

Vec3 SatelliteScenario::normalize_attitude(const Vec3& q) {
  return q.squaredNorm() >= 1.0 ? mrp_shadow(q) : q;
}

void SatelliteScenario::validate() const {
  params.validate();
  tracking.validate();
  if (!(q_desired.squaredNorm() < 1.0)) throw ArgumentError("desired attitude must satisfy |q| < 1");
  if (!(q_initial.squaredNorm() < 1.0)) throw ArgumentError("initial attitude must satisfy |q| < 1");
  if (!omega_initial.allFinite()) throw ArgumentError("initial rate must be finite");
}

Vector SatelliteScenario::initial_state() const {
  Vector x(6);
  x << q_initial, omega_initial;
  return x;
}

AttitudeReference SatelliteScenario::reference() const {
  AttitudeReference r;
  r.q = q_desired;
  return r;
}

VectorField satellite_closed_loop_field(const SatelliteScenario& scenario,
                                        const PdGains& vibration, TorqueProfile disturbance) {
  scenario.validate();
  require_gains3(vibration);
  const Mat3 tp = vibration.theta_p;
  const Mat3 td = vibration.theta_d;
  const AttitudeReference ref = scenario.reference();
  return [scenario, tp, td, ref, disturbance = std::move(disturbance)](
             double t, const Vector& x, Vector& dx) {
    const Vec3 q = head3(x);
    const Vec3 w = tail3(x);
    const Mat3 js = detail::mrp_map(q);
    const Vec3 qdot = js * w;
    const Vec3 tau_s = detail::energy_tracking_control_unchecked(scenario.params, q, qdot, ref, scenario.tracking);
    const Vec3 e = q - ref.q;
    const Vec3 edot = qdot - ref.qdot;
    const Vec3 u_s = -tp * e - td * edot;
    Vec3 tau = js.transpose() * (tau_s + u_s);
    if (disturbance) tau += scenario.params.disturbance_gain * disturbance(t);
    dx.head<3>() = qdot;
    dx.segment<3>(3) = eval_satellite_body_dynamics(scenario.params, w, tau);
  };
}

VectorField satellite_torque_free_field(const SatelliteParams& params) {
  params.validate();
  return [params](double, const Vector& x, Vector& dx) {
    const Vec3 q = head3(x);
    const Vec3 w = tail3(x);
    dx.head<3>() = detail::mrp_map(q) * w;
    dx.segment<3>(3) = eval_satellite_body_dynamics(params, w, Vec3::Zero());
  };
}

StateHook mrp_shadow_hook() {
  return [](Vector& x) {
    const Vec3 q = head3(x);
    if (q.squaredNorm() > 1.0) x.head<3>() = mrp_shadow(q);
  };
}

SatelliteOutputs satellite_outputs(const SatelliteScenario& scenario, const Vector& x) {
  SatelliteOutputs out;
  out.q = head3(x);
  out.qdot = mrp_kinematics_jacobian(out.q) * tail3(x);
  const auto ref = scenario.reference();
  out.error = tracking_error(out.q, out.qdot, ref.q, ref.qdot, scenario.tracking.lambda_r);
  return out;
}

ResidualSample tracking_residual(const SatelliteScenario& scenario, const Vector& x) {
  const auto field = satellite_closed_loop_field(scenario, PdGains::zero(3), {});
  Vector dx(6);
  field(0.0, x, dx);
  const Vec3 q = head3(x);
  const Vec3 w = tail3(x);
  const Vec3 qdot = mrp_kinematics_jacobian(q) * w;
  const Vec3 qddot = mrp_kinematics_jacobian_rate(q, qdot) * w +
                     mrp_kinematics_jacobian(q) * Vec3(dx.segment<3>(3));
  const auto ref = scenario.reference();
  const auto err = tracking_error(q, qdot, ref.q, ref.qdot, scenario.tracking.lambda_r);
  const Vec3 rdot = (qddot - ref.qddot) + scenario.tracking.lambda_r * err.edot;
  const auto lf = lagrangian_form(scenario.params, q, qdot);
  const Vec3 a = lf.inertia * rdot;
  const Vec3 b = (lf.coriolis + scenario.tracking.k_r + scenario.tracking.theta_r) * err.r;
  return {(a + b).norm(), std::max(a.norm(), b.norm())};
}

SatelliteFrfPlant::SatelliteFrfPlant(SatelliteScenario scenario, SatelliteProbeConfig probe)
    : scenario_(std::move(scenario)), probe_(probe) {
  scenario_.validate();
}

SweepProblem SatelliteFrfPlant::sweep_problem(const PdGains& gains, int axis) const {
  if (axis < 0 || axis > 2) throw ArgumentError("satellite axis out of range");
  require_gains3(gains);
  SweepProblem p;
  p.channels = {"e_" + std::to_string(axis + 1), "edot_" + std::to_string(axis + 1)};
  p.make_cell = [sc = scenario_, gains, axis](double a, double w) {
    CellSimulation cell;
    cell.field = satellite_closed_loop_field(sc, gains, [a, w, axis](double t) {
      Vec3 tau = Vec3::Zero();
      tau[axis] = a * std::sin(w * t);
      return tau;
    });
    const Vec3 qd = sc.q_desired;
    cell.output = [qd, axis](double, const Vector& x, Vector& y) {
      const Vec3 q = x.head<3>();
      const Vec3 qdot = detail::mrp_map(q) * Vec3(x.segment<3>(3));
      y[0] = q[axis] - qd[axis];
      y[1] = qdot[axis];
    };
    cell.hook = mrp_shadow_hook();
    cell.x0 = Vector::Zero(6);
    cell.x0.head<3>() = sc.q_desired;
    return cell;
  };
  return p;
}

PlantResponse SatelliteFrfPlant::measure(const PdGains& gains, const ExcitationGrid& grid,
                                         const IntegratorConfig& sim,
                                         const SweepOptions& sweep) const {
  PlantResponse out;
  for (int k = 0; k < 3; ++k) {
    auto res = frf_sweep(sweep_problem(gains, k), grid, sim, sweep);
    out.x1.push_back(std::move(res.matrices[0]));
    out.x2.push_back(std::move(res.matrices[1]));
    out.failures.insert(out.failures.end(), res.failures.begin(), res.failures.end());
    if (!res.failures.empty() && sweep.abort_on_failure) break;
  }
  return out;
}

ProbeOutcome SatelliteFrfPlant::probe_convergence(const PdGains& gains,
                                                  const ExcitationGrid& grid,
                                                  const IntegratorConfig& sim) const {
  ProbeOutcome out;
  if (!probe_.enabled) {
    out.detail = "probe disabled";
    return out;
  }
  grid.validate();
  out.amplitude = grid.amplitudes.back();
  out.omega = grid.frequencies.front();
  const double a = out.amplitude;
  const double w = out.omega;
  const auto field = satellite_closed_loop_field(scenario_, gains, [a, w](double t) {
    return Vec3::Constant(a * std::sin(w * t));
  });
  std::vector<Vector> ics;
  for (const Vec3& dir : {Vec3(1, 1, 1), Vec3(-1, -1, -1), Vec3(1, -1, 0)}) {
    Vector x0 = Vector::Zero(6);
    x0.head<3>() = scenario_.q_desired + probe_.offset * dir;
    ics.push_back(x0);
  }
  const double sample = std::min(2.0 * std::numbers::pi / w, probe_.horizon / 40.0);
  try {
    const auto rep = multi_ic_convergence(field, ics, sample, probe_.horizon, sim, mrp_shadow_hook());
    out.terminal_distance = rep.terminal_max_distance;
    out.convergent = rep.terminal_max_distance < probe_.tolerance;
  } catch (const std::exception& e) {
    out.convergent = false;
    out.terminal_distance = std::numeric_limits<double>::infinity();
    out.detail = e.what();
    return out;
  }
  std::ostringstream os;
  os << "terminal distance " << out.terminal_distance << " at a=" << a << ", omega=" << w;
  out.detail = os.str();
  return out;
}

SatelliteRun simulate_satellite(const SatelliteScenario& scenario, const PdGains& vibration,
                                const TorqueProfile& disturbance, double duration,
                                double rms_from, const IntegratorConfig& sim, int record_every) {
  sim.validate();
  if (!(duration > 0.0)) throw ArgumentError("duration must be positive");
  const auto field = satellite_closed_loop_field(scenario, vibration, disturbance);
  const auto hook = mrp_shadow_hook();
  const double h = sim.step_h;
  const auto steps = static_cast<long long>(std::ceil(duration / h - 1e-9));
  const Mat3 tp = vibration.theta_p;
  const Mat3 td = vibration.theta_d;

  SatelliteRun run;
  Vector x = scenario.initial_state();
  Rk4Stepper rk(6);
  auto record = [&](double t) {
    const auto o = satellite_outputs(scenario, x);
    Vector in(6);
    const Vec3 w = disturbance ? Vec3(scenario.params.disturbance_gain * disturbance(t)) : Vec3::Zero();
    const Vec3 u = -tp * o.error.e - td * o.error.edot;
    in << w, u;
    Vector st(6);
    st << o.q, o.qdot;
    run.trajectory.times.push_back(t);
    run.trajectory.states.push_back(st);
    run.trajectory.inputs.push_back(in);
  };
  if (record_every > 0) record(0.0);

  Vec3 sum_sq = Vec3::Zero();
  long long count = 0;
  for (long long i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * h;
    rk.step(field, t, h, x);
    hook(x);
    const double tn = static_cast<double>(i + 1) * h;
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > sim.divergence_bound) {
      std::ostringstream os;
      os << "satellite state diverged at t = " << tn << " s";
      throw DivergenceError(tn, os.str());
    }
    if (tn >= rms_from) {
      const Vec3 e = head3(x) - scenario.q_desired;
      sum_sq += e.cwiseProduct(e);
      ++count;
    }
    if (record_every > 0 && (i + 1) % record_every == 0) record(tn);
  }
  if (count > 0) {
    run.rms_error = (sum_sq / static_cast<double>(count)).cwiseSqrt();
    run.rms_error_norm = std::sqrt(sum_sq.sum() / static_cast<double>(count));
  }
  return run;
}

double RmsComparison::reduction() const {
  if (!(norm_uncontrolled > 0.0)) return 0.0;
  return 1.0 - norm_controlled / norm_uncontrolled;
}

TorqueProfile rw_torque_profile(const RwDisturbanceModel& rw) {
  return [rw](double t) {
    Vec3 tau;
    for (int k = 0; k < 3; ++k) tau[k] = rw.torque(t, k % rw.channels());
    return tau;
  };
}

RmsComparison compare_rms(const SatelliteScenario& scenario, const RwDisturbanceModel& rw,
                          const PdGains& tuned, const IntegratorConfig& sim,
                          const RmsComparisonConfig& config, SatelliteRun* uncontrolled,
                          SatelliteRun* controlled, int record_every) {
  double slowest = 0.0;
  for (double w : rw.angular_frequencies()) {
    if (w > 0.0) slowest = std::max(slowest, 2.0 * std::numbers::pi / w);
  }
  if (slowest == 0.0) slowest = 10.0;
  const double settle = config.settle_time > 0.0 ? config.settle_time : 10.0 * slowest;
  const double window = config.window > 0.0 ? config.window : 4.0 * slowest;
  const auto profile = rw_torque_profile(rw);

  auto off = simulate_satellite(scenario, PdGains::zero(3), profile, settle + window, settle, sim,
                                record_every);
  auto on = simulate_satellite(scenario, tuned, profile, settle + window, settle, sim, record_every);
  RmsComparison cmp;
  cmp.rms_uncontrolled = off.rms_error;
  cmp.rms_controlled = on.rms_error;
  cmp.norm_uncontrolled = off.rms_error_norm;
  cmp.norm_controlled = on.rms_error_norm;
  cmp.window_start = settle;
  cmp.window_end = settle + window;
  if (uncontrolled) *uncontrolled = std::move(off);
  if (controlled) *controlled = std::move(on);
  return cmp;
}

SatelliteVibrationResult satellite_vibration_scenario(
    const SatelliteScenario& scenario, const RwDisturbanceModel& rw,
    const AdaptationConfig& adaptation, const ExcitationGrid& grid, const IntegratorConfig& sim,
    const SweepOptions& sweep, const SatelliteProbeConfig& probe,
    const RmsComparisonConfig& comparison, const IterationCallback& on_iteration) {
  SatelliteFrfPlant plant(scenario, probe);
  SatelliteVibrationResult out;
  out.history = tune(plant, grid, adaptation, sim, sweep, std::nullopt, on_iteration);
  if (out.history.status == TuningStatus::Converged) {
    out.comparison = compare_rms(scenario, rw, out.history.final_gains, sim, comparison);
  }
  return out;
}

}  // namespace frfvib
