#include "frfvib/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "frfvib/errors.hpp"

namespace frfvib {
namespace {

void check_state(const Vector& x, double t, double bound) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x[i];
    if (!std::isfinite(v) || std::abs(v) > bound) {
      std::ostringstream os;
      os << "state diverged at t = " << t << " s";
      throw DivergenceError(t, os.str());
    }
  }
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(step_h > 0.0) || !std::isfinite(step_h)) throw ArgumentError("step_h must be positive");
  if (max_periods < 1) throw ArgumentError("max_periods must be >= 1");
  if (!(ss_rel_tol > 0.0)) throw ArgumentError("ss_rel_tol must be positive");
  if (measure_periods < 1) throw ArgumentError("measure_periods must be >= 1");
  if (transient_periods < 0) throw ArgumentError("transient_periods must be >= 0");
  if (stable_periods < 1) throw ArgumentError("stable_periods must be >= 1");
  if (!(divergence_bound > 0.0)) throw ArgumentError("divergence_bound must be positive");
}

double effective_step(double step_h, double period) {
  if (!(period > 0.0) || !std::isfinite(period)) throw ArgumentError("period must be positive");
  if (!(step_h > 0.0)) throw ArgumentError("step must be positive");
  const double h = std::min(step_h, period / 20.0);
  const double n = std::ceil(period / h - 1e-9);
  return period / n;
}

Rk4Stepper::Rk4Stepper(int dim)
    : k1_(dim), k2_(dim), k3_(dim), k4_(dim), tmp_(dim) {}

void Rk4Stepper::step(const VectorField& f, double t, double h, Vector& x) {
  const double half = 0.5 * h;
  f(t, x, k1_);
  tmp_.noalias() = x + half * k1_;
  f(t + half, tmp_, k2_);
  tmp_.noalias() = x + half * k2_;
  f(t + half, tmp_, k3_);
  tmp_.noalias() = x + h * k3_;
  f(t + h, tmp_, k4_);
  x.noalias() += (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
}

Trajectory integrate(const VectorField& f, const Vector& x0, double t0, double t1,
                     const IntegratorConfig& config, const StateHook& hook,
                     const InputProbe& inputs) {
  config.validate();
  if (!(t1 > t0)) throw ArgumentError("time span must be increasing");
  const double h = config.step_h;
  const auto n = static_cast<long long>(std::ceil((t1 - t0) / h - 1e-9));

  Trajectory traj;
  traj.times.reserve(n + 1);
  traj.states.reserve(n + 1);
  Vector x = x0;
  check_state(x, t0, config.divergence_bound);
  Rk4Stepper rk(static_cast<int>(x.size()));
  traj.times.push_back(t0);
  traj.states.push_back(x);
  if (inputs) traj.inputs.push_back(inputs(t0, x));
  for (long long i = 0; i < n; ++i) {
    const double t = t0 + static_cast<double>(i) * h;
    rk.step(f, t, h, x);
    if (hook) hook(x);
    const double tn = t0 + static_cast<double>(i + 1) * h;
    check_state(x, tn, config.divergence_bound);
    traj.times.push_back(tn);
    traj.states.push_back(x);
    if (inputs) traj.inputs.push_back(inputs(tn, x));
  }
  return traj;
}

SteadyStateReport detect_steady_state(const VectorField& f, const Vector& x0, double period,
                                      const OutputMap& output, int channels,
                                      const IntegratorConfig& config, const StateHook& hook) {
  config.validate();
  if (channels < 1) throw ArgumentError("at least one output channel required");
  constexpr double kFloor = 1e-12;

  SteadyStateReport report;
  report.step = effective_step(config.step_h, period);
  const auto steps = static_cast<long long>(std::llround(period / report.step));

  Vector x = x0;
  check_state(x, 0.0, config.divergence_bound);
  Rk4Stepper rk(static_cast<int>(x.size()));
  Vector y(channels);
  Vector peak(channels);
  Vector prev_peak = Vector::Constant(channels, -1.0);
  long long global_step = 0;

  auto run_period = [&]() {
    peak.setZero();
    for (long long i = 0; i < steps; ++i) {
      const double t = static_cast<double>(global_step) * report.step;
      rk.step(f, t, report.step, x);
      if (hook) hook(x);
      ++global_step;
      const double tn = static_cast<double>(global_step) * report.step;
      check_state(x, tn, config.divergence_bound);
      output(tn, x, y);
      peak = peak.cwiseMax(y.cwiseAbs());
    }
  };

  int stable = 0;
  int k = 0;
  while (k < config.max_periods) {
    run_period();
    ++k;
    if (k > config.transient_periods && prev_peak.minCoeff() >= 0.0) {
      double change = 0.0;
      for (int c = 0; c < channels; ++c) {
        change = std::max(change, std::abs(peak[c] - prev_peak[c]) / std::max(peak[c], kFloor));
      }
      stable = change < config.ss_rel_tol ? stable + 1 : 0;
    }
    prev_peak = peak;
    if (stable >= config.stable_periods) break;
  }

  if (stable < config.stable_periods) {
    report.converged = false;
    report.periods_used = k;
    report.peak_per_channel = peak;
    report.window_start = (k - 1) * period;
    report.window_end = k * period;
    report.final_state = x;
    return report;
  }

  Vector sup = Vector::Zero(channels);
  for (int m = 0; m < config.measure_periods; ++m) {
    run_period();
    sup = sup.cwiseMax(peak);
  }
  report.converged = true;
  report.periods_used = k + config.measure_periods;
  report.peak_per_channel = sup;
  report.window_start = k * period;
  report.window_end = report.periods_used * period;
  report.final_state = x;
  return report;
}

ConvergenceReport multi_ic_convergence(const VectorField& f,
                                       const std::vector<Vector>& initial_states,
                                       double sample_period, double horizon,
                                       const IntegratorConfig& config, const StateHook& hook) {
  config.validate();
  if (initial_states.size() < 2) throw ArgumentError("need at least two initial states");
  if (!(horizon > 0.0)) throw ArgumentError("horizon must be positive");
  const double h = effective_step(config.step_h, sample_period);
  const auto per_sample = static_cast<long long>(std::llround(sample_period / h));
  // Never sample past the horizon.
  const auto samples = static_cast<long long>(std::floor(horizon / sample_period + 1e-9));
  if (samples < 1) throw ArgumentError("horizon is shorter than one sample period");

  std::vector<Vector> xs = initial_states;
  const auto dim = xs.front().size();
  for (const auto& x : xs) {
    if (x.size() != dim) throw ArgumentError("initial states differ in dimension");
  }
  Rk4Stepper rk(static_cast<int>(dim));

  ConvergenceReport rep;
  for (int i = 0; i < static_cast<int>(xs.size()); ++i) {
    for (int j = i + 1; j < static_cast<int>(xs.size()); ++j) rep.pairs.emplace_back(i, j);
  }

  auto record = [&](double t) {
    std::vector<double> d;
    double worst = 0.0;
    for (auto [i, j] : rep.pairs) {
      const double dij = (xs[i] - xs[j]).cwiseAbs().maxCoeff();
      d.push_back(dij);
      worst = std::max(worst, dij);
    }
    rep.times.push_back(t);
    rep.pair_distances.push_back(std::move(d));
    rep.max_distance.push_back(worst);
  };

  record(0.0);
  long long global_step = 0;
  for (long long s = 0; s < samples; ++s) {
    for (long long i = 0; i < per_sample; ++i) {
      const double t = static_cast<double>(global_step) * h;
      for (auto& x : xs) {
        rk.step(f, t, h, x);
        if (hook) hook(x);
        check_state(x, t + h, config.divergence_bound);
      }
      ++global_step;
    }
    record(static_cast<double>(global_step) * h);
  }
  rep.terminal_max_distance = rep.max_distance.back();

  // Least-squares slope of log(distance) against time, ignoring numerical noise.
  double st = 0, sy = 0, stt = 0, sty = 0;
  int n = 0;
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    if (rep.max_distance[i] < 1e-9) continue;
    const double t = rep.times[i];
    const double y = std::log(rep.max_distance[i]);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++n;
  }
  const double denom = n * stt - st * st;
  if (n >= 2 && denom > 0.0) {
    rep.decay_rate = -(n * sty - st * sy) / denom;
    rep.rate_valid = true;
  }
  return rep;
}

}  // namespace frfvib
