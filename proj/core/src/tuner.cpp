#include "frfvib/tuner.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "frfvib/errors.hpp"

namespace frfvib {
namespace {

void require_axes(const Vector& v, int axes, const char* name) {
  if (v.size() != axes) {
    std::ostringstream os;
    os << name << " has " << v.size() << " entries, expected " << axes;
    throw ArgumentError(os.str());
  }
}

Vector fnorms(const std::vector<FrfMatrix>& m) {
  Vector out(static_cast<Eigen::Index>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i) out[static_cast<Eigen::Index>(i)] = frobenius_norm(m[i]);
  return out;
}

std::string channel_name(const char* base, int axis, int axes) {
  return axes == 1 ? std::string(base) : std::string(base) + "_" + std::to_string(axis + 1);
}

}  // namespace

AdaptationConfig AdaptationConfig::uniform(int axes, double gamma_p, double gamma_d,
                                           double delta_x1, double delta_x2,
                                           double theta_min) {
  AdaptationConfig c;
  c.gamma_p = Vector::Constant(axes, gamma_p);
  c.gamma_d = Vector::Constant(axes, gamma_d);
  c.delta_x1 = Vector::Constant(axes, delta_x1);
  c.delta_x2 = Vector::Constant(axes, delta_x2);
  c.theta_min_p = Vector::Constant(axes, theta_min);
  c.theta_min_d = Vector::Constant(axes, theta_min);
  return c;
}

void AdaptationConfig::validate() const {
  const int n = axes();
  if (n < 1) throw ArgumentError("adaptation needs at least one axis");
  require_axes(gamma_d, n, "gamma_d");
  require_axes(delta_x1, n, "delta_x1");
  require_axes(delta_x2, n, "delta_x2");
  require_axes(theta_min_p, n, "theta_min_p");
  require_axes(theta_min_d, n, "theta_min_d");
  auto positive = [](const Vector& v) { return v.allFinite() && v.minCoeff() > 0.0; };
  if (!positive(gamma_p) || !positive(gamma_d)) throw ArgumentError("step sizes must be positive");
  if (!positive(delta_x1) || !positive(delta_x2)) throw ArgumentError("targets must be positive");
  if (!positive(theta_min_p) || !positive(theta_min_d)) throw ArgumentError("gain floor must be positive");
  if (max_iterations < 1) throw ArgumentError("max_iterations must be >= 1");
  if (!(eps_tol > 0.0)) throw ArgumentError("eps_tol must be positive");
}

PdGains adaptation_step(const PdGains& gains, const Vector& fnorm_x1, const Vector& fnorm_x2,
                        const AdaptationConfig& config, const Vector* scale_p,
                        const Vector* scale_d) {
  config.validate();
  const int n = config.axes();
  gains.validate(n);
  require_axes(fnorm_x1, n, "fnorm_x1");
  require_axes(fnorm_x2, n, "fnorm_x2");
  if (fnorm_x1.minCoeff() < 0.0 || fnorm_x2.minCoeff() < 0.0) {
    throw ArgumentError("F-norms must be non-negative");
  }
  PdGains next = gains;
  for (int k = 0; k < n; ++k) {
    const double sp = scale_p ? (*scale_p)[k] : 1.0;
    const double sd = scale_d ? (*scale_d)[k] : 1.0;
    const double eps1 = fnorm_x1[k] - config.delta_x1[k];
    const double eps2 = fnorm_x2[k] - config.delta_x2[k];
    next.theta_p(k, k) = std::max(gains.theta_p(k, k) + sp * config.gamma_p[k] * fnorm_x1[k] * eps1,
                                  config.theta_min_p[k]);
    next.theta_d(k, k) = std::max(gains.theta_d(k, k) + sd * config.gamma_d[k] * fnorm_x2[k] * eps2,
                                  config.theta_min_d[k]);
  }
  return next;
}

PdGains adaptation_step(const PdGains& gains, double fnorm_x1, double fnorm_x2,
                        const AdaptationConfig& config) {
  return adaptation_step(gains, Vector::Constant(1, fnorm_x1), Vector::Constant(1, fnorm_x2),
                         config);
}

OvershootGuard::OvershootGuard(int axes)
    : scale_p_(Vector::Ones(axes)), scale_d_(Vector::Ones(axes)) {}

PdGains OvershootGuard::update(const PdGains& current, const Vector& eps_x1,
                               const Vector& eps_x2) {
  PdGains base = current;
  if (prev_gains_) {
    for (Eigen::Index k = 0; k < scale_p_.size(); ++k) {
      if (eps_x1[k] * (*prev_eps_x1_)[k] < 0.0) {
        scale_p_[k] *= 0.5;
        base.theta_p(k, k) = 0.5 * (current.theta_p(k, k) + prev_gains_->theta_p(k, k));
      } else {
        scale_p_[k] = std::min(1.0, 2.0 * scale_p_[k]);
      }
      if (eps_x2[k] * (*prev_eps_x2_)[k] < 0.0) {
        scale_d_[k] *= 0.5;
        base.theta_d(k, k) = 0.5 * (current.theta_d(k, k) + prev_gains_->theta_d(k, k));
      } else {
        scale_d_[k] = std::min(1.0, 2.0 * scale_d_[k]);
      }
    }
  }
  prev_eps_x1_ = eps_x1;
  prev_eps_x2_ = eps_x2;
  prev_gains_ = current;
  return base;
}

bool channel_satisfied(double eps, double gain, double floor, double tol) {
  return std::abs(eps) <= tol || (eps < 0.0 && gain <= floor * (1.0 + 1e-12));
}

std::string to_string(TuningStatus s) {
  switch (s) {
    case TuningStatus::Converged: return "converged";
    case TuningStatus::MaxIterations: return "max-iterations";
    case TuningStatus::SweepFailure: return "sweep-failure";
    case TuningStatus::NotConvergent: return "not-convergent";
  }
  return "unknown";
}

MdofFrfPlant::MdofFrfPlant(MdofSystem system, ProbeConfig probe)
    : system_(std::move(system)), probe_(std::move(probe)) {}

SweepProblem MdofFrfPlant::sweep_problem(const PdGains& gains) const {
  const int n = system_.dof();
  gains.validate(n);
  SweepProblem p;
  for (int i = 0; i < n; ++i) p.channels.push_back(channel_name("x1", i, n));
  for (int i = 0; i < n; ++i) p.channels.push_back(channel_name("x2", i, n));
  p.make_cell = [sys = system_, gains](double a, double w) {
    CellSimulation cell;
    cell.field = closed_loop_field(sys, gains, [a, w](double t) { return a * std::sin(w * t); });
    cell.output = [](double, const Vector& x, Vector& y) { y = x; };
    cell.x0 = Vector::Zero(sys.state_dim());
    return cell;
  };
  return p;
}

PlantResponse MdofFrfPlant::measure(const PdGains& gains, const ExcitationGrid& grid,
                                    const IntegratorConfig& sim,
                                    const SweepOptions& sweep) const {
  const int n = system_.dof();
  auto res = frf_sweep(sweep_problem(gains), grid, sim, sweep);
  PlantResponse out;
  for (int i = 0; i < n; ++i) {
    out.x1.push_back(std::move(res.matrices[i]));
    out.x2.push_back(std::move(res.matrices[n + i]));
  }
  out.failures = std::move(res.failures);
  return out;
}

double MdofFrfPlant::natural_frequency() const {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> eig(system_.stiffness(), system_.mass(),
                                                       Eigen::EigenvaluesOnly);
  return std::sqrt(eig.eigenvalues().minCoeff());
}

ProbeOutcome MdofFrfPlant::probe_convergence(const PdGains& gains, const ExcitationGrid& grid,
                                             const IntegratorConfig& sim) const {
  ProbeOutcome out;
  if (!probe_.enabled) {
    out.detail = "probe disabled";
    return out;
  }
  grid.validate();
  const double wn = natural_frequency();
  out.amplitude = grid.amplitudes.back();
  out.omega = grid.frequencies.front();
  for (double w : grid.frequencies) {
    if (std::abs(w - wn) < std::abs(out.omega - wn)) out.omega = w;
  }
  const int n = system_.dof();
  std::vector<Vector> ics;
  for (double p : probe_.initial_positions) {
    Vector x0 = Vector::Zero(2 * n);
    x0.head(n).setConstant(p);
    ics.push_back(x0);
  }
  const double a = out.amplitude;
  const double w = out.omega;
  auto field = closed_loop_field(system_, gains, [a, w](double t) { return a * std::sin(w * t); });
  try {
    const auto rep = multi_ic_convergence(field, ics, 2.0 * std::numbers::pi / w,
                                          probe_.horizon, sim);
    out.terminal_distance = rep.terminal_max_distance;
    out.convergent = rep.terminal_max_distance < probe_.tolerance;
  } catch (const DivergenceError& e) {
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

TuningHistory tune(const FrfPlant& plant, const ExcitationGrid& grid,
                   const AdaptationConfig& config, const IntegratorConfig& sim,
                   const SweepOptions& sweep, std::optional<PdGains> initial,
                   const IterationCallback& on_iteration) {
  config.validate();
  grid.validate();
  sim.validate();
  const int n = plant.axes();
  if (config.axes() != n) throw ArgumentError("adaptation axes do not match the plant");

  PdGains gains = initial ? *initial : PdGains::diagonal(config.theta_min_p, config.theta_min_d);
  gains.validate(n);
  for (int k = 0; k < n; ++k) {
    gains.theta_p(k, k) = std::max(gains.theta_p(k, k), config.theta_min_p[k]);
    gains.theta_d(k, k) = std::max(gains.theta_d(k, k), config.theta_min_d[k]);
  }

  TuningHistory hist;
  hist.final_gains = gains;
  hist.probe = plant.probe_convergence(gains, grid, sim);
  if (!hist.probe->convergent) {
    hist.status = TuningStatus::NotConvergent;
    hist.message = "closed loop failed the convergence probe: " + hist.probe->detail;
    return hist;
  }

  OvershootGuard guard(n);
  for (int it = 0; it < config.max_iterations; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    if (it > 0) {
      hist.probe = plant.probe_convergence(gains, grid, sim);
      if (!hist.probe->convergent) {
        hist.status = TuningStatus::NotConvergent;
        hist.message = "closed loop failed the convergence probe at iteration " + std::to_string(it) +
                       ": " + hist.probe->detail;
        return hist;
      }
    }
    PlantResponse resp = plant.measure(gains, grid, sim, sweep);
    if (!resp.failures.empty()) {
      hist.status = TuningStatus::SweepFailure;
      hist.failures = std::move(resp.failures);
      std::ostringstream os;
      os << hist.failures.size() << " grid cell(s) failed at iteration " << it;
      hist.message = os.str();
      return hist;
    }
    IterationRecord rec;
    rec.iteration = it;
    rec.theta_p = gains.p_diagonal();
    rec.theta_d = gains.d_diagonal();
    rec.fnorm_x1 = fnorms(resp.x1);
    rec.fnorm_x2 = fnorms(resp.x2);
    rec.eps_x1 = rec.fnorm_x1 - config.delta_x1;
    rec.eps_x2 = rec.fnorm_x2 - config.delta_x2;
    rec.scale_p = guard.scale_p();
    rec.scale_d = guard.scale_d();

    bool done = true;
    for (int k = 0; k < n; ++k) {
      done = done &&
             channel_satisfied(rec.eps_x1[k], rec.theta_p[k], config.theta_min_p[k], config.eps_tol) &&
             channel_satisfied(rec.eps_x2[k], rec.theta_d[k], config.theta_min_d[k], config.eps_tol);
    }
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    hist.records.push_back(rec);
    hist.final_gains = gains;
    hist.final_x1 = std::move(resp.x1);
    hist.final_x2 = std::move(resp.x2);
    if (on_iteration) on_iteration(rec);
    if (done) {
      hist.status = TuningStatus::Converged;
      std::ostringstream os;
      os << "converged after " << it << " update(s)";
      hist.message = os.str();
      return hist;
    }
    const PdGains base = config.overshoot_guard ? guard.update(gains, rec.eps_x1, rec.eps_x2) : gains;
    gains = config.overshoot_guard
                ? adaptation_step(base, rec.fnorm_x1, rec.fnorm_x2, config, &guard.scale_p(), &guard.scale_d())
                : adaptation_step(base, rec.fnorm_x1, rec.fnorm_x2, config);
  }
  hist.status = TuningStatus::MaxIterations;
  std::ostringstream os;
  os << "not converged after " << config.max_iterations << " sweep(s)";
  hist.message = os.str();
  return hist;
}

}  // namespace frfvib
