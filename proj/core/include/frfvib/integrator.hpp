#pragma once

#include <functional>
#include <vector>

#include "frfvib/model.hpp"

namespace frfvib {

/// dxdt = f(t, x). Implementations write into `dxdt`, which is pre-sized.
using VectorField = std::function<void(double t, const Vector& x, Vector& dxdt)>;

/// Output channels y = g(t, x) used for peak detection; `y` is pre-sized.
using OutputMap = std::function<void(double t, const Vector& x, Vector& y)>;

/// Applied to the state after every accepted step (e.g. MRP shadow switching).
using StateHook = std::function<void(Vector& x)>;

/// Recorded alongside the state in a Trajectory (w, u...).
using InputProbe = std::function<Vector(double t, const Vector& x)>;

struct IntegratorConfig {
  double step_h = 0.01;
  int max_periods = 500;
  double ss_rel_tol = 1e-3;
  int measure_periods = 3;
  int transient_periods = 10;  // discarded before the steady-state test starts
  int stable_periods = 3;      // consecutive periods below ss_rel_tol
  double divergence_bound = 1e100;

  void validate() const;
};

/// Step actually used for an excitation of period T: the largest h' <= min(step_h, T/20)
/// that divides T into a whole number of steps.
double effective_step(double step_h, double period);

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> inputs;  // empty unless an InputProbe was given
};

/// Classic fourth-order Runge-Kutta with reusable stage buffers.
class Rk4Stepper {
 public:
  explicit Rk4Stepper(int dim);
  void step(const VectorField& f, double t, double h, Vector& x);

 private:
  Vector k1_, k2_, k3_, k4_, tmp_;
};

/// Fixed-step integration over [t0, t1] with step config.step_h. Throws
/// DivergenceError when the state stops being finite or exceeds the bound.
Trajectory integrate(const VectorField& f, const Vector& x0, double t0, double t1,
                     const IntegratorConfig& config, const StateHook& hook = {},
                     const InputProbe& inputs = {});

struct SteadyStateReport {
  bool converged = false;
  int periods_used = 0;
  Vector peak_per_channel;
  double window_start = 0.0;
  double window_end = 0.0;
  double step = 0.0;
  Vector final_state;
};

/// Integrates period by period from t = 0 until per-period channel peaks settle,
/// then reports sup |y| over the following measurement window.
SteadyStateReport detect_steady_state(const VectorField& f, const Vector& x0, double period,
                                      const OutputMap& output, int channels,
                                      const IntegratorConfig& config,
                                      const StateHook& hook = {});

struct ConvergenceReport {
  std::vector<double> times;             // one sample per period
  std::vector<std::vector<double>> pair_distances;  // [sample][pair], sup-norm
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> max_distance;      // [sample]
  double terminal_max_distance = 0.0;
  double decay_rate = 0.0;  // fitted on log(max_distance); see rate_valid
  bool rate_valid = false;
};

/// Runs every initial state under the same vector field and tracks pairwise
/// distances once per `sample_period`, up to and including the horizon.
ConvergenceReport multi_ic_convergence(const VectorField& f,
                                       const std::vector<Vector>& initial_states,
                                       double sample_period, double horizon,
                                       const IntegratorConfig& config,
                                       const StateHook& hook = {});

}  // namespace frfvib
