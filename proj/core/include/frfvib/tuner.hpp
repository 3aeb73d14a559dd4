#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "frfvib/frf.hpp"
#include "frfvib/gains.hpp"

namespace frfvib {

/// Per-axis parameters of the FRF-driven gain adaptation. The x1 channel is the
/// position-like output driving theta_p, x2 the velocity-like output driving theta_d.
struct AdaptationConfig {
  Vector gamma_p;
  Vector gamma_d;
  Vector delta_x1;
  Vector delta_x2;
  Vector theta_min_p;
  Vector theta_min_d;
  int max_iterations = 50;
  double eps_tol = 1e-2;
  bool overshoot_guard = true;

  /// Same values on every axis.
  static AdaptationConfig uniform(int axes, double gamma_p, double gamma_d, double delta_x1,
                                  double delta_x2, double theta_min);

  int axes() const noexcept { return static_cast<int>(gamma_p.size()); }
  void validate() const;
};

/// One raw update theta += scale * gamma * F * (F - delta) per axis and channel,
/// followed by the floor projection. Off-diagonal entries are left untouched.
PdGains adaptation_step(const PdGains& gains, const Vector& fnorm_x1, const Vector& fnorm_x2,
                        const AdaptationConfig& config,
                        const Vector* scale_p = nullptr, const Vector* scale_d = nullptr);

/// Single-axis convenience overload.
PdGains adaptation_step(const PdGains& gains, double fnorm_x1, double fnorm_x2,
                        const AdaptationConfig& config);

/// Damps the raw law when it overshoots. On a sign change of a channel's
/// error the channel's step scale halves and the next step starts from the
/// midpoint of the last two iterates; otherwise the scale doubles back, up to 1.
class OvershootGuard {
 public:
  explicit OvershootGuard(int axes);

  /// Returns the gains the next step starts from and updates the scales.
  PdGains update(const PdGains& current, const Vector& eps_x1, const Vector& eps_x2);

  const Vector& scale_p() const noexcept { return scale_p_; }
  const Vector& scale_d() const noexcept { return scale_d_; }

 private:
  Vector scale_p_;
  Vector scale_d_;
  std::optional<Vector> prev_eps_x1_, prev_eps_x2_;
  std::optional<PdGains> prev_gains_;
};

/// A channel is satisfied when |eps| <= tol, or when eps < 0 and the gain sits
/// on its floor (the target is met and the projection forbids going lower).
bool channel_satisfied(double eps, double gain, double floor, double tol);

struct IterationRecord {
  int iteration = 0;
  Vector theta_p;
  Vector theta_d;
  Vector fnorm_x1;
  Vector fnorm_x2;
  Vector eps_x1;
  Vector eps_x2;
  Vector scale_p;
  Vector scale_d;
  double wall_seconds = 0.0;
};

enum class TuningStatus { Converged, MaxIterations, SweepFailure, NotConvergent };

std::string to_string(TuningStatus s);

struct ProbeOutcome {
  bool convergent = true;
  double terminal_distance = 0.0;
  double amplitude = 0.0;
  double omega = 0.0;
  std::string detail;
};

struct TuningHistory {
  std::vector<IterationRecord> records;
  TuningStatus status = TuningStatus::MaxIterations;
  std::string message;
  PdGains final_gains;
  std::vector<CellFailure> failures;
  std::optional<ProbeOutcome> probe;
  /// FRFs measured at the final gains (per axis); empty after a sweep failure.
  std::vector<FrfMatrix> final_x1;
  std::vector<FrfMatrix> final_x2;
};

struct PlantResponse {
  std::vector<FrfMatrix> x1;  // per axis
  std::vector<FrfMatrix> x2;  // per axis
  std::vector<CellFailure> failures;
};

/// Anything whose closed-loop FRFs can be measured for given vibration gains.
class FrfPlant {
 public:
  virtual ~FrfPlant() = default;
  virtual int axes() const = 0;
  virtual PlantResponse measure(const PdGains& gains, const ExcitationGrid& grid,
                                const IntegratorConfig& sim,
                                const SweepOptions& sweep) const = 0;
  /// Multi-initial-condition check at the worst observable grid cell.
  virtual ProbeOutcome probe_convergence(const PdGains& gains, const ExcitationGrid& grid,
                                         const IntegratorConfig& sim) const = 0;
};

struct ProbeConfig {
  bool enabled = true;
  std::vector<double> initial_positions{-3.0, 3.0, 5.0};
  double horizon = 60.0;
  double tolerance = 1e-3;
};

/// PD-controlled MdofSystem under w = a sin(omega t) through the input influence.
/// Axis i observes q_i (x1) and q_i' (x2).
class MdofFrfPlant : public FrfPlant {
 public:
  explicit MdofFrfPlant(MdofSystem system, ProbeConfig probe = {});

  int axes() const override { return system_.dof(); }
  PlantResponse measure(const PdGains& gains, const ExcitationGrid& grid,
                        const IntegratorConfig& sim, const SweepOptions& sweep) const override;
  ProbeOutcome probe_convergence(const PdGains& gains, const ExcitationGrid& grid,
                                 const IntegratorConfig& sim) const override;

  const MdofSystem& system() const noexcept { return system_; }

  /// Sweep definition with channels x1[_i], x2[_i].
  SweepProblem sweep_problem(const PdGains& gains) const;

  /// Lowest undamped natural frequency sqrt(eig(M^-1 K)).
  double natural_frequency() const;

 private:
  MdofSystem system_;
  ProbeConfig probe_;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Sweep, evaluate, adapt until every channel is satisfied or max_iterations
/// sweeps were spent. Starts from the floor unless `initial` is given. Every
/// visited gain is probed for convergence before it is swept.
TuningHistory tune(const FrfPlant& plant, const ExcitationGrid& grid,
                   const AdaptationConfig& config, const IntegratorConfig& sim,
                   const SweepOptions& sweep, std::optional<PdGains> initial = std::nullopt,
                   const IterationCallback& on_iteration = {});

}  // namespace frfvib
