#pragma once

#include <functional>
#include <string>
#include <vector>

#include "frfvib/integrator.hpp"

namespace frfvib {

struct ExcitationGrid {
  std::vector<double> amplitudes;   // rows
  std::vector<double> frequencies;  // columns, rad/s

  /// Inclusive ranges lo:hi:step; the end point is kept when it lies within
  /// 1e-9 of a step boundary.
  static ExcitationGrid from_ranges(double a_lo, double a_hi, double a_step, double w_lo,
                                    double w_hi, double w_step);

  /// Parses "a0:a1:da,w0:w1:dw".
  static ExcitationGrid parse(const std::string& spec);

  int rows() const noexcept { return static_cast<int>(amplitudes.size()); }
  int cols() const noexcept { return static_cast<int>(frequencies.size()); }

  /// Entries positive and strictly ascending, both axes non-empty.
  void validate() const;
};

std::vector<double> inclusive_range(double lo, double hi, double step);

struct CellFailure {
  int row = 0;
  int col = 0;
  bool diverged = false;  // false: steady state not reached within max_periods
  std::string reason;
};

struct FrfMatrix {
  std::string channel;
  std::vector<double> amplitudes;
  std::vector<double> frequencies;
  Matrix gains;  // rows x cols, NaN where the cell failed
  std::vector<CellFailure> failures;
};

/// peak / a. Throws ArgumentError for a <= 0 or peak < 0.
double amplification_gain(double peak, double amplitude);

enum class FailurePolicy { Abort, Exclude };

/// Frobenius norm. Failed (NaN) cells throw DomainError under Abort and are
/// skipped under Exclude.
double frobenius_norm(const Matrix& m, FailurePolicy policy = FailurePolicy::Abort);
double frobenius_norm(const FrfMatrix& frf, FailurePolicy policy = FailurePolicy::Abort);

/// Everything needed to simulate one grid cell.
struct CellSimulation {
  VectorField field;
  OutputMap output;
  StateHook hook;
  Vector x0;
};

struct SweepProblem {
  std::vector<std::string> channels;
  /// Builds the closed loop driven by amplitude * sin(omega t). Called
  /// concurrently from worker threads; must not mutate shared state.
  std::function<CellSimulation(double amplitude, double omega)> make_cell;
};

struct SweepOptions {
  int jobs = 0;               // 0: hardware concurrency
  bool warm_start = false;    // start each cell from the previous cell of its row
  bool abort_on_failure = true;
};

struct SweepResult {
  std::vector<FrfMatrix> matrices;  // one per channel, same order as the problem
  std::vector<CellFailure> failures;
  bool aborted = false;

  bool ok() const noexcept { return failures.empty(); }
};

/// Steady-state sweep of every (amplitude, frequency) cell. Results are
/// position-addressed and identical for any job count.
SweepResult frf_sweep(const SweepProblem& problem, const ExcitationGrid& grid,
                      const IntegratorConfig& config, const SweepOptions& options = {});

/// Runs `count` independent tasks on up to `jobs` threads; rethrows the first
/// exception after all workers stop.
void parallel_for(int count, int jobs, const std::function<void(int)>& task);

int resolve_jobs(int jobs);

}  // namespace frfvib
