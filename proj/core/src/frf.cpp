#include "frfvib/frf.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "frfvib/errors.hpp"

namespace frfvib {
namespace {

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ArgumentError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ArgumentError("not a number: '" + s + "'");
  return v;
}

std::vector<double> parse_range(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(':', start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  if (parts.size() != 3) throw ArgumentError("range must look like lo:hi:step, got '" + s + "'");
  return inclusive_range(parse_number(parts[0]), parse_number(parts[1]), parse_number(parts[2]));
}

}  // namespace

std::vector<double> inclusive_range(double lo, double hi, double step) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(step)) {
    throw ArgumentError("range bounds must be finite");
  }
  if (hi < lo) throw ArgumentError("range upper bound below lower bound");
  if (hi == lo) return {lo};
  if (!(step > 0.0)) throw ArgumentError("range step must be positive");
  const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
  if (n > 100000) throw ArgumentError("range has too many points");
  std::vector<double> out;
  for (long long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  if (std::abs(out.back() - hi) <= 1e-9 * step) out.back() = hi;
  return out;
}

ExcitationGrid ExcitationGrid::from_ranges(double a_lo, double a_hi, double a_step,
                                           double w_lo, double w_hi, double w_step) {
  ExcitationGrid g{inclusive_range(a_lo, a_hi, a_step), inclusive_range(w_lo, w_hi, w_step)};
  g.validate();
  return g;
}

ExcitationGrid ExcitationGrid::parse(const std::string& spec) {
  const auto comma = spec.find(',');
  if (comma == std::string::npos || spec.find(',', comma + 1) != std::string::npos) {
    throw ArgumentError("grid must look like a0:a1:da,w0:w1:dw");
  }
  ExcitationGrid g{parse_range(spec.substr(0, comma)), parse_range(spec.substr(comma + 1))};
  g.validate();
  return g;
}

void ExcitationGrid::validate() const {
  if (amplitudes.empty() || frequencies.empty()) throw ArgumentError("grid axes must be non-empty");
  for (const auto* axis : {&amplitudes, &frequencies}) {
    for (std::size_t i = 0; i < axis->size(); ++i) {
      const double v = (*axis)[i];
      if (!std::isfinite(v) || !(v > 0.0)) throw ArgumentError("grid entries must be positive");
      if (i > 0 && !(v > (*axis)[i - 1])) throw ArgumentError("grid entries must be ascending");
    }
  }
}

double amplification_gain(double peak, double amplitude) {
  if (!(amplitude > 0.0)) throw ArgumentError("amplitude must be positive");
  if (!(peak >= 0.0)) throw ArgumentError("peak must be non-negative");
  return peak / amplitude;
}

double frobenius_norm(const Matrix& m, FailurePolicy policy) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (std::isnan(v)) {
        if (policy == FailurePolicy::Abort) {
          throw DomainError("FRF matrix contains failed cells");
        }
        continue;
      }
      sum += v * v;
    }
  }
  return std::sqrt(sum);
}

double frobenius_norm(const FrfMatrix& frf, FailurePolicy policy) {
  return frobenius_norm(frf.gains, policy);
}

int resolve_jobs(int jobs) {
  if (jobs > 0) return jobs;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(int count, int jobs, const std::function<void(int)>& task) {
  const int workers = std::min(resolve_jobs(jobs), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

SweepResult frf_sweep(const SweepProblem& problem, const ExcitationGrid& grid,
                      const IntegratorConfig& config, const SweepOptions& options) {
  grid.validate();
  config.validate();
  if (problem.channels.empty()) throw ArgumentError("sweep needs at least one channel");
  if (!problem.make_cell) throw ArgumentError("sweep problem has no cell factory");

  const int rows = grid.rows();
  const int cols = grid.cols();
  const int nch = static_cast<int>(problem.channels.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::vector<Matrix> gains(nch, Matrix::Constant(rows, cols, nan));
  std::vector<std::vector<CellFailure>> cell_failure(rows * cols);
  std::atomic<bool> stop{false};

  // Returns the final state, or an empty vector if the cell failed.
  auto run_cell = [&](int i, int j, const Vector* warm) -> Vector {
    const double a = grid.amplitudes[i];
    const double w = grid.frequencies[j];
    CellSimulation cell = problem.make_cell(a, w);
    const Vector& x0 = warm ? *warm : cell.x0;
    try {
      const auto rep = detect_steady_state(cell.field, x0, 2.0 * std::numbers::pi / w,
                                           cell.output, nch, config, cell.hook);
      if (!rep.converged) {
        std::ostringstream os;
        os << "no steady state after " << rep.periods_used << " periods";
        cell_failure[i * cols + j].push_back({i, j, false, os.str()});
        return {};
      }
      for (int c = 0; c < nch; ++c) gains[c](i, j) = amplification_gain(rep.peak_per_channel[c], a);
      return rep.final_state;
    } catch (const DivergenceError& e) {
      cell_failure[i * cols + j].push_back({i, j, true, e.what()});
      return {};
    }
  };

  if (options.warm_start) {
    parallel_for(rows, options.jobs, [&](int i) {
      Vector warm;
      for (int j = 0; j < cols; ++j) {
        if (options.abort_on_failure && stop.load()) return;
        Vector fin = run_cell(i, j, warm.size() ? &warm : nullptr);
        if (fin.size() == 0) {
          if (options.abort_on_failure) stop.store(true);
          warm.resize(0);
        } else {
          warm = std::move(fin);
        }
      }
    });
  } else {
    parallel_for(rows * cols, options.jobs, [&](int idx) {
      if (options.abort_on_failure && stop.load()) return;
      if (run_cell(idx / cols, idx % cols, nullptr).size() == 0 && options.abort_on_failure) {
        stop.store(true);
      }
    });
  }

  SweepResult result;
  for (const auto& f : cell_failure) {
    result.failures.insert(result.failures.end(), f.begin(), f.end());
  }
  result.aborted = stop.load();
  for (int c = 0; c < nch; ++c) {
    FrfMatrix m;
    m.channel = problem.channels[c];
    m.amplitudes = grid.amplitudes;
    m.frequencies = grid.frequencies;
    m.gains = std::move(gains[c]);
    m.failures = result.failures;
    result.matrices.push_back(std::move(m));
  }
  return result;
}

}  // namespace frfvib
