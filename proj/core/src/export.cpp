#include "frfvib/export.hpp"

#include <cmath>
#include <cstdio>

#include "frfvib/errors.hpp"
#include "json.hpp"

namespace frfvib {
namespace {

using nlohmann::json;

std::string suffixed(const std::string& base, int k, int n) {
  return n == 1 ? base : base + "_" + std::to_string(k + 1);
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(row);
  }
  return a;
}

Matrix gain_matrix(const json& j, int dim, const char* name) {
  if (j.is_number()) return Matrix::Identity(dim, dim) * j.get<double>();
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw ConfigError(std::string(name) + " must be a number, a list of " + std::to_string(dim) +
                      " numbers or a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
  }
  Matrix m = Matrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    if (j[i].is_number()) {
      m(i, i) = j[i].get<double>();
    } else if (j[i].is_array() && static_cast<int>(j[i].size()) == dim) {
      for (int k = 0; k < dim; ++k) {
        if (!j[i][k].is_number()) throw ConfigError(std::string(name) + " has a non-numeric entry");
        m(i, k) = j[i][k].get<double>();
      }
    } else {
      throw ConfigError(std::string(name) + " has a malformed row");
    }
  }
  return m;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_frf_csv(std::ostream& os, const FrfMatrix& frf) {
  os << "amplitude\\omega";
  for (double w : frf.frequencies) os << ',' << format_number(w);
  os << '\n';
  for (std::size_t i = 0; i < frf.amplitudes.size(); ++i) {
    os << format_number(frf.amplitudes[i]);
    for (Eigen::Index j = 0; j < frf.gains.cols(); ++j) {
      os << ',' << format_number(frf.gains(static_cast<Eigen::Index>(i), j));
    }
    os << '\n';
  }
}

void write_history_csv(std::ostream& os, const TuningHistory& history) {
  const int n = history.records.empty() ? history.final_gains.dim()
                                        : static_cast<int>(history.records.front().theta_p.size());
  const char* groups[] = {"theta_p", "theta_d", "fnorm_x1", "fnorm_x2", "eps_x1", "eps_x2", "scale_p", "scale_d"};
  os << "iteration";
  for (const char* g : groups) {
    for (int k = 0; k < n; ++k) os << ',' << suffixed(g, k, n);
  }
  os << '\n';
  for (const auto& r : history.records) {
    os << r.iteration;
    for (const Vector* v : {&r.theta_p, &r.theta_d, &r.fnorm_x1, &r.fnorm_x2, &r.eps_x1, &r.eps_x2,
                            &r.scale_p, &r.scale_d}) {
      for (int k = 0; k < n; ++k) os << ',' << format_number((*v)[k]);
    }
    os << '\n';
  }
}

std::string history_json(const TuningHistory& history) {
  json j;
  j["status"] = to_string(history.status);
  j["message"] = history.message;
  json recs = json::array();
  for (const auto& r : history.records) {
    recs.push_back({{"iteration", r.iteration},
                    {"theta_p", vec_json(r.theta_p)},
                    {"theta_d", vec_json(r.theta_d)},
                    {"fnorm_x1", vec_json(r.fnorm_x1)},
                    {"fnorm_x2", vec_json(r.fnorm_x2)},
                    {"eps_x1", vec_json(r.eps_x1)},
                    {"eps_x2", vec_json(r.eps_x2)},
                    {"scale_p", vec_json(r.scale_p)},
                    {"scale_d", vec_json(r.scale_d)},
                    {"wall_seconds", r.wall_seconds}});
  }
  j["iterations"] = recs;
  j["final_gains"] = {{"theta_p", mat_json(history.final_gains.theta_p)},
                      {"theta_d", mat_json(history.final_gains.theta_d)}};
  json fails = json::array();
  for (const auto& f : history.failures) {
    fails.push_back({{"row", f.row}, {"col", f.col}, {"diverged", f.diverged}, {"reason", f.reason}});
  }
  j["failed_cells"] = fails;
  if (history.probe) {
    j["probe"] = {{"convergent", history.probe->convergent},
                  {"terminal_distance", std::isfinite(history.probe->terminal_distance)
                                            ? json(history.probe->terminal_distance)
                                            : json(nullptr)},
                  {"amplitude", history.probe->amplitude},
                  {"omega", history.probe->omega},
                  {"detail", history.probe->detail}};
  }
  return j.dump(2) + "\n";
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<std::string>& state_columns,
                          const std::vector<std::string>& input_columns) {
  os << 't';
  for (const auto& c : state_columns) os << ',' << c;
  for (const auto& c : input_columns) os << ',' << c;
  os << '\n';
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    os << format_number(traj.times[i]);
    const Vector& x = traj.states[i];
    if (x.size() != static_cast<Eigen::Index>(state_columns.size())) {
      throw ArgumentError("state column count does not match the trajectory");
    }
    for (Eigen::Index k = 0; k < x.size(); ++k) os << ',' << format_number(x[k]);
    if (!input_columns.empty()) {
      const Vector& u = traj.inputs.at(i);
      if (u.size() != static_cast<Eigen::Index>(input_columns.size())) {
        throw ArgumentError("input column count does not match the trajectory");
      }
      for (Eigen::Index k = 0; k < u.size(); ++k) os << ',' << format_number(u[k]);
    }
    os << '\n';
  }
}

std::string gains_json(const PdGains& gains) {
  json j{{"theta_p", mat_json(gains.theta_p)}, {"theta_d", mat_json(gains.theta_d)}};
  return j.dump(2) + "\n";
}

PdGains parse_gains_json(const std::string& text, int dim) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("gains file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("gains file must hold an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "theta_p" && key != "theta_d") throw ConfigError("unknown key '" + key + "' in gains file");
  }
  if (!j.contains("theta_p") || !j.contains("theta_d")) {
    throw ConfigError("gains file needs theta_p and theta_d");
  }
  PdGains g{gain_matrix(j["theta_p"], dim, "theta_p"), gain_matrix(j["theta_d"], dim, "theta_d")};
  try {
    g.validate(dim);
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  return g;
}

std::string jacobian_report_json(const JacobianReport& report) {
  json j{{"lambda_max_sym", report.lambda_max_sym},
         {"verdict", to_string(report.verdict)},
         {"samples", report.samples},
         {"worst_state", vec_json(report.worst_state)}};
  return j.dump(2) + "\n";
}

std::string convergence_report_json(const ConvergenceReport& report) {
  json pairs = json::array();
  for (auto [i, j] : report.pairs) pairs.push_back({i, j});
  json j{{"terminal_max_distance", report.terminal_max_distance},
         {"decay_rate", report.rate_valid ? json(report.decay_rate) : json(nullptr)},
         {"pairs", pairs},
         {"times", report.times},
         {"max_distance", report.max_distance}};
  return j.dump(2) + "\n";
}

}  // namespace frfvib
