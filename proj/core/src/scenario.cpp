#include "frfvib/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "frfvib/errors.hpp"
#include "json.hpp"

namespace frfvib {
namespace {

using nlohmann::json;

/// A JSON object whose keys are checked against an allow-list.
class Section {
 public:
  Section(const json& j, std::string path, std::set<std::string> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "document" : path_, "must be an object");
    for (const auto& [key, _] : j_.items()) {
      if (!allowed.count(key)) fail(join(key), "unknown key");
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  const json& raw(const std::string& key) const { return j_.at(key); }
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config error at '" + where + "': " + what);
  }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return as_number(j_.at(key), join(key));
  }

  double number(const std::string& key) const {
    if (!has(key)) fail(join(key), "required key missing");
    return as_number(j_.at(key), join(key));
  }

  int integer(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) fail(join(key), "must be an integer");
    return v.get<int>();
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) fail(join(key), "must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const auto& v = j_.at(key);
    if (!v.is_string()) fail(join(key), "must be a string");
    return v.get<std::string>();
  }

  std::vector<double> list(const std::string& key) const {
    if (!has(key)) fail(join(key), "required key missing");
    const auto& v = j_.at(key);
    if (!v.is_array()) fail(join(key), "must be a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(as_number(v[i], join(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  /// Number broadcast to `n` entries or a list of exactly `n`.
  Vector per_axis(const std::string& key, int n) const {
    if (!has(key)) fail(join(key), "required key missing");
    const auto& v = j_.at(key);
    if (v.is_number()) return Vector::Constant(n, v.get<double>());
    const auto l = list(key);
    if (static_cast<int>(l.size()) != n) fail(join(key), "needs " + std::to_string(n) + " entries");
    return Eigen::Map<const Vector>(l.data(), n);
  }

  /// Number (n = 1 or scalar times identity when n is known), list (diagonal) or matrix.
  Matrix matrix(const std::string& key, int n) const {
    if (!has(key)) fail(join(key), "required key missing");
    const auto& v = j_.at(key);
    if (v.is_number()) return Matrix::Identity(n, n) * v.get<double>();
    if (!v.is_array() || static_cast<int>(v.size()) != n) {
      fail(join(key), "must be a number, " + std::to_string(n) + " diagonal entries or an " +
                          std::to_string(n) + "x" + std::to_string(n) + " matrix");
    }
    Matrix m = Matrix::Zero(n, n);
    const bool diagonal = v[0].is_number();
    for (int i = 0; i < n; ++i) {
      const std::string at = join(key) + "[" + std::to_string(i) + "]";
      if (diagonal) {
        m(i, i) = as_number(v[i], at);
      } else {
        if (!v[i].is_array() || static_cast<int>(v[i].size()) != n) fail(at, "malformed matrix row");
        for (int k = 0; k < n; ++k) m(i, k) = as_number(v[i][k], at + "[" + std::to_string(k) + "]");
      }
    }
    return m;
  }

  Vec3 vec3(const std::string& key, const Vec3& fallback) const {
    if (!has(key)) return fallback;
    const auto l = list(key);
    if (l.size() != 3) fail(join(key), "needs 3 entries");
    return Vec3(l[0], l[1], l[2]);
  }

  Section child(const std::string& key, std::set<std::string> allowed) const {
    static const json empty = json::object();
    return Section(has(key) ? j_.at(key) : empty, join(key), std::move(allowed));
  }

 private:
  static double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(where, "must be finite");
    return d;
  }

  const json& j_;
  std::string path_;
};

std::vector<double> axis_values(const Section& grid, const std::string& key) {
  if (!grid.has(key)) Section::fail(grid.join(key), "required key missing");
  const auto& v = grid.raw(key);
  if (v.is_array()) return grid.list(key);
  const Section r(v, grid.join(key), {"start", "stop", "step", "count"});
  const double lo = r.number("start");
  const double hi = r.number("stop");
  if (r.has("count") == r.has("step")) Section::fail(grid.join(key), "give exactly one of step or count");
  if (r.has("step")) return inclusive_range(lo, hi, r.number("step"));
  const int count = r.integer("count", 0);
  if (count < 1) Section::fail(r.join("count"), "must be >= 1");
  if (count == 1) return {lo};
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
  out.back() = hi;
  return out;
}

MdofSystem parse_mdof(const Section& sys) {
  const json& mass = sys.raw("mass");
  const int n = mass.is_array() ? static_cast<int>(mass.size()) : 1;
  std::vector<std::vector<NonlinearTerm>> nl(n);
  if (sys.has("nonlinearity")) {
    const auto& v = sys.raw("nonlinearity");
    if (!v.is_array() || static_cast<int>(v.size()) != n) {
      Section::fail(sys.join("nonlinearity"), "needs one list of terms per degree of freedom");
    }
    for (int i = 0; i < n; ++i) {
      const std::string at = sys.join("nonlinearity") + "[" + std::to_string(i) + "]";
      if (!v[i].is_array()) Section::fail(at, "must be a list of terms");
      for (std::size_t k = 0; k < v[i].size(); ++k) {
        const Section term(v[i][k], at + "[" + std::to_string(k) + "]", {"order", "coefficient"});
        nl[i].push_back({term.integer("order", 1), term.number("coefficient")});
      }
    }
  }
  std::optional<Matrix> actuator;
  if (sys.has("actuator_map")) actuator = sys.matrix("actuator_map", n);
  Vector lambda = sys.has("input_influence") ? sys.per_axis("input_influence", n) : Vector::Ones(n);
  return MdofSystem(sys.matrix("mass", n), sys.matrix("damping", n), sys.matrix("stiffness", n),
                    nl, lambda, actuator);
}

}  // namespace

int ScenarioConfig::axes() const { return kind == SystemKind::Mdof ? mdof->dof() : 3; }

RwDisturbanceModel ScenarioConfig::rw_model() const {
  return RwDisturbanceModel(rw.harmonics, rw.amplitudes, rw.wheel_speed, rw.unit, seed, 3);
}

ScenarioConfig parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  ScenarioConfig cfg;
  try {
    const Section root(doc, "",
                       {"name", "seed", "system", "tracking", "rw", "grid", "integrator",
                        "adaptation", "sweep", "convergence_check", "simulate", "comparison",
                        "output"});
    cfg.name = root.string("name", "scenario");
    if (root.has("seed")) {
      const auto& s = root.raw("seed");
      if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
        Section::fail("seed", "must be a non-negative integer");
      }
      cfg.seed = s.get<std::uint64_t>();
    }

    if (!root.has("system")) Section::fail("system", "required key missing");
    const auto& sys_raw = root.raw("system");
    if (!sys_raw.is_object() || !sys_raw.contains("type") || !sys_raw["type"].is_string()) {
      Section::fail("system.type", "required: \"mdof\" or \"satellite\"");
    }
    const std::string type = sys_raw["type"].get<std::string>();
    if (type == "mdof") {
      cfg.kind = SystemKind::Mdof;
      const Section sys(sys_raw, "system",
                        {"type", "mass", "damping", "stiffness", "nonlinearity", "input_influence",
                         "actuator_map"});
      if (!sys.has("mass")) Section::fail("system.mass", "required key missing");
      cfg.mdof = parse_mdof(sys);
      for (const char* k : {"tracking", "rw", "comparison"}) {
        if (root.has(k)) Section::fail(k, "only valid for satellite systems");
      }
    } else if (type == "satellite") {
      cfg.kind = SystemKind::Satellite;
      const Section sys(sys_raw, "system",
                        {"type", "inertia", "disturbance_gain", "q_desired", "q_initial",
                         "omega_initial"});
      SatelliteScenario sc;
      if (sys.has("inertia")) sc.params.inertia = sys.matrix("inertia", 3);
      sc.params.disturbance_gain = sys.number("disturbance_gain", 1.0);
      sc.q_desired = SatelliteScenario::normalize_attitude(sys.vec3("q_desired", Vec3::Zero()));
      sc.q_initial = SatelliteScenario::normalize_attitude(sys.vec3("q_initial", sc.q_desired));
      sc.omega_initial = sys.vec3("omega_initial", Vec3::Zero());
      const Section tr = root.child("tracking", {"k_r", "lambda_r", "theta_r"});
      if (tr.has("k_r")) sc.tracking.k_r = tr.matrix("k_r", 3);
      if (tr.has("lambda_r")) sc.tracking.lambda_r = tr.matrix("lambda_r", 3);
      if (tr.has("theta_r")) sc.tracking.theta_r = tr.matrix("theta_r", 3);
      sc.validate();
      cfg.satellite = sc;

      const Section rw = root.child("rw", {"harmonics", "amplitudes", "wheel_speed", "unit"});
      if (rw.has("harmonics")) cfg.rw.harmonics = rw.list("harmonics");
      if (rw.has("amplitudes")) cfg.rw.amplitudes = rw.list("amplitudes");
      cfg.rw.wheel_speed = rw.number("wheel_speed", cfg.rw.wheel_speed);
      const std::string unit = rw.string("unit", "rev/s");
      if (unit == "rev/s") {
        cfg.rw.unit = WheelSpeedUnit::RevPerSecond;
      } else if (unit == "rad/s") {
        cfg.rw.unit = WheelSpeedUnit::RadPerSecond;
      } else {
        Section::fail("rw.unit", "must be \"rev/s\" or \"rad/s\"");
      }
      (void)cfg.rw_model();  // validates the table

      const Section cmp = root.child("comparison", {"settle_time", "window"});
      cfg.comparison.settle_time = cmp.number("settle_time", 0.0);
      cfg.comparison.window = cmp.number("window", 0.0);
      if (cfg.comparison.settle_time < 0.0 || cfg.comparison.window < 0.0) {
        Section::fail("comparison", "times must be non-negative");
      }
    } else {
      Section::fail("system.type", "must be \"mdof\" or \"satellite\"");
    }
    const int n = cfg.axes();
    const bool sat = cfg.kind == SystemKind::Satellite;

    const Section grid = root.child("grid", {"amplitudes", "frequencies"});
    cfg.grid.amplitudes = axis_values(grid, "amplitudes");
    cfg.grid.frequencies = axis_values(grid, "frequencies");
    cfg.grid.validate();

    const Section in = root.child("integrator", {"step_h", "max_periods", "ss_rel_tol", "measure_periods",
                                                 "transient_periods", "stable_periods",
                                                 "divergence_bound"});
    auto& ic = cfg.integrator;
    ic.step_h = in.number("step_h", ic.step_h);
    ic.max_periods = in.integer("max_periods", ic.max_periods);
    ic.ss_rel_tol = in.number("ss_rel_tol", ic.ss_rel_tol);
    ic.measure_periods = in.integer("measure_periods", ic.measure_periods);
    ic.transient_periods = in.integer("transient_periods", ic.transient_periods);
    ic.stable_periods = in.integer("stable_periods", ic.stable_periods);
    ic.divergence_bound = in.number("divergence_bound", ic.divergence_bound);
    ic.validate();

    const Section ad = root.child("adaptation", {"gamma_p", "gamma_d", "delta_x1", "delta_x2", "theta_min",
                                                 "max_iterations", "eps_tol", "overshoot_guard",
                                                 "probe"});
    auto& a = cfg.adaptation;
    a.gamma_p = ad.per_axis("gamma_p", n);
    a.gamma_d = ad.per_axis("gamma_d", n);
    a.delta_x1 = ad.per_axis("delta_x1", n);
    a.delta_x2 = ad.per_axis("delta_x2", n);
    if (!ad.has("theta_min")) Section::fail("adaptation.theta_min", "required key missing");
    if (ad.raw("theta_min").is_object()) {
      const Section tm = ad.child("theta_min", {"p", "d"});
      a.theta_min_p = tm.per_axis("p", n);
      a.theta_min_d = tm.per_axis("d", n);
    } else {
      a.theta_min_p = a.theta_min_d = ad.per_axis("theta_min", n);
    }
    a.max_iterations = ad.integer("max_iterations", a.max_iterations);
    a.eps_tol = ad.number("eps_tol", a.eps_tol);
    a.overshoot_guard = ad.boolean("overshoot_guard", a.overshoot_guard);
    a.validate();
    if (sat) {
      const Section pr = ad.child("probe", {"enabled", "offset", "horizon", "tolerance"});
      auto& p = cfg.satellite_probe;
      p.enabled = pr.boolean("enabled", p.enabled);
      p.offset = pr.number("offset", p.offset);
      p.horizon = pr.number("horizon", p.horizon);
      p.tolerance = pr.number("tolerance", p.tolerance);
      if (!(p.horizon > 0.0) || !(p.tolerance > 0.0)) Section::fail("adaptation.probe", "horizon and tolerance must be positive");
    } else {
      const Section pr = ad.child("probe", {"enabled", "initial_positions", "horizon", "tolerance"});
      auto& p = cfg.probe;
      p.enabled = pr.boolean("enabled", p.enabled);
      if (pr.has("initial_positions")) p.initial_positions = pr.list("initial_positions");
      p.horizon = pr.number("horizon", p.horizon);
      p.tolerance = pr.number("tolerance", p.tolerance);
      if (p.initial_positions.size() < 2) Section::fail("adaptation.probe.initial_positions", "needs at least two entries");
      if (!(p.horizon > 0.0) || !(p.tolerance > 0.0)) Section::fail("adaptation.probe", "horizon and tolerance must be positive");
    }

    const Section sw = root.child("sweep", {"jobs", "warm_start", "abort_on_failure"});
    cfg.sweep.jobs = sw.integer("jobs", 0);
    if (cfg.sweep.jobs < 0) Section::fail("sweep.jobs", "must be >= 0");
    cfg.sweep.warm_start = sw.boolean("warm_start", false);
    cfg.sweep.abort_on_failure = sw.boolean("abort_on_failure", true);

    if (sat) {
      const Section cc = root.child("convergence_check", {"q_initial", "omega_initial", "duration", "step_h"});
      auto& c = cfg.check;
      c.q_initial = SatelliteScenario::normalize_attitude(cc.vec3("q_initial", c.q_initial));
      c.omega_initial = cc.vec3("omega_initial", c.omega_initial);
      c.duration = cc.number("duration", c.duration);
      c.step_h = cc.number("step_h", c.step_h);
      if (!(c.duration > 0.0) || !(c.step_h > 0.0)) Section::fail("convergence_check", "duration and step_h must be positive");
      const Section sim = root.child("simulate", {"record_every"});
      cfg.simulate.record_every = sim.integer("record_every", 10);
    } else {
      const Section cc = root.child("convergence_check", {"initial_positions", "amplitude", "omega", "horizon",
                                                          "tolerance", "region", "samples"});
      auto& c = cfg.check;
      if (cc.has("initial_positions")) c.initial_positions = cc.list("initial_positions");
      c.amplitude = cc.number("amplitude", c.amplitude);
      c.omega = cc.number("omega", c.omega);
      c.horizon = cc.number("horizon", c.horizon);
      c.tolerance = cc.number("tolerance", c.tolerance);
      c.samples = cc.integer("samples", c.samples);
      if (c.initial_positions.size() < 2) Section::fail("convergence_check.initial_positions", "needs at least two entries");
      if (!(c.omega > 0.0) || !(c.horizon > 0.0) || c.amplitude < 0.0 || c.samples < 1) {
        Section::fail("convergence_check", "omega, horizon and samples must be positive, amplitude non-negative");
      }
      if (cc.has("region")) {
        const Section r = cc.child("region", {"lower", "upper"});
        StateBox box{r.per_axis("lower", 2 * n), r.per_axis("upper", 2 * n)};
        if ((box.upper - box.lower).minCoeff() < 0.0) Section::fail("convergence_check.region", "upper below lower");
        c.region = box;
      }
      const Section sim = root.child("simulate", {"amplitude", "omega", "duration", "record_every"});
      auto& s = cfg.simulate;
      s.amplitude = sim.number("amplitude", s.amplitude);
      s.omega = sim.number("omega", s.omega);
      s.duration = sim.number("duration", s.duration);
      s.record_every = sim.integer("record_every", s.record_every);
      if (s.amplitude < 0.0 || !(s.omega > 0.0) || !(s.duration > 0.0)) {
        Section::fail("simulate", "omega and duration must be positive, amplitude non-negative");
      }
    }
    if (cfg.simulate.record_every < 1) Section::fail("simulate.record_every", "must be >= 1");

    const Section out = root.child("output", {"directory"});
    cfg.output_directory = out.string("directory", "out");
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
  cfg.snapshot = doc.dump(2);
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace frfvib
