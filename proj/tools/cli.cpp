#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "frfvib/errors.hpp"
#include "frfvib/export.hpp"
#include "frfvib/scenario.hpp"
#include "json.hpp"
#include "manifest.hpp"

namespace frfvib::cli {
namespace {

using nlohmann::json;

struct Setup {
  ScenarioConfig cfg;
  std::filesystem::path out;
  SweepOptions sweep;
};

Setup prepare(const Options& opt) {
  Setup s{load_scenario(opt.config), {}, {}};
  if (opt.seed) s.cfg.seed = *opt.seed;
  if (opt.grid_override) {
    try {
      s.cfg.grid = ExcitationGrid::parse(*opt.grid_override);
    } catch (const ArgumentError& e) {
      throw ConfigError(std::string("--grid-override: ") + e.what());
    }
  }
  s.sweep = s.cfg.sweep;
  if (opt.jobs) {
    if (*opt.jobs < 0) throw ConfigError("--jobs must be >= 0");
    s.sweep.jobs = *opt.jobs;
  }
  if (opt.warm_start) s.sweep.warm_start = true;
  if (opt.no_warm_start) s.sweep.warm_start = false;
  s.out = opt.out.empty() ? std::filesystem::path(s.cfg.output_directory)
                          : std::filesystem::path(opt.out);
  return s;
}

PdGains load_gains(const Options& opt, int dim) {
  if (opt.gains.empty()) return PdGains::zero(dim);
  std::ifstream in(opt.gains);
  if (!in) throw ConfigError("cannot open gains file '" + opt.gains + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_gains_json(ss.str(), dim);
}

RunManifest start_manifest(const Setup& s, const Options& opt, const std::string& command) {
  RunManifest m(s.out, command);
  m.set_config(opt.config, s.cfg.snapshot);
  m.set_seed(s.cfg.seed);
  m.set_jobs(resolve_jobs(s.sweep.jobs));
  json grid{{"amplitudes", s.cfg.grid.amplitudes}, {"frequencies", s.cfg.grid.frequencies}};
  m.add_note("grid", grid.dump());
  m.add_note("warm_start", s.sweep.warm_start ? "true" : "false");
  return m;
}

std::string frf_csv(const FrfMatrix& m) {
  std::ostringstream os;
  write_frf_csv(os, m);
  return os.str();
}

json failures_json(const std::vector<CellFailure>& fails, const ExcitationGrid& grid) {
  json a = json::array();
  for (const auto& f : fails) {
    a.push_back({{"amplitude", grid.amplitudes[f.row]},
                 {"omega", grid.frequencies[f.col]},
                 {"diverged", f.diverged},
                 {"reason", f.reason}});
  }
  return a;
}

void report_failures(std::ostream& log, const std::vector<CellFailure>& fails,
                     const ExcitationGrid& grid) {
  for (const auto& f : fails) {
    log << "  failed cell a=" << grid.amplitudes[f.row] << " omega=" << grid.frequencies[f.col]
        << ": " << f.reason << '\n';
  }
}

std::unique_ptr<FrfPlant> make_plant(const ScenarioConfig& cfg) {
  if (cfg.kind == SystemKind::Mdof) return std::make_unique<MdofFrfPlant>(*cfg.mdof, cfg.probe);
  return std::make_unique<SatelliteFrfPlant>(*cfg.satellite, cfg.satellite_probe);
}

template <class F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DivergenceError& e) {
    log << "error: " << e.what() << '\n';
    return kDivergence;
  } catch (const ArgumentError& e) {
    log << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kUsage;
  }
}

std::vector<std::string> mdof_state_columns(int n) {
  std::vector<std::string> c;
  for (int i = 0; i < n; ++i) c.push_back(n == 1 ? "q" : "q_" + std::to_string(i + 1));
  for (int i = 0; i < n; ++i) c.push_back(n == 1 ? "qdot" : "qdot_" + std::to_string(i + 1));
  return c;
}

std::vector<std::string> numbered(const std::string& base, int n) {
  std::vector<std::string> c;
  for (int i = 0; i < n; ++i) c.push_back(base + "_" + std::to_string(i + 1));
  return c;
}

}  // namespace

int cmd_frf(const Options& opt, std::ostream& log) {
  return guarded(log, [&] {
    Setup s = prepare(opt);
    auto manifest = start_manifest(s, opt, "frf");
    const PdGains gains = load_gains(opt, s.cfg.axes());
    std::vector<FrfMatrix> mats;
    std::vector<CellFailure> fails;
    if (s.cfg.kind == SystemKind::Mdof) {
      MdofFrfPlant plant(*s.cfg.mdof, s.cfg.probe);
      auto res = frf_sweep(plant.sweep_problem(gains), s.cfg.grid, s.cfg.integrator, s.sweep);
      mats = std::move(res.matrices);
      fails = std::move(res.failures);
    } else {
      SatelliteFrfPlant plant(*s.cfg.satellite, s.cfg.satellite_probe);
      for (int k = 0; k < 3 && fails.empty(); ++k) {
        auto res = frf_sweep(plant.sweep_problem(gains, k), s.cfg.grid, s.cfg.integrator, s.sweep);
        for (auto& m : res.matrices) mats.push_back(std::move(m));
        fails.insert(fails.end(), res.failures.begin(), res.failures.end());
      }
    }
    json norms = json::object();
    for (const auto& m : mats) {
      manifest.write_file("frf_" + m.channel + ".csv", frf_csv(m));
      norms[m.channel] = fails.empty() ? json(frobenius_norm(m)) : json(frobenius_norm(m, FailurePolicy::Exclude));
      if (!opt.quiet) log << "frf " << m.channel << ": F-norm " << norms[m.channel].get<double>() << '\n';
    }
    manifest.add_note("fnorms", norms.dump());
    manifest.add_note("failed_cells", failures_json(fails, s.cfg.grid).dump());
    int code = kOk;
    if (!fails.empty()) {
      bool diverged = false;
      for (const auto& f : fails) diverged = diverged || f.diverged;
      code = diverged ? kDivergence : kSweepFailure;
      log << fails.size() << " grid cell(s) failed\n";
      report_failures(log, fails, s.cfg.grid);
    }
    manifest.set_status(code == kOk ? "ok" : (code == kDivergence ? "divergence" : "sweep-failure"), code);
    manifest.finish();
    return code;
  });
}

int cmd_tune(const Options& opt, std::ostream& log) {
  return guarded(log, [&] {
    Setup s = prepare(opt);
    auto manifest = start_manifest(s, opt, "tune");
    auto plant = make_plant(s.cfg);
    auto progress = [&](const IterationRecord& r) {
      if (opt.quiet) return;
      log << "iteration " << r.iteration << ": theta_p=" << r.theta_p.transpose()
          << " theta_d=" << r.theta_d.transpose() << " |F1|=" << r.fnorm_x1.transpose()
          << " |F2|=" << r.fnorm_x2.transpose() << '\n';
    };
    const TuningHistory hist =
        tune(*plant, s.cfg.grid, s.cfg.adaptation, s.cfg.integrator, s.sweep, std::nullopt, progress);

    std::ostringstream csv;
    write_history_csv(csv, hist);
    manifest.write_file("tuning_history.csv", csv.str());
    manifest.write_file("tuning_history.json", history_json(hist));
    manifest.write_file("gains.json", gains_json(hist.final_gains));
    for (const auto* group : {&hist.final_x1, &hist.final_x2}) {
      for (const auto& m : *group) manifest.write_file("frf_" + m.channel + ".csv", frf_csv(m));
    }

    if (s.cfg.kind == SystemKind::Satellite && hist.status == TuningStatus::Converged) {
      const auto cmp = compare_rms(*s.cfg.satellite, s.cfg.rw_model(), hist.final_gains,
                                   s.cfg.integrator, s.cfg.comparison);
      json j{{"rms_uncontrolled", {cmp.rms_uncontrolled[0], cmp.rms_uncontrolled[1], cmp.rms_uncontrolled[2]}},
             {"rms_controlled", {cmp.rms_controlled[0], cmp.rms_controlled[1], cmp.rms_controlled[2]}},
             {"norm_uncontrolled", cmp.norm_uncontrolled},
             {"norm_controlled", cmp.norm_controlled},
             {"reduction", cmp.reduction()},
             {"window", {cmp.window_start, cmp.window_end}}};
      manifest.write_file("rms_comparison.json", j.dump(2) + "\n");
      if (!opt.quiet) log << "RW error RMS reduction: " << 100.0 * cmp.reduction() << "%\n";
    }

    int code = kOk;
    switch (hist.status) {
      case TuningStatus::Converged: code = kOk; break;
      case TuningStatus::MaxIterations: code = kMaxIterations; break;
      case TuningStatus::SweepFailure: code = kSweepFailure; break;
      case TuningStatus::NotConvergent: code = kNotConvergent; break;
    }
    log << "tune: " << to_string(hist.status) << " (" << hist.message << ")\n";
    if (!hist.failures.empty()) report_failures(log, hist.failures, s.cfg.grid);
    manifest.set_status(to_string(hist.status), code);
    manifest.finish();
    return code;
  });
}

int cmd_simulate(const Options& opt, std::ostream& log) {
  return guarded(log, [&] {
    Setup s = prepare(opt);
    auto manifest = start_manifest(s, opt, "simulate");
    const int n = s.cfg.axes();
    const PdGains gains = load_gains(opt, n);
    const bool controlled = !opt.gains.empty();

    if (s.cfg.kind == SystemKind::Mdof) {
      const auto& sys = *s.cfg.mdof;
      const auto& sim = s.cfg.simulate;
      const double a = sim.amplitude;
      const double w = sim.omega;
      auto excitation = [a, w](double t) { return a * std::sin(w * t); };
      json summary = json::object();
      auto run_case = [&](const std::string& name, const PdGains& g) {
        IntegratorConfig ic = s.cfg.integrator;
        auto field = closed_loop_field(sys, g, excitation);
        auto inputs = [&](double t, const Vector& x) {
          Vector in(1 + n);
          in[0] = excitation(t);
          in.tail(n) = pd_control(g, x.head(n), x.tail(n));
          return in;
        };
        const auto traj = integrate(field, Vector::Zero(2 * n), 0.0, sim.duration, ic, {}, inputs);
        Trajectory kept;
        for (std::size_t i = 0; i < traj.times.size(); i += sim.record_every) {
          kept.times.push_back(traj.times[i]);
          kept.states.push_back(traj.states[i]);
          kept.inputs.push_back(traj.inputs[i]);
        }
        std::vector<std::string> in_cols{"w"};
        for (int i = 0; i < n; ++i) in_cols.push_back(n == 1 ? "u" : "u_" + std::to_string(i + 1));
        std::ostringstream os;
        write_trajectory_csv(os, kept, mdof_state_columns(n), in_cols);
        manifest.write_file("trajectory_" + name + ".csv", os.str());

        auto output = [](double, const Vector& x, Vector& y) { y = x; };
        const auto ss = detect_steady_state(field, Vector::Zero(2 * n), 2.0 * std::numbers::pi / w,
                                            output, 2 * n, ic);
        json peaks = json::array();
        for (Eigen::Index i = 0; i < ss.peak_per_channel.size(); ++i) peaks.push_back(ss.peak_per_channel[i]);
        summary[name] = {{"steady_state", ss.converged}, {"peaks", peaks}};
        if (!opt.quiet) log << name << ": steady-state position peak " << ss.peak_per_channel[0] << '\n';
      };
      run_case("uncontrolled", PdGains::zero(n));
      if (controlled) run_case("controlled", gains);
      summary["amplitude"] = a;
      summary["omega"] = w;
      manifest.write_file("simulation_summary.json", summary.dump(2) + "\n");
    } else {
      SatelliteRun off, on;
      const auto cmp = compare_rms(*s.cfg.satellite, s.cfg.rw_model(), gains, s.cfg.integrator,
                                   s.cfg.comparison, &off, &on, s.cfg.simulate.record_every);
      std::vector<std::string> st{"q_1", "q_2", "q_3", "qdot_1", "qdot_2", "qdot_3"};
      std::vector<std::string> in = numbered("w", 3);
      for (auto& c : numbered("u", 3)) in.push_back(c);
      std::ostringstream a, b;
      write_trajectory_csv(a, off.trajectory, st, in);
      manifest.write_file("trajectory_uncontrolled.csv", a.str());
      if (controlled) {
        write_trajectory_csv(b, on.trajectory, st, in);
        manifest.write_file("trajectory_controlled.csv", b.str());
      }
      json j{{"rms_uncontrolled", {cmp.rms_uncontrolled[0], cmp.rms_uncontrolled[1], cmp.rms_uncontrolled[2]}},
             {"rms_controlled", {cmp.rms_controlled[0], cmp.rms_controlled[1], cmp.rms_controlled[2]}},
             {"norm_uncontrolled", cmp.norm_uncontrolled},
             {"norm_controlled", cmp.norm_controlled},
             {"reduction", cmp.reduction()},
             {"window", {cmp.window_start, cmp.window_end}}};
      manifest.write_file("rms_comparison.json", j.dump(2) + "\n");
      if (!opt.quiet) log << "RW error RMS reduction: " << 100.0 * cmp.reduction() << "%\n";
    }
    manifest.set_status("ok", kOk);
    manifest.finish();
    return kOk;
  });
}

int cmd_converge_check(const Options& opt, std::ostream& log) {
  return guarded(log, [&] {
    Setup s = prepare(opt);
    auto manifest = start_manifest(s, opt, "converge-check");
    const auto& c = s.cfg.check;
    int code = kOk;
    if (s.cfg.kind == SystemKind::Mdof) {
      const auto& sys = *s.cfg.mdof;
      const int n = sys.dof();
      const PdGains gains = load_gains(opt, n);
      const double a = c.amplitude;
      const double w = c.omega;
      auto field = closed_loop_field(sys, gains, [a, w](double t) { return a * std::sin(w * t); });
      std::vector<Vector> ics;
      for (double p : c.initial_positions) {
        Vector x0 = Vector::Zero(2 * n);
        x0.head(n).setConstant(p);
        ics.push_back(x0);
      }
      const auto rep = multi_ic_convergence(field, ics, 2.0 * std::numbers::pi / w, c.horizon,
                                            s.cfg.integrator);
      const bool ok = rep.terminal_max_distance < c.tolerance;

      StateBox box = c.region ? *c.region
                              : StateBox{Vector::Constant(2 * n, -1.0), Vector::Constant(2 * n, 1.0)};
      const std::optional<PdGains> g = opt.gains.empty() ? std::nullopt : std::optional<PdGains>(gains);
      const auto plain = sample_region_check(sys, g, box, c.samples, std::nullopt);
      const auto transformed = sample_region_check(sys, g, box, c.samples, transformation_matrix(n));

      json j;
      j["multi_ic"] = json::parse(convergence_report_json(rep));
      j["multi_ic"]["tolerance"] = c.tolerance;
      j["multi_ic"]["converged"] = ok;
      j["jacobian_identity"] = json::parse(jacobian_report_json(plain));
      j["jacobian_transformed"] = json::parse(jacobian_report_json(transformed));
      manifest.write_file("convergence_report.json", j.dump(2) + "\n");
      log << "multi-IC terminal distance " << rep.terminal_max_distance
          << (ok ? " (converged)" : " (NOT converged)") << "; symmetric-part verdict: "
          << to_string(plain.verdict) << " (identity), " << to_string(transformed.verdict)
          << " (transformed)\n";
      code = ok ? kOk : kNotConvergent;
    } else {
      const auto& params = s.cfg.satellite->params;
      IntegratorConfig ic = s.cfg.integrator;
      ic.step_h = c.step_h;
      Vector x0(6);
      x0 << c.q_initial, c.omega_initial;
      const auto traj = integrate(satellite_torque_free_field(params), x0, 0.0, c.duration, ic,
                                  mrp_shadow_hook());
      auto energy = [&](const Vector& x) {
        const Vec3 w = x.segment<3>(3);
        return 0.5 * w.dot(params.inertia * w);
      };
      auto momentum = [&](const Vector& x) {
        const Vec3 w = x.segment<3>(3);
        return (params.inertia * w).norm();
      };
      const double e0 = energy(traj.states.front());
      const double h0 = momentum(traj.states.front());
      double de = 0.0, dh = 0.0;
      for (const auto& x : traj.states) {
        de = std::max(de, std::abs(energy(x) - e0) / e0);
        dh = std::max(dh, std::abs(momentum(x) - h0) / h0);
      }
      json j{{"energy_initial", e0},
             {"momentum_initial", h0},
             {"energy_max_relative_drift", de},
             {"momentum_max_relative_drift", dh},
             {"duration", c.duration},
             {"step_h", c.step_h}};
      manifest.write_file("energy_report.json", j.dump(2) + "\n");
      log << "torque-free: energy drift " << de << ", momentum drift " << dh << '\n';
    }
    manifest.set_status(code == kOk ? "ok" : "not-convergent", code);
    manifest.finish();
    return code;
  });
}

int run(int argc, char** argv, std::ostream& log) {
  CLI::App app{"Nonlinear FRF sweeps and FRF-driven PD gain tuning"};
  app.require_subcommand(1);
  Options opt;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> grid;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "scenario config (JSON)")->required();
    sub->add_option("--out", opt.out, "output directory (default: config output.directory)");
    sub->add_option("--seed", seed, "random seed (RW disturbance phases)");
    sub->add_option("--jobs", jobs, "sweep worker threads (0: all cores)");
    sub->add_option("--grid-override", grid, "excitation grid a0:a1:da,w0:w1:dw");
    sub->add_flag("--no-warm-start", opt.no_warm_start, "start every grid cell from rest");
    sub->add_flag("--warm-start", opt.warm_start, "start each cell from the previous cell's end state");
    sub->add_flag("--quiet", opt.quiet, "less progress output");
  };
  auto* frf = app.add_subcommand("frf", "sweep the excitation grid and write FRF matrices");
  add_common(frf);
  frf->add_option("--gains", opt.gains, "PD gains file (default: uncontrolled)");
  auto* tune = app.add_subcommand("tune", "adapt PD gains from FRF sweeps");
  add_common(tune);
  auto* sim = app.add_subcommand("simulate", "time responses with and without control");
  add_common(sim);
  sim->add_option("--gains", opt.gains, "PD gains file (e.g. gains.json from tune)");
  auto* conv = app.add_subcommand("converge-check", "multi-IC convergence and Jacobian diagnostics");
  add_common(conv);
  conv->add_option("--gains", opt.gains, "PD gains file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  opt.seed = seed;
  opt.jobs = jobs;
  opt.grid_override = grid;
  if (opt.warm_start && opt.no_warm_start) {
    log << "error: --warm-start and --no-warm-start are exclusive\n";
    return kUsage;
  }
  if (*frf) return cmd_frf(opt, log);
  if (*tune) return cmd_tune(opt, log);
  if (*sim) return cmd_simulate(opt, log);
  return cmd_converge_check(opt, log);
}

}  // namespace frfvib::cli
