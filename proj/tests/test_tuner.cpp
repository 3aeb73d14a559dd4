#include <gtest/gtest.h>

#include <random>

#include "frfvib/errors.hpp"
#include "frfvib/scenario.hpp"
#include "frfvib/tuner.hpp"

using namespace frfvib;

namespace {

AdaptationConfig scalar_config(double gp, double gd, double d1, double d2, double floor) {
  return AdaptationConfig::uniform(1, gp, gd, d1, d2, floor);
}

PdGains scalar_gains(double p, double d) {
  return PdGains::diagonal(Vector::Constant(1, p), Vector::Constant(1, d));
}

// F-norms follow a fixed map of the gains; probe and failures are scriptable.
class FakePlant : public FrfPlant {
 public:
  std::function<std::pair<double, double>(const PdGains&)> response;
  bool convergent = true;
  int fail_at = -1;
  int probe_fail_at = -1;
  mutable int calls = 0;
  mutable int probes = 0;

  int axes() const override { return 1; }

  PlantResponse measure(const PdGains& g, const ExcitationGrid& grid, const IntegratorConfig&,
                        const SweepOptions&) const override {
    PlantResponse r;
    const auto [f1, f2] = response(g);
    auto matrix = [&](const std::string& name, double f) {
      FrfMatrix m;
      m.channel = name;
      m.amplitudes = grid.amplitudes;
      m.frequencies = grid.frequencies;
      m.gains = Matrix::Constant(1, 1, f);
      return m;
    };
    r.x1.push_back(matrix("x1", f1));
    r.x2.push_back(matrix("x2", f2));
    if (calls++ == fail_at) r.failures.push_back({0, 0, true, "diverged"});
    return r;
  }

  ProbeOutcome probe_convergence(const PdGains&, const ExcitationGrid&,
                                 const IntegratorConfig&) const override {
    ProbeOutcome p;
    p.convergent = convergent && probes++ != probe_fail_at;
    p.detail = convergent ? "" : "spread";
    return p;
  }
};

const ExcitationGrid kUnitGrid{{1.0}, {1.0}};

}  // namespace

TEST(AdaptationStep, Examples) {
  const auto cfg = scalar_config(2.0, 1.0, 0.5, 3.0, 0.001);
  const auto g = scalar_gains(1.0, 1.0);
  auto same = adaptation_step(g, 0.5, 3.0, cfg);
  EXPECT_EQ(same.theta_p, g.theta_p);
  EXPECT_EQ(same.theta_d, g.theta_d);
  auto up = adaptation_step(g, 0.6, 3.0, cfg);
  EXPECT_NEAR(up.theta_p(0, 0) - 1.0, 0.12, 1e-15);
  auto floored = adaptation_step(scalar_gains(0.01, 0.01), 0.1, 0.1, cfg);
  EXPECT_DOUBLE_EQ(floored.theta_p(0, 0), 0.001);
  EXPECT_DOUBLE_EQ(floored.theta_d(0, 0), 0.001);
}

TEST(AdaptationStep, SignCorrectnessAndFloor) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int s = 0; s < 500; ++s) {
    const auto cfg = scalar_config(u(gen) + 0.1, u(gen) + 0.1, u(gen) + 0.1, u(gen) + 0.1, 0.01);
    const auto g = scalar_gains(u(gen) + 0.01, u(gen) + 0.01);
    const double f1 = u(gen), f2 = u(gen);
    const auto next = adaptation_step(g, f1, f2, cfg);
    if (f1 > cfg.delta_x1[0]) EXPECT_GE(next.theta_p(0, 0), g.theta_p(0, 0));
    if (f1 < cfg.delta_x1[0]) EXPECT_LE(next.theta_p(0, 0), std::max(g.theta_p(0, 0), 0.01));
    if (f2 > cfg.delta_x2[0]) EXPECT_GE(next.theta_d(0, 0), g.theta_d(0, 0));
    EXPECT_GE(next.theta_p(0, 0), 0.01);
    EXPECT_GE(next.theta_d(0, 0), 0.01);
  }
}

TEST(AdaptationStep, ScalesAndOffDiagonals) {
  auto cfg = AdaptationConfig::uniform(2, 1.0, 1.0, 0.5, 0.5, 0.001);
  Matrix tp(2, 2);
  tp << 1, 0.3, 0.3, 1;
  const PdGains g{tp, Matrix::Identity(2, 2)};
  Vector f = Vector::Constant(2, 1.0);
  Vector half(2);
  half << 0.5, 1.0;
  const auto next = adaptation_step(g, f, f, cfg, &half, &half);
  EXPECT_DOUBLE_EQ(next.theta_p(0, 0), 1.25);
  EXPECT_DOUBLE_EQ(next.theta_p(1, 1), 1.5);
  EXPECT_DOUBLE_EQ(next.theta_p(0, 1), 0.3);
}

TEST(AdaptationConfig, Validation) {
  EXPECT_NO_THROW(scalar_config(1, 1, 1, 1, 0.1).validate());
  EXPECT_THROW(scalar_config(0, 1, 1, 1, 0.1).validate(), ArgumentError);
  EXPECT_THROW(scalar_config(1, 1, -1, 1, 0.1).validate(), ArgumentError);
  EXPECT_THROW(scalar_config(1, 1, 1, 1, 0.0).validate(), ArgumentError);
  auto c = scalar_config(1, 1, 1, 1, 0.1);
  c.max_iterations = 0;
  EXPECT_THROW(c.validate(), ArgumentError);
}

TEST(OvershootGuard, HalvesOnSignFlipAndReturnsMidpoint) {
  OvershootGuard guard(1);
  const Vector pos = Vector::Constant(1, 0.5);
  const Vector neg = Vector::Constant(1, -0.2);
  auto base = guard.update(scalar_gains(1.0, 1.0), pos, pos);
  EXPECT_DOUBLE_EQ(base.theta_p(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(guard.scale_p()[0], 1.0);
  base = guard.update(scalar_gains(3.0, 2.0), neg, pos);
  EXPECT_DOUBLE_EQ(guard.scale_p()[0], 0.5);
  EXPECT_DOUBLE_EQ(base.theta_p(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(guard.scale_d()[0], 1.0);
  EXPECT_DOUBLE_EQ(base.theta_d(0, 0), 2.0);
  guard.update(scalar_gains(2.5, 2.0), neg, pos);
  EXPECT_DOUBLE_EQ(guard.scale_p()[0], 1.0);
}

TEST(ChannelSatisfied, Rules) {
  EXPECT_TRUE(channel_satisfied(0.005, 3.0, 0.001, 0.01));
  EXPECT_FALSE(channel_satisfied(0.5, 3.0, 0.001, 0.01));
  EXPECT_TRUE(channel_satisfied(-0.5, 0.001, 0.001, 0.01));
  EXPECT_FALSE(channel_satisfied(-0.5, 2.0, 0.001, 0.01));
}

TEST(Tune, FixedPointConvergesImmediately) {
  FakePlant plant;
  plant.response = [](const PdGains&) { return std::pair{0.5, 3.0}; };
  const auto h = tune(plant, kUnitGrid, scalar_config(1, 1, 0.5, 3.0, 0.001), IntegratorConfig{}, {});
  EXPECT_EQ(h.status, TuningStatus::Converged);
  ASSERT_EQ(h.records.size(), 1u);
  EXPECT_EQ(h.records[0].iteration, 0);
}

TEST(Tune, MaxIterations) {
  FakePlant plant;
  plant.response = [](const PdGains&) { return std::pair{5.0, 5.0}; };
  auto cfg = scalar_config(1e-3, 1e-3, 0.5, 3.0, 0.001);
  cfg.max_iterations = 4;
  const auto h = tune(plant, kUnitGrid, cfg, IntegratorConfig{}, {});
  EXPECT_EQ(h.status, TuningStatus::MaxIterations);
  EXPECT_EQ(h.records.size(), 4u);
  EXPECT_EQ(to_string(h.status), "max-iterations");
}

TEST(Tune, SweepFailureStops) {
  FakePlant plant;
  plant.response = [](const PdGains&) { return std::pair{5.0, 5.0}; };
  plant.fail_at = 2;
  const auto h = tune(plant, kUnitGrid, scalar_config(1e-3, 1e-3, 0.5, 3.0, 0.001), IntegratorConfig{}, {});
  EXPECT_EQ(h.status, TuningStatus::SweepFailure);
  EXPECT_EQ(h.records.size(), 2u);
  EXPECT_EQ(h.failures.size(), 1u);
}

TEST(Tune, ProbeFailure) {
  FakePlant plant;
  plant.response = [](const PdGains&) { return std::pair{5.0, 5.0}; };
  plant.convergent = false;
  const auto h = tune(plant, kUnitGrid, scalar_config(1, 1, 0.5, 3.0, 0.001), IntegratorConfig{}, {});
  EXPECT_EQ(h.status, TuningStatus::NotConvergent);
  EXPECT_TRUE(h.records.empty());
  EXPECT_EQ(plant.calls, 0);
}

TEST(Tune, ProbesEveryVisitedGain) {
  FakePlant plant;
  plant.response = [](const PdGains&) { return std::pair{5.0, 5.0}; };
  plant.probe_fail_at = 3;
  const auto h = tune(plant, kUnitGrid, scalar_config(1e-3, 1e-3, 0.5, 3.0, 0.001), IntegratorConfig{}, {});
  EXPECT_EQ(h.status, TuningStatus::NotConvergent);
  EXPECT_EQ(h.records.size(), 3u);
  EXPECT_EQ(plant.probes, 4);
}

TEST(Tune, HugeToleranceConvergesAtIterationZero) {
  FakePlant plant;
  plant.response = [](const PdGains&) { return std::pair{5.0, 5.0}; };
  auto cfg = scalar_config(1, 1, 0.5, 3.0, 0.001);
  cfg.eps_tol = 1e9;
  const auto h = tune(plant, kUnitGrid, cfg, IntegratorConfig{}, {});
  EXPECT_EQ(h.status, TuningStatus::Converged);
  EXPECT_EQ(h.records.size(), 1u);
}

TEST(Tune, DegenerateSubResonantCellStaysOnFloor) {
  MdofFrfPlant plant(duffing_preset());
  const auto h = tune(plant, ExcitationGrid{{0.5}, {3.0}}, scalar_config(120, 1, 0.5, 3.0, 0.001),
                      IntegratorConfig{}, {});
  EXPECT_EQ(h.status, TuningStatus::Converged);
  ASSERT_EQ(h.records.size(), 1u);
  EXPECT_DOUBLE_EQ(h.final_gains.theta_p(0, 0), 0.001);
  EXPECT_DOUBLE_EQ(h.final_gains.theta_d(0, 0), 0.001);
}

TEST(Tune, FloorSafetyRandomized) {
  // 20 random adaptation configs on a coarse Duffing grid.
  MdofFrfPlant plant(duffing_preset());
  const ExcitationGrid grid{{1.0, 4.0}, {5.0, 6.0, 7.0}};
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> lg(-1.0, 2.5), frac(0.2, 0.9), flo(-3.0, 0.0);
  SweepOptions sweep;
  sweep.jobs = 1;
  int checked = 0;
  for (int s = 0; s < 20; ++s) {
    auto cfg = scalar_config(std::pow(10.0, lg(gen)), std::pow(10.0, lg(gen) - 1.0), frac(gen),
                             3.0 * frac(gen), std::pow(10.0, flo(gen)));
    cfg.max_iterations = 6;
    const auto h = tune(plant, grid, cfg, IntegratorConfig{}, sweep);
    for (const auto& r : h.records) {
      EXPECT_GE(r.theta_p[0], cfg.theta_min_p[0]);
      EXPECT_GE(r.theta_d[0], cfg.theta_min_d[0]);
      ++checked;
    }
    EXPECT_GE(h.final_gains.theta_p(0, 0), cfg.theta_min_p[0]);
  }
  EXPECT_GT(checked, 20);
}

TEST(Tune, DuffingPresetReachesTargets) {
  const auto sc = load_scenario(std::string(FRFVIB_CONFIG_DIR) + "/duffing-nonlinear-36.json");
  MdofFrfPlant plant(*sc.mdof, sc.probe);
  std::vector<PdGains> visited;
  const auto h = tune(plant, sc.grid, sc.adaptation, sc.integrator, sc.sweep, std::nullopt,
                      [&](const IterationRecord& r) { visited.push_back(PdGains::diagonal(r.theta_p, r.theta_d)); });
  ASSERT_EQ(h.status, TuningStatus::Converged) << h.message;
  const auto& last = h.records.back();
  EXPECT_NEAR(last.fnorm_x1[0], 0.5, 0.05);
  EXPECT_NEAR(last.fnorm_x2[0], 3.0, 0.3);
  EXPECT_NEAR(h.final_gains.theta_p(0, 0), 7.1, 0.5 * 7.1);
  EXPECT_NEAR(h.final_gains.theta_d(0, 0), 2.6, 0.5 * 2.6);
  const double f0 = h.records.front().fnorm_x1[0];
  EXPECT_GT(f0, sc.adaptation.delta_x1[0]);
  EXPECT_LT(last.fnorm_x1[0], f0);
  EXPECT_LE(last.fnorm_x1[0] / f0, 0.45);
  // Every visited gain keeps the loop convergent.
  for (std::size_t i = 0; i < visited.size(); i += 3) {
    EXPECT_TRUE(plant.probe_convergence(visited[i], sc.grid, sc.integrator).convergent) << "iteration " << i;
  }
  EXPECT_TRUE(plant.probe_convergence(h.final_gains, sc.grid, sc.integrator).convergent);
}

TEST(MdofPlant, ChannelsAndNaturalFrequency) {
  MdofFrfPlant plant(duffing_preset());
  EXPECT_NEAR(plant.natural_frequency(), 6.0, 1e-12);
  const auto p = plant.sweep_problem(PdGains::zero(1));
  EXPECT_EQ(p.channels, (std::vector<std::string>{"x1", "x2"}));
}
