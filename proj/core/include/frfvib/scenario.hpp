#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "frfvib/convergence.hpp"
#include "frfvib/frf.hpp"
#include "frfvib/satellite_scenario.hpp"
#include "frfvib/tuner.hpp"

namespace frfvib {

enum class SystemKind { Mdof, Satellite };

struct ConvergenceCheckConfig {
  // mdof
  std::vector<double> initial_positions{-3.0, 3.0, 5.0};
  double amplitude = 2.0;
  double omega = 6.0;
  double horizon = 60.0;
  double tolerance = 1e-3;
  std::optional<StateBox> region;
  int samples = 256;
  // satellite, torque-free
  Vec3 q_initial = Vec3(0.1, -0.2, 0.3);
  Vec3 omega_initial = Vec3(0.1, -0.05, 0.2);
  double duration = 100.0;
  double step_h = 1e-3;
};

struct SimulateConfig {
  double amplitude = 6.0;  // mdof
  double omega = 6.0;      // mdof
  double duration = 60.0;  // mdof
  int record_every = 1;
};

struct RwSpec {
  std::vector<double> harmonics{1.0, 2.0, 5.8};
  std::vector<double> amplitudes{1e-4, 5e-5, 2e-5};
  double wheel_speed = 1.0;
  WheelSpeedUnit unit = WheelSpeedUnit::RevPerSecond;
};

struct ScenarioConfig {
  std::string name;
  std::uint64_t seed = 0;
  SystemKind kind = SystemKind::Mdof;
  std::optional<MdofSystem> mdof;
  std::optional<SatelliteScenario> satellite;
  RwSpec rw;
  ExcitationGrid grid;
  IntegratorConfig integrator;
  AdaptationConfig adaptation;
  ProbeConfig probe;
  SatelliteProbeConfig satellite_probe;
  SweepOptions sweep;
  ConvergenceCheckConfig check;
  SimulateConfig simulate;
  RmsComparisonConfig comparison;
  std::string output_directory;
  std::string snapshot;  // normalized JSON of the parsed document

  int axes() const;
  /// Phases are drawn from `seed`, one set per body axis.
  RwDisturbanceModel rw_model() const;
};

/// Strict parse: unknown keys, wrong types and invalid values throw ConfigError
/// naming the offending key path.
ScenarioConfig parse_scenario(const std::string& text);

ScenarioConfig load_scenario(const std::filesystem::path& path);

}  // namespace frfvib
