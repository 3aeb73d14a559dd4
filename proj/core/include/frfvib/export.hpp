#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "frfvib/convergence.hpp"
#include "frfvib/frf.hpp"
#include "frfvib/integrator.hpp"
#include "frfvib/tuner.hpp"

namespace frfvib {

/// Round-trip formatting, 17 significant digits; "nan" for failed cells.
std::string format_number(double v);

/// First row: "amplitude\\omega" followed by the frequencies; then one row per amplitude.
void write_frf_csv(std::ostream& os, const FrfMatrix& frf);

/// One row per iteration. Wall-clock timing is left out so identical runs
/// produce identical files.
void write_history_csv(std::ostream& os, const TuningHistory& history);

std::string history_json(const TuningHistory& history);

/// Columns: t, state columns, input columns.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<std::string>& state_columns,
                          const std::vector<std::string>& input_columns);

std::string gains_json(const PdGains& gains);

/// Accepts {"theta_p": x, "theta_d": y} with scalars, diagonal lists or full
/// matrices. Throws ConfigError.
PdGains parse_gains_json(const std::string& text, int dim);

std::string jacobian_report_json(const JacobianReport& report);

std::string convergence_report_json(const ConvergenceReport& report);

}  // namespace frfvib
