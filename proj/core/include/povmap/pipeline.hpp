#pragma once

// Stage drivers behind the command-line tool. Each returns a process exit
// code and writes human-readable progress to `log`; artifacts go to
// config.out_dir so any stage can be rerun from what earlier stages wrote.

#include <iosfwd>
#include <string>

#include "povmap/config.hpp"

namespace povmap {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Reports every problem as `error,<code>,<row>,<message>`.
int cmd_validate(const RunConfig& config, std::ostream& log);

// draws.csv, psrf.csv, run_config.txt. Warns (still exit 0) when any
// monitored R-hat reaches config.rhat_threshold.
int cmd_fit(const RunConfig& config, std::ostream& log);

// qmatrix_a<alpha>.csv for each configured alpha, from draws.csv.
int cmd_qmatrix(const RunConfig& config, std::ostream& log);

// point_a<alpha>.csv, flags_a<alpha>.csv, extremes_a<alpha>.csv.
int cmd_report(const RunConfig& config, std::ostream& log);

// Synthetic dataset into out_dir: households.csv, covariates.csv,
// population.csv, true_params.txt, true_fgt.csv and a ready config.txt.
int cmd_simulate(const RunConfig& config, std::ostream& log);

// Recomputes psrf.csv from draws.csv.
int cmd_diagnose(const RunConfig& config, std::ostream& log);

// Loads and aligns both input files; throws Error.
ModelData load_model_data(const RunConfig& config);

std::string artifact_path(const RunConfig& config, const std::string& name);

}  // namespace povmap
