#pragma once

#include "core/error.hpp"
#include "core/error_harness.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wmspde {

/// Parameters of the convergence command.
struct StudyConfig {
  Axis axis = Axis::space;
  std::vector<int> ladder;  // empty: axis/dimension default
  Reference reference;      // d = 2 default is level 6, 2^12 steps
  int paths = 4;
  double beta = 1.0;
};

/// Parameters of the L0 invariant suite.
struct VerifyConfig {
  int paths = 100000;
  std::vector<double> p_values = {1.0, 2.0, 4.0};
  int steps = 32;
  std::vector<std::uint64_t> seeds = {101, 202};
  std::vector<int> sum_blocks = {1, 4, 16};
  bool holder_only = false;
};

/// Parameters of the Hoelder command (SPDE snapshots and the Brownian control).
struct HolderConfig {
  double gamma = 0.75;
  int level = 6;
  int time_log2 = 14;
  int m_min = 6;
  int m_max = 14;
  int seeds = 20;
  int brownian_m_min = 6;
  int brownian_m_max = 16;
  double lower = 0.35;
  double upper = 0.60;
  double brownian_lower = 0.40;
  double brownian_upper = 0.55;
};

struct RunConfig {
  /// dim, k, space_level, time_steps, mode, initial, master_seed, n_modes;
  /// scheme.gamma is the first entry of `gammas`.
  SchemeConfig scheme;
  std::vector<double> gammas;
  StudyConfig study;
  VerifyConfig verify;
  HolderConfig holder;
  std::vector<int> assemble_levels;  // empty: 1..3 in 1D, 1..3 in 2D
  int snapshots_log2 = -1;
  std::string output_dir = "out";
  int workers = 1;
  /// Test hook: perturbs one assembled mass entry before the oracle runs.
  bool corrupt_matrix = false;
};

/// Parses and validates a JSON document; missing fields take defaults and
/// unknown fields are rejected. Throws ErrorCode::config.
RunConfig parse_run_config(const std::string& json_text);
RunConfig default_run_config();
std::string run_config_json(const RunConfig& config);

/// Command-line overrides applied after the file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  bool dry_run = false;
};

void apply_overrides(RunConfig& config, const Overrides& overrides);

struct CommandOutcome {
  ErrorCode code = ErrorCode::ok;
  std::string report;
  std::vector<std::string> files;
};

CommandOutcome cmd_assemble_check(const RunConfig& config, bool dry_run = false);
CommandOutcome cmd_convergence(const RunConfig& config, bool dry_run = false);
CommandOutcome cmd_verify(const RunConfig& config, bool dry_run = false);
CommandOutcome cmd_holder(const RunConfig& config, bool dry_run = false);
CommandOutcome cmd_simulate(const RunConfig& config, bool dry_run = false);

/// Dispatch by name; exceptions are caught and mapped to the outcome code.
CommandOutcome run_command(const std::string& name, const RunConfig& config, bool dry_run);

/// 0 success, 1 validation failure, 2 numerical failure, 3 statistical alarm.
int exit_status(ErrorCode code);

/// Paths below which the verify suite only warns.
constexpr int kMinVerifyPaths = 1000;

/// Outcome of the Hoelder suite, also used by the acceptance tests.
struct HolderSummary {
  std::vector<double> spde_exponents;
  std::vector<double> brownian_exponents;
  double spde_mean = 0.0;
  double brownian_mean = 0.0;
  std::string csv;  // kind,seed,m,max_increment
};
HolderSummary holder_suite(const RunConfig& config);

}  // namespace wmspde
