#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fxlv/calibrator.hpp"

namespace fxlv {

// Exit codes shared by all commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainFailure = 1;  // validation/solver/pricing
inline constexpr int kExitParseFailure = 2;   // unreadable or malformed input

struct RunConfig {
  std::filesystem::path config_file;

  // [files]
  std::filesystem::path forward_curve;
  std::filesystem::path discount_curve;
  std::filesystem::path vols;
  std::filesystem::path deals;
  std::filesystem::path surface;  // optional pre-calibrated surface

  // [market]
  std::vector<std::string> selection;  // instrument allow-list entries
  std::optional<double> c0;            // absent -> 1Y ATM market vol

  // [surface]
  int time_pillar_count = 18;
  int state_pillar_count = 11;

  // [backend]
  int grid_half_states = 50;
  int mc_paths = 20000;
  std::uint64_t seed = 42;
  int max_gap_days = 3;
  PricerKind calibration_backend = PricerKind::grid;
  PricerKind european_backend = PricerKind::grid;

  // [solver]
  SolverSettings solver;

  // [converge]
  std::vector<int> grid_sizes{50, 100, 200};
  std::vector<int> path_counts{5000, 10000, 15000, 20000};

  // [output]
  std::filesystem::path out_dir = "out";
  bool grid_diagnostics = false;
  bool dump_paths = false;
};

// TOML-style key=value sections; flags override file values.
RunConfig load_run_config(const std::filesystem::path& file);
void write_resolved_config(const RunConfig& config, const std::filesystem::path& file);

int cmd_validate(const RunConfig& config);
int cmd_calibrate(const RunConfig& config, bool force);
int cmd_price(const RunConfig& config);
int cmd_converge(const RunConfig& config);

}  // namespace fxlv
