#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "curveshape/io.hpp"

namespace curveshape {

/// Run configuration. Every field can be set from a flat JSON config file
/// (keys as below) and overridden on the command line with the same name in
/// dash form, e.g. `--space-controls 40`.
struct RunConfig {
  MetricParams params;
  int space_degree = 3;
  int space_controls = 60;
  int reparam_degree = 3;
  int reparam_controls = 20;
  int time_degree = 2;
  int time_controls = 20;
  bool reparam = true;
  bool rotation = true;
  bool translation = true;
  /// Refit inputs to constant speed and disable reparametrization.
  bool unit_speed = false;
  std::string init = "circle";
  int alpha_starts = 4;
  int max_iter = 3000;
  double gtol = 1e-9;
  double barrier_gap = 1e-7;
  int steps = 20;  // discrete exponential steps
  int karcher_iter = 20;
  double karcher_tol = 1e-3;
  double smoothing = kDefaultSmoothing;
  std::string linkage = "average";
  std::string cache_dir;
  std::uint64_t seed = 1;
  int jobs = 1;
  bool verbose = false;
};

/// Sets one field by its config key; throws on unknown keys or type errors.
void apply_config_value(RunConfig& config, const std::string& key, const Json& value);
void apply_config_json(RunConfig& config, const Json& j);
Json config_to_json(const RunConfig& config);
std::vector<std::string> config_keys();

BvpOptions bvp_options(const RunConfig& config);
IvpOptions ivp_options(const RunConfig& config);
KarcherOptions karcher_options(const RunConfig& config);

struct LabeledCurves {
  std::vector<Curve> curves;
  std::vector<std::string> labels;
};

/// All `*.json` curves of a directory, sorted by file name; labels are the
/// file stems.
LabeledCurves load_curve_dir(const std::string& dir);

/// Label prefix before the last underscore, used as the group name.
std::string group_of(const std::string& label);

/// Unweighted energy breakdowns of straight-line paths between every pair,
/// after rigidly aligning the second curve to the first.
std::vector<EnergyBreakdown> calibration_breakdowns(const std::vector<Curve>& curves,
                                                    const SplineBasis& time_basis);

/// Entry point of the command-line tool. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace curveshape
