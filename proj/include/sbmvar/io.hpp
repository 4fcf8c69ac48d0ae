#pragma once

#include <map>
#include <string>
#include <vector>

#include "sbmvar/types.hpp"

namespace sbmvar {

/// FRED-style transformation codes: 1 identity, 2 first difference,
/// 5 100*dlog, 6 100*d2log. Output is shorter by the differencing order.
VectorXd apply_tcode(const VectorXd& series, int code);

/// Observations lost at the start of the sample for a given code.
int tcode_loss(int code);

struct VariableSpec {
  std::string name;
  int tcode = 1;
};

/// Load a CSV with a leading date column, select the named series, apply
/// tcodes, and trim everything to the common post-differencing sample.
TimeSeriesPanel load_panel(const std::string& csv_path,
                           const std::vector<VariableSpec>& variables);

struct RunConfig {
  VarConfig var;
  std::vector<VariableSpec> variables;
  std::string data_path;
  // forecasting
  int eval_start = 0;
  std::vector<int> horizons = {1, 4};
  std::vector<std::string> focus_vars;
  // calibration
  double target_clusters = 0.0;  // 0 = no calibration requested
};

/// Parse a JSON run configuration; errors report the offending field path.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& json_text);

/// Hash of the semantic fields of a configuration (hex string). Changes iff
/// a field that affects results changes.
std::string config_hash(const VarConfig& config);

/// Columnar on-disk draw storage: one binary file per component plus a
/// manifest.json recording dimensions, seed, and config hash. Loading
/// round-trips bit-exactly; a manifest/config hash mismatch only warns.
void save_draw_store(const DrawStore& store, const std::string& dir);
DrawStore load_draw_store(const std::string& dir,
                          const std::string& expected_config_hash = "");

}  // namespace sbmvar
