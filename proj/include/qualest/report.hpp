#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qualest/moments.hpp"

namespace qualest {

struct TableRow {
  std::string name;
  double formula_mse = 0.0;
  double bias = 0.0;
  std::optional<double> printed_mse;
  std::optional<double> printed_pre;
  /// 100 * reference / formula_mse, with the formula V(p) as reference.
  double pre_vs_reference = 0.0;
  bool flagged = false;
  std::string note;
};

/// Published empirical setting: N = 40, n = 11, P = 0.525, Xbar = 14.4,
/// Cphi = 0.963, Cx = 0.308, rho = 0.897.
struct EmpiricalSetting {
  PopulationMoments moments;
  Design design;
};
[[nodiscard]] EmpiricalSetting published_setting();

struct ReproduceOptions {
  /// Attach the published MSE/PRE values and flag rows that disagree.
  bool attach_printed = true;
  /// Relative gap above which a row is flagged.
  double flag_threshold = 0.05;
};

/// The 22 rows V(p), t_s, t_GS, t_NS, t_N, t_N1..t_N8, t_NQ1..t_NQ9.
[[nodiscard]] std::vector<TableRow> reproduce_table(const PopulationMoments& m, const Design& dz,
                                                    const ReproduceOptions& options = {});

/// Renders "csv", "json" or "text". Byte-stable for fixed input.
[[nodiscard]] std::string emit(const std::vector<TableRow>& rows, std::string_view format);

}  // namespace qualest
