#include "qualest/report.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>
#include <json.hpp>

#include "qualest/error.hpp"
#include "qualest/estimators.hpp"
#include "qualest/theory.hpp"

namespace qualest {

namespace {

struct PublishedRow {
  std::string_view preset;
  std::string_view label;
  double mse;
  double pre;
};

// Values as printed in the published table, in its row order.
constexpr PublishedRow kPublished[] = {
    {"p", "V(p)", 0.061122, 100.00},
    {"t_s", "t_s", 0.32271, 189.3812},
    {"t_GS", "t_GS", 0.01190, 511.7912},
    {"t_NS", "t_NS", 0.01171, 518.9214},
    {"t_N", "t_N", 0.00329, 1856.8818},
    {"t_N1", "t_N1", 0.01682, 362.8112},
    {"t_N2", "t_N2", 0.00881, 687.2571},
    {"t_N3", "t_N3", 0.01191, 511.7912},
    {"t_N4", "t_N4", 0.02801, 216.3089},
    {"t_N5", "t_N5", 0.00881, 687.2763},
    {"t_N6", "t_N6", 0.02821, 216.3019},
    {"t_N7", "t_N7", 0.01681, 362.8229},
    {"t_N8", "t_N8", 0.00329, 1856.8818},
    {"t_NQ1", "t_NQ1", 0.00636, 960.8345},
    {"t_NQ2", "t_NQ2", 0.00631, 963.0277},
    {"t_NQ3", "t_NQ3", 0.00744, 820.9345},
    {"t_NQ4", "t_NQ4", 0.00621, 983.6847},
    {"t_NQ5", "t_NQ5", 0.02211, 276.3287},
    {"t_NQ6", "t_NQ6", 0.00622, 982.1553},
    {"t_NQ7", "t_NQ7", 0.01245, 490.7537},
    {"t_NQ8", "t_NQ8", 0.00151, 812.9560},
    {"t_NQ9", "t_NQ9", 0.02521, 242.0966},
};

double rel_gap(double value, double reference) {
  return std::abs(value - reference) / std::abs(reference);
}

std::string explain(const TableRow& row, const PopulationMoments& m, double printed_vp,
                    const TableRow& n1_row, double threshold) {
  const double printed = *row.printed_mse;
  if (row.name == "V(p)") {
    return fmt::format("printed value contradicts the printed t_N1 entry {} (= f P^2 Cphi^2)",
                       n1_row.printed_mse.value_or(0.0));
  }
  if (rel_gap(row.formula_mse / (m.P * m.P), printed) <= threshold) {
    return fmt::format("printed value matches this MSE divided by P^2 ({:.5f})",
                       row.formula_mse / (m.P * m.P));
  }
  if (row.printed_pre && rel_gap(100.0 * printed_vp / printed, *row.printed_pre) > threshold) {
    return fmt::format("printed MSE and printed PRE disagree (PRE implies MSE {:.5f})",
                       100.0 * printed_vp / *row.printed_pre);
  }
  return fmt::format("relative gap {:.1f}%", 100.0 * rel_gap(row.formula_mse, printed));
}

}  // namespace

EmpiricalSetting published_setting() {
  return {PopulationMoments::from_summary(40, 0.525, 14.4, 0.963, 0.308, 0.897),
          make_design(11, 40)};
}

std::vector<TableRow> reproduce_table(const PopulationMoments& m, const Design& dz,
                                      const ReproduceOptions& options) {
  std::vector<TableRow> rows;
  rows.reserve(std::size(kPublished));
  for (const auto& pub : kPublished) {
    const auto result = theory_for(preset(pub.preset, m), m, dz);
    TableRow row;
    row.name = std::string(pub.label);
    row.formula_mse = result.mse;
    row.bias = result.bias;
    if (options.attach_printed) {
      row.printed_mse = pub.mse;
      row.printed_pre = pub.pre;
    }
    rows.push_back(std::move(row));
  }

  const double reference = rows.front().formula_mse;
  for (auto& row : rows) row.pre_vs_reference = pre(row.formula_mse, reference);

  if (options.attach_printed) {
    const double printed_vp = kPublished[0].mse;
    const auto n1 = std::find_if(rows.begin(), rows.end(), [](const auto& r) { return r.name == "t_N1"; });
    for (auto& row : rows) {
      if (rel_gap(row.formula_mse, *row.printed_mse) > options.flag_threshold) {
        row.flagged = true;
        row.note = explain(row, m, printed_vp, *n1, options.flag_threshold);
      }
    }
  }
  return rows;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string optional_number(const std::optional<double>& v) {
  return v ? fmt::format("{}", *v) : std::string();
}

std::string emit_csv(const std::vector<TableRow>& rows) {
  std::string out = "name,formula_mse,bias,pre,printed_mse,printed_pre,flagged,note\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", csv_field(r.name), r.formula_mse, r.bias,
                       r.pre_vs_reference, optional_number(r.printed_mse),
                       optional_number(r.printed_pre), r.flagged ? "true" : "false",
                       csv_field(r.note));
  }
  return out;
}

std::string emit_json(const std::vector<TableRow>& rows) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["name"] = r.name;
    j["formula_mse"] = r.formula_mse;
    j["bias"] = r.bias;
    j["pre"] = r.pre_vs_reference;
    j["printed_mse"] = r.printed_mse ? nlohmann::ordered_json(*r.printed_mse) : nullptr;
    j["printed_pre"] = r.printed_pre ? nlohmann::ordered_json(*r.printed_pre) : nullptr;
    j["flagged"] = r.flagged;
    j["note"] = r.note;
    out.push_back(std::move(j));
  }
  return out.dump(2) + "\n";
}

std::string emit_text(const std::vector<TableRow>& rows) {
  std::string out = fmt::format("{:<8} {:>12} {:>12} {:>10} {:>12} {:>10}  {}\n", "estimator",
                                "mse", "bias", "pre", "printed", "printed_pre", "flag");
  for (const auto& r : rows) {
    out += fmt::format("{:<8} {:>12.6f} {:>12.6f} {:>10.2f} {:>12} {:>10}  {}\n", r.name,
                       r.formula_mse, r.bias, r.pre_vs_reference,
                       r.printed_mse ? fmt::format("{:.6f}", *r.printed_mse) : "-",
                       r.printed_pre ? fmt::format("{:.2f}", *r.printed_pre) : "-",
                       r.flagged ? "*" : "");
  }
  const auto flagged = std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.flagged; });
  if (flagged > 0) {
    out += fmt::format("\ndiscrepancies ({}):\n", flagged);
    for (const auto& r : rows) {
      if (r.flagged) out += fmt::format("  {:<8} {}\n", r.name, r.note);
    }
  }
  return out;
}

}  // namespace

std::string emit(const std::vector<TableRow>& rows, std::string_view format) {
  if (rows.empty()) throw Error(ErrorKind::InvalidArgument, "nothing to render");
  if (format == "csv") return emit_csv(rows);
  if (format == "json") return emit_json(rows);
  if (format == "text") return emit_text(rows);
  throw Error(ErrorKind::UnknownFormat, fmt::format("'{}' (expected csv, json or text)", format));
}

}  // namespace qualest
