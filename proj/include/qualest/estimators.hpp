#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qualest/moments.hpp"
#include "qualest/theory.hpp"

namespace qualest {

enum class Family {
  MeanPerUnit,       // p
  Ratio,             // p Xbar / xbar
  GsRepresentative,  // p + h (xbar / Xbar - 1)
  NsFamily,          // [q1 p + q2 (Xbar - xbar)] * power-exponential multiplier
  NClass,            // d1 p * multiplier + d2 xbar + (1 - d1 - d2) Xbar
  NqClass,           // d1 p * multiplier
  AdaptiveN,         // NClass with weights estimated from the drawn sample
};

[[nodiscard]] std::string_view to_string(Family family) noexcept;

/// Shape of the multiplier (Xbar/xbar)^alpha exp(eta (Xbar - xbar) / (eta (Xbar + xbar) + 2 lambda)).
struct NShape {
  double alpha = 0.0;
  double eta = 0.0;
  double lambda = 1.0;
};

/// Shape of the t_NS multiplier; `a` and `b` transform x to a x + b.
struct NsShape {
  double alpha = 1.0;
  double beta = 0.0;
  double a = 1.0;
  double b = 0.0;
};

using Shape = std::variant<std::monostate, NShape, NsShape>;

struct FixedWeights {
  std::vector<double> values;
};
struct OptimalFromPopulation {};
struct EstimatedFromSample {};

using WeightMode = std::variant<FixedWeights, OptimalFromPopulation, EstimatedFromSample>;

struct EstimatorSpec {
  std::string name;
  Family family = Family::MeanPerUnit;
  Shape shape;
  WeightMode weights = FixedWeights{};
};

/// Population quantities an estimator is allowed to use. Xbar is always known;
/// moments and design are needed only for population-optimal weights, and the
/// design alone for sample-estimated weights.
struct KnownPopulation {
  double Xbar = 0.0;
  std::optional<PopulationMoments> moments;
  std::optional<Design> design;

  [[nodiscard]] static KnownPopulation auxiliary_only(double Xbar) { return {Xbar, {}, {}}; }
  [[nodiscard]] static KnownPopulation full(const PopulationMoments& m, const Design& dz) {
    return {m.Xbar, m, dz};
  }
};

struct Estimate {
  double value = 0.0;
  /// Set when an adaptive estimator fell back to p because the sample could
  /// not support its weight estimates.
  bool degenerate = false;
};

/// An estimator with its weights resolved against the known population, ready
/// to be evaluated on many samples.
class Estimator {
 public:
  [[nodiscard]] static Estimator prepare(const EstimatorSpec& spec, const KnownPopulation& known);

  [[nodiscard]] Estimate evaluate(const Sample& sample) const;
  [[nodiscard]] const EstimatorSpec& spec() const noexcept { return spec_; }
  [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }

 private:
  Estimator() = default;

  EstimatorSpec spec_;
  double Xbar_ = 0.0;
  double f_ = 0.0;
  std::optional<ExpansionConstantsN> n_constants_;
  std::vector<double> weights_;
};

[[nodiscard]] double eval_estimate(const EstimatorSpec& spec, const Sample& sample,
                                   const KnownPopulation& known);
[[nodiscard]] Estimate eval_adaptive(const EstimatorSpec& spec, const Sample& sample,
                                     const KnownPopulation& known);

/// Sample analogues of the population moments (divisor n - 1).
struct SampleStats {
  double p = 0.0;
  double xbar = 0.0;
  double s_phi2 = 0.0;
  double s_x2 = 0.0;
  double rho = 0.0;
};

/// Returns nullopt when the sample has constant phi or constant x.
[[nodiscard]] std::optional<SampleStats> sample_stats(const Sample& sample);

/// Optimal t_N weights with P, Cphi, Cx, rho replaced by their sample
/// analogues (Cx is taken relative to the known Xbar). Throws SingularSystem
/// when the estimated surface is singular.
[[nodiscard]] std::array<double, 2> adaptive_weights(const SampleStats& stats, double Xbar,
                                                     double f, const ExpansionConstantsN& c);

/// First-order theory for the estimator described by `spec`.
[[nodiscard]] TheoryResult theory_for(const EstimatorSpec& spec, const PopulationMoments& m,
                                      const Design& dz);

/// Preset names in table order: p, t_s, t_GS, t_NS, t_N, t_N1..t_N8, t_NQ1..t_NQ9, t_Nadapt.
[[nodiscard]] const std::vector<std::string>& preset_names();
/// Lookup ignores underscores, so "tN3" and "t_N3" are the same preset.
[[nodiscard]] bool is_preset(std::string_view name);
/// Resolves a preset; shapes that reference rho, Cphi, Cx or Xbar take them from `m`.
[[nodiscard]] EstimatorSpec preset(std::string_view name, const PopulationMoments& m);

}  // namespace qualest
