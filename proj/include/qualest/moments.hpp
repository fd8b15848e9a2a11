#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace qualest {

/// A finite population of paired observations: a 0/1 attribute `phi` and a
/// real auxiliary `x`. Construction validates; the object is immutable.
class Population {
 public:
  Population(std::vector<int> phi, std::vector<double> x);

  [[nodiscard]] std::size_t size() const noexcept { return phi_.size(); }
  [[nodiscard]] std::span<const int> phi() const noexcept { return phi_; }
  [[nodiscard]] std::span<const double> x() const noexcept { return x_; }

  friend bool operator==(const Population&, const Population&) = default;

 private:
  std::vector<int> phi_;
  std::vector<double> x_;
};

/// SRSWOR design of n draws from N units, with the sampling factor
/// f = 1/n - 1/N that scales every first-order variance.
struct Design {
  std::size_t n = 0;
  std::size_t N = 0;
  double f = 0.0;
};

[[nodiscard]] double sampling_factor(std::size_t n, std::size_t N);
[[nodiscard]] Design make_design(std::size_t n, std::size_t N);

/// Population summaries consumed by the theory. Variances use divisor N - 1;
/// Cphi is Sphi / P, not Sphi / phi.
struct PopulationMoments {
  std::size_t N = 0;
  double P = 0.0;
  double Xbar = 0.0;
  double Sphi2 = 0.0;
  double Sx2 = 0.0;
  double Cphi = 0.0;
  double Cx = 0.0;
  double rho = 0.0;
  double R = 0.0;
  double b = 0.0;

  /// Builds moments from published summary statistics instead of raw data.
  /// Sphi2 and Sx2 are back-computed from the coefficients of variation.
  [[nodiscard]] static PopulationMoments from_summary(std::size_t N, double P, double Xbar,
                                                      double Cphi, double Cx, double rho);
};

[[nodiscard]] PopulationMoments compute_moments(const Population& pop);

/// Pearson correlation of the pairs. For 0/1 `phi` this is the point-biserial
/// correlation.
[[nodiscard]] double point_biserial(std::span<const int> phi, std::span<const double> x);

/// Units drawn from a population, with the values carried along so estimators
/// that need sample moments can compute them.
struct Sample {
  std::vector<std::size_t> indices;
  std::vector<int> phi;
  std::vector<double> x;
  double p = 0.0;
  double xbar = 0.0;

  [[nodiscard]] std::size_t size() const noexcept { return indices.size(); }
};

[[nodiscard]] Sample make_sample(const Population& pop, std::vector<std::size_t> indices);

// CSV with a mandatory header carrying columns `phi` and `x` (any order,
// other columns ignored).
[[nodiscard]] Population read_population_csv(std::istream& in);
[[nodiscard]] Population read_population_csv(const std::string& path);
void write_population_csv(std::ostream& out, const Population& pop);

}  // namespace qualest
