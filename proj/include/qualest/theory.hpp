#pragma once

#include <array>
#include <optional>
#include <vector>

#include "qualest/moments.hpp"

namespace qualest {

/// Taylor constants of the t_N multiplier (1+e)^(-alpha) * exp(-k e / (1 + k e)):
///   multiplier = 1 - a e + d e^2 + O(e^3).
struct ExpansionConstantsN {
  double alpha = 0.0;
  double eta = 0.0;
  double lambda = 0.0;
  double k = 0.0;
  double a = 0.0;
  double d = 0.0;
};

/// Taylor constants of the t_NS multiplier
///   [(cX+g)/(cx+g)]^alpha * exp(beta * ((cX+g)-(cx+g)) / ((cX+g)+(cx+g)))
/// with theta = cX / (cX + g): multiplier = 1 - B e + A e^2 + O(e^3).
struct ExpansionConstantsNS {
  double alpha = 0.0;
  double beta = 0.0;
  double a_const = 0.0;
  double b_const = 0.0;
  double theta = 0.0;
  double B = 0.0;
  double A = 0.0;
};

/// MSE(w) = constant - 2 (linear . w) + w' H w over a weight pair w = (w1, w2),
/// with H = [[h11, h12], [h12, h22]].
struct QuadraticMseForm {
  double constant = 0.0;
  std::array<double, 2> linear{};
  double h11 = 0.0;
  double h12 = 0.0;
  double h22 = 0.0;

  [[nodiscard]] double value(double w1, double w2) const noexcept;
  [[nodiscard]] std::array<double, 2> gradient(double w1, double w2) const noexcept;
  /// Minimum value given the stationary point: constant - linear . w*.
  [[nodiscard]] double minimum_at(const std::array<double, 2>& w) const noexcept;
};

struct TheoryResult {
  double bias = 0.0;
  double mse = 0.0;
  /// Optimal or fixed weights that produced `mse`; empty when the estimator has none.
  std::vector<double> weights;
  std::optional<double> pre;
};

[[nodiscard]] ExpansionConstantsN constants_n(double alpha, double eta, double lambda, double Xbar);
[[nodiscard]] ExpansionConstantsNS ns_constants(double alpha, double beta, double a_const,
                                                double b_const, double Xbar);

/// Variance of the sample proportion, f P^2 Cphi^2.
[[nodiscard]] TheoryResult var_p(const PopulationMoments& m, const Design& dz);

/// Ratio estimator p * Xbar / xbar.
[[nodiscard]] TheoryResult ratio_theory(const PopulationMoments& m, const Design& dz);

/// Minimum MSE of the H(p, u) class, attained by p + h (u - 1) with
/// h* = -P rho Cphi / Cx (returned as weights[0]).
[[nodiscard]] TheoryResult gs_min_theory(const PopulationMoments& m, const Design& dz);

/// First-order MSE of p + h (xbar/Xbar - 1) for a fixed h.
[[nodiscard]] TheoryResult gs_fixed_theory(const PopulationMoments& m, const Design& dz, double h);

/// MSE surface of t_NS over (q1, q2), assembled from M1..M5 and Delta1..Delta5.
[[nodiscard]] QuadraticMseForm ns_quadratic(const PopulationMoments& m, const Design& dz,
                                            const ExpansionConstantsNS& c);
/// Closed-form minimum plus normal-equation weights (q1*, q2*) and the bias at them.
[[nodiscard]] TheoryResult ns_theory(const PopulationMoments& m, const Design& dz,
                                     const ExpansionConstantsNS& c);
[[nodiscard]] double ns_bias(const PopulationMoments& m, const Design& dz,
                             const ExpansionConstantsNS& c, double q1, double q2);

/// MSE(d1, d2) = (1 - 2 d1) b^2 + d1^2 M + d2^2 N + 2 d1 d2 O; h11 = M, h22 = N, h12 = O.
[[nodiscard]] QuadraticMseForm tn_quadratic(const PopulationMoments& m, const Design& dz,
                                            const ExpansionConstantsN& c);

/// Solves H w = linear. For the t_N surface this is d1* = b^2 N / (MN - O^2),
/// d2* = -b^2 O / (MN - O^2). Throws SingularSystem when MN - O^2 <= 1e-12 |MN|.
[[nodiscard]] std::array<double, 2> tn_optimal_weights(const QuadraticMseForm& q);

/// P^2 (1-R)^2 f Cphi^2 (1-rho^2) / [(1-R)^2 + f Cphi^2 (1-rho^2)]. Weights are
/// left empty because the minimum is the same for every shape.
[[nodiscard]] TheoryResult tn_min_mse(const PopulationMoments& m, const Design& dz);

/// The same minimum reached by solving the quadratic for a specific shape:
/// b^2 (1 - d1*). Weights hold (d1*, d2*), bias is evaluated there.
[[nodiscard]] TheoryResult tn_min_via_weights(const PopulationMoments& m, const Design& dz,
                                              const ExpansionConstantsN& c);

/// First-order MSE and bias of t_N at fixed (d1, d2).
[[nodiscard]] TheoryResult tn_fixed_theory(const PopulationMoments& m, const Design& dz,
                                           const ExpansionConstantsN& c, double d1, double d2);

[[nodiscard]] double tn_bias(const PopulationMoments& m, const Design& dz,
                             const ExpansionConstantsN& c, double d1, double d2);

/// d1 * p * multiplier with optimal d1* = 1 / (1 + V): MSE = P^2 V / (1 + V).
[[nodiscard]] TheoryResult tnq_theory(const PopulationMoments& m, const Design& dz,
                                      const ExpansionConstantsN& c);
[[nodiscard]] TheoryResult tnq_fixed_theory(const PopulationMoments& m, const Design& dz,
                                            const ExpansionConstantsN& c, double d1);

/// Percent relative efficiency, 100 * reference_mse / mse.
[[nodiscard]] double pre(double mse, double reference_mse);

}  // namespace qualest
