#include "qualest/theory.hpp"

#include <cmath>

#include <fmt/format.h>

#include "qualest/error.hpp"

namespace qualest {

double QuadraticMseForm::value(double w1, double w2) const noexcept {
  return constant - 2.0 * (linear[0] * w1 + linear[1] * w2) + h11 * w1 * w1 + 2.0 * h12 * w1 * w2 +
         h22 * w2 * w2;
}

std::array<double, 2> QuadraticMseForm::gradient(double w1, double w2) const noexcept {
  return {2.0 * (h11 * w1 + h12 * w2 - linear[0]), 2.0 * (h12 * w1 + h22 * w2 - linear[1])};
}

double QuadraticMseForm::minimum_at(const std::array<double, 2>& w) const noexcept {
  return constant - (linear[0] * w[0] + linear[1] * w[1]);
}

namespace {

void validate(const PopulationMoments& m) {
  if (!(m.P > 0.0 && m.P < 1.0)) {
    throw Error(ErrorKind::DegenerateAttribute, fmt::format("P = {} outside (0, 1)", m.P));
  }
  if (!(m.Cphi > 0.0) || !(m.Cx > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "coefficients of variation must be positive");
  }
  if (!(m.rho >= -1.0 && m.rho <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("rho = {} outside [-1, 1]", m.rho));
  }
}

// f (Cphi^2 + a^2 Cx^2 - 2 a rho Cphi Cx): relative variance of p times a
// multiplier whose linear coefficient is a.
double relative_variance(const PopulationMoments& m, const Design& dz, double a) {
  return dz.f * (m.Cphi * m.Cphi + a * a * m.Cx * m.Cx - 2.0 * a * m.rho * m.Cphi * m.Cx);
}

}  // namespace

ExpansionConstantsN constants_n(double alpha, double eta, double lambda, double Xbar) {
  const double denom = eta * Xbar + lambda;
  if (denom == 0.0) {
    throw Error(ErrorKind::SingularTransform,
                fmt::format("eta * Xbar + lambda = 0 (eta = {}, lambda = {})", eta, lambda));
  }
  ExpansionConstantsN c;
  c.alpha = alpha;
  c.eta = eta;
  c.lambda = lambda;
  c.k = eta * Xbar / (2.0 * denom);
  c.a = alpha + c.k;
  c.d = 1.5 * c.k * c.k + alpha * c.k + alpha * (alpha + 1.0) / 2.0;
  return c;
}

ExpansionConstantsNS ns_constants(double alpha, double beta, double a_const, double b_const,
                                  double Xbar) {
  const double denom = a_const * Xbar + b_const;
  if (denom == 0.0) {
    throw Error(ErrorKind::SingularTransform,
                fmt::format("a * Xbar + b = 0 (a = {}, b = {})", a_const, b_const));
  }
  ExpansionConstantsNS c;
  c.alpha = alpha;
  c.beta = beta;
  c.a_const = a_const;
  c.b_const = b_const;
  c.theta = a_const * Xbar / denom;
  c.B = c.theta * (alpha + beta / 2.0);
  c.A = c.theta * c.theta *
        (alpha * (alpha + 1.0) / 2.0 + alpha * beta / 2.0 + beta / 4.0 + beta * beta / 8.0);
  return c;
}

TheoryResult var_p(const PopulationMoments& m, const Design& dz) {
  validate(m);
  TheoryResult r;
  r.mse = dz.f * m.P * m.P * m.Cphi * m.Cphi;
  return r;
}

TheoryResult ratio_theory(const PopulationMoments& m, const Design& dz) {
  validate(m);
  TheoryResult r;
  r.mse = m.P * m.P * relative_variance(m, dz, 1.0);
  r.bias = dz.f * m.P * (m.Cx * m.Cx - m.rho * m.Cphi * m.Cx);
  return r;
}

TheoryResult gs_min_theory(const PopulationMoments& m, const Design& dz) {
  validate(m);
  TheoryResult r;
  r.mse = dz.f * m.P * m.P * m.Cphi * m.Cphi * (1.0 - m.rho * m.rho);
  r.weights = {-m.P * m.rho * m.Cphi / m.Cx};
  return r;
}

TheoryResult gs_fixed_theory(const PopulationMoments& m, const Design& dz, double h) {
  validate(m);
  TheoryResult r;
  r.mse = dz.f * (m.P * m.P * m.Cphi * m.Cphi + h * h * m.Cx * m.Cx +
                  2.0 * h * m.P * m.rho * m.Cphi * m.Cx);
  r.weights = {h};
  return r;
}

QuadraticMseForm ns_quadratic(const PopulationMoments& m, const Design& dz,
                              const ExpansionConstantsNS& c) {
  validate(m);
  const double f = dz.f;
  const double P2 = m.P * m.P;
  const double Cp = m.Cphi;
  const double Cx = m.Cx;
  const double rCC = m.rho * Cp * Cx;

  const double M1 = P2 * f * (Cp * Cp + c.B * c.B * Cx * Cx - 2.0 * c.B * rCC);
  const double M2 = m.Xbar * m.Xbar * f * Cx * Cx;
  const double M3 = P2 * f * (c.A * Cx * Cx - 2.0 * c.B * rCC);
  const double M4 = m.P * m.Xbar * f * (-c.B * Cx * Cx + rCC);
  const double M5 = m.Xbar * m.P * f * (-c.B * Cx * Cx);

  QuadraticMseForm q;
  q.constant = P2;
  q.h11 = P2 + M1 + 2.0 * M3;  // Delta1
  q.h12 = -M4 - M5;            // Delta2
  q.h22 = M2;                  // Delta3
  q.linear = {P2 + M3, -M5};   // Delta4, Delta5
  return q;
}

double ns_bias(const PopulationMoments& m, const Design& dz, const ExpansionConstantsNS& c,
               double q1, double q2) {
  return m.P * (q1 - 1.0) +
         dz.f * ((q2 * m.Xbar * c.B + q1 * m.P * c.A) * m.Cx * m.Cx -
                 q1 * m.P * c.B * m.rho * m.Cphi * m.Cx);
}

TheoryResult ns_theory(const PopulationMoments& m, const Design& dz, const ExpansionConstantsNS& c) {
  const auto q = ns_quadratic(m, dz, c);
  const double d1 = q.h11;
  const double d2 = q.h12;
  const double d3 = q.h22;
  const double d4 = q.linear[0];
  const double d5 = q.linear[1];
  const double det = d1 * d3 - d2 * d2;
  if (!(det > 1e-12 * std::abs(d1 * d3))) {
    throw Error(ErrorKind::SingularSystem,
                fmt::format("Delta1 Delta3 - Delta2^2 = {} is not positive", det));
  }
  TheoryResult r;
  r.mse = m.P * m.P - (d1 * d5 * d5 + d3 * d4 * d4 - 2.0 * d2 * d4 * d5) / det;
  const double q1 = (d3 * d4 - d2 * d5) / det;
  const double q2 = (d1 * d5 - d2 * d4) / det;
  r.weights = {q1, q2};
  r.bias = ns_bias(m, dz, c, q1, q2);
  return r;
}

QuadraticMseForm tn_quadratic(const PopulationMoments& m, const Design& dz,
                              const ExpansionConstantsN& c) {
  validate(m);
  const double b2 = m.b * m.b;
  QuadraticMseForm q;
  q.constant = b2;
  q.linear = {b2, 0.0};
  q.h11 = b2 + m.P * m.P * relative_variance(m, dz, c.a);
  q.h22 = m.Xbar * m.Xbar * dz.f * m.Cx * m.Cx;
  q.h12 = m.P * m.Xbar * dz.f * (m.rho * m.Cphi - c.a * m.Cx) * m.Cx;
  return q;
}

std::array<double, 2> tn_optimal_weights(const QuadraticMseForm& q) {
  if (q.h11 < 0.0 || q.h22 < 0.0) {
    throw Error(ErrorKind::SingularSystem, "MSE surface is not positive semidefinite");
  }
  const double det = q.h11 * q.h22 - q.h12 * q.h12;
  if (!(det > 1e-12 * std::abs(q.h11 * q.h22))) {
    throw Error(ErrorKind::SingularSystem,
                fmt::format("MN - O^2 = {} is not positive", det));
  }
  return {(q.linear[0] * q.h22 - q.linear[1] * q.h12) / det,
          (q.linear[1] * q.h11 - q.linear[0] * q.h12) / det};
}

TheoryResult tn_min_mse(const PopulationMoments& m, const Design& dz) {
  validate(m);
  if (m.b == 0.0) {
    throw Error(ErrorKind::DegenerateClass, "P equals Xbar, so the t_N class collapses");
  }
  const double one_minus_r2 = (1.0 - m.R) * (1.0 - m.R);
  const double resid = dz.f * m.Cphi * m.Cphi * (1.0 - m.rho * m.rho);
  const double denom = one_minus_r2 + resid;
  if (!(denom > 0.0)) {
    throw Error(ErrorKind::DegenerateClass, "(1 - R)^2 + f Cphi^2 (1 - rho^2) is not positive");
  }
  TheoryResult r;
  r.mse = m.P * m.P * one_minus_r2 * resid / denom;
  return r;
}

double tn_bias(const PopulationMoments& m, const Design& dz, const ExpansionConstantsN& c,
               double d1, double /*d2*/) {
  // d2 multiplies a zero-mean term.
  return (d1 - 1.0) * m.b +
         d1 * m.P * dz.f * (c.d * m.Cx * m.Cx - c.a * m.rho * m.Cphi * m.Cx);
}

TheoryResult tn_min_via_weights(const PopulationMoments& m, const Design& dz,
                                const ExpansionConstantsN& c) {
  if (m.b == 0.0) {
    throw Error(ErrorKind::DegenerateClass, "P equals Xbar, so the t_N class collapses");
  }
  const auto q = tn_quadratic(m, dz, c);
  const auto w = tn_optimal_weights(q);
  // b^2 (1 - d1*), with MN - O^2 - b^2 N expanded to avoid cancellation.
  const double shape = m.Cphi * m.Cphi + c.a * c.a * m.Cx * m.Cx -
                       2.0 * c.a * m.rho * m.Cphi * m.Cx;
  const double cross = m.rho * m.Cphi - c.a * m.Cx;
  const double K = q.h22 * m.P * m.P * dz.f * (shape - cross * cross);
  TheoryResult r;
  r.mse = q.constant * K / (q.constant * q.h22 + K);
  r.weights = {w[0], w[1]};
  r.bias = tn_bias(m, dz, c, w[0], w[1]);
  return r;
}

TheoryResult tn_fixed_theory(const PopulationMoments& m, const Design& dz,
                             const ExpansionConstantsN& c, double d1, double d2) {
  const auto q = tn_quadratic(m, dz, c);
  TheoryResult r;
  r.mse = q.value(d1, d2);
  r.weights = {d1, d2};
  r.bias = tn_bias(m, dz, c, d1, d2);
  return r;
}

TheoryResult tnq_fixed_theory(const PopulationMoments& m, const Design& dz,
                              const ExpansionConstantsN& c, double d1) {
  validate(m);
  const double V = relative_variance(m, dz, c.a);
  TheoryResult r;
  r.mse = m.P * m.P * ((d1 - 1.0) * (d1 - 1.0) + d1 * d1 * V);
  r.weights = {d1};
  r.bias = d1 * m.P * (1.0 + dz.f * (c.d * m.Cx * m.Cx - c.a * m.rho * m.Cphi * m.Cx)) - m.P;
  return r;
}

TheoryResult tnq_theory(const PopulationMoments& m, const Design& dz,
                        const ExpansionConstantsN& c) {
  validate(m);
  const double V = relative_variance(m, dz, c.a);
  auto r = tnq_fixed_theory(m, dz, c, 1.0 / (1.0 + V));
  // Closed form of the same minimum; avoids cancellation in (d1 - 1)^2 + d1^2 V.
  r.mse = m.P * m.P * V / (1.0 + V);
  return r;
}

double pre(double mse, double reference_mse) {
  if (!(mse > 0.0)) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("relative efficiency undefined for MSE {}", mse));
  }
  return 100.0 * reference_mse / mse;
}

}  // namespace qualest
