// First-order theory: expansion constants, MSE surfaces, optimal weights.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <random>

#include "qualest/error.hpp"
#include "qualest/report.hpp"
#include "qualest/theory.hpp"
#include "test_support.hpp"

using namespace qualest;
using Catch::Approx;

namespace {

const auto kSetting = published_setting();
const auto& kM = kSetting.moments;
const auto& kDz = kSetting.design;

// Five-point central differences; h = 1e-3 keeps truncation near 1e-12.
double first_derivative(const std::function<double(double)>& g, double h = 1e-3) {
  return (-g(2 * h) + 8 * g(h) - 8 * g(-h) + g(-2 * h)) / (12 * h);
}
double second_derivative(const std::function<double(double)>& g, double h = 1e-3) {
  return (-g(2 * h) + 16 * g(h) - 30 * g(0) + 16 * g(-h) - g(-2 * h)) / (12 * h * h);
}

PopulationMoments MomentsWith(double rho) {
  return PopulationMoments::from_summary(40, 0.525, 14.4, 0.963, 0.308, rho);
}

}  // namespace

TEST_CASE("constants_n examples", "[theory]") {
  const auto c1 = constants_n(1, 0, 1, 123.0);
  CHECK(c1.k == 0.0);
  CHECK(c1.a == 1.0);
  CHECK(c1.d == 1.0);

  const auto c2 = constants_n(1, 1, 1, 14.4);
  CHECK(c2.k == Approx(0.467532).margin(5e-7));
  CHECK(c2.a == Approx(1.467532).margin(5e-7));

  const auto c3 = constants_n(0, 1, 0, -3.7);
  CHECK(c3.k == 0.5);
  CHECK(c3.a == 0.5);
  CHECK(c3.d == 0.375);

  CHECK_THROWS_AS(constants_n(1, 1, -14.4, 14.4), Error);
}

TEST_CASE("ns_constants examples", "[theory]") {
  const auto c1 = ns_constants(1, 0, 1, 0, 14.4);
  CHECK(c1.theta == 1.0);
  CHECK(c1.B == 1.0);
  CHECK(c1.A == 1.0);

  const auto c2 = ns_constants(0, 1, 1, 0, 14.4);
  CHECK(c2.theta == 1.0);
  CHECK(c2.B == 0.5);
  CHECK(c2.A == 0.375);
  // Independent check: multiplier exp(-e / (2 + e)).
  const auto g = [](double e) { return std::exp(-e / (2.0 + e)); };
  CHECK(-first_derivative(g) == Approx(0.5).margin(1e-9));
  CHECK(second_derivative(g) / 2 == Approx(0.375).margin(1e-9));

  const auto c3 = ns_constants(2.5, -1.3, 0, 1, 14.4);
  CHECK(c3.theta == 0.0);
  CHECK(c3.B == 0.0);
  CHECK(c3.A == 0.0);

  CHECK_THROWS_AS(ns_constants(1, 1, 1, -14.4, 14.4), Error);
}

TEST_CASE("expansion constants match numeric differentiation", "[theory][property]") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> alpha(-2, 2), eta(0, 3), lambda(0.1, 5), xbar(1, 20);
  std::uniform_real_distribution<double> beta(-2, 2), a(0.1, 3), b(0, 5);
  for (int i = 0; i < 100; ++i) {
    const double X = xbar(gen);
    const auto c = constants_n(alpha(gen), eta(gen), lambda(gen), X);
    const auto gn = [&](double e) {
      return std::pow(1.0 + e, -c.alpha) * std::exp(-c.k * e / (1.0 + c.k * e));
    };
    CHECK(std::abs(-first_derivative(gn) - c.a) < 1e-8);
    CHECK(std::abs(second_derivative(gn) / 2 - c.d) < 1e-8);

    // t_NS multiplier as a function of e = (xbar - Xbar) / Xbar.
    const auto s = ns_constants(alpha(gen), beta(gen), a(gen), b(gen), X);
    const auto gs = [&](double e) {
      const double pop = s.a_const * X + s.b_const;
      const double smp = s.a_const * X * (1.0 + e) + s.b_const;
      return std::pow(pop / smp, s.alpha) * std::exp(s.beta * (pop - smp) / (pop + smp));
    };
    CHECK(std::abs(-first_derivative(gs) - s.B) < 1e-8);
    CHECK(std::abs(second_derivative(gs) / 2 - s.A) < 1e-8);
  }
}

TEST_CASE("variance of p", "[theory]") {
  CHECK(var_p(kM, kDz).mse == Approx(0.0168468).margin(5e-8));
  CHECK(var_p(kM, kDz).bias == 0.0);
  CHECK(var_p(kM, make_design(40, 40)).mse == 0.0);
  const auto small = compute_moments(Population({1, 0, 1, 0}, {1, 2, 3, 4}));
  CHECK(var_p(small, make_design(2, 4)).mse == Approx(1.0 / 12.0).epsilon(1e-14));
}

TEST_CASE("ratio estimator theory", "[theory]") {
  const auto r = ratio_theory(kM, kDz);
  CHECK(r.mse == Approx(0.008904).margin(1e-6));
  // Cx = rho Cphi removes the bias.
  const auto m = PopulationMoments::from_summary(40, 0.525, 14.4, 0.963, 0.5 * 0.963, 0.5);
  CHECK(ratio_theory(m, kDz).bias == Approx(0.0).margin(1e-16));
  const auto census = ratio_theory(kM, make_design(40, 40));
  CHECK(census.mse == 0.0);
  CHECK(census.bias == 0.0);
}

TEST_CASE("H-class minimum", "[theory]") {
  const auto r = gs_min_theory(kM, kDz);
  CHECK(r.mse == Approx(0.003292).margin(1e-6));
  CHECK(r.weights.at(0) == Approx(-kM.P * kM.rho * kM.Cphi / kM.Cx));
  CHECK(gs_min_theory(MomentsWith(1.0), kDz).mse == 0.0);
  CHECK(gs_min_theory(MomentsWith(-1.0), kDz).mse == 0.0);
  CHECK(gs_min_theory(MomentsWith(0.0), kDz).mse == var_p(kM, kDz).mse);
  // h* minimizes the regression representative's MSE.
  const double h = r.weights[0];
  CHECK(gs_fixed_theory(kM, kDz, h).mse == Approx(r.mse).epsilon(1e-12));
  CHECK(gs_fixed_theory(kM, kDz, h * 1.01).mse > r.mse);
  CHECK(gs_fixed_theory(kM, kDz, h * 0.99).mse > r.mse);
}

TEST_CASE("t_NS normal equations", "[theory]") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> alpha(-2, 2), beta(-2, 2), a(0.2, 2), b(0, 3);
  int solved = 0;
  for (int i = 0; i < 100; ++i) {
    const auto [m, dz] = testing::random_moments(gen);
    const auto c = ns_constants(alpha(gen), beta(gen), a(gen), b(gen), m.Xbar);
    const auto q = ns_quadratic(m, dz, c);
    if (q.h11 * q.h22 - q.h12 * q.h12 <= 0.0) {
      CHECK_THROWS_AS(ns_theory(m, dz, c), Error);
      continue;
    }
    ++solved;
    const auto r = ns_theory(m, dz, c);
    const std::array<double, 2> w{r.weights[0], r.weights[1]};
    // Normal equations hold at (q1*, q2*).
    CHECK(q.h11 * w[0] + q.h12 * w[1] == Approx(q.linear[0]).epsilon(1e-10));
    CHECK(q.h12 * w[0] + q.h22 * w[1] == Approx(q.linear[1]).epsilon(1e-10).margin(1e-14));
    // Closed form agrees with the surface value at the solution.
    CHECK(q.value(w[0], w[1]) == Approx(r.mse).epsilon(1e-8));
  }
  CHECK(solved > 50);
}

TEST_CASE("t_NS minimum beats a surrounding grid", "[theory]") {
  const auto c = ns_constants(1, 0, 1, 0, kM.Xbar);
  const auto q = ns_quadratic(kM, kDz, c);
  const auto r = ns_theory(kM, kDz, c);
  const double best = q.value(r.weights[0], r.weights[1]);
  int worse = 0;
  for (int i = -50; i < 50; ++i) {
    for (int j = -50; j < 50; ++j) {
      const double v = q.value(r.weights[0] + i * 0.002, r.weights[1] + j * 0.002);
      if (v >= best - 1e-15) ++worse;
    }
  }
  CHECK(worse == 10000);
}

TEST_CASE("t_NS at the published setting", "[theory]") {
  const auto r = ns_theory(kM, kDz, ns_constants(1, 0, 1, 0, kM.Xbar));
  CHECK(std::isfinite(r.mse));
  CHECK(r.mse == Approx(0.0032828).margin(1e-7));
  // The published 0.01171 agrees with this minimum once the P^2 factor is
  // divided out, the same slip as the published H-class row.
  CHECK(r.mse / (kM.P * kM.P) == Approx(0.01171).epsilon(0.10));
}

TEST_CASE("t_N quadratic reduces to classical members", "[theory]") {
  const auto ratio = tn_quadratic(kM, kDz, constants_n(1, 0, 1, kM.Xbar));
  CHECK(ratio.value(1, 0) == Approx(ratio_theory(kM, kDz).mse).epsilon(1e-9));
  const auto mean = tn_quadratic(kM, kDz, constants_n(0, 0, 1, kM.Xbar));
  CHECK(mean.value(1, 0) == Approx(var_p(kM, kDz).mse).epsilon(1e-9));

  // M, N, O recomputed from their definitions.
  const double f = kDz.f, P = kM.P, X = kM.Xbar, Cp = kM.Cphi, Cx = kM.Cx, rho = kM.rho;
  const double b = P - X;
  const double M = b * b + P * P * f * (Cp * Cp + Cx * Cx - 2 * rho * Cp * Cx);
  const double N = X * X * f * Cx * Cx;
  const double O = P * X * f * (rho * Cp - Cx) * Cx;
  CHECK(ratio.h11 == Approx(M).epsilon(1e-14));
  CHECK(ratio.h22 == Approx(N).epsilon(1e-14));
  CHECK(ratio.h12 == Approx(O).epsilon(1e-14));
  CHECK(ratio.h11 == Approx(192.5245).margin(1e-4));
  CHECK(ratio.h22 == Approx(1.29649).margin(1e-5));
  CHECK(ratio.h12 == Approx(0.085299).margin(1e-6));
}

TEST_CASE("member reductions over random moments", "[theory][property]") {
  std::mt19937_64 gen(17);
  for (int i = 0; i < 200; ++i) {
    const auto [m, dz] = testing::random_moments(gen);
    const auto rel = [&](double a) {
      return dz.f * m.P * m.P *
             (m.Cphi * m.Cphi + a * a * m.Cx * m.Cx - 2 * a * m.rho * m.Cphi * m.Cx);
    };
    for (double a : {0.0, 1.0, m.rho * m.Cphi / m.Cx, -1.0}) {
      const auto q = tn_quadratic(m, dz, constants_n(a, 0, 1, m.Xbar));
      CHECK(q.value(1, 0) == Approx(rel(a)).margin(1e-14 * m.b * m.b));
    }
  }
}

TEST_CASE("t_N optimal weights", "[theory]") {
  SECTION("decoupled surface") {
    QuadraticMseForm q;
    q.constant = 4.0;
    q.linear = {4.0, 0.0};
    q.h11 = 5.0;
    q.h22 = 2.0;
    q.h12 = 0.0;
    const auto w = tn_optimal_weights(q);
    CHECK(w[0] == Approx(4.0 / 5.0));
    CHECK(w[1] == 0.0);
  }
  SECTION("published setting, a = 1") {
    const auto q = tn_quadratic(kM, kDz, constants_n(1, 0, 1, kM.Xbar));
    const auto w = tn_optimal_weights(q);
    CHECK(w[0] == Approx(0.99998).margin(1e-5));
    CHECK(w[1] == Approx(-0.06579).margin(1e-5));
    // Printed closed forms.
    const double det = q.h11 * q.h22 - q.h12 * q.h12;
    const double b2 = kM.b * kM.b;
    CHECK(w[0] == Approx(b2 * q.h22 / det).epsilon(1e-14));
    CHECK(w[1] == Approx(-b2 * q.h12 / det).epsilon(1e-14));
    // Central differences are exact on a quadratic, so a large step is fine.
    const double h = 1.0;
    const double gx = (q.value(w[0] + h, w[1]) - q.value(w[0] - h, w[1])) / (2 * h);
    const double gy = (q.value(w[0], w[1] + h) - q.value(w[0], w[1] - h)) / (2 * h);
    CHECK(std::hypot(gx, gy) < 1e-10);
  }
  SECTION("singular surface") {
    QuadraticMseForm q;
    q.h11 = 1.0;
    q.h22 = 4.0;
    q.h12 = 2.0;
    CHECK_THROWS_AS(tn_optimal_weights(q), Error);
  }
}

TEST_CASE("t_N minimum", "[theory]") {
  CHECK(tn_min_mse(kM, kDz).mse == Approx(0.00329).margin(2e-5));
  CHECK(tn_min_mse(MomentsWith(1.0), kDz).mse == 0.0);
  CHECK(tn_min_mse(MomentsWith(-1.0), kDz).mse == 0.0);

  const auto collapsed = PopulationMoments::from_summary(40, 0.5, 0.5, 1.0, 0.3, 0.5);
  try {
    (void)tn_min_mse(collapsed, kDz);
    FAIL("expected degenerate-class");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateClass);
  }
}

TEST_CASE("t_N minimum does not depend on the shape", "[theory][property]") {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> alpha(-2, 2), eta(-2, 2), lambda(0.1, 5);
  for (int i = 0; i < 100; ++i) {
    const auto [m, dz] = testing::random_moments(gen);
    const auto c = constants_n(alpha(gen), eta(gen), lambda(gen), m.Xbar);
    const double closed = tn_min_mse(m, dz).mse;
    const double via_weights = tn_min_via_weights(m, dz, c).mse;
    CHECK(via_weights == Approx(closed).epsilon(1e-10));
    const auto q = tn_quadratic(m, dz, c);
    CHECK(q.minimum_at(tn_optimal_weights(q)) == Approx(closed).epsilon(1e-6));
  }
}

TEST_CASE("t_NQ minimum", "[theory]") {
  const auto nq4 = tnq_theory(kM, kDz, constants_n(1, 1, 0, kM.Xbar));
  CHECK(nq4.mse == Approx(0.00609).margin(5e-6));
  CHECK(nq4.mse == Approx(0.00621).epsilon(0.02));

  const auto nq1 = tnq_theory(kM, kDz, constants_n(1, 1, 1, kM.Xbar));
  CHECK(nq1.mse == Approx(0.00623).margin(5e-6));

  const auto shrink = tnq_theory(kM, kDz, constants_n(0, 0, 1, kM.Xbar));
  const double v = kDz.f * kM.Cphi * kM.Cphi;
  CHECK(shrink.mse == Approx(kM.P * kM.P * v / (1 + v)).epsilon(1e-14));
  CHECK(shrink.mse < var_p(kM, kDz).mse);
  CHECK(shrink.weights.at(0) == Approx(1 / (1 + v)).epsilon(1e-14));
  // d1* minimizes the first-order surface.
  const auto c = constants_n(0, 0, 1, kM.Xbar);
  CHECK(tnq_fixed_theory(kM, kDz, c, shrink.weights[0]).mse == Approx(shrink.mse).epsilon(1e-12));
  CHECK(tnq_fixed_theory(kM, kDz, c, shrink.weights[0] + 0.01).mse > shrink.mse);
}

TEST_CASE("t_N bias", "[theory]") {
  const auto c_ratio = constants_n(1, 0, 1, kM.Xbar);
  CHECK(tn_bias(kM, kDz, c_ratio, 1, 0) == Approx(ratio_theory(kM, kDz).bias).epsilon(1e-14));
  const auto c_mean = constants_n(0, 0, 1, kM.Xbar);
  CHECK(tn_bias(kM, kDz, c_mean, 1, 0) == 0.0);
  CHECK(tn_bias(kM, make_design(40, 40), c_ratio, 0.9, 0.3) == Approx(-0.1 * kM.b).epsilon(1e-14));
}

TEST_CASE("percent relative efficiency", "[theory]") {
  CHECK(pre(0.3, 0.3) == 100.0);
  CHECK(pre(0.016848, 2 * 0.016848) == Approx(200.0).epsilon(1e-14));
  // Printed V(p) / printed t_N1 against the printed PRE of 362.81.
  CHECK(pre(0.01682, 0.061122) == Approx(362.8112).epsilon(0.005));
  CHECK_THROWS_AS(pre(0.0, 1.0), Error);
}

TEST_CASE("efficiency orderings", "[theory][property]") {
  std::mt19937_64 gen(41);
  for (int i = 0; i < 1000; ++i) {
    const auto [m, dz] = testing::random_moments(gen);
    const double ts = ratio_theory(m, dz).mse;
    const double gs = gs_min_theory(m, dz).mse;
    const double tn = tn_min_mse(m, dz).mse;
    CHECK(ts >= gs * (1 - 1e-12));
    CHECK(gs >= tn);
  }
  // Equality in the first ordering when Cx = rho Cphi.
  const auto m = PopulationMoments::from_summary(40, 0.525, 14.4, 0.963, 0.6 * 0.963, 0.6);
  CHECK(ratio_theory(m, kDz).mse == Approx(gs_min_theory(m, kDz).mse).epsilon(1e-12));
}
