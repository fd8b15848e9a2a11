// Synthetic populations hitting target moments.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "qualest/error.hpp"
#include "qualest/moments.hpp"
#include "qualest/synth.hpp"

using namespace qualest;
using Catch::Approx;

namespace {

void check_hits(const MomentTargets& t, const Population& pop) {
  const auto m = compute_moments(pop);
  CHECK(pop.size() == t.N);
  CHECK(m.P == Approx(t.P).margin(0.5 / t.N));
  CHECK(m.Xbar == Approx(t.Xbar).epsilon(1e-12));
  CHECK(m.Cx == Approx(t.Cx).epsilon(1e-10));
  CHECK(m.rho == Approx(t.rho).margin(1e-10));
  CHECK(*std::min_element(pop.x().begin(), pop.x().end()) > 0.0);
}

}  // namespace

TEST_CASE("published moments", "[synth]") {
  const MomentTargets t{40, 0.525, 14.4, 0.308, 0.897};
  const auto pop = synthesize(t, 1);
  check_hits(t, pop);
  const auto m = compute_moments(pop);
  CHECK(m.P == 0.525);
  CHECK(std::count(pop.phi().begin(), pop.phi().end(), 1) == 21);
  // Cphi follows from P and N, close to the published 0.963.
  CHECK(m.Cphi == Approx(0.963).epsilon(0.005));
}

TEST_CASE("uncorrelated and negative targets", "[synth]") {
  check_hits({50, 0.3, 5.0, 0.2, 0.0}, synthesize({50, 0.3, 5.0, 0.2, 0.0}, 2));
  check_hits({30, 0.6, 20.0, 0.1, -0.7}, synthesize({30, 0.6, 20.0, 0.1, -0.7}, 2));
}

TEST_CASE("round trip through computed moments", "[synth][property]") {
  std::mt19937_64 gen(12);
  std::uniform_int_distribution<std::size_t> size(8, 400);
  std::uniform_real_distribution<double> prop(0.1, 0.9), mean(1, 50), cv(0.02, 0.3), corr(-0.95, 0.95);
  for (int i = 0; i < 200; ++i) {
    const std::size_t N = size(gen);
    MomentTargets t{N, prop(gen), mean(gen), cv(gen), corr(gen)};
    const auto A = std::llround(t.N * t.P);
    if (A == 0 || A == static_cast<long long>(N)) continue;
    check_hits(t, synthesize(t, static_cast<std::uint64_t>(i)));
  }
}

TEST_CASE("deterministic in the seed", "[synth]") {
  const MomentTargets t{40, 0.525, 14.4, 0.308, 0.897};
  CHECK(synthesize(t, 5) == synthesize(t, 5));
  CHECK_FALSE(synthesize(t, 5) == synthesize(t, 6));
}

TEST_CASE("infeasible targets", "[synth]") {
  const auto kind = [](const MomentTargets& t) {
    try {
      (void)synthesize(t, 1);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidArgument;
  };
  CHECK(kind({40, 0.0, 14.4, 0.3, 0.5}) == ErrorKind::InfeasibleTargets);
  CHECK(kind({40, 0.999, 14.4, 0.3, 0.5}) == ErrorKind::InfeasibleTargets);
  CHECK(kind({40, 0.5, 14.4, 0.3, 1.0}) == ErrorKind::InfeasibleTargets);
  CHECK(kind({40, 0.5, -1.0, 0.3, 0.5}) == ErrorKind::InfeasibleTargets);
  CHECK(kind({40, 0.5, 14.4, 0.0, 0.5}) == ErrorKind::InfeasibleTargets);
  // A large CV forces negative x.
  CHECK(kind({40, 0.5, 1.0, 3.0, 0.5}) == ErrorKind::InfeasibleTargets);
}
