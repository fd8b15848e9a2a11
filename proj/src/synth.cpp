#include "qualest/synth.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "qualest/error.hpp"
#include "qualest/montecarlo.hpp"

namespace qualest {

namespace {

void center(std::vector<double>& z, std::size_t begin, std::size_t end) {
  if (begin == end) return;
  double mean = 0.0;
  for (std::size_t i = begin; i < end; ++i) mean += z[i];
  mean /= static_cast<double>(end - begin);
  for (std::size_t i = begin; i < end; ++i) z[i] -= mean;
}

}  // namespace

Population synthesize(const MomentTargets& t, std::uint64_t seed) {
  if (t.N < 2) throw Error(ErrorKind::InfeasibleTargets, "N must be at least 2");
  if (!(t.P > 0.0 && t.P < 1.0)) {
    throw Error(ErrorKind::InfeasibleTargets, fmt::format("P = {} outside (0, 1)", t.P));
  }
  const double NP = static_cast<double>(t.N) * t.P;
  const auto A = static_cast<std::size_t>(std::llround(NP));
  if (std::abs(NP - static_cast<double>(A)) > 0.5 || A == 0 || A == t.N) {
    throw Error(ErrorKind::InfeasibleTargets,
                fmt::format("N P = {} does not give an attribute count strictly inside (0, N)", NP));
  }
  if (!(t.rho > -1.0 && t.rho < 1.0)) {
    throw Error(ErrorKind::InfeasibleTargets, fmt::format("rho = {} must lie in (-1, 1)", t.rho));
  }
  if (!(t.Xbar > 0.0) || !(t.Cx > 0.0)) {
    throw Error(ErrorKind::InfeasibleTargets,
                "Xbar and Cx must be positive so every x can stay positive");
  }

  const std::size_t N = t.N;
  std::vector<int> phi(N, 0);
  std::fill(phi.begin(), phi.begin() + static_cast<std::ptrdiff_t>(A), 1);

  StreamRng rng(seed, 0);
  std::vector<double> z(N);
  for (auto& v : z) v = 2.0 * rng.uniform() - 1.0;
  center(z, 0, A);
  center(z, A, N);

  double within = 0.0;
  for (double v : z) within += v * v;
  if (within == 0.0) {
    throw Error(ErrorKind::InfeasibleTargets,
                "groups too small for within-group spread; only |rho| = 1 is reachable");
  }

  // With c = phi - A/N centered, sum(c z) = 0, so
  //   rho^2 = gap^2 S_cc / (gap^2 S_cc + within).
  const double Scc = static_cast<double>(A) * static_cast<double>(N - A) / static_cast<double>(N);
  const double gap = std::copysign(std::sqrt(t.rho * t.rho * within / ((1.0 - t.rho * t.rho) * Scc)),
                                   t.rho);

  const double share = static_cast<double>(A) / static_cast<double>(N);
  std::vector<double> raw(N);
  for (std::size_t i = 0; i < N; ++i) raw[i] = gap * (phi[i] - share) + z[i];

  double ss = 0.0;
  for (double v : raw) ss += v * v;
  const double sd = std::sqrt(ss / static_cast<double>(N - 1));
  const double scale = t.Cx * t.Xbar / sd;

  std::vector<double> x(N);
  for (std::size_t i = 0; i < N; ++i) x[i] = t.Xbar + scale * raw[i];

  const double lowest = *std::min_element(x.begin(), x.end());
  if (!(lowest > 0.0)) {
    throw Error(ErrorKind::InfeasibleTargets,
                fmt::format("targets force a non-positive x value ({}); lower Cx", lowest));
  }
  return Population(std::move(phi), std::move(x));
}

}  // namespace qualest
