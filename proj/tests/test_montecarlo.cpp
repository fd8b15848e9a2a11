// Sampling, exact enumeration and seeded simulation.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "qualest/error.hpp"
#include "qualest/estimators.hpp"
#include "qualest/montecarlo.hpp"

using namespace qualest;
using Catch::Approx;

namespace {

const Population kToy({1, 0, 1, 1, 0, 0, 1, 0, 1, 0}, {12, 9, 15, 11, 7, 10, 14, 8, 13, 6});

}  // namespace

TEST_CASE("stream generator", "[mc]") {
  StreamRng a(1, 0), b(1, 0), c(1, 1), d(2, 0);
  const auto first = a();
  CHECK(first == b());
  CHECK(first != c());
  CHECK(first != d());
  StreamRng u(9, 9);
  for (int i = 0; i < 10000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    CHECK(u.below(7) < 7);
  }
}

TEST_CASE("draw_srswor", "[mc]") {
  StreamRng rng(4, 0);
  SECTION("full sample is a permutation") {
    const auto s = draw_srswor(kToy, 10, rng);
    std::set<std::size_t> seen(s.indices.begin(), s.indices.end());
    CHECK(seen.size() == 10);
    CHECK(s.p == 0.5);
  }
  SECTION("inclusion probability n/N") {
    std::vector<int> hits(10, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
      for (auto idx : draw_srswor(kToy, 4, rng).indices) ++hits[idx];
    }
    for (int h : hits) CHECK(std::abs(h / double(draws) - 0.4) < 0.01);
  }
  SECTION("every subset equally likely") {
    const Population four({1, 0, 1, 0}, {1, 2, 3, 4});
    std::map<std::pair<std::size_t, std::size_t>, int> counts;
    const int draws = 60000;
    for (int i = 0; i < draws; ++i) {
      auto idx = draw_srswor(four, 2, rng).indices;
      std::sort(idx.begin(), idx.end());
      ++counts[{idx[0], idx[1]}];
    }
    REQUIRE(counts.size() == 6);
    const double expected = draws / 6.0;
    const double sd = std::sqrt(draws * (1.0 / 6) * (5.0 / 6));
    for (const auto& [subset, count] : counts) CHECK(std::abs(count - expected) < 4 * sd);
  }
  SECTION("sample size bounds") {
    CHECK_THROWS_AS(draw_srswor(kToy, 11, rng), Error);
    CHECK_THROWS_AS(draw_srswor(kToy, 1, rng), Error);
  }
}

TEST_CASE("binomial", "[mc]") {
  CHECK(binomial(10, 4) == 210);
  CHECK(binomial(40, 11) == 2311801440ULL);
  CHECK(binomial(5, 0) == 1);
  CHECK(binomial(3, 5) == 0);
  CHECK(binomial(200, 100) == std::numeric_limits<std::uint64_t>::max());
}

TEST_CASE("exact enumeration", "[mc]") {
  const Population four({1, 0, 1, 0}, {1, 2, 3, 4});
  const auto m4 = compute_moments(four);
  SECTION("variance of p on four units") {
    const auto r = enumerate_exact(four, 2, preset("p", m4));
    CHECK(r.samples_enumerated == 6);
    CHECK(r.exact_bias == Approx(0.0).margin(1e-15));
    CHECK(r.exact_mse == Approx(1.0 / 12.0).epsilon(1e-14));
  }
  SECTION("p and xbar are unbiased") {
    const auto m = compute_moments(kToy);
    for (std::size_t n = 2; n <= 10; ++n) {
      const auto p = enumerate_exact(kToy, n, [](const Sample& s) { return s.p; }, m.P);
      const auto x = enumerate_exact(kToy, n, [](const Sample& s) { return s.xbar; }, m.Xbar);
      CHECK(p.samples_enumerated == binomial(10, n));
      CHECK(std::abs(p.exact_bias) < 1e-12);
      CHECK(std::abs(x.exact_bias) < 1e-12);
      CHECK(p.exact_mse == Approx(sampling_factor(n, 10) * m.Sphi2).epsilon(1e-12).margin(1e-15));
    }
  }
  SECTION("ratio estimator by hand") {
    const auto r = enumerate_exact(four, 4, preset("t_s", m4));
    CHECK(r.samples_enumerated == 1);
    CHECK(r.exact_mse == Approx(0.0).margin(1e-30));
  }
  SECTION("cap") {
    try {
      (void)enumerate_exact(kToy, 5, preset("p", compute_moments(kToy)), EnumerationOptions{100});
      FAIL("expected enumeration-too-large");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::EnumerationTooLarge);
    }
  }
}

TEST_CASE("simulation agrees with enumeration", "[mc]") {
  const auto m = compute_moments(kToy);
  for (const char* name : {"p", "t_s", "t_N4"}) {
    const auto spec = preset(name, m);
    const auto exact = enumerate_exact(kToy, 4, spec);
    const auto mc = simulate(kToy, 4, spec, 50000, 77);
    CHECK(mc.replications == 50000);
    CHECK(std::abs(mc.empirical_mse - exact.exact_mse) < 4 * mc.mc_standard_error);
  }
}

TEST_CASE("simulation is reproducible", "[mc]") {
  const auto m = compute_moments(kToy);
  const auto spec = preset("t_s", m);
  const auto a = simulate(kToy, 4, spec, 20000, 123, {1});
  const auto b = simulate(kToy, 4, spec, 20000, 123, {4});
  const auto c = simulate(kToy, 4, spec, 20000, 123);
  CHECK(a.empirical_mse == b.empirical_mse);
  CHECK(a.empirical_bias == b.empirical_bias);
  CHECK(a.mc_standard_error == b.mc_standard_error);
  CHECK(to_json(a) == to_json(c));
  const auto d = simulate(kToy, 4, spec, 20000, 124);
  CHECK(d.empirical_mse != a.empirical_mse);
}

TEST_CASE("simulation arguments", "[mc]") {
  const auto m = compute_moments(kToy);
  CHECK_THROWS_AS(simulate(kToy, 4, preset("p", m), 99, 1), Error);
  CHECK_THROWS_AS(simulate(kToy, 11, preset("p", m), 1000, 1), Error);
}

TEST_CASE("result serialization", "[mc]") {
  const auto m = compute_moments(kToy);
  const auto mc = simulate(kToy, 4, preset("p", m), 1000, 8);
  const auto j = nlohmann::json::parse(to_json(mc));
  for (const char* key : {"replications", "empirical_bias", "empirical_mse", "mc_standard_error",
                          "degenerate_sample_count", "seed"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["seed"] == 8);
  CHECK(j["empirical_mse"].get<double>() == mc.empirical_mse);

  const auto ex = enumerate_exact(kToy, 3, preset("p", m));
  const auto je = nlohmann::json::parse(to_json(ex));
  CHECK(je["samples_enumerated"] == 120);
  CHECK(je["exact_mse"].get<double>() == ex.exact_mse);

  const auto csv = to_csv(ex);
  CHECK(csv.rfind("expected_value,exact_bias,exact_mse,samples_enumerated\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  CHECK(to_csv(mc).rfind("replications,", 0) == 0);
}
