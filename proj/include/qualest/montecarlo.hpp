#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>

#include "qualest/estimators.hpp"
#include "qualest/moments.hpp"

namespace qualest {

/// SplitMix64 stream keyed by (seed, stream index). Each replication owns its
/// own stream, so results do not depend on evaluation order or thread count.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  StreamRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform integer in [0, bound). Platform independent, unlike
  /// std::uniform_int_distribution.
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;

 private:
  std::uint64_t state_;
};

/// SRSWOR draw by partial Fisher-Yates shuffle.
[[nodiscard]] Sample draw_srswor(const Population& pop, std::size_t n, StreamRng& rng);

struct ExactResult {
  double expected_value = 0.0;
  double exact_bias = 0.0;
  double exact_mse = 0.0;
  std::uint64_t samples_enumerated = 0;
};

struct McResult {
  std::uint64_t replications = 0;
  double empirical_bias = 0.0;
  double empirical_mse = 0.0;
  double mc_standard_error = 0.0;
  std::uint64_t degenerate_sample_count = 0;
  std::uint64_t seed = 0;
};

struct EnumerationOptions {
  std::uint64_t cap = 2'000'000;
};

struct SimulationOptions {
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// C(N, n), saturating at UINT64_MAX.
[[nodiscard]] std::uint64_t binomial(std::uint64_t N, std::uint64_t n) noexcept;

using SampleStatistic = std::function<double(const Sample&)>;

/// Exact design expectation and MSE (around `target`) of any statistic, by
/// visiting every n-subset in lexicographic order.
[[nodiscard]] ExactResult enumerate_exact(const Population& pop, std::size_t n,
                                          const SampleStatistic& statistic, double target,
                                          const EnumerationOptions& options = {});

/// Same, for an estimator of P; known quantities are taken from `pop` itself.
[[nodiscard]] ExactResult enumerate_exact(const Population& pop, std::size_t n,
                                          const EstimatorSpec& spec,
                                          const EnumerationOptions& options = {});

[[nodiscard]] McResult simulate(const Population& pop, std::size_t n, const EstimatorSpec& spec,
                                std::uint64_t replications, std::uint64_t seed,
                                const SimulationOptions& options = {});

[[nodiscard]] std::string to_json(const ExactResult& r);
[[nodiscard]] std::string to_json(const McResult& r);
[[nodiscard]] std::string to_csv(const ExactResult& r);
[[nodiscard]] std::string to_csv(const McResult& r);

}  // namespace qualest
