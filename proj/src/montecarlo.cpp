#include "qualest/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "qualest/error.hpp"

namespace qualest {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : state_(mix64(seed + kGolden) ^ mix64(stream * kGolden + 0xD1B54A32D192ED03ULL)) {}

StreamRng::result_type StreamRng::operator()() noexcept {
  state_ += kGolden;
  return mix64(state_);
}

std::uint64_t StreamRng::below(std::uint64_t bound) noexcept {
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t r = (*this)();
    if (r >= threshold) return r % bound;
  }
}

double StreamRng::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

Sample draw_srswor(const Population& pop, std::size_t n, StreamRng& rng) {
  (void)sampling_factor(n, pop.size());
  std::vector<std::size_t> idx(pop.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(pop.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  return make_sample(pop, std::move(idx));
}

std::uint64_t binomial(std::uint64_t N, std::uint64_t n) noexcept {
  if (n > N) return 0;
  n = std::min(n, N - n);
  __extension__ using wide = unsigned __int128;
  wide result = 1;
  for (std::uint64_t i = 1; i <= n; ++i) {
    // result holds C(N - n + i - 1, i - 1); the division is exact.
    result = result * (N - n + i) / i;
    if (result > std::numeric_limits<std::uint64_t>::max()) {
      return std::numeric_limits<std::uint64_t>::max();
    }
  }
  return static_cast<std::uint64_t>(result);
}

namespace {

KnownPopulation known_from(const Population& pop, std::size_t n) {
  const auto dz = make_design(n, pop.size());
  const auto x = pop.x();
  KnownPopulation known;
  known.Xbar = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  known.design = dz;
  try {
    known.moments = compute_moments(pop);
  } catch (const Error&) {
    // Estimators that need moments report the missing input themselves.
  }
  return known;
}

double true_proportion(const Population& pop) {
  const auto phi = pop.phi();
  return static_cast<double>(std::count(phi.begin(), phi.end(), 1)) /
         static_cast<double>(phi.size());
}

}  // namespace

ExactResult enumerate_exact(const Population& pop, std::size_t n, const SampleStatistic& statistic,
                            double target, const EnumerationOptions& options) {
  (void)sampling_factor(n, pop.size());
  const std::uint64_t total = binomial(pop.size(), n);
  if (total > options.cap) {
    throw Error(ErrorKind::EnumerationTooLarge,
                fmt::format("C({}, {}) = {} subsets exceeds the cap of {}", pop.size(), n, total,
                            options.cap));
  }

  std::vector<std::size_t> combo(n);
  std::iota(combo.begin(), combo.end(), std::size_t{0});
  const std::size_t N = pop.size();

  double sum = 0.0;
  double sum_sq = 0.0;
  std::uint64_t count = 0;
  while (true) {
    const double t = statistic(make_sample(pop, combo));
    sum += t;
    sum_sq += (t - target) * (t - target);
    ++count;

    std::size_t i = n;
    while (i > 0 && combo[i - 1] == N - n + (i - 1)) --i;
    if (i == 0) break;
    ++combo[i - 1];
    for (std::size_t j = i; j < n; ++j) combo[j] = combo[j - 1] + 1;
  }

  ExactResult r;
  r.samples_enumerated = count;
  r.expected_value = sum / static_cast<double>(count);
  r.exact_bias = r.expected_value - target;
  r.exact_mse = sum_sq / static_cast<double>(count);
  return r;
}

ExactResult enumerate_exact(const Population& pop, std::size_t n, const EstimatorSpec& spec,
                            const EnumerationOptions& options) {
  const auto estimator = Estimator::prepare(spec, known_from(pop, n));
  return enumerate_exact(
      pop, n, [&](const Sample& s) { return estimator.evaluate(s).value; },
      true_proportion(pop), options);
}

McResult simulate(const Population& pop, std::size_t n, const EstimatorSpec& spec,
                  std::uint64_t replications, std::uint64_t seed,
                  const SimulationOptions& options) {
  if (replications < 100) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("need at least 100 replications, got {}", replications));
  }
  const auto estimator = Estimator::prepare(spec, known_from(pop, n));
  const double P = true_proportion(pop);

  std::vector<double> errors(replications);
  std::vector<char> degenerate(replications, 0);

  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = static_cast<unsigned>(
      std::clamp<std::uint64_t>(threads, 1, std::max<std::uint64_t>(1, replications / 1000)));

  auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t r = begin; r < end; ++r) {
      StreamRng rng(seed, r);
      const auto est = estimator.evaluate(draw_srswor(pop, n, rng));
      errors[r] = est.value - P;
      degenerate[r] = est.degenerate ? 1 : 0;
    }
  };

  if (threads == 1) {
    run_range(0, replications);
  } else {
    std::vector<std::exception_ptr> failures(threads);
    {
      std::vector<std::jthread> workers;
      const std::uint64_t chunk = (replications + threads - 1) / threads;
      for (unsigned t = 0; t < threads; ++t) {
        const std::uint64_t begin = t * chunk;
        const std::uint64_t end = std::min(replications, begin + chunk);
        workers.emplace_back([&, t, begin, end] {
          try {
            run_range(begin, end);
          } catch (...) {
            failures[t] = std::current_exception();
          }
        });
      }
    }
    for (const auto& failure : failures) {
      if (failure) std::rethrow_exception(failure);
    }
  }

  // Aggregate in replication order so the sums are bit-identical for any
  // thread count.
  const auto R = static_cast<double>(replications);
  double sum = 0.0;
  double sum_sq = 0.0;
  std::uint64_t flagged = 0;
  for (std::uint64_t r = 0; r < replications; ++r) {
    sum += errors[r];
    sum_sq += errors[r] * errors[r];
    flagged += static_cast<std::uint64_t>(degenerate[r]);
  }
  const double mse = sum_sq / R;
  double dev = 0.0;
  for (std::uint64_t r = 0; r < replications; ++r) {
    const double sq = errors[r] * errors[r] - mse;
    dev += sq * sq;
  }

  McResult out;
  out.replications = replications;
  out.empirical_bias = sum / R;
  out.empirical_mse = mse;
  out.mc_standard_error = std::sqrt(dev / (R - 1.0) / R);
  out.degenerate_sample_count = flagged;
  out.seed = seed;
  return out;
}

std::string to_json(const ExactResult& r) {
  nlohmann::ordered_json j;
  j["expected_value"] = r.expected_value;
  j["exact_bias"] = r.exact_bias;
  j["exact_mse"] = r.exact_mse;
  j["samples_enumerated"] = r.samples_enumerated;
  return j.dump();
}

std::string to_json(const McResult& r) {
  nlohmann::ordered_json j;
  j["replications"] = r.replications;
  j["empirical_bias"] = r.empirical_bias;
  j["empirical_mse"] = r.empirical_mse;
  j["mc_standard_error"] = r.mc_standard_error;
  j["degenerate_sample_count"] = r.degenerate_sample_count;
  j["seed"] = r.seed;
  return j.dump();
}

std::string to_csv(const ExactResult& r) {
  return fmt::format("expected_value,exact_bias,exact_mse,samples_enumerated\n{},{},{},{}\n",
                     r.expected_value, r.exact_bias, r.exact_mse, r.samples_enumerated);
}

std::string to_csv(const McResult& r) {
  return fmt::format(
      "replications,empirical_bias,empirical_mse,mc_standard_error,degenerate_sample_count,seed\n"
      "{},{},{},{},{},{}\n",
      r.replications, r.empirical_bias, r.empirical_mse, r.mc_standard_error,
      r.degenerate_sample_count, r.seed);
}

}  // namespace qualest
