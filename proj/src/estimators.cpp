#include "qualest/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <fmt/format.h>

#include "qualest/error.hpp"

namespace qualest {

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::MeanPerUnit: return "MeanPerUnit";
    case Family::Ratio: return "Ratio";
    case Family::GsRepresentative: return "GsRepresentative";
    case Family::NsFamily: return "NsFamily";
    case Family::NClass: return "NClass";
    case Family::NqClass: return "NqClass";
    case Family::AdaptiveN: return "AdaptiveN";
  }
  return "unknown";
}

namespace {

std::size_t fixed_weight_count(Family family) {
  switch (family) {
    case Family::MeanPerUnit:
    case Family::Ratio: return 0;
    case Family::GsRepresentative:
    case Family::NqClass: return 1;
    case Family::NsFamily:
    case Family::NClass:
    case Family::AdaptiveN: return 2;
  }
  return 0;
}

const NShape& n_shape(const EstimatorSpec& spec) {
  const auto* shape = std::get_if<NShape>(&spec.shape);
  if (!shape) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("estimator '{}' needs an (alpha, eta, lambda) shape", spec.name));
  }
  return *shape;
}

const NsShape& ns_shape(const EstimatorSpec& spec) {
  const auto* shape = std::get_if<NsShape>(&spec.shape);
  if (!shape) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("estimator '{}' needs an (alpha, beta, a, b) shape", spec.name));
  }
  return *shape;
}

double n_multiplier(const NShape& s, double Xbar, double xbar) {
  double ratio = 1.0;
  if (s.alpha != 0.0) {
    if (xbar == 0.0) throw Error(ErrorKind::ZeroSampleMean, "sample mean of x is zero");
    ratio = std::pow(Xbar / xbar, s.alpha);
  }
  double expo = 1.0;
  if (s.eta != 0.0) {
    const double denom = s.eta * (Xbar + xbar) + 2.0 * s.lambda;
    if (denom == 0.0) {
      throw Error(ErrorKind::SingularTransform, "eta (Xbar + xbar) + 2 lambda = 0 on this sample");
    }
    expo = std::exp(s.eta * (Xbar - xbar) / denom);
  }
  return ratio * expo;
}

double ns_multiplier(const NsShape& s, double Xbar, double xbar) {
  const double pop = s.a * Xbar + s.b;
  const double smp = s.a * xbar + s.b;
  double ratio = 1.0;
  if (s.alpha != 0.0) {
    if (smp == 0.0) throw Error(ErrorKind::ZeroSampleMean, "a xbar + b is zero on this sample");
    ratio = std::pow(pop / smp, s.alpha);
  }
  double expo = 1.0;
  if (s.beta != 0.0) {
    if (pop + smp == 0.0) {
      throw Error(ErrorKind::SingularTransform, "(a Xbar + b) + (a xbar + b) = 0 on this sample");
    }
    expo = std::exp(s.beta * (pop - smp) / (pop + smp));
  }
  return ratio * expo;
}

double n_class_value(const NShape& s, double d1, double d2, double Xbar, const Sample& sample) {
  return d1 * sample.p * n_multiplier(s, Xbar, sample.xbar) + d2 * sample.xbar +
         (1.0 - d1 - d2) * Xbar;
}

const PopulationMoments& require_moments(const EstimatorSpec& spec, const KnownPopulation& known) {
  if (!known.moments || !known.design) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("estimator '{}' uses population-optimal weights but the population "
                            "moments and design were not supplied",
                            spec.name));
  }
  return *known.moments;
}

}  // namespace

std::optional<SampleStats> sample_stats(const Sample& sample) {
  const std::size_t n = sample.size();
  if (n < 2) return std::nullopt;
  SampleStats st;
  st.p = sample.p;
  st.xbar = sample.xbar;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dp = sample.phi[i] - st.p;
    const double dx = sample.x[i] - st.xbar;
    syy += dp * dp;
    sxx += dx * dx;
    sxy += dp * dx;
  }
  if (syy == 0.0 || sxx == 0.0) return std::nullopt;
  const auto dof = static_cast<double>(n - 1);
  st.s_phi2 = syy / dof;
  st.s_x2 = sxx / dof;
  st.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  return st;
}

std::array<double, 2> adaptive_weights(const SampleStats& stats, double Xbar, double f,
                                       const ExpansionConstantsN& c) {
  PopulationMoments hat;
  hat.P = stats.p;
  hat.Xbar = Xbar;
  hat.Sphi2 = stats.s_phi2;
  hat.Sx2 = stats.s_x2;
  hat.Cphi = std::sqrt(stats.s_phi2) / stats.p;
  hat.Cx = std::sqrt(stats.s_x2) / std::abs(Xbar);
  hat.rho = stats.rho;
  hat.R = Xbar / stats.p;
  hat.b = stats.p - Xbar;
  Design dz;
  dz.f = f;
  return tn_optimal_weights(tn_quadratic(hat, dz, c));
}

Estimator Estimator::prepare(const EstimatorSpec& spec, const KnownPopulation& known) {
  Estimator e;
  e.spec_ = spec;
  e.Xbar_ = known.Xbar;
  if (known.design) e.f_ = known.design->f;

  switch (spec.family) {
    case Family::NClass:
    case Family::NqClass:
    case Family::AdaptiveN: {
      const auto& s = n_shape(spec);
      e.n_constants_ = constants_n(s.alpha, s.eta, s.lambda, known.Xbar);
      break;
    }
    case Family::NsFamily: {
      const auto& s = ns_shape(spec);
      (void)ns_constants(s.alpha, s.beta, s.a, s.b, known.Xbar);
      break;
    }
    default: break;
  }

  if (const auto* fixed = std::get_if<FixedWeights>(&spec.weights)) {
    if (spec.family == Family::AdaptiveN) {
      throw Error(ErrorKind::InvalidArgument, "the adaptive estimator estimates its own weights");
    }
    const std::size_t expected = fixed_weight_count(spec.family);
    if (fixed->values.size() != expected) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("estimator '{}' ({}) takes {} fixed weights, got {}", spec.name,
                              to_string(spec.family), expected, fixed->values.size()));
    }
    e.weights_ = fixed->values;
  } else if (std::holds_alternative<OptimalFromPopulation>(spec.weights)) {
    if (spec.family == Family::AdaptiveN) {
      throw Error(ErrorKind::InvalidArgument, "the adaptive estimator estimates its own weights");
    }
    const auto& m = require_moments(spec, known);
    const auto& dz = *known.design;
    switch (spec.family) {
      case Family::MeanPerUnit:
      case Family::Ratio: break;
      case Family::GsRepresentative: e.weights_ = gs_min_theory(m, dz).weights; break;
      case Family::NsFamily: {
        const auto& s = ns_shape(spec);
        e.weights_ = ns_theory(m, dz, ns_constants(s.alpha, s.beta, s.a, s.b, m.Xbar)).weights;
        break;
      }
      case Family::NClass: {
        const auto w = tn_optimal_weights(tn_quadratic(m, dz, *e.n_constants_));
        e.weights_ = {w[0], w[1]};
        break;
      }
      case Family::NqClass: e.weights_ = tnq_theory(m, dz, *e.n_constants_).weights; break;
      case Family::AdaptiveN: break;
    }
  } else {
    if (spec.family != Family::AdaptiveN) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("estimator '{}': only the adaptive family estimates weights from "
                              "the sample",
                              spec.name));
    }
    if (!known.design) {
      throw Error(ErrorKind::InvalidArgument, "the adaptive estimator needs the design (n, N)");
    }
  }
  return e;
}

Estimate Estimator::evaluate(const Sample& sample) const {
  const auto& w = weights_;
  switch (spec_.family) {
    case Family::MeanPerUnit: return {sample.p};
    case Family::Ratio:
      if (sample.xbar == 0.0) throw Error(ErrorKind::ZeroSampleMean, "sample mean of x is zero");
      return {sample.p * Xbar_ / sample.xbar};
    case Family::GsRepresentative: return {sample.p + w[0] * (sample.xbar / Xbar_ - 1.0)};
    case Family::NsFamily: {
      const auto& s = std::get<NsShape>(spec_.shape);
      return {(w[0] * sample.p + w[1] * (Xbar_ - sample.xbar)) *
              ns_multiplier(s, Xbar_, sample.xbar)};
    }
    case Family::NClass:
      return {n_class_value(std::get<NShape>(spec_.shape), w[0], w[1], Xbar_, sample)};
    case Family::NqClass:
      return {w[0] * sample.p * n_multiplier(std::get<NShape>(spec_.shape), Xbar_, sample.xbar)};
    case Family::AdaptiveN: {
      const auto stats = sample_stats(sample);
      if (!stats || stats->p <= 0.0 || stats->p >= 1.0) return {sample.p, true};
      std::array<double, 2> est{};
      try {
        est = adaptive_weights(*stats, Xbar_, f_, *n_constants_);
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::SingularSystem) throw;
        return {sample.p, true};
      }
      return {n_class_value(std::get<NShape>(spec_.shape), est[0], est[1], Xbar_, sample)};
    }
  }
  return {sample.p};
}

double eval_estimate(const EstimatorSpec& spec, const Sample& sample, const KnownPopulation& known) {
  return Estimator::prepare(spec, known).evaluate(sample).value;
}

Estimate eval_adaptive(const EstimatorSpec& spec, const Sample& sample,
                       const KnownPopulation& known) {
  if (spec.family != Family::AdaptiveN) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("estimator '{}' is not adaptive", spec.name));
  }
  return Estimator::prepare(spec, known).evaluate(sample);
}

TheoryResult theory_for(const EstimatorSpec& spec, const PopulationMoments& m, const Design& dz) {
  const auto* fixed = std::get_if<FixedWeights>(&spec.weights);
  switch (spec.family) {
    case Family::MeanPerUnit: return var_p(m, dz);
    case Family::Ratio: return ratio_theory(m, dz);
    case Family::GsRepresentative:
      if (fixed) return gs_fixed_theory(m, dz, fixed->values.at(0));
      return gs_min_theory(m, dz);
    case Family::NsFamily: {
      const auto& s = ns_shape(spec);
      const auto c = ns_constants(s.alpha, s.beta, s.a, s.b, m.Xbar);
      if (fixed) {
        const double q1 = fixed->values.at(0);
        const double q2 = fixed->values.at(1);
        TheoryResult r;
        r.mse = ns_quadratic(m, dz, c).value(q1, q2);
        r.bias = ns_bias(m, dz, c, q1, q2);
        r.weights = {q1, q2};
        return r;
      }
      return ns_theory(m, dz, c);
    }
    case Family::NClass:
    case Family::AdaptiveN: {
      const auto& s = n_shape(spec);
      const auto c = constants_n(s.alpha, s.eta, s.lambda, m.Xbar);
      if (fixed && spec.family == Family::NClass) {
        return tn_fixed_theory(m, dz, c, fixed->values.at(0), fixed->values.at(1));
      }
      // The class minimum does not depend on the shape; report the closed form
      // and the weights that attain it for this shape.
      auto r = tn_min_via_weights(m, dz, c);
      r.mse = tn_min_mse(m, dz).mse;
      return r;
    }
    case Family::NqClass: {
      const auto& s = n_shape(spec);
      const auto c = constants_n(s.alpha, s.eta, s.lambda, m.Xbar);
      if (fixed) return tnq_fixed_theory(m, dz, c, fixed->values.at(0));
      return tnq_theory(m, dz, c);
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown estimator family");
}

namespace {

struct PresetEntry {
  std::string_view name;
  std::function<EstimatorSpec(const PopulationMoments&)> make;
};

EstimatorSpec make_spec(std::string_view name, Family family, Shape shape, WeightMode weights) {
  return EstimatorSpec{std::string(name), family, std::move(shape), std::move(weights)};
}

const std::vector<PresetEntry>& preset_table() {
  using M = const PopulationMoments&;
  static const std::vector<PresetEntry> table = [] {
    const auto fixed10 = [] { return WeightMode{FixedWeights{{1.0, 0.0}}}; };
    const auto optimal = [] { return WeightMode{OptimalFromPopulation{}}; };
    std::vector<PresetEntry> t;
    t.push_back({"p", [](M) {
                   return make_spec("p", Family::MeanPerUnit, std::monostate{}, FixedWeights{});
                 }});
    t.push_back({"t_s", [](M) {
                   return make_spec("t_s", Family::Ratio, std::monostate{}, FixedWeights{});
                 }});
    t.push_back({"t_GS", [=](M) {
                   return make_spec("t_GS", Family::GsRepresentative, std::monostate{}, optimal());
                 }});
    t.push_back({"t_NS", [=](M) {
                   return make_spec("t_NS", Family::NsFamily, NsShape{1.0, 0.0, 1.0, 0.0},
                                    optimal());
                 }});
    t.push_back({"t_N", [=](M) {
                   return make_spec("t_N", Family::NClass, NShape{1.0, 1.0, 1.0}, optimal());
                 }});
    // Fixed (d1, d2) = (1, 0) members; t_N3 uses the optimal exponent rho Cphi / Cx.
    t.push_back({"t_N1", [=](M) {
                   return make_spec("t_N1", Family::NClass, NShape{0.0, 0.0, 1.0}, fixed10());
                 }});
    t.push_back({"t_N2", [=](M) {
                   return make_spec("t_N2", Family::NClass, NShape{1.0, 0.0, 1.0}, fixed10());
                 }});
    t.push_back({"t_N3", [=](M m) {
                   return make_spec("t_N3", Family::NClass,
                                    NShape{m.rho * m.Cphi / m.Cx, 0.0, 1.0}, fixed10());
                 }});
    t.push_back({"t_N4", [=](M) {
                   return make_spec("t_N4", Family::NClass, NShape{-1.0, 0.0, 1.0}, fixed10());
                 }});
    // Shrinkage members: optimal d1 on d1 p * multiplier.
    t.push_back({"t_N5", [=](M) {
                   return make_spec("t_N5", Family::NqClass, NShape{1.0, 0.0, 1.0}, optimal());
                 }});
    t.push_back({"t_N6", [=](M) {
                   return make_spec("t_N6", Family::NqClass, NShape{-1.0, 0.0, 1.0}, optimal());
                 }});
    t.push_back({"t_N7", [=](M) {
                   return make_spec("t_N7", Family::NqClass, NShape{0.0, 0.0, 1.0}, optimal());
                 }});
    t.push_back({"t_N8", [=](M) {
                   return make_spec("t_N8", Family::NClass, NShape{0.0, 0.0, 1.0}, optimal());
                 }});

    struct NqRow {
      std::string_view name;
      std::function<NShape(M)> shape;
    };
    const std::vector<NqRow> nq = {
        {"t_NQ1", [](M) { return NShape{1.0, 1.0, 1.0}; }},
        {"t_NQ2", [](M m) { return NShape{1.0, 1.0, m.rho}; }},
        {"t_NQ3", [](M m) { return NShape{1.0, 1.0, m.Xbar}; }},
        {"t_NQ4", [](M) { return NShape{1.0, 1.0, 0.0}; }},
        {"t_NQ5", [](M) { return NShape{-1.0, 1.0, 1.0}; }},
        {"t_NQ6", [](M m) { return NShape{1.0, m.Xbar, m.rho}; }},
        {"t_NQ7", [](M m) { return NShape{0.0, m.Xbar, m.rho}; }},
        {"t_NQ8", [](M m) { return NShape{1.0, m.rho, m.Xbar}; }},
        {"t_NQ9", [](M m) { return NShape{-1.0, m.rho, m.Xbar}; }},
    };
    for (const auto& row : nq) {
      t.push_back({row.name, [=](M m) {
                     return make_spec(row.name, Family::NqClass, row.shape(m), optimal());
                   }});
    }
    t.push_back({"t_Nadapt", [](M) {
                   return make_spec("t_Nadapt", Family::AdaptiveN, NShape{0.0, 0.0, 1.0},
                                    EstimatedFromSample{});
                 }});
    return t;
  }();
  return table;
}

std::string strip_underscores(std::string_view s) {
  std::string out;
  std::copy_if(s.begin(), s.end(), std::back_inserter(out), [](char c) { return c != '_'; });
  return out;
}

const PresetEntry* find_preset(std::string_view name) {
  const auto key = strip_underscores(name);
  for (const auto& entry : preset_table()) {
    if (strip_underscores(entry.name) == key) return &entry;
  }
  return nullptr;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& entry : preset_table()) out.emplace_back(entry.name);
    return out;
  }();
  return names;
}

bool is_preset(std::string_view name) { return find_preset(name) != nullptr; }

EstimatorSpec preset(std::string_view name, const PopulationMoments& m) {
  const auto* entry = find_preset(name);
  if (!entry) throw Error(ErrorKind::UnknownPreset, fmt::format("no preset named '{}'", name));
  return entry->make(m);
}

}  // namespace qualest
