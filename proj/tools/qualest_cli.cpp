// qualest: command-line front end for the attribute-mean estimator library.
//
// Exit codes: 0 success, 1 computation error, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "qualest/error.hpp"
#include "qualest/estimators.hpp"
#include "qualest/moments.hpp"
#include "qualest/montecarlo.hpp"
#include "qualest/report.hpp"
#include "qualest/synth.hpp"
#include "qualest/theory.hpp"

namespace {

using namespace qualest;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputOptions {
  std::string csv;
  bool params = false;
  bool synth = false;
  std::size_t N = 40;
  double P = 0.525;
  double Xbar = 14.4;
  double Cphi = 0.963;
  double Cx = 0.308;
  double rho = 0.897;
  std::uint64_t synth_seed = 1;
};

struct EstimatorOptions {
  std::vector<std::string> presets;
  std::string family;
  double alpha = 1.0;
  double eta = 0.0;
  double lambda = 1.0;
  double beta = 0.0;
  double a = 1.0;
  double b = 0.0;
  std::vector<double> weights;
};

struct OutputOptions {
  std::string format = "text";
  std::string path;
};

struct Resolved {
  std::optional<Population> population;
  PopulationMoments moments;
};

void add_input_options(CLI::App* cmd, InputOptions& in, bool allow_params) {
  auto* group = cmd->add_option_group("input", "population source (exactly one)");
  group->add_option("--csv", in.csv, "population CSV with columns phi,x")->check(CLI::ExistingFile);
  if (allow_params) {
    group->add_flag("--params", in.params, "use summary statistics (--N --P --Xbar --Cphi --Cx --rho)");
  }
  group->add_flag("--synth", in.synth, "synthesize a population from --N --P --Xbar --Cx --rho");
  cmd->add_option("--N", in.N, "population size")->capture_default_str();
  cmd->add_option("--P", in.P, "population proportion")->capture_default_str();
  cmd->add_option("--Xbar", in.Xbar, "population mean of x")->capture_default_str();
  if (allow_params) {
    cmd->add_option("--Cphi", in.Cphi, "coefficient of variation of phi")->capture_default_str();
  }
  cmd->add_option("--Cx", in.Cx, "coefficient of variation of x")->capture_default_str();
  cmd->add_option("--rho", in.rho, "point-biserial correlation")->capture_default_str();
  cmd->add_option("--synth-seed", in.synth_seed, "seed for --synth")->capture_default_str();
}

void add_estimator_options(CLI::App* cmd, EstimatorOptions& e, bool multiple) {
  auto* preset_opt = cmd->add_option("--preset", e.presets,
                                     "estimator preset (p, t_s, t_GS, t_NS, t_N, t_N1..t_N8, "
                                     "t_NQ1..t_NQ9, t_Nadapt; underscores optional)");
  if (!multiple) preset_opt->expected(1);
  preset_opt->check([](const std::string& name) {
    return is_preset(name) ? std::string() : fmt::format("unknown preset '{}'", name);
  });
  cmd->add_option("--family", e.family, "custom estimator family instead of a preset")
      ->check(CLI::IsMember({"nclass", "nqclass", "ns", "adaptive"}));
  cmd->add_option("--alpha", e.alpha, "custom shape: alpha")->capture_default_str();
  cmd->add_option("--eta", e.eta, "custom shape: eta (nclass, nqclass, adaptive)")->capture_default_str();
  cmd->add_option("--lambda", e.lambda, "custom shape: lambda (nclass, nqclass, adaptive)")->capture_default_str();
  cmd->add_option("--beta", e.beta, "custom shape: beta (ns)")->capture_default_str();
  cmd->add_option("--a", e.a, "custom shape: a (ns)")->capture_default_str();
  cmd->add_option("--b", e.b, "custom shape: b (ns)")->capture_default_str();
  cmd->add_option("--weights", e.weights, "fixed weights; omit for population-optimal weights")
      ->delimiter(',');
}

void add_output_options(CLI::App* cmd, OutputOptions& o) {
  cmd->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"text", "csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--output", o.path,
                  "write to this file (relative paths resolve against $QUALEST_OUTPUT_DIR)");
}

Resolved resolve_input(const InputOptions& in, bool params_by_default) {
  const int sources = (in.csv.empty() ? 0 : 1) + (in.params ? 1 : 0) + (in.synth ? 1 : 0);
  if (sources > 1) throw UsageError("specify exactly one of --csv, --params, --synth");
  if (sources == 0 && !params_by_default) {
    throw UsageError("specify exactly one of --csv, --params, --synth");
  }
  Resolved r;
  if (!in.csv.empty()) {
    r.population = read_population_csv(in.csv);
    r.moments = compute_moments(*r.population);
  } else if (in.synth) {
    r.population = synthesize(MomentTargets{in.N, in.P, in.Xbar, in.Cx, in.rho}, in.synth_seed);
    r.moments = compute_moments(*r.population);
  } else {
    r.moments = PopulationMoments::from_summary(in.N, in.P, in.Xbar, in.Cphi, in.Cx, in.rho);
  }
  return r;
}

std::vector<EstimatorSpec> resolve_estimators(const EstimatorOptions& e, const PopulationMoments& m,
                                              bool default_all) {
  std::vector<EstimatorSpec> specs;
  if (!e.family.empty()) {
    if (!e.presets.empty()) throw UsageError("--preset and --family are mutually exclusive");
    EstimatorSpec spec;
    spec.name = "custom";
    if (e.family == "ns") {
      spec.family = Family::NsFamily;
      spec.shape = NsShape{e.alpha, e.beta, e.a, e.b};
    } else {
      spec.family = e.family == "nclass"    ? Family::NClass
                    : e.family == "nqclass" ? Family::NqClass
                                            : Family::AdaptiveN;
      spec.shape = NShape{e.alpha, e.eta, e.lambda};
    }
    if (spec.family == Family::AdaptiveN) {
      if (!e.weights.empty()) throw UsageError("the adaptive family estimates its own weights");
      spec.weights = EstimatedFromSample{};
    } else if (e.weights.empty()) {
      spec.weights = OptimalFromPopulation{};
    } else {
      spec.weights = FixedWeights{e.weights};
    }
    specs.push_back(std::move(spec));
    return specs;
  }
  if (!e.weights.empty()) throw UsageError("--weights applies to --family estimators only");
  if (e.presets.empty()) {
    if (!default_all) throw UsageError("select an estimator with --preset or --family");
    for (const auto& name : preset_names()) specs.push_back(preset(name, m));
    return specs;
  }
  for (const auto& name : e.presets) specs.push_back(preset(name, m));
  return specs;
}

void write_output(const OutputOptions& o, const std::string& text) {
  if (o.path.empty()) {
    std::cout << text;
    return;
  }
  std::filesystem::path path(o.path);
  if (path.is_relative()) {
    if (const char* dir = std::getenv("QUALEST_OUTPUT_DIR"); dir && *dir) path = std::filesystem::path(dir) / path;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, fmt::format("cannot write '{}'", path.string()));
  out << text;
}

std::string weights_text(const std::vector<double>& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) out += fmt::format("{}{:.6g}", i ? ";" : "", w[i]);
  return out;
}

// --- params ---------------------------------------------------------------

std::string render_params(const PopulationMoments& m, const Design& dz, const std::string& format) {
  const std::vector<std::pair<std::string, double>> fields = {
      {"N", static_cast<double>(m.N)}, {"n", static_cast<double>(dz.n)},
      {"f", dz.f},                     {"P", m.P},
      {"Xbar", m.Xbar},                {"Sphi2", m.Sphi2},
      {"Sx2", m.Sx2},                  {"Cphi", m.Cphi},
      {"Cx", m.Cx},                    {"rho", m.rho},
      {"R", m.R},                      {"b", m.b}};
  if (format == "json") {
    nlohmann::ordered_json j;
    for (const auto& [k, v] : fields) j[k] = v;
    return j.dump(2) + "\n";
  }
  if (format == "csv") {
    std::string head;
    std::string vals;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      head += (i ? "," : "") + fields[i].first;
      vals += fmt::format("{}{}", i ? "," : "", fields[i].second);
    }
    return head + "\n" + vals + "\n";
  }
  std::string out;
  for (const auto& [k, v] : fields) out += fmt::format("{:<6} {:.7g}\n", k, v);
  return out;
}

// --- theory ---------------------------------------------------------------

std::string render_theory(const std::vector<EstimatorSpec>& specs, const PopulationMoments& m,
                          const Design& dz, const std::string& format) {
  const double reference = var_p(m, dz).mse;
  struct Line {
    std::string name;
    std::string family;
    TheoryResult result;
  };
  std::vector<Line> lines;
  for (const auto& spec : specs) {
    auto r = theory_for(spec, m, dz);
    if (r.mse > 0.0) r.pre = pre(r.mse, reference);
    lines.push_back({spec.name, std::string(to_string(spec.family)), std::move(r)});
  }
  if (format == "json") {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& l : lines) {
      nlohmann::ordered_json j;
      j["name"] = l.name;
      j["family"] = l.family;
      j["bias"] = l.result.bias;
      j["mse"] = l.result.mse;
      j["pre"] = l.result.pre ? nlohmann::ordered_json(*l.result.pre) : nullptr;
      j["weights"] = l.result.weights;
      arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
  }
  if (format == "csv") {
    std::string out = "name,family,bias,mse,pre,weights\n";
    for (const auto& l : lines) {
      out += fmt::format("{},{},{},{},{},{}\n", l.name, l.family, l.result.bias, l.result.mse,
                         l.result.pre ? fmt::format("{}", *l.result.pre) : "",
                         weights_text(l.result.weights));
    }
    return out;
  }
  std::string out = fmt::format("{:<9} {:<17} {:>12} {:>12} {:>10}  {}\n", "estimator", "family",
                                "bias", "mse", "pre", "weights");
  for (const auto& l : lines) {
    out += fmt::format("{:<9} {:<17} {:>12.6g} {:>12.6g} {:>10} {}\n", l.name, l.family,
                       l.result.bias, l.result.mse,
                       l.result.pre ? fmt::format("{:.2f}", *l.result.pre) : "-",
                       weights_text(l.result.weights));
  }
  return out;
}

// --- verify ---------------------------------------------------------------

struct VerifyOptions {
  bool exact = false;
  bool simulate = false;
  std::uint64_t reps = 10000;
  std::uint64_t seed = 1;
  std::uint64_t cap = 2'000'000;
  unsigned threads = 0;
};

std::string render_verify(const EstimatorSpec& spec, const Population& pop, const Design& dz,
                          const VerifyOptions& v, const std::string& format) {
  const auto m = compute_moments(pop);
  const auto theory = theory_for(spec, m, dz);
  nlohmann::ordered_json j;
  j["estimator"] = spec.name;
  j["mode"] = v.exact ? "exact" : "simulate";
  j["N"] = pop.size();
  j["n"] = dz.n;
  j["theory_bias"] = theory.bias;
  j["theory_mse"] = theory.mse;

  double empirical_mse = 0.0;
  nlohmann::ordered_json record;
  if (v.exact) {
    const auto r = enumerate_exact(pop, dz.n, spec, EnumerationOptions{v.cap});
    record = nlohmann::ordered_json::parse(to_json(r));
    empirical_mse = r.exact_mse;
  } else {
    const auto r = simulate(pop, dz.n, spec, v.reps, v.seed, SimulationOptions{v.threads});
    record = nlohmann::ordered_json::parse(to_json(r));
    empirical_mse = r.empirical_mse;
  }
  for (const auto& [k, val] : record.items()) j[k] = val;
  const double gap = empirical_mse > 0.0 ? (theory.mse - empirical_mse) / empirical_mse : 0.0;
  j["relative_gap"] = gap;

  if (format == "json") return j.dump(2) + "\n";
  if (format == "csv") {
    std::string head;
    std::string vals;
    bool first = true;
    for (const auto& [k, val] : j.items()) {
      head += (first ? "" : ",") + k;
      vals += (first ? "" : ",") + (val.is_string() ? val.get<std::string>() : val.dump());
      first = false;
    }
    return head + "\n" + vals + "\n";
  }
  std::string out;
  for (const auto& [k, val] : j.items()) {
    out += fmt::format("{:<24} {}\n", k, val.is_string() ? val.get<std::string>() : val.dump());
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Estimators of a population proportion using an auxiliary variable under SRSWOR"};
  app.require_subcommand(1);

  InputOptions in;
  EstimatorOptions est;
  OutputOptions out;
  std::size_t n = 11;
  VerifyOptions verify;
  bool no_printed = false;

  auto* params_cmd = app.add_subcommand("params", "print population moments and the sampling factor");
  add_input_options(params_cmd, in, true);
  params_cmd->add_option("--n", n, "sample size")->required();
  add_output_options(params_cmd, out);

  auto* theory_cmd = app.add_subcommand("theory", "first-order bias, MSE and optimal weights");
  add_input_options(theory_cmd, in, true);
  theory_cmd->add_option("--n", n, "sample size")->required();
  add_estimator_options(theory_cmd, est, true);
  add_output_options(theory_cmd, out);

  auto* verify_cmd = app.add_subcommand("verify", "compare theory with exact enumeration or simulation");
  add_input_options(verify_cmd, in, false);
  verify_cmd->add_option("--n", n, "sample size")->required();
  add_estimator_options(verify_cmd, est, false);
  auto* mode = verify_cmd->add_option_group("mode", "verification mode");
  mode->add_flag("--exact", verify.exact, "enumerate every sample");
  mode->add_flag("--simulate", verify.simulate, "seeded Monte Carlo replication");
  mode->require_option(1);
  verify_cmd->add_option("--reps", verify.reps, "replications for --simulate")
      ->check(CLI::Range(std::uint64_t{100}, std::numeric_limits<std::uint64_t>::max()))
      ->capture_default_str();
  verify_cmd->add_option("--seed", verify.seed, "seed for --simulate")->capture_default_str();
  verify_cmd->add_option("--cap", verify.cap, "maximum subsets for --exact")->capture_default_str();
  verify_cmd->add_option("--threads", verify.threads, "worker threads (0 = all cores)")
      ->capture_default_str();
  add_output_options(verify_cmd, out);

  auto* reproduce_cmd = app.add_subcommand("reproduce", "rebuild the published efficiency table");
  add_input_options(reproduce_cmd, in, true);
  reproduce_cmd->add_option("--n", n, "sample size")->capture_default_str();
  reproduce_cmd->add_flag("--no-printed", no_printed, "omit the published values and flags");
  add_output_options(reproduce_cmd, out);

  std::uint64_t synth_seed = 1;
  MomentTargets targets{40, 0.525, 14.4, 0.308, 0.897};
  std::string synth_output;
  auto* synth_cmd = app.add_subcommand("synth", "write a population CSV matching target moments");
  synth_cmd->add_option("--N", targets.N, "population size")->capture_default_str();
  synth_cmd->add_option("--P", targets.P, "population proportion")->capture_default_str();
  synth_cmd->add_option("--Xbar", targets.Xbar, "mean of x")->capture_default_str();
  synth_cmd->add_option("--Cx", targets.Cx, "coefficient of variation of x")->capture_default_str();
  synth_cmd->add_option("--rho", targets.rho, "point-biserial correlation")->capture_default_str();
  synth_cmd->add_option("--seed", synth_seed, "seed")->capture_default_str();
  synth_cmd->add_option("--output", out.path,
                        "write to this file (relative paths resolve against $QUALEST_OUTPUT_DIR)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    (void)app.exit(e);
    return 2;
  }

  if (*synth_cmd) {
    std::ostringstream os;
    write_population_csv(os, synthesize(targets, synth_seed));
    write_output(out, os.str());
    return 0;
  }

  const bool params_default = static_cast<bool>(*reproduce_cmd);
  const auto input = resolve_input(in, params_default);
  const auto& m = input.moments;
  const auto dz = make_design(n, m.N);

  if (*params_cmd) {
    write_output(out, render_params(m, dz, out.format));
  } else if (*theory_cmd) {
    write_output(out, render_theory(resolve_estimators(est, m, true), m, dz, out.format));
  } else if (*verify_cmd) {
    const auto specs = resolve_estimators(est, m, false);
    write_output(out, render_verify(specs.front(), *input.population, dz, verify, out.format));
  } else if (*reproduce_cmd) {
    ReproduceOptions options;
    options.attach_printed = !no_printed;
    write_output(out, emit(reproduce_table(m, dz, options), out.format));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const qualest::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const auto kind = e.kind();
    return (kind == qualest::ErrorKind::UnknownPreset || kind == qualest::ErrorKind::UnknownFormat) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
