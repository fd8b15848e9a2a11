#include "qualest/moments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <string_view>

#include <fmt/format.h>

#include "qualest/error.hpp"

namespace qualest {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidDesign: return "invalid-design";
    case ErrorKind::DegenerateAttribute: return "degenerate-attribute";
    case ErrorKind::DegenerateAuxiliary: return "degenerate-auxiliary";
    case ErrorKind::DegenerateSample: return "degenerate-sample";
    case ErrorKind::DegenerateClass: return "degenerate-class";
    case ErrorKind::SingularTransform: return "singular-transform";
    case ErrorKind::SingularSystem: return "singular-system";
    case ErrorKind::ZeroSampleMean: return "zero-sample-mean";
    case ErrorKind::EnumerationTooLarge: return "enumeration-too-large";
    case ErrorKind::InfeasibleTargets: return "infeasible-targets";
    case ErrorKind::ParseError: return "parse-error";
    case ErrorKind::UnknownPreset: return "unknown-preset";
    case ErrorKind::UnknownFormat: return "unknown-format";
  }
  return "unknown";
}

Population::Population(std::vector<int> phi, std::vector<double> x)
    : phi_(std::move(phi)), x_(std::move(x)) {
  if (phi_.size() != x_.size()) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("phi has {} entries but x has {}", phi_.size(), x_.size()));
  }
  if (phi_.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "a population needs at least two units");
  }
  for (std::size_t i = 0; i < phi_.size(); ++i) {
    if (phi_[i] != 0 && phi_[i] != 1) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("phi[{}] = {} is not 0 or 1", i, phi_[i]));
    }
    if (!std::isfinite(x_[i])) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("x[{}] is not finite", i));
    }
  }
}

double sampling_factor(std::size_t n, std::size_t N) {
  if (n < 2 || n > N) {
    throw Error(ErrorKind::InvalidDesign,
                fmt::format("sample size n = {} must satisfy 2 <= n <= N = {}", n, N));
  }
  if (n == N) return 0.0;
  return 1.0 / static_cast<double>(n) - 1.0 / static_cast<double>(N);
}

Design make_design(std::size_t n, std::size_t N) { return Design{n, N, sampling_factor(n, N)}; }

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_summary(double P, double Xbar, double Sx2, double rho) {
  if (!(P > 0.0 && P < 1.0)) {
    throw Error(ErrorKind::DegenerateAttribute,
                fmt::format("proportion P = {} must lie strictly inside (0, 1)", P));
  }
  if (Xbar == 0.0 || !std::isfinite(Xbar)) {
    throw Error(ErrorKind::DegenerateAuxiliary, "auxiliary mean is zero");
  }
  if (!(Sx2 > 0.0)) {
    throw Error(ErrorKind::DegenerateAuxiliary, "auxiliary variable is constant");
  }
  if (!(rho >= -1.0 && rho <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("correlation {} outside [-1, 1]", rho));
  }
}

}  // namespace

PopulationMoments PopulationMoments::from_summary(std::size_t N, double P, double Xbar,
                                                  double Cphi, double Cx, double rho) {
  if (N < 2) throw Error(ErrorKind::InvalidArgument, "population size must be at least 2");
  if (!(Cphi > 0.0)) {
    throw Error(ErrorKind::DegenerateAttribute, "Cphi must be positive");
  }
  if (!(Cx > 0.0)) {
    throw Error(ErrorKind::DegenerateAuxiliary, "Cx must be positive");
  }
  PopulationMoments m;
  m.N = N;
  m.P = P;
  m.Xbar = Xbar;
  m.Cphi = Cphi;
  m.Cx = Cx;
  m.rho = rho;
  m.Sphi2 = (Cphi * P) * (Cphi * P);
  m.Sx2 = (Cx * Xbar) * (Cx * Xbar);
  check_summary(P, Xbar, m.Sx2, rho);
  m.R = Xbar / P;
  m.b = P - Xbar;
  return m;
}

double point_biserial(std::span<const int> phi, std::span<const double> x) {
  if (phi.size() != x.size() || phi.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "correlation needs two equal-length vectors of size >= 2");
  }
  const auto n = static_cast<double>(phi.size());
  const double phibar = std::accumulate(phi.begin(), phi.end(), 0.0) / n;
  const double xbar = mean_of(x);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double dp = phi[i] - phibar;
    const double dx = x[i] - xbar;
    sxy += dp * dx;
    syy += dp * dp;
    sxx += dx * dx;
  }
  if (syy == 0.0) throw Error(ErrorKind::DegenerateAttribute, "attribute is constant");
  if (sxx == 0.0) throw Error(ErrorKind::DegenerateAuxiliary, "auxiliary variable is constant");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

PopulationMoments compute_moments(const Population& pop) {
  const std::size_t count = pop.size();
  const auto N = static_cast<double>(count);
  const auto phi = pop.phi();
  const auto x = pop.x();

  const auto A = std::count(phi.begin(), phi.end(), 1);
  if (A == 0 || static_cast<std::size_t>(A) == count) {
    throw Error(ErrorKind::DegenerateAttribute, "every unit has the same attribute value");
  }

  PopulationMoments m;
  m.N = count;
  m.P = static_cast<double>(A) / N;
  m.Xbar = mean_of(x);

  double ssphi = 0.0;
  double ssx = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    ssphi += (phi[i] - m.P) * (phi[i] - m.P);
    ssx += (x[i] - m.Xbar) * (x[i] - m.Xbar);
  }
  m.Sphi2 = ssphi / (N - 1.0);
  m.Sx2 = ssx / (N - 1.0);
  check_summary(m.P, m.Xbar, m.Sx2, 0.0);

  m.Cphi = std::sqrt(m.Sphi2) / m.P;
  m.Cx = std::sqrt(m.Sx2) / m.Xbar;
  m.rho = point_biserial(phi, x);
  m.R = m.Xbar / m.P;
  m.b = m.P - m.Xbar;
  return m;
}

Sample make_sample(const Population& pop, std::vector<std::size_t> indices) {
  if (indices.empty()) throw Error(ErrorKind::InvalidDesign, "empty sample");
  std::vector<std::size_t> sorted = indices;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorKind::InvalidArgument, "sample indices are not distinct");
  }
  if (sorted.back() >= pop.size()) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("sample index {} outside population of {}", sorted.back(), pop.size()));
  }

  Sample s;
  s.phi.reserve(indices.size());
  s.x.reserve(indices.size());
  double a = 0.0;
  double sumx = 0.0;
  for (auto i : indices) {
    s.phi.push_back(pop.phi()[i]);
    s.x.push_back(pop.x()[i]);
    a += pop.phi()[i];
    sumx += pop.x()[i];
  }
  const auto n = static_cast<double>(indices.size());
  s.p = a / n;
  s.xbar = sumx / n;
  s.indices = std::move(indices);
  return s;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  s = s.substr(first, last - first + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
  return v;
}

}  // namespace

Population read_population_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;

  std::optional<std::size_t> phi_col;
  std::optional<std::size_t> x_col;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto header = split_fields(line);
    width = header.size();
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == "phi") phi_col = c;
      if (header[c] == "x") x_col = c;
    }
    break;
  }
  if (width == 0) throw Error(ErrorKind::ParseError, "empty CSV input: header row is mandatory");
  if (!phi_col || !x_col) {
    throw Error(ErrorKind::ParseError,
                fmt::format("line {}: header must name columns 'phi' and 'x'", line_no));
  }

  std::vector<int> phi;
  std::vector<double> x;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != width) {
      throw Error(ErrorKind::ParseError,
                  fmt::format("line {}: expected {} fields, found {}", line_no, width, fields.size()));
    }
    const auto phi_value = parse_double(fields[*phi_col]);
    if (!phi_value || (*phi_value != 0.0 && *phi_value != 1.0)) {
      throw Error(ErrorKind::ParseError,
                  fmt::format("line {}: phi value '{}' is not 0 or 1", line_no, fields[*phi_col]));
    }
    const auto x_value = parse_double(fields[*x_col]);
    if (!x_value || !std::isfinite(*x_value)) {
      throw Error(ErrorKind::ParseError,
                  fmt::format("line {}: x value '{}' is not a number", line_no, fields[*x_col]));
    }
    phi.push_back(static_cast<int>(*phi_value));
    x.push_back(*x_value);
  }
  return Population(std::move(phi), std::move(x));
}

Population read_population_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, fmt::format("cannot open '{}'", path));
  return read_population_csv(in);
}

void write_population_csv(std::ostream& out, const Population& pop) {
  out << "phi,x\n";
  for (std::size_t i = 0; i < pop.size(); ++i) {
    out << fmt::format("{},{:.17g}\n", pop.phi()[i], pop.x()[i]);
  }
}

}  // namespace qualest
