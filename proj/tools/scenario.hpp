#pragma once

// Scenario files (YAML, schema "scgt-scenario/1") parsed into ready-to-run
// families, POVMs, point lists and options. Every parse error names the key
// path and source line.

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "scgt/scgt.hpp"

namespace scgt::cli {

inline constexpr const char* kScenarioSchema = "scgt-scenario/1";

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, int line, const std::string& msg)
      : std::runtime_error(key + (line > 0 ? " (line " + std::to_string(line) + ")" : "") + ": " +
                           msg),
        key_(key),
        line_(line) {}

  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

enum class Computation { kTensors, kBounds, kPhases, kAppendixG, kTwoCopy, kOracles };

inline const std::vector<std::pair<std::string, Computation>>& computation_names() {
  static const std::vector<std::pair<std::string, Computation>> names{
      {"tensors", Computation::kTensors},     {"bounds", Computation::kBounds},
      {"phases", Computation::kPhases},       {"appendix_g", Computation::kAppendixG},
      {"two_copy", Computation::kTwoCopy},    {"oracles", Computation::kOracles}};
  return names;
}

struct Tolerances {
  double bound = kBoundTol;
  double null = kDefaultNullTol;
  double kernel = kSldKernelTol;      // SLD kernel cut
  double fq_kernel = kDefaultKernelTol;  // F_Q inversion
  double phase = 1e-3;
  double oracle = 1e-6;
  double cross_check = 1e-9;
};

struct PhaseConfig {
  std::size_t u = 0, v = 1;
  double u0 = 0.0, u1 = 0.0, v0 = 0.0, v1 = 0.0;
  std::size_t nu = 200, nv = 400;
  std::vector<double> base;
  bool closed = false;  // the patch is a closed surface, so nu_Q must be an integer
};

struct OracleConfig {
  double h = kDefaultFdStep;
  std::uint64_t shots = 100000;
  std::size_t probe_trials = 1000;
};

struct Scenario {
  std::string family_type;
  std::optional<ParamStateFamily> family;
  std::optional<UnitaryEncoding> encoding;  // unitary_encoding families
  std::optional<PureState> psi0;
  std::string povm_type;
  std::optional<double> epsilon;  // depolarized_projective only
  Povm povm;
  std::vector<ParamPoint> points;
  std::set<Computation> compute;
  Tolerances tol;
  NullDirections null_directions;
  std::optional<PhaseConfig> phases;
  OracleConfig oracles;
  std::vector<CMatrix> weights;
  std::uint64_t seed = 0;
  std::string source;  // raw config text, hashed into the report

  bool wants(Computation c) const { return compute.count(c) > 0; }
  std::size_t num_params() const { return family->num_params(); }
};

namespace detail {

inline int line_of(const YAML::Node& n) {
  const auto m = n.Mark();
  return m.is_null() ? -1 : m.line + 1;
}

inline std::string index_key(const std::string& key, std::size_t i) {
  return key + "[" + std::to_string(i) + "]";
}

inline void require_map(const YAML::Node& n, const std::string& key) {
  if (!n.IsMap()) throw ConfigError(key, line_of(n), "expected a mapping");
}

inline void require_seq(const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence()) throw ConfigError(key, line_of(n), "expected a list");
}

inline void check_keys(const YAML::Node& n, const std::string& key,
                       const std::set<std::string>& allowed) {
  require_map(n, key);
  for (const auto& kv : n) {
    const auto name = kv.first.as<std::string>();
    if (!allowed.count(name))
      throw ConfigError(key.empty() ? name : key + "." + name, line_of(kv.first), "unknown key");
  }
}

inline std::string join(const std::string& key, const std::string& child) {
  return key.empty() ? child : key + "." + child;
}

inline YAML::Node required(const YAML::Node& n, const std::string& key, const std::string& child) {
  const auto c = n[child];
  if (!c) throw ConfigError(join(key, child), line_of(n), "missing required key");
  return c;
}

}  // namespace detail

/// Decimal numbers and multiples of pi: "0.5", "-1e-3", "pi", "-pi/2", "3*pi/4", "2pi".
inline std::optional<double> parse_number(const std::string& text) {
  static const std::regex re(
      R"(^\s*([+-])?\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*(\*?\s*pi)?\s*(?:/\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?))?\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) return std::nullopt;
  if (!m[2].matched && !m[3].matched) return std::nullopt;
  if (m[3].matched && !m[2].matched && m[3].str().find('*') != std::string::npos)
    return std::nullopt;
  double v = m[2].matched ? std::stod(m[2].str()) : 1.0;
  if (m[3].matched) v *= std::numbers::pi;
  if (m[4].matched) {
    const double den = std::stod(m[4].str());
    if (den == 0.0) return std::nullopt;
    v /= den;
  }
  if (m[1].matched && m[1].str() == "-") v = -v;
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

namespace detail {

inline double number(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) throw ConfigError(key, line_of(n), "expected a number");
  const auto v = parse_number(n.Scalar());
  if (!v) throw ConfigError(key, line_of(n), "'" + n.Scalar() + "' is not a number");
  return *v;
}

inline double positive(const YAML::Node& n, const std::string& key) {
  const double v = number(n, key);
  if (!(v > 0.0)) throw ConfigError(key, line_of(n), "must be positive");
  return v;
}

inline std::int64_t integer(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) throw ConfigError(key, line_of(n), "expected an integer");
  static const std::regex re(R"(^\s*[+-]?\d+\s*$)");
  if (!std::regex_match(n.Scalar(), re))
    throw ConfigError(key, line_of(n), "'" + n.Scalar() + "' is not an integer");
  try {
    return std::stoll(n.Scalar());
  } catch (const std::out_of_range&) {
    throw ConfigError(key, line_of(n), "integer out of range");
  }
}

inline std::size_t count(const YAML::Node& n, const std::string& key, std::int64_t min = 1) {
  const auto v = integer(n, key);
  if (v < min) throw ConfigError(key, line_of(n), "must be at least " + std::to_string(min));
  return static_cast<std::size_t>(v);
}

inline bool boolean(const YAML::Node& n, const std::string& key) {
  bool b = false;
  if (!n.IsScalar() || !YAML::convert<bool>::decode(n, b))
    throw ConfigError(key, line_of(n), "expected true or false");
  return b;
}

inline std::vector<double> numbers(const YAML::Node& n, const std::string& key) {
  require_seq(n, key);
  std::vector<double> out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(number(n[i], index_key(key, i)));
  return out;
}

inline RMatrix real_rows(const YAML::Node& n, const std::string& key) {
  require_seq(n, key);
  if (n.size() == 0) throw ConfigError(key, line_of(n), "empty matrix");
  RMatrix m;
  for (std::size_t r = 0; r < n.size(); ++r) {
    const auto row = numbers(n[r], index_key(key, r));
    if (r == 0) m = RMatrix::Zero(static_cast<Eigen::Index>(n.size()), static_cast<Eigen::Index>(row.size()));
    if (static_cast<Eigen::Index>(row.size()) != m.cols())
      throw ConfigError(index_key(key, r), line_of(n[r]), "rows differ in length");
    for (std::size_t c = 0; c < row.size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }
  return m;
}

/// {re: [[...]], im: [[...]]} or a bare real [[...]].
inline CMatrix complex_matrix(const YAML::Node& n, const std::string& key) {
  if (n.IsSequence()) return real_rows(n, key).cast<cplx>();
  check_keys(n, key, {"re", "im"});
  const RMatrix re = real_rows(required(n, key, "re"), join(key, "re"));
  RMatrix im = RMatrix::Zero(re.rows(), re.cols());
  if (n["im"]) {
    im = real_rows(n["im"], join(key, "im"));
    if (im.rows() != re.rows() || im.cols() != re.cols())
      throw ConfigError(join(key, "im"), line_of(n["im"]), "shape differs from re");
  }
  CMatrix m(re.rows(), re.cols());
  m.real() = re;
  m.imag() = im;
  return m;
}

inline CVector complex_vector(const YAML::Node& n, const std::string& key) {
  if (n.IsSequence()) {
    const auto v = numbers(n, key);
    return Eigen::Map<const RVector>(v.data(), static_cast<Eigen::Index>(v.size())).cast<cplx>();
  }
  check_keys(n, key, {"re", "im"});
  const auto re = numbers(required(n, key, "re"), join(key, "re"));
  std::vector<double> im(re.size(), 0.0);
  if (n["im"]) {
    im = numbers(n["im"], join(key, "im"));
    if (im.size() != re.size())
      throw ConfigError(join(key, "im"), line_of(n["im"]), "length differs from re");
  }
  CVector v(static_cast<Eigen::Index>(re.size()));
  for (std::size_t k = 0; k < re.size(); ++k) v(static_cast<Eigen::Index>(k)) = cplx(re[k], im[k]);
  return v;
}

/// Runs a library constructor and converts its error into a ConfigError at `key`.
template <class F>
auto guarded(const YAML::Node& n, const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw ConfigError(key, line_of(n), e.what());
  }
}

inline HermitianMatrix hermitian(const YAML::Node& n, const std::string& key) {
  const CMatrix m = complex_matrix(n, key);
  return guarded(n, key, [&] { return HermitianMatrix(m); });
}

struct AxisSpec {
  double start, stop;
  std::size_t count;
};

inline AxisSpec axis(const YAML::Node& n, const std::string& key) {
  check_keys(n, key, {"start", "stop", "count"});
  AxisSpec a{number(required(n, key, "start"), join(key, "start")),
             number(required(n, key, "stop"), join(key, "stop")),
             count(required(n, key, "count"), join(key, "count"))};
  if (a.count > 1 && !(a.stop > a.start))
    throw ConfigError(join(key, "stop"), line_of(n), "axis must be increasing (stop > start)");
  if (a.count == 1 && a.stop != a.start)
    throw ConfigError(join(key, "count"), line_of(n), "a single-node axis needs stop == start");
  return a;
}

inline DerivativeMode derivative(const YAML::Node& root) {
  const auto n = root["derivative"];
  if (!n) return AnalyticDerivatives{};
  if (n.IsScalar()) {
    if (n.Scalar() == "analytic") return AnalyticDerivatives{};
    if (n.Scalar() == "finite_difference") return FiniteDifference{};
    throw ConfigError("derivative", line_of(n), "expected 'analytic' or {finite_difference: h}");
  }
  check_keys(n, "derivative", {"finite_difference"});
  const auto h = n["finite_difference"];
  if (h.IsSequence()) {
    FiniteDifference fd{{}};
    for (std::size_t i = 0; i < h.size(); ++i)
      fd.steps.push_back(positive(h[i], index_key("derivative.finite_difference", i)));
    if (fd.steps.empty())
      throw ConfigError("derivative.finite_difference", line_of(h), "empty step list");
    return fd;
  }
  return FiniteDifference{{positive(h, "derivative.finite_difference")}};
}

inline void parse_family(const YAML::Node& root, Scenario& s) {
  const auto n = required(root, "", "family");
  require_map(n, "family");
  const auto type_node = required(n, "family", "type");
  s.family_type = type_node.as<std::string>();
  const auto& t = s.family_type;
  const bool has_derivative = static_cast<bool>(root["derivative"]);
  const DerivativeMode mode = derivative(root);

  if (t == "bloch_qubit") {
    check_keys(n, "family", {"type"});
    s.family = families::bloch_qubit(mode);
  } else if (t == "mixed_qubit") {
    check_keys(n, "family", {"type"});
    s.family = families::mixed_qubit(mode);
  } else if (t == "mixed_qubit_radial") {
    check_keys(n, "family", {"type", "t", "phi"});
    const double th = n["t"] ? number(n["t"], "family.t") : 0.0;
    const double ph = n["phi"] ? number(n["phi"], "family.phi") : 0.0;
    s.family = families::mixed_qubit_radial(th, ph, mode);
  } else if (t == "unitary_encoding") {
    check_keys(n, "family", {"type", "generators", "factors", "params", "psi0", "rho0"});
    std::vector<UnitaryEncoding::Factor> factors;
    std::size_t m = 0;
    if (n["generators"] && n["factors"])
      throw ConfigError("family.factors", line_of(n["factors"]), "give generators or factors, not both");
    if (n["generators"]) {
      const auto g = n["generators"];
      require_seq(g, "family.generators");
      for (std::size_t i = 0; i < g.size(); ++i)
        factors.push_back({i, hermitian(g[i], index_key("family.generators", i))});
      m = factors.size();
    } else {
      const auto f = required(n, "family", "factors");
      require_seq(f, "family.factors");
      m = count(required(n, "family", "params"), "family.params");
      for (std::size_t k = 0; k < f.size(); ++k) {
        const auto key = index_key("family.factors", k);
        check_keys(f[k], key, {"param", "generator"});
        const auto p = count(required(f[k], key, "param"), key + ".param", 0);
        if (p >= m) throw ConfigError(key + ".param", line_of(f[k]), "parameter index out of range");
        factors.push_back({p, hermitian(required(f[k], key, "generator"), key + ".generator")});
      }
    }
    if (factors.empty()) throw ConfigError("family.generators", line_of(n), "no generators");
    const auto enc = guarded(n, "family.generators", [&] { return UnitaryEncoding(factors, m); });
    s.encoding = enc;
    if (n["psi0"] && n["rho0"])
      throw ConfigError("family.rho0", line_of(n["rho0"]), "give psi0 or rho0, not both");
    if (n["psi0"]) {
      const CVector v = complex_vector(n["psi0"], "family.psi0");
      s.psi0 = guarded(n["psi0"], "family.psi0", [&] { return PureState(v); });
      s.family = guarded(n, "family.psi0", [&] { return families::unitary_encoding(enc, *s.psi0, mode); });
    } else {
      const CMatrix r = complex_matrix(required(n, "family", "rho0"), "family.rho0");
      const auto rho = guarded(n["rho0"], "family.rho0", [&] { return DensityMatrix(r); });
      s.family = guarded(n, "family.rho0", [&] { return families::unitary_encoding(enc, rho, mode); });
    }
  } else if (t == "explicit_grid") {
    check_keys(n, "family", {"type", "axes", "states"});
    if (has_derivative)
      throw ConfigError("derivative", line_of(root["derivative"]),
                        "explicit_grid differentiates between neighbouring nodes; remove this key");
    const auto ax = required(n, "family", "axes");
    require_seq(ax, "family.axes");
    std::vector<families::GridAxis> axes;
    for (std::size_t i = 0; i < ax.size(); ++i) {
      const auto a = axis(ax[i], index_key("family.axes", i));
      const double step = a.count > 1 ? (a.stop - a.start) / static_cast<double>(a.count - 1) : 1.0;
      axes.push_back({a.start, step, a.count});
    }
    const auto st = required(n, "family", "states");
    require_seq(st, "family.states");
    std::vector<DensityMatrix> states;
    for (std::size_t k = 0; k < st.size(); ++k) {
      const auto key = index_key("family.states", k);
      const CMatrix r = complex_matrix(st[k], key);
      states.push_back(guarded(st[k], key, [&] { return DensityMatrix(r); }));
    }
    s.family = guarded(n, "family.states", [&] { return families::explicit_grid(axes, states); });
  } else {
    throw ConfigError("family.type", line_of(type_node),
                      "unknown family '" + t +
                          "' (bloch_qubit, mixed_qubit, mixed_qubit_radial, unitary_encoding, "
                          "explicit_grid)");
  }
}

inline void parse_povm(const YAML::Node& root, Scenario& s) {
  const auto n = required(root, "", "povm");
  require_map(n, "povm");
  const auto type_node = required(n, "povm", "type");
  s.povm_type = type_node.as<std::string>();
  const auto d = s.family->dim();
  if (s.povm_type == "depolarized_projective") {
    check_keys(n, "povm", {"type", "epsilon"});
    const auto e = required(n, "povm", "epsilon");
    const double eps = number(e, "povm.epsilon");
    if (!(eps >= 0.0 && eps <= 1.0))
      throw ConfigError("povm.epsilon", line_of(e), "must lie in [0, 1], got " + e.Scalar());
    s.epsilon = eps;
    s.povm = Povm::depolarized_projective(d, eps);
    return;
  }
  if (s.povm_type == "projective") {
    check_keys(n, "povm", {"type", "basis"});
    const auto b = required(n, "povm", "basis");
    const CMatrix u = complex_matrix(b, "povm.basis");
    if (u.rows() != d || u.cols() != d)
      throw ConfigError("povm.basis", line_of(b), "basis must be " + std::to_string(d) + "x" + std::to_string(d));
    guarded(b, "povm.basis", [&] { check_unitary(u); return 0; });
    s.povm = guarded(b, "povm.basis", [&] { return Povm::projective(u); });
    return;
  }
  if (s.povm_type == "explicit") {
    check_keys(n, "povm", {"type", "effects", "labels"});
    const auto ef = required(n, "povm", "effects");
    require_seq(ef, "povm.effects");
    std::vector<HermitianMatrix> effects;
    for (std::size_t w = 0; w < ef.size(); ++w) {
      const auto key = index_key("povm.effects", w);
      effects.push_back(hermitian(ef[w], key));
      if (effects.back().dim() != d)
        throw ConfigError(key, line_of(ef[w]), "effect dimension differs from the family dimension " + std::to_string(d));
    }
    std::vector<std::string> labels;
    if (n["labels"]) {
      require_seq(n["labels"], "povm.labels");
      for (const auto& l : n["labels"]) labels.push_back(l.as<std::string>());
    }
    s.povm = guarded(ef, "povm.effects", [&] { return Povm(effects, labels); });
    return;
  }
  throw ConfigError("povm.type", line_of(type_node),
                    "unknown POVM '" + s.povm_type + "' (depolarized_projective, projective, explicit)");
}

inline std::vector<ParamPoint> grid_points(const std::vector<AxisSpec>& axes) {
  std::vector<std::vector<double>> values;
  for (const auto& a : axes) {
    std::vector<double> v(a.count);
    for (std::size_t k = 0; k < a.count; ++k)
      v[k] = a.count == 1 ? a.start
                          : a.start + (a.stop - a.start) * static_cast<double>(k) /
                                          static_cast<double>(a.count - 1);
    values.push_back(std::move(v));
  }
  std::vector<ParamPoint> out;
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    std::vector<double> theta;
    for (std::size_t i = 0; i < axes.size(); ++i) theta.push_back(values[i][idx[i]]);
    out.emplace_back(std::move(theta));
    std::size_t i = axes.size();
    while (i-- > 0) {
      if (++idx[i] < axes[i].count) break;
      idx[i] = 0;
      if (i == 0) return out;
    }
  }
}

inline void parse_points(const YAML::Node& root, Scenario& s, std::size_t grid_scale) {
  const auto n = required(root, "", "points");
  const auto m = s.num_params();
  if (n.IsMap()) {
    check_keys(n, "points", {"grid"});
    const auto g = required(n, "points", "grid");
    require_seq(g, "points.grid");
    if (g.size() != m)
      throw ConfigError("points.grid", line_of(g), "expected one axis per parameter (" + std::to_string(m) + ")");
    std::vector<AxisSpec> axes;
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto a = axis(g[i], index_key("points.grid", i));
      if (a.count > 1) a.count = (a.count - 1) * grid_scale + 1;
      axes.push_back(a);
    }
    s.points = grid_points(axes);
    return;
  }
  require_seq(n, "points");
  if (n.size() == 0) throw ConfigError("points", line_of(n), "no points");
  for (std::size_t k = 0; k < n.size(); ++k) {
    const auto key = index_key("points", k);
    auto v = numbers(n[k], key);
    if (v.size() != m)
      throw ConfigError(key, line_of(n[k]), "expected " + std::to_string(m) + " values, got " + std::to_string(v.size()));
    s.points.emplace_back(std::move(v));
  }
}

inline void parse_compute(const YAML::Node& root, Scenario& s) {
  const auto n = root["compute"];
  if (!n) {
    s.compute = {Computation::kTensors, Computation::kBounds};
    return;
  }
  require_seq(n, "compute");
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto name = n[i].as<std::string>();
    bool found = false;
    for (const auto& [k, c] : computation_names())
      if (k == name) {
        s.compute.insert(c);
        found = true;
      }
    if (!found) throw ConfigError(index_key("compute", i), line_of(n[i]), "unknown computation '" + name + "'");
  }
  const bool needs_pure_encoding = s.wants(Computation::kAppendixG) || s.wants(Computation::kTwoCopy);
  if (needs_pure_encoding && !(s.encoding && s.psi0))
    throw ConfigError("compute", line_of(n), "appendix_g and two_copy need a unitary_encoding family with psi0");
  if (s.wants(Computation::kPhases) && s.num_params() < 2)
    throw ConfigError("compute", line_of(n), "phases need at least two parameters");
}

inline void parse_tolerances(const YAML::Node& root, Scenario& s) {
  const auto n = root["tolerances"];
  if (!n) return;
  check_keys(n, "tolerances", {"bound", "null", "kernel", "fq_kernel", "phase", "oracle", "cross_check"});
  const std::pair<const char*, double*> fields[] = {
      {"bound", &s.tol.bound},         {"null", &s.tol.null},   {"kernel", &s.tol.kernel},
      {"fq_kernel", &s.tol.fq_kernel}, {"phase", &s.tol.phase}, {"oracle", &s.tol.oracle},
      {"cross_check", &s.tol.cross_check}};
  for (const auto& [name, ptr] : fields)
    if (n[name]) *ptr = positive(n[name], std::string("tolerances.") + name);
}

inline void parse_null_directions(const YAML::Node& root, Scenario& s) {
  const auto n = root["null_directions"];
  if (!n) return;
  require_map(n, "null_directions");
  for (const auto& kv : n) {
    const auto key = "null_directions." + kv.first.as<std::string>();
    const auto w = count(kv.first, key, 0);
    if (w >= s.povm.size()) throw ConfigError(key, line_of(kv.first), "no such outcome");
    const auto v = numbers(kv.second, key);
    if (v.size() != s.num_params())
      throw ConfigError(key, line_of(kv.second), "direction needs " + std::to_string(s.num_params()) + " components");
    s.null_directions[w] = Eigen::Map<const RVector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
}

inline void parse_phases(const YAML::Node& root, Scenario& s, std::size_t grid_scale) {
  const auto n = root["phases"];
  if (!n) {
    if (s.wants(Computation::kPhases))
      throw ConfigError("phases", line_of(root), "compute lists phases but the phases block is missing");
    return;
  }
  check_keys(n, "phases", {"params", "ranges", "grid", "base", "closed"});
  const auto m = s.num_params();
  PhaseConfig pc;
  if (n["params"]) {
    const auto p = n["params"];
    require_seq(p, "phases.params");
    if (p.size() != 2) throw ConfigError("phases.params", line_of(p), "expected two parameter indices");
    pc.u = count(p[0], "phases.params[0]", 0);
    pc.v = count(p[1], "phases.params[1]", 0);
    if (pc.u >= m || pc.v >= m || pc.u == pc.v)
      throw ConfigError("phases.params", line_of(p), "need two distinct indices below " + std::to_string(m));
  }
  const auto r = required(n, "phases", "ranges");
  require_seq(r, "phases.ranges");
  if (r.size() != 2) throw ConfigError("phases.ranges", line_of(r), "expected two [start, stop] pairs");
  for (std::size_t k = 0; k < 2; ++k) {
    const auto key = index_key("phases.ranges", k);
    const auto v = numbers(r[k], key);
    if (v.size() != 2 || !(v[1] > v[0]))
      throw ConfigError(key, line_of(r[k]), "expected an increasing [start, stop] pair");
    (k == 0 ? pc.u0 : pc.v0) = v[0];
    (k == 0 ? pc.u1 : pc.v1) = v[1];
  }
  if (n["grid"]) {
    const auto g = n["grid"];
    require_seq(g, "phases.grid");
    if (g.size() != 2) throw ConfigError("phases.grid", line_of(g), "expected two cell counts");
    pc.nu = count(g[0], "phases.grid[0]", 2);
    pc.nv = count(g[1], "phases.grid[1]", 2);
  }
  pc.nu *= grid_scale;
  pc.nv *= grid_scale;
  if (pc.nu % 2 || pc.nv % 2)
    throw ConfigError("phases.grid", line_of(n), "cell counts must be even (the error estimate halves them)");
  pc.base = std::vector<double>(m, 0.0);
  if (n["base"]) {
    pc.base = numbers(n["base"], "phases.base");
    if (pc.base.size() != m)
      throw ConfigError("phases.base", line_of(n["base"]), "expected " + std::to_string(m) + " values");
  }
  if (n["closed"]) pc.closed = boolean(n["closed"], "phases.closed");
  s.phases = pc;
}

inline void parse_oracles(const YAML::Node& root, Scenario& s) {
  const auto n = root["oracles"];
  if (!n) return;
  check_keys(n, "oracles", {"h", "shots", "probe_trials"});
  if (n["h"]) s.oracles.h = positive(n["h"], "oracles.h");
  if (n["shots"]) s.oracles.shots = count(n["shots"], "oracles.shots", static_cast<std::int64_t>(kMinShots));
  if (n["probe_trials"]) s.oracles.probe_trials = count(n["probe_trials"], "oracles.probe_trials");
}

inline void parse_weights(const YAML::Node& root, Scenario& s) {
  const auto n = root["weights"];
  const auto m = static_cast<Eigen::Index>(s.num_params());
  if (!n) {
    s.weights.push_back(CMatrix::Identity(m, m) / static_cast<double>(m));
    return;
  }
  require_seq(n, "weights");
  for (std::size_t k = 0; k < n.size(); ++k) {
    const auto key = index_key("weights", k);
    const auto h = hermitian(n[k], key);
    if (h.dim() != m) throw ConfigError(key, line_of(n[k]), "weight must be " + std::to_string(m) + "x" + std::to_string(m));
    if (std::abs(h.mat().trace() - cplx(1.0)) > 1e-10)
      throw ConfigError(key, line_of(n[k]), "weight must have unit trace");
    if (hermitian_eig(h).values(0) <= 0.0)
      throw ConfigError(key, line_of(n[k]), "weight must be positive definite");
    s.weights.push_back(h.mat());
  }
}

}  // namespace detail

struct LoadOptions {
  std::size_t grid_scale = 1;
  std::optional<std::uint64_t> seed;
};

inline Scenario parse_scenario(const std::string& text, const LoadOptions& opts = {}) {
  if (opts.grid_scale < 1) throw ConfigError("--grid-scale", -1, "must be at least 1");
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("<document>", e.mark.line + 1, e.msg);
  }
  detail::check_keys(root, "", {"schema", "family", "povm", "points", "derivative", "compute",
                                "tolerances", "null_directions", "phases", "oracles", "weights",
                                "seed"});
  Scenario s;
  s.source = text;
  if (root["schema"] && root["schema"].as<std::string>() != kScenarioSchema)
    throw ConfigError("schema", detail::line_of(root["schema"]),
                      "unsupported schema '" + root["schema"].as<std::string>() + "', expected " + kScenarioSchema);
  detail::parse_family(root, s);
  detail::parse_povm(root, s);
  detail::parse_points(root, s, opts.grid_scale);
  detail::parse_compute(root, s);
  detail::parse_tolerances(root, s);
  detail::parse_null_directions(root, s);
  detail::parse_phases(root, s, opts.grid_scale);
  detail::parse_oracles(root, s);
  detail::parse_weights(root, s);
  if (root["seed"]) s.seed = static_cast<std::uint64_t>(detail::count(root["seed"], "seed", 0));
  if (opts.seed) s.seed = *opts.seed;
  return s;
}

inline Scenario load_scenario(const std::string& path, const LoadOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", -1, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), opts);
}

}  // namespace scgt::cli
