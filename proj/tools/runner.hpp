#pragma once

// Executes a parsed scenario and assembles the "scgt-report/1" document.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace scgt::cli {

inline constexpr const char* kReportSchema = "scgt-report/1";
inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitViolation = 2;
inline constexpr int kExitPointError = 3;

using Json = nlohmann::ordered_json;

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline Json to_json(const RMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json to_json(const CMatrix& m) {
  return Json{{"re", to_json(RMatrix(m.real()))}, {"im", to_json(RMatrix(m.imag()))}};
}

inline Json to_json(const RVector& v) {
  Json a = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

inline Json to_json(const CVector& v) {
  return Json{{"re", to_json(RVector(v.real()))}, {"im", to_json(RVector(v.imag()))}};
}

/// nu_C of the example family over the whole sphere.
inline double example_nu_C_closed_form(double eps) {
  if (eps <= 0.0) return 0.0;
  if (eps >= 1.0) return 1.0;
  return 1.0 - (1.0 / eps - eps) * std::atanh(eps);
}

/// Qubit state on the Bloch sphere measured by the depolarized computational
/// basis, integrated over the full sphere in (theta, phi).
inline bool example_compatible(const Scenario& s) {
  if (s.family_type != "bloch_qubit" || s.povm_type != "depolarized_projective") return false;
  if (s.family->dim() != 2 || !s.phases) return false;
  const auto& p = *s.phases;
  constexpr double pi = std::numbers::pi;
  const auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
  return p.u == 0 && p.v == 1 && near(p.u0, 0.0) && near(p.u1, pi) && near(p.v0, 0.0) &&
         near(p.v1, 2.0 * pi);
}

struct RunResult {
  Json report;
  int exit_code = kExitOk;
  std::vector<std::string> violations;  // one line per failed check, with residuals
};

namespace detail {

class Recorder {
 public:
  explicit Recorder(RunResult& out) : out_(out) {}

  void check(Json& checks, const std::string& where, const std::string& name, const char* kind,
             bool holds, double residual, double tol) {
    checks.push_back(
        Json{{"name", name}, {"kind", kind}, {"holds", holds}, {"residual", residual}, {"tol", tol}});
    if (!holds) {
      ++violations_;
      out_.violations.push_back(where + " " + name + " (" + kind + "): residual " +
                                std::to_string(residual) + ", tol " + std::to_string(tol));
    }
  }

  void warn(const std::string& code, Json point, const std::string& message) {
    warnings_.push_back(Json{{"code", code}, {"point", std::move(point)}, {"message", message}});
  }

  Json error(const std::string& section, const Error& e) {
    ++errors_;
    return Json{{"section", section}, {"code", to_string(e.code())}, {"message", e.what()}};
  }

  Json error(const std::string& section, const std::exception& e) {
    ++errors_;
    return Json{{"section", section}, {"code", "InternalError"}, {"message", e.what()}};
  }

  Json take_warnings() { return std::move(warnings_); }
  int violations() const { return violations_; }
  int errors() const { return errors_; }

 private:
  RunResult& out_;
  Json warnings_ = Json::array();
  int violations_ = 0;
  int errors_ = 0;
};

/// Runs `f`; library or numerical failures become a per-point error entry.
template <class F>
bool guarded_section(Recorder& rec, Json& errors, const std::string& section, F&& f) {
  try {
    f();
    return true;
  } catch (const Error& e) {
    errors.push_back(rec.error(section, e));
  } catch (const std::exception& e) {
    errors.push_back(rec.error(section, e));
  }
  return false;
}

inline Json tensors_json(const TensorBundle& b, const RVector& probs) {
  Json nulls = Json::array();
  for (const auto& n : b.null_report)
    nulls.push_back(Json{{"outcome", n.outcome},
                         {"status", n.status == NullOutcome::Status::kSkipped ? "skipped" : "directional"}});
  return Json{{"Q", to_json(b.Q)},
              {"F_Q", to_json(b.F_Q)},
              {"G", to_json(b.G)},
              {"C", to_json(b.C)},
              {"F_C", to_json(b.F_C)},
              {"I", to_json(b.I)},
              {"D", to_json(b.D)},
              {"Delta", to_json(b.Delta)},
              {"probabilities", to_json(probs)},
              {"null_outcomes", nulls},
              {"kernel_pairs_dropped", b.kernel_pairs_dropped}};
}

inline Json loewner_json(const LoewnerReport& r) {
  return Json{{"holds", r.holds}, {"min_eigenvalue", r.min_eigenvalue}, {"witness", to_json(r.witness_z)},
              {"tol", r.tol}};
}

inline Json saturation_json(const SaturationReport& r) {
  return Json{{"mode", r.mode == SaturationReport::Mode::kRegular ? "regular" : "null"},
              {"condition_residual", r.condition_residual},
              {"satisfied", r.satisfied},
              {"loewner_gap", r.loewner_gap},
              {"outcomes_checked", r.outcomes_checked},
              {"tol", r.tol}};
}

/// F_C from the regular outcomes only; this is what a probability-based
/// oracle can see.
inline RMatrix regular_cfim(const TensorBundle& b) {
  const auto& reg = b.partition.regular;
  ChiTable t;
  t.values = CMatrix(static_cast<Eigen::Index>(reg.size()), b.chi.values.cols());
  t.probs = RVector(static_cast<Eigen::Index>(reg.size()));
  for (std::size_t r = 0; r < reg.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    const auto w = static_cast<Eigen::Index>(reg[r]);
    t.values.row(row) = b.chi.values.row(w);
    t.probs(row) = b.chi.probs(w);
    t.outcomes.push_back(reg[r]);
  }
  return decompose(t).F_C;
}

class PointRunner {
 public:
  PointRunner(const Scenario& s, Recorder& rec) : s_(s), rec_(rec) {}

  Json run(std::size_t idx) {
    const ParamPoint& p = s_.points[idx];
    const std::string where = "point " + std::to_string(idx);
    const Json theta = p.values();
    Json out{{"index", idx}, {"theta", theta}};
    Json checks = Json::array();
    Json errors = Json::array();

    BundleOptions bo;
    bo.null_tol = s_.tol.null;
    bo.kernel_tol = s_.tol.kernel;
    bo.null_directions = s_.null_directions;

    TensorBundle b;
    RVector probs;
    const bool needs_bundle = s_.wants(Computation::kTensors) || s_.wants(Computation::kBounds) ||
                              s_.wants(Computation::kAppendixG) || s_.wants(Computation::kOracles);
    bool have_bundle = false;
    if (needs_bundle) {
      have_bundle = guarded_section(rec_, errors, "tensors", [&] {
        b = compute_bundle(*s_.family, p, s_.povm, bo);
        probs = born_probabilities(s_.family->state(p), s_.povm).probs;
      });
      if (have_bundle) {
        for (const auto& n : b.null_report)
          if (n.status == NullOutcome::Status::kSkipped)
            rec_.warn("NullOutcomeSkipped", theta,
                      "outcome " + std::to_string(n.outcome) +
                          " is null and no direction was given; it contributes zero");
        if (b.probs_clipped)
          rec_.warn("ProbabilityClipped", theta, "negative Born probabilities were clipped to zero");
      }
    }

    if (have_bundle && s_.wants(Computation::kTensors)) out["tensors"] = tensors_json(b, probs);
    if (have_bundle && s_.wants(Computation::kBounds)) out["bounds"] = bounds(b, p, theta, where, checks, errors);
    if (s_.wants(Computation::kAppendixG))
      guarded_section(rec_, errors, "appendix_g", [&] {
        out["appendix_g"] = appendix_g(have_bundle ? &b : nullptr, p, where, checks);
      });
    if (s_.wants(Computation::kTwoCopy))
      guarded_section(rec_, errors, "two_copy", [&] { out["two_copy"] = two_copy(p, where, checks); });
    if (have_bundle && s_.wants(Computation::kOracles))
      out["oracles"] = oracles(b, p, idx, theta, where, checks, errors);

    out["checks"] = std::move(checks);
    out["errors"] = std::move(errors);
    return out;
  }

 private:
  Json bounds(const TensorBundle& b, const ParamPoint& p, const Json& theta, const std::string& where,
              Json& checks, Json& errors) {
    const double tol = s_.tol.bound;
    Json out;
    const auto o1 = check_loewner(b.C, b.Q, tol);
    rec_.check(checks, where, "loewner.C_le_Q", "inequality", o1.holds, o1.min_eigenvalue, tol);
    Json per = Json::array();
    for (std::size_t w = 0; w < b.C_per_outcome.size(); ++w) {
      const auto r = check_loewner(b.C_per_outcome[w], b.Q_per_outcome[w], tol);
      rec_.check(checks, where, "loewner.outcome[" + std::to_string(w) + "]", "inequality",
                 r.holds, r.min_eigenvalue, tol);
      per.push_back(loewner_json(r));
    }
    out["loewner"] = Json{{"C_le_Q", loewner_json(o1)}, {"per_outcome", per}};

    const auto ch = observation2_chain(b, tol);
    rec_.check(checks, where, "chain.I_psd", "inequality", ch.left.holds, ch.left.min_eigenvalue, tol);
    rec_.check(checks, where, "chain.FC_plus_I_le_FQ", "inequality", ch.right.holds,
               ch.right.min_eigenvalue, tol);
    out["chain"] = Json{{"I_psd", loewner_json(ch.left)}, {"FC_plus_I_le_FQ", loewner_json(ch.right)}};

    const auto tb = trace_bound(b, tol);
    rec_.check(checks, where, "trace_bound", "inequality", tb.holds, tb.gap, tol);
    out["trace_bound"] = Json{{"delta_trace_norm", tb.delta_trace_norm}, {"lhs", tb.lhs}, {"rhs", tb.rhs},
                              {"gap", tb.gap}, {"holds", tb.holds}, {"tol", tb.tol}};

    try {
      fq_inv_sqrt(b.F_Q, s_.tol.fq_kernel);
      Json scalars = Json::array();
      for (std::size_t k = 0; k < s_.weights.size(); ++k) {
        const auto sb = scalar_bound(b, s_.weights[k], s_.tol.fq_kernel, tol);
        rec_.check(checks, where, "scalar_bound[" + std::to_string(k) + "]", "inequality", sb.holds,
                   sb.residual, tol);
        scalars.push_back(Json{{"W", to_json(sb.W_used)}, {"lhs", sb.lhs}, {"rhs", sb.rhs},
                               {"gamma_W", sb.gamma_W}, {"residual", sb.residual}, {"holds", sb.holds},
                               {"tol", sb.tol}});
      }
      out["scalar_bound"] = std::move(scalars);
      const auto gm = gill_massar_compare(b, s_.family->dim(), s_.tol.fq_kernel);
      out["gill_massar"] = Json{{"lhs", gm.lhs}, {"gamma", gm.gamma}, {"ours", gm.ours}, {"gm", gm.gm},
                                {"tighter", gm.tighter}};
      const auto rs = r_sandwich(b, tol, s_.tol.fq_kernel);
      const double rs_res = std::min({rs.R - rs.lower, rs.upper - rs.R, 1.0 - rs.upper});
      rec_.check(checks, where, "r_sandwich", "inequality", rs.holds, rs_res, tol);
      out["r_sandwich"] = Json{{"R", rs.R}, {"lower", rs.lower}, {"lower_abs", rs.lower_abs},
                               {"upper", rs.upper}, {"holds", rs.holds},
                               {"abs_lower_holds", rs.abs_lower_holds}, {"residual", rs_res}, {"tol", rs.tol}};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kSingularFQ) {
        errors.push_back(rec_.error("bounds", e));
      } else {
        rec_.warn("SingularFQ", theta, std::string("F_Q is not invertible; scalar bound, ") +
                                           "Gill-Massar comparison and R sandwich skipped: " + e.what());
        out["singular_F_Q"] = true;
      }
    }

    if (is_rank_one(s_.povm)) {
      guarded_section(rec_, errors, "saturation", [&] {
        const auto rho = s_.family->state(p);
        const auto slds = compute_slds(rho, s_.family->state_derivatives(p), s_.tol.kernel);
        Json sat{{"regular", saturation_json(saturation_regular(rho, s_.povm, slds, tol, s_.tol.null))}};
        if (!b.partition.null.empty())
          sat["null"] = saturation_json(saturation_null(rho, s_.povm, b.partition.null, slds, tol, s_.tol.null));
        const auto iz = izero_conditions(rho, s_.povm, slds, tol, s_.tol.null);
        sat["izero"] = Json{{"regular_residual", iz.regular_residual}, {"null_residual", iz.null_residual},
                            {"satisfied", iz.satisfied}, {"I_max", iz.I_max}, {"tol", iz.tol}};
        out["saturation"] = std::move(sat);
      });
    }
    return out;
  }

  Json appendix_g(const TensorBundle* b, const ParamPoint& p, const std::string& where, Json& checks) {
    const auto gens = generators(*s_.encoding, p, s_.povm);
    const auto ag = appendix_g_bundle(*s_.psi0, gens, s_.tol.null);
    const auto& g = ag.bundle;
    Json out{{"Q", to_json(g.Q)}, {"F_Q", to_json(g.F_Q)}, {"G", to_json(g.G)}, {"C", to_json(g.C)},
             {"F_C", to_json(g.F_C)}, {"I", to_json(g.I)}, {"D", to_json(g.D)}, {"N", to_json(ag.N.mat())},
             {"eta", to_json(ag.eta)}};
    if (b) {
      const double r = std::max({max_abs(CMatrix(g.Q - b->Q)), max_abs(RMatrix(g.F_Q - b->F_Q)),
                                 max_abs(RMatrix(g.G - b->G)), max_abs(CMatrix(g.C - b->C)),
                                 max_abs(RMatrix(g.F_C - b->F_C)), max_abs(RMatrix(g.I - b->I)),
                                 max_abs(RMatrix(g.D - b->D))});
      rec_.check(checks, where, "appendix_g.matches_tensors", "agreement", r <= s_.tol.bound, r, s_.tol.bound);
      out["residual"] = r;
    }
    return out;
  }

  Json two_copy(const ParamPoint& p, const std::string& where, Json& checks) {
    const auto gens = generators(*s_.encoding, p, s_.povm);
    const auto r = two_copy_expectations(*s_.psi0, gens, s_.tol.null);
    const double tol = s_.tol.bound;
    rec_.check(checks, where, "two_copy.k_matches_single_copy", "agreement", r.k_residual <= tol, r.k_residual, tol);
    rec_.check(checks, where, "two_copy.k_real", "agreement", r.imag_residual <= tol, r.imag_residual, tol);
    rec_.check(checks, where, "two_copy.hermitian_split", "agreement", r.split_residual <= tol,
               r.split_residual, tol);
    return Json{{"k_plus", to_json(r.k_plus)},
                {"k_minus", to_json(r.k_minus)},
                {"single_plus", to_json(r.single_plus)},
                {"single_minus", to_json(r.single_minus)},
                {"k_residual", r.k_residual},
                {"imag_residual", r.imag_residual},
                {"split_residual", r.split_residual}};
  }

  Json oracles(const TensorBundle& b, const ParamPoint& p, std::size_t idx, const Json& theta,
               const std::string& where, Json& checks, Json& errors) {
    Json out;
    const RMatrix ref = regular_cfim(b);
    const CounterRng seeds(s_.seed);
    guarded_section(rec_, errors, "oracles.fd_cfim", [&] {
      const auto fd = fd_cfim(*s_.family, s_.povm, p, s_.oracles.h, s_.tol.null);
      for (auto w : fd.skipped)
        rec_.warn("OracleOutcomeSkipped", theta,
                  "outcome " + std::to_string(w) + " is null on the whole stencil; left out of fd_cfim");
      const double r = max_abs(RMatrix(fd.F - ref));
      rec_.check(checks, where, "oracles.fd_cfim", "agreement", r <= s_.tol.oracle, r, s_.tol.oracle);
      out["fd_cfim"] = Json{{"F", to_json(fd.F)}, {"reference", to_json(ref)}, {"residual", r},
                            {"h", s_.oracles.h}, {"skipped", fd.skipped}};
    });
    guarded_section(rec_, errors, "oracles.mc_cfim", [&] {
      const std::uint64_t seed = seeds.at(2 * idx);
      const auto mc = mc_cfim(*s_.family, s_.povm, p, s_.oracles.h, s_.oracles.shots, seed, s_.tol.null);
      // largest excess of |estimate - reference| over five standard errors
      const RMatrix excess = (mc.estimate - ref).cwiseAbs() - 5.0 * mc.stderr_;
      const double r = excess.maxCoeff();
      constexpr double slack = 1e-8;
      rec_.check(checks, where, "oracles.mc_cfim_5sigma", "agreement", r <= slack, r, slack);
      out["mc_cfim"] = Json{{"estimate", to_json(mc.estimate)}, {"stderr", to_json(mc.stderr_)},
                            {"counts", mc.counts}, {"shots", mc.shots}, {"seed", seed}, {"excess", r}};
    });
    guarded_section(rec_, errors, "oracles.probe", [&] {
      const std::uint64_t seed = seeds.at(2 * idx + 1);
      const auto pr = random_loewner_probe(b.C, b.Q, s_.oracles.probe_trials, seed);
      rec_.check(checks, where, "oracles.probe_C_le_Q", "inequality", pr.min_value >= -s_.tol.bound,
                 pr.min_value, s_.tol.bound);
      out["probe"] = Json{{"min_value", pr.min_value}, {"min_eigenvalue", pr.min_eigenvalue},
                          {"argmin", to_json(pr.argmin)}, {"trials", s_.oracles.probe_trials}, {"seed", seed}};
    });
    return out;
  }

  const Scenario& s_;
  Recorder& rec_;
};

inline Json phase_json(const PhaseResult& r) {
  return Json{{"phi_Q", r.phi_Q}, {"phi_C", r.phi_C}, {"nu_Q", r.nu_Q}, {"nu_C", r.nu_C},
              {"integer_distance", r.integer_distance}};
}

inline Json phases(const Scenario& s, Recorder& rec) {
  const auto& pc = *s.phases;
  Json out{{"params", {pc.u, pc.v}},
           {"ranges", {{pc.u0, pc.u1}, {pc.v0, pc.v1}}},
           {"grid", {pc.nu, pc.nv}},
           {"base", pc.base},
           {"closed", pc.closed}};
  Json checks = Json::array();
  Json errors = Json::array();
  guarded_section(rec, errors, "phases", [&] {
    const auto grid = SurfaceGrid::uniform(pc.u0, pc.u1, pc.nu, pc.v0, pc.v1, pc.nv);
    SampleOptions so;
    so.null_tol = s.tol.null;
    so.cross_check = s.family->is_pure();
    const auto r = integrate_phases(*s.family, s.povm, SurfaceSpec{pc.u, pc.v, ParamPoint(pc.base)}, grid,
                                    s.tol.phase, so);
    out["fine"] = phase_json(r.fine);
    out["coarse"] = phase_json(r.coarse);
    out["error_nu_Q"] = r.error_nu_Q;
    out["error_nu_C"] = r.error_nu_C;
    if (so.cross_check) {
      out["max_cross_check"] = r.max_cross_check;
      rec.check(checks, "phases", "phases.cross_check", "agreement", r.max_cross_check <= s.tol.cross_check,
                r.max_cross_check, s.tol.cross_check);
    }
    if (pc.closed)
      rec.check(checks, "phases", "phases.nu_Q_integer", "agreement", r.fine.integer_distance <= s.tol.phase,
                r.fine.integer_distance, s.tol.phase);
    if (example_compatible(s)) {
      const double cf = example_nu_C_closed_form(*s.epsilon);
      out["nu_C_closed_form"] = cf;
      out["nu_C_abs_diff"] = std::abs(r.fine.nu_C - cf);
    }
  });
  out["checks"] = std::move(checks);
  out["errors"] = std::move(errors);
  return out;
}

}  // namespace detail

inline RunResult run_scenario(const Scenario& s) {
  RunResult result;
  detail::Recorder rec(result);
  Json& rep = result.report;
  rep["schema"] = kReportSchema;
  rep["provenance"] = Json{{"config_hash", "fnv1a64:" + hex64(fnv1a64(s.source))},
                           {"version", kVersion},
                           {"seed", s.seed}};
  rep["family"] = Json{{"type", s.family_type}, {"dim", s.family->dim()}, {"params", s.num_params()}};
  rep["povm"] = Json{{"type", s.povm_type}, {"outcomes", s.povm.size()}};
  if (s.epsilon) rep["povm"]["epsilon"] = *s.epsilon;
  Json compute = Json::array();
  for (const auto& [name, c] : computation_names())
    if (s.wants(c)) compute.push_back(name);
  rep["compute"] = compute;

  const bool per_point = s.wants(Computation::kTensors) || s.wants(Computation::kBounds) ||
                         s.wants(Computation::kAppendixG) || s.wants(Computation::kTwoCopy) ||
                         s.wants(Computation::kOracles);
  Json points = Json::array();
  if (per_point) {
    detail::PointRunner runner(s, rec);
    for (std::size_t k = 0; k < s.points.size(); ++k) points.push_back(runner.run(k));
  }
  rep["points"] = std::move(points);
  if (s.wants(Computation::kPhases)) rep["phases"] = detail::phases(s, rec);
  rep["warnings"] = rec.take_warnings();

  result.exit_code = rec.violations() > 0 ? kExitViolation : rec.errors() > 0 ? kExitPointError : kExitOk;
  rep["status"] = Json{{"exit_code", result.exit_code}, {"violations", rec.violations()}, {"errors", rec.errors()}};
  return result;
}

struct SweepRow {
  double epsilon, nu_C, closed_form, abs_diff;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  int exit_code = kExitOk;
};

/// nu_C of the example scenario for each epsilon, next to the closed form.
inline SweepResult sweep_epsilon(const Scenario& base, const std::vector<double>& epsilons) {
  if (base.family_type != "bloch_qubit" || base.povm_type != "depolarized_projective" ||
      base.family->dim() != 2)
    throw ConfigError("family", -1, "sweep-epsilon needs bloch_qubit with a depolarized_projective POVM");
  PhaseConfig pc;
  if (base.phases) pc = *base.phases;
  else {
    pc.u1 = std::numbers::pi;
    pc.v1 = 2.0 * std::numbers::pi;
    pc.base = {0.0, 0.0};
  }
  Scenario s = base;
  s.phases = pc;
  if (!example_compatible(s))
    throw ConfigError("phases.ranges", -1, "sweep-epsilon integrates over the whole sphere [0, pi] x [0, 2 pi]");
  SweepResult out;
  for (double eps : epsilons) {
    if (!(eps >= 0.0 && eps <= 1.0))
      throw ConfigError("--epsilons", -1, "epsilon " + std::to_string(eps) + " outside [0, 1]");
    const auto povm = Povm::depolarized_projective(2, eps);
    const auto grid = SurfaceGrid::uniform(pc.u0, pc.u1, pc.nu, pc.v0, pc.v1, pc.nv);
    SampleOptions so;
    so.null_tol = s.tol.null;
    const auto r = integrate_phases(*s.family, povm, SurfaceSpec{0, 1, ParamPoint(pc.base)}, grid,
                                    std::numeric_limits<double>::infinity(), so);
    const double cf = example_nu_C_closed_form(eps);
    out.rows.push_back({eps, r.fine.nu_C, cf, std::abs(r.fine.nu_C - cf)});
    if (out.rows.back().abs_diff > s.tol.phase) out.exit_code = kExitViolation;
  }
  return out;
}

}  // namespace scgt::cli
