#pragma once

// Berry connection and curvature of pure-state families, the semi-classical
// integrand -D/2, and midpoint-rule surface integration of both over a
// rectangular patch of a two-parameter manifold.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "scgt/family.hpp"
#include "scgt/linalg.hpp"
#include "scgt/quantum.hpp"
#include "scgt/sld.hpp"
#include "scgt/tensors.hpp"

namespace scgt {

inline constexpr double kConnectionTol = 1e-9;

struct BerryConnection {
  RVector A;                   // A_j = i <psi|d_j psi>
  std::vector<CVector> A_w;    // [A_w]_j = i <psi|E_w|d_j psi>
  RVector probs;
  double imag_residual = 0.0;  // max |Im i<psi|d_j psi>|
};

inline BerryConnection berry_connection(const PureState& psi, const std::vector<CVector>& dpsi,
                                        const Povm& povm) {
  if (psi.dim() != povm.dim()) throw Error(ErrorCode::kDimMismatch, "state and POVM dims");
  const auto m = static_cast<Eigen::Index>(dpsi.size());
  BerryConnection out;
  out.A = RVector::Zero(m);
  out.probs = RVector(static_cast<Eigen::Index>(povm.size()));
  for (Eigen::Index j = 0; j < m; ++j) {
    if (dpsi[j].size() != psi.dim()) throw Error(ErrorCode::kDimMismatch, "dpsi dimension");
    const cplx a = kI * psi.vec().dot(dpsi[j]);
    out.A(j) = a.real();
    out.imag_residual = std::max(out.imag_residual, std::abs(a.imag()));
  }
  for (std::size_t w = 0; w < povm.size(); ++w) {
    const CMatrix& e = povm.effect(w).mat();
    const CVector ep = e * psi.vec();
    out.probs(static_cast<Eigen::Index>(w)) = psi.vec().dot(ep).real();
    CVector aw(m);
    for (Eigen::Index j = 0; j < m; ++j) aw(j) = kI * ep.dot(dpsi[j]);
    out.A_w.push_back(std::move(aw));
  }
  return out;
}

/// Omega = -G / 2 with G the imaginary part of the pure-state QGT.
inline RMatrix curvature_Q(const PureState& psi, const std::vector<CVector>& dpsi) {
  return -0.5 * qgt_pure(psi, dpsi).imag();
}

struct CurvatureC {
  RMatrix D;          // 4 sum_w Im(conj(A_wi) A_wj) / p_w
  RMatrix integrand;  // -D / 2
  std::optional<double> cross_check;  // max |D - decompose(chi).D| when requested
};

inline CurvatureC curvature_C(const PureState& psi, const std::vector<CVector>& dpsi,
                              const Povm& povm, double null_tol = kDefaultNullTol,
                              bool cross_check = false) {
  const auto conn = berry_connection(psi, dpsi, povm);
  const auto m = static_cast<Eigen::Index>(dpsi.size());
  CurvatureC out{RMatrix::Zero(m, m), RMatrix(), std::nullopt};
  for (std::size_t w = 0; w < povm.size(); ++w) {
    const double p = conn.probs(static_cast<Eigen::Index>(w));
    if (p <= null_tol)
      throw Error(ErrorCode::kNullOutcomeOnGrid,
                  "outcome " + std::to_string(w) + " has p = " + std::to_string(p));
    const CVector& a = conn.A_w[w];
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        out.D(i, j) += 4.0 * (std::conj(a(i)) * a(j)).imag() / p;
  }
  out.integrand = -0.5 * out.D;
  if (cross_check) {
    const DensityMatrix rho(psi);
    const auto dec = decompose(chi_table(rho, povm, sld_pure(psi, dpsi)));
    out.cross_check = max_abs(RMatrix(out.D - dec.D));
  }
  return out;
}

/// Rectangular product grid over (theta_u, theta_v) with cell edges along each
/// axis; integrands are sampled at cell midpoints.
class SurfaceGrid {
 public:
  SurfaceGrid(std::vector<double> edges_u, std::vector<double> edges_v)
      : eu_(std::move(edges_u)), ev_(std::move(edges_v)) {
    check_axis(eu_, "u");
    check_axis(ev_, "v");
  }

  static SurfaceGrid uniform(double u0, double u1, std::size_t nu, double v0, double v1,
                             std::size_t nv) {
    return SurfaceGrid(linspace(u0, u1, nu), linspace(v0, v1, nv));
  }

  std::size_t cells_u() const { return eu_.size() - 1; }
  std::size_t cells_v() const { return ev_.size() - 1; }
  const std::vector<double>& edges_u() const { return eu_; }
  const std::vector<double>& edges_v() const { return ev_; }
  double mid_u(std::size_t k) const { return 0.5 * (eu_[k] + eu_[k + 1]); }
  double mid_v(std::size_t l) const { return 0.5 * (ev_[l] + ev_[l + 1]); }
  double area(std::size_t k, std::size_t l) const {
    return (eu_[k + 1] - eu_[k]) * (ev_[l + 1] - ev_[l]);
  }

  /// Same patch with each cell count divided by `factor`; uniform grids only.
  SurfaceGrid coarsened(std::size_t factor) const {
    if (cells_u() % factor != 0 || cells_v() % factor != 0)
      throw Error(ErrorCode::kInvalidArgument, "cell counts must be divisible by the factor");
    return uniform(eu_.front(), eu_.back(), cells_u() / factor, ev_.front(), ev_.back(),
                   cells_v() / factor);
  }

 private:
  static std::vector<double> linspace(double a, double b, std::size_t cells) {
    if (cells == 0) throw Error(ErrorCode::kInvalidArgument, "grid needs at least one cell");
    std::vector<double> e(cells + 1);
    for (std::size_t k = 0; k <= cells; ++k)
      e[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(cells);
    e.back() = b;
    return e;
  }

  static void check_axis(const std::vector<double>& e, const char* name) {
    if (e.size() < 2)
      throw Error(ErrorCode::kInvalidArgument, std::string("axis ") + name + " needs two edges");
    for (std::size_t k = 0; k + 1 < e.size(); ++k)
      if (!(e[k + 1] > e[k]) || !std::isfinite(e[k + 1]))
        throw Error(ErrorCode::kInvalidArgument,
                    std::string("axis ") + name + " is not strictly increasing");
  }

  std::vector<double> eu_;
  std::vector<double> ev_;
};

/// Omega_uv and -D_uv / 2 at every cell midpoint, row-major (u outer).
struct CurvatureField {
  RMatrix omega_Q;
  RMatrix omega_C;
  double max_cross_check = 0.0;  // connection formula vs decompose, when sampled with it
};

/// Pairwise summation of v[lo, hi).
inline double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (std::size_t k = lo; k < hi; ++k) s += v[k];
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

struct PhaseResult {
  double phi_Q = 0.0;
  double phi_C = 0.0;
  double nu_Q = 0.0;
  double nu_C = 0.0;
  double integer_distance = 0.0;  // |nu_Q - round(nu_Q)|
};

inline PhaseResult surface_integrate(const CurvatureField& field, const SurfaceGrid& grid) {
  const auto nu = grid.cells_u(), nv = grid.cells_v();
  if (static_cast<std::size_t>(field.omega_Q.rows()) != nu ||
      static_cast<std::size_t>(field.omega_Q.cols()) != nv ||
      field.omega_C.rows() != field.omega_Q.rows() || field.omega_C.cols() != field.omega_Q.cols())
    throw Error(ErrorCode::kDimMismatch, "curvature field does not match the grid");
  if (!field.omega_Q.allFinite() || !field.omega_C.allFinite())
    throw Error(ErrorCode::kDomainError, "non-finite curvature sample");
  std::vector<double> q, c;
  q.reserve(nu * nv);
  c.reserve(nu * nv);
  for (std::size_t k = 0; k < nu; ++k)
    for (std::size_t l = 0; l < nv; ++l) {
      const double a = grid.area(k, l);
      const auto ki = static_cast<Eigen::Index>(k), li = static_cast<Eigen::Index>(l);
      q.push_back(field.omega_Q(ki, li) * a);
      c.push_back(field.omega_C(ki, li) * a);
    }
  PhaseResult r;
  r.phi_Q = pairwise_sum(q, 0, q.size());
  r.phi_C = pairwise_sum(c, 0, c.size());
  r.nu_Q = r.phi_Q / (2.0 * std::numbers::pi);
  r.nu_C = r.phi_C / (2.0 * std::numbers::pi);
  r.integer_distance = std::abs(r.nu_Q - std::round(r.nu_Q));
  return r;
}

/// Which two parameters span the surface; the others stay at `base`.
struct SurfaceSpec {
  std::size_t u = 0;
  std::size_t v = 1;
  ParamPoint base;
};

struct SampleOptions {
  double null_tol = kDefaultNullTol;
  bool cross_check = false;
};

/// Samples both curvatures of `family` at the grid midpoints. Pure families use
/// the connection formula for D; mixed families fall back to the tensor bundle.
inline CurvatureField sample_curvature(const ParamStateFamily& family, const Povm& povm,
                                       const SurfaceSpec& surf, const SurfaceGrid& grid,
                                       const SampleOptions& opts = {}) {
  const auto m = family.num_params();
  if (m < 2 || surf.u >= m || surf.v >= m || surf.u == surf.v)
    throw Error(ErrorCode::kInvalidArgument, "surface needs two distinct parameters");
  if (surf.base.size() != m) throw Error(ErrorCode::kDimMismatch, "surface base point");
  const auto u = static_cast<Eigen::Index>(surf.u), v = static_cast<Eigen::Index>(surf.v);
  const auto nu = grid.cells_u(), nv = grid.cells_v();
  CurvatureField f{RMatrix(nu, nv), RMatrix(nu, nv), 0.0};
  auto theta = surf.base.values();
  for (std::size_t k = 0; k < nu; ++k) {
    theta[surf.u] = grid.mid_u(k);
    for (std::size_t l = 0; l < nv; ++l) {
      theta[surf.v] = grid.mid_v(l);
      const ParamPoint p(theta);
      const auto ki = static_cast<Eigen::Index>(k), li = static_cast<Eigen::Index>(l);
      if (family.is_pure()) {
        const auto jet = family.pure_jet(p);
        f.omega_Q(ki, li) = curvature_Q(jet.psi, jet.dpsi)(u, v);
        const auto cc = curvature_C(jet.psi, jet.dpsi, povm, opts.null_tol, opts.cross_check);
        f.omega_C(ki, li) = cc.integrand(u, v);
        if (cc.cross_check) f.max_cross_check = std::max(f.max_cross_check, *cc.cross_check);
      } else {
        BundleOptions bo;
        bo.null_tol = opts.null_tol;
        const auto b = compute_bundle(family, p, povm, bo);
        if (!b.partition.null.empty())
          throw Error(ErrorCode::kNullOutcomeOnGrid,
                      "outcome " + std::to_string(b.partition.null.front()) + " is null");
        f.omega_Q(ki, li) = -0.5 * b.G(u, v);
        f.omega_C(ki, li) = -0.5 * b.D(u, v);
      }
    }
  }
  return f;
}

struct RichardsonPhase {
  PhaseResult fine;
  PhaseResult coarse;
  double error_nu_Q = 0.0;  // |nu_fine - nu_coarse| / 3
  double error_nu_C = 0.0;
  double max_cross_check = 0.0;
};

/// Integrates on `grid` and on the grid with half the cells per axis. The
/// midpoint rule is second order, so |I_N - I_{N/2}| / 3 estimates the error
/// of the fine result. Throws GridTooCoarse when either estimate exceeds tol.
inline RichardsonPhase integrate_phases(const ParamStateFamily& family, const Povm& povm,
                                        const SurfaceSpec& surf, const SurfaceGrid& grid,
                                        double tol = std::numeric_limits<double>::infinity(),
                                        const SampleOptions& opts = {}) {
  RichardsonPhase r;
  const auto ff = sample_curvature(family, povm, surf, grid, opts);
  r.fine = surface_integrate(ff, grid);
  const auto cg = grid.coarsened(2);
  const auto fc = sample_curvature(family, povm, surf, cg, opts);
  r.coarse = surface_integrate(fc, cg);
  r.error_nu_Q = std::abs(r.fine.nu_Q - r.coarse.nu_Q) / 3.0;
  r.error_nu_C = std::abs(r.fine.nu_C - r.coarse.nu_C) / 3.0;
  r.max_cross_check = std::max(ff.max_cross_check, fc.max_cross_check);
  if (r.error_nu_Q > tol || r.error_nu_C > tol)
    throw Error(ErrorCode::kGridTooCoarse,
                "Richardson error estimate " + std::to_string(std::max(r.error_nu_Q, r.error_nu_C)) +
                    " exceeds " + std::to_string(tol));
  return r;
}

}  // namespace scgt
