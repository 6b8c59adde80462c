#pragma once

// Matrix and scalar inequalities between the quantum and semi-classical
// tensors, and the saturation / I = 0 condition checkers for rank-one POVMs.
// Every check reports a residual or witness next to its verdict.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "scgt/linalg.hpp"
#include "scgt/quantum.hpp"
#include "scgt/sld.hpp"
#include "scgt/tensors.hpp"

namespace scgt {

inline constexpr double kBoundTol = 1e-9;
inline constexpr double kRankOneTol = 1e-10;

struct LoewnerReport {
  bool holds = false;
  double min_eigenvalue = 0.0;  // of B - A
  CVector witness_z;            // unit vector attaining it
  double tol = kBoundTol;
};

/// A <= B in the Loewner order, i.e. z^dagger (B - A) z >= -tol for all z.
inline LoewnerReport check_loewner(const CMatrix& a, const CMatrix& b, double tol = kBoundTol) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorCode::kDimMismatch, "Loewner comparison of different shapes");
  const auto es = hermitian_eig(HermitianMatrix(CMatrix(b - a)));
  return {es.values(0) >= -tol, es.values(0), es.vectors.col(0), tol};
}

inline LoewnerReport check_loewner(const RMatrix& a, const RMatrix& b, double tol = kBoundTol) {
  return check_loewner(CMatrix(a.cast<cplx>()), CMatrix(b.cast<cplx>()), tol);
}

struct ChainReport {
  LoewnerReport left;   // F_C <= F_C + I
  LoewnerReport right;  // F_C + I <= F_Q
  bool holds() const { return left.holds && right.holds; }
};

inline ChainReport observation2_chain(const TensorBundle& b, double tol = kBoundTol) {
  const RMatrix fci = b.F_C + b.I;
  return {check_loewner(b.F_C, fci, tol), check_loewner(fci, b.F_Q, tol)};
}

struct TraceBoundReport {
  double delta_trace_norm = 0.0;
  double lhs = 0.0;  // ||Delta||_tr + tr(F_C + I)
  double rhs = 0.0;  // tr F_Q
  double gap = 0.0;  // rhs - lhs
  bool holds = false;
  double tol = kBoundTol;
};

inline TraceBoundReport trace_bound(const TensorBundle& b, double tol = kBoundTol) {
  TraceBoundReport r;
  r.delta_trace_norm = antisymmetric_trace_norm(b.Delta);
  r.lhs = r.delta_trace_norm + (b.F_C + b.I).trace();
  r.rhs = b.F_Q.trace();
  r.gap = r.rhs - r.lhs;
  r.holds = r.gap >= -tol;
  r.tol = tol;
  return r;
}

/// F_Q^{-1/2}, refusing when F_Q has a kernel.
inline CMatrix fq_inv_sqrt(const RMatrix& fq, double kernel_tol) {
  const auto inv = inv_sqrt_psd(HermitianMatrix::from_real(fq), kernel_tol);
  if (inv.singular)
    throw Error(ErrorCode::kSingularFQ,
                std::to_string(inv.truncated) + " eigenvalue(s) of F_Q below the kernel threshold");
  return inv.value.mat();
}

struct ScalarBoundReport {
  double lhs = 0.0;      // tr(W F_Q^{-1/2} F_C F_Q^{-1/2})
  double rhs = 0.0;      // 1 - Gamma_W
  double gamma_W = 0.0;  // tr(W F_Q^{-1/2} I F_Q^{-1/2}) + ||sqrt W F_Q^{-1/2} Delta F_Q^{-1/2} sqrt W||_tr
  double residual = 0.0; // rhs - lhs
  CMatrix W_used;
  bool holds = false;
  double tol = kBoundTol;
};

inline ScalarBoundReport scalar_bound(const TensorBundle& b, const CMatrix& w,
                                      double kernel_tol = kDefaultKernelTol,
                                      double tol = kBoundTol) {
  const auto m = b.num_params();
  if (w.rows() != m || w.cols() != m) throw Error(ErrorCode::kDimMismatch, "weight matrix shape");
  const HermitianMatrix wh(w);
  if (std::abs(wh.mat().trace() - cplx(1.0)) > 1e-10)
    throw Error(ErrorCode::kInvalidArgument, "weight matrix must have unit trace");
  if (hermitian_eig(wh).values(0) <= 0.0)
    throw Error(ErrorCode::kInvalidArgument, "weight matrix must be positive definite");

  ScalarBoundReport r;
  r.W_used = wh.mat();
  r.tol = tol;
  const CMatrix fm = fq_inv_sqrt(b.F_Q, kernel_tol);
  const CMatrix sw = sqrt_psd(wh).mat();
  r.lhs = (wh.mat() * fm * b.F_C.cast<cplx>() * fm).trace().real();
  const double i_term = (wh.mat() * fm * b.I.cast<cplx>() * fm).trace().real();
  const CMatrix k = sw * fm * (kI * b.Delta.cast<cplx>()) * fm * sw;
  r.gamma_W = i_term + trace_norm(HermitianMatrix::hermitian_part(k));
  r.rhs = 1.0 - r.gamma_W;
  r.residual = r.rhs - r.lhs;
  r.holds = r.residual >= -tol;
  return r;
}

struct GillMassarReport {
  double lhs = 0.0;    // tr(F_Q^{-1} F_C)
  double gamma = 0.0;  // tr(F_Q^{-1} I) + ||F_Q^{-1/2} Delta F_Q^{-1/2}||_tr, in [0, m]
  double ours = 0.0;   // m - gamma
  double gm = 0.0;     // d - 1
  bool tighter = false;
};

inline GillMassarReport gill_massar_compare(const TensorBundle& b, Eigen::Index dim,
                                            double kernel_tol = kDefaultKernelTol) {
  const auto m = b.num_params();
  const CMatrix w = CMatrix::Identity(m, m) / static_cast<double>(m);
  const auto s = scalar_bound(b, w, kernel_tol);
  GillMassarReport r;
  r.lhs = static_cast<double>(m) * s.lhs;
  r.gamma = static_cast<double>(m) * s.gamma_W;
  r.ours = static_cast<double>(m) - r.gamma;
  r.gm = static_cast<double>(dim) - 1.0;
  r.tighter = r.ours < r.gm;
  return r;
}

struct RSandwichReport {
  double R = 0.0;          // ||i F_Q^{-1} G||_inf
  double lower = 0.0;      // largest eigenvalue of F_Q^{-1} C - 1
  double lower_abs = 0.0;  // largest |eigenvalue| of F_Q^{-1} C - 1
  double upper = 0.0;      // ||1 - F_Q^{-1/2} C F_Q^{-1/2}||_inf
  bool holds = false;      // lower <= R <= upper <= 1
  bool abs_lower_holds = false;
  double tol = kBoundTol;
};

/// The eigenvalues of F_Q^{-1} X coincide with those of F_Q^{-1/2} X F_Q^{-1/2},
/// so every norm here is evaluated on a Hermitian matrix.
inline RSandwichReport r_sandwich(const TensorBundle& b, double tol = kBoundTol,
                                  double kernel_tol = kDefaultKernelTol) {
  const auto m = b.num_params();
  const CMatrix fm = fq_inv_sqrt(b.F_Q, kernel_tol);
  const CMatrix id = CMatrix::Identity(m, m);
  RSandwichReport r;
  r.tol = tol;
  r.R = spectral_norm(
      HermitianMatrix::hermitian_part(CMatrix(fm * (kI * b.G.cast<cplx>()) * fm)));
  const HermitianMatrix s = HermitianMatrix::hermitian_part(CMatrix(fm * b.C * fm));
  const auto shifted = hermitian_eig(HermitianMatrix(CMatrix(s.mat() - id)));
  r.lower = shifted.values.maxCoeff();
  r.lower_abs = shifted.values.cwiseAbs().maxCoeff();
  r.upper = spectral_norm(HermitianMatrix(CMatrix(id - s.mat())));
  r.holds = r.lower <= r.R + tol && r.R <= r.upper + tol && r.upper <= 1.0 + tol;
  r.abs_lower_holds = r.lower_abs <= r.R + tol;
  return r;
}

/// |pi> with E = |pi><pi|, or NotRankOne.
inline CVector rank_one_vector(const HermitianMatrix& e, std::size_t outcome) {
  const auto es = hermitian_eig(e);
  const auto n = es.values.size();
  const double top = es.values(n - 1);
  if (n > 1 && es.values(n - 2) > kRankOneTol * std::max(top, 0.0))
    throw Error(ErrorCode::kNotRankOne, "effect " + std::to_string(outcome) + " has rank > 1");
  return std::sqrt(std::max(top, 0.0)) * es.vectors.col(n - 1);
}

inline bool is_rank_one(const Povm& povm) {
  try {
    for (std::size_t w = 0; w < povm.size(); ++w) rank_one_vector(povm.effect(w), w);
  } catch (const Error&) {
    return false;
  }
  return true;
}

/// Eigenvectors of rho with non-negligible weight.
inline CMatrix support_vectors(const DensityMatrix& rho, double kernel_tol = kSldKernelTol) {
  const auto es = hermitian_eig(rho.herm());
  const double cut = kernel_tol * es.values.maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index x = 0; x < es.values.size(); ++x)
    if (es.values(x) > cut) keep.push_back(x);
  CMatrix v(rho.dim(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k)
    v.col(static_cast<Eigen::Index>(k)) = es.vectors.col(keep[k]);
  return v;
}

struct SaturationReport {
  enum class Mode { kRegular, kNull };
  double condition_residual = 0.0;
  bool satisfied = false;
  Mode mode = Mode::kRegular;
  double tol = kBoundTol;
  double loewner_gap = 0.0;  // max_w ||Q_w - C_w||_max over the examined outcomes
  std::size_t outcomes_checked = 0;
};

/// Regular rank-one outcomes:
///   <pi|L_i|x><pi|y> - <pi|x><pi|L_i|y> = 0 for all i, w and support vectors x, y.
inline SaturationReport saturation_regular(const DensityMatrix& rho, const Povm& povm,
                                           const SldSet& slds, double tol = kBoundTol,
                                           double null_tol = kDefaultNullTol) {
  std::vector<CVector> pis;
  for (std::size_t w = 0; w < povm.size(); ++w) pis.push_back(rank_one_vector(povm.effect(w), w));
  const auto part = classify_outcomes(born_probabilities(rho, povm).probs, null_tol);
  const CMatrix sup = support_vectors(rho);
  const auto qw = per_outcome_Q(rho, povm, slds);
  const auto sc = scgt(rho, povm, slds, part);

  SaturationReport r;
  r.mode = SaturationReport::Mode::kRegular;
  r.tol = tol;
  for (std::size_t w : part.regular) {
    const CVector bra = pis[w].adjoint() * sup;  // <pi|x>
    for (std::size_t i = 0; i < slds.size(); ++i) {
      const CVector lbra = pis[w].adjoint() * slds[i].mat() * sup;  // <pi|L_i|x>
      for (Eigen::Index x = 0; x < sup.cols(); ++x)
        for (Eigen::Index y = 0; y < sup.cols(); ++y)
          r.condition_residual =
              std::max(r.condition_residual, std::abs(lbra(x) * bra(y) - bra(x) * lbra(y)));
    }
    r.loewner_gap = std::max(r.loewner_gap, max_abs(CMatrix(qw[w] - sc.per_outcome[w])));
    ++r.outcomes_checked;
  }
  r.satisfied = r.condition_residual <= tol;
  return r;
}

/// Null rank-one outcomes:
///   <pi|L_i|x><pi|L_j|y> - <pi|L_j|x><pi|L_i|y> = 0 for all i, j, w, x, y.
/// The Loewner gap compares Q_w with the directional limit C_w taken along the
/// coordinate axis of largest [Q_w]_kk (any admissible direction gives the same
/// verdict).
inline SaturationReport saturation_null(const DensityMatrix& rho, const Povm& povm,
                                        const std::vector<std::size_t>& outcomes,
                                        const SldSet& slds, double tol = kBoundTol,
                                        double null_tol = kDefaultNullTol) {
  const auto probs = born_probabilities(rho, povm).probs;
  const CMatrix sup = support_vectors(rho);
  const auto qw = per_outcome_Q(rho, povm, slds);

  SaturationReport r;
  r.mode = SaturationReport::Mode::kNull;
  r.tol = tol;
  for (std::size_t w : outcomes) {
    if (w >= povm.size()) throw Error(ErrorCode::kInvalidArgument, "outcome index");
    if (probs(static_cast<Eigen::Index>(w)) > null_tol)
      throw Error(ErrorCode::kNotNull, "outcome " + std::to_string(w) + " has p = " +
                                           std::to_string(probs(static_cast<Eigen::Index>(w))));
    const CVector pi = rank_one_vector(povm.effect(w), w);
    std::vector<CVector> a;
    for (std::size_t i = 0; i < slds.size(); ++i)
      a.push_back((pi.adjoint() * slds[i].mat() * sup).transpose());
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a.size(); ++j)
        for (Eigen::Index x = 0; x < sup.cols(); ++x)
          for (Eigen::Index y = 0; y < sup.cols(); ++y)
            r.condition_residual = std::max(
                r.condition_residual, std::abs(a[i](x) * a[j](y) - a[j](x) * a[i](y)));

    Eigen::Index k = 0;
    qw[w].diagonal().real().maxCoeff(&k);
    const double qkk = qw[w](k, k).real();
    if (qkk > kNullDirectionFloor) {
      const CVector v = qw[w].col(k);
      r.loewner_gap = std::max(r.loewner_gap, max_abs(CMatrix(qw[w] - v * v.adjoint() / qkk)));
    }
    ++r.outcomes_checked;
  }
  r.satisfied = r.condition_residual <= tol;
  return r;
}

struct IZeroReport {
  double regular_residual = 0.0;  // max |<pi|L_i rho - rho L_i|pi>|
  double null_residual = 0.0;     // max |<pi|L_i rho L_j - L_j rho L_i|pi>|
  bool satisfied = false;
  double I_max = 0.0;             // max |I_ij| from the regular outcomes
  double tol = kBoundTol;
};

inline IZeroReport izero_conditions(const DensityMatrix& rho, const Povm& povm,
                                    const SldSet& slds, double tol = kBoundTol,
                                    double null_tol = kDefaultNullTol) {
  std::vector<CVector> pis;
  for (std::size_t w = 0; w < povm.size(); ++w) pis.push_back(rank_one_vector(povm.effect(w), w));
  const auto part = classify_outcomes(born_probabilities(rho, povm).probs, null_tol);
  const CMatrix& r0 = rho.mat();

  IZeroReport r;
  r.tol = tol;
  for (std::size_t w : part.regular) {
    for (std::size_t i = 0; i < slds.size(); ++i) {
      const CMatrix& l = slds[i].mat();
      const cplx v = (pis[w].adjoint() * (l * r0 - r0 * l) * pis[w])(0);
      r.regular_residual = std::max(r.regular_residual, std::abs(v));
    }
  }
  for (std::size_t w : part.null) {
    for (std::size_t i = 0; i < slds.size(); ++i) {
      for (std::size_t j = 0; j < slds.size(); ++j) {
        const CMatrix& li = slds[i].mat();
        const CMatrix& lj = slds[j].mat();
        const cplx v = (pis[w].adjoint() * (li * r0 * lj - lj * r0 * li) * pis[w])(0);
        r.null_residual = std::max(r.null_residual, std::abs(v));
      }
    }
  }
  const auto sc = scgt(rho, povm, slds, part);
  r.I_max = max_abs(decompose(sc.effective).I);
  r.satisfied = r.regular_residual <= tol && r.null_residual <= tol;
  return r;
}

}  // namespace scgt
