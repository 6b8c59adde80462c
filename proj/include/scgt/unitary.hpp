#pragma once

// Pure states under a unitary encoding |psi_theta> = U_theta |psi>: the
// generator form of every tensor, and the two-copy operators K^+ and K^- whose
// product-state expectations carry the measurement-dependent terms.
//
// Conventions: H_i = -i (d_i U^dagger) U, rotated effects E'_w = U^dagger E_w U,
// and <X> = <psi|X|psi> for the unrotated state.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "scgt/family.hpp"
#include "scgt/linalg.hpp"
#include "scgt/quantum.hpp"
#include "scgt/tensors.hpp"

namespace scgt {

inline constexpr double kUnitarityTol = 1e-9;

struct GeneratorSet {
  std::vector<HermitianMatrix> generators;
  Povm rotated_effects;
  double anti_hermitian_residual = 0.0;  // removed from finite-difference generators
};

inline void check_unitary(const CMatrix& u) {
  if (u.rows() != u.cols()) throw Error(ErrorCode::kNonUnitary, "U is not square");
  const double dev = max_abs(CMatrix(u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols())));
  if (dev > kUnitarityTol)
    throw Error(ErrorCode::kNonUnitary, "max |U^dagger U - 1| = " + std::to_string(dev));
}

inline Povm rotate_povm(const CMatrix& u, const Povm& povm) {
  if (u.rows() != povm.dim()) throw Error(ErrorCode::kDimMismatch, "unitary vs POVM dims");
  std::vector<HermitianMatrix> e;
  for (const auto& eff : povm.effects())
    e.push_back(HermitianMatrix::hermitian_part(u.adjoint() * eff.mat() * u));
  return Povm(std::move(e), povm.labels());
}

/// Exact generators of a product-of-exponentials encoding.
inline GeneratorSet generators(const UnitaryEncoding& enc, const ParamPoint& p,
                               const Povm& povm) {
  const CMatrix u = enc.unitary(p);
  check_unitary(u);
  return {enc.generators(p), rotate_povm(u, povm), 0.0};
}

using UnitaryFunction = std::function<CMatrix(const ParamPoint&)>;

/// Central-difference generators of an arbitrary U_theta. The anti-Hermitian
/// part of each estimate is O(h^2); it is projected out and its size recorded.
inline GeneratorSet generators(const UnitaryFunction& u_of, const ParamPoint& p,
                               const Povm& povm, double h = kDefaultFdStep) {
  if (!(h > 0.0)) throw Error(ErrorCode::kInvalidArgument, "finite-difference step <= 0");
  const CMatrix u = u_of(p);
  check_unitary(u);
  GeneratorSet out{{}, rotate_povm(u, povm), 0.0};
  for (std::size_t i = 0; i < p.size(); ++i) {
    const CMatrix up = u_of(p.shifted(i, h));
    const CMatrix um = u_of(p.shifted(i, -h));
    check_unitary(up);
    check_unitary(um);
    const CMatrix du = (up - um) / (2.0 * h);
    const CMatrix raw = -kI * du.adjoint() * u;
    const double anti = 0.5 * max_abs(CMatrix(raw - raw.adjoint()));
    if (anti > 10.0 * h * h + 1e-9)
      throw Error(ErrorCode::kNonUnitary, "generator " + std::to_string(i) +
                                              " has anti-Hermitian part " + std::to_string(anti));
    out.anti_hermitian_residual = std::max(out.anti_hermitian_residual, anti);
    out.generators.push_back(HermitianMatrix::hermitian_part(raw));
  }
  return out;
}

inline cplx expect(const PureState& psi, const CMatrix& x) { return psi.vec().dot(x * psi.vec()); }

/// Rotated-frame probabilities and N = sum_w E'_w |psi><psi| E'_w / p_w.
struct NOperator {
  HermitianMatrix N;
  RVector probs;
};

inline NOperator n_operator(const PureState& psi, const GeneratorSet& gens,
                            double null_tol = kDefaultNullTol) {
  const Povm& e = gens.rotated_effects;
  if (psi.dim() != e.dim()) throw Error(ErrorCode::kDimMismatch, "state and POVM dims");
  const auto d = psi.dim();
  const CMatrix proj = psi.projector();
  CMatrix n = CMatrix::Zero(d, d);
  RVector probs(static_cast<Eigen::Index>(e.size()));
  for (std::size_t w = 0; w < e.size(); ++w) {
    const double p = expect(psi, e.effect(w).mat()).real();
    if (p <= null_tol)
      throw Error(ErrorCode::kNullOutcomePresent, "outcome " + std::to_string(w) + " is null");
    probs(static_cast<Eigen::Index>(w)) = p;
    n += e.effect(w).mat() * proj * e.effect(w).mat() / p;
  }
  return {HermitianMatrix::hermitian_part(n), probs};
}

struct AppendixGBundle {
  TensorBundle bundle;  // Q, F_Q, G, C, F_C, I, D, Delta
  HermitianMatrix N;
  RMatrix eta;
  RVector probs;
};

/// O_ij = sum_w (E'_w H_i (x) E'_w H_j + H_i E'_w (x) H_j E'_w) / p_w on the doubled space.
inline CMatrix o_operator(const GeneratorSet& gens, const RVector& probs, std::size_t i,
                          std::size_t j) {
  const auto d = gens.rotated_effects.dim();
  CMatrix o = CMatrix::Zero(d * d, d * d);
  const CMatrix& hi = gens.generators.at(i).mat();
  const CMatrix& hj = gens.generators.at(j).mat();
  for (std::size_t w = 0; w < gens.rotated_effects.size(); ++w) {
    const CMatrix& e = gens.rotated_effects.effect(w).mat();
    o += (kron(CMatrix(e * hi), CMatrix(e * hj)) + kron(CMatrix(hi * e), CMatrix(hj * e))) /
         probs(static_cast<Eigen::Index>(w));
  }
  return o;
}

/// Every tensor from generator expectations:
///   Q = 4(<H_i H_j> - <H_i><H_j>),      G = -2i <[H_i, H_j]>,
///   C = 4(<H_i N H_j> - <H_i><H_j>),    D = -2i <H_i N H_j - H_j N H_i>,
///   F_C = <H_i N H_j + H_j N H_i> - eta,
///   I = <H_i N H_j + H_j N H_i> - 4 <H_i><H_j> + eta,
///   eta_ij = <psi, psi| O_ij |psi, psi>.
inline AppendixGBundle appendix_g_bundle(const PureState& psi, const GeneratorSet& gens,
                                         double null_tol = kDefaultNullTol) {
  check_dim_cap(psi.dim());
  const auto no = n_operator(psi, gens, null_tol);
  const CMatrix& n = no.N.mat();
  const auto m = static_cast<Eigen::Index>(gens.generators.size());
  const CVector psi2 = kron(psi.vec(), psi.vec());

  RVector h(m);
  for (Eigen::Index i = 0; i < m; ++i) h(i) = expect(psi, gens.generators[i].mat()).real();

  AppendixGBundle out{TensorBundle{}, no.N, RMatrix(m, m), no.probs};
  TensorBundle& b = out.bundle;
  b.Q = CMatrix(m, m);
  b.C = CMatrix(m, m);
  b.G = RMatrix(m, m);
  b.D = RMatrix(m, m);
  b.F_C = RMatrix(m, m);
  b.I = RMatrix(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const CMatrix& hi = gens.generators[i].mat();
    for (Eigen::Index j = 0; j < m; ++j) {
      const CMatrix& hj = gens.generators[j].mat();
      const double hh = h(i) * h(j);
      const cplx hihj = expect(psi, hi * hj);
      const cplx hjhi = expect(psi, hj * hi);
      const cplx hinhj = expect(psi, hi * n * hj);
      const cplx hjnhi = expect(psi, hj * n * hi);
      const auto iu = static_cast<std::size_t>(i), ju = static_cast<std::size_t>(j);
      out.eta(i, j) = psi2.dot(o_operator(gens, no.probs, iu, ju) * psi2).real();
      b.Q(i, j) = 4.0 * (hihj - hh);
      b.C(i, j) = 4.0 * (hinhj - hh);
      b.G(i, j) = (-2.0 * kI * (hihj - hjhi)).real();
      b.D(i, j) = (-2.0 * kI * (hinhj - hjnhi)).real();
      const double sym = (hinhj + hjnhi).real();
      b.F_C(i, j) = sym - out.eta(i, j);
      b.I(i, j) = sym - 4.0 * hh + out.eta(i, j);
    }
  }
  b.F_Q = b.Q.real();
  b.Delta = b.G - b.D;
  return out;
}

struct HermitianSplit {
  HermitianMatrix plus;   // X + X^dagger
  HermitianMatrix minus;  // -i (X - X^dagger)
};

/// X = (plus + i minus) / 2.
inline HermitianSplit hermitian_split(const CMatrix& x) {
  return {HermitianMatrix::hermitian_part(CMatrix(x + x.adjoint())),
          HermitianMatrix::hermitian_part(CMatrix(-kI * (x - x.adjoint())))};
}

struct SplitCheck {
  cplx x_plus;        // <psi,psi| A (x) B + B^dagger (x) A^dagger |psi,psi>
  cplx x_minus;       // <psi,psi| -i (A (x) B - B^dagger (x) A^dagger) |psi,psi>
  cplx split_plus;    // <psi,psi| (A_+ (x) B_+ - A_- (x) B_-) / 2 |psi,psi>
  cplx split_minus;   // <psi,psi| (A_+ (x) B_- + A_- (x) B_+) / 2 |psi,psi>
  double residual() const {
    return std::max(std::abs(x_plus - split_plus), std::abs(x_minus - split_minus));
  }
};

/// Both sides of the Hermitian-split identity, built densely on the doubled space.
inline SplitCheck hermitian_split_check(const CVector& psi2, const CMatrix& a, const CMatrix& b) {
  const auto sa = hermitian_split(a), sb = hermitian_split(b);
  const CMatrix ab = kron(a, b);
  const CMatrix ba = kron(CMatrix(b.adjoint()), CMatrix(a.adjoint()));
  const CMatrix xp = ab + ba;
  const CMatrix xm = -kI * (ab - ba);
  const CMatrix rp = (kron(sa.plus.mat(), sb.plus.mat()) - kron(sa.minus.mat(), sb.minus.mat())) / 2.0;
  const CMatrix rm = (kron(sa.plus.mat(), sb.minus.mat()) + kron(sa.minus.mat(), sb.plus.mat())) / 2.0;
  return {psi2.dot(xp * psi2), psi2.dot(xm * psi2), psi2.dot(rp * psi2), psi2.dot(rm * psi2)};
}

struct TwoCopyOperators {
  CMatrix K_plus;
  CMatrix K_minus;
};

/// K^+_ij = sum_w (H_i E'_w (x) E'_w H_j + H_j E'_w (x) E'_w H_i) / p_w,
/// K^-_ij = -i sum_w (H_i E'_w (x) E'_w H_j - H_j E'_w (x) E'_w H_i) / p_w.
inline TwoCopyOperators two_copy_operators(const GeneratorSet& gens, const RVector& probs,
                                           std::size_t i, std::size_t j) {
  const auto d = gens.rotated_effects.dim();
  check_dim_cap(d);
  const CMatrix& hi = gens.generators.at(i).mat();
  const CMatrix& hj = gens.generators.at(j).mat();
  TwoCopyOperators k{CMatrix::Zero(d * d, d * d), CMatrix::Zero(d * d, d * d)};
  for (std::size_t w = 0; w < gens.rotated_effects.size(); ++w) {
    const CMatrix& e = gens.rotated_effects.effect(w).mat();
    const double p = probs(static_cast<Eigen::Index>(w));
    const CMatrix t1 = kron(CMatrix(hi * e), CMatrix(e * hj));
    const CMatrix t2 = kron(CMatrix(hj * e), CMatrix(e * hi));
    k.K_plus += (t1 + t2) / p;
    k.K_minus += -kI * (t1 - t2) / p;
  }
  return k;
}

struct TwoCopyReport {
  CMatrix k_plus;          // <psi,psi|K^+_ij|psi,psi>
  CMatrix k_minus;
  RMatrix single_plus;     // <H_i N H_j + H_j N H_i>
  RMatrix single_minus;    // -i <H_i N H_j - H_j N H_i>
  double k_residual = 0.0;      // max deviation two-copy vs single-copy
  double imag_residual = 0.0;   // max |Im| of the K expectations
  double split_residual = 0.0;  // Hermitian-split reconstruction, over all (i, j, w)
  bool holds(double tol = 1e-9) const {
    return k_residual <= tol && imag_residual <= tol && split_residual <= tol;
  }
};

inline TwoCopyReport two_copy_expectations(const PureState& psi, const GeneratorSet& gens,
                                           double null_tol = kDefaultNullTol) {
  check_dim_cap(psi.dim());
  const auto no = n_operator(psi, gens, null_tol);
  const CMatrix& n = no.N.mat();
  const auto m = static_cast<Eigen::Index>(gens.generators.size());
  const CVector psi2 = kron(psi.vec(), psi.vec());
  TwoCopyReport r{CMatrix(m, m), CMatrix(m, m), RMatrix(m, m), RMatrix(m, m)};
  for (Eigen::Index i = 0; i < m; ++i) {
    const CMatrix& hi = gens.generators[i].mat();
    for (Eigen::Index j = 0; j < m; ++j) {
      const CMatrix& hj = gens.generators[j].mat();
      const auto iu = static_cast<std::size_t>(i), ju = static_cast<std::size_t>(j);
      const auto k = two_copy_operators(gens, no.probs, iu, ju);
      r.k_plus(i, j) = psi2.dot(k.K_plus * psi2);
      r.k_minus(i, j) = psi2.dot(k.K_minus * psi2);
      const cplx a = expect(psi, hi * n * hj), b = expect(psi, hj * n * hi);
      r.single_plus(i, j) = (a + b).real();
      r.single_minus(i, j) = (-kI * (a - b)).real();
      r.imag_residual = std::max(
          {r.imag_residual, std::abs(r.k_plus(i, j).imag()), std::abs(r.k_minus(i, j).imag())});
      r.k_residual = std::max({r.k_residual, std::abs(r.k_plus(i, j) - r.single_plus(i, j)),
                               std::abs(r.k_minus(i, j) - r.single_minus(i, j))});
      for (std::size_t w = 0; w < gens.rotated_effects.size(); ++w) {
        const CMatrix& e = gens.rotated_effects.effect(w).mat();
        const double p = no.probs(static_cast<Eigen::Index>(w));
        const auto s = hermitian_split_check(psi2, CMatrix(hi * e / p), CMatrix(e * hj));
        r.split_residual = std::max(r.split_residual, s.residual());
      }
    }
  }
  return r;
}

}  // namespace scgt
