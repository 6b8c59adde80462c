#pragma once

// Quantum geometric tensor Q, semi-classical geometric tensor C and the real
// matrices derived from them:
//   Q = F_Q + i G,   C = (F_C + I) + i D,   Delta = G - D.

#include <map>
#include <string>
#include <vector>

#include "scgt/family.hpp"
#include "scgt/linalg.hpp"
#include "scgt/quantum.hpp"
#include "scgt/sld.hpp"

namespace scgt {

inline constexpr double kNullDirectionFloor = 1e-14;

/// chi(w, i) = tr(rho E_w L_i), one row per listed outcome.
struct ChiTable {
  CMatrix values;
  RVector probs;
  std::vector<std::size_t> outcomes;

  Eigen::Index rows() const { return values.rows(); }
};

/// [Q]_ij = tr(rho L_i L_j)
inline CMatrix qgt_mixed(const DensityMatrix& rho, const SldSet& slds) {
  const auto m = static_cast<Eigen::Index>(slds.size());
  CMatrix q(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (slds[i].dim() != rho.dim()) throw Error(ErrorCode::kDimMismatch, "SLD dimension");
    for (Eigen::Index j = 0; j < m; ++j)
      q(i, j) = (rho.mat() * slds[i].mat() * slds[j].mat()).trace();
  }
  return 0.5 * (q + q.adjoint());
}

/// [Q]_ij = 4 <d_i psi| (1 - |psi><psi|) |d_j psi>
inline CMatrix qgt_pure(const PureState& psi, const std::vector<CVector>& dpsi) {
  const auto d = psi.dim();
  const auto m = static_cast<Eigen::Index>(dpsi.size());
  CMatrix cols(d, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (dpsi[i].size() != d) throw Error(ErrorCode::kDimMismatch, "dpsi dimension");
    cols.col(i) = dpsi[i];
  }
  const CMatrix perp = CMatrix::Identity(d, d) - psi.projector();
  const CMatrix q = 4.0 * cols.adjoint() * perp * cols;
  return 0.5 * (q + q.adjoint());
}

inline ChiTable chi_table(const DensityMatrix& rho, const Povm& povm, const SldSet& slds) {
  if (rho.dim() != povm.dim()) throw Error(ErrorCode::kDimMismatch, "state and POVM dims");
  const auto n = static_cast<Eigen::Index>(povm.size());
  const auto m = static_cast<Eigen::Index>(slds.size());
  ChiTable t{CMatrix(n, m), born_probabilities(rho, povm).probs, {}};
  for (Eigen::Index w = 0; w < n; ++w) {
    const CMatrix re = rho.mat() * povm.effect(w).mat();
    for (Eigen::Index i = 0; i < m; ++i) t.values(w, i) = (re * slds[i].mat()).trace();
    t.outcomes.push_back(static_cast<std::size_t>(w));
  }
  return t;
}

/// [Q_w]_ij = tr(rho L_i E_w L_j); sums to Q over all outcomes.
inline std::vector<CMatrix> per_outcome_Q(const DensityMatrix& rho, const Povm& povm,
                                          const SldSet& slds) {
  if (rho.dim() != povm.dim()) throw Error(ErrorCode::kDimMismatch, "state and POVM dims");
  const auto m = static_cast<Eigen::Index>(slds.size());
  std::vector<CMatrix> out;
  for (const auto& e : povm.effects()) {
    CMatrix q(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        q(i, j) = (rho.mat() * slds[i].mat() * e.mat() * slds[j].mat()).trace();
    out.push_back(0.5 * (q + q.adjoint()));
  }
  return out;
}

/// [F_C]_ij = sum_w d_i p_w d_j p_w / p_w
inline RMatrix cfim(const RVector& probs, const RMatrix& dprobs) {
  if (dprobs.rows() != probs.size())
    throw Error(ErrorCode::kDimMismatch, "one derivative row per probability expected");
  RMatrix f = RMatrix::Zero(dprobs.cols(), dprobs.cols());
  for (Eigen::Index w = 0; w < probs.size(); ++w) {
    if (!(probs(w) > 0.0))
      throw Error(ErrorCode::kNonPositiveProbability, "p_" + std::to_string(w) + " <= 0");
    f += dprobs.row(w).transpose() * dprobs.row(w) / probs(w);
  }
  return f;
}

struct Decomposition {
  RMatrix F_C;  // sum Re chi_i Re chi_j / p
  RMatrix I;    // sum Im chi_i Im chi_j / p
  RMatrix D;    // sum (xi_ij - xi_ji) / p,  xi_ij = Re chi_i Im chi_j
};

inline Decomposition decompose(const ChiTable& chi) {
  const auto m = chi.values.cols();
  Decomposition out{RMatrix::Zero(m, m), RMatrix::Zero(m, m), RMatrix::Zero(m, m)};
  for (Eigen::Index w = 0; w < chi.rows(); ++w) {
    const double p = chi.probs(w);
    if (!(p > 0.0))
      throw Error(ErrorCode::kNonPositiveProbability,
                  "decompose needs p > 0, row " + std::to_string(w));
    const RVector re = chi.values.row(w).real().transpose();
    const RVector im = chi.values.row(w).imag().transpose();
    out.F_C += re * re.transpose() / p;
    out.I += im * im.transpose() / p;
    const RMatrix xi = re * im.transpose();
    out.D += (xi - xi.transpose()) / p;
  }
  return out;
}

using NullDirections = std::map<std::size_t, RVector>;

struct NullOutcome {
  enum class Status { kSkipped, kDirectional };
  std::size_t outcome;
  Status status;
};

struct ScgtResult {
  CMatrix C;
  std::vector<CMatrix> per_outcome;  // zero for skipped null outcomes
  std::vector<NullOutcome> null_report;
  ChiTable effective;  // rows that contribute to C (null rows use the directional limit)
};

/// [C]_ij = sum_w conj(chi_wi) chi_wj / p_w over regular outcomes. A null outcome
/// contributes the limit along its supplied direction dtheta,
///   (Q_w dtheta)(Q_w dtheta)^dagger / (dtheta^T Q_w dtheta),
/// and nothing (reported as skipped) when no direction is given.
inline ScgtResult scgt(const DensityMatrix& rho, const Povm& povm, const SldSet& slds,
                       const OutcomePartition& partition,
                       const NullDirections& null_directions = {}) {
  const ChiTable full = chi_table(rho, povm, slds);
  const auto m = static_cast<Eigen::Index>(slds.size());
  std::vector<CMatrix> q_w;
  if (!partition.null.empty()) q_w = per_outcome_Q(rho, povm, slds);

  ScgtResult out;
  out.C = CMatrix::Zero(m, m);
  std::vector<CVector> rows;
  std::vector<double> probs;
  for (std::size_t w = 0; w < povm.size(); ++w) {
    const auto wi = static_cast<Eigen::Index>(w);
    CVector chi;
    double p = 0.0;
    if (!partition.is_null(w)) {
      chi = full.values.row(wi).transpose();
      p = full.probs(wi);
    } else {
      auto it = null_directions.find(w);
      if (it == null_directions.end()) {
        out.per_outcome.push_back(CMatrix::Zero(m, m));
        out.null_report.push_back({w, NullOutcome::Status::kSkipped});
        continue;
      }
      if (it->second.size() != m)
        throw Error(ErrorCode::kDimMismatch, "null direction for outcome " + std::to_string(w));
      const CVector dir = it->second.cast<cplx>();
      const CVector v = q_w[w] * dir;
      p = (dir.adjoint() * v)(0).real();
      if (p <= kNullDirectionFloor)
        throw Error(ErrorCode::kNullDirectionDegenerate,
                    "dtheta^T Q_w dtheta = " + std::to_string(p) + " for outcome " +
                        std::to_string(w));
      chi = v.conjugate();
      out.null_report.push_back({w, NullOutcome::Status::kDirectional});
    }
    const CMatrix cw = chi.conjugate() * chi.transpose() / p;
    out.per_outcome.push_back(0.5 * (cw + cw.adjoint()));
    out.C += out.per_outcome.back();
    rows.push_back(chi);
    probs.push_back(p);
    out.effective.outcomes.push_back(w);
  }
  out.effective.values = CMatrix(static_cast<Eigen::Index>(rows.size()), m);
  out.effective.probs = RVector(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.effective.values.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
    out.effective.probs(static_cast<Eigen::Index>(r)) = probs[r];
  }
  return out;
}

struct PureScgt {
  CMatrix C;
  CMatrix M;  // sum_w E_w |psi><psi| E_w / p_w
};

/// [C]_ij = 4 <d_i psi| (M - |psi><psi|) |d_j psi>, regular POVMs only.
inline PureScgt scgt_pure_form(const PureState& psi, const std::vector<CVector>& dpsi,
                               const Povm& povm, double null_tol = kDefaultNullTol) {
  if (psi.dim() != povm.dim()) throw Error(ErrorCode::kDimMismatch, "state and POVM dims");
  const auto d = psi.dim();
  const CMatrix proj = psi.projector();
  CMatrix mop = CMatrix::Zero(d, d);
  for (std::size_t w = 0; w < povm.size(); ++w) {
    const CMatrix& e = povm.effect(w).mat();
    const double p = (psi.vec().adjoint() * e * psi.vec())(0).real();
    if (p <= null_tol)
      throw Error(ErrorCode::kNullOutcomePresent, "outcome " + std::to_string(w) + " is null");
    mop += e * proj * e / p;
  }
  const auto m = static_cast<Eigen::Index>(dpsi.size());
  CMatrix cols(d, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (dpsi[i].size() != d) throw Error(ErrorCode::kDimMismatch, "dpsi dimension");
    cols.col(i) = dpsi[i];
  }
  const CMatrix c = 4.0 * cols.adjoint() * (mop - proj) * cols;
  return {0.5 * (c + c.adjoint()), mop};
}

struct TensorBundle {
  CMatrix Q;
  RMatrix F_Q;
  RMatrix G;
  CMatrix C;
  RMatrix F_C;
  RMatrix I;
  RMatrix D;
  RMatrix Delta;
  std::vector<CMatrix> C_per_outcome;
  std::vector<CMatrix> Q_per_outcome;
  std::vector<NullOutcome> null_report;
  ChiTable chi;  // every outcome, straight from the state
  OutcomePartition partition;
  bool probs_clipped = false;
  int kernel_pairs_dropped = 0;

  Eigen::Index num_params() const { return Q.rows(); }
};

struct BundleOptions {
  double null_tol = kDefaultNullTol;
  double kernel_tol = kSldKernelTol;
  NullDirections null_directions;
};

inline TensorBundle compute_bundle(const DensityMatrix& rho, const SldSet& slds,
                                   const Povm& povm, const BundleOptions& opts = {}) {
  TensorBundle b;
  const auto born = born_probabilities(rho, povm);
  b.probs_clipped = born.clipped;
  b.partition = classify_outcomes(born.probs, opts.null_tol);
  b.kernel_pairs_dropped = slds.kernel_pairs_dropped;

  b.Q = qgt_mixed(rho, slds);
  b.F_Q = b.Q.real();
  b.G = b.Q.imag();
  b.chi = chi_table(rho, povm, slds);
  b.Q_per_outcome = per_outcome_Q(rho, povm, slds);

  auto sc = scgt(rho, povm, slds, b.partition, opts.null_directions);
  b.C = sc.C;
  b.C_per_outcome = std::move(sc.per_outcome);
  b.null_report = std::move(sc.null_report);
  const auto dec = decompose(sc.effective);
  b.F_C = dec.F_C;
  b.I = dec.I;
  b.D = dec.D;
  b.Delta = b.G - b.D;
  return b;
}

inline TensorBundle compute_bundle(const DensityMatrix& rho,
                                   const std::vector<HermitianMatrix>& drho, const Povm& povm,
                                   const BundleOptions& opts = {}) {
  return compute_bundle(rho, compute_slds(rho, drho, opts.kernel_tol), povm, opts);
}

inline TensorBundle compute_bundle(const ParamStateFamily& family, const ParamPoint& point,
                                   const Povm& povm, const BundleOptions& opts = {}) {
  if (family.is_pure()) {
    const auto jet = family.pure_jet(point);
    return compute_bundle(DensityMatrix(jet.psi), sld_pure(jet.psi, jet.dpsi), povm, opts);
  }
  return compute_bundle(family.state(point), family.state_derivatives(point), povm, opts);
}

}  // namespace scgt
