#pragma once

// Symmetric logarithmic derivatives: d_i rho = (L_i rho + rho L_i) / 2.

#include <string>
#include <vector>

#include "scgt/linalg.hpp"
#include "scgt/quantum.hpp"

namespace scgt {

inline constexpr double kSldKernelTol = 1e-10;
inline constexpr double kPurityRoute = 1e-10;

struct SldSet {
  std::vector<HermitianMatrix> operators;
  HermitianMatrix support_projector;
  int kernel_pairs_dropped = 0;

  std::size_t size() const { return operators.size(); }
  const HermitianMatrix& operator[](std::size_t i) const { return operators[i]; }
};

/// Eigenbasis formula (L)_xy = 2 <x|d rho|y> / (lambda_x + lambda_y). Pairs with
/// lambda_x + lambda_y <= kernel_tol * lambda_max are set to zero (minimal-norm
/// choice). A derivative with weight inside that kernel block cannot come from a
/// curve of states and is rejected.
inline SldSet sld_mixed(const DensityMatrix& rho, const std::vector<HermitianMatrix>& drho,
                        double kernel_tol = kSldKernelTol) {
  const auto d = rho.dim();
  const auto es = hermitian_eig(rho.herm());
  const double lmax = es.values.maxCoeff();
  const double cut = kernel_tol * lmax;

  SldSet out;
  CMatrix proj = CMatrix::Zero(d, d);
  for (Eigen::Index x = 0; x < d; ++x)
    if (es.values(x) > cut) proj += es.vectors.col(x) * es.vectors.col(x).adjoint();
  out.support_projector = HermitianMatrix::hermitian_part(proj);

  for (std::size_t i = 0; i < drho.size(); ++i) {
    if (drho[i].dim() != d)
      throw Error(ErrorCode::kDimMismatch, "derivative " + std::to_string(i) + " dimension");
    const CMatrix deig = es.vectors.adjoint() * drho[i].mat() * es.vectors;
    const double scale = 1.0 + max_abs(deig);
    CMatrix l = CMatrix::Zero(d, d);
    for (Eigen::Index x = 0; x < d; ++x) {
      for (Eigen::Index y = 0; y < d; ++y) {
        const double s = es.values(x) + es.values(y);
        if (s > cut) {
          l(x, y) = 2.0 * deig(x, y) / s;
        } else {
          if (std::abs(deig(x, y)) > 1e-8 * scale)
            throw Error(ErrorCode::kInconsistentDerivative,
                        "d rho has weight " + std::to_string(std::abs(deig(x, y))) +
                            " on the kernel of rho");
          if (i == 0) ++out.kernel_pairs_dropped;
        }
      }
    }
    out.operators.push_back(
        HermitianMatrix::hermitian_part(es.vectors * l * es.vectors.adjoint()));
  }
  return out;
}

/// L_i = 2 (|d_i psi><psi| + |psi><d_i psi|).
inline SldSet sld_pure(const PureState& psi, const std::vector<CVector>& dpsi) {
  SldSet out;
  out.support_projector = HermitianMatrix::hermitian_part(psi.projector());
  for (const auto& d : dpsi) {
    if (d.size() != psi.dim()) throw Error(ErrorCode::kDimMismatch, "dpsi dimension");
    const CMatrix a = d * psi.vec().adjoint();
    out.operators.push_back(HermitianMatrix::hermitian_part(CMatrix(2.0 * (a + a.adjoint()))));
  }
  out.kernel_pairs_dropped = static_cast<int>((psi.dim() - 1) * (psi.dim() - 1));
  return out;
}

/// Routes pure inputs (purity > 1 - 1e-10) to sld_pure, using the dominant
/// eigenvector and the parallel-transport derivative (1 - |psi><psi|) d rho |psi>.
inline SldSet compute_slds(const DensityMatrix& rho, const std::vector<HermitianMatrix>& drho,
                           double kernel_tol = kSldKernelTol) {
  if (rho.purity() <= 1.0 - kPurityRoute) return sld_mixed(rho, drho, kernel_tol);
  const auto es = hermitian_eig(rho.herm());
  const PureState psi = PureState::normalized(es.vectors.col(rho.dim() - 1));
  const CMatrix perp = CMatrix::Identity(rho.dim(), rho.dim()) - psi.projector();
  std::vector<CVector> dpsi;
  for (const auto& d : drho) {
    if (d.dim() != rho.dim()) throw Error(ErrorCode::kDimMismatch, "derivative dimension");
    dpsi.push_back(perp * (d.mat() * psi.vec()));
  }
  return sld_pure(psi, dpsi);
}

}  // namespace scgt
