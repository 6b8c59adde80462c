#pragma once

// Dense complex linear algebra for small Hilbert spaces (dim <= ~16) and small
// parameter counts. Eigen provides storage and the Hermitian eigensolver; this
// header adds the validated Hermitian wrapper and the spectral helpers the
// rest of the library relies on.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <string>

#include "scgt/error.hpp"

namespace scgt {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kHermiticityTol = 1e-10;
inline constexpr double kDefaultKernelTol = 1e-12;
inline constexpr std::size_t kDefaultMaxDim = 16;

/// Hilbert-space dimension cap. SCGT_MAX_DIM overrides the default of 16.
inline std::size_t max_dim() {
  if (const char* env = std::getenv("SCGT_MAX_DIM")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return kDefaultMaxDim;
}

inline void check_dim_cap(Eigen::Index dim) {
  if (static_cast<std::size_t>(dim) > max_dim()) {
    throw Error(ErrorCode::kDimCap, "dimension " + std::to_string(dim) + " exceeds cap " +
                                        std::to_string(max_dim()) + " (set SCGT_MAX_DIM)");
  }
}

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (!std::isfinite(std::abs(m(r, c)))) return false;
  return true;
}

/// Square complex matrix that satisfied |H - H^dagger| <= tol (1 + max|H|) when
/// it was built. Inputs outside the tolerance are rejected, not symmetrized.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  explicit HermitianMatrix(CMatrix m, double tol = kHermiticityTol) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) {
      throw Error(ErrorCode::kDimMismatch, "Hermitian matrix must be square, got " +
                                               std::to_string(m_.rows()) + "x" +
                                               std::to_string(m_.cols()));
    }
    if (!all_finite(m_)) throw Error(ErrorCode::kNonHermitian, "non-finite entry");
    const double dev = max_abs(m_ - m_.adjoint());
    if (dev > tol * (1.0 + max_abs(m_))) {
      throw Error(ErrorCode::kNonHermitian,
                  "max |H - H^dagger| = " + std::to_string(dev) + " exceeds tolerance");
    }
    // Exact Hermiticity downstream; the deviation was already bounded above.
    m_ = (0.5 * (m_ + m_.adjoint())).eval();
  }

  /// Hermitian part (A + A^dagger)/2 of an arbitrary square matrix.
  static HermitianMatrix hermitian_part(const CMatrix& a) {
    return HermitianMatrix(CMatrix(0.5 * (a + a.adjoint())));
  }

  static HermitianMatrix identity(Eigen::Index n) {
    return HermitianMatrix(CMatrix::Identity(n, n));
  }
  static HermitianMatrix zero(Eigen::Index n) { return HermitianMatrix(CMatrix::Zero(n, n)); }
  static HermitianMatrix from_real(const RMatrix& r) { return HermitianMatrix(CMatrix(r.cast<cplx>())); }

  Eigen::Index dim() const { return m_.rows(); }
  const CMatrix& mat() const { return m_; }
  operator const CMatrix&() const { return m_; }  // NOLINT(google-explicit-constructor)
  cplx operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

 private:
  CMatrix m_;
};

struct EigenSystem {
  RVector values;   // ascending
  CMatrix vectors;  // orthonormal columns
};

inline EigenSystem hermitian_eig(const HermitianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.mat());
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kNonConvergence, "Hermitian eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

struct PsdCheck {
  bool psd = false;
  double min_eigenvalue = 0.0;
};

/// PSD iff the smallest eigenvalue is >= -tol (1 + max |eigenvalue|).
inline PsdCheck is_psd(const HermitianMatrix& h, double tol) {
  const auto es = hermitian_eig(h);
  const double lo = es.values(0);
  const double scale = es.values.cwiseAbs().maxCoeff();
  return {lo >= -tol * (1.0 + scale), lo};
}

inline double trace_norm(const HermitianMatrix& h) {
  return hermitian_eig(h).values.cwiseAbs().sum();
}

inline double spectral_norm(const HermitianMatrix& h) {
  return hermitian_eig(h).values.cwiseAbs().maxCoeff();
}

/// Trace norm of a real antisymmetric matrix, evaluated on the Hermitian form iA.
inline double antisymmetric_trace_norm(const RMatrix& a) {
  return trace_norm(HermitianMatrix(CMatrix(kI * a.cast<cplx>())));
}

struct InvSqrtResult {
  HermitianMatrix value;
  bool singular = false;  // some eigenvalue fell under the kernel threshold
  int truncated = 0;
};

/// Pseudo-inverse square root: eigenvalues >= kernel_tol * lambda_max map to
/// lambda^{-1/2}, the rest to zero.
inline InvSqrtResult inv_sqrt_psd(const HermitianMatrix& h, double kernel_tol = kDefaultKernelTol) {
  const auto es = hermitian_eig(h);
  const double top = std::max(es.values.maxCoeff(), 0.0);
  if (es.values(0) < -1e-9 * (1.0 + top)) {
    throw Error(ErrorCode::kNotPsd, "inverse square root of a matrix with eigenvalue " +
                                        std::to_string(es.values(0)));
  }
  const double cut = kernel_tol * top;
  RVector d(es.values.size());
  int truncated = 0;
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    const double lam = es.values(k);
    if (lam >= cut && lam > 0.0) {
      d(k) = 1.0 / std::sqrt(lam);
    } else {
      d(k) = 0.0;
      ++truncated;
    }
  }
  CMatrix out = es.vectors * d.cast<cplx>().asDiagonal() * es.vectors.adjoint();
  return {HermitianMatrix::hermitian_part(out), truncated > 0, truncated};
}

/// Principal square root of a PSD matrix (negative round-off clipped to zero).
inline HermitianMatrix sqrt_psd(const HermitianMatrix& h) {
  const auto es = hermitian_eig(h);
  const RVector d = es.values.cwiseMax(0.0).cwiseSqrt();
  return HermitianMatrix::hermitian_part(es.vectors * d.cast<cplx>().asDiagonal() *
                                         es.vectors.adjoint());
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline CVector kron(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

/// Matrix exponential exp(-i t A) for Hermitian A via its eigendecomposition.
inline CMatrix expi(const HermitianMatrix& a, double t) {
  const auto es = hermitian_eig(a);
  CVector phases(es.values.size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) phases(k) = std::exp(-kI * t * es.values(k));
  return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

namespace pauli {
inline CMatrix x() { CMatrix m(2, 2); m << 0, 1, 1, 0; return m; }
inline CMatrix y() { CMatrix m(2, 2); m << 0, -kI, kI, 0; return m; }
inline CMatrix z() { CMatrix m(2, 2); m << 1, 0, 0, -1; return m; }
}  // namespace pauli

}  // namespace scgt
