#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "scgt/linalg.hpp"

namespace scgt {

inline constexpr double kStateTol = 1e-10;
inline constexpr double kPureNormTol = 1e-12;
inline constexpr double kDefaultNullTol = 1e-12;
inline constexpr double kProbabilityClip = 1e-12;

/// Parameter vector theta (m >= 1, finite).
class ParamPoint {
 public:
  ParamPoint() = default;
  explicit ParamPoint(std::vector<double> theta) : theta_(std::move(theta)) {
    if (theta_.empty()) throw Error(ErrorCode::kInvalidArgument, "parameter point needs m >= 1");
    for (double v : theta_)
      if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite parameter");
  }
  ParamPoint(std::initializer_list<double> theta) : ParamPoint(std::vector<double>(theta)) {}

  std::size_t size() const { return theta_.size(); }
  double operator[](std::size_t i) const { return theta_[i]; }
  const std::vector<double>& values() const { return theta_; }

  /// theta + delta * e_i
  ParamPoint shifted(std::size_t i, double delta) const {
    auto t = theta_;
    t.at(i) += delta;
    return ParamPoint(std::move(t));
  }

 private:
  std::vector<double> theta_;
};

class PureState {
 public:
  PureState() = default;
  explicit PureState(CVector amplitudes) : psi_(std::move(amplitudes)) {
    check_dim_cap(psi_.size());
    if (psi_.size() == 0 || !all_finite(psi_))
      throw Error(ErrorCode::kInvalidState, "empty or non-finite state vector");
    const double n2 = psi_.squaredNorm();
    if (std::abs(n2 - 1.0) > kPureNormTol) {
      throw Error(ErrorCode::kInvalidState, "|psi|^2 = " + std::to_string(n2) + " is not 1");
    }
  }

  static PureState normalized(const CVector& v) { return PureState(CVector(v / v.norm())); }

  Eigen::Index dim() const { return psi_.size(); }
  const CVector& vec() const { return psi_; }
  CMatrix projector() const { return psi_ * psi_.adjoint(); }

 private:
  CVector psi_;
};

/// Unit-trace PSD operator (both within 1e-10).
class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(HermitianMatrix rho) : rho_(std::move(rho)) {
    check_dim_cap(rho_.dim());
    const double tr = rho_.mat().trace().real();
    if (std::abs(tr - 1.0) > kStateTol)
      throw Error(ErrorCode::kInvalidState, "tr(rho) = " + std::to_string(tr));
    const auto chk = is_psd(rho_, kStateTol);
    if (chk.min_eigenvalue < -kStateTol)
      throw Error(ErrorCode::kInvalidState,
                  "rho has eigenvalue " + std::to_string(chk.min_eigenvalue));
  }
  explicit DensityMatrix(const CMatrix& m) : DensityMatrix(HermitianMatrix(m)) {}
  explicit DensityMatrix(const PureState& psi) : DensityMatrix(HermitianMatrix(psi.projector())) {}

  Eigen::Index dim() const { return rho_.dim(); }
  const HermitianMatrix& herm() const { return rho_; }
  const CMatrix& mat() const { return rho_.mat(); }
  double purity() const { return (rho_.mat() * rho_.mat()).trace().real(); }

 private:
  HermitianMatrix rho_;
};

/// Ordered PSD effects E_w summing to the identity; outcome labels are 0-based.
class Povm {
 public:
  Povm() = default;
  explicit Povm(std::vector<HermitianMatrix> effects, std::vector<std::string> labels = {})
      : effects_(std::move(effects)), labels_(std::move(labels)) {
    if (effects_.empty()) throw Error(ErrorCode::kInvalidPovm, "POVM needs at least one effect");
    const auto d = effects_.front().dim();
    check_dim_cap(d);
    CMatrix sum = CMatrix::Zero(d, d);
    for (std::size_t w = 0; w < effects_.size(); ++w) {
      if (effects_[w].dim() != d)
        throw Error(ErrorCode::kDimMismatch, "effect " + std::to_string(w) + " has wrong dim");
      const auto chk = is_psd(effects_[w], kStateTol);
      if (chk.min_eigenvalue < -kStateTol)
        throw Error(ErrorCode::kInvalidPovm, "effect " + std::to_string(w) +
                                                 " has eigenvalue " +
                                                 std::to_string(chk.min_eigenvalue));
      sum += effects_[w].mat();
    }
    const double dev = max_abs(CMatrix(sum - CMatrix::Identity(d, d)));
    if (dev > kStateTol)
      throw Error(ErrorCode::kInvalidPovm, "effects sum to identity only within " +
                                               std::to_string(dev));
    if (labels_.empty())
      for (std::size_t w = 0; w < effects_.size(); ++w) labels_.push_back(std::to_string(w));
    if (labels_.size() != effects_.size())
      throw Error(ErrorCode::kInvalidPovm, "label count does not match effect count");
  }

  /// Projective measurement onto the columns of a unitary.
  static Povm projective(const CMatrix& basis) {
    std::vector<HermitianMatrix> e;
    for (Eigen::Index k = 0; k < basis.cols(); ++k)
      e.push_back(HermitianMatrix::hermitian_part(basis.col(k) * basis.col(k).adjoint()));
    return Povm(std::move(e));
  }

  /// E_w = eps |w><w| + (1 - eps) 1/d in the computational basis.
  static Povm depolarized_projective(Eigen::Index dim, double eps) {
    if (!(eps >= 0.0 && eps <= 1.0))
      throw Error(ErrorCode::kInvalidArgument, "epsilon must lie in [0, 1]");
    std::vector<HermitianMatrix> e;
    for (Eigen::Index w = 0; w < dim; ++w) {
      CMatrix m = CMatrix::Identity(dim, dim) * ((1.0 - eps) / static_cast<double>(dim));
      m(w, w) += eps;
      e.emplace_back(m);
    }
    return Povm(std::move(e));
  }

  std::size_t size() const { return effects_.size(); }
  Eigen::Index dim() const { return effects_.front().dim(); }
  const HermitianMatrix& effect(std::size_t w) const { return effects_[w]; }
  const std::vector<HermitianMatrix>& effects() const { return effects_; }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<HermitianMatrix> effects_;
  std::vector<std::string> labels_;
};

struct BornResult {
  RVector probs;
  bool clipped = false;  // some tiny negative probability was reported as zero
};

inline BornResult born_probabilities(const DensityMatrix& rho, const Povm& povm) {
  if (rho.dim() != povm.dim())
    throw Error(ErrorCode::kDimMismatch, "state and POVM dimensions differ");
  BornResult out{RVector(povm.size()), false};
  for (std::size_t w = 0; w < povm.size(); ++w) {
    double p = (rho.mat() * povm.effect(w).mat()).trace().real();
    if (p < 0.0) {
      if (p < -kProbabilityClip)
        throw Error(ErrorCode::kNonPositiveProbability,
                    "p_" + std::to_string(w) + " = " + std::to_string(p));
      p = 0.0;
      out.clipped = true;
    }
    out.probs(static_cast<Eigen::Index>(w)) = p;
  }
  return out;
}

struct OutcomePartition {
  std::vector<std::size_t> regular;
  std::vector<std::size_t> null;
  RVector probs;

  bool is_null(std::size_t w) const {
    return std::find(null.begin(), null.end(), w) != null.end();
  }
};

/// Outcomes with p > null_tol are regular, the rest null.
inline OutcomePartition classify_outcomes(const RVector& probs, double null_tol = kDefaultNullTol) {
  OutcomePartition part;
  part.probs = probs;
  for (Eigen::Index w = 0; w < probs.size(); ++w) {
    (probs(w) > null_tol ? part.regular : part.null).push_back(static_cast<std::size_t>(w));
  }
  return part;
}

}  // namespace scgt
