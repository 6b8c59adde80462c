#pragma once

// Parameterized state families theta -> rho_theta together with their
// derivative providers, plus the builtin families used by the tests and the
// batch runner.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "scgt/linalg.hpp"
#include "scgt/quantum.hpp"

namespace scgt {

inline constexpr double kDefaultFdStep = 1e-5;

struct AnalyticDerivatives {};

/// Central differences; one step per parameter, or a single step for all.
struct FiniteDifference {
  std::vector<double> steps{kDefaultFdStep};

  double step(std::size_t i) const { return steps.size() == 1 ? steps.front() : steps.at(i); }
};

using DerivativeMode = std::variant<AnalyticDerivatives, FiniteDifference>;

/// |psi_theta> together with its parameter derivatives |d_i psi_theta>.
struct PureJet {
  PureState psi;
  std::vector<CVector> dpsi;
};

class ParamStateFamily {
 public:
  struct Callbacks {
    std::function<DensityMatrix(const ParamPoint&)> state;
    std::function<std::vector<HermitianMatrix>(const ParamPoint&)> state_derivatives;
    // Optional pure-state route; when present the family is pure.
    std::function<PureState(const ParamPoint&)> pure;
    std::function<std::vector<CVector>(const ParamPoint&)> pure_derivatives;
  };

  ParamStateFamily(std::string name, Eigen::Index dim, std::size_t m, Callbacks cb,
                   DerivativeMode mode = AnalyticDerivatives{})
      : name_(std::move(name)), dim_(dim), m_(m), cb_(std::move(cb)), mode_(std::move(mode)) {
    check_dim_cap(dim_);
    if (m_ == 0) throw Error(ErrorCode::kInvalidArgument, "family needs m >= 1");
    if (!cb_.state && cb_.pure) {
      cb_.state = [pure = cb_.pure](const ParamPoint& p) { return DensityMatrix(pure(p)); };
    }
    if (!cb_.state) throw Error(ErrorCode::kInvalidArgument, "family has no state evaluator");
    if (std::holds_alternative<AnalyticDerivatives>(mode_) && !cb_.state_derivatives &&
        !cb_.pure_derivatives) {
      throw Error(ErrorCode::kInvalidArgument,
                  "family '" + name_ + "' has no analytic derivatives");
    }
    if (auto* fd = std::get_if<FiniteDifference>(&mode_)) {
      for (double h : fd->steps)
        if (!(h > 0.0)) throw Error(ErrorCode::kInvalidArgument, "finite-difference step <= 0");
    }
  }

  const std::string& name() const { return name_; }
  Eigen::Index dim() const { return dim_; }
  std::size_t num_params() const { return m_; }
  bool is_pure() const { return static_cast<bool>(cb_.pure); }
  const DerivativeMode& derivative_mode() const { return mode_; }
  bool analytic() const { return std::holds_alternative<AnalyticDerivatives>(mode_); }

  ParamStateFamily with_derivative_mode(DerivativeMode mode) const {
    return ParamStateFamily(name_, dim_, m_, cb_, std::move(mode));
  }

  DensityMatrix state(const ParamPoint& p) const {
    check_point(p);
    return cb_.state(p);
  }

  PureState pure_state(const ParamPoint& p) const {
    check_point(p);
    if (!is_pure()) throw Error(ErrorCode::kInvalidArgument, "family is not pure");
    return cb_.pure(p);
  }

  /// d_i rho at p for every parameter; Hermitian and traceless.
  std::vector<HermitianMatrix> state_derivatives(const ParamPoint& p) const {
    check_point(p);
    std::vector<HermitianMatrix> out;
    if (const auto* fd = std::get_if<FiniteDifference>(&mode_)) {
      for (std::size_t i = 0; i < m_; ++i) {
        const double h = fd->step(i);
        const CMatrix plus = eval_stencil(p, i, h).mat();
        const CMatrix minus = eval_stencil(p, i, -h).mat();
        auto d = HermitianMatrix::hermitian_part((plus - minus) / (2.0 * h));
        const double tr = std::abs(d.mat().trace());
        if (tr > 10.0 * h * h + 1e-9)
          throw Error(ErrorCode::kDomainError, "finite-difference d tr(rho) = " +
                                                   std::to_string(tr) + " along parameter " +
                                                   std::to_string(i));
        out.push_back(std::move(d));
      }
      return out;
    }
    if (cb_.state_derivatives) {
      out = cb_.state_derivatives(p);
    } else {
      const PureState psi = cb_.pure(p);
      for (const auto& d : cb_.pure_derivatives(p)) {
        out.push_back(HermitianMatrix::hermitian_part(
            CMatrix(2.0 * d * psi.vec().adjoint())));  // |d psi><psi| + h.c.
      }
    }
    if (out.size() != m_)
      throw Error(ErrorCode::kDimMismatch, "analytic provider returned wrong derivative count");
    for (std::size_t i = 0; i < m_; ++i) {
      if (out[i].dim() != dim_) throw Error(ErrorCode::kDimMismatch, "derivative dimension");
      if (std::abs(out[i].mat().trace()) > 1e-9)
        throw Error(ErrorCode::kDomainError, "analytic derivative is not traceless");
    }
    return out;
  }

  PureJet pure_jet(const ParamPoint& p) const {
    PureJet jet{pure_state(p), {}};
    if (const auto* fd = std::get_if<FiniteDifference>(&mode_)) {
      for (std::size_t i = 0; i < m_; ++i) {
        const double h = fd->step(i);
        jet.dpsi.push_back((pure_stencil(p, i, h).vec() - pure_stencil(p, i, -h).vec()) /
                           (2.0 * h));
      }
      return jet;
    }
    if (!cb_.pure_derivatives)
      throw Error(ErrorCode::kInvalidArgument, "family has no analytic pure-state derivatives");
    jet.dpsi = cb_.pure_derivatives(p);
    if (jet.dpsi.size() != m_)
      throw Error(ErrorCode::kDimMismatch, "analytic provider returned wrong derivative count");
    return jet;
  }

 private:
  void check_point(const ParamPoint& p) const {
    if (p.size() != m_)
      throw Error(ErrorCode::kDimMismatch, "family '" + name_ + "' expects " +
                                               std::to_string(m_) + " parameters, got " +
                                               std::to_string(p.size()));
  }

  DensityMatrix eval_stencil(const ParamPoint& p, std::size_t i, double delta) const {
    try {
      return cb_.state(p.shifted(i, delta));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kDomainError, std::string("stencil evaluation failed: ") + e.what());
    }
  }

  PureState pure_stencil(const ParamPoint& p, std::size_t i, double delta) const {
    try {
      return cb_.pure(p.shifted(i, delta));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kDomainError, std::string("stencil evaluation failed: ") + e.what());
    }
  }

  std::string name_;
  Eigen::Index dim_;
  std::size_t m_;
  Callbacks cb_;
  DerivativeMode mode_;
};

/// U_theta = prod_k exp(-i theta_{param_k} A_k), factors multiplied left to right.
class UnitaryEncoding {
 public:
  struct Factor {
    std::size_t param;
    HermitianMatrix generator;
  };

  UnitaryEncoding(std::vector<Factor> factors, std::size_t num_params)
      : factors_(std::move(factors)), m_(num_params) {
    if (factors_.empty()) throw Error(ErrorCode::kInvalidArgument, "encoding needs a factor");
    dim_ = factors_.front().generator.dim();
    for (const auto& f : factors_) {
      if (f.generator.dim() != dim_) throw Error(ErrorCode::kDimMismatch, "generator dims differ");
      if (f.param >= m_) throw Error(ErrorCode::kInvalidArgument, "factor parameter index");
    }
  }

  /// One factor per parameter: exp(-i theta_1 A_1) ... exp(-i theta_m A_m).
  static UnitaryEncoding product(const std::vector<HermitianMatrix>& generators) {
    std::vector<Factor> f;
    for (std::size_t i = 0; i < generators.size(); ++i) f.push_back({i, generators[i]});
    return UnitaryEncoding(std::move(f), generators.size());
  }

  Eigen::Index dim() const { return dim_; }
  std::size_t num_params() const { return m_; }
  const std::vector<Factor>& factors() const { return factors_; }

  CMatrix unitary(const ParamPoint& p) const {
    CMatrix u = CMatrix::Identity(dim_, dim_);
    for (const auto& f : factors_) u = u * expi(f.generator, p[f.param]);
    return u;
  }

  /// H_i = -i (d_i U^dagger) U = sum over factors of parameter i of V_k^dagger A_k V_k,
  /// where V_k is the product of the factors to the right of k.
  std::vector<HermitianMatrix> generators(const ParamPoint& p) const {
    std::vector<CMatrix> h(m_, CMatrix::Zero(dim_, dim_));
    CMatrix right = CMatrix::Identity(dim_, dim_);
    for (std::size_t k = factors_.size(); k-- > 0;) {
      const auto& f = factors_[k];
      h[f.param] += right.adjoint() * f.generator.mat() * right;
      right = expi(f.generator, p[f.param]) * right;
    }
    std::vector<HermitianMatrix> out;
    for (auto& m : h) out.push_back(HermitianMatrix::hermitian_part(m));
    return out;
  }

 private:
  std::vector<Factor> factors_;
  std::size_t m_;
  Eigen::Index dim_ = 0;
};

namespace families {

/// |psi> = sin(t/2)|0> + e^{i phi} cos(t/2)|1>, parameters (t, phi).
inline PureState bloch_state(const ParamPoint& p) {
  CVector v(2);
  v << std::sin(p[0] / 2.0), std::exp(kI * p[1]) * std::cos(p[0] / 2.0);
  return PureState(v);
}

inline ParamStateFamily bloch_qubit(DerivativeMode mode = AnalyticDerivatives{}) {
  ParamStateFamily::Callbacks cb;
  cb.pure = bloch_state;
  cb.pure_derivatives = [](const ParamPoint& p) {
    const double t = p[0], phi = p[1];
    CVector d_t(2), d_phi(2);
    d_t << std::cos(t / 2.0) / 2.0, -std::exp(kI * phi) * std::sin(t / 2.0) / 2.0;
    d_phi << 0.0, kI * std::exp(kI * phi) * std::cos(t / 2.0);
    return std::vector<CVector>{d_t, d_phi};
  };
  return ParamStateFamily("bloch_qubit", 2, 2, std::move(cb), std::move(mode));
}

inline CMatrix bloch_vector_operator(double x, double y, double z) {
  return x * pauli::x() + y * pauli::y() + z * pauli::z();
}

/// rho = (1 + r n(t, phi) . sigma) / 2 with n = (sin t cos phi, sin t sin phi, cos t),
/// parameters (r, t, phi), 0 <= r < 1.
inline ParamStateFamily mixed_qubit(DerivativeMode mode = AnalyticDerivatives{}) {
  ParamStateFamily::Callbacks cb;
  cb.state = [](const ParamPoint& p) {
    const double r = p[0], t = p[1], f = p[2];
    if (!(r >= 0.0 && r <= 1.0)) throw Error(ErrorCode::kDomainError, "Bloch radius outside [0, 1]");
    const CMatrix n = bloch_vector_operator(std::sin(t) * std::cos(f), std::sin(t) * std::sin(f),
                                            std::cos(t));
    return DensityMatrix(CMatrix(0.5 * (CMatrix::Identity(2, 2) + r * n)));
  };
  cb.state_derivatives = [](const ParamPoint& p) {
    const double r = p[0], t = p[1], f = p[2];
    const double st = std::sin(t), ct = std::cos(t), sf = std::sin(f), cf = std::cos(f);
    return std::vector<HermitianMatrix>{
        HermitianMatrix(CMatrix(0.5 * bloch_vector_operator(st * cf, st * sf, ct))),
        HermitianMatrix(CMatrix(0.5 * r * bloch_vector_operator(ct * cf, ct * sf, -st))),
        HermitianMatrix(CMatrix(0.5 * r * bloch_vector_operator(-st * sf, st * cf, 0.0)))};
  };
  return ParamStateFamily("mixed_qubit", 2, 3, std::move(cb), std::move(mode));
}

/// One-parameter slice of mixed_qubit: only the radius r varies, along a fixed
/// direction (t, phi).
inline ParamStateFamily mixed_qubit_radial(double t, double phi,
                                           DerivativeMode mode = AnalyticDerivatives{}) {
  const auto full = mixed_qubit();
  ParamStateFamily::Callbacks cb;
  cb.state = [full, t, phi](const ParamPoint& p) { return full.state({p[0], t, phi}); };
  cb.state_derivatives = [full, t, phi](const ParamPoint& p) {
    return std::vector<HermitianMatrix>{full.state_derivatives({p[0], t, phi}).front()};
  };
  return ParamStateFamily("mixed_qubit_radial", 2, 1, std::move(cb), std::move(mode));
}

/// rho_theta = U_theta rho0 U_theta^dagger.
inline ParamStateFamily unitary_encoding(UnitaryEncoding enc, DensityMatrix rho0,
                                         DerivativeMode mode = AnalyticDerivatives{}) {
  if (rho0.dim() != enc.dim()) throw Error(ErrorCode::kDimMismatch, "rho0 vs generators");
  const auto d = enc.dim();
  const auto m = enc.num_params();
  ParamStateFamily::Callbacks cb;
  cb.state = [enc, rho0](const ParamPoint& p) {
    const CMatrix u = enc.unitary(p);
    return DensityMatrix(HermitianMatrix::hermitian_part(u * rho0.mat() * u.adjoint()));
  };
  cb.state_derivatives = [enc, rho0](const ParamPoint& p) {
    const CMatrix u = enc.unitary(p);
    std::vector<HermitianMatrix> out;
    for (const auto& h : enc.generators(p)) {
      const CMatrix comm = h.mat() * rho0.mat() - rho0.mat() * h.mat();
      out.push_back(HermitianMatrix::hermitian_part(-kI * u * comm * u.adjoint()));
    }
    return out;
  };
  return ParamStateFamily("unitary_encoding", d, m, std::move(cb), std::move(mode));
}

/// |psi_theta> = U_theta |psi0>.
inline ParamStateFamily unitary_encoding(UnitaryEncoding enc, PureState psi0,
                                         DerivativeMode mode = AnalyticDerivatives{}) {
  if (psi0.dim() != enc.dim()) throw Error(ErrorCode::kDimMismatch, "psi0 vs generators");
  const auto d = enc.dim();
  const auto m = enc.num_params();
  ParamStateFamily::Callbacks cb;
  cb.pure = [enc, psi0](const ParamPoint& p) {
    return PureState::normalized(enc.unitary(p) * psi0.vec());
  };
  cb.pure_derivatives = [enc, psi0](const ParamPoint& p) {
    const CMatrix u = enc.unitary(p);
    std::vector<CVector> out;
    for (const auto& h : enc.generators(p)) out.push_back(-kI * u * (h.mat() * psi0.vec()));
    return out;
  };
  return ParamStateFamily("unitary_encoding", d, m, std::move(cb), std::move(mode));
}

/// Uniformly spaced axis: start + k * step, k = 0..count-1.
struct GridAxis {
  double start = 0.0;
  double step = 1.0;
  std::size_t count = 0;

  double at(std::size_t k) const { return start + step * static_cast<double>(k); }
};

/// States tabulated on a product grid (row-major, last axis fastest). Only grid
/// nodes can be evaluated and derivatives are central differences between
/// neighbouring nodes, so they exist at interior nodes only.
inline ParamStateFamily explicit_grid(std::vector<GridAxis> axes,
                                      std::vector<DensityMatrix> states) {
  if (axes.empty()) throw Error(ErrorCode::kInvalidArgument, "explicit grid needs an axis");
  std::size_t total = 1;
  std::vector<double> steps;
  for (const auto& a : axes) {
    if (a.count < 1 || !(a.step > 0.0))
      throw Error(ErrorCode::kInvalidArgument, "grid axes must be strictly increasing");
    total *= a.count;
    steps.push_back(a.step);
  }
  if (states.size() != total)
    throw Error(ErrorCode::kDimMismatch, "grid has " + std::to_string(total) + " nodes but " +
                                             std::to_string(states.size()) + " states");
  const auto d = states.front().dim();
  for (const auto& s : states)
    if (s.dim() != d) throw Error(ErrorCode::kDimMismatch, "grid states differ in dimension");
  ParamStateFamily::Callbacks cb;
  cb.state = [axes, states](const ParamPoint& p) {
    std::size_t flat = 0;
    for (std::size_t i = 0; i < axes.size(); ++i) {
      const double k = (p[i] - axes[i].start) / axes[i].step;
      const double kr = std::round(k);
      if (std::abs(k - kr) > 1e-6 || kr < 0 || kr >= static_cast<double>(axes[i].count))
        throw Error(ErrorCode::kDomainError, "point is not a grid node");
      flat = flat * axes[i].count + static_cast<std::size_t>(kr);
    }
    return states[flat];
  };
  return ParamStateFamily("explicit_grid", d, axes.size(), std::move(cb),
                          FiniteDifference{steps});
}

}  // namespace families
}  // namespace scgt
