#pragma once

// Brute-force cross-checks that bypass the SLD pipeline: Fisher information
// from finite differences of Born probabilities, a sampled score-covariance
// estimate of it, and random Rayleigh-quotient probing of Loewner gaps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "scgt/family.hpp"
#include "scgt/linalg.hpp"
#include "scgt/quantum.hpp"

namespace scgt {

/// Counter-based generator: draw k of stream `seed` is splitmix64(seed, k).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t at(std::uint64_t counter) const { return mix(mix(seed_) ^ counter); }
  std::uint64_t next() { return at(counter_++); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Standard normal via Box-Muller (portable across standard libraries).
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Probabilities on the central-difference stencil of every parameter.
struct Stencil {
  RVector center;
  std::vector<RVector> plus, minus;
  std::vector<std::size_t> skipped;  // null at the center and on the whole stencil
};

inline Stencil probability_stencil(const ParamStateFamily& family, const Povm& povm,
                                   const ParamPoint& point, double h, double null_tol) {
  if (!(h > 0.0)) throw Error(ErrorCode::kInvalidArgument, "finite-difference step <= 0");
  const auto probs_at = [&](const ParamPoint& p) {
    return born_probabilities(family.state(p), povm).probs;
  };
  Stencil s;
  s.center = probs_at(point);
  for (std::size_t i = 0; i < family.num_params(); ++i) {
    s.plus.push_back(probs_at(point.shifted(i, h)));
    s.minus.push_back(probs_at(point.shifted(i, -h)));
  }
  for (std::size_t w = 0; w < povm.size(); ++w) {
    const auto wi = static_cast<Eigen::Index>(w);
    std::size_t nulls = s.center(wi) <= null_tol ? 1 : 0;
    for (std::size_t i = 0; i < s.plus.size(); ++i)
      nulls += (s.plus[i](wi) <= null_tol) + (s.minus[i](wi) <= null_tol);
    if (nulls == 0) continue;
    if (nulls == 1 + 2 * s.plus.size()) {
      s.skipped.push_back(w);
      continue;
    }
    throw Error(ErrorCode::kNullOnStencil,
                "outcome " + std::to_string(w) + " is null on part of the stencil");
  }
  return s;
}

struct FdCfim {
  RMatrix F;
  std::vector<std::size_t> skipped;
};

/// [F_C]_ij = sum_w d_i p_w d_j p_w / p_w with central-difference d_i p_w.
inline FdCfim fd_cfim(const ParamStateFamily& family, const Povm& povm, const ParamPoint& point,
                      double h = kDefaultFdStep, double null_tol = kDefaultNullTol) {
  const auto s = probability_stencil(family, povm, point, h, null_tol);
  const auto m = static_cast<Eigen::Index>(family.num_params());
  FdCfim out{RMatrix::Zero(m, m), s.skipped};
  for (std::size_t w = 0; w < povm.size(); ++w) {
    const auto wi = static_cast<Eigen::Index>(w);
    if (s.center(wi) <= null_tol) continue;
    RVector dp(m);
    for (Eigen::Index i = 0; i < m; ++i) dp(i) = (s.plus[i](wi) - s.minus[i](wi)) / (2.0 * h);
    out.F += dp * dp.transpose() / s.center(wi);
  }
  return out;
}

struct McCfim {
  RMatrix estimate;
  RMatrix stderr_;  // per entry
  std::vector<std::uint64_t> counts;
  std::uint64_t shots = 0;
};

inline constexpr std::uint64_t kMinShots = 10000;

/// Samples `shots` outcomes at `point` by inverse CDF and averages the outer
/// product of the score d_i log p_w, itself taken by central differences of
/// log p_w on the same stencil as fd_cfim.
inline McCfim mc_cfim(const ParamStateFamily& family, const Povm& povm, const ParamPoint& point,
                      double h, std::uint64_t shots, std::uint64_t seed,
                      double null_tol = kDefaultNullTol) {
  if (shots < kMinShots)
    throw Error(ErrorCode::kInvalidArgument, "mc_cfim needs at least 10^4 shots");
  const auto s = probability_stencil(family, povm, point, h, null_tol);
  const auto m = static_cast<Eigen::Index>(family.num_params());
  const auto n = povm.size();

  std::vector<double> cdf(n);
  double acc = 0.0;
  for (std::size_t w = 0; w < n; ++w) {
    const double p = s.center(static_cast<Eigen::Index>(w));
    acc += p > null_tol ? p : 0.0;
    cdf[w] = acc;
  }
  McCfim out{RMatrix::Zero(m, m), RMatrix::Zero(m, m), std::vector<std::uint64_t>(n, 0), shots};
  CounterRng rng(seed);
  for (std::uint64_t k = 0; k < shots; ++k) {
    const double u = rng.uniform() * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    ++out.counts[std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), n - 1)];
  }

  RMatrix second = RMatrix::Zero(m, m);
  for (std::size_t w = 0; w < n; ++w) {
    if (out.counts[w] == 0) continue;
    const auto wi = static_cast<Eigen::Index>(w);
    RVector score(m);
    for (Eigen::Index i = 0; i < m; ++i)
      score(i) = (std::log(s.plus[i](wi)) - std::log(s.minus[i](wi))) / (2.0 * h);
    const RMatrix ss = score * score.transpose();
    const double frac = static_cast<double>(out.counts[w]) / static_cast<double>(shots);
    out.estimate += frac * ss;
    second += frac * ss.cwiseProduct(ss);
  }
  const double nn = static_cast<double>(shots);
  const RMatrix var = (second - out.estimate.cwiseProduct(out.estimate)) * (nn / (nn - 1.0));
  out.stderr_ = (var.cwiseMax(0.0) / nn).cwiseSqrt();
  return out;
}

struct ProbeResult {
  double min_value;       // min over sampled unit z of z^dagger (B - A) z
  double min_eigenvalue;  // eigen-decomposition minimum, for comparison
  CVector argmin;
};

inline ProbeResult random_loewner_probe(const CMatrix& a, const CMatrix& b, std::size_t trials,
                                        std::uint64_t seed) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw Error(ErrorCode::kDimMismatch, "probe needs square matrices of equal shape");
  const HermitianMatrix gap = HermitianMatrix::hermitian_part(CMatrix(b - a));
  const auto d = gap.dim();
  CounterRng rng(seed);
  ProbeResult r{std::numeric_limits<double>::infinity(), hermitian_eig(gap).values(0),
                CVector::Zero(d)};
  for (std::size_t t = 0; t < trials; ++t) {
    CVector z(d);
    for (Eigen::Index k = 0; k < d; ++k) z(k) = cplx(rng.normal(), rng.normal());
    z.normalize();
    const double v = z.dot(gap.mat() * z).real();
    if (v < r.min_value) {
      r.min_value = v;
      r.argmin = z;
    }
  }
  return r;
}

}  // namespace scgt
