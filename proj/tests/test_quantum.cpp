#include <gtest/gtest.h>

#include <numbers>

#include "scgt/family.hpp"
#include "scgt/quantum.hpp"
#include "support/random_instances.hpp"

using namespace scgt;
using std::numbers::pi;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no scgt::Error thrown";
  return ErrorCode::kInvalidArgument;
}

/// rho(r) = diag((1 + r)/2, (1 - r)/2), one parameter.
ParamStateFamily diagonal_qubit(DerivativeMode mode = AnalyticDerivatives{}) {
  ParamStateFamily::Callbacks cb;
  cb.state = [](const ParamPoint& p) {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = (1 + p[0]) / 2;
    m(1, 1) = (1 - p[0]) / 2;
    return DensityMatrix(m);
  };
  cb.state_derivatives = [](const ParamPoint&) {
    return std::vector<HermitianMatrix>{HermitianMatrix(CMatrix(pauli::z() / 2.0))};
  };
  return ParamStateFamily("diagonal_qubit", 2, 1, cb, mode);
}

}  // namespace

TEST(PureState, NormCheck) {
  CVector v(2);
  v << 1.0, 1e-6;
  EXPECT_EQ(code_of([&] { PureState{v}; }), ErrorCode::kInvalidState);
  EXPECT_NEAR(PureState::normalized(v).vec().norm(), 1.0, 1e-15);
}

TEST(DensityMatrix, Invariants) {
  EXPECT_EQ(code_of([] { DensityMatrix(CMatrix(CMatrix::Identity(2, 2))); }),
            ErrorCode::kInvalidState);
  CMatrix neg = CMatrix::Zero(2, 2);
  neg(0, 0) = 1.2;
  neg(1, 1) = -0.2;
  EXPECT_EQ(code_of([&] { DensityMatrix{neg}; }), ErrorCode::kInvalidState);
  EXPECT_NO_THROW(DensityMatrix(CMatrix(CMatrix::Identity(2, 2) / 2.0)));
}

TEST(Povm, Invariants) {
  EXPECT_EQ(code_of([] { Povm({HermitianMatrix(CMatrix(pauli::z()))}); }),
            ErrorCode::kInvalidPovm);
  EXPECT_EQ(code_of([] { Povm({HermitianMatrix(CMatrix(0.5 * CMatrix::Identity(2, 2)))}); }),
            ErrorCode::kInvalidPovm);
  EXPECT_EQ(code_of([] { Povm::depolarized_projective(2, 1.5); }), ErrorCode::kInvalidArgument);
  const auto p = Povm::depolarized_projective(2, 0.5);
  EXPECT_EQ(p.labels(), (std::vector<std::string>{"0", "1"}));
}

TEST(BornProbabilities, MaximallyMixedZ) {
  const DensityMatrix rho(CMatrix(CMatrix::Identity(2, 2) / 2.0));
  const auto b = born_probabilities(rho, Povm::projective(CMatrix::Identity(2, 2)));
  EXPECT_NEAR(b.probs(0), 0.5, 1e-15);
  EXPECT_NEAR(b.probs(1), 0.5, 1e-15);
  EXPECT_FALSE(b.clipped);
}

TEST(BornProbabilities, ExampleClosedForm) {
  for (double eps : {0.0, 0.5, 0.9}) {
    for (double t : {0.3, pi / 2, 2.5}) {
      const DensityMatrix rho(families::bloch_state({t, 0.7}));
      const auto b = born_probabilities(rho, Povm::depolarized_projective(2, eps));
      EXPECT_NEAR(b.probs(0), (1 - eps * std::cos(t)) / 2, 1e-14);
      EXPECT_NEAR(b.probs(1), (1 + eps * std::cos(t)) / 2, 1e-14);
    }
  }
}

TEST(BornProbabilities, DimMismatch) {
  const DensityMatrix rho(CMatrix(CMatrix::Identity(3, 3) / 3.0));
  EXPECT_EQ(code_of([&] { born_probabilities(rho, Povm::depolarized_projective(2, 0.5)); }),
            ErrorCode::kDimMismatch);
}

TEST(BornProbabilities, SumToOneOnRandomInstances) {
  fixtures::Random r(21);
  for (int t = 0; t < 200; ++t) {
    const auto d = r.integer(2, 5);
    const auto b = born_probabilities(r.density(d, r.integer(1, d)), r.povm(d, r.integer(2, 5)));
    EXPECT_NEAR(b.probs.sum(), 1.0, 1e-10);
    EXPECT_GE(b.probs.minCoeff(), 0.0);
  }
}

TEST(ClassifyOutcomes, Threshold) {
  RVector p(2);
  p << 0.5, 0.5;
  auto part = classify_outcomes(p);
  EXPECT_EQ(part.regular, (std::vector<std::size_t>{0, 1}));
  EXPECT_TRUE(part.null.empty());
  p << 1.0, 0.0;
  part = classify_outcomes(p);
  EXPECT_EQ(part.null, (std::vector<std::size_t>{1}));
  p << 1 - 1e-13, 1e-13;
  part = classify_outcomes(p, 1e-12);
  EXPECT_EQ(part.null, (std::vector<std::size_t>{1}));
  EXPECT_TRUE(part.is_null(1));
}

TEST(StateDerivatives, DiagonalFamily) {
  const auto fam = diagonal_qubit();
  const auto d = fam.state_derivatives({0.0});
  EXPECT_LT(max_abs(CMatrix(d[0].mat() - pauli::z() / 2.0)), 1e-15);
  const auto fd = fam.with_derivative_mode(FiniteDifference{}).state_derivatives({0.0});
  EXPECT_LT(max_abs(CMatrix(fd[0].mat() - pauli::z() / 2.0)), 1e-9);
}

TEST(StateDerivatives, BlochTraceFree) {
  const auto d = families::bloch_qubit().state_derivatives({pi / 2, 0.0});
  ASSERT_EQ(d.size(), 2u);
  for (const auto& x : d) EXPECT_LT(std::abs(x.mat().trace()), 1e-14);
  // d_t rho at (pi/2, 0) is sigma_z / 2
  EXPECT_LT(max_abs(CMatrix(d[0].mat() - pauli::z() / 2.0)), 1e-14);
}

TEST(StateDerivatives, FiniteDifferenceMatchesAnalytic) {
  fixtures::Random r(22);
  const auto an = families::bloch_qubit();
  const auto fd = families::bloch_qubit(FiniteDifference{{1e-5}});
  for (int t = 0; t < 50; ++t) {
    const ParamPoint p{r.uniform(0.1, 3.0), r.uniform(0, 2 * pi)};
    const auto a = an.state_derivatives(p), f = fd.state_derivatives(p);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_LT(max_abs(CMatrix(a[i].mat() - f[i].mat())), 1e-8);
  }
  const auto mq = families::mixed_qubit();
  const auto mqf = mq.with_derivative_mode(FiniteDifference{{1e-5}});
  for (int t = 0; t < 50; ++t) {
    const ParamPoint p{r.uniform(0.1, 0.9), r.uniform(0.1, 3.0), r.uniform(0, 2 * pi)};
    const auto a = mq.state_derivatives(p), f = mqf.state_derivatives(p);
    for (std::size_t i = 0; i < 3; ++i)
      EXPECT_LT(max_abs(CMatrix(a[i].mat() - f[i].mat())), 100 * 1e-10);
  }
}

TEST(StateDerivatives, UnitaryEncodingFiniteDifferenceMatchesAnalytic) {
  fixtures::Random r(23);
  for (int t = 0; t < 20; ++t) {
    const auto d = r.integer(2, 4);
    const auto m = static_cast<std::size_t>(r.integer(1, 3));
    const auto enc = r.encoding(d, m);
    const auto fam = families::unitary_encoding(enc, r.density(d, d));
    const auto fd = fam.with_derivative_mode(FiniteDifference{{1e-5}});
    const auto p = r.point(m);
    const auto a = fam.state_derivatives(p), f = fd.state_derivatives(p);
    for (std::size_t i = 0; i < m; ++i) EXPECT_LT(max_abs(CMatrix(a[i].mat() - f[i].mat())), 1e-7);
  }
}

TEST(StateDerivatives, StencilFailureIsDomainError) {
  const auto fam = families::mixed_qubit_radial(0.0, 0.0, FiniteDifference{{1e-3}});
  EXPECT_EQ(code_of([&] { fam.state_derivatives({1.0}); }), ErrorCode::kDomainError);
}

TEST(StateDerivatives, WrongParameterCount) {
  EXPECT_EQ(code_of([] { families::bloch_qubit().state({0.1}); }), ErrorCode::kDimMismatch);
}

TEST(Families, BuiltinsProduceValidStates) {
  fixtures::Random r(24);
  for (int t = 0; t < 50; ++t) {
    EXPECT_NO_THROW(families::bloch_qubit().state({r.uniform(0, pi), r.uniform(0, 2 * pi)}));
    EXPECT_NO_THROW(families::mixed_qubit().state({r.uniform(0, 1), r.uniform(0, pi), r.uniform(0, 6)}));
  }
}

TEST(Families, ExplicitGridNodesAndDerivatives) {
  // rho(r) = diag((1 + r)/2, (1 - r)/2) tabulated at r = -0.5, -0.25, ..., 0.5
  families::GridAxis axis{-0.5, 0.25, 5};
  std::vector<DensityMatrix> states;
  for (std::size_t k = 0; k < axis.count; ++k) states.push_back(diagonal_qubit().state({axis.at(k)}));
  const auto fam = families::explicit_grid({axis}, states);
  EXPECT_NO_THROW(fam.state({0.25}));
  EXPECT_EQ(code_of([&] { fam.state({0.1}); }), ErrorCode::kDomainError);
  const auto d = fam.state_derivatives({0.0});
  EXPECT_LT(max_abs(CMatrix(d[0].mat() - pauli::z() / 2.0)), 1e-14);
  EXPECT_EQ(code_of([&] { fam.state_derivatives({0.5}); }), ErrorCode::kDomainError);
}
