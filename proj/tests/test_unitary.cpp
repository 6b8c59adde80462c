#include <gtest/gtest.h>

#include <numbers>

#include "scgt/unitary.hpp"
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

HermitianMatrix half_z() { return HermitianMatrix(CMatrix(pauli::z() / 2.0)); }

PureState plus_state() {
  CVector v(2);
  v << 1.0, 1.0;
  return PureState::normalized(v);
}

}  // namespace

TEST(Generators, SingleQubitRotation) {
  const auto enc = UnitaryEncoding::product({half_z()});
  const auto povm = Povm::projective(CMatrix::Identity(2, 2));
  const auto g = generators(enc, {0.7}, povm);
  EXPECT_LT(max_abs(CMatrix(g.generators[0].mat() - pauli::z() / 2.0)), 1e-15);

  const UnitaryFunction u = [](const ParamPoint& p) { return expi(half_z(), p[0]); };
  const auto fd = generators(u, {0.7}, povm);
  EXPECT_LT(max_abs(CMatrix(fd.generators[0].mat() - pauli::z() / 2.0)), 1e-9);
  EXPECT_LT(fd.anti_hermitian_residual, 1e-9);
}

TEST(Generators, FiniteDifferenceMatchesExact) {
  fixtures::Random r(71);
  for (int t = 0; t < 30; ++t) {
    const auto d = r.integer(2, 4);
    const auto m = static_cast<std::size_t>(r.integer(1, 3));
    const auto enc = r.encoding(d, m);
    const auto p = r.point(m);
    const auto povm = r.povm(d, 3);
    const auto a = generators(enc, p, povm);
    const UnitaryFunction u = [&](const ParamPoint& q) { return enc.unitary(q); };
    const auto f = generators(u, p, povm);
    for (std::size_t i = 0; i < m; ++i)
      EXPECT_LT(max_abs(CMatrix(a.generators[i].mat() - f.generators[i].mat())), 1e-7);
    for (std::size_t w = 0; w < 3; ++w)
      EXPECT_LT(max_abs(CMatrix(a.rotated_effects.effect(w).mat() - f.rotated_effects.effect(w).mat())),
                1e-14);
  }
}

TEST(Generators, RejectsNonUnitary) {
  const UnitaryFunction scaled = [](const ParamPoint& p) {
    return CMatrix((1.0 + 0.1 * p[0]) * CMatrix::Identity(2, 2));
  };
  const auto povm = Povm::projective(CMatrix::Identity(2, 2));
  EXPECT_EQ(code_of([&] { generators(scaled, {0.5}, povm); }), ErrorCode::kNonUnitary);
  EXPECT_EQ(code_of([&] { generators(scaled, {0.0}, povm); }), ErrorCode::kNonUnitary);
  EXPECT_EQ(code_of([] { check_unitary(CMatrix::Zero(2, 3)); }), ErrorCode::kNonUnitary);
}

TEST(AppendixG, QubitExample) {
  // |+> under exp(-i t sigma_z / 2) measured in the x basis
  CMatrix hadamard(2, 2);
  hadamard << 1, 1, 1, -1;
  hadamard /= std::sqrt(2.0);
  const auto povm = Povm::projective(hadamard);
  const auto enc = UnitaryEncoding::product({half_z()});
  for (double t : {0.3, 1.0, 2.0}) {
    const auto b = appendix_g_bundle(plus_state(), generators(enc, {t}, povm));
    EXPECT_NEAR(b.bundle.Q(0, 0).real(), 1.0, 1e-14);
    EXPECT_NEAR(b.bundle.C(0, 0).real(), 1.0, 1e-12);
    EXPECT_NEAR(b.bundle.F_C(0, 0), 1.0, 1e-12);
    EXPECT_NEAR(b.bundle.I(0, 0), 0.0, 1e-12);
    EXPECT_NEAR(b.probs(0), std::cos(t / 2) * std::cos(t / 2), 1e-14);
  }
}

TEST(AppendixG, CommutingGeneratorsHaveNoCurvature) {
  CMatrix z3 = CMatrix::Zero(3, 3);
  z3.diagonal() << 1, 0, -1;
  CMatrix z3b = CMatrix::Zero(3, 3);
  z3b.diagonal() << 0.5, 2, -1;
  const auto enc =
      UnitaryEncoding::product({HermitianMatrix(z3), HermitianMatrix(z3b)});
  fixtures::Random r(72);
  for (int t = 0; t < 20; ++t) {
    const auto b = appendix_g_bundle(r.pure(3), generators(enc, r.point(2), r.povm(3, 4)));
    EXPECT_LT(max_abs(b.bundle.G), 1e-12);
  }
}

TEST(AppendixG, MatchesStateRoute) {
  fixtures::Random r(73);
  for (int t = 0; t < 200; ++t) {
    const auto d = r.integer(2, 4);
    const auto m = static_cast<std::size_t>(r.integer(1, 3));
    const auto enc = r.encoding(d, m);
    const auto psi = r.pure(d);
    const auto povm = r.povm(d, r.integer(2, 5));
    const auto p = r.point(m);
    const auto g = appendix_g_bundle(psi, generators(enc, p, povm));
    const auto s = compute_bundle(families::unitary_encoding(enc, psi), p, povm);
    const double tol = 1e-9;
    EXPECT_LT(max_abs(CMatrix(g.bundle.Q - s.Q)), tol);
    EXPECT_LT(max_abs(RMatrix(g.bundle.G - s.G)), tol);
    EXPECT_LT(max_abs(CMatrix(g.bundle.C - s.C)), tol);
    EXPECT_LT(max_abs(RMatrix(g.bundle.F_C - s.F_C)), tol);
    EXPECT_LT(max_abs(RMatrix(g.bundle.I - s.I)), tol);
    EXPECT_LT(max_abs(RMatrix(g.bundle.D - s.D)), tol);
    EXPECT_LT(max_abs(RMatrix(g.bundle.Delta - s.Delta)), tol);
  }
}

TEST(AppendixG, NOperatorIsIdentityForRankOne) {
  fixtures::Random r(74);
  const auto enc = r.encoding(3, 2);
  const auto n = n_operator(r.pure(3), generators(enc, r.point(2), r.rank_one_povm(3, 5)));
  EXPECT_LT(max_abs(CMatrix(n.N.mat() - CMatrix::Identity(3, 3))), 1e-10);
  EXPECT_NEAR(n.probs.sum(), 1.0, 1e-12);
}

TEST(AppendixG, NullOutcomeRejected) {
  const auto enc = UnitaryEncoding::product({half_z()});
  CVector zero(2);
  zero << 1, 0;
  const auto gens = generators(enc, {0.4}, Povm::projective(CMatrix::Identity(2, 2)));
  EXPECT_EQ(code_of([&] { appendix_g_bundle(PureState(zero), gens); }),
            ErrorCode::kNullOutcomePresent);
  EXPECT_EQ(code_of([&] { two_copy_expectations(PureState(zero), gens); }),
            ErrorCode::kNullOutcomePresent);
}

TEST(HermitianSplit, Reconstructs) {
  fixtures::Random r(75);
  for (int t = 0; t < 20; ++t) {
    const CMatrix x = r.ginibre(3, 3);
    const auto s = hermitian_split(x);
    EXPECT_LT(max_abs(CMatrix((s.plus.mat() + kI * s.minus.mat()) / 2.0 - x)), 1e-14);
  }
}

TEST(HermitianSplit, IdentityOnRandomOperators) {
  fixtures::Random r(76);
  for (int t = 0; t < 100; ++t) {
    const auto d = r.integer(2, 4);
    const CVector psi = r.pure(d).vec();
    const CVector psi2 = kron(psi, psi);
    const auto s = hermitian_split_check(psi2, r.ginibre(d, d), r.ginibre(d, d));
    EXPECT_LT(s.residual(), 1e-10);
    EXPECT_LT(std::abs(s.x_plus.imag()), 1e-10);
    EXPECT_LT(std::abs(s.x_minus.imag()), 1e-10);
  }
}

TEST(HermitianSplit, HalfScaledPartsUnderestimateByFour) {
  // with A_+ = (A + A^dagger)/2, A_- = (A - A^dagger)/(2i) the same
  // combination recovers only a quarter of the two-copy expectation
  fixtures::Random r(77);
  const CVector psi = r.pure(3).vec();
  const CVector psi2 = kron(psi, psi);
  const CMatrix a = r.ginibre(3, 3), b = r.ginibre(3, 3);
  const auto full = hermitian_split_check(psi2, a, b);
  const auto sa = hermitian_split(a), sb = hermitian_split(b);
  const CMatrix half = (kron(CMatrix(sa.plus.mat() / 2.0), CMatrix(sb.plus.mat() / 2.0)) -
                        kron(CMatrix(sa.minus.mat() / 2.0), CMatrix(sb.minus.mat() / 2.0))) /
                       2.0;
  EXPECT_NEAR(std::abs(psi2.dot(half * psi2) * 4.0 - full.x_plus), 0.0, 1e-10);
  EXPECT_GT(std::abs(full.x_plus), 1e-3);
}

TEST(TwoCopy, ExpectationsMatchSingleCopy) {
  fixtures::Random r(78);
  for (int t = 0; t < 100; ++t) {
    const auto d = r.integer(2, 3);
    const auto m = static_cast<std::size_t>(r.integer(1, 3));
    const auto enc = r.encoding(d, m);
    const auto psi = r.pure(d);
    const auto gens = generators(enc, r.point(m), r.povm(d, r.integer(2, 4)));
    const auto rep = two_copy_expectations(psi, gens);
    EXPECT_TRUE(rep.holds()) << rep.k_residual << " " << rep.imag_residual << " "
                             << rep.split_residual;
    // the two-copy pieces reassemble the single-copy tensors
    const auto g = appendix_g_bundle(psi, gens);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m); ++i) {
      const double hi = expect(psi, gens.generators[static_cast<std::size_t>(i)].mat()).real();
      for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(m); ++j) {
        const double hj = expect(psi, gens.generators[static_cast<std::size_t>(j)].mat()).real();
        EXPECT_NEAR(rep.k_plus(i, j).real(), (g.bundle.F_C(i, j) + g.bundle.I(i, j)) / 2 + 2 * hi * hj,
                    1e-9);
        EXPECT_NEAR(rep.k_minus(i, j).real(), g.bundle.D(i, j) / 2, 1e-9);
      }
    }
  }
}

TEST(TwoCopy, AdjointIsSwapConjugate) {
  // K^dagger = S K S with S the swap of the two copies, so product states see
  // real expectations even though K itself is not Hermitian
  fixtures::Random r(79);
  const auto enc = r.encoding(3, 2);
  const auto psi = r.pure(3);
  const auto gens = generators(enc, r.point(2), r.povm(3, 3));
  const auto no = n_operator(psi, gens);
  const auto k = two_copy_operators(gens, no.probs, 0, 1);
  CMatrix swap = CMatrix::Zero(9, 9);
  for (Eigen::Index x = 0; x < 3; ++x)
    for (Eigen::Index y = 0; y < 3; ++y) swap(3 * y + x, 3 * x + y) = 1;
  EXPECT_LT(max_abs(CMatrix(k.K_plus.adjoint() - swap * k.K_plus * swap)), 1e-12);
  EXPECT_LT(max_abs(CMatrix(k.K_minus.adjoint() - swap * k.K_minus * swap)), 1e-12);
  EXPECT_GT(max_abs(CMatrix(k.K_plus.adjoint() - k.K_plus)), 1e-3);
}

TEST(TwoCopy, DimensionCap) {
  const auto enc = UnitaryEncoding::product({HermitianMatrix::identity(20)});
  CVector v = CVector::Zero(20);
  v(0) = 1;
  EXPECT_EQ(code_of([&] {
              two_copy_expectations(PureState(v),
                                    generators(enc, {0.1}, Povm({HermitianMatrix::identity(20)})));
            }),
            ErrorCode::kDimCap);
}
