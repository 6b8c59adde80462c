#include <gtest/gtest.h>

#include <numbers>

#include "scgt/bounds.hpp"
#include "support/random_instances.hpp"

using namespace scgt;
using fixtures::example_f;
using std::numbers::pi;

namespace {

TensorBundle example_bundle(double eps, double t) {
  return compute_bundle(families::bloch_qubit(), {t, 0.4}, Povm::depolarized_projective(2, eps));
}

/// One parameter, G = 0 and C = F_C = F_Q / 2.
TensorBundle half_fisher_bundle() {
  return compute_bundle(families::mixed_qubit_radial(0.0, 0.0), {0.0},
                        Povm::depolarized_projective(2, std::sqrt(0.5)));
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no scgt::Error thrown";
  return ErrorCode::kInvalidArgument;
}

/// rho = diag(0.6, 0.4, 0) with unitary derivatives and the computational basis.
struct NullQutrit {
  DensityMatrix rho;
  SldSet slds;
  Povm povm;
};

NullQutrit null_qutrit(fixtures::Random& r, std::size_t m) {
  CMatrix rho = CMatrix::Zero(3, 3);
  rho(0, 0) = 0.6;
  rho(1, 1) = 0.4;
  std::vector<HermitianMatrix> d;
  for (std::size_t i = 0; i < m; ++i) {
    const CMatrix h = r.hermitian(3).mat();
    d.push_back(HermitianMatrix::hermitian_part(CMatrix(-kI * (h * rho - rho * h))));
  }
  const DensityMatrix dm(rho);
  return {dm, compute_slds(dm, d), Povm::projective(CMatrix::Identity(3, 3))};
}

}  // namespace

TEST(Loewner, Examples) {
  RMatrix a(2, 2), b(2, 2);
  a << 1, 0, 0, 0;
  b << 1, 0, 0, 1;
  auto r = check_loewner(a, b);
  EXPECT_TRUE(r.holds);
  EXPECT_NEAR(r.min_eigenvalue, 0.0, 1e-15);
  r = check_loewner(b, a);
  EXPECT_FALSE(r.holds);
  EXPECT_NEAR(r.min_eigenvalue, -1.0, 1e-15);
  EXPECT_NEAR(std::abs(r.witness_z(1)), 1.0, 1e-15);
  EXPECT_THROW(check_loewner(a, RMatrix::Zero(3, 3)), Error);
}

TEST(Loewner, WitnessAttainsMinimum) {
  fixtures::Random r(51);
  for (int t = 0; t < 50; ++t) {
    const auto d = r.integer(2, 5);
    const CMatrix a = r.hermitian(d).mat(), b = r.hermitian(d).mat();
    const auto rep = check_loewner(a, b);
    const cplx q = (rep.witness_z.adjoint() * (b - a) * rep.witness_z)(0);
    EXPECT_NEAR(q.real(), rep.min_eigenvalue, 1e-10);
    EXPECT_NEAR(rep.witness_z.norm(), 1.0, 1e-12);
  }
}

TEST(Chain, ExampleHolds) {
  for (double eps : {0.0, 0.3, 1.0}) {
    const auto c = observation2_chain(example_bundle(eps, 1.1));
    EXPECT_TRUE(c.holds());
  }
}

TEST(TraceBound, ExampleClosedFormGap) {
  for (double eps : {0.2, 0.5, 0.9}) {
    for (double t : {0.4, 1.0, pi / 2, 2.5}) {
      const auto r = trace_bound(example_bundle(eps, t));
      const double f = example_f(eps, t), s = std::sin(t);
      EXPECT_NEAR(r.delta_trace_norm, 2 * (1 - f) * s, 1e-12);
      EXPECT_NEAR(r.gap, (1 - f) * (1 - s) * (1 - s), 1e-12);
      EXPECT_TRUE(r.holds);
    }
  }
  const auto eq = trace_bound(example_bundle(0.5, pi / 2));
  EXPECT_NEAR(eq.lhs, 2.0, 1e-14);
  EXPECT_NEAR(eq.rhs, 2.0, 1e-14);
}

TEST(ScalarBound, ExampleSaturatesWithFlatWeight) {
  for (double eps : {0.2, 0.5, 0.9}) {
    for (double t : {0.4, pi / 2, 2.5}) {
      const double f = example_f(eps, t);
      const auto r = scalar_bound(example_bundle(eps, t), CMatrix::Identity(2, 2) / 2.0);
      EXPECT_NEAR(r.lhs, f / 2, 1e-12);
      EXPECT_NEAR(r.gamma_W, 1 - f / 2, 1e-12);
      EXPECT_NEAR(r.residual, 0.0, 1e-12);
      EXPECT_TRUE(r.holds);
    }
  }
}

TEST(ScalarBound, RejectsBadWeightsAndSingularFQ) {
  const auto b = example_bundle(0.5, 1.0);
  EXPECT_EQ(code_of([&] { scalar_bound(b, CMatrix::Identity(2, 2)); }),
            ErrorCode::kInvalidArgument);
  CMatrix w = CMatrix::Zero(2, 2);
  w(0, 0) = 1;
  EXPECT_EQ(code_of([&] { scalar_bound(b, w); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { scalar_bound(b, CMatrix::Identity(3, 3) / 3.0); }),
            ErrorCode::kDimMismatch);
  const auto pole = compute_bundle(families::bloch_qubit(), {0.0, 0.0},
                                   Povm::depolarized_projective(2, 0.5));
  EXPECT_EQ(code_of([&] { scalar_bound(pole, CMatrix::Identity(2, 2) / 2.0); }),
            ErrorCode::kSingularFQ);
}

TEST(GillMassar, ExampleValues) {
  const double f = example_f(0.5, 1.0);
  const auto r = gill_massar_compare(example_bundle(0.5, 1.0), 2);
  EXPECT_NEAR(r.lhs, f, 1e-12);
  EXPECT_NEAR(r.gamma, 2 - f, 1e-12);
  EXPECT_NEAR(r.ours, f, 1e-12);
  EXPECT_EQ(r.gm, 1.0);
  EXPECT_TRUE(r.tighter);
  EXPECT_LE(r.lhs, r.ours + 1e-12);
}

TEST(RSandwich, ExampleValues) {
  for (double eps : {0.2, 0.5, 0.9}) {
    const double t = 1.2, f = example_f(eps, t);
    const auto r = r_sandwich(example_bundle(eps, t));
    EXPECT_NEAR(r.R, 1.0, 1e-12);
    EXPECT_NEAR(r.lower, 2 * f - 1, 1e-12);
    EXPECT_NEAR(r.upper, 1.0, 1e-12);
    EXPECT_TRUE(r.holds);
  }
}

TEST(RSandwich, AbsoluteLowerFormFailsWithoutCurvature) {
  const auto b = half_fisher_bundle();
  EXPECT_NEAR(b.F_Q(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(b.C(0, 0).real(), 0.5, 1e-12);
  const auto r = r_sandwich(b);
  EXPECT_NEAR(r.R, 0.0, 1e-15);
  EXPECT_NEAR(r.lower, -0.5, 1e-12);
  EXPECT_NEAR(r.lower_abs, 0.5, 1e-12);
  EXPECT_NEAR(r.upper, 0.5, 1e-12);
  EXPECT_TRUE(r.holds);
  EXPECT_FALSE(r.abs_lower_holds);
}

TEST(Bounds, HoldOnRandomInstances) {
  fixtures::Random r(52);
  int scalar_checked = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto d = r.integer(2, 4);
    const auto m = static_cast<std::size_t>(r.integer(1, 3));
    const auto inst = fixtures::random_mixed_instance(r, d, m, r.integer(2, 5));
    const auto b = compute_bundle(inst.rho, inst.drho, inst.povm);
    EXPECT_TRUE(observation2_chain(b).holds());
    EXPECT_TRUE(trace_bound(b).holds);
    try {
      const auto s = scalar_bound(b, r.weight(static_cast<Eigen::Index>(m)));
      EXPECT_TRUE(s.holds) << s.residual;
      EXPECT_TRUE(r_sandwich(b).holds);
      const auto gm = gill_massar_compare(b, d);
      EXPECT_LE(gm.lhs, gm.ours + 1e-9);
      EXPECT_GE(gm.gamma, -1e-9);
      EXPECT_LE(gm.gamma, static_cast<double>(m) + 1e-9);
      ++scalar_checked;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kSingularFQ);
    }
  }
  EXPECT_GT(scalar_checked, 900);
}

TEST(RankOne, Detection) {
  EXPECT_TRUE(is_rank_one(Povm::projective(CMatrix::Identity(2, 2))));
  EXPECT_FALSE(is_rank_one(Povm::depolarized_projective(2, 0.5)));
  fixtures::Random r(53);
  EXPECT_TRUE(is_rank_one(r.rank_one_povm(3, 5)));
  const auto povm = Povm::depolarized_projective(2, 0.5);
  EXPECT_EQ(code_of([&] { rank_one_vector(povm.effect(0), 0); }), ErrorCode::kNotRankOne);
}

TEST(SaturationRegular, PureStatesAlwaysSaturate) {
  fixtures::Random r(54);
  for (int t = 0; t < 50; ++t) {
    const auto d = r.integer(2, 4);
    const auto m = static_cast<std::size_t>(r.integer(1, 3));
    const auto fam = families::unitary_encoding(r.encoding(d, m), r.pure(d));
    const auto p = r.point(m);
    const auto jet = fam.pure_jet(p);
    const DensityMatrix rho(jet.psi);
    const auto rep = saturation_regular(rho, r.rank_one_povm(d, d + 2), sld_pure(jet.psi, jet.dpsi));
    EXPECT_TRUE(rep.satisfied);
    EXPECT_LT(rep.loewner_gap, 1e-9);
  }
}

TEST(SaturationRegular, DiagonalMixedQubit) {
  const auto fam = families::mixed_qubit_radial(0.0, 0.0);
  const auto rho = fam.state({0.5});
  const auto slds = compute_slds(rho, fam.state_derivatives({0.5}));
  const auto rep = saturation_regular(rho, Povm::projective(CMatrix::Identity(2, 2)), slds);
  EXPECT_TRUE(rep.satisfied);
  EXPECT_EQ(rep.outcomes_checked, 2u);
  EXPECT_LT(rep.loewner_gap, 1e-12);
}

TEST(SaturationRegular, ConditionMatchesLoewnerGap) {
  fixtures::Random r(55);
  int unsat = 0;
  for (int t = 0; t < 200; ++t) {
    const auto d = r.integer(2, 3);
    const auto m = static_cast<std::size_t>(r.integer(1, 2));
    const auto inst = fixtures::random_mixed_instance(r, d, m, 2);
    const auto povm = r.projective(d);
    const auto slds = compute_slds(inst.rho, inst.drho);
    const auto rep = saturation_regular(inst.rho, povm, slds);
    if (rep.satisfied) {
      EXPECT_LT(rep.loewner_gap, 1e-8);
    } else {
      ++unsat;
      EXPECT_GT(rep.loewner_gap, 1e-12);
    }
  }
  EXPECT_GT(unsat, 150);
}

TEST(SaturationRegular, RejectsNonRankOne) {
  const auto fam = families::bloch_qubit();
  const auto rho = fam.state({1.0, 0.0});
  const auto slds = compute_slds(rho, fam.state_derivatives({1.0, 0.0}));
  EXPECT_EQ(code_of([&] { saturation_regular(rho, Povm::depolarized_projective(2, 0.5), slds); }),
            ErrorCode::kNotRankOne);
}

TEST(SaturationNull, PureStateAtPole) {
  const auto fam = families::bloch_qubit();
  const auto rho = fam.state({pi, 0.3});
  const auto slds = compute_slds(rho, fam.state_derivatives({pi, 0.3}));
  const auto povm = Povm::projective(CMatrix::Identity(2, 2));
  const auto rep = saturation_null(rho, povm, {1}, slds);
  EXPECT_TRUE(rep.satisfied);
  EXPECT_LT(rep.loewner_gap, 1e-12);
  EXPECT_EQ(code_of([&] { saturation_null(rho, povm, {0}, slds); }), ErrorCode::kNotNull);
}

TEST(SaturationNull, MixedSupportBreaksIt) {
  fixtures::Random r(56);
  for (int t = 0; t < 20; ++t) {
    const auto q = null_qutrit(r, 2);
    const auto rep = saturation_null(q.rho, q.povm, {2}, q.slds);
    EXPECT_FALSE(rep.satisfied);
    EXPECT_GT(rep.loewner_gap, 1e-6);
  }
  // one parameter: the antisymmetric condition is trivially zero
  const auto q = null_qutrit(r, 1);
  const auto rep = saturation_null(q.rho, q.povm, {2}, q.slds);
  EXPECT_TRUE(rep.satisfied);
  EXPECT_LT(rep.loewner_gap, 1e-12);
}

TEST(IZero, ExampleProjective) {
  const auto fam = families::bloch_qubit();
  const ParamPoint p{1.0, 0.2};
  const auto rho = fam.state(p);
  const auto slds = compute_slds(rho, fam.state_derivatives(p));
  const auto rep = izero_conditions(rho, Povm::projective(CMatrix::Identity(2, 2)), slds);
  EXPECT_FALSE(rep.satisfied);
  EXPECT_NEAR(rep.I_max, std::sin(1.0) * std::sin(1.0), 1e-12);

  const auto radial = families::mixed_qubit_radial(0.0, 0.0);
  const auto rr = radial.state({0.3});
  const auto rep2 = izero_conditions(rr, Povm::projective(CMatrix::Identity(2, 2)),
                                     compute_slds(rr, radial.state_derivatives({0.3})));
  EXPECT_TRUE(rep2.satisfied);
  EXPECT_LT(rep2.I_max, 1e-15);
}

TEST(IZero, RegularResidualControlsI) {
  // I_ii = sum_w |<pi|[L_i, rho]|pi>|^2 / (4 p_w) over regular rank-one outcomes
  fixtures::Random r(57);
  for (int t = 0; t < 100; ++t) {
    const auto d = r.integer(2, 4);
    const auto m = static_cast<std::size_t>(r.integer(1, 3));
    const auto inst = fixtures::random_mixed_instance(r, d, m, 2);
    const auto povm = r.rank_one_povm(d, d + r.integer(0, 2));
    const auto slds = compute_slds(inst.rho, inst.drho);
    const auto b = compute_bundle(inst.rho, slds, povm);
    const auto probs = born_probabilities(inst.rho, povm).probs;
    for (std::size_t i = 0; i < m; ++i) {
      double expect = 0.0;
      for (std::size_t w = 0; w < povm.size(); ++w) {
        const CVector v = rank_one_vector(povm.effect(w), w);
        const CMatrix& l = slds[i].mat();
        const cplx c = (v.adjoint() * (l * inst.rho.mat() - inst.rho.mat() * l) * v)(0);
        expect += std::norm(c) / (4 * probs(static_cast<Eigen::Index>(w)));
      }
      EXPECT_NEAR(b.I(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)), expect, 1e-8);
    }
    const auto rep = izero_conditions(inst.rho, povm, slds);
    if (rep.satisfied) EXPECT_LT(rep.I_max, 1e-8);
  }
}

TEST(IZero, NullResidual) {
  fixtures::Random r(58);
  const auto q = null_qutrit(r, 2);
  const auto rep = izero_conditions(q.rho, q.povm, q.slds);
  EXPECT_GT(rep.null_residual, 1e-6);
  EXPECT_FALSE(rep.satisfied);
}
