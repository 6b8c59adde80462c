#include <gtest/gtest.h>

#include <numbers>

#include "scgt/sld.hpp"
#include "support/random_instances.hpp"

using namespace scgt;
using std::numbers::pi;

namespace {

DensityMatrix diag_state(double r) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = (1 + r) / 2;
  m(1, 1) = (1 - r) / 2;
  return DensityMatrix(m);
}

double reconstruction_error(const DensityMatrix& rho, const HermitianMatrix& l,
                            const HermitianMatrix& d) {
  return max_abs(CMatrix((l.mat() * rho.mat() + rho.mat() * l.mat()) / 2.0 - d.mat()));
}

}  // namespace

TEST(SldMixed, DiagonalQubit) {
  const HermitianMatrix d(CMatrix(pauli::z() / 2.0));
  auto s = sld_mixed(diag_state(0.5), {d});
  EXPECT_NEAR(s[0](0, 0).real(), 2.0 / 3.0, 1e-14);
  EXPECT_NEAR(s[0](1, 1).real(), -2.0, 1e-14);
  EXPECT_NEAR(std::abs(s[0](0, 1)), 0.0, 1e-14);

  s = sld_mixed(diag_state(0.0), {d});
  EXPECT_LT(max_abs(CMatrix(s[0].mat() - pauli::z())), 1e-14);
  EXPECT_EQ(s.kernel_pairs_dropped, 0);
}

TEST(SldMixed, MaximallyMixedZeroDerivative) {
  const DensityMatrix rho(CMatrix(CMatrix::Identity(3, 3) / 3.0));
  const auto s = sld_mixed(rho, {HermitianMatrix::zero(3)});
  EXPECT_LT(max_abs(s[0].mat()), 1e-15);
}

TEST(SldMixed, KernelToKernelDerivativeRejected) {
  // rho = |0><0| in a qutrit; d rho with weight on the |1>,|2> block
  CMatrix rho = CMatrix::Zero(3, 3);
  rho(0, 0) = 1;
  CMatrix d = CMatrix::Zero(3, 3);
  d(1, 1) = 0.5;
  d(2, 2) = -0.5;
  try {
    sld_mixed(DensityMatrix(rho), {HermitianMatrix(d)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInconsistentDerivative);
  }
}

TEST(SldMixed, DimMismatch) {
  EXPECT_THROW(sld_mixed(diag_state(0.2), {HermitianMatrix::zero(3)}), Error);
}

TEST(SldMixed, ReconstructionAndZeroMean) {
  fixtures::Random r(31);
  for (int t = 0; t < 200; ++t) {
    const auto d = r.integer(2, 6);
    const auto m = static_cast<std::size_t>(r.integer(1, 4));
    const auto rho = r.density(d, d);
    std::vector<HermitianMatrix> drho;
    for (std::size_t i = 0; i < m; ++i) drho.push_back(r.traceless_hermitian(d));
    const auto s = sld_mixed(rho, drho);
    ASSERT_EQ(s.size(), m);
    for (std::size_t i = 0; i < m; ++i) {
      EXPECT_LT(reconstruction_error(rho, s[i], drho[i]), 1e-9 * (1 + max_abs(s[i].mat())));
      EXPECT_LT(std::abs((rho.mat() * s[i].mat()).trace()), 1e-9);
    }
  }
}

TEST(SldMixed, RankDeficientReconstructionOnSupport) {
  fixtures::Random r(32);
  for (int t = 0; t < 100; ++t) {
    const auto d = r.integer(3, 5);
    const auto rho = r.density(d, r.integer(1, d - 1));
    const CMatrix h = r.hermitian(d).mat();
    const HermitianMatrix drho =
        HermitianMatrix::hermitian_part(CMatrix(-kI * (h * rho.mat() - rho.mat() * h)));
    const auto s = sld_mixed(rho, {drho});
    EXPECT_GT(s.kernel_pairs_dropped, 0);
    EXPECT_LT(reconstruction_error(rho, s[0], drho), 1e-9);
  }
}

TEST(SldPure, BlochAtEquator) {
  const auto jet = families::bloch_qubit().pure_jet({pi / 2, 0.0});
  const auto s = sld_pure(jet.psi, jet.dpsi);
  EXPECT_LT(max_abs(CMatrix(s[0].mat() - pauli::z())), 1e-14);
}

TEST(SldPure, ZeroDerivative) {
  fixtures::Random r(33);
  const auto psi = r.pure(3);
  const auto s = sld_pure(psi, {CVector::Zero(3)});
  EXPECT_LT(max_abs(s[0].mat()), 1e-15);
}

TEST(SldPure, AgreesWithMixedPathOnProjector) {
  fixtures::Random r(34);
  for (int t = 0; t < 100; ++t) {
    const auto d = r.integer(2, 3);
    const auto m = static_cast<std::size_t>(r.integer(1, 3));
    const auto fam = families::unitary_encoding(r.encoding(d, m), r.pure(d));
    const auto p = r.point(m);
    const auto jp = fam.pure_jet(p);
    const auto a = sld_pure(jp.psi, jp.dpsi);
    const auto b = sld_mixed(DensityMatrix(jp.psi), fam.state_derivatives(p));
    const CMatrix proj = jp.psi.projector();
    for (std::size_t i = 0; i < m; ++i) {
      // The SLD is unique only up to the kernel block; both agree on
      // everything that touches the support.
      const CMatrix diff = a[i].mat() - b[i].mat();
      EXPECT_LT(max_abs(CMatrix(proj * diff)), 1e-9);
      EXPECT_LT(max_abs(CMatrix(diff * proj)), 1e-9);
    }
  }
}

TEST(ComputeSlds, RoutesPureInputs) {
  const auto fam = families::bloch_qubit();
  const ParamPoint p{1.1, 0.4};
  const auto s = compute_slds(fam.state(p), fam.state_derivatives(p));
  const auto jet = fam.pure_jet(p);
  const auto ref = sld_pure(jet.psi, jet.dpsi);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_LT(max_abs(CMatrix(s[i].mat() - ref[i].mat())), 1e-9);
  EXPECT_LT(max_abs(CMatrix(s.support_projector.mat() - jet.psi.projector())), 1e-12);
}
