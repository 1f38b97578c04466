#include <cmath>
#include <vector>

#include "doctest.h"
#include "lrmvdr/covariance.hpp"
#include "lrmvdr/error.hpp"
#include "lrmvdr/lowrank.hpp"
#include "oracles.hpp"

using namespace lrmvdr;

namespace {

ComplexMatrix random_basis(std::mt19937_64& g, Index m, Index k) {
  ComplexMatrix a(m, k);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < k; ++j) a(i, j) = oracle::cnormal(g);
  Eigen::HouseholderQR<ComplexMatrix> qr(a);
  return qr.householderQ() * ComplexMatrix::Identity(m, k);
}

LowRankState random_state(std::mt19937_64& g, Index m, Index k, double alpha) {
  return LowRankState(random_basis(g, m, k),
                      HermitianMatrix::symmetrize(oracle::random_hpd(g, k, 0.3)), alpha);
}

ScenarioConfig one_source(double doa, double drift, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.geometry = ArrayGeometry(16);
  cfg.target = {doa, drift, Waveform::ComplexGaussian, 1.0};
  cfg.seed = seed;
  return cfg;
}

double min_eig(const ComplexMatrix& c) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(c);
  return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("initialize from a diagonal covariance") {
  RealVector d(3);
  d << 4, 2, 1;
  const auto s = LowRankState::initialize(HermitianMatrix::diagonal(d), 2, 0.99);
  CHECK(s.rank() == 2);
  CHECK(s.dimension() == 3);
  CHECK(std::abs(s.basis()(0, 0) - 1.0) < 1e-12);
  CHECK(std::abs(s.basis()(1, 1) - 1.0) < 1e-12);
  CHECK(std::abs(s.core_inverse()(0, 0) - 0.25) < 1e-12);
  CHECK(std::abs(s.core_inverse()(1, 1) - 0.5) < 1e-12);
  CHECK(std::abs(s.core_inverse()(0, 1)) == 0.0);
  CHECK(s.initial_eigenvalues()(0) == doctest::Approx(4.0));

  const auto r = s.reconstruct_inverse().matrix();
  CHECK(std::abs(r(0, 0) - 0.25) < 1e-12);
  CHECK(std::abs(r(1, 1) - 0.5) < 1e-12);
  CHECK(std::abs(r(2, 2)) < 1e-12);

  const auto full = LowRankState::initialize(HermitianMatrix::diagonal(d), 3, 0.99);
  CHECK(oracle::rel_fro(full.reconstruct_inverse().matrix(),
                        oracle::gauss_jordan_inverse(HermitianMatrix::diagonal(d).matrix())) < 1e-12);
}

TEST_CASE("initialize from identity gives an identity core") {
  const auto s = LowRankState::initialize(HermitianMatrix::identity(7), 3, 0.9);
  CHECK((s.core_inverse() - ComplexMatrix::Identity(3, 3)).norm() < 1e-12);
  CHECK((s.basis().adjoint() * s.basis() - ComplexMatrix::Identity(3, 3)).norm() < 1e-10);
}

TEST_CASE("reconstruction has rank K") {
  std::mt19937_64 g(4);
  const auto s = random_state(g, 9, 3, 0.99);
  Eigen::JacobiSVD<ComplexMatrix> svd(s.reconstruct_inverse().matrix());
  const auto sv = svd.singularValues();
  CHECK(sv(2) > 1e-6 * sv(0));
  CHECK(sv(3) < 1e-12 * sv(0));
}

TEST_CASE("leading eigenvector aligns with the source steering") {
  const auto cfg = one_source(12.0, 0.0, 3);
  SignalGenerator gen(cfg);
  const auto w = gen.take(1000);
  const auto s = LowRankState::initialize(sample_covariance(w), 2, 0.99);
  // oracle: full eigendecomposition of the analytic covariance
  const auto ref = oracle::jacobi_eig(analytic_covariance(cfg, 0).dense().matrix());
  const oracle::Vec a = oracle::ula_steering(16, 12.0) / 4.0;
  CHECK(std::abs(ref.vectors.col(0).dot(a)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(s.basis().col(0).dot(a)) > 0.99);
}

TEST_CASE("update with x orthogonal to the basis scales the core by 1/alpha") {
  ComplexMatrix u = ComplexMatrix::Zero(4, 2);
  u(0, 0) = 1.0;
  u(1, 1) = 1.0;
  std::mt19937_64 g(2);
  const ComplexMatrix c0 = oracle::random_hpd(g, 2);
  LowRankState s(u, HermitianMatrix::symmetrize(c0), 0.9);
  const ComplexMatrix before = s.core_inverse();
  ComplexVector x = ComplexVector::Zero(4);
  x(2) = Complex(3, 1);
  x(3) = -2.0;
  s.update({x, 0});
  CHECK((s.core_inverse() - before / 0.9).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(s.step() == 1);
}

TEST_CASE("single update matches the K x K direct-inversion oracle") {
  std::mt19937_64 g(6);
  for (int rep = 0; rep < 20; ++rep) {
    auto s = random_state(g, 12, 4, 0.99);
    const ComplexMatrix c = s.core_inverse();
    const ComplexVector x = oracle::random_vector(g, 12);
    const ComplexVector xt = s.basis().adjoint() * x;
    const ComplexMatrix d =
        0.99 * oracle::gauss_jordan_inverse(c) + 0.01 * xt * xt.adjoint();
    s.update({x, 0});
    CHECK(oracle::rel_fro(s.core_inverse(), oracle::gauss_jordan_inverse(d)) < 1e-9);
    CHECK((s.core_inverse() - s.core_inverse().adjoint()).norm() == 0.0);
  }
}

TEST_CASE("10^4 updates follow the explicitly inverted projected recursion") {
  const auto cfg = [] {
    ScenarioConfig c;
    c.geometry = ArrayGeometry(100);
    c.target = {5.0, 0.0, Waveform::LinearChirp, std::nullopt};
    c.interferers = {{-20.0, 0.0, Waveform::ComplexGaussian, std::nullopt}};
    c.seed = 14;
    return c;
  }();
  SignalGenerator gen(cfg);
  const auto init = gen.take(1000);
  auto s = LowRankState::initialize(sample_covariance(init), 10, 0.99);
  ComplexMatrix d = s.initial_eigenvalues().cast<Complex>().asDiagonal();
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto x = gen.next();
    s.update(x);
    const ComplexVector xt = s.basis().adjoint() * x.data;
    d = 0.99 * d + 0.01 * xt * xt.adjoint();
    if (i % 500 == 499) {
      const ComplexMatrix truth = s.basis() * oracle::gauss_jordan_inverse(d) * s.basis().adjoint();
      worst = std::max(worst, oracle::rel_fro(s.reconstruct_inverse().matrix(), truth));
      CHECK(min_eig(s.core_inverse()) > 0.0);
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("full-rank identity basis reproduces the exact Sherman-Morrison path") {
  std::mt19937_64 g(10);
  const Index m = 8;
  const ComplexMatrix r0 = oracle::random_hpd(g, m);
  CovarianceState exact(HermitianMatrix::symmetrize(r0), 0.95, true);
  LowRankState low(ComplexMatrix::Identity(m, m), exact.inverse(), 0.95);
  for (int i = 0; i < 500; ++i) {
    const Snapshot x{oracle::random_vector(g, m), i};
    exact.sm_inverse_update(x);
    low.update(x);
  }
  CHECK(oracle::rel_fro(low.reconstruct_inverse().matrix(), exact.inverse().matrix()) < 1e-6);
}

TEST_CASE("core stays positive definite over 10^5 updates") {
  std::mt19937_64 g(12);
  auto s = random_state(g, 20, 5, 0.99);
  for (int i = 0; i < 100000; ++i) {
    s.update({oracle::random_vector(g, 20), i});
    if (i % 10000 == 0) CHECK(min_eig(s.core_inverse()) > 0.0);
  }
  CHECK(min_eig(s.core_inverse()) > 0.0);
}

TEST_CASE("reinitialize on a frozen scenario keeps the subspace") {
  auto cfg = one_source(-8.0, 0.0, 5);
  cfg.interferers = {{20.0, 0.0, Waveform::ComplexGaussian, 2.0}};
  SignalGenerator gen(cfg);
  const auto w = gen.take(1000);
  auto s = LowRankState::initialize(sample_covariance(w), 2, 0.99);
  const ComplexMatrix before = s.basis() * s.basis().adjoint();
  for (int i = 0; i < 100; ++i) s.update(gen.next());
  const auto steps = s.step();
  s.reinitialize(w, 2);
  CHECK(s.step() == steps);
  CHECK(s.reinitializations() == 1);
  CHECK((s.basis() * s.basis().adjoint() - before).norm() < 0.1);
}

TEST_CASE("reinitialize after drift realigns with the new DoA") {
  const auto cfg = one_source(0.0, 1.0, 8);  // 1 deg per block
  SignalGenerator gen(cfg);
  auto s = LowRankState::initialize(sample_covariance(gen.take(1000)), 2, 0.99);
  const auto recent = gen.take(1000);  // block 1 at 1 deg
  const oracle::Vec a_new = oracle::ula_steering(16, 1.0) / 4.0;
  const double stale = std::abs(s.basis().col(0).dot(a_new));
  s.reinitialize(recent, 2);
  const double fresh = std::abs(s.basis().col(0).dot(a_new));
  CHECK(fresh > 0.99);
  CHECK(fresh > stale);
}

TEST_CASE("low-rank error paths") {
  std::mt19937_64 g(1);
  auto s = random_state(g, 6, 3, 0.9);
  CHECK_THROWS_AS(s.reinitialize(std::vector<Snapshot>(2, Snapshot{ComplexVector::Ones(6), 0}), 3),
                  InvalidArgument);
  CHECK_THROWS_AS(s.update({ComplexVector::Ones(5), 0}), InvalidArgument);

  ComplexMatrix notortho = ComplexMatrix::Identity(4, 2);
  notortho(0, 1) = 0.5;
  CHECK_THROWS_AS(LowRankState(notortho, HermitianMatrix::identity(2), 0.9), InvalidArgument);
  CHECK_THROWS_AS(LowRankState(ComplexMatrix::Identity(4, 2), HermitianMatrix::identity(3), 0.9),
                  InvalidArgument);

  RealVector d(3);
  d << 1, 1, 0;
  CHECK_THROWS_AS(LowRankState::initialize(HermitianMatrix::diagonal(d), 3, 0.9), NumericalError);
  CHECK_THROWS_AS(LowRankState::initialize(HermitianMatrix::identity(3), 4, 0.9), InvalidArgument);

  // a vanishing alpha with x in the null of the core drives the denominator to zero
  LowRankState tiny(ComplexMatrix::Identity(3, 2), HermitianMatrix::identity(2), 1e-13);
  ComplexVector x = ComplexVector::Zero(3);
  x(2) = 1.0;
  CHECK_THROWS_AS(tiny.update({x, 0}), DegenerateUpdateError);
  CHECK(tiny.step() == 0);
}
