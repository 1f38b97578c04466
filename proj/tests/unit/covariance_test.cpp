#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "lrmvdr/covariance.hpp"
#include "lrmvdr/error.hpp"
#include "oracles.hpp"

using namespace lrmvdr;

namespace {

Snapshot snap(std::initializer_list<Complex> v) {
  ComplexVector d(static_cast<Index>(v.size()));
  Index i = 0;
  for (auto z : v) d(i++) = z;
  return {d, 0};
}

Snapshot random_snap(std::mt19937_64& g, Index m, double scale = 1.0) {
  return {oracle::random_vector(g, m, scale), 0};
}

}  // namespace

TEST_CASE("sample covariance small cases") {
  const std::vector<Snapshot> one{snap({1.0, 0.0})};
  const auto r1 = sample_covariance(one);
  CHECK(r1(0, 0) == Complex(1.0));
  CHECK(r1(1, 1) == Complex(0.0));
  CHECK(r1(0, 1) == Complex(0.0));

  const std::vector<Snapshot> two{snap({1.0, 0.0}), snap({0.0, 1.0})};
  CHECK((sample_covariance(two).matrix() - 0.5 * ComplexMatrix::Identity(2, 2)).norm() == 0.0);

  CHECK_THROWS_AS(sample_covariance(std::vector<Snapshot>{}), InvalidArgument);
  const std::vector<Snapshot> mixed{snap({1.0, 0.0}), snap({1.0, 0.0, 0.0})};
  CHECK_THROWS_AS(sample_covariance(mixed), InvalidArgument);
}

TEST_CASE("sample covariance of white noise and its trace") {
  ScenarioConfig cfg;
  cfg.geometry = ArrayGeometry(8);
  cfg.target.power = 0.0;
  cfg.seed = 4;
  SignalGenerator gen(cfg);
  const auto w = gen.take(1000);
  const auto r = sample_covariance(w);
  for (Index i = 0; i < 8; ++i) CHECK(std::abs(r(i, i).real() - 1.0) < 0.15);
  double energy = 0.0;
  for (const auto& x : w) energy += x.data.squaredNorm();
  CHECK(r.matrix().trace().real() == doctest::Approx(energy / 1000.0).epsilon(1e-12));
}

TEST_CASE("recursive update edge cases and formula") {
  std::mt19937_64 g(1);
  const auto x = random_snap(g, 4);
  CovarianceState keep(HermitianMatrix::identity(4), 1.0, false);
  keep.recursive_update(x);
  CHECK((keep.covariance().matrix() - ComplexMatrix::Identity(4, 4)).norm() == 0.0);

  CovarianceState replace(HermitianMatrix::identity(2), 0.0, false);
  replace.recursive_update(snap({1.0, 0.0}));
  CHECK(replace.covariance()(0, 0) == Complex(1.0));
  CHECK(replace.covariance()(1, 1) == Complex(0.0));

  CovarianceState s(HermitianMatrix::identity(4), 0.99, false);
  s.recursive_update(x);
  const ComplexMatrix expect =
      0.99 * ComplexMatrix::Identity(4, 4) + 0.01 * x.data * x.data.adjoint();
  CHECK(oracle::rel_fro(s.covariance().matrix(), expect) < 1e-14);
  CHECK(s.covariance().matrix().trace().real() ==
        doctest::Approx(0.99 * 4 + 0.01 * x.data.squaredNorm()));
  CHECK(s.step() == 1);
  CHECK_THROWS_AS(s.recursive_update(random_snap(g, 3)), InvalidArgument);
  CHECK_THROWS_AS(CovarianceState(HermitianMatrix::identity(2), 1.5, false), InvalidArgument);
}

TEST_CASE("trace stays inside the convex hull") {
  std::mt19937_64 g(21);
  CovarianceState s(HermitianMatrix::identity(6), 0.9, false);
  double lo = 6.0, hi = 6.0;
  for (int i = 0; i < 300; ++i) {
    const auto x = random_snap(g, 6, 0.5 + (i % 7));
    lo = std::min(lo, x.data.squaredNorm());
    hi = std::max(hi, x.data.squaredNorm());
    s.recursive_update(x);
    const double tr = s.covariance().matrix().trace().real();
    CHECK(tr >= lo * (1 - 1e-12));
    CHECK(tr <= hi * (1 + 1e-12));
  }
}

TEST_CASE("Sherman-Morrison update") {
  CovarianceState zero(HermitianMatrix::identity(2), 0.5, true);
  zero.sm_inverse_update(snap({0.0, 0.0}));
  CHECK((zero.inverse().matrix() - 2.0 * ComplexMatrix::Identity(2, 2)).norm() == 0.0);

  std::mt19937_64 g(8);
  const auto x = random_snap(g, 4);
  CovarianceState s(HermitianMatrix::identity(4), 0.99, true);
  s.sm_inverse_update(x);
  CovarianceState direct(HermitianMatrix::identity(4), 0.99, false);
  direct.recursive_update(x);
  const auto oracle_inv = oracle::gauss_jordan_inverse(direct.covariance().matrix());
  CHECK(oracle::rel_fro(s.inverse().matrix(), oracle_inv) < 1e-9);
  CHECK((s.inverse().matrix() - s.inverse().matrix().adjoint()).norm() == 0.0);
}

TEST_CASE("Sherman-Morrison identity holds at every step on random PD starts") {
  std::mt19937_64 g(31);
  for (Index m : {3, 8, 16, 64}) {
    CovarianceState s(HermitianMatrix::symmetrize(oracle::random_hpd(g, m, 0.2)), 0.97, true);
    for (int i = 0; i < 40; ++i) {
      s.sm_inverse_update(random_snap(g, m));
      const ComplexMatrix resid =
          s.covariance().matrix() * s.inverse().matrix() - ComplexMatrix::Identity(m, m);
      CHECK(resid.norm() / std::sqrt(double(m)) < 1e-8);
      CHECK((s.inverse().matrix() - s.inverse().matrix().adjoint()).norm() == 0.0);
    }
  }
}

TEST_CASE("1000 sequential updates track direct inversion") {
  std::mt19937_64 g(77);
  CovarianceState s(HermitianMatrix::identity(16), 0.99, true);
  for (int i = 0; i < 1000; ++i) s.sm_inverse_update(random_snap(g, 16));
  const auto truth = oracle::gauss_jordan_inverse(s.covariance().matrix());
  CHECK(oracle::rel_fro(s.inverse().matrix(), truth) < 1e-6);
  CHECK(s.step() == 1000);
}

TEST_CASE("Sherman-Morrison error paths") {
  CovarianceState noinv(HermitianMatrix::identity(2), 0.9, false);
  CHECK_FALSE(noinv.has_inverse());
  CHECK_THROWS_AS(noinv.inverse(), InvalidArgument);
  CHECK_THROWS_AS(noinv.sm_inverse_update(snap({1.0, 0.0})), InvalidArgument);

  CovarianceState s(HermitianMatrix::identity(2), 0.9, true);
  CHECK_THROWS_AS(s.sm_inverse_update(snap({1.0, 0.0, 0.0})), InvalidArgument);

  // alpha + (1 - alpha) x^H R^-1 x with a vanishing alpha and x = 0
  CovarianceState tiny(HermitianMatrix::identity(2), 1e-13, true);
  CHECK_THROWS_AS(tiny.sm_inverse_update(snap({0.0, 0.0})), DegenerateUpdateError);
  CHECK(tiny.step() == 0);
  CHECK((tiny.inverse().matrix() - ComplexMatrix::Identity(2, 2)).norm() == 0.0);

  RealVector d(2);
  d << -1, 1;
  CHECK_THROWS_AS(CovarianceState(HermitianMatrix::diagonal(d), 0.5, true), SingularMatrixError);
}

TEST_CASE("recursive update drops a held inverse") {
  CovarianceState s(HermitianMatrix::identity(3), 0.9, true);
  CHECK(s.has_inverse());
  s.recursive_update(snap({1.0, 2.0, 3.0}));
  CHECK_FALSE(s.has_inverse());
}

TEST_CASE("sliding window equals the sample covariance of the trailing snapshots") {
  std::mt19937_64 g(9);
  std::vector<Snapshot> all;
  for (int i = 0; i < 300; ++i) all.push_back(random_snap(g, 5));
  SlidingWindowCovariance w(std::span<const Snapshot>(all.data(), 50));
  for (std::size_t i = 50; i < all.size(); ++i) w.push(all[i]);
  CHECK(w.size() == 50);
  const auto expect = sample_covariance(std::span<const Snapshot>(all.data() + 250, 50));
  CHECK(oracle::rel_fro(w.covariance().matrix(), expect.matrix()) < 1e-12);
  CHECK_THROWS_AS(SlidingWindowCovariance(std::span<const Snapshot>{}), InvalidArgument);
}

TEST_CASE("diagonal loading") {
  RealVector d(2);
  d << 1, 3;
  const auto r = HermitianMatrix::diagonal(d);
  CHECK((load_diagonal(r, 0.0).matrix() - r.matrix()).norm() == 0.0);
  const auto l = load_diagonal(r, 0.5);
  CHECK(l(0, 0).real() == doctest::Approx(2.0));
  CHECK(l(1, 1).real() == doctest::Approx(4.0));
  CHECK_THROWS_AS(load_diagonal(r, -1.0), InvalidArgument);
}
