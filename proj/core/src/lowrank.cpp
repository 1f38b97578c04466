#include "lrmvdr/lowrank.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "lrmvdr/covariance.hpp"
#include "lrmvdr/error.hpp"

namespace lrmvdr {

namespace {

constexpr double kOrthonormalTolerance = 1e-10;
constexpr double kMinDenominator = 1e-12;
constexpr double kRankDeficiency = 1e-12;

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw InvalidArgument(fmt::format("forgetting factor {} outside (0, 1]", alpha));
  }
}

}  // namespace

LowRankState::LowRankState(ComplexMatrix basis, HermitianMatrix core_inverse, double alpha)
    : basis_(std::move(basis)), core_inv_(core_inverse.matrix()), alpha_(alpha) {
  check_alpha(alpha);
  const Index k = basis_.cols();
  if (k < 1 || k > basis_.rows()) {
    throw InvalidArgument(fmt::format("basis must be M x K with 1 <= K <= M, got {}x{}",
                                      basis_.rows(), k));
  }
  if (core_inv_.rows() != k) {
    throw InvalidArgument(fmt::format("core is {}x{}, basis has {} columns", core_inv_.rows(),
                                      core_inv_.cols(), k));
  }
  const ComplexMatrix gram = basis_.adjoint() * basis_;
  const double err = (gram - ComplexMatrix::Identity(k, k)).cwiseAbs().maxCoeff();
  if (!(err <= kOrthonormalTolerance)) {
    throw InvalidArgument(fmt::format("basis columns not orthonormal (error {:.3e})", err));
  }
  eigenvalues_ = RealVector::Constant(k, std::numeric_limits<double>::quiet_NaN());
  allocate_scratch();
}

LowRankState LowRankState::initialize(const HermitianMatrix& r, Index rank, double alpha) {
  check_alpha(alpha);
  LowRankState s;
  s.alpha_ = alpha;
  s.adopt(hermitian_eig(r, rank));
  return s;
}

void LowRankState::adopt(const EigenPair& eig) {
  const Index k = eig.values.size();
  const double lead = eig.values(0);
  const double last = eig.values(k - 1);
  if (!(lead > 0.0) || !(last > kRankDeficiency * lead)) {
    throw NumericalError(fmt::format(
        "covariance is rank deficient at K={} (lambda_K={:.3e}, lambda_1={:.3e})", k, last,
        lead));
  }
  basis_ = eig.basis;
  eigenvalues_ = eig.values;
  core_inv_ = eig.values.cwiseInverse().cast<Complex>().asDiagonal().toDenseMatrix();
  allocate_scratch();
}

void LowRankState::allocate_scratch() {
  projected_.resize(basis_.cols());
  gain_.resize(basis_.cols());
}

void LowRankState::update(const Snapshot& x) {
  if (x.data.size() != basis_.rows()) {
    throw InvalidArgument(fmt::format("snapshot length {} does not match dimension {}",
                                      x.data.size(), basis_.rows()));
  }
  projected_.noalias() = basis_.adjoint() * x.data;  // O(MK)
  gain_.noalias() = core_inv_ * projected_;          // O(K^2)
  const double quad = projected_.dot(gain_).real();
  const double denom = alpha_ + (1.0 - alpha_) * quad;
  if (!(denom > kMinDenominator) || !std::isfinite(denom)) {
    throw DegenerateUpdateError(
        fmt::format("low-rank denominator {:.3e} collapsed; reinitialize", denom));
  }
  const double scale = (1.0 - alpha_) / (alpha_ * denom);
  const double inv_alpha = 1.0 / alpha_;
  const Index k = core_inv_.rows();
  // C <- C / alpha - scale * g g^H, written directly into a Hermitian layout.
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i < j; ++i) {
      const Complex upper = core_inv_(i, j) * inv_alpha - scale * gain_(i) * std::conj(gain_(j));
      const Complex lower = core_inv_(j, i) * inv_alpha - scale * gain_(j) * std::conj(gain_(i));
      const Complex avg = 0.5 * (upper + std::conj(lower));
      core_inv_(i, j) = avg;
      core_inv_(j, i) = std::conj(avg);
    }
    core_inv_(j, j) = Complex(core_inv_(j, j).real() * inv_alpha - scale * std::norm(gain_(j)), 0.0);
  }
  ++step_;
}

void LowRankState::reinitialize(std::span<const Snapshot> recent, Index rank) {
  if (rank < 1) throw InvalidArgument("rank must be >= 1");
  if (static_cast<Index>(recent.size()) < rank) {
    throw InvalidArgument(fmt::format("reinitialization window has {} snapshots, need >= K={}",
                                      recent.size(), rank));
  }
  adopt(hermitian_eig(sample_covariance(recent), rank));
  ++reinits_;
}

HermitianMatrix LowRankState::reconstruct_inverse() const {
  return HermitianMatrix::symmetrize(basis_ * core_inv_ * basis_.adjoint());
}

}  // namespace lrmvdr
