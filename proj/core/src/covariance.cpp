#include "lrmvdr/covariance.hpp"

#include <cmath>

#include <fmt/format.h>

#include "lrmvdr/error.hpp"

namespace lrmvdr {

namespace {

constexpr double kMinDenominator = 1e-12;

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidArgument(fmt::format("forgetting factor {} outside [0, 1]", alpha));
  }
}

void check_length(const Snapshot& x, Index m) {
  if (x.data.size() != m) {
    throw InvalidArgument(
        fmt::format("snapshot length {} does not match dimension {}", x.data.size(), m));
  }
}

}  // namespace

HermitianMatrix sample_covariance(std::span<const Snapshot> window) {
  if (window.empty()) throw InvalidArgument("sample covariance of an empty window");
  const Index m = window.front().data.size();
  ComplexMatrix sum = ComplexMatrix::Zero(m, m);
  for (const auto& x : window) {
    check_length(x, m);
    add_outer(sum, 1.0, x.data);
  }
  sum /= static_cast<double>(window.size());
  return HermitianMatrix::symmetrize(sum);
}

HermitianMatrix load_diagonal(const HermitianMatrix& r, double loading) {
  if (loading == 0.0) return r;
  if (loading < 0.0) throw InvalidArgument("diagonal loading must be >= 0");
  const double level = loading * r.matrix().trace().real() / static_cast<double>(r.size());
  ComplexMatrix loaded = r.matrix();
  loaded.diagonal().array() += level;
  return HermitianMatrix::symmetrize(loaded);
}

CovarianceState::CovarianceState(HermitianMatrix r, double alpha, bool track_inverse)
    : r_(std::move(r)), alpha_(alpha), scratch_(r_.size()) {
  check_alpha(alpha);
  if (track_inverse) rinv_ = invert_hermitian(r_);
}

CovarianceState CovarianceState::from_window(std::span<const Snapshot> window, double alpha,
                                             bool track_inverse) {
  return CovarianceState(sample_covariance(window), alpha, track_inverse);
}

const HermitianMatrix& CovarianceState::inverse() const {
  if (!rinv_) throw InvalidArgument("covariance state does not hold an inverse");
  return *rinv_;
}

void CovarianceState::recursive_update(const Snapshot& x) {
  check_length(x, r_.size());
  ComplexMatrix next = alpha_ * r_.matrix();
  add_outer(next, 1.0 - alpha_, x.data);
  r_ = HermitianMatrix::symmetrize(next);
  rinv_.reset();
  ++step_;
}

void CovarianceState::sm_inverse_update(const Snapshot& x) {
  if (!rinv_) throw InvalidArgument("sm_inverse_update needs a held inverse");
  check_length(x, r_.size());
  if (!(alpha_ > 0.0)) throw InvalidArgument("Sherman-Morrison update needs alpha > 0");
  const ComplexMatrix& p = rinv_->matrix();
  scratch_.noalias() = p * x.data;
  const double quad = x.data.dot(scratch_).real();
  const double denom = alpha_ + (1.0 - alpha_) * quad;
  if (!(denom > kMinDenominator) || !std::isfinite(denom)) {
    throw DegenerateUpdateError(
        fmt::format("Sherman-Morrison denominator {:.3e} collapsed; reinitialize", denom));
  }
  ComplexMatrix next = p / alpha_;
  add_outer(next, -(1.0 - alpha_) / (alpha_ * denom), scratch_);
  rinv_ = HermitianMatrix::symmetrize(next);

  ComplexMatrix r_next = alpha_ * r_.matrix();
  add_outer(r_next, 1.0 - alpha_, x.data);
  r_ = HermitianMatrix::symmetrize(r_next);
  ++step_;
}

SlidingWindowCovariance::SlidingWindowCovariance(std::span<const Snapshot> initial) {
  if (initial.empty()) throw InvalidArgument("sliding window needs at least one snapshot");
  const Index m = initial.front().data.size();
  sum_ = ComplexMatrix::Zero(m, m);
  for (const auto& x : initial) {
    check_length(x, m);
    add_outer(sum_, 1.0, x.data);
    window_.push_back(x);
  }
}

void SlidingWindowCovariance::push(const Snapshot& x) {
  check_length(x, sum_.rows());
  const Snapshot& oldest = window_.front();
  add_outer(sum_, -1.0, oldest.data);
  add_outer(sum_, 1.0, x.data);
  window_.pop_front();
  window_.push_back(x);
}

HermitianMatrix SlidingWindowCovariance::covariance() const {
  return HermitianMatrix::symmetrize(sum_ / static_cast<double>(window_.size()));
}

}  // namespace lrmvdr
