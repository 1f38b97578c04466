#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>

#include "lrmvdr/linalg.hpp"
#include "lrmvdr/signal.hpp"

namespace lrmvdr {

/// (1/m) sum_i x_i x_i^H over the window.
HermitianMatrix sample_covariance(std::span<const Snapshot> window);

/// R + loading * (trace(R)/M) * I. A zero factor returns R unchanged.
HermitianMatrix load_diagonal(const HermitianMatrix& r, double loading);

/// Exponentially weighted covariance R <- alpha R + (1 - alpha) x x^H, with an
/// optional inverse kept in step by Sherman-Morrison.
///
/// `recursive_update` advances R only and drops any held inverse;
/// `sm_inverse_update` advances both in O(M^2). After every inverse update the
/// inverse is re-symmetrized, so it is exactly Hermitian at all times.
class CovarianceState {
 public:
  CovarianceState(HermitianMatrix r, double alpha, bool track_inverse);

  static CovarianceState from_window(std::span<const Snapshot> window, double alpha,
                                     bool track_inverse);

  void recursive_update(const Snapshot& x);
  /// Throws DegenerateUpdateError (state unchanged) when
  /// alpha + (1 - alpha) x^H R^-1 x <= 1e-12.
  void sm_inverse_update(const Snapshot& x);

  const HermitianMatrix& covariance() const noexcept { return r_; }
  bool has_inverse() const noexcept { return rinv_.has_value(); }
  const HermitianMatrix& inverse() const;
  double alpha() const noexcept { return alpha_; }
  std::int64_t step() const noexcept { return step_; }
  Index dimension() const noexcept { return r_.size(); }

 private:
  HermitianMatrix r_;
  std::optional<HermitianMatrix> rinv_;
  double alpha_;
  std::int64_t step_ = 0;
  ComplexVector scratch_;
};

/// Sliding-window sample covariance over the most recent m snapshots,
/// maintained by adding the newest and removing the oldest outer product.
/// This is the conventional baseline: O(M^2) per push.
class SlidingWindowCovariance {
 public:
  explicit SlidingWindowCovariance(std::span<const Snapshot> initial);

  void push(const Snapshot& x);
  HermitianMatrix covariance() const;
  std::size_t size() const noexcept { return window_.size(); }
  const std::deque<Snapshot>& snapshots() const noexcept { return window_; }

 private:
  std::deque<Snapshot> window_;
  ComplexMatrix sum_;
};

}  // namespace lrmvdr
