#pragma once

#include <cstdint>
#include <span>

#include "lrmvdr/linalg.hpp"
#include "lrmvdr/signal.hpp"

namespace lrmvdr {

/// Rank-K surrogate of the inverse covariance, R^-1 ~ U_K C U_K^H.
///
/// U_K (M x K, orthonormal columns) is the leading eigenbasis of the
/// covariance at (re)initialization and stays frozen until the next
/// `reinitialize`. Only the K x K core C = D_K^-1 evolves: each snapshot is
/// projected, x~ = U_K^H x, and C becomes the exact inverse of
/// alpha C^-1 + (1 - alpha) x~ x~^H via Sherman-Morrison in the subspace.
/// C starts diagonal (1 / lambda_i) and is a dense Hermitian matrix after the
/// first update.
///
/// An update costs O(MK + K^2) and touches no M x M object; scratch
/// buffers are sized once at construction.
class LowRankState {
 public:
  /// Builds the state from an explicit basis and core (used by tests and
  /// tooling). Checks orthonormality to 1e-10 and Hermitian symmetry.
  LowRankState(ComplexMatrix basis, HermitianMatrix core_inverse, double alpha);

  /// Truncated eigendecomposition of `r`. Throws NumericalError when
  /// lambda_K <= 1e-12 lambda_1 (rank deficient at the requested K).
  static LowRankState initialize(const HermitianMatrix& r, Index rank, double alpha);

  /// Advances the core with one snapshot. Throws DegenerateUpdateError and
  /// leaves the state unchanged when alpha + (1 - alpha) x~^H C x~ <= 1e-12.
  void update(const Snapshot& x);

  /// Rebuilds basis and core from the sample covariance of `recent`; the
  /// step counter carries on. Needs at least `rank` snapshots.
  void reinitialize(std::span<const Snapshot> recent, Index rank);

  /// Dense M x M surrogate U_K C U_K^H. Diagnostic use only: O(M^2 K).
  HermitianMatrix reconstruct_inverse() const;

  const ComplexMatrix& basis() const noexcept { return basis_; }
  const ComplexMatrix& core_inverse() const noexcept { return core_inv_; }
  /// Eigenvalues captured at the last (re)initialization, descending.
  const RealVector& initial_eigenvalues() const noexcept { return eigenvalues_; }
  double alpha() const noexcept { return alpha_; }
  Index rank() const noexcept { return basis_.cols(); }
  Index dimension() const noexcept { return basis_.rows(); }
  std::int64_t step() const noexcept { return step_; }
  std::int64_t reinitializations() const noexcept { return reinits_; }

 private:
  LowRankState() = default;
  void adopt(const EigenPair& eig);
  void allocate_scratch();

  ComplexMatrix basis_;
  ComplexMatrix core_inv_;
  RealVector eigenvalues_;
  double alpha_ = 0.0;
  std::int64_t step_ = 0;
  std::int64_t reinits_ = 0;

  ComplexVector projected_;
  ComplexVector gain_;
};

}  // namespace lrmvdr
