#pragma once

#include <complex>

#include <Eigen/Dense>

namespace lrmvdr {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Square complex matrix known to equal its conjugate transpose.
///
/// The checked constructor enforces
///   |A(i,j) - conj(A(j,i))| <= 1e-12 * max(1, ||A||_F)
/// and finiteness of every entry. `symmetrize` projects an arbitrary square
/// matrix onto the Hermitian set, which is what the recursive updates use to
/// stop round-off asymmetry from accumulating.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(ComplexMatrix m);

  static HermitianMatrix identity(Index d);
  static HermitianMatrix diagonal(const RealVector& d);
  static HermitianMatrix symmetrize(const ComplexMatrix& m);

  const ComplexMatrix& matrix() const noexcept { return m_; }
  Index size() const noexcept { return m_.rows(); }
  Complex operator()(Index i, Index j) const { return m_(i, j); }

 private:
  struct Trusted {};
  HermitianMatrix(Trusted, ComplexMatrix m) : m_(std::move(m)) {}

  ComplexMatrix m_;
};

/// Leading eigenpairs of a Hermitian matrix: `basis` is d x K with
/// orthonormal columns and `values` holds the K eigenvalues in descending
/// order. Each column is phase-normalized so its largest-magnitude entry is
/// real and positive.
struct EigenPair {
  ComplexMatrix basis;
  RealVector values;
};

/// Top-K eigenpairs of `a` (1 <= k <= d). U_K diag(values) U_K^H is the best
/// rank-K Hermitian approximation of `a` in Frobenius norm.
EigenPair hermitian_eig(const HermitianMatrix& a, Index k);

/// Inverse of a Hermitian positive definite matrix via Cholesky.
/// Throws SingularMatrixError (carrying the reciprocal-condition based
/// estimate) when the factorization fails or cond(a) exceeds 1e12.
HermitianMatrix invert_hermitian(const HermitianMatrix& a);

bool all_finite(const ComplexMatrix& m);

/// a += c v v^H, one column at a time. Several times faster than Eigen's
/// complex outer-product kernel at these sizes.
void add_outer(ComplexMatrix& a, double c, const ComplexVector& v);

/// ||a - b||_F / max(||b||_F, tiny).
double relative_frobenius(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace lrmvdr
