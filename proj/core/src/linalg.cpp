#include "lrmvdr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "lrmvdr/error.hpp"

namespace lrmvdr {

namespace {

constexpr double kHermitianTolerance = 1e-12;
constexpr double kMaxConditionNumber = 1e12;

void require_square(const ComplexMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw InvalidArgument(fmt::format("expected a non-empty square matrix, got {}x{}",
                                      m.rows(), m.cols()));
  }
}

}  // namespace

void add_outer(ComplexMatrix& a, double c, const ComplexVector& v) {
  const ComplexVector cv = c * v;
  for (Index j = 0; j < a.cols(); ++j) a.col(j) += cv * std::conj(v(j));
}

bool all_finite(const ComplexMatrix& m) {
  return m.allFinite();
}

double relative_frobenius(const ComplexMatrix& a, const ComplexMatrix& b) {
  const double ref = std::max(b.norm(), std::numeric_limits<double>::min());
  return (a - b).norm() / ref;
}

HermitianMatrix::HermitianMatrix(ComplexMatrix m) {
  require_square(m);
  if (!m.allFinite()) {
    throw InvalidArgument("Hermitian matrix has non-finite entries");
  }
  const double tol = kHermitianTolerance * std::max(1.0, m.norm());
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (asym > tol) {
    throw InvalidArgument(
        fmt::format("matrix is not Hermitian (max asymmetry {:.3e} > {:.3e})", asym, tol));
  }
  m_ = std::move(m);
}

HermitianMatrix HermitianMatrix::identity(Index d) {
  if (d <= 0) throw InvalidArgument("identity size must be positive");
  return HermitianMatrix(Trusted{}, ComplexMatrix::Identity(d, d));
}

HermitianMatrix HermitianMatrix::diagonal(const RealVector& d) {
  if (d.size() == 0 || !d.allFinite()) {
    throw InvalidArgument("diagonal must be non-empty and finite");
  }
  return HermitianMatrix(Trusted{}, d.cast<Complex>().asDiagonal().toDenseMatrix());
}

HermitianMatrix HermitianMatrix::symmetrize(const ComplexMatrix& m) {
  require_square(m);
  if (!m.allFinite()) {
    throw InvalidArgument("Hermitian matrix has non-finite entries");
  }
  ComplexMatrix h = 0.5 * (m + m.adjoint());
  return HermitianMatrix(Trusted{}, std::move(h));
}

EigenPair hermitian_eig(const HermitianMatrix& a, Index k) {
  const Index d = a.size();
  if (k < 1 || k > d) {
    throw InvalidArgument(fmt::format("rank {} out of range [1, {}]", k, d));
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a.matrix());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Hermitian eigensolver did not converge");
  }
  // Eigen returns ascending eigenvalues; take the top k, largest first.
  EigenPair out;
  out.basis.resize(d, k);
  out.values.resize(k);
  for (Index j = 0; j < k; ++j) {
    const Index src = d - 1 - j;
    out.values(j) = solver.eigenvalues()(src);
    auto col = out.basis.col(j);
    col = solver.eigenvectors().col(src);
    Index pivot = 0;
    col.cwiseAbs().maxCoeff(&pivot);
    const Complex p = col(pivot);
    if (std::abs(p) > 0.0) col *= std::conj(p) / std::abs(p);
    col(pivot) = Complex(col(pivot).real(), 0.0);
  }
  return out;
}

HermitianMatrix invert_hermitian(const HermitianMatrix& a) {
  const Index d = a.size();
  if (d == 0) throw InvalidArgument("cannot invert an empty matrix");
  Eigen::LLT<ComplexMatrix> llt(a.matrix());
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError("matrix is not positive definite (Cholesky failed)",
                              std::numeric_limits<double>::infinity());
  }
  const double rcond = llt.rcond();
  if (!(rcond * kMaxConditionNumber > 1.0)) {
    const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    throw SingularMatrixError(
        fmt::format("matrix is numerically singular (condition estimate {:.3e})", cond), cond);
  }
  ComplexMatrix inv = llt.solve(ComplexMatrix::Identity(d, d));
  return HermitianMatrix::symmetrize(inv);
}

}  // namespace lrmvdr
