#include "daql/hermitian_operator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "daql/errors.hpp"
#include "daql/kernels.hpp"

namespace daql {
namespace {

kernels::CsrView csr_view(const SparseCMatrix& m) {
  return {m.rows(), m.outerIndexPtr(), m.innerIndexPtr(), m.valuePtr()};
}

SpectralDecomposition decompose(const SparseCMatrix& m, bool real) {
  SpectralDecomposition out;
  if (real) {
    const RMatrix a = CMatrix(m).real();
    Eigen::SelfAdjointEigenSolver<RMatrix> es(a);
    if (es.info() != Eigen::Success) {
      throw NumericalError("real symmetric eigensolver did not converge (dimension " +
                           std::to_string(a.rows()) + ")");
    }
    out.eigenvalues = es.eigenvalues();
    out.eigenvectors = es.eigenvectors().cast<cplx>();
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> es{CMatrix(m)};
    if (es.info() != Eigen::Success) {
      throw NumericalError("Hermitian eigensolver did not converge (dimension " +
                           std::to_string(m.rows()) + ")");
    }
    out.eigenvalues = es.eigenvalues();
    out.eigenvectors = es.eigenvectors();
  }
  return out;
}

}  // namespace

HermitianOperator::HermitianOperator(SparseCMatrix m)
    : matrix_(std::make_shared<const SparseCMatrix>(std::move(m))), cache_(std::make_shared<Cache>()) {
  const SparseCMatrix& a = *matrix_;
  for (Eigen::Index k = 0; k < a.nonZeros(); ++k) {
    if (a.valuePtr()[k].imag() != 0.0) {
      real_ = false;
      break;
    }
  }
}

HermitianOperator HermitianOperator::from_dense(const CMatrix& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) throw ValidationError("operator must be square and nonempty");
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (asym > tol) throw ValidationError("matrix is not Hermitian (max |H - H^dag| = " + std::to_string(asym) + ")");
  SparseCMatrix s = m.sparseView();
  s.makeCompressed();
  return HermitianOperator(std::move(s));
}

HermitianOperator HermitianOperator::from_sparse(SparseCMatrix m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) throw ValidationError("operator must be square and nonempty");
  m.makeCompressed();
  const SparseCMatrix diff = m - SparseCMatrix(m.adjoint());
  double asym = 0.0;
  for (Eigen::Index k = 0; k < diff.nonZeros(); ++k) asym = std::max(asym, std::abs(diff.valuePtr()[k]));
  if (asym > tol) throw ValidationError("matrix is not Hermitian (max |H - H^dag| = " + std::to_string(asym) + ")");
  return HermitianOperator(std::move(m));
}

int HermitianOperator::num_qubits() const {
  const auto d = static_cast<std::uint64_t>(dimension());
  return std::has_single_bit(d) ? std::countr_zero(d) : -1;
}

void HermitianOperator::apply(std::span<const cplx> x, std::span<cplx> y) const {
  if (x.size() != dimension() || y.size() != dimension()) throw ValidationError("operator apply: dimension mismatch");
  kernels::csr_matvec(csr_view(*matrix_), x, y);
}

CVector HermitianOperator::apply(const CVector& x) const {
  CVector y(x.size());
  apply({x.data(), static_cast<std::size_t>(x.size())}, {y.data(), static_cast<std::size_t>(y.size())});
  return y;
}

const SpectralDecomposition& HermitianOperator::spectral() const {
  std::call_once(cache_->once, [this] {
    cache_->value = decompose(*matrix_, real_);
    cache_->ready = true;
  });
  return cache_->value;
}

bool HermitianOperator::has_spectral() const { return cache_->ready; }

std::pair<double, double> HermitianOperator::spectral_bounds() const {
  const SparseCMatrix& a = *matrix_;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    double center = 0.0;
    double radius = 0.0;
    for (SparseCMatrix::InnerIterator it(a, r); it; ++it) {
      if (it.col() == r) center = it.value().real();
      else radius += std::abs(it.value());
    }
    lo = std::min(lo, center - radius);
    hi = std::max(hi, center + radius);
  }
  return {lo, hi};
}

double HermitianOperator::norm_bound() const {
  const auto [lo, hi] = spectral_bounds();
  return std::max(std::abs(lo), std::abs(hi));
}

}  // namespace daql
