#include "speclift/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace speclift {

void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
#endif
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b, std::size_t element_cap) {
  const std::size_t rows = std::size_t(a.rows()) * std::size_t(b.rows());
  const std::size_t cols = std::size_t(a.cols()) * std::size_t(b.cols());
  if (rows * cols > element_cap) {
    throw SizeCapError("kron: output of " + std::to_string(rows) + "x" + std::to_string(cols) +
                       " exceeds the element cap");
  }
  ComplexMatrix out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexMatrix kron3(const ComplexMatrix& a, const ComplexMatrix& b, const ComplexMatrix& c) {
  return kron(kron(a, b), c);
}

double max_abs(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  return a.cwiseAbs().maxCoeff();
}

double hermiticity_defect(const ComplexMatrix& a) {
  return max_abs(a - a.adjoint().eval());
}

HermitianSpectrum eig_hermitian(const ComplexMatrix& a, double hermiticity_tol) {
  if (a.rows() != a.cols())
    throw DimensionMismatchError("eig_hermitian: matrix is not square");
  if (a.rows() == 0) return {RealVector(0), ComplexMatrix(0, 0)};
  const double scale = std::max(1.0, max_abs(a));
  if (hermiticity_defect(a) > hermiticity_tol * scale)
    throw NotHermitianError("eig_hermitian: matrix is not Hermitian within tolerance");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a);
  if (solver.info() != Eigen::Success)
    throw NoConvergenceError("eig_hermitian: solver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double op_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<ComplexMatrix> svd(a);
  if (svd.info() != Eigen::Success)
    throw NoConvergenceError("op_norm: SVD did not converge");
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

ComplexMatrix projection_range_basis(const ComplexMatrix& p, double tol) {
  if (p.rows() != p.cols())
    throw NotProjectionError("projection_range_basis: matrix is not square");
  if (p.rows() == 0) return ComplexMatrix(0, 0);
  const double scale = std::max(1.0, max_abs(p));
  if (hermiticity_defect(p) > tol * scale || max_abs(p * p - p) > tol * scale)
    throw NotProjectionError("projection_range_basis: p fails p = p* or p^2 = p");
  if (max_abs(p - ComplexMatrix::Identity(p.rows(), p.cols())) <= tol)
    return ComplexMatrix::Identity(p.rows(), p.cols());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(p);
  if (solver.info() != Eigen::Success)
    throw NoConvergenceError("projection_range_basis: eigensolver did not converge");
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    if (solver.eigenvalues()(i) > 0.5) ++rank;
  // Eigenvalues ascend, so the range eigenvectors sit in the trailing columns.
  return solver.eigenvectors().rightCols(rank);
}

Compression compress(const ComplexMatrix& p, const ComplexMatrix& a, double tol) {
  if (p.rows() != a.rows() || p.cols() != a.cols())
    throw DimensionMismatchError("compress: p and a have different shapes");
  ComplexMatrix basis = projection_range_basis(p, tol);
  Compression out;
  out.matrix = basis.adjoint() * a * basis;
  out.range_basis = std::move(basis);
  return out;
}

DirectSum direct_sum(const std::vector<ComplexMatrix>& blocks) {
  DirectSum out;
  Eigen::Index total = 0;
  for (const auto& b : blocks) {
    if (b.rows() != b.cols())
      throw DimensionMismatchError("direct_sum: blocks must be square");
    out.offsets.push_back(total);
    out.dims.push_back(b.rows());
    total += b.rows();
  }
  out.matrix = ComplexMatrix::Zero(total, total);
  for (std::size_t i = 0; i < blocks.size(); ++i)
    out.matrix.block(out.offsets[i], out.offsets[i], out.dims[i], out.dims[i]) = blocks[i];
  return out;
}

ComplexMatrix identity_matrix(Eigen::Index n) { return ComplexMatrix::Identity(n, n); }

ComplexMatrix exp_skew(const ComplexMatrix& s) {
  const Complex i(0.0, 1.0);
  HermitianSpectrum h = eig_hermitian(i * s, 1e-9);
  ComplexVector phases(h.eigenvalues.size());
  for (Eigen::Index k = 0; k < h.eigenvalues.size(); ++k)
    phases(k) = std::exp(-i * h.eigenvalues(k));
  return h.eigenvectors * phases.asDiagonal() * h.eigenvectors.adjoint();
}

double eigen_residual(const ComplexMatrix& a, const HermitianSpectrum& s) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    const ComplexVector v = s.eigenvectors.col(i);
    worst = std::max(worst, (a * v - s.eigenvalues(i) * v).norm());
  }
  return worst;
}

double spectra_distance(const RealVector& a, const RealVector& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a(i) - b(i)));
  return worst;
}

RealVector merge_spectra(const std::vector<RealVector>& parts) {
  std::vector<double> all;
  for (const auto& p : parts) all.insert(all.end(), p.data(), p.data() + p.size());
  std::sort(all.begin(), all.end());
  return Eigen::Map<RealVector>(all.data(), Eigen::Index(all.size()));
}

}  // namespace speclift
