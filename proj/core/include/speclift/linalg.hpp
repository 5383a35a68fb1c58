#ifndef SPECLIFT_LINALG_HPP
#define SPECLIFT_LINALG_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace speclift {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Default tolerance policy: absolute 1e-10 for exact algebraic identities,
/// relative 1e-8 for eigensolve-dependent checks.
struct Tolerances {
  double exact = 1e-10;
  double spectral = 1e-8;
};

/// Process-wide allocator tuning for allocation-heavy verification loops:
/// raises the malloc trim threshold so the heap top is not returned to the
/// kernel on every free.  Call once from a binary entry point.
void tune_allocator();

struct NotHermitianError : std::runtime_error {
  explicit NotHermitianError(const std::string& what) : std::runtime_error(what) {}
};
struct NotProjectionError : std::runtime_error {
  explicit NotProjectionError(const std::string& what) : std::runtime_error(what) {}
};
struct NoConvergenceError : std::runtime_error {
  explicit NoConvergenceError(const std::string& what) : std::runtime_error(what) {}
};
struct DimensionMismatchError : std::runtime_error {
  explicit DimensionMismatchError(const std::string& what) : std::runtime_error(what) {}
};
struct SizeCapError : std::runtime_error {
  explicit SizeCapError(const std::string& what) : std::runtime_error(what) {}
};

/// Eigendata of a Hermitian matrix: eigenvalues ascending, eigenvector columns unitary.
struct HermitianSpectrum {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;
};

/// Kronecker product with the first factor as the slow index:
/// (a (x) b)[(i,k),(j,l)] = a[i,j] * b[k,l].
/// Throws SizeCapError when the output would exceed `element_cap` entries.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b,
                   std::size_t element_cap = std::size_t(1) << 28);

ComplexMatrix kron3(const ComplexMatrix& a, const ComplexMatrix& b, const ComplexMatrix& c);

/// Hermitian eigensolve. Requires ||a - a*|| <= tol * max(1, ||a||).
HermitianSpectrum eig_hermitian(const ComplexMatrix& a, double hermiticity_tol = 1e-10);

/// Largest singular value.
double op_norm(const ComplexMatrix& a);

/// Max absolute entry; cheap surrogate used for exact identities.
double max_abs(const ComplexMatrix& a);

double hermiticity_defect(const ComplexMatrix& a);

/// Result of compressing an operator to the range of a projection.
struct Compression {
  ComplexMatrix matrix;       // rank x rank, the compressed operator
  ComplexMatrix range_basis;  // n x rank, orthonormal columns spanning range(p)
};

/// compress(p, a) = the operator p a p restricted to an orthonormal basis of range(p).
/// `p` must satisfy p = p* and p^2 = p within `tol`.
Compression compress(const ComplexMatrix& p, const ComplexMatrix& a, double tol = 1e-10);

/// Orthonormal basis of range(p) for a projection p (deterministic for a fixed build).
ComplexMatrix projection_range_basis(const ComplexMatrix& p, double tol = 1e-10);

struct DirectSum {
  ComplexMatrix matrix;
  std::vector<Eigen::Index> offsets;  // start row/col of each block
  std::vector<Eigen::Index> dims;
};

DirectSum direct_sum(const std::vector<ComplexMatrix>& blocks);

ComplexMatrix identity_matrix(Eigen::Index n);

/// ||Av_i - lambda_i v_i|| maximized over i; diagnostic for HermitianSpectrum.
double eigen_residual(const ComplexMatrix& a, const HermitianSpectrum& s);

/// exp(s) for skew-adjoint s, via the spectral calculus of the Hermitian i*s.
ComplexMatrix exp_skew(const ComplexMatrix& s);

/// Multiset comparison of two ascending eigenvalue lists; returns max matched deviation
/// or +inf when the lengths differ.
double spectra_distance(const RealVector& a, const RealVector& b);

/// Sorted concatenation of eigenvalue lists.
RealVector merge_spectra(const std::vector<RealVector>& parts);

}  // namespace speclift

#endif
