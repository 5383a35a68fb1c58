#ifndef SPECLIFT_TEST_SUPPORT_HPP
#define SPECLIFT_TEST_SUPPORT_HPP

#include <random>

#include "speclift/linalg.hpp"

namespace speclift::testing {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& gen, double lo = -1.0, double hi = 1.0) {
  // Fixed mapping instead of std::uniform_real_distribution so streams are stable.
  const double u = double(gen() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

inline ComplexMatrix random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols) {
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(uniform(gen), uniform(gen));
  return m;
}

inline ComplexMatrix random_hermitian(std::mt19937_64& gen, Eigen::Index n) {
  ComplexMatrix m = random_matrix(gen, n, n);
  return 0.5 * (m + m.adjoint().eval());
}

inline ComplexMatrix random_unitary(std::mt19937_64& gen, Eigen::Index n) {
  Eigen::HouseholderQR<ComplexMatrix> qr(random_matrix(gen, n, n));
  ComplexMatrix q = qr.householderQ();
  return q;
}

inline ComplexMatrix random_projection(std::mt19937_64& gen, Eigen::Index n, Eigen::Index rank) {
  ComplexMatrix u = random_unitary(gen, n);
  ComplexMatrix p = ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < rank; ++i) p += u.col(i) * u.col(i).adjoint();
  return p;
}

inline Eigen::VectorXd random_real_vector(std::mt19937_64& gen, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(gen);
  return v;
}

}  // namespace speclift::testing

#endif
