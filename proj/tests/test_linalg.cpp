#include "doctest.h"

#include <cmath>

#include "speclift/linalg.hpp"
#include "test_support.hpp"

using namespace speclift;
namespace st = speclift::testing;

namespace {
const Complex I(0.0, 1.0);

ComplexMatrix pauli1() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
ComplexMatrix pauli2() {
  ComplexMatrix m(2, 2);
  m << 0, -I, I, 0;
  return m;
}
ComplexMatrix pauli3() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
}  // namespace

TEST_CASE("kron identity case") {
  ComplexMatrix out = kron(identity_matrix(2), identity_matrix(3));
  CHECK(max_abs(out - identity_matrix(6)) == 0.0);
}

TEST_CASE("kron of skew Pauli pair matches the hand-expanded 4x4") {
  // Generators with square -1: s_k = i * (Hermitian Pauli).
  ComplexMatrix s1 = I * pauli1(), s3 = I * pauli3();
  ComplexMatrix out = kron(s1, s3);
  ComplexMatrix expect(4, 4);
  expect << 0, 0, -1, 0,
            0, 0, 0, 1,
           -1, 0, 0, 0,
            0, 1, 0, 0;
  CHECK(max_abs(out - expect) == 0.0);
}

TEST_CASE("kron spectrum is the product set") {
  auto gen = st::rng(42);
  ComplexMatrix a = st::random_hermitian(gen, 2);
  ComplexMatrix b = st::random_hermitian(gen, 2);
  HermitianSpectrum sa = eig_hermitian(a), sb = eig_hermitian(b), sk = eig_hermitian(kron(a, b));
  std::vector<double> products;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) products.push_back(sa.eigenvalues(i) * sb.eigenvalues(j));
  std::sort(products.begin(), products.end());
  for (int i = 0; i < 4; ++i) CHECK(std::abs(sk.eigenvalues(i) - products[i]) < 1e-12);
}

TEST_CASE("kron associativity is exact") {
  auto gen = st::rng(7);
  ComplexMatrix a = st::random_matrix(gen, 2, 3), b = st::random_matrix(gen, 3, 2),
                c = st::random_matrix(gen, 2, 2);
  // identical index layout; entries agree up to reassociation of the scalar products
  CHECK(max_abs(kron(kron(a, b), c) - kron(a, kron(b, c))) < 1e-15);
}

TEST_CASE("kron rejects oversized output") {
  ComplexMatrix a = ComplexMatrix::Zero(3, 3);
  CHECK_THROWS_AS(kron(a, a, 80), SizeCapError);
}

TEST_CASE("eig_hermitian on the zero matrix") {
  HermitianSpectrum s = eig_hermitian(ComplexMatrix::Zero(4, 4));
  for (int i = 0; i < 4; ++i) CHECK(s.eigenvalues(i) == 0.0);
}

TEST_CASE("eig_hermitian on Pauli sigma2") {
  HermitianSpectrum s = eig_hermitian(pauli2());
  CHECK(std::abs(s.eigenvalues(0) + 1.0) < 1e-14);
  CHECK(std::abs(s.eigenvalues(1) - 1.0) < 1e-14);
}

TEST_CASE("eig_hermitian matches the closed-form 2x2 spectrum") {
  auto gen = st::rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const double lambda = st::uniform(gen, -3, 3), k = st::uniform(gen, -3, 3);
    HermitianSpectrum s = eig_hermitian(lambda * pauli1() + k * pauli2());
    const double root = std::sqrt(lambda * lambda + k * k);
    CHECK(std::abs(s.eigenvalues(0) + root) < 1e-12);
    CHECK(std::abs(s.eigenvalues(1) - root) < 1e-12);
  }
}

TEST_CASE("eig_hermitian rejects non-Hermitian input") {
  ComplexMatrix a(2, 2);
  a << 0, 1, 0, 0;
  CHECK_THROWS_AS(eig_hermitian(a), NotHermitianError);
}

TEST_CASE("eig_hermitian reconstruction up to 64x64") {
  auto gen = st::rng(11);
  for (Eigen::Index n : {3, 16, 64}) {
    ComplexMatrix a = st::random_hermitian(gen, n);
    HermitianSpectrum s = eig_hermitian(a);
    ComplexMatrix rebuilt =
        s.eigenvectors * s.eigenvalues.cast<Complex>().asDiagonal() * s.eigenvectors.adjoint();
    CHECK(max_abs(rebuilt - a) < 1e-9 * std::max(1.0, max_abs(a)));
    CHECK(max_abs(s.eigenvectors.adjoint() * s.eigenvectors - identity_matrix(n)) < 1e-12);
    for (Eigen::Index i = 0; i + 1 < n; ++i) CHECK(s.eigenvalues(i) <= s.eigenvalues(i + 1));
  }
}

TEST_CASE("op_norm basics") {
  CHECK(std::abs(op_norm(identity_matrix(5)) - 1.0) < 1e-14);
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = -4.0;
  CHECK(std::abs(op_norm(d) - 4.0) < 1e-14);
}

TEST_CASE("op_norm squared equals the top eigenvalue of a*a") {
  auto gen = st::rng(5);
  ComplexMatrix a = st::random_matrix(gen, 5, 5);
  HermitianSpectrum s = eig_hermitian((a.adjoint() * a).eval());
  CHECK(std::abs(op_norm(a) * op_norm(a) - s.eigenvalues(4)) < 1e-10);
}

TEST_CASE("op_norm is submultiplicative on random pairs") {
  auto gen = st::rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    ComplexMatrix a = st::random_matrix(gen, 6, 6), b = st::random_matrix(gen, 6, 6);
    CHECK(op_norm(a * b) <= op_norm(a) * op_norm(b) + 1e-9);
  }
}

TEST_CASE("compress with the identity projection leaves the operator unchanged") {
  auto gen = st::rng(23);
  ComplexMatrix a = st::random_matrix(gen, 4, 4);
  Compression c = compress(identity_matrix(4), a);
  CHECK(max_abs(c.matrix - a) == 0.0);
}

TEST_CASE("compress with the zero projection gives an empty matrix") {
  Compression c = compress(ComplexMatrix::Zero(3, 3), ComplexMatrix::Zero(3, 3));
  CHECK(c.matrix.rows() == 0);
  CHECK(c.matrix.cols() == 0);
}

TEST_CASE("compress keeps Hermitian operators Hermitian") {
  auto gen = st::rng(29);
  ComplexMatrix a = st::random_hermitian(gen, 8);
  ComplexMatrix p = st::random_projection(gen, 8, 3);
  Compression c = compress(p, a);
  CHECK(c.matrix.rows() == 3);
  CHECK(hermiticity_defect(c.matrix) < 1e-12);
  CHECK(max_abs(c.range_basis.adjoint() * c.range_basis - identity_matrix(3)) < 1e-12);
}

TEST_CASE("compress rejects non-projections") {
  auto gen = st::rng(31);
  ComplexMatrix a = st::random_hermitian(gen, 4);
  CHECK_THROWS_AS(compress(0.5 * identity_matrix(4), a), NotProjectionError);
}

TEST_CASE("direct_sum trivial cases") {
  DirectSum s = direct_sum({identity_matrix(1), identity_matrix(2)});
  CHECK(max_abs(s.matrix - identity_matrix(3)) == 0.0);
  ComplexMatrix s1 = pauli1();
  DirectSum single = direct_sum({s1});
  CHECK(max_abs(single.matrix - s1) == 0.0);
  CHECK(s.offsets == std::vector<Eigen::Index>({0, 1}));
}

TEST_CASE("direct_sum spectrum is the multiset union of block spectra") {
  auto gen = st::rng(37);
  ComplexMatrix a = st::random_hermitian(gen, 3), b = st::random_hermitian(gen, 4);
  DirectSum s = direct_sum({a, b});
  RealVector merged =
      merge_spectra({eig_hermitian(a).eigenvalues, eig_hermitian(b).eigenvalues});
  CHECK(spectra_distance(eig_hermitian(s.matrix).eigenvalues, merged) < 1e-12);
}
