#include "doctest.h"

#include <cmath>

#include "speclift/clifford.hpp"
#include "test_support.hpp"

using namespace speclift;
namespace st = speclift::testing;

namespace {

// Exact generator relations: anticommutators, skew-adjointness, squares, grading.
void check_relations(const CliffordRep& rep) {
  const ComplexMatrix one = identity_matrix(rep.spin_dim);
  for (int j = 0; j < rep.n; ++j) {
    const ComplexMatrix& fj = rep.generators[j];
    CHECK(max_abs(fj + fj.adjoint().eval()) == 0.0);
    for (int k = 0; k < rep.n; ++k) {
      const ComplexMatrix& fk = rep.generators[k];
      ComplexMatrix anti = fj * fk + fk * fj;
      if (j == k)
        CHECK(max_abs(anti + 2.0 * one) == 0.0);
      else
        CHECK(max_abs(anti) == 0.0);
    }
  }
  if (rep.grading) {
    const ComplexMatrix& g = *rep.grading;
    CHECK(max_abs(g - g.adjoint().eval()) == 0.0);
    CHECK(max_abs(g * g - one) == 0.0);
    for (const auto& f : rep.generators) CHECK(max_abs(g * f + f * g) == 0.0);
  }
}

}  // namespace

TEST_CASE("n=1 without grading is the scalar i") {
  CliffordRep rep = build_clifford(1, false);
  CHECK(rep.spin_dim == 1);
  CHECK(std::abs(rep.generators[0](0, 0) - Complex(0, 1)) == 0.0);
}

TEST_CASE("n=3 acts on C^2 through the skew Pauli triple") {
  CliffordRep rep = build_clifford(3, false);
  CHECK(rep.spin_dim == 2);
  const Complex I(0, 1);
  ComplexMatrix s1(2, 2), s2(2, 2), s3(2, 2);
  s1 << 0, I, I, 0;
  s2 << 0, 1, -1, 0;
  s3 << I, 0, 0, -I;
  CHECK(max_abs(rep.generators[0] - s1) == 0.0);
  CHECK(max_abs(rep.generators[1] - s2) == 0.0);
  CHECK(max_abs(rep.generators[2] - s3) == 0.0);
}

TEST_CASE("n=2 with grading is (i sigma1, i sigma2, sigma3)") {
  CliffordRep rep = build_clifford(2, true);
  CHECK(rep.spin_dim == 2);
  REQUIRE(rep.grading.has_value());
  ComplexMatrix g = *rep.grading;
  CHECK(g(0, 0) == Complex(1, 0));
  CHECK(g(1, 1) == Complex(-1, 0));
  check_relations(rep);
}

TEST_CASE("relations hold exactly for n = 1..6, graded and ungraded") {
  for (int n = 1; n <= 6; ++n) {
    check_relations(build_clifford(n, false));
    CliffordRep graded = build_clifford(n, true);
    REQUIRE(graded.grading.has_value());
    check_relations(graded);
    const int expected = (1 << (n / 2)) * ((n % 2) ? 2 : 1);
    CHECK(graded.spin_dim == expected);
  }
}

TEST_CASE("clifford_mul_vector basics") {
  CliffordRep rep = build_clifford(3, false);
  RealVector e1 = RealVector::Zero(3);
  e1(0) = 1.0;
  CHECK(max_abs(clifford_mul_vector(rep, e1) - rep.generators[0]) == 0.0);
  CHECK(max_abs(clifford_mul_vector(rep, RealVector::Zero(3))) == 0.0);
  CHECK_THROWS_AS(clifford_mul_vector(rep, RealVector::Zero(2)), DimensionMismatchError);
}

TEST_CASE("unit vectors square to minus one") {
  auto gen = st::rng(101);
  for (int n : {2, 3, 4, 5}) {
    CliffordRep rep = build_clifford(n, true);
    for (int trial = 0; trial < 8; ++trial) {
      RealVector x = st::random_real_vector(gen, n);
      x.normalize();
      ComplexMatrix fx = clifford_mul_vector(rep, x);
      CHECK(max_abs(fx * fx + identity_matrix(rep.spin_dim)) < 1e-14);
    }
  }
}

TEST_CASE("orthogonal vectors anticommute and the bilinear form is recovered") {
  auto gen = st::rng(103);
  CliffordRep rep = build_clifford(4, true);
  RealVector x = st::random_real_vector(gen, 4), y = st::random_real_vector(gen, 4);
  y -= (x.dot(y) / x.squaredNorm()) * x;
  ComplexMatrix fx = clifford_mul_vector(rep, x), fy = clifford_mul_vector(rep, y);
  CHECK(max_abs(fx * fy + fy * fx) < 1e-13);
  ComplexMatrix sq = fx * fx + x.squaredNorm() * identity_matrix(rep.spin_dim);
  CHECK(max_abs(sq) < 1e-13);
}

TEST_CASE("grading anticommutes with every vector multiplication") {
  auto gen = st::rng(107);
  for (int n : {1, 2, 3}) {
    CliffordRep rep = build_clifford(n, true);
    for (int k = 0; k < n; ++k) {
      RealVector e = RealVector::Zero(n);
      e(k) = 1.0;
      ComplexMatrix f = clifford_mul_vector(rep, e);
      CHECK(max_abs((*rep.grading) * f + f * (*rep.grading)) == 0.0);
    }
  }
}

TEST_CASE("left regular algebra representation") {
  for (int n : {1, 2, 3}) {
    CliffordAlgebra alg = clifford_algebra(n);
    CHECK(alg.dim == (1 << n));
    const ComplexMatrix one = identity_matrix(alg.dim);
    for (int j = 0; j < n; ++j) {
      CHECK(max_abs(alg.left_mult[j] + alg.left_mult[j].adjoint().eval()) == 0.0);
      for (int k = 0; k < n; ++k) {
        ComplexMatrix anti = alg.left_mult[j] * alg.left_mult[k] + alg.left_mult[k] * alg.left_mult[j];
        if (j == k)
          CHECK(max_abs(anti + 2.0 * one) == 0.0);
        else
          CHECK(max_abs(anti) == 0.0);
      }
      // grading is the parity automorphism, so it conjugates X_k to -X_k
      CHECK(max_abs(alg.grading * alg.left_mult[j] + alg.left_mult[j] * alg.grading) == 0.0);
    }
  }
}

TEST_CASE("graded tensor isomorphism intertwines both factors") {
  const int a = 2, b = 1;
  CliffordAlgebra qa = clifford_algebra(a), qb = clifford_algebra(b), full = clifford_algebra(a + b);
  ComplexMatrix w = graded_tensor_iso(a, b);
  CHECK(max_abs(w * w.adjoint().eval() - identity_matrix(w.rows())) == 0.0);
  // F_Y W = W (F_Y (x) Omega) for Y in the first factor
  for (int k = 0; k < a; ++k) {
    ComplexMatrix lhs = full.left_mult[k] * w;
    ComplexMatrix rhs = w * kron(qa.left_mult[k], qb.grading);
    CHECK(max_abs(lhs - rhs) == 0.0);
  }
  // F_Z W = W (1 (x) F_Z) for Z in the second factor
  for (int k = 0; k < b; ++k) {
    ComplexMatrix lhs = full.left_mult[a + k] * w;
    ComplexMatrix rhs = w * kron(identity_matrix(qa.dim), qb.left_mult[k]);
    CHECK(max_abs(lhs - rhs) == 0.0);
  }
}

TEST_CASE("grading_plus_vector is a +1 eigenvector") {
  CliffordRep rep = build_clifford(3, true);
  ComplexVector chi = grading_plus_vector(rep);
  CHECK(((*rep.grading) * chi - chi).norm() == 0.0);
  CHECK(std::abs(chi.norm() - 1.0) == 0.0);
}
