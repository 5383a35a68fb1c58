#ifndef SPECLIFT_CLIFFORD_HPP
#define SPECLIFT_CLIFFORD_HPP

#include <optional>
#include <vector>

#include "speclift/linalg.hpp"

namespace speclift {

/// Concrete representation of the complex Clifford algebra on n generators with
/// the convention  F_j F_k + F_k F_j = -2 delta_jk,  F_k* = -F_k,  F_k^2 = -1.
/// When present, the grading satisfies gamma* = gamma, gamma^2 = 1 and
/// gamma F_k = -F_k gamma for every k.
struct CliffordRep {
  int n = 0;
  int spin_dim = 1;
  std::vector<ComplexMatrix> generators;
  std::optional<ComplexMatrix> grading;
};

/// Canonical construction from iterated Pauli tensor products.  The irreducible
/// representation acts on dimension 2^floor(n/2); for odd n a grading does not
/// exist there, so `require_grading` doubles the space with gamma = 1 (x) sigma3
/// and generators F_k (x) sigma1.  All entries lie in {0, +-1, +-i} and the
/// defining relations hold exactly in floating point.
CliffordRep build_clifford(int n, bool require_grading);

/// Sum_k x_k F_k; linear in x, squares to -||x||^2.
ComplexMatrix clifford_mul_vector(const CliffordRep& rep, const RealVector& x);

/// A unit +1-eigenvector of the grading (the grading is diagonal by construction).
ComplexVector grading_plus_vector(const CliffordRep& rep);

/// The left-regular representation of Cl(n) on itself (dimension 2^n).  Basis
/// vectors are ordered products e_S = X_{s1}...X_{sk} indexed by bitmask subsets.
struct CliffordAlgebra {
  int n = 0;
  int dim = 1;
  std::vector<ComplexMatrix> left_mult;  // multiplication by X_k
  ComplexMatrix grading;                 // e_S -> (-1)^{|S|} e_S
};

CliffordAlgebra clifford_algebra(int n);

ComplexMatrix clifford_algebra_mul_vector(const CliffordAlgebra& alg, const RealVector& x);

/// The graded tensor isomorphism Cl(a) (x) Cl(b) -> Cl(a+b) sending
/// e_S (x) e_T to (-1)^{|S||T|} e_S e_T, with the first a directions spanning
/// the Cl(a) factor.  Unitary; intertwines X (x) 1 with X for X in the first
/// factor composed with the second factor's grading, and 1 (x) Y with Y.
ComplexMatrix graded_tensor_iso(int a, int b);

}  // namespace speclift

#endif
