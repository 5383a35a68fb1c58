#include "speclift/clifford.hpp"

#include <bit>
#include <stdexcept>

namespace speclift {

namespace {

const Complex kI(0.0, 1.0);

ComplexMatrix pauli(int k) {
  ComplexMatrix m(2, 2);
  switch (k) {
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, -kI, kI, 0; break;
    case 3: m << 1, 0, 0, -1; break;
    default: throw std::logic_error("pauli: index out of range");
  }
  return m;
}

ComplexMatrix pauli_string(int slots, int position, int k) {
  // sigma3^{(x)(position)} (x) sigma_k (x) 1...
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int s = 0; s < slots; ++s) {
    if (s < position) out = kron(out, pauli(3));
    else if (s == position) out = kron(out, pauli(k));
    else out = kron(out, ComplexMatrix::Identity(2, 2));
  }
  return out;
}

}  // namespace

CliffordRep build_clifford(int n, bool require_grading) {
  if (n < 0) throw std::invalid_argument("build_clifford: n must be nonnegative");
  CliffordRep rep;
  rep.n = n;
  const int m = n / 2;
  rep.spin_dim = 1 << m;
  if (n == 0) {
    rep.grading = ComplexMatrix::Identity(1, 1);
    return rep;
  }
  for (int j = 0; j < m; ++j) {
    rep.generators.push_back(kI * pauli_string(m, j, 1));
    rep.generators.push_back(kI * pauli_string(m, j, 2));
  }
  const bool odd = (n % 2) != 0;
  if (odd) rep.generators.push_back(kI * pauli_string(m, m, 3));  // sigma3 on every slot
  if (require_grading) {
    if (!odd) {
      ComplexMatrix g = ComplexMatrix::Identity(1, 1);
      for (int s = 0; s < m; ++s) g = kron(g, pauli(3));
      rep.grading = g;
    } else {
      // No anticommuting grading exists on the irreducible space; double it.
      for (auto& f : rep.generators) f = kron(f, pauli(1));
      ComplexMatrix g = kron(ComplexMatrix::Identity(rep.spin_dim, rep.spin_dim), pauli(3));
      rep.spin_dim *= 2;
      rep.grading = g;
    }
  }
  return rep;
}

ComplexMatrix clifford_mul_vector(const CliffordRep& rep, const RealVector& x) {
  if (x.size() != rep.n)
    throw DimensionMismatchError("clifford_mul_vector: vector length differs from generator count");
  ComplexMatrix out = ComplexMatrix::Zero(rep.spin_dim, rep.spin_dim);
  for (int k = 0; k < rep.n; ++k) out += x(k) * rep.generators[k];
  return out;
}

ComplexVector grading_plus_vector(const CliffordRep& rep) {
  if (!rep.grading) throw std::invalid_argument("grading_plus_vector: representation has no grading");
  const ComplexMatrix& g = *rep.grading;
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    if (std::abs(g(i, i) - Complex(1.0, 0.0)) < 1e-12) {
      ComplexVector v = ComplexVector::Zero(g.rows());
      v(i) = 1.0;
      return v;
    }
  throw std::logic_error("grading_plus_vector: grading has no +1 diagonal entry");
}

CliffordAlgebra clifford_algebra(int n) {
  if (n < 0) throw std::invalid_argument("clifford_algebra: n must be nonnegative");
  CliffordAlgebra alg;
  alg.n = n;
  alg.dim = 1 << n;
  alg.grading = ComplexMatrix::Zero(alg.dim, alg.dim);
  for (int s = 0; s < alg.dim; ++s)
    alg.grading(s, s) = (std::popcount(unsigned(s)) % 2 == 0) ? 1.0 : -1.0;
  for (int k = 0; k < n; ++k) {
    ComplexMatrix lm = ComplexMatrix::Zero(alg.dim, alg.dim);
    for (int s = 0; s < alg.dim; ++s) {
      // Sign from moving X_k past the generators of e_S that precede it.
      const unsigned below = unsigned(s) & ((1u << k) - 1u);
      const double sign = (std::popcount(below) % 2 == 0) ? 1.0 : -1.0;
      if (s & (1 << k))
        lm(s ^ (1 << k), s) = -sign;  // X_k^2 = -1
      else
        lm(s | (1 << k), s) = sign;
    }
    alg.left_mult.push_back(std::move(lm));
  }
  return alg;
}

ComplexMatrix clifford_algebra_mul_vector(const CliffordAlgebra& alg, const RealVector& x) {
  if (x.size() != alg.n)
    throw DimensionMismatchError("clifford_algebra_mul_vector: vector length differs from n");
  ComplexMatrix out = ComplexMatrix::Zero(alg.dim, alg.dim);
  for (int k = 0; k < alg.n; ++k) out += x(k) * alg.left_mult[k];
  return out;
}

ComplexMatrix graded_tensor_iso(int a, int b) {
  const int da = 1 << a, db = 1 << b;
  ComplexMatrix w = ComplexMatrix::Zero(da * db, da * db);
  for (int s = 0; s < da; ++s)
    for (int t = 0; t < db; ++t) {
      const int in = s * db + t;            // e_S (x) e_T with the (x)-slow-first layout
      const int out = s | (t << a);         // subset of {1..a+b}: S, then T shifted past a
      const int ps = std::popcount(unsigned(s));
      const int pt = std::popcount(unsigned(t));
      w(out, in) = ((ps * pt) % 2 == 0) ? 1.0 : -1.0;
    }
  return w;
}

}  // namespace speclift
