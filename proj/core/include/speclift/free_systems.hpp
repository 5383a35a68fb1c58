#ifndef SPECLIFT_FREE_SYSTEMS_HPP
#define SPECLIFT_FREE_SYSTEMS_HPP

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "speclift/groups.hpp"
#include "speclift/linalg.hpp"

namespace speclift {

struct FreenessViolationError : std::runtime_error {
  explicit FreenessViolationError(const std::string& what) : std::runtime_error(what) {}
};
struct WindowOverflowError : std::runtime_error {
  explicit WindowOverflowError(const std::string& what) : std::runtime_error(what) {}
};
struct ShapeMismatchError : std::runtime_error {
  explicit ShapeMismatchError(const std::string& what) : std::runtime_error(what) {}
};
struct NotComparableError : std::runtime_error {
  explicit NotComparableError(const std::string& what) : std::runtime_error(what) {}
};

/// The fixed-point algebra represented on H_B: named generator matrices.
/// Words are formed on demand; the unit is implicit.
struct RepresentedBase {
  int hb_dim = 0;
  std::vector<std::pair<std::string, ComplexMatrix>> generators;

  ComplexMatrix unit() const { return ComplexMatrix::Identity(hb_dim, hb_dim); }
  const ComplexMatrix& generator(const std::string& name) const;
};

/// A family of equivariance isometries s(sigma) over a concrete covariant
/// representation on H_A, given matrix-free.  Leg order is always
/// (H_A, V_sigma) for domains and (H_A, C^{m_sigma}) for codomains, slow first.
struct IsometryFamily {
  GroupModel group;
  TruncationWindow window;  // isometries exist for every margin label
  Eigen::Index ha_dim = 0;
  Eigen::Index hb_dim = 0;
  ComplexMatrix embed_base;  // ha x hb isometry onto the trivial isotypic slot

  std::map<IrrepLabel, int> mult;  // m_sigma = dim H_sigma

  std::function<ComplexVector(const IrrepLabel&, const ComplexVector&)> apply_s;
  std::function<ComplexVector(const IrrepLabel&, const ComplexVector&)> apply_s_adj;
  /// pi(b) on H_A from the matrix of b on H_B.
  std::function<ComplexVector(const ComplexMatrix&, const ComplexVector&)> apply_base;
  std::function<ComplexVector(const GroupPoint&, const ComplexVector&)> apply_u;
  std::function<ComplexVector(const GroupPoint&, const ComplexVector&)> apply_u_inv;

  /// H_A basis vectors unaffected by window truncation for s(sigma) chains.
  std::function<std::vector<char>(const IrrepLabel&)> interior_mask;
  /// H_B basis vectors on which generator words up to the given length act exactly.
  std::function<std::vector<char>(int)> base_interior;

  std::vector<GroupPoint> sample_points;
};

struct FreenessRow {
  IrrepLabel label;
  double isometry_deviation = 0.0;
  double equivariance_deviation = 0.0;
  Eigen::Index columns_checked = 0;
  Eigen::Index interior_columns = 0;
  Eigen::Index boundary_columns = 0;
};

struct FreenessReport {
  std::vector<FreenessRow> rows;
  double max_isometry_deviation = 0.0;
  double max_equivariance_deviation = 0.0;

  bool pass(double tol) const {
    return max_isometry_deviation <= tol && max_equivariance_deviation <= tol;
  }
};

/// Verifies s(sigma)* s(sigma) = 1 and alpha_g(s(sigma)) = s(sigma)(1 (x) sigma_g)
/// on interior columns; at most `max_columns` columns per label are sampled.
FreenessReport check_freeness(const IsometryFamily& family, Eigen::Index max_columns = 256);

/// Coactions and cocycles of a factor system, concrete at the H_B level.
/// Only abelian structure groups are supported here; the coaction is a linear
/// map End(H_B) -> End(H_B (x) C^{m_sigma}) and the cocycle for a label pair is
/// a matrix (hb * m_{sigma tau}) x (hb * m_sigma * m_tau).
struct FactorSystem {
  GroupModel group;
  TruncationWindow window;
  Eigen::Index hb_dim = 0;
  std::map<IrrepLabel, int> mult;

  std::function<ComplexMatrix(const IrrepLabel&, const ComplexMatrix&)> coaction;
  std::function<ComplexMatrix(const IrrepLabel&, const IrrepLabel&)> cocycle;
  std::function<std::vector<char>(int)> base_interior;  // optional; defaults to all

  int mult_of(const IrrepLabel& l) const;
  ComplexMatrix projection(const IrrepLabel& l) const;  // p(sigma) = gamma_sigma(1)

  /// The same factor system acting on H_B (x) C^s, with the extra leg untouched.
  /// Used when the base Hilbert space carries its own spinor legs.
  FactorSystem amplified(int extra_dim) const;
};

/// Extracts gamma_sigma(b) = s(sigma)(b (x) 1)s(sigma)* and
/// omega(sigma,tau) = s(sigma tensor tau)s(sigma)*s(tau)* through the family,
/// compressed to the trivial isotypic slot.  Runs check_freeness first and
/// throws FreenessViolationError when deviations exceed `tol`.
FactorSystem factor_system_from_isometries(const RepresentedBase& base,
                                           const IsometryFamily& family, double tol = 1e-9);

struct FactorSystemReport {
  double range_identity = 0.0;     // omega omega* = gamma_{sigma tau}(1)
  double support_identity = 0.0;   // omega* omega = (gamma_tau)_13(gamma_sigma(1))
  double covariance = 0.0;         // gamma_{sigma tau}(b) omega = omega (gamma_tau)_13(gamma_sigma(b))
  double cocycle_identity = 0.0;   // omega(s,t r) omega(t,r)_134 = omega(s t,r)(gamma_r)_14(omega(s,t))
  double hom_multiplicative = 0.0; // gamma(b c) = gamma(b) gamma(c)
  double hom_adjoint = 0.0;        // gamma(b*) = gamma(b)*
  double unit_projection = 0.0;    // p(sigma)^2 = p(sigma) = p(sigma)*
  Eigen::Index pairs_checked = 0;
  Eigen::Index triples_checked = 0;

  double worst() const;
  bool pass(double tol) const { return worst() <= tol; }
};

struct FactorSystemVerifyOptions {
  int max_word_length = 6;
  int word_samples = 24;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency
};

FactorSystemReport verify_factor_system(const FactorSystem& fs, const RepresentedBase& base,
                                        const FactorSystemVerifyOptions& opts = {});

/// Elements of the lifted smooth algebra: finitely many labels sigma, each with
/// a coefficient map H_B -> H_B (x) C^{m_sigma} (x) conj(V_sigma), stored as a
/// (hb * m * d) x hb matrix with row index ((i*m + q)*d + r).
struct AlgebraElement {
  std::map<IrrepLabel, ComplexMatrix> coeff;

  AlgebraElement& operator+=(const AlgebraElement& other);
};

AlgebraElement algebra_unit(const FactorSystem& fs);
AlgebraElement algebra_monomial(const FactorSystem& fs, const IrrepLabel& label,
                                const ComplexMatrix& b, int mult_index, int conj_index);
AlgebraElement algebra_scaled(const AlgebraElement& a, const Complex& z);
/// alpha_g: hits the conj(V_sigma) leg with conj(sigma_g).
AlgebraElement algebra_translate(const FactorSystem& fs, const AlgebraElement& a,
                                 const GroupPoint& g);

AlgebraElement multiply(const AlgebraElement& a, const AlgebraElement& b, const FactorSystem& fs);

/// Shared block index of an H_p-style space: one block per window label.
struct BlockIndex {
  std::vector<IrrepLabel> labels;
  std::vector<Eigen::Index> dims;
  std::vector<Eigen::Index> offsets;
  Eigen::Index total = 0;

  int find(const IrrepLabel& l) const;
  static std::shared_ptr<BlockIndex> make(std::vector<IrrepLabel> labels,
                                          std::vector<Eigen::Index> dims);
};

/// Block-sparse operator over a pair of BlockIndex maps.
struct BlockOperator {
  std::shared_ptr<const BlockIndex> rows, cols;
  std::map<std::pair<int, int>, ComplexMatrix> blocks;

  static BlockOperator zero(std::shared_ptr<const BlockIndex> rows,
                            std::shared_ptr<const BlockIndex> cols);
  static BlockOperator block_diagonal(std::shared_ptr<const BlockIndex> index,
                                      const std::map<IrrepLabel, ComplexMatrix>& diag);

  void add_block(int row, int col, const ComplexMatrix& m);
  BlockOperator operator*(const BlockOperator& other) const;
  BlockOperator operator+(const BlockOperator& other) const;
  BlockOperator operator-(const BlockOperator& other) const;
  BlockOperator adjoint() const;
  BlockOperator scaled(const Complex& z) const;
  /// Tensor each block with a fixed matrix on a trailing leg (spin amplification).
  BlockOperator amplified(const ComplexMatrix& trailing,
                          std::shared_ptr<const BlockIndex> new_rows,
                          std::shared_ptr<const BlockIndex> new_cols) const;
  ComplexVector apply(const ComplexVector& v) const;
  ComplexMatrix to_dense() const;
  double norm() const;     // operator norm of the active part
  double max_block_norm() const;  // max over blocks of the block operator norm
  double max_entry() const;
};

/// The lifted covariant representation on H_p = p(H_B (x) H), blockwise over
/// window labels; each block is p(sigma)(H_B (x) C^m) (x) conj(V_sigma).
struct CovariantRep {
  GroupModel group;
  TruncationWindow window;
  Eigen::Index hb_dim = 0;
  std::shared_ptr<const FactorSystem> fs;
  std::vector<IrrepLabel> labels;                 // ordered
  std::map<IrrepLabel, int> mult;
  std::map<IrrepLabel, ComplexMatrix> p_block;    // on H_B (x) C^m
  std::map<IrrepLabel, ComplexMatrix> range_basis;  // (hb*m) x rank
  std::shared_ptr<const BlockIndex> index;        // dims rank * d_sigma

  Eigen::Index rank_of(const IrrepLabel& l) const;
  /// u_A(g) restricted to a label block: 1_rank (x) conj(sigma_g).
  ComplexMatrix u_block(const IrrepLabel& l, const GroupPoint& g) const;
  BlockOperator u_operator(const GroupPoint& g) const;
  /// The isometry t : H_B -> H_p onto the trivial block.
  ComplexMatrix trivial_embedding() const;
};

CovariantRep build_covariant_rep(const RepresentedBase& base, const FactorSystem& fs);

/// pi_A(a) as a block operator on H_p.
BlockOperator represent(const AlgebraElement& a, const CovariantRep& rep);

/// Involution through the represented adjoint: coefficients of a* are read off
/// the trivial-block rows of pi_A(a).
AlgebraElement involution(const AlgebraElement& a, const FactorSystem& fs,
                          const CovariantRep& rep);

struct SaturationReport {
  IrrepLabel label;
  Eigen::Index span_rank = 0;
  Eigen::Index block_dim = 0;
  Eigen::Index deficiency = 0;
  bool label_on_window_boundary = false;
};

/// Rank of span{ pi_A(a) t(xi) : a in A_0(sigma), xi in H_B } against the
/// sigma-block dimension.
SaturationReport isotypic_saturation_check(const CovariantRep& rep, const RepresentedBase& base,
                                           const IrrepLabel& sigma, int max_word_length = 3);

struct Classification {
  bool equivalent = false;
  double residual = 0.0;
  double unitarity_defect = 0.0;
  std::string obstruction;
  std::map<IrrepLabel, ComplexMatrix> intertwiner;  // phi_sigma on the rank leg
};

/// Searches for a unitary Phi with Phi pi = pi' Phi and Phi u = u' Phi, block
/// diagonal over labels with Phi_sigma = phi_sigma (x) 1_{V}.  Coefficients are
/// coordinates relative to each instance's isometries, so the two generator
/// lists must describe the same abstract elements entrywise.
Classification classify_covariant_reps(const CovariantRep& rep_a, const CovariantRep& rep_b,
                                       const std::vector<AlgebraElement>& generators_a,
                                       const std::vector<AlgebraElement>& generators_b,
                                       double tol = 1e-9, std::uint64_t seed = 5);

}  // namespace speclift

#endif
