#ifndef SPECLIFT_GROUPS_HPP
#define SPECLIFT_GROUPS_HPP

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "speclift/linalg.hpp"

namespace speclift {

struct UnsupportedGroupError : std::runtime_error {
  explicit UnsupportedGroupError(const std::string& what) : std::runtime_error(what) {}
};
struct OutOfWindowError : std::runtime_error {
  explicit OutOfWindowError(const std::string& what) : std::runtime_error(what) {}
};

enum class GroupKind { Torus, Cyclic, SU2 };

/// A compact structure group.  Group elements are always passed in coordinates:
/// Torus(d): d angles; Cyclic(n): a generator power; SU2: Euler angles (a, b, c)
/// meaning exp(a X3) exp(b X2) exp(c X3).
struct GroupModel {
  GroupKind kind = GroupKind::Torus;
  int param = 1;  // d for Torus, n for Cyclic, unused for SU2

  int lie_dim() const {
    switch (kind) {
      case GroupKind::Torus: return param;
      case GroupKind::Cyclic: return 0;
      case GroupKind::SU2: return 3;
    }
    return 0;
  }
  bool abelian() const { return kind != GroupKind::SU2; }

  static GroupModel torus(int d) { return {GroupKind::Torus, d}; }
  static GroupModel cyclic(int n) { return {GroupKind::Cyclic, n}; }
  static GroupModel su2() { return {GroupKind::SU2, 0}; }
};

struct GroupPoint {
  std::vector<double> coords;
};

/// Irrep labels: Torus: integer vector k; Cyclic(n): residue mod n; SU2: twice the spin.
struct IrrepLabel {
  std::vector<int> data;

  auto operator<=>(const IrrepLabel&) const = default;
  std::string to_string() const;
};

IrrepLabel trivial_label(const GroupModel& g);
IrrepLabel conjugate_label(const GroupModel& g, const IrrepLabel& s);
/// Product label for abelian groups (the unique branch of the tensor product).
IrrepLabel product_label(const GroupModel& g, const IrrepLabel& a, const IrrepLabel& b);

/// Sampled irrep matrices and Lie-algebra derived representations.
/// Torus characters k are sampled as exp(i k.t) with d sigma(X_j) = i k_j;
/// SU2 uses the spin-j matrices with d sigma(X_k) = i J_k.
struct IrrepData {
  GroupModel group;
  IrrepLabel label;
  int dim = 1;
  std::vector<ComplexMatrix> derived;

  ComplexMatrix sample(const GroupPoint& g) const;
  /// Matrices of the conjugate representation: entrywise conjugates.
  ComplexMatrix sample_conj(const GroupPoint& g) const;
  std::vector<ComplexMatrix> derived_conj() const;
};

IrrepData irrep_data(const GroupModel& g, const IrrepLabel& label);

/// A finite, conjugation-closed label set standing in for the Peter-Weyl sum,
/// together with the larger margin reachable by one more tensor product.
struct TruncationWindow {
  std::vector<IrrepLabel> labels;
  std::vector<IrrepLabel> margin;  // superset of labels

  bool contains(const IrrepLabel& l) const;
  bool in_margin(const IrrepLabel& l) const;
  int index_of(const IrrepLabel& l) const;  // -1 when absent

  /// Torus: box |k_i| <= radius with margin radius+1; Cyclic: all residues;
  /// SU2: spins 2j <= 2*radius with margin one generator step wider.
  static TruncationWindow box(const GroupModel& g, int radius);
  static TruncationWindow box(const GroupModel& g, int radius, int margin_radius);
};

std::vector<IrrepData> irreps(const GroupModel& g, const TruncationWindow& w);

/// One branch of a tensor-product decomposition: an isometric intertwiner
/// V_rho -> V_sigma (x) V_tau (rows indexed (a_sigma * d_tau + a_tau)).
struct TensorBranch {
  IrrepLabel label;
  ComplexMatrix intertwiner;
};

std::vector<TensorBranch> tensor_decompose(const GroupModel& g, const IrrepLabel& s,
                                           const IrrepLabel& t);
/// Window-checked variant: throws OutOfWindowError when an input is outside the margin.
std::vector<TensorBranch> tensor_decompose(const GroupModel& g, const IrrepLabel& s,
                                           const IrrepLabel& t, const TruncationWindow& w);

double clebsch_gordan(int twoj1, int twom1, int twoj2, int twom2, int twoj, int twom);

/// Block description of L^2(G) truncated to a window: basis ordered by label with
/// each block V_sigma (x) conj(V_sigma); left translation acts on the second leg,
/// right translation on the first.
struct RegularBlocks {
  std::vector<IrrepLabel> labels;
  std::vector<int> dims;              // d_sigma
  std::vector<Eigen::Index> offsets;  // block start, block size d_sigma^2
  Eigen::Index total = 0;

  ComplexMatrix left_translation(const GroupModel& g, const GroupPoint& p) const;
  ComplexMatrix right_translation(const GroupModel& g, const GroupPoint& p) const;
};

RegularBlocks left_regular_blocks(const GroupModel& g, const TruncationWindow& w);

struct HaarQuadrature {
  std::vector<GroupPoint> points;
  std::vector<double> weights;  // positive, summing to 1
  /// Max deviation of the quadrature character Gram from identity over a small label set.
  double orthogonality_defect = 0.0;
};

HaarQuadrature haar_quadrature(const GroupModel& g, int resolution);

}  // namespace speclift

#endif
