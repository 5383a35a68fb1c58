#ifndef SPECLIFT_MODELS_HPP
#define SPECLIFT_MODELS_HPP

#include <memory>

#include "speclift/dirac_lift.hpp"

namespace speclift {

struct AutomorphismInvalidError : std::runtime_error {
  explicit AutomorphismInvalidError(const std::string& what) : std::runtime_error(what) {}
};
struct BadThetaError : std::runtime_error {
  explicit BadThetaError(const std::string& what) : std::runtime_error(what) {}
};
struct UnsupportedSubgroupError : std::runtime_error {
  explicit UnsupportedSubgroupError(const std::string& what) : std::runtime_error(what) {}
};
struct ResolutionTooLowError : std::runtime_error {
  explicit ResolutionTooLowError(const std::string& what) : std::runtime_error(what) {}
};

// ----------------------------------------------------------- crossed products

/// B rtimes_alpha Z with its dual circle action, truncated to |k| <= radius.
/// alpha acts by conjugation with a unitary.
struct CrossedProductSpec {
  RepresentedBase base;
  ComplexMatrix alpha_unitary;
  int window_radius = 4;
};

struct CrossedProductModel {
  GroupModel group;
  IsometryFamily family;
  FactorSystem fs;
  std::shared_ptr<CovariantRep> rep;
  BaseTriple base_triple;
  AssembledTriple assembled;
  /// The closed-form blocks D_B (x) s1 + k (x) s2 per mode.
  std::map<IrrepLabel, ComplexMatrix> handcoded_block;
  double handcoded_alignment_residual = 0.0;
  double spectra_deviation = 0.0;
};

CrossedProductModel build_crossed_product(const CrossedProductSpec& spec,
                                          const BaseTriple& triple, const CliffordRep& cliff);

/// Finite-group variant: B rtimes_alpha Z_n with its dual Cyclic(n) action,
/// alpha of order n.  Everything is exact (no truncation).
struct CyclicSystemSpec {
  RepresentedBase base;
  ComplexMatrix alpha_unitary;
  int order = 4;
};

IsometryFamily cyclic_crossed_family(const CyclicSystemSpec& spec);

/// A second isometry choice differing by fixed unitaries on the multiplicity
/// spaces (phases when m = 1).
IsometryFamily twist_family(const IsometryFamily& family,
                            const std::map<IrrepLabel, ComplexMatrix>& twists);

// ----------------------------------------------------------- quantum 4-tori

struct QuantumTorusSpec {
  RealMatrix theta;     // 4x4 skew-symmetric
  int window_radius = 3;  // Fourier box for the acting coordinates (3,4)
  int base_radius = 2;    // Fourier box for the fixed coordinates (1,2)
};

struct QuantumTorusModel {
  GroupModel group;
  IsometryFamily family;  // scalar level (no base spinors)
  FactorSystem fs_scalar;
  FactorSystem fs;  // amplified by the base spinor leg
  BaseTriple base_triple;
  std::shared_ptr<CovariantRep> rep;
  AssembledTriple assembled;
  RealVector canonical_spectrum;  // direct Fourier-multiplier Dirac on matching boxes
  double spectra_deviation = 0.0;
  ComplexMatrix base_u1, base_u2;  // scalar GNS generators on the base box
};

QuantumTorusModel build_quantum_torus(const QuantumTorusSpec& spec, const CliffordRep& cliff);

// ----------------------------------------------------------- homogeneous spaces

/// G/H data: for Torus(2) the subgroup is the circle through an integer
/// direction; for SU2 it is the diagonal U(1).
struct HomogeneousSpec {
  GroupModel group;
  std::vector<int> subgroup_direction;  // torus only; must be primitive
  int window_radius = 4;                // mode box (torus) or top spin 2J (su2)
  int quadrature_resolution = 24;       // su2 only
};

struct FrameField {
  std::vector<GroupPoint> points;
  std::vector<RealMatrix> ad;
  std::vector<std::vector<RealVector>> horizontal;  // Y_k(g)
  std::vector<std::vector<RealVector>> vertical;    // Z_k(g)
};

FrameField frame_field(const HomogeneousSpec& spec, const std::vector<GroupPoint>& points);

/// Exact Fourier model for the abelian case.  All operators are dense matrices
/// on the mode box tensor the Clifford-algebra fiber.
struct HomogeneousTorusModel {
  HomogeneousSpec spec;
  Eigen::Index dim = 0;
  ComplexMatrix d_h, d_v;          // frame split of the canonical operator
  ComplexMatrix dhat_h, dhat_v;    // lifted horizontal and vertical parts
  ComplexMatrix u;                 // the comparison unitary
  ComplexMatrix correction;        // Sum_k F_{Y_k} (d_{Y_k} U) U*
  double thm_horizontal_residual = 0.0;  // D_h = U Dhat_h U* + correction
  double thm_vertical_residual = 0.0;    // D_v = U Dhat_v U*
  double remark_commutation_residual = 0.0;
  double unitarity_defect = 0.0;
  double cocycle_commutator_witness = 0.0;  // ||[D_{G/H} (x) 1, p(sigma)]|| sample
  std::vector<double> line_means;           // window means of k.y along the fibers
};

HomogeneousTorusModel build_homogeneous_torus(const HomogeneousSpec& spec);

/// Quadrature realization for SU2 / diagonal U(1); residuals are measured on
/// sampled vectors and are resolution dependent.
struct Su2HomogeneousReport {
  int resolution = 0;
  double quadrature_defect = 0.0;
  double unitarity_defect = 0.0;
  double thm_horizontal_residual = 0.0;
  double thm_vertical_residual = 0.0;
  double remark_commutation_residual = 0.0;
};

Su2HomogeneousReport su2_homogeneous_report(const HomogeneousSpec& spec, int samples = 2,
                                            std::uint64_t seed = 11);

}  // namespace speclift

#endif
