#ifndef SPECLIFT_DIRAC_LIFT_HPP
#define SPECLIFT_DIRAC_LIFT_HPP

#include <memory>
#include <string>
#include <vector>

#include "speclift/clifford.hpp"
#include "speclift/free_systems.hpp"

namespace speclift {

struct GradingMissingError : std::runtime_error {
  explicit GradingMissingError(const std::string& what) : std::runtime_error(what) {}
};
struct NotAGradingError : std::runtime_error {
  explicit NotAGradingError(const std::string& what) : std::runtime_error(what) {}
};
struct InsufficientDataError : std::runtime_error {
  explicit InsufficientDataError(const std::string& what) : std::runtime_error(what) {}
};

/// A spectral triple on the fixed-point algebra at truncation scale: the base
/// representation together with a Hermitian matrix.
struct BaseTriple {
  RepresentedBase base;
  ComplexMatrix dirac;
  std::vector<std::string> smooth_generators;  // empty means all
};

/// Blockwise compression D_sigma of D_B (x) 1 to the ranges of the p(sigma).
struct HorizontalLift {
  std::vector<IrrepLabel> labels;
  std::map<IrrepLabel, ComplexMatrix> block;  // on the rank leg of each label
};

HorizontalLift horizontal_lift(const BaseTriple& triple, const CovariantRep& rep);

/// The group-direction Dirac operator: per label the matrix
/// Sum_k dsigma_conj(X_k) (x) F_k on conj(V_sigma) (x) H_spin, amplified by the
/// multiplicity leg.  Zero on the trivial label.
struct VerticalDirac {
  std::vector<IrrepLabel> labels;
  int spin_dim = 1;
  std::map<IrrepLabel, ComplexMatrix> core;  // on conj(V) (x) spin
};

VerticalDirac vertical_dirac(const GroupModel& g, const CovariantRep& rep,
                             const CliffordRep& cliff);

/// The assembled operator D_A = D_h (x) gamma_spin + D_v-hat on
/// H_A = p(H_B (x) H (x) H_spin), blockwise over window labels with block space
/// range(p(sigma)) (x) conj(V_sigma) (x) H_spin.
struct AssembledTriple {
  std::shared_ptr<const CovariantRep> rep;
  CliffordRep cliff;
  BaseTriple base;
  std::shared_ptr<const BlockIndex> index;
  std::map<IrrepLabel, ComplexMatrix> dirac_block;
  ComplexVector spin_vector;  // the spinor factor of the lift isometry

  ComplexMatrix lift_isometry() const;  // t : H_B -> H_A
  BlockOperator dirac_operator() const;
  /// pi_A(a) amplified by 1 on the spin leg.
  BlockOperator represent_element(const AlgebraElement& a) const;
  RealVector block_spectrum(const IrrepLabel& l) const;
  RealVector full_spectrum() const;
};

/// Odd assembly: D_A = D_h (x) gamma_spin + D_v-hat with the lift spinor a
/// +1 eigenvector of the grading.
AssembledTriple assemble(const HorizontalLift& h, const VerticalDirac& v,
                         const CliffordRep& cliff, std::shared_ptr<const CovariantRep> rep,
                         const BaseTriple& base);

/// Even assembly D' = D_B (x) 1 + gamma_B (x) D_v for a base grading gamma_B
/// that commutes with the represented base and anticommutes with D_B.
AssembledTriple assemble_even(const HorizontalLift& h, const VerticalDirac& v,
                              const ComplexMatrix& gamma_b,
                              std::shared_ptr<const CovariantRep> rep, const BaseTriple& base,
                              const CliffordRep& cliff);

struct CommutatorProfile {
  std::string name;
  IrrepLabel sigma;
  std::vector<std::pair<IrrepLabel, double>> gamma_rows;  // ||[D_B (x) 1, gamma_tau(b)]||
  std::vector<std::pair<IrrepLabel, double>> omega_rows;  // ||[D_B (x) 1, omega gamma_tau(b)_13]||
  std::vector<std::pair<int, double>> sup_growth;         // nested-radius sups
  double total_commutator = 0.0;                          // ||[D_A, pi_A(a)]||
};

struct CommutatorReport {
  std::vector<CommutatorProfile> profiles;
};

CommutatorReport commutator_report(const AssembledTriple& t,
                                   const std::vector<std::pair<std::string, AlgebraElement>>& elements,
                                   const std::vector<int>& nested_radii = {2, 4, 8});

struct VerticalCommutatorResult {
  BlockOperator lhs;  // [D_v-hat, pi_A(a)]
  BlockOperator rhs;  // Sum_k pi_A(derivative_k a) (x) F_k
  double residual = 0.0;
};

VerticalCommutatorResult vertical_commutator(const AssembledTriple& t, const AlgebraElement& a);

struct LiftReport {
  double dirac_deviation = 0.0;  // ||D_A t - t D_B||
  double rep_deviation = 0.0;    // max over smooth generators of ||pi_A(b) t - t pi_B(b)||
};

LiftReport check_lift(const AssembledTriple& t, const BaseTriple& base);

struct CompressionBoundReport {
  double identity_residual = 0.0;   // p D p + (1-p) D (1-p) = D + [[D,p],(1-p)]
  double commutator_norm = 0.0;     // ||[[D,p],(1-p)]||
  double max_eigenvalue_shift = 0.0;
  int weyl_violations = 0;          // eigenvalue shifts exceeding the bound
};

CompressionBoundReport check_compression_bound(const ComplexMatrix& d, const ComplexMatrix& p,
                                               double tol = 1e-10);

struct SpectrumGrowthReport {
  struct WindowRow {
    int size = 0;
    Eigen::Index dimension = 0;
    std::vector<std::pair<double, Eigen::Index>> multiplicities;  // clustered eigenvalues
    std::vector<std::pair<double, Eigen::Index>> counting;        // N(Lambda) samples
  };
  std::vector<WindowRow> windows;
  std::vector<double> stabilization_thresholds;  // per consecutive pair
  std::vector<double> stabilization_deviation;   // low-lying spectra agreement
};

SpectrumGrowthReport spectrum_growth_report(
    const std::vector<std::pair<int, const AssembledTriple*>>& family, double cluster_tol = 1e-9);

}  // namespace speclift

#endif
