// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "speclift/experiment.hpp"

using namespace speclift;

namespace {

int failures = 0;

struct Criterion {
  std::string label;
  std::function<std::string()> body;  // returns "" on pass, else the failing detail
  double time_limit_seconds = 0.0;    // 0 = no limit
};

void run_criterion(int number, const Criterion& criterion) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  try {
    detail = criterion.body();
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (detail.empty() && criterion.time_limit_seconds > 0.0 &&
      elapsed > criterion.time_limit_seconds)
    detail = "runtime " + std::to_string(elapsed) + "s exceeds " +
             std::to_string(criterion.time_limit_seconds) + "s";
  if (detail.empty()) {
    std::printf("criterion %2d: PASS  (%6.2fs)  %s\n", number, elapsed, criterion.label.c_str());
  } else {
    std::printf("criterion %2d: FAIL  (%6.2fs)  %s -- %s\n", number, elapsed,
                criterion.label.c_str(), detail.c_str());
    ++failures;
  }
  std::fflush(stdout);
}

std::string check(bool ok, const std::string& detail) { return ok ? "" : detail; }

ComplexMatrix cyclic_permutation(int n) {
  ComplexMatrix u = ComplexMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) u((i + 1) % n, i) = 1.0;
  return u;
}

RepresentedBase acceptance_base() {
  RepresentedBase base;
  base.hb_dim = 4;
  ComplexMatrix d = ComplexMatrix::Zero(4, 4);
  d(0, 0) = 0.5;
  d(1, 1) = -1.0;
  d(2, 2) = 2.0;
  d(3, 3) = 3.0;
  base.generators = {{"d", d}};
  return base;
}

RealMatrix generic_theta() {
  RealMatrix theta = RealMatrix::Zero(4, 4);
  for (int a : {0, 1})
    for (int b : {2, 3}) {
      theta(a, b) = 0.35 / 2.0;
      theta(b, a) = -0.35 / 2.0;
    }
  return theta;
}

std::string quantum_torus_config_json() {
  return R"({
  "kind": "quantum_torus",
  "windows": [3],
  "tolerance": 1e-10,
  "seed": 1,
  "base_radius": 1,
  "theta": [[0.0, 0.0, 0.175, 0.175],
            [0.0, 0.0, 0.175, 0.175],
            [-0.175, -0.175, 0.0, 0.0],
            [-0.175, -0.175, 0.0, 0.0]]
})";
}

// shared models, built once
struct Built {
  CrossedProductModel crossed;
  QuantumTorusModel qt_flat;
  QuantumTorusModel qt_generic;
};

Built* models = nullptr;

std::string criterion_clifford() {
  for (int n = 1; n <= 6; ++n)
    for (bool graded : {false, true}) {
      CliffordRep rep = build_clifford(n, graded);
      const ComplexMatrix one = identity_matrix(rep.spin_dim);
      for (int j = 0; j < n; ++j) {
        if (max_abs(rep.generators[j] + rep.generators[j].adjoint().eval()) != 0.0)
          return "generator " + std::to_string(j) + " not skew-adjoint at n=" + std::to_string(n);
        for (int k = 0; k < n; ++k) {
          ComplexMatrix anti = rep.generators[j] * rep.generators[k] +
                               rep.generators[k] * rep.generators[j];
          ComplexMatrix target = (j == k) ? ComplexMatrix(-2.0 * one)
                                          : ComplexMatrix(ComplexMatrix::Zero(one.rows(), one.cols()));
          if (max_abs(anti - target) != 0.0)
            return "anticommutator defect at n=" + std::to_string(n);
        }
      }
      if (graded) {
        const ComplexMatrix& g = *rep.grading;
        if (max_abs(g - g.adjoint().eval()) != 0.0 || max_abs(g * g - one) != 0.0)
          return "grading not a self-adjoint unitary at n=" + std::to_string(n);
        for (const auto& f : rep.generators)
          if (max_abs(g * f + f * g) != 0.0)
            return "grading fails to anticommute at n=" + std::to_string(n);
      }
    }
  return "";
}

std::string criterion_factor_system() {
  QuantumTorusSpec spec;
  spec.theta = generic_theta();
  spec.theta(0, 1) = 0.31;
  spec.theta(1, 0) = -0.31;
  spec.window_radius = 4;
  spec.base_radius = 1;
  QuantumTorusModel model = build_quantum_torus(spec, build_clifford(2, true));
  RepresentedBase scalar;
  scalar.hb_dim = int(model.base_u1.rows());
  scalar.generators = {{"u1", model.base_u1}, {"u2", model.base_u2}};
  FactorSystemVerifyOptions opts;
  opts.max_word_length = 2;
  FactorSystemReport report = verify_factor_system(model.fs_scalar, scalar, opts);
  if (report.range_identity > 1e-10)
    return "omega omega* deviation " + std::to_string(report.range_identity);
  if (report.support_identity > 1e-10)
    return "omega* omega deviation " + std::to_string(report.support_identity);
  if (report.covariance > 1e-10) return "covariance deviation " + std::to_string(report.covariance);
  if (report.cocycle_identity > 1e-10)
    return "cocycle identity deviation " + std::to_string(report.cocycle_identity) + " over " +
           std::to_string(report.triples_checked) + " triples";
  if (report.triples_checked < 1000) return "unexpectedly few triples checked";
  return "";
}

std::string criterion_crossed_spectrum() {
  const CrossedProductModel& model = models->crossed;
  std::vector<double> expect;
  for (int k = -8; k <= 8; ++k)
    for (double lambda : {0.5, -1.0, 2.0, 3.0}) {
      expect.push_back(std::sqrt(lambda * lambda + k * k));
      expect.push_back(-std::sqrt(lambda * lambda + k * k));
    }
  std::sort(expect.begin(), expect.end());
  RealVector got = model.assembled.full_spectrum();
  if (got.size() != Eigen::Index(expect.size())) return "spectrum size mismatch";
  double dev = 0.0;
  for (Eigen::Index i = 0; i < got.size(); ++i)
    dev = std::max(dev, std::abs(got(i) - expect[std::size_t(i)]));
  if (dev > 1e-10) return "closed-form spectrum deviation " + std::to_string(dev);
  if (model.spectra_deviation > 1e-12)
    return "generic vs mode-by-mode spectra deviation " + std::to_string(model.spectra_deviation);
  if (model.handcoded_alignment_residual > 1e-12)
    return "alignment residual " + std::to_string(model.handcoded_alignment_residual);
  return "";
}

std::string criterion_quantum_torus() {
  for (const QuantumTorusModel* model : {&models->qt_flat, &models->qt_generic}) {
    if (model->spectra_deviation > 1e-10)
      return "canonical spectrum deviation " + std::to_string(model->spectra_deviation);
    const ComplexMatrix& d2 = model->base_triple.dirac;
    for (const auto& name : {"u1", "u2"}) {
      const ComplexMatrix b = model->base_triple.base.generator(name);
      const double base_norm = op_norm(d2 * b - b * d2);
      for (const auto& label : model->fs.window.labels) {
        ComplexMatrix g = model->fs.coaction(label, b);
        const double twisted = op_norm(d2 * g - g * d2);
        if (std::abs(twisted - base_norm) > 1e-12)
          return "gauge invariance broken at label " + label.to_string();
      }
    }
  }
  return "";
}

std::string criterion_lift() {
  struct Item {
    const char* name;
    const AssembledTriple* triple;
    const BaseTriple* base;
  };
  const std::vector<Item> items = {
      {"crossed", &models->crossed.assembled, &models->crossed.base_triple},
      {"qtorus theta=0", &models->qt_flat.assembled, &models->qt_flat.base_triple},
      {"qtorus generic", &models->qt_generic.assembled, &models->qt_generic.base_triple},
  };
  for (const auto& item : items) {
    LiftReport report = check_lift(*item.triple, *item.base);
    if (report.dirac_deviation > 1e-12)
      return std::string(item.name) + ": ||D_A t - t D_B|| = " +
             std::to_string(report.dirac_deviation);
    if (report.rep_deviation > 1e-12)
      return std::string(item.name) + ": ||pi_A(b) t - t pi_B(b)|| = " +
             std::to_string(report.rep_deviation);
  }
  return "";
}

std::string criterion_vertical() {
  struct Item {
    const char* name;
    const AssembledTriple* triple;
    const FactorSystem* fs;
  };
  const std::vector<Item> items = {
      {"crossed", &models->crossed.assembled, &models->crossed.fs},
      {"qtorus theta=0", &models->qt_flat.assembled, &models->qt_flat.fs},
      {"qtorus generic", &models->qt_generic.assembled, &models->qt_generic.fs},
  };
  std::mt19937_64 gen(2024);
  for (const auto& item : items) {
    const auto& labels = item.triple->rep->labels;
    double residual = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const IrrepLabel& label = labels[gen() % labels.size()];
      ComplexMatrix b(item.fs->hb_dim, item.fs->hb_dim);
      for (Eigen::Index i = 0; i < b.rows(); ++i)
        for (Eigen::Index j = 0; j < b.cols(); ++j)
          b(i, j) = Complex(double(gen() >> 11) * 0x1.0p-53 - 0.5,
                            double(gen() >> 11) * 0x1.0p-53 - 0.5);
      AlgebraElement a = algebra_monomial(*item.fs, label, b, 0, 0);
      residual = std::max(residual, vertical_commutator(*item.triple, a).residual);
    }
    if (residual > 1e-10)
      return std::string(item.name) + ": vertical commutator residual " + std::to_string(residual);
    for (const auto& label : labels) {
      const IrrepData data = irrep_data(item.triple->rep->group, label);
      const CliffordRep& cliff = item.triple->cliff;
      ComplexMatrix core =
          ComplexMatrix::Zero(data.dim * cliff.spin_dim, data.dim * cliff.spin_dim);
      const auto derived = data.derived_conj();
      for (int k = 0; k < cliff.n; ++k) core += kron(derived[k], cliff.generators[k]);
      const int m = item.fs->mult_of(label);
      RealVector single = eig_hermitian(core, 1e-8).eigenvalues;
      std::vector<RealVector> copies(std::size_t(m), single);
      RealVector full =
          eig_hermitian(kron(identity_matrix(m), core), 1e-8).eigenvalues;
      if (spectra_distance(full, merge_spectra(copies)) > 1e-10)
        return std::string(item.name) + ": vertical decomposition fails at " + label.to_string();
    }
  }
  return "";
}

std::string criterion_compression() {
  std::mt19937_64 gen(7);
  auto uniform = [&gen] { return double(gen() >> 11) * 0x1.0p-53 - 0.5; };
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 4 + Eigen::Index(gen() % 13);  // up to 16
    ComplexMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(uniform(), uniform());
    ComplexMatrix d = 0.5 * (m + m.adjoint().eval());
    ComplexMatrix q(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) q(i, j) = Complex(uniform(), uniform());
    Eigen::HouseholderQR<ComplexMatrix> qr(q);
    ComplexMatrix unitary = qr.householderQ();
    const Eigen::Index rank = 1 + Eigen::Index(gen() % std::uint64_t(n));
    ComplexMatrix p = ComplexMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < rank; ++i) p += unitary.col(i) * unitary.col(i).adjoint();
    CompressionBoundReport report = check_compression_bound(d, p);
    if (report.identity_residual > 1e-12)
      return "pinching identity residual " + std::to_string(report.identity_residual) +
             " at trial " + std::to_string(trial);
    if (report.weyl_violations != 0)
      return std::to_string(report.weyl_violations) + " eigenvalue-shift bound violations";
  }
  return "";
}

std::string criterion_homogeneous_abelian() {
  HomogeneousSpec spec;
  spec.group = GroupModel::torus(2);
  spec.subgroup_direction = {1, 1};
  spec.window_radius = 6;
  HomogeneousTorusModel model = build_homogeneous_torus(spec);
  if (model.thm_horizontal_residual > 1e-10)
    return "horizontal comparison residual " + std::to_string(model.thm_horizontal_residual);
  if (model.thm_vertical_residual > 1e-10)
    return "vertical comparison residual " + std::to_string(model.thm_vertical_residual);
  if (model.remark_commutation_residual > 1e-10)
    return "correction fails to commute: " + std::to_string(model.remark_commutation_residual);
  if (model.cocycle_commutator_witness <= 0.01)
    return "expected a nonvanishing cocycle commutator witness";
  return "";
}

std::string criterion_homogeneous_su2() {
  HomogeneousSpec spec;
  spec.group = GroupModel::su2();
  spec.window_radius = 3;
  spec.quadrature_resolution = 24;
  Su2HomogeneousReport coarse = su2_homogeneous_report(spec, 2, 11);
  spec.quadrature_resolution = 48;
  Su2HomogeneousReport fine = su2_homogeneous_report(spec, 2, 11);
  std::printf("    su2 report: R=24 quad %.3e unit %.3e vert %.3e horiz %.3e central %.3e\n",
              coarse.quadrature_defect, coarse.unitarity_defect, coarse.thm_vertical_residual,
              coarse.thm_horizontal_residual, coarse.remark_commutation_residual);
  std::printf("    su2 report: R=48 quad %.3e unit %.3e vert %.3e horiz %.3e central %.3e\n",
              fine.quadrature_defect, fine.unitarity_defect, fine.thm_vertical_residual,
              fine.thm_horizontal_residual, fine.remark_commutation_residual);
  const double slack = 1e-12;
  if (fine.quadrature_defect > coarse.quadrature_defect + slack)
    return "quadrature defect did not decrease";
  if (fine.unitarity_defect > coarse.unitarity_defect + slack)
    return "unitarity defect did not decrease";
  if (fine.thm_vertical_residual > coarse.thm_vertical_residual + slack)
    return "vertical residual did not decrease";
  if (fine.thm_horizontal_residual > coarse.thm_horizontal_residual + slack)
    return "horizontal residual did not decrease";
  return "";
}

std::string criterion_classification() {
  RepresentedBase base;
  base.hb_dim = 4;
  ComplexMatrix d = ComplexMatrix::Zero(4, 4);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  d(2, 2) = -0.5;
  d(3, 3) = 0.25;
  base.generators = {{"d", d}};
  CyclicSystemSpec spec{base, cyclic_permutation(4), 4};
  IsometryFamily family = cyclic_crossed_family(spec);
  FactorSystem fs = factor_system_from_isometries(base, family);
  CovariantRep rep = build_covariant_rep(base, fs);

  std::map<IrrepLabel, ComplexMatrix> twists;
  twists[{{1}}] = Complex(std::cos(0.4), std::sin(0.4)) * identity_matrix(1);
  twists[{{2}}] = Complex(std::cos(1.1), std::sin(1.1)) * identity_matrix(1);
  twists[{{3}}] = Complex(std::cos(0.4), -std::sin(0.4)) * identity_matrix(1);
  IsometryFamily twisted = twist_family(family, twists);
  FactorSystem fs2 = factor_system_from_isometries(base, twisted);
  CovariantRep rep2 = build_covariant_rep(base, fs2);

  std::vector<AlgebraElement> gens_a, gens_b;
  AlgebraElement b0;
  b0.coeff[trivial_label(fs.group)] = d;
  gens_a.push_back(b0);
  gens_b.push_back(b0);
  gens_a.push_back(algebra_monomial(fs, {{1}}, identity_matrix(4), 0, 0));
  gens_b.push_back(algebra_monomial(
      fs2, {{1}}, ComplexMatrix(twists.at({{1}})(0, 0) * identity_matrix(4)), 0, 0));
  Classification result = classify_covariant_reps(rep, rep2, gens_a, gens_b);
  if (!result.equivalent) return "no intertwiner found: " + result.obstruction;
  if (result.residual > 1e-9) return "intertwiner residual " + std::to_string(result.residual);
  if (result.unitarity_defect > 1e-9)
    return "intertwiner unitarity defect " + std::to_string(result.unitarity_defect);
  return "";
}

std::string criterion_determinism() {
  ExperimentConfig config = parse_config(quantum_torus_config_json());
  ExperimentResult first = run_experiment(config);
  ExperimentResult second = run_experiment(config);
  if (spectrum_csv(first.spectrum) != spectrum_csv(second.spectrum))
    return "CSV output differs between runs";
  if (report_json(config, first) != report_json(config, second))
    return "JSON report differs between runs";
  return "";
}

}  // namespace

int main() {
  tune_allocator();
  Built built{
      [] {
        RepresentedBase base = acceptance_base();
        CrossedProductSpec spec{base, cyclic_permutation(4), 8};
        BaseTriple triple{base, base.generator("d"), {}};
        return build_crossed_product(spec, triple, build_clifford(1, true));
      }(),
      [] {
        QuantumTorusSpec spec;
        spec.theta = RealMatrix::Zero(4, 4);
        spec.window_radius = 3;
        spec.base_radius = 1;
        return build_quantum_torus(spec, build_clifford(2, true));
      }(),
      [] {
        QuantumTorusSpec spec;
        spec.theta = generic_theta();
        spec.window_radius = 3;
        spec.base_radius = 1;
        return build_quantum_torus(spec, build_clifford(2, true));
      }(),
  };
  models = &built;

  run_criterion(1, {"Clifford relations exact for n = 1..6", criterion_clifford, 1.0});
  run_criterion(2, {"factor-system identities, quantum torus N=4", criterion_factor_system, 10.0});
  run_criterion(3, {"crossed-product spectrum, N=8", criterion_crossed_spectrum, 5.0});
  run_criterion(4, {"quantum 4-torus vs canonical operator, N=3", criterion_quantum_torus, 60.0});
  run_criterion(5, {"lift identities on every built example", criterion_lift, 0.0});
  run_criterion(6, {"vertical identities on 100 random elements", criterion_vertical, 0.0});
  run_criterion(7, {"compression identity and eigenvalue bound, 200 pairs", criterion_compression,
                    0.0});
  run_criterion(8, {"homogeneous two-torus over the diagonal circle, N=6",
                    criterion_homogeneous_abelian, 30.0});
  run_criterion(9, {"homogeneous SU2, quadrature 24 -> 48 (report only)",
                    criterion_homogeneous_su2, 600.0});
  run_criterion(10, {"classification across twisted isometry choices", criterion_classification,
                     0.0});
  run_criterion(11, {"byte-identical outputs across repeated runs", criterion_determinism, 0.0});

  if (failures == 0)
    std::printf("acceptance: all criteria passed\n");
  else
    std::printf("acceptance: %d criteria failed\n", failures);
  return failures;
}
