#include "speclift/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"

namespace speclift {

namespace {

using nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void push_check(ExperimentResult& out, std::string name, std::string identity, double deviation,
                double tolerance, bool report_only = false, Eigen::Index interior = 0,
                Eigen::Index boundary = 0) {
  CheckResult c;
  c.name = std::move(name);
  c.identity = std::move(identity);
  c.deviation = deviation;
  c.tolerance = tolerance;
  c.report_only = report_only;
  c.passed = report_only || deviation <= tolerance;
  c.interior = interior;
  c.boundary = boundary;
  out.checks.push_back(std::move(c));
}

void append_spectrum(ExperimentResult& out, int window, const AssembledTriple& triple,
                     double cluster_tol = 1e-9) {
  for (const auto& label : triple.rep->labels) {
    RealVector spec = triple.block_spectrum(label);
    int index = 0;
    Eigen::Index i = 0;
    while (i < spec.size()) {
      Eigen::Index j = i;
      while (j + 1 < spec.size() && spec(j + 1) - spec(i) <= cluster_tol) ++j;
      SpectrumRow row;
      row.window = window;
      row.label = label.to_string();
      row.index = index++;
      row.eigenvalue = spec(i);
      row.multiplicity = j - i + 1;
      out.spectrum.push_back(std::move(row));
      i = j + 1;
    }
  }
}

RepresentedBase base_from_diagonal(const std::vector<double>& diagonal) {
  if (diagonal.empty()) throw ConfigError("base_diagonal: must be a nonempty array of numbers");
  RepresentedBase base;
  base.hb_dim = int(diagonal.size());
  ComplexMatrix d = ComplexMatrix::Zero(base.hb_dim, base.hb_dim);
  for (int i = 0; i < base.hb_dim; ++i) d(i, i) = diagonal[std::size_t(i)];
  base.generators = {{"d", d}};
  return base;
}

ComplexMatrix automorphism_unitary(const ExperimentConfig& config, int n) {
  if (config.automorphism == "identity") return ComplexMatrix::Identity(n, n);
  if (config.automorphism == "cyclic") {
    ComplexMatrix u = ComplexMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) u((i + 1) % n, i) = 1.0;
    return u;
  }
  throw ConfigError("automorphism: expected \"cyclic\" or \"identity\"");
}

void factor_system_checks(ExperimentResult& out, const FactorSystem& fs,
                          const RepresentedBase& base, double tol, std::uint64_t seed,
                          const std::string& prefix) {
  FactorSystemVerifyOptions opts;
  opts.seed = seed;
  FactorSystemReport rep = verify_factor_system(fs, base, opts);
  push_check(out, prefix + ".projections", "p(sigma)^2 = p(sigma) = p(sigma)*",
             rep.unit_projection, tol);
  push_check(out, prefix + ".cocycle_range", "omega omega* = gamma_{sigma tensor tau}(1)",
             rep.range_identity, tol, false, rep.pairs_checked);
  push_check(out, prefix + ".cocycle_support", "omega* omega = (gamma_tau)_13(gamma_sigma(1))",
             rep.support_identity, tol, false, rep.pairs_checked);
  push_check(out, prefix + ".covariance",
             "gamma_{sigma tensor tau}(b) omega = omega (gamma_tau)_13(gamma_sigma(b))",
             rep.covariance, tol, false, rep.pairs_checked);
  push_check(out, prefix + ".cocycle_identity",
             "omega(sigma, tau rho) omega(tau, rho)_134 = "
             "omega(sigma tau, rho) (gamma_rho)_14(omega(sigma, tau))",
             rep.cocycle_identity, tol, false, rep.triples_checked);
  push_check(out, prefix + ".hom_mult", "gamma_sigma(b c) = gamma_sigma(b) gamma_sigma(c)",
             rep.hom_multiplicative, tol);
  push_check(out, prefix + ".hom_star", "gamma_sigma(b*) = gamma_sigma(b)*", rep.hom_adjoint, tol);
}

void lift_checks(ExperimentResult& out, const AssembledTriple& triple, const BaseTriple& base,
                 const std::string& prefix) {
  LiftReport lift = check_lift(triple, base);
  push_check(out, prefix + ".lift_dirac", "D_A t = t D_B", lift.dirac_deviation, 1e-12);
  push_check(out, prefix + ".lift_rep", "pi_A(b) t = t pi_B(b)", lift.rep_deviation, 1e-12);
}

void vertical_checks(ExperimentResult& out, const AssembledTriple& triple, const FactorSystem& fs,
                     double tol, std::uint64_t seed, int count, const std::string& prefix) {
  std::mt19937_64 gen(seed);
  const GroupModel& group = triple.rep->group;
  double residual = 0.0;
  const auto& labels = triple.rep->labels;
  for (int trial = 0; trial < count; ++trial) {
    const IrrepLabel& label = labels[gen() % labels.size()];
    ComplexMatrix b(fs.hb_dim, fs.hb_dim);
    for (Eigen::Index i = 0; i < fs.hb_dim; ++i)
      for (Eigen::Index j = 0; j < fs.hb_dim; ++j)
        b(i, j) = Complex(double(gen() >> 11) * 0x1.0p-53 - 0.5,
                          double(gen() >> 11) * 0x1.0p-53 - 0.5);
    AlgebraElement a = algebra_monomial(fs, label, b, 0, 0);
    residual = std::max(residual, vertical_commutator(triple, a).residual);
  }
  push_check(out, prefix + ".vertical_commutator",
             "[Dv-hat, pi_A(x)] = sum_k d_{X_k} pi_A(alpha(x)) (x) F_{X_k}", residual, tol, false,
             count);
  // per-block decomposition of the vertical spectrum
  double decomposition = 0.0;
  for (const auto& label : labels) {
    const IrrepData data = irrep_data(group, label);
    ComplexMatrix core = ComplexMatrix::Zero(data.dim * triple.cliff.spin_dim,
                                             data.dim * triple.cliff.spin_dim);
    const auto derived = data.derived_conj();
    for (int k = 0; k < triple.cliff.n; ++k) core += kron(derived[k], triple.cliff.generators[k]);
    const int m = fs.mult_of(label);
    RealVector single = eig_hermitian(core, 1e-8).eigenvalues;
    std::vector<RealVector> copies(std::size_t(m), single);
    RealVector full = eig_hermitian(kron(ComplexMatrix::Identity(m, m), core), 1e-8).eigenvalues;
    decomposition = std::max(decomposition, spectra_distance(full, merge_spectra(copies)));
  }
  push_check(out, prefix + ".vertical_decomposition",
             "spec(Dv | sigma) = m_sigma copies of spec(sum_k dsigma-bar(X_k) (x) F_{X_k})",
             decomposition, tol);
}

void run_crossed_product(const ExperimentConfig& config, ExperimentResult& out) {
  RepresentedBase base = base_from_diagonal(config.base_diagonal);
  BaseTriple triple{base, base.generator("d"), {}};
  CliffordRep cliff = build_clifford(1, true);
  std::vector<std::pair<int, CrossedProductModel>> models;
  for (int window : config.windows) {
    CrossedProductSpec spec{base, automorphism_unitary(config, base.hb_dim), window};
    models.emplace_back(window, build_crossed_product(spec, triple, cliff));
  }
  for (auto& [window, model] : models) {
    const std::string prefix = "crossed.N" + std::to_string(window);
    FreenessReport freeness = check_freeness(model.family);
    push_check(out, prefix + ".isometry", "s(sigma)* s(sigma) = 1",
               freeness.max_isometry_deviation, config.tolerance);
    push_check(out, prefix + ".equivariance", "alpha_g(s(sigma)) = s(sigma)(1 (x) sigma_g)",
               freeness.max_equivariance_deviation, config.tolerance);
    factor_system_checks(out, model.fs, base, config.tolerance, config.seed, prefix);
    lift_checks(out, model.assembled, triple, prefix);
    vertical_checks(out, model.assembled, model.fs, config.tolerance, config.seed, 20, prefix);
    // closed-form spectrum
    std::vector<double> expect;
    for (int k = -window; k <= window; ++k)
      for (double lambda : config.base_diagonal) {
        expect.push_back(std::sqrt(lambda * lambda + k * k));
        expect.push_back(-std::sqrt(lambda * lambda + k * k));
      }
    std::sort(expect.begin(), expect.end());
    RealVector got = model.assembled.full_spectrum();
    double spectrum_dev = std::numeric_limits<double>::infinity();
    if (got.size() == Eigen::Index(expect.size())) {
      spectrum_dev = 0.0;
      for (Eigen::Index i = 0; i < got.size(); ++i)
        spectrum_dev = std::max(spectrum_dev, std::abs(got(i) - expect[std::size_t(i)]));
    }
    push_check(out, prefix + ".spectrum", "spec(D_A) = {+-sqrt(lambda_j^2 + k^2)}", spectrum_dev,
               1e-10);
    push_check(out, prefix + ".handcoded", "generic assembly matches the mode-by-mode form",
               std::max(model.spectra_deviation, model.handcoded_alignment_residual), 1e-12);
    append_spectrum(out, window, model.assembled);
  }
  if (models.size() >= 2) {
    std::vector<std::pair<int, const AssembledTriple*>> family;
    for (const auto& [window, model] : models) family.emplace_back(window, &model.assembled);
    SpectrumGrowthReport growth = spectrum_growth_report(family);
    double dev = 0.0;
    for (double d : growth.stabilization_deviation) dev = std::max(dev, d);
    push_check(out, "crossed.stabilization", "interior spectra agree across nested windows", dev,
               config.tolerance);
  }
}

void run_quantum_torus(const ExperimentConfig& config, ExperimentResult& out) {
  CliffordRep cliff = build_clifford(2, true);
  for (int window : config.windows) {
    QuantumTorusSpec spec;
    spec.theta = config.theta;
    spec.window_radius = window;
    spec.base_radius = config.base_radius;
    QuantumTorusModel model = build_quantum_torus(spec, cliff);
    const std::string prefix = "qtorus.N" + std::to_string(window);
    RepresentedBase scalar;
    scalar.hb_dim = int(model.base_u1.rows());
    scalar.generators = {{"u1", model.base_u1}, {"u2", model.base_u2}};
    FreenessReport freeness = check_freeness(model.family);
    push_check(out, prefix + ".isometry", "s(sigma)* s(sigma) = 1",
               freeness.max_isometry_deviation, config.tolerance);
    push_check(out, prefix + ".equivariance", "alpha_g(s(sigma)) = s(sigma)(1 (x) sigma_g)",
               freeness.max_equivariance_deviation, config.tolerance);
    factor_system_checks(out, model.fs_scalar, scalar, config.tolerance, config.seed, prefix);
    lift_checks(out, model.assembled, model.base_triple, prefix);
    vertical_checks(out, model.assembled, model.fs, config.tolerance, config.seed, 20, prefix);
    push_check(out, prefix + ".canonical_spectrum",
               "interior spec(D_A) = spec of the canonical four-torus operator",
               model.spectra_deviation, 1e-10);
    // gauge invariance of the commutators under the coaction
    double gauge = 0.0;
    const ComplexMatrix& d2 = model.base_triple.dirac;
    for (const auto& name : {"u1", "u2"}) {
      const ComplexMatrix b = model.base_triple.base.generator(name);
      const double base_norm = op_norm(d2 * b - b * d2);
      for (const auto& label : model.fs.window.labels) {
        ComplexMatrix g = model.fs.coaction(label, b);
        gauge = std::max(gauge, std::abs(op_norm(d2 * g - g * d2) - base_norm));
      }
    }
    push_check(out, prefix + ".gauge_invariance",
               "||[D_2, gamma_sigma(u_i)]|| = ||[D_2, u_i]||", gauge, 1e-12);
    append_spectrum(out, window, model.assembled);
  }
}

void run_homogeneous(const ExperimentConfig& config, ExperimentResult& out) {
  if (config.homogeneous_group == "torus2") {
    for (int window : config.windows) {
      HomogeneousSpec spec;
      spec.group = GroupModel::torus(2);
      spec.subgroup_direction = config.direction;
      spec.window_radius = window;
      HomogeneousTorusModel model = build_homogeneous_torus(spec);
      const std::string prefix = "homog.N" + std::to_string(window);
      push_check(out, prefix + ".unitary", "U U* = 1", model.unitarity_defect, config.tolerance);
      push_check(out, prefix + ".horizontal",
                 "D_h = U Dh-hat U* + sum_k F_{Y_k} (d_{Y_k} U) U*",
                 model.thm_horizontal_residual, config.tolerance);
      push_check(out, prefix + ".vertical", "D_v = U Dv-hat U*", model.thm_vertical_residual,
                 config.tolerance);
      push_check(out, prefix + ".correction_central",
                 "the correction term commutes with multiplication operators",
                 model.remark_commutation_residual, config.tolerance);
      push_check(out, prefix + ".commutator_witness",
                 "||[D_{G/H} (x) 1, p(sigma)]|| (nonvanishing witness)",
                 model.cocycle_commutator_witness, 0.0, true);
      // spectrum of the canonical operator blockwise over modes
      const Eigen::Index fiber = 4;
      const int l = 2 * window + 1;
      for (int k1 = -window; k1 <= window; ++k1)
        for (int k2 = -window; k2 <= window; ++k2) {
          const Eigen::Index idx = (Eigen::Index(k1 + window) * l + (k2 + window)) * fiber;
          ComplexMatrix block = (model.d_h + model.d_v).block(idx, idx, fiber, fiber);
          RealVector spec_block = eig_hermitian(block, 1e-8).eigenvalues;
          IrrepLabel label{{k1, k2}};
          int index = 0;
          Eigen::Index i = 0;
          while (i < spec_block.size()) {
            Eigen::Index j = i;
            while (j + 1 < spec_block.size() && spec_block(j + 1) - spec_block(i) <= 1e-9) ++j;
            SpectrumRow row;
            row.window = window;
            row.label = label.to_string();
            row.index = index++;
            row.eigenvalue = spec_block(i);
            row.multiplicity = j - i + 1;
            out.spectrum.push_back(std::move(row));
            i = j + 1;
          }
        }
    }
    return;
  }
  if (config.homogeneous_group != "su2")
    throw ConfigError("homogeneous.group: expected \"torus2\" or \"su2\"");
  Su2HomogeneousReport previous;
  bool have_previous = false;
  for (int resolution : config.quadrature) {
    HomogeneousSpec spec;
    spec.group = GroupModel::su2();
    spec.window_radius = config.windows.empty() ? 3 : config.windows.back();
    spec.quadrature_resolution = resolution;
    Su2HomogeneousReport report = su2_homogeneous_report(spec, config.samples, config.seed);
    const std::string prefix = "homog.su2.R" + std::to_string(resolution);
    push_check(out, prefix + ".quadrature", "character orthogonality under the product rule",
               report.quadrature_defect, 0.0, true);
    push_check(out, prefix + ".unitary", "||U phi|| = ||phi|| on sampled sections",
               report.unitarity_defect, 0.0, true);
    push_check(out, prefix + ".vertical", "D_v U = U Dv-hat on sampled sections",
               report.thm_vertical_residual, 0.0, true);
    push_check(out, prefix + ".horizontal",
               "D_h U = U Dh-hat + correction on sampled sections",
               report.thm_horizontal_residual, 0.0, true);
    push_check(out, prefix + ".correction_central",
               "the correction term commutes with multiplication operators (window limited)",
               report.remark_commutation_residual, 0.0, true);
    if (have_previous) {
      const double slack = 1e-12;
      const bool decreasing =
          report.quadrature_defect <= previous.quadrature_defect + slack &&
          report.unitarity_defect <= previous.unitarity_defect + slack &&
          report.thm_vertical_residual <= previous.thm_vertical_residual + slack &&
          report.thm_horizontal_residual <= previous.thm_horizontal_residual + slack;
      push_check(out, prefix + ".refinement", "residuals decrease under quadrature refinement",
                 decreasing ? 0.0 : 1.0, 0.5);
    }
    previous = report;
    have_previous = true;
  }
}

void run_custom(const ExperimentConfig& config, ExperimentResult& out) {
  RepresentedBase base = base_from_diagonal(config.base_diagonal);
  BaseTriple triple{base, base.generator("d"), {}};
  if (config.cyclic_order > 0) {
    CyclicSystemSpec spec{base, automorphism_unitary(config, base.hb_dim), config.cyclic_order};
    IsometryFamily family = cyclic_crossed_family(spec);
    if (!config.twists.empty()) {
      std::map<IrrepLabel, ComplexMatrix> twists;
      for (const auto& [key, phase] : config.twists)
        twists[{{std::stoi(key)}}] = phase * ComplexMatrix::Identity(1, 1);
      family = twist_family(family, twists);
    }
    FactorSystem fs = factor_system_from_isometries(base, family);
    factor_system_checks(out, fs, base, config.tolerance, config.seed, "custom");
    CovariantRep rep = build_covariant_rep(base, fs);
    SaturationReport sat =
        isotypic_saturation_check(rep, base, IrrepLabel{{1 % config.cyclic_order}});
    push_check(out, "custom.saturation", "pi(A(sigma)) . H(1) = H(sigma)",
               double(sat.deficiency), 0.5, sat.label_on_window_boundary, sat.span_rank,
               sat.deficiency);
    return;
  }
  for (int window : config.windows) {
    CrossedProductSpec spec{base, automorphism_unitary(config, base.hb_dim), window};
    CrossedProductModel model = build_crossed_product(spec, triple, build_clifford(1, true));
    const std::string prefix = "custom.N" + std::to_string(window);
    factor_system_checks(out, model.fs, base, config.tolerance, config.seed, prefix);
    lift_checks(out, model.assembled, triple, prefix);
    append_spectrum(out, window, model.assembled);
  }
}

}  // namespace

bool ExperimentResult::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

const CheckResult* ExperimentResult::first_failure() const {
  for (const auto& c : checks)
    if (!c.passed) return &c;
  return nullptr;
}

ExperimentConfig parse_config(const std::string& json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("document: not valid JSON (") + e.what() + ")");
  }
  ExperimentConfig config;
  config.raw_json = doc.dump();
  if (!doc.contains("kind") || !doc["kind"].is_string())
    throw ConfigError("kind: required string field");
  const std::string kind = doc["kind"];
  if (kind == "crossed_product")
    config.kind = ExperimentKind::CrossedProduct;
  else if (kind == "quantum_torus")
    config.kind = ExperimentKind::QuantumTorus;
  else if (kind == "homogeneous")
    config.kind = ExperimentKind::Homogeneous;
  else if (kind == "custom_factor_system")
    config.kind = ExperimentKind::CustomFactorSystem;
  else
    throw ConfigError("kind: unknown experiment kind \"" + kind + "\"");

  if (doc.contains("windows")) {
    if (!doc["windows"].is_array() || doc["windows"].empty())
      throw ConfigError("windows: expected a nonempty array of integers");
    int previous = std::numeric_limits<int>::min();
    for (const auto& w : doc["windows"]) {
      if (!w.is_number_integer()) throw ConfigError("windows: entries must be integers");
      const int value = w.get<int>();
      if (value < 0) throw ConfigError("windows: entries must be nonnegative");
      if (value < previous) throw ConfigError("windows: must be ascending");
      previous = value;
      config.windows.push_back(value);
    }
  } else {
    config.windows = {2};
  }
  if (doc.contains("tolerance")) {
    if (!doc["tolerance"].is_number() || doc["tolerance"].get<double>() <= 0.0)
      throw ConfigError("tolerance: expected a positive number");
    config.tolerance = doc["tolerance"];
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw ConfigError("seed: expected a nonnegative integer");
    config.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("base_diagonal")) {
    if (!doc["base_diagonal"].is_array())
      throw ConfigError("base_diagonal: expected an array of numbers");
    for (const auto& v : doc["base_diagonal"]) {
      if (!v.is_number()) throw ConfigError("base_diagonal: entries must be numbers");
      config.base_diagonal.push_back(v.get<double>());
    }
  } else {
    config.base_diagonal = {0.5, -1.0, 2.0, 3.0};
  }
  if (doc.contains("automorphism")) {
    if (!doc["automorphism"].is_string())
      throw ConfigError("automorphism: expected \"cyclic\" or \"identity\"");
    config.automorphism = doc["automorphism"];
  }
  if (doc.contains("cyclic_order")) {
    if (!doc["cyclic_order"].is_number_integer() || doc["cyclic_order"].get<int>() < 2)
      throw ConfigError("cyclic_order: expected an integer >= 2");
    config.cyclic_order = doc["cyclic_order"];
  }
  if (doc.contains("twists")) {
    if (!doc["twists"].is_object()) throw ConfigError("twists: expected an object label -> angle");
    for (const auto& [key, value] : doc["twists"].items()) {
      if (!value.is_number()) throw ConfigError("twists: angles must be numbers");
      const double angle = value.get<double>();
      config.twists[key] = Complex(std::cos(angle), std::sin(angle));
    }
  }
  if (doc.contains("theta")) {
    if (!doc["theta"].is_array() || doc["theta"].size() != 4)
      throw ConfigError("theta: expected a 4x4 array");
    for (int i = 0; i < 4; ++i) {
      if (!doc["theta"][i].is_array() || doc["theta"][i].size() != 4)
        throw ConfigError("theta: expected a 4x4 array");
      for (int j = 0; j < 4; ++j) {
        if (!doc["theta"][i][j].is_number()) throw ConfigError("theta: entries must be numbers");
        config.theta(i, j) = doc["theta"][i][j].get<double>();
      }
    }
  }
  if (doc.contains("base_radius")) {
    if (!doc["base_radius"].is_number_integer() || doc["base_radius"].get<int>() < 0)
      throw ConfigError("base_radius: expected a nonnegative integer");
    config.base_radius = doc["base_radius"];
  }
  if (doc.contains("group")) {
    if (!doc["group"].is_string()) throw ConfigError("group: expected \"torus2\" or \"su2\"");
    config.homogeneous_group = doc["group"];
  }
  if (doc.contains("direction")) {
    if (!doc["direction"].is_array() || doc["direction"].size() != 2)
      throw ConfigError("direction: expected two integers");
    config.direction.clear();
    for (const auto& v : doc["direction"]) {
      if (!v.is_number_integer()) throw ConfigError("direction: entries must be integers");
      config.direction.push_back(v.get<int>());
    }
  }
  if (doc.contains("quadrature")) {
    if (!doc["quadrature"].is_array() || doc["quadrature"].empty())
      throw ConfigError("quadrature: expected a nonempty array of integers");
    config.quadrature.clear();
    for (const auto& v : doc["quadrature"]) {
      if (!v.is_number_integer() || v.get<int>() < 2)
        throw ConfigError("quadrature: entries must be integers >= 2");
      config.quadrature.push_back(v.get<int>());
    }
  }
  if (doc.contains("samples")) {
    if (!doc["samples"].is_number_integer() || doc["samples"].get<int>() < 1)
      throw ConfigError("samples: expected a positive integer");
    config.samples = doc["samples"];
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  ExperimentResult out;
  out.conventions = {
      {"torus_derivative", "d sigma_k(X_j) = i k_j; the 2 pi factor is absorbed into the basis"},
      {"su2_inner_product",
       "Lie basis orthonormal with X_k -> (i/2) sigma_k in the spin-1/2 representation"},
      {"group_derivatives", "function-space derivatives use exp(-t X) translations throughout"},
  };
  switch (config.kind) {
    case ExperimentKind::CrossedProduct: run_crossed_product(config, out); break;
    case ExperimentKind::QuantumTorus: run_quantum_torus(config, out); break;
    case ExperimentKind::Homogeneous: run_homogeneous(config, out); break;
    case ExperimentKind::CustomFactorSystem: run_custom(config, out); break;
  }
  return out;
}

std::string spectrum_csv(const std::vector<SpectrumRow>& rows) {
  std::string out = "window,block_label,eigenvalue_index,eigenvalue,multiplicity\n";
  for (const auto& row : rows) {
    out += std::to_string(row.window);
    out += ",\"" + row.label + "\",";
    out += std::to_string(row.index);
    out += ",";
    out += format_double(row.eigenvalue);
    out += ",";
    out += std::to_string(row.multiplicity);
    out += "\n";
  }
  return out;
}

std::string report_json(const ExperimentConfig& config, const ExperimentResult& result) {
  ordered_json doc;
  doc["config"] = ordered_json::parse(config.raw_json.empty() ? "{}" : config.raw_json);
  ordered_json conventions = ordered_json::object();
  for (const auto& [key, value] : result.conventions) conventions[key] = value;
  doc["conventions"] = conventions;
  ordered_json checks = ordered_json::array();
  Eigen::Index passed = 0, failed = 0, report_only = 0;
  for (const auto& c : result.checks) {
    ordered_json entry;
    entry["name"] = c.name;
    entry["identity"] = c.identity;
    entry["max_deviation"] = format_double(c.deviation);
    entry["tolerance"] = format_double(c.tolerance);
    entry["report_only"] = c.report_only;
    entry["pass"] = c.passed;
    entry["interior"] = c.interior;
    entry["boundary"] = c.boundary;
    checks.push_back(entry);
    if (c.report_only)
      ++report_only;
    else if (c.passed)
      ++passed;
    else
      ++failed;
  }
  doc["checks"] = checks;
  doc["summary"] = {{"passed", passed}, {"failed", failed}, {"report_only", report_only}};
  return doc.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << contents;
}

CompareResult compare_spectra(const std::vector<SpectrumRow>& current,
                              const std::string& baseline_csv, double tolerance) {
  CompareResult result;
  std::map<int, std::vector<double>> baseline, fresh;
  std::istringstream in(baseline_csv);
  std::string line;
  if (!std::getline(in, line) || line.rfind("window,", 0) != 0)
    throw BaselineMismatchError("baseline: missing spectrum header row");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    // window,"label",index,eigenvalue,multiplicity
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (char ch : line) {
      if (ch == '"') {
        quoted = !quoted;
      } else if (ch == ',' && !quoted) {
        fields.push_back(field);
        field.clear();
      } else {
        field.push_back(ch);
      }
    }
    fields.push_back(field);
    if (fields.size() != 5) throw BaselineMismatchError("baseline: malformed row: " + line);
    try {
      const int window = std::stoi(fields[0]);
      const double value = std::stod(fields[3]);
      const long mult = std::stol(fields[4]);
      for (long i = 0; i < mult; ++i) baseline[window].push_back(value);
    } catch (const std::exception&) {
      throw BaselineMismatchError("baseline: malformed row: " + line);
    }
  }
  for (const auto& row : current)
    for (long i = 0; i < row.multiplicity; ++i) fresh[row.window].push_back(row.eigenvalue);
  if (baseline.size() != fresh.size()) {
    result.structural_mismatch = true;
    result.note = "different window sets";
    return result;
  }
  for (auto& [window, values] : baseline) {
    auto it = fresh.find(window);
    if (it == fresh.end() || it->second.size() != values.size()) {
      result.structural_mismatch = true;
      result.note = "window " + std::to_string(window) + ": different eigenvalue counts";
      return result;
    }
    std::sort(values.begin(), values.end());
    std::sort(it->second.begin(), it->second.end());
    for (std::size_t i = 0; i < values.size(); ++i)
      if (std::abs(values[i] - it->second[i]) > tolerance)
        result.moved.push_back({window, values[i], it->second[i]});
  }
  return result;
}

}  // namespace speclift
