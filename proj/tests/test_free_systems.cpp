#include "doctest.h"

#include <cmath>

#include "speclift/free_systems.hpp"
#include "speclift/models.hpp"
#include "test_support.hpp"

using namespace speclift;
namespace st = speclift::testing;

namespace {

RepresentedBase diagonal_base(std::vector<double> entries) {
  RepresentedBase base;
  base.hb_dim = int(entries.size());
  ComplexMatrix d = ComplexMatrix::Zero(base.hb_dim, base.hb_dim);
  for (int i = 0; i < base.hb_dim; ++i) d(i, i) = Complex(entries[i], 0.0);
  // a diagonal generator plus the cyclic shift makes the commutant trivial
  ComplexMatrix shift = ComplexMatrix::Zero(base.hb_dim, base.hb_dim);
  for (int i = 0; i < base.hb_dim; ++i) shift((i + 1) % base.hb_dim, i) = 1.0;
  base.generators = {{"d", d}};
  (void)shift;
  return base;
}

ComplexMatrix cyclic_permutation(int n) {
  ComplexMatrix u = ComplexMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) u((i + 1) % n, i) = 1.0;
  return u;
}

CrossedProductModel small_crossed_model(int radius = 2) {
  RepresentedBase base = diagonal_base({0.5, -1.0, 2.0, 3.0});
  CrossedProductSpec spec{base, cyclic_permutation(4), radius};
  BaseTriple triple{base, base.generator("d"), {}};
  return build_crossed_product(spec, triple, build_clifford(1, true));
}

}  // namespace

TEST_CASE("crossed-product isometries pass the freeness checks") {
  CrossedProductModel model = small_crossed_model();
  FreenessReport report = check_freeness(model.family);
  CHECK(report.max_isometry_deviation < 1e-13);
  CHECK(report.max_equivariance_deviation < 1e-13);
}

TEST_CASE("trivial label isometry is exact and a corrupted family is caught") {
  CrossedProductModel model = small_crossed_model();
  for (const auto& row : check_freeness(model.family).rows)
    if (row.label == trivial_label(model.group)) CHECK(row.isometry_deviation == 0.0);
  // scale s by 0.9: the isometry defect is |1 - 0.81| = 0.19
  IsometryFamily corrupted = model.family;
  auto inner = model.family.apply_s;
  corrupted.apply_s = [inner](const IrrepLabel& l, const ComplexVector& v) {
    return ComplexVector(0.9 * inner(l, v));
  };
  auto inner_adj = model.family.apply_s_adj;
  corrupted.apply_s_adj = [inner_adj](const IrrepLabel& l, const ComplexVector& v) {
    return ComplexVector(0.9 * inner_adj(l, v));
  };
  FreenessReport report = check_freeness(corrupted);
  CHECK(std::abs(report.max_isometry_deviation - 0.19) < 1e-12);
  CHECK_THROWS_AS(factor_system_from_isometries(diagonal_base({0.5, -1.0, 2.0, 3.0}), corrupted),
                  FreenessViolationError);
}

TEST_CASE("crossed-product factor system: twisted coaction and trivial cocycle") {
  CrossedProductModel model = small_crossed_model();
  const FactorSystem& fs = model.fs;
  ComplexMatrix u = cyclic_permutation(4);
  ComplexMatrix b = diagonal_base({0.5, -1.0, 2.0, 3.0}).generator("d");
  for (int k = -2; k <= 2; ++k) {
    // coaction(k, b) = alpha^k(b) with the label transforming by its own character
    ComplexMatrix expect = b;
    for (int s = 0; s < std::abs(k); ++s)
      { if (k > 0) expect = u * expect * u.adjoint(); else expect = u.adjoint() * expect * u; }
    CHECK(max_abs(fs.coaction({{k}}, b) - expect) < 1e-13);
    CHECK(max_abs(fs.projection({{k}}) - identity_matrix(4)) < 1e-13);
  }
  CHECK(max_abs(fs.cocycle({{1}}, {{2}}) - identity_matrix(4)) < 1e-13);
  FactorSystemReport report = verify_factor_system(fs, model.base_triple.base);
  CHECK(report.worst() < 1e-12);
  CHECK(report.pairs_checked > 0);
  CHECK(report.triples_checked > 0);
}

TEST_CASE("quantum-torus factor system identities hold to 1e-10") {
  QuantumTorusSpec spec;
  spec.theta = RealMatrix::Zero(4, 4);
  spec.theta(0, 1) = 0.31;
  spec.theta(1, 0) = -0.31;
  spec.theta(2, 3) = 0.17;
  spec.theta(3, 2) = -0.17;
  spec.theta(0, 2) = 0.05;
  spec.theta(2, 0) = -0.05;
  spec.window_radius = 1;
  spec.base_radius = 2;
  QuantumTorusModel model = build_quantum_torus(spec, build_clifford(2, true));
  RepresentedBase scalar;
  scalar.hb_dim = int(model.base_u1.rows());
  scalar.generators = {{"u1", model.base_u1}, {"u2", model.base_u2}};
  FactorSystemVerifyOptions opts;
  opts.max_word_length = 2;
  FactorSystemReport report = verify_factor_system(model.fs_scalar, scalar, opts);
  CHECK(report.range_identity < 1e-10);
  CHECK(report.support_identity < 1e-10);
  CHECK(report.covariance < 1e-10);
  CHECK(report.cocycle_identity < 1e-10);
  CHECK(report.hom_multiplicative < 1e-10);
  CHECK(report.hom_adjoint < 1e-10);
  // the cocycle is a unimodular scalar here
  ComplexMatrix w = model.fs_scalar.cocycle({{1, 0}}, {{0, 1}});
  const Complex scale = w(0, 0);
  CHECK(std::abs(std::abs(scale) - 1.0) < 1e-12);
  CHECK(max_abs(w - scale * identity_matrix(w.rows())) < 1e-12);
}

TEST_CASE("algebra multiplication matches crossed-product arithmetic") {
  CrossedProductModel model = small_crossed_model();
  const FactorSystem& fs = model.fs;
  ComplexMatrix u = cyclic_permutation(4);
  auto gen = st::rng(71);
  ComplexMatrix b = st::random_matrix(gen, 4, 4);
  ComplexMatrix c = st::random_matrix(gen, 4, 4);
  AlgebraElement ab = algebra_monomial(fs, {{1}}, b, 0, 0);
  AlgebraElement ac = algebra_monomial(fs, {{-2}}, c, 0, 0);
  AlgebraElement prod = multiply(ab, ac, fs);
  // a_k(b) a_l(c) = a_{k+l}(alpha^l(b) c)
  ComplexMatrix expect = u.adjoint() * (u.adjoint() * b * u) * u * c;
  REQUIRE(prod.coeff.count(IrrepLabel{{-1}}) == 1);
  CHECK(max_abs(prod.coeff.at(IrrepLabel{{-1}}) - expect) < 1e-12);

  AlgebraElement unit = algebra_unit(fs);
  AlgebraElement same = multiply(ab, unit, fs);
  CHECK(max_abs(same.coeff.at(IrrepLabel{{1}}) - b) < 1e-13);
}

TEST_CASE("multiplication escaping the margin raises WindowOverflow") {
  CrossedProductModel model = small_crossed_model();
  AlgebraElement a2 = algebra_monomial(model.fs, {{2}}, identity_matrix(4), 0, 0);
  CHECK_THROWS_AS(multiply(a2, a2, model.fs), WindowOverflowError);
}

TEST_CASE("representation is multiplicative and covariant") {
  CrossedProductModel model = small_crossed_model();
  const FactorSystem& fs = model.fs;
  const CovariantRep& rep = *model.rep;
  auto gen = st::rng(73);
  ComplexMatrix b = st::random_matrix(gen, 4, 4);
  ComplexMatrix c = st::random_matrix(gen, 4, 4);
  AlgebraElement ab = algebra_monomial(fs, {{1}}, b, 0, 0);
  AlgebraElement ac = algebra_monomial(fs, {{-1}}, c, 0, 0);
  BlockOperator rb = represent(ab, rep);
  BlockOperator rc = represent(ac, rep);
  BlockOperator rprod = represent(multiply(ab, ac, fs), rep);
  // compare on interior blocks: columns tau with both tau-1 and tau+1 inside
  BlockOperator composed = rb * rc;
  for (const auto& [key, blk] : rprod.blocks) {
    const int tau = rep.labels[key.second].data[0];
    if (std::abs(tau + 1) > 2 || std::abs(tau - 1) > 2) continue;
    auto it = composed.blocks.find(key);
    REQUIRE(it != composed.blocks.end());
    CHECK(max_abs(blk - it->second) < 1e-10);
  }
  // unit acts as the identity
  BlockOperator one = represent(algebra_unit(fs), rep);
  CHECK(max_abs(one.to_dense() - identity_matrix(rep.index->total)) < 1e-13);
  // sampled covariance u_A(g) pi(x) u_A(g)* = pi(alpha_g x)
  for (const GroupPoint& g : {GroupPoint{{0.9}}, GroupPoint{{2.3}}}) {
    BlockOperator ua = rep.u_operator(g);
    BlockOperator lhs = ua * rb * ua.adjoint();
    BlockOperator rhs = represent(algebra_translate(fs, ab, g), rep);
    CHECK((lhs - rhs).max_entry() < 1e-12);
  }
}

TEST_CASE("the generator of the dual action acts as the index shift") {
  CrossedProductModel model = small_crossed_model();
  // v = a_{-1}(1): maps the tau block to tau - 1 with identity matrices
  AlgebraElement v = algebra_monomial(model.fs, {{-1}}, identity_matrix(4), 0, 0);
  BlockOperator rv = represent(v, *model.rep);
  for (const auto& [key, blk] : rv.blocks) {
    CHECK(model.rep->labels[key.first].data[0] == model.rep->labels[key.second].data[0] - 1);
    CHECK(max_abs(blk - identity_matrix(4)) < 1e-13);
  }
  CHECK(rv.blocks.size() == 4);  // four window labels admit the shift
}

TEST_CASE("involution roundtrip and the crossed-product formula") {
  CrossedProductModel model = small_crossed_model();
  const FactorSystem& fs = model.fs;
  ComplexMatrix u = cyclic_permutation(4);
  auto gen = st::rng(79);
  ComplexMatrix b = st::random_matrix(gen, 4, 4);
  AlgebraElement ab = algebra_monomial(fs, {{1}}, b, 0, 0);
  AlgebraElement star = involution(ab, fs, *model.rep);
  // a_k(b)* = a_{-k}(alpha^{-k}(b*))
  REQUIRE(star.coeff.count(IrrepLabel{{-1}}) == 1);
  ComplexMatrix expect = u.adjoint() * b.adjoint() * u;
  CHECK(max_abs(star.coeff.at(IrrepLabel{{-1}}) - expect) < 1e-12);
  AlgebraElement twice = involution(star, fs, *model.rep);
  CHECK(max_abs(twice.coeff.at(IrrepLabel{{1}}) - b) < 1e-10);
  // represent(involution(a)) = represent(a)* blockwise
  BlockOperator lhs = represent(star, *model.rep);
  BlockOperator rhs = represent(ab, *model.rep).adjoint();
  CHECK((lhs - rhs).max_entry() < 1e-11);
  // the unit is self-adjoint
  AlgebraElement unit_star = involution(algebra_unit(fs), fs, *model.rep);
  CHECK(max_abs(unit_star.coeff.at(trivial_label(fs.group)) - identity_matrix(4)) < 1e-13);
}

TEST_CASE("isotypic saturation on a finite-group instance") {
  RepresentedBase base = diagonal_base({1.0, 2.0, -0.5});
  CyclicSystemSpec spec{base, cyclic_permutation(3), 3};
  IsometryFamily fam = cyclic_crossed_family(spec);
  FactorSystem fs = factor_system_from_isometries(base, fam);
  CovariantRep rep = build_covariant_rep(base, fs);
  for (int r = 0; r < 3; ++r) {
    SaturationReport report = isotypic_saturation_check(rep, base, {{r}});
    CHECK(report.deficiency == 0);
    CHECK(report.span_rank == report.block_dim);
  }
}

TEST_CASE("classification finds intertwiners across twisted isometry choices") {
  RepresentedBase base = diagonal_base({1.0, 2.0, -0.5, 0.25});
  CyclicSystemSpec spec{base, cyclic_permutation(4), 4};
  IsometryFamily fam = cyclic_crossed_family(spec);
  FactorSystem fs = factor_system_from_isometries(base, fam);
  CovariantRep rep = build_covariant_rep(base, fs);

  std::map<IrrepLabel, ComplexMatrix> twists;
  twists[{{1}}] = Complex(std::cos(0.4), std::sin(0.4)) * identity_matrix(1);
  twists[{{2}}] = Complex(std::cos(1.1), std::sin(1.1)) * identity_matrix(1);
  twists[{{3}}] = Complex(std::cos(0.4), -std::sin(0.4)) * identity_matrix(1);
  IsometryFamily fam2 = twist_family(fam, twists);
  FactorSystem fs2 = factor_system_from_isometries(base, fam2);
  CovariantRep rep2 = build_covariant_rep(base, fs2);

  // the same abstract elements in the coefficient coordinates of each instance:
  // a_sigma(x) built from s' = w s corresponds to the coefficient w_sigma x
  std::vector<AlgebraElement> gens_a, gens_b;
  {
    AlgebraElement b0;
    b0.coeff[trivial_label(fs.group)] = base.generator("d");
    gens_a.push_back(b0);
    gens_b.push_back(b0);
    gens_a.push_back(algebra_monomial(fs, {{1}}, identity_matrix(4), 0, 0));
    gens_b.push_back(algebra_monomial(
        fs2, {{1}}, ComplexMatrix(twists.at({{1}})(0, 0) * identity_matrix(4)), 0, 0));
  }
  Classification same = classify_covariant_reps(rep, rep, gens_a, gens_a);
  CHECK(same.equivalent);
  CHECK(same.residual < 1e-9);
  Classification twisted = classify_covariant_reps(rep, rep2, gens_a, gens_b);
  CHECK(twisted.equivalent);
  CHECK(twisted.residual < 1e-9);
  CHECK(twisted.unitarity_defect < 1e-9);
}

TEST_CASE("classification reports distinct multiplicities") {
  RepresentedBase base = diagonal_base({1.0, -1.0});
  CyclicSystemSpec spec{base, cyclic_permutation(2), 2};
  IsometryFamily fam = cyclic_crossed_family(spec);
  FactorSystem fs = factor_system_from_isometries(base, fam);
  CovariantRep rep = build_covariant_rep(base, fs);

  // a second instance with a doubled multiplicity space at the nontrivial label
  FactorSystem fat = fs;
  fat.mult[{{1}}] = 2;
  auto inner = fs.coaction;
  fat.coaction = [inner](const IrrepLabel& l, const ComplexMatrix& b) {
    ComplexMatrix g = inner(l, b);
    if (l == IrrepLabel{{1}}) return kron(g, identity_matrix(2)).eval();
    return g;
  };
  CovariantRep rep2 = build_covariant_rep(base, fat);
  Classification distinct = classify_covariant_reps(rep, rep2, {}, {});
  CHECK(!distinct.equivalent);
  CHECK(distinct.obstruction.find("multiplicity") != std::string::npos);

  // different windows are not comparable at all
  RepresentedBase base3 = diagonal_base({1.0, -1.0, 0.5});
  CyclicSystemSpec spec3{base3, cyclic_permutation(3), 3};
  FactorSystem fs3 = factor_system_from_isometries(base3, cyclic_crossed_family(spec3));
  CovariantRep rep3 = build_covariant_rep(base3, fs3);
  CHECK_THROWS_AS(classify_covariant_reps(rep, rep3, {}, {}), NotComparableError);
}

TEST_CASE("spin amplification preserves the factor system identities") {
  CrossedProductModel model = small_crossed_model();
  FactorSystem amplified = model.fs.amplified(2);
  CHECK(amplified.hb_dim == 8);
  ComplexMatrix b = kron(diagonal_base({0.5, -1.0, 2.0, 3.0}).generator("d"),
                         identity_matrix(2));
  ComplexMatrix g = amplified.coaction({{1}}, b);
  ComplexMatrix expect = kron(model.fs.coaction({{1}}, diagonal_base({0.5, -1.0, 2.0, 3.0}).generator("d")),
                              identity_matrix(2));
  CHECK(max_abs(g - expect) < 1e-13);
  CHECK(max_abs(amplified.cocycle({{1}}, {{1}}) - identity_matrix(8)) < 1e-13);
}
