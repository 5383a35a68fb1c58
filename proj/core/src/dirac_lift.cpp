#include "speclift/dirac_lift.hpp"

#include <algorithm>
#include <cmath>

namespace speclift {

namespace {

/// gamma_tau(b) amplified with a bystander multiplicity slot at leg 2:
/// legs (B, m_s, m_t) from legs (B, m_t).
ComplexMatrix lift_13(const ComplexMatrix& g, Eigen::Index hb, Eigen::Index ms, Eigen::Index mt) {
  ComplexMatrix out = ComplexMatrix::Zero(hb * ms * mt, hb * ms * mt);
  for (Eigen::Index i = 0; i < hb; ++i)
    for (Eigen::Index a = 0; a < ms; ++a)
      for (Eigen::Index t = 0; t < mt; ++t)
        for (Eigen::Index j = 0; j < hb; ++j)
          for (Eigen::Index t2 = 0; t2 < mt; ++t2) {
            const Complex val = g(i * mt + t, j * mt + t2);
            if (val != Complex(0.0, 0.0)) out((i * ms + a) * mt + t, (j * ms + a) * mt + t2) = val;
          }
  return out;
}

}  // namespace

HorizontalLift horizontal_lift(const BaseTriple& triple, const CovariantRep& rep) {
  if (triple.base.hb_dim != rep.hb_dim)
    throw ShapeMismatchError("horizontal_lift: base dimension mismatch");
  HorizontalLift out;
  out.labels = rep.labels;
  for (const auto& l : rep.labels) {
    const int m = rep.mult.at(l);
    const ComplexMatrix& basis = rep.range_basis.at(l);
    ComplexMatrix amplified = kron(triple.dirac, ComplexMatrix::Identity(m, m));
    out.block[l] = basis.adjoint() * amplified * basis;
  }
  return out;
}

VerticalDirac vertical_dirac(const GroupModel& g, const CovariantRep& rep,
                             const CliffordRep& cliff) {
  if (cliff.n != g.lie_dim())
    throw DimensionMismatchError("vertical_dirac: Clifford generator count differs from dim G");
  if (!cliff.grading) throw GradingMissingError("vertical_dirac: grading required");
  VerticalDirac out;
  out.labels = rep.labels;
  out.spin_dim = cliff.spin_dim;
  for (const auto& l : rep.labels) {
    const IrrepData data = irrep_data(g, l);
    ComplexMatrix core = ComplexMatrix::Zero(data.dim * cliff.spin_dim, data.dim * cliff.spin_dim);
    const auto derived = data.derived_conj();
    for (int k = 0; k < cliff.n; ++k) core += kron(derived[k], cliff.generators[k]);
    out.core[l] = std::move(core);
  }
  return out;
}

ComplexMatrix AssembledTriple::lift_isometry() const {
  const IrrepLabel triv = trivial_label(rep->group);
  const int ti = index->find(triv);
  const Eigen::Index hb = rep->hb_dim;
  const Eigen::Index s = spin_vector.size();
  ComplexMatrix t = ComplexMatrix::Zero(index->total, hb);
  const ComplexMatrix& basis = rep->range_basis.at(triv);  // (hb x hb), identity for normalized s
  for (Eigen::Index j = 0; j < hb; ++j)
    for (Eigen::Index k = 0; k < hb; ++k)
      for (Eigen::Index u = 0; u < s; ++u)
        t(index->offsets[ti] + k * s + u, j) = basis(k, j) * spin_vector(u);
  return t;
}

BlockOperator AssembledTriple::dirac_operator() const {
  BlockOperator op = BlockOperator::zero(index, index);
  for (std::size_t i = 0; i < rep->labels.size(); ++i)
    op.add_block(int(i), int(i), dirac_block.at(rep->labels[i]));
  return op;
}

BlockOperator AssembledTriple::represent_element(const AlgebraElement& a) const {
  BlockOperator plain = represent(a, *rep);
  const ComplexMatrix one_spin = ComplexMatrix::Identity(cliff.spin_dim, cliff.spin_dim);
  return plain.amplified(one_spin, index, index);
}

RealVector AssembledTriple::block_spectrum(const IrrepLabel& l) const {
  return eig_hermitian(dirac_block.at(l), 1e-8).eigenvalues;
}

RealVector AssembledTriple::full_spectrum() const {
  std::vector<RealVector> parts;
  for (const auto& l : rep->labels) parts.push_back(block_spectrum(l));
  return merge_spectra(parts);
}

namespace {

std::shared_ptr<const BlockIndex> spin_index(const CovariantRep& rep, int spin_dim) {
  std::vector<Eigen::Index> dims;
  for (std::size_t i = 0; i < rep.labels.size(); ++i) dims.push_back(rep.index->dims[i] * spin_dim);
  return BlockIndex::make(rep.labels, dims);
}

}  // namespace

AssembledTriple assemble(const HorizontalLift& h, const VerticalDirac& v,
                         const CliffordRep& cliff, std::shared_ptr<const CovariantRep> rep,
                         const BaseTriple& base) {
  if (!cliff.grading) throw GradingMissingError("assemble: grading required");
  const ComplexMatrix& gamma = *cliff.grading;
  for (const auto& f : cliff.generators)
    if (max_abs(gamma * f + f * gamma) > 1e-12)
      throw NotAGradingError("assemble: grading does not anticommute with the Clifford action");
  AssembledTriple out;
  out.rep = rep;
  out.cliff = cliff;
  out.base = base;
  out.index = spin_index(*rep, cliff.spin_dim);
  out.spin_vector = grading_plus_vector(cliff);
  for (const auto& l : rep->labels) {
    const Eigen::Index rank = rep->rank_of(l);
    const Eigen::Index d = irrep_data(rep->group, l).dim;
    ComplexMatrix horizontal = kron(kron(h.block.at(l), ComplexMatrix::Identity(d, d)), gamma);
    ComplexMatrix vertical = kron(ComplexMatrix::Identity(rank, rank), v.core.at(l));
    out.dirac_block[l] = horizontal + vertical;
  }
  return out;
}

AssembledTriple assemble_even(const HorizontalLift& h, const VerticalDirac& v,
                              const ComplexMatrix& gamma_b,
                              std::shared_ptr<const CovariantRep> rep, const BaseTriple& base,
                              const CliffordRep& cliff) {
  const Eigen::Index hb = rep->hb_dim;
  if (gamma_b.rows() != hb || gamma_b.cols() != hb)
    throw ShapeMismatchError("assemble_even: grading dimension mismatch");
  if (hermiticity_defect(gamma_b) > 1e-12 ||
      max_abs(gamma_b * gamma_b - ComplexMatrix::Identity(hb, hb)) > 1e-12)
    throw NotAGradingError("assemble_even: gamma_B is not a self-adjoint unitary");
  if (max_abs(gamma_b * base.dirac + base.dirac * gamma_b) > 1e-10 * std::max(1.0, max_abs(base.dirac)))
    throw NotAGradingError("assemble_even: gamma_B does not anticommute with D_B");
  for (const auto& [name, g] : base.base.generators)
    if (max_abs(gamma_b * g - g * gamma_b) > 1e-10 * std::max(1.0, max_abs(g)))
      throw NotAGradingError("assemble_even: gamma_B does not commute with the represented base");

  AssembledTriple out;
  out.rep = rep;
  out.cliff = cliff;
  out.base = base;
  out.index = spin_index(*rep, cliff.spin_dim);
  out.spin_vector = ComplexVector::Zero(cliff.spin_dim);
  out.spin_vector(0) = 1.0;
  for (const auto& l : rep->labels) {
    const int m = rep->mult.at(l);
    const Eigen::Index d = irrep_data(rep->group, l).dim;
    const ComplexMatrix& basis = rep->range_basis.at(l);
    const Eigen::Index rank = basis.cols();
    ComplexMatrix gamma_block =
        basis.adjoint() * kron(gamma_b, ComplexMatrix::Identity(m, m)) * basis;
    const Eigen::Index ds = d * cliff.spin_dim;
    ComplexMatrix horizontal = kron(h.block.at(l), ComplexMatrix::Identity(ds, ds));
    ComplexMatrix vertical = kron(gamma_block, v.core.at(l));
    out.dirac_block[l] = horizontal + vertical;
  }
  return out;
}

CommutatorReport commutator_report(const AssembledTriple& t,
                                   const std::vector<std::pair<std::string, AlgebraElement>>& elements,
                                   const std::vector<int>& nested_radii) {
  const CovariantRep& rep = *t.rep;
  const FactorSystem& fs = *rep.fs;
  const ComplexMatrix& d_b = t.base.dirac;
  const Eigen::Index hb = fs.hb_dim;
  CommutatorReport report;
  auto radius_of = [&](const IrrepLabel& l) {
    int r = 0;
    for (int c : l.data) r = std::max(r, std::abs(c));
    return r;
  };
  for (const auto& [name, element] : elements) {
    CommutatorProfile profile;
    profile.name = name;
    for (const auto& [sigma, x] : element.coeff) {
      profile.sigma = sigma;
      const int ms = fs.mult_of(sigma);
      const int ds = irrep_data(fs.group, sigma).dim;
      // collapse the coefficient blocks into representative base elements
      std::vector<ComplexMatrix> bs;
      for (int q = 0; q < ms; ++q)
        for (int r = 0; r < ds; ++r) {
          ComplexMatrix b(hb, hb);
          for (Eigen::Index i = 0; i < hb; ++i)
            for (Eigen::Index j = 0; j < hb; ++j) b(i, j) = x((i * ms + q) * ds + r, j);
          if (max_abs(b) > 0.0) bs.push_back(std::move(b));
        }
      for (const auto& tau : rep.labels) {
        const int mt = fs.mult_of(tau);
        const ComplexMatrix damp = kron(d_b, ComplexMatrix::Identity(mt, mt));
        double gamma_dev = 0.0, omega_dev = 0.0;
        bool have_omega = true;
        ComplexMatrix w;
        try {
          w = fs.cocycle(sigma, tau);
        } catch (const WindowOverflowError&) {
          have_omega = false;
        }
        for (const auto& b : bs) {
          ComplexMatrix g = fs.coaction(tau, b);
          gamma_dev = std::max(gamma_dev, op_norm(damp * g - g * damp));
          if (have_omega) {
            ComplexMatrix m = w * lift_13(g, hb, ms, mt);
            const Eigen::Index mout = m.rows() / hb;
            const ComplexMatrix dout = kron(d_b, ComplexMatrix::Identity(mout, mout));
            const ComplexMatrix din =
                kron(d_b, ComplexMatrix::Identity(Eigen::Index(ms) * mt, Eigen::Index(ms) * mt));
            omega_dev = std::max(omega_dev, op_norm(dout * m - m * din));
          }
        }
        profile.gamma_rows.emplace_back(tau, gamma_dev);
        if (have_omega) profile.omega_rows.emplace_back(tau, omega_dev);
      }
    }
    for (int radius : nested_radii) {
      double sup = 0.0;
      for (const auto& [tau, dev] : profile.gamma_rows)
        if (radius_of(tau) <= radius) sup = std::max(sup, dev);
      for (const auto& [tau, dev] : profile.omega_rows)
        if (radius_of(tau) <= radius) sup = std::max(sup, dev);
      profile.sup_growth.emplace_back(radius, sup);
    }
    BlockOperator pa = t.represent_element(element);
    BlockOperator commutator = t.dirac_operator() * pa - pa * t.dirac_operator();
    profile.total_commutator = commutator.norm();
    report.profiles.push_back(std::move(profile));
  }
  return report;
}

VerticalCommutatorResult vertical_commutator(const AssembledTriple& t, const AlgebraElement& a) {
  const CovariantRep& rep = *t.rep;
  const FactorSystem& fs = *rep.fs;
  VerticalCommutatorResult out;
  // block-diagonal vertical part
  BlockOperator vertical = BlockOperator::zero(t.index, t.index);
  for (std::size_t i = 0; i < rep.labels.size(); ++i) {
    const IrrepLabel& l = rep.labels[i];
    const IrrepData data = irrep_data(rep.group, l);
    ComplexMatrix core = ComplexMatrix::Zero(data.dim * t.cliff.spin_dim, data.dim * t.cliff.spin_dim);
    const auto derived = data.derived_conj();
    for (int k = 0; k < t.cliff.n; ++k) core += kron(derived[k], t.cliff.generators[k]);
    vertical.add_block(int(i), int(i),
                       kron(ComplexMatrix::Identity(rep.rank_of(l), rep.rank_of(l)), core));
  }
  BlockOperator pa = t.represent_element(a);
  out.lhs = vertical * pa - pa * vertical;

  out.rhs = BlockOperator::zero(t.index, t.index);
  for (int k = 0; k < t.cliff.n; ++k) {
    AlgebraElement da;
    for (const auto& [sigma, x] : a.coeff) {
      const IrrepData data = irrep_data(rep.group, sigma);
      const ComplexMatrix dk = data.derived_conj()[k];
      const int m = fs.mult_of(sigma);
      const int d = data.dim;
      ComplexMatrix res = ComplexMatrix::Zero(x.rows(), x.cols());
      for (Eigen::Index i = 0; i < fs.hb_dim; ++i)
        for (int q = 0; q < m; ++q)
          for (int r = 0; r < d; ++r)
            for (int r2 = 0; r2 < d; ++r2) {
              const Complex c = dk(r, r2);
              if (c != Complex(0.0, 0.0))
                res.row((i * m + q) * d + r) += c * x.row((i * m + q) * d + r2);
            }
      da.coeff[sigma] = std::move(res);
    }
    BlockOperator plain = represent(da, rep);
    out.rhs = out.rhs + plain.amplified(t.cliff.generators[k], t.index, t.index);
  }
  BlockOperator diff = out.lhs - out.rhs;
  out.residual = diff.max_block_norm();
  return out;
}

LiftReport check_lift(const AssembledTriple& t, const BaseTriple& base) {
  LiftReport report;
  ComplexMatrix lift = t.lift_isometry();
  ComplexMatrix da = t.dirac_operator().to_dense();
  report.dirac_deviation = op_norm(da * lift - lift * base.dirac);
  std::vector<std::string> names = base.smooth_generators;
  if (names.empty())
    for (const auto& [n, m] : base.base.generators) names.push_back(n);
  for (const auto& name : names) {
    const ComplexMatrix& b = base.base.generator(name);
    AlgebraElement el;
    el.coeff[trivial_label(t.rep->group)] = b;
    ComplexMatrix pa = t.represent_element(el).to_dense();
    report.rep_deviation = std::max(report.rep_deviation, op_norm(pa * lift - lift * b));
  }
  return report;
}

CompressionBoundReport check_compression_bound(const ComplexMatrix& d, const ComplexMatrix& p,
                                               double tol) {
  if (d.rows() != d.cols() || p.rows() != p.cols() || d.rows() != p.rows())
    throw DimensionMismatchError("check_compression_bound: shape mismatch");
  const double scale = std::max(1.0, max_abs(p));
  if (hermiticity_defect(p) > tol * scale || max_abs(p * p - p) > tol * scale)
    throw NotProjectionError("check_compression_bound: p is not a projection");
  CompressionBoundReport report;
  const ComplexMatrix q = ComplexMatrix::Identity(p.rows(), p.cols()) - p;
  const ComplexMatrix pinched = p * d * p + q * d * q;
  const ComplexMatrix comm = d * p - p * d;
  const ComplexMatrix x = comm * q - q * comm;  // [[D,p],(1-p)]
  report.identity_residual = max_abs(pinched - (d + x));
  report.commutator_norm = op_norm(x);
  RealVector before = eig_hermitian(d).eigenvalues;
  RealVector after = eig_hermitian(0.5 * (pinched + pinched.adjoint().eval())).eigenvalues;
  for (Eigen::Index i = 0; i < before.size(); ++i) {
    const double shift = std::abs(after(i) - before(i));
    report.max_eigenvalue_shift = std::max(report.max_eigenvalue_shift, shift);
    if (shift > report.commutator_norm + 1e-10) ++report.weyl_violations;
  }
  return report;
}

SpectrumGrowthReport spectrum_growth_report(
    const std::vector<std::pair<int, const AssembledTriple*>>& family, double cluster_tol) {
  if (family.size() < 2)
    throw InsufficientDataError("spectrum_growth_report: need at least two window sizes");
  SpectrumGrowthReport report;
  std::vector<RealVector> spectra;
  for (const auto& [size, triple] : family) {
    SpectrumGrowthReport::WindowRow row;
    row.size = size;
    row.dimension = triple->index->total;
    RealVector spec = triple->full_spectrum();
    spectra.push_back(spec);
    // multiplicity clustering
    Eigen::Index i = 0;
    while (i < spec.size()) {
      Eigen::Index j = i;
      while (j + 1 < spec.size() && spec(j + 1) - spec(i) <= cluster_tol) ++j;
      row.multiplicities.emplace_back(spec(i), j - i + 1);
      i = j + 1;
    }
    // counting function N(Lambda) at a few sampled thresholds
    const double top = spec.size() ? std::max(std::abs(spec(0)), std::abs(spec(spec.size() - 1))) : 0.0;
    for (int s = 1; s <= 8; ++s) {
      const double lambda = top * s / 8.0;
      Eigen::Index count = 0;
      for (Eigen::Index k = 0; k < spec.size(); ++k)
        if (std::abs(spec(k)) <= lambda) ++count;
      row.counting.emplace_back(lambda, count);
    }
    report.windows.push_back(std::move(row));
  }
  // stabilization of the low-lying spectrum between consecutive windows
  for (std::size_t w = 0; w + 1 < family.size(); ++w) {
    const AssembledTriple* small = family[w].second;
    const AssembledTriple* big = family[w + 1].second;
    double threshold = std::numeric_limits<double>::infinity();
    for (const auto& l : big->rep->labels) {
      if (small->index->find(l) >= 0) continue;
      RealVector spec = big->block_spectrum(l);
      for (Eigen::Index i = 0; i < spec.size(); ++i)
        threshold = std::min(threshold, std::abs(spec(i)));
    }
    if (!std::isfinite(threshold)) threshold = std::numeric_limits<double>::max();
    auto low_part = [&](const RealVector& spec) {
      std::vector<double> low;
      for (Eigen::Index i = 0; i < spec.size(); ++i)
        if (std::abs(spec(i)) < threshold - 1e-12) low.push_back(spec(i));
      return low;
    };
    std::vector<double> lo_small = low_part(spectra[w]);
    std::vector<double> lo_big = low_part(spectra[w + 1]);
    double dev = 0.0;
    if (lo_small.size() != lo_big.size()) {
      dev = std::numeric_limits<double>::infinity();
    } else {
      for (std::size_t i = 0; i < lo_small.size(); ++i)
        dev = std::max(dev, std::abs(lo_small[i] - lo_big[i]));
    }
    report.stabilization_thresholds.push_back(threshold);
    report.stabilization_deviation.push_back(dev);
  }
  return report;
}

}  // namespace speclift
