#include "speclift/free_systems.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <random>
#include <set>
#include <thread>

namespace speclift {

namespace {

using RowMajorMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

ComplexMatrix fold(const ComplexVector& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const RowMajorMatrix>(v.data(), rows, cols);
}

ComplexVector unfold(const ComplexMatrix& m) {
  RowMajorMatrix r = m;
  return Eigen::Map<const ComplexVector>(r.data(), m.size());
}

void run_chunked(Eigen::Index count, int threads, const std::function<void(Eigen::Index, Eigen::Index)>& body) {
  if (threads <= 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = int(std::min<Eigen::Index>(threads, std::max<Eigen::Index>(count, 1)));
  if (threads <= 1 || count < 2) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  const Eigen::Index step = (count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const Eigen::Index lo = t * step, hi = std::min(count, lo + step);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

const ComplexMatrix& RepresentedBase::generator(const std::string& name) const {
  for (const auto& [n, m] : generators)
    if (n == name) return m;
  throw std::invalid_argument("RepresentedBase: no generator named " + name);
}

// -------------------------------------------------------------- freeness

FreenessReport check_freeness(const IsometryFamily& family, Eigen::Index max_columns) {
  FreenessReport report;
  for (const auto& [label, m] : family.mult) {
    const IrrepData data = irrep_data(family.group, label);
    const Eigen::Index d = data.dim;
    std::vector<char> mask = family.interior_mask ? family.interior_mask(label)
                                                  : std::vector<char>(family.ha_dim, 1);
    std::vector<Eigen::Index> interior;
    for (Eigen::Index i = 0; i < family.ha_dim; ++i)
      if (mask[i]) interior.push_back(i);
    FreenessRow row;
    row.label = label;
    row.interior_columns = Eigen::Index(interior.size());
    row.boundary_columns = family.ha_dim - row.interior_columns;
    const Eigen::Index stride = std::max<Eigen::Index>(1, Eigen::Index(interior.size()) / std::max<Eigen::Index>(1, max_columns));
    std::vector<ComplexMatrix> samples;  // sample matrices per group point
    for (const auto& g : family.sample_points) samples.push_back(data.sample(g));
    for (std::size_t pick = 0; pick < interior.size(); pick += std::size_t(stride)) {
      const Eigen::Index i = interior[pick];
      for (Eigen::Index r = 0; r < d; ++r) {
        ComplexVector e = ComplexVector::Zero(family.ha_dim * d);
        e(i * d + r) = 1.0;
        ComplexVector sc = family.apply_s(label, e);
        ComplexVector back = family.apply_s_adj(label, sc);
        // deviation of s*s - 1 restricted to interior rows
        for (Eigen::Index i2 : interior)
          for (Eigen::Index r2 = 0; r2 < d; ++r2) {
            Complex want = (i2 == i && r2 == r) ? 1.0 : 0.0;
            row.isometry_deviation =
                std::max(row.isometry_deviation, std::abs(back(i2 * d + r2) - want));
          }
        // equivariance alpha_g(s) = s (1 (x) sigma_g) against sampled g
        for (std::size_t gi = 0; gi < family.sample_points.size(); ++gi) {
          const GroupPoint& g = family.sample_points[gi];
          ComplexMatrix ein = fold(e, family.ha_dim, d);
          ComplexMatrix shifted(family.ha_dim, d);
          for (Eigen::Index rr = 0; rr < d; ++rr)
            shifted.col(rr) = family.apply_u_inv(g, ein.col(rr).eval());
          ComplexVector lhs_pre = family.apply_s(label, unfold(shifted));
          ComplexMatrix lhs = fold(lhs_pre, family.ha_dim, m);
          for (Eigen::Index q = 0; q < m; ++q)
            lhs.col(q) = family.apply_u(g, lhs.col(q).eval());
          // rhs: s(sigma) (1 (x) sigma_g) e
          ComplexMatrix rhs = ComplexMatrix::Zero(family.ha_dim, m);
          for (Eigen::Index r2 = 0; r2 < d; ++r2) {
            const Complex c = samples[gi](r2, r);
            if (std::abs(c) == 0.0) continue;
            ComplexVector e2 = ComplexVector::Zero(family.ha_dim * d);
            e2(i * d + r2) = 1.0;
            rhs += c * fold(family.apply_s(label, e2), family.ha_dim, m);
          }
          ComplexMatrix diff = lhs - rhs;
          for (Eigen::Index i2 : interior)
            row.equivariance_deviation =
                std::max(row.equivariance_deviation, diff.row(i2).cwiseAbs().maxCoeff());
        }
        ++row.columns_checked;
      }
    }
    report.max_isometry_deviation = std::max(report.max_isometry_deviation, row.isometry_deviation);
    report.max_equivariance_deviation =
        std::max(report.max_equivariance_deviation, row.equivariance_deviation);
    report.rows.push_back(std::move(row));
  }
  return report;
}

// ------------------------------------------- factor system from isometries

namespace {

struct ExtractionState {
  IsometryFamily family;
  std::map<std::pair<IrrepLabel, IrrepLabel>, ComplexMatrix> cocycle_cache;
  std::mutex cache_mutex;
};

ComplexMatrix extract_coaction(const IsometryFamily& fam, const IrrepLabel& label,
                               const ComplexMatrix& b) {
  const IrrepData data = irrep_data(fam.group, label);
  const Eigen::Index d = data.dim;
  const Eigen::Index m = fam.mult.at(label);
  const Eigen::Index hb = fam.hb_dim, ha = fam.ha_dim;
  ComplexMatrix out(hb * m, hb * m);
  for (Eigen::Index j = 0; j < hb; ++j) {
    const ComplexVector va = fam.embed_base.col(j);
    for (Eigen::Index q = 0; q < m; ++q) {
      ComplexMatrix w = ComplexMatrix::Zero(ha, m);
      w.col(q) = va;
      ComplexVector u1 = fam.apply_s_adj(label, unfold(w));  // (ha, d)
      ComplexMatrix u1m = fold(u1, ha, d);
      ComplexMatrix u2m(ha, d);
      for (Eigen::Index r = 0; r < d; ++r) u2m.col(r) = fam.apply_base(b, u1m.col(r).eval());
      ComplexVector u3 = fam.apply_s(label, unfold(u2m));  // (ha, m)
      ComplexMatrix u3m = fold(u3, ha, m);
      ComplexMatrix compressed = fam.embed_base.adjoint() * u3m;  // hb x m
      for (Eigen::Index i2 = 0; i2 < hb; ++i2)
        for (Eigen::Index q2 = 0; q2 < m; ++q2) out(i2 * m + q2, j * m + q) = compressed(i2, q2);
    }
  }
  return out;
}

ComplexMatrix extract_cocycle(const IsometryFamily& fam, const IrrepLabel& s,
                              const IrrepLabel& t) {
  const GroupModel& g = fam.group;
  const IrrepData ds = irrep_data(g, s), dt = irrep_data(g, t);
  const Eigen::Index dsd = ds.dim, dtd = dt.dim;
  const Eigen::Index ms = fam.mult.at(s), mt = fam.mult.at(t);
  const Eigen::Index hb = fam.hb_dim, ha = fam.ha_dim;
  const auto branches = tensor_decompose(g, s, t);
  Eigen::Index out_rows = 0;
  for (const auto& br : branches) {
    if (!fam.window.in_margin(br.label))
      throw WindowOverflowError("extract_cocycle: product label outside the margin");
    out_rows += hb * fam.mult.at(br.label);
  }
  ComplexMatrix out(out_rows, hb * ms * mt);
  for (Eigen::Index j = 0; j < hb; ++j) {
    const ComplexVector va = fam.embed_base.col(j);
    for (Eigen::Index q = 0; q < ms; ++q)
      for (Eigen::Index u = 0; u < mt; ++u) {
        // s(t)* with the sigma multiplicity slot a bystander
        ComplexMatrix w = ComplexMatrix::Zero(ha, mt);
        w.col(u) = va;
        ComplexMatrix u1 = fold(fam.apply_s_adj(t, unfold(w)), ha, dtd);  // (ha, d_t)
        // s(s)* acting per V_t slice
        ComplexMatrix u2(ha, dsd * dtd);  // columns indexed (r_s * dtd + r_t)
        for (Eigen::Index rt = 0; rt < dtd; ++rt) {
          ComplexMatrix ws = ComplexMatrix::Zero(ha, ms);
          ws.col(q) = u1.col(rt);
          ComplexMatrix got = fold(fam.apply_s_adj(s, unfold(ws)), ha, dsd);  // (ha, d_s)
          for (Eigen::Index rs = 0; rs < dsd; ++rs) u2.col(rs * dtd + rt) = got.col(rs);
        }
        // s(s (x) t) branchwise: contract with the intertwiner, apply s(rho)
        Eigen::Index offset = 0;
        const Eigen::Index col = (j * ms + q) * mt + u;
        for (const auto& br : branches) {
          const IrrepData dr = irrep_data(g, br.label);
          const Eigen::Index mr = fam.mult.at(br.label);
          ComplexMatrix y = ComplexMatrix::Zero(ha, dr.dim);
          for (Eigen::Index a = 0; a < dr.dim; ++a)
            for (Eigen::Index rs = 0; rs < dsd; ++rs)
              for (Eigen::Index rt = 0; rt < dtd; ++rt) {
                const Complex c = std::conj(br.intertwiner(rs * dtd + rt, a));
                if (c != Complex(0.0, 0.0)) y.col(a) += c * u2.col(rs * dtd + rt);
              }
          ComplexMatrix u4 = fold(fam.apply_s(br.label, unfold(y)), ha, mr);
          ComplexMatrix compressed = fam.embed_base.adjoint() * u4;  // hb x mr
          for (Eigen::Index i2 = 0; i2 < hb; ++i2)
            for (Eigen::Index q2 = 0; q2 < mr; ++q2)
              out(offset + i2 * mr + q2, col) = compressed(i2, q2);
          offset += hb * mr;
        }
      }
  }
  return out;
}

}  // namespace

int FactorSystem::mult_of(const IrrepLabel& l) const {
  auto it = mult.find(l);
  if (it == mult.end()) throw WindowOverflowError("FactorSystem: no multiplicity for " + l.to_string());
  return it->second;
}

ComplexMatrix FactorSystem::projection(const IrrepLabel& l) const {
  return coaction(l, ComplexMatrix::Identity(hb_dim, hb_dim));
}

FactorSystem FactorSystem::amplified(int extra_dim) const {
  FactorSystem out;
  out.group = group;
  out.window = window;
  out.hb_dim = hb_dim * extra_dim;
  out.mult = mult;
  const Eigen::Index hb = hb_dim;
  const int s = extra_dim;
  auto inner_coaction = coaction;
  auto inner_cocycle = cocycle;
  auto multmap = mult;
  out.coaction = [inner_coaction, hb, s, multmap](const IrrepLabel& l, const ComplexMatrix& bfull) {
    const int m = multmap.at(l);
    ComplexMatrix res = ComplexMatrix::Zero(hb * s * m, hb * s * m);
    for (int u = 0; u < s; ++u)
      for (int v = 0; v < s; ++v) {
        ComplexMatrix buv(hb, hb);
        for (Eigen::Index i = 0; i < hb; ++i)
          for (Eigen::Index j = 0; j < hb; ++j) buv(i, j) = bfull(i * s + u, j * s + v);
        ComplexMatrix g = inner_coaction(l, buv);
        for (Eigen::Index i = 0; i < hb; ++i)
          for (int q = 0; q < m; ++q)
            for (Eigen::Index j = 0; j < hb; ++j)
              for (int q2 = 0; q2 < m; ++q2)
                res((i * s + u) * m + q, (j * s + v) * m + q2) = g(i * m + q, j * m + q2);
      }
    return res;
  };
  out.cocycle = [inner_cocycle, hb, s, multmap](const IrrepLabel& a, const IrrepLabel& b) {
    ComplexMatrix w = inner_cocycle(a, b);
    const int ma = multmap.at(a), mb = multmap.at(b);
    const Eigen::Index mout = w.rows() / hb;
    ComplexMatrix res = ComplexMatrix::Zero(hb * s * mout, hb * s * ma * mb);
    for (Eigen::Index i = 0; i < hb; ++i)
      for (Eigen::Index q = 0; q < mout; ++q)
        for (Eigen::Index j = 0; j < hb; ++j)
          for (int qq = 0; qq < ma * mb; ++qq) {
            const Complex val = w(i * mout + q, j * ma * mb + qq);
            if (val == Complex(0.0, 0.0)) continue;
            for (int u = 0; u < s; ++u)
              res((i * s + u) * mout + q, (Eigen::Index(j) * s + u) * ma * mb + qq) = val;
          }
    return res;
  };
  if (base_interior) {
    auto inner_mask = base_interior;
    out.base_interior = [inner_mask, s](int len) {
      std::vector<char> scalar = inner_mask(len);
      std::vector<char> full(scalar.size() * std::size_t(s));
      for (std::size_t i = 0; i < scalar.size(); ++i)
        for (int u = 0; u < s; ++u) full[i * s + u] = scalar[i];
      return full;
    };
  }
  return out;
}

FactorSystem factor_system_from_isometries(const RepresentedBase& base,
                                           const IsometryFamily& family, double tol) {
  if (base.hb_dim != family.hb_dim)
    throw ShapeMismatchError("factor_system_from_isometries: base dimension mismatch");
  if (!family.group.abelian())
    throw UnsupportedGroupError(
        "factor_system_from_isometries: only abelian structure groups are supported");
  FreenessReport freeness = check_freeness(family, 96);
  if (!freeness.pass(tol))
    throw FreenessViolationError(
        "factor_system_from_isometries: freeness deviation " +
        std::to_string(std::max(freeness.max_isometry_deviation,
                                freeness.max_equivariance_deviation)));
  auto state = std::make_shared<ExtractionState>();
  state->family = family;

  FactorSystem fs;
  fs.group = family.group;
  fs.window = family.window;
  fs.hb_dim = family.hb_dim;
  fs.mult.clear();
  for (const auto& [l, m] : family.mult) fs.mult[l] = m;
  fs.base_interior = family.base_interior;
  fs.coaction = [state](const IrrepLabel& l, const ComplexMatrix& b) {
    return extract_coaction(state->family, l, b);
  };
  fs.cocycle = [state](const IrrepLabel& a, const IrrepLabel& b) {
    {
      std::lock_guard<std::mutex> lock(state->cache_mutex);
      auto it = state->cocycle_cache.find({a, b});
      if (it != state->cocycle_cache.end()) return it->second;
    }
    ComplexMatrix w = extract_cocycle(state->family, a, b);
    std::lock_guard<std::mutex> lock(state->cache_mutex);
    return state->cocycle_cache.emplace(std::make_pair(a, b), std::move(w)).first->second;
  };
  // normalization: s(1) = 1 so p(1) must be the identity and m_1 = 1
  const IrrepLabel triv = trivial_label(fs.group);
  if (fs.mult_of(triv) != 1)
    throw FreenessViolationError("factor_system_from_isometries: trivial multiplicity is not one");
  if (max_abs(fs.projection(triv) - ComplexMatrix::Identity(fs.hb_dim, fs.hb_dim)) > 1e-8)
    throw FreenessViolationError("factor_system_from_isometries: family is not normalized");
  return fs;
}

// -------------------------------------------------------- verification

namespace {

// forward declaration; defined with the unit-coaction table below
struct UnitCoactions;
ComplexMatrix coact_13(const FactorSystem& fs, const IrrepLabel& t, const ComplexMatrix& g,
                       int ms, const UnitCoactions* units);

/// coactions of every matrix unit of End(H_B), exploiting linearity so that
/// verification loops apply gamma through weighted sums instead of fresh
/// extractions
struct UnitCoactions {
  Eigen::Index hb = 0;
  std::map<IrrepLabel, std::vector<ComplexMatrix>> units;

  void prepare(const FactorSystem& fs, const IrrepLabel& l) {
    if (units.count(l)) return;
    std::vector<ComplexMatrix> table;
    table.reserve(std::size_t(hb) * hb);
    for (Eigen::Index i = 0; i < hb; ++i)
      for (Eigen::Index j = 0; j < hb; ++j) {
        ComplexMatrix e = ComplexMatrix::Zero(hb, hb);
        e(i, j) = 1.0;
        table.push_back(fs.coaction(l, e));
      }
    units[l] = std::move(table);
  }
  ComplexMatrix apply(const IrrepLabel& l, const ComplexMatrix& b) const {
    const auto& table = units.at(l);
    ComplexMatrix out = ComplexMatrix::Zero(table[0].rows(), table[0].cols());
    for (Eigen::Index i = 0; i < hb; ++i)
      for (Eigen::Index j = 0; j < hb; ++j) {
        const Complex c = b(i, j);
        if (c != Complex(0.0, 0.0)) out += c * table[std::size_t(i * hb + j)];
      }
    return out;
  }
};

/// (gamma_t)_13 applied to a matrix G on H_B (x) C^{ms}: result on H_B (x) C^{ms} (x) C^{mt}.
ComplexMatrix coact_13(const FactorSystem& fs, const IrrepLabel& t, const ComplexMatrix& g,
                       int ms, const UnitCoactions* units) {
  const Eigen::Index hb = fs.hb_dim;
  const int mt = fs.mult_of(t);
  ComplexMatrix out = ComplexMatrix::Zero(hb * ms * mt, hb * ms * mt);
  for (int a = 0; a < ms; ++a)
    for (int b = 0; b < ms; ++b) {
      ComplexMatrix blk(hb, hb);
      for (Eigen::Index i = 0; i < hb; ++i)
        for (Eigen::Index j = 0; j < hb; ++j) blk(i, j) = g(i * ms + a, j * ms + b);
      if (max_abs(blk) == 0.0) continue;
      ComplexMatrix coacted = units ? units->apply(t, blk) : fs.coaction(t, blk);
      for (Eigen::Index i = 0; i < hb; ++i)
        for (int u = 0; u < mt; ++u)
          for (Eigen::Index j = 0; j < hb; ++j)
            for (int v = 0; v < mt; ++v)
              out((i * ms + a) * mt + u, (j * ms + b) * mt + v) = coacted(i * mt + u, j * mt + v);
    }
  return out;
}

/// (gamma_r)_14 applied to omega(s,t): legs (B, m_out | m_s m_t) -> append m_r on both sides.
ComplexMatrix coact_14(const FactorSystem& fs, const IrrepLabel& r, const ComplexMatrix& w,
                       Eigen::Index mout, Eigen::Index mst, const UnitCoactions* units) {
  const Eigen::Index hb = fs.hb_dim;
  const int mr = fs.mult_of(r);
  ComplexMatrix out = ComplexMatrix::Zero(hb * mout * mr, hb * mst * mr);
  for (Eigen::Index a = 0; a < mout; ++a)
    for (Eigen::Index b = 0; b < mst; ++b) {
      ComplexMatrix blk(hb, hb);
      for (Eigen::Index i = 0; i < hb; ++i)
        for (Eigen::Index j = 0; j < hb; ++j) blk(i, j) = w(i * mout + a, j * mst + b);
      if (max_abs(blk) == 0.0) continue;
      ComplexMatrix coacted = units ? units->apply(r, blk) : fs.coaction(r, blk);
      for (Eigen::Index i = 0; i < hb; ++i)
        for (int u = 0; u < mr; ++u)
          for (Eigen::Index j = 0; j < hb; ++j)
            for (int v = 0; v < mr; ++v)
              out((i * mout + a) * mr + u, (j * mst + b) * mr + v) =
                  coacted(i * mr + u, j * mr + v);
    }
  return out;
}

/// omega(t,r) amplified with a bystander m_s slot at leg 2.
ComplexMatrix amp_134(const ComplexMatrix& w, Eigen::Index hb, Eigen::Index ms, Eigen::Index mtr,
                      Eigen::Index mt_mr) {
  ComplexMatrix out = ComplexMatrix::Zero(hb * ms * mtr, hb * ms * mt_mr);
  for (Eigen::Index i = 0; i < hb; ++i)
    for (Eigen::Index a = 0; a < ms; ++a)
      for (Eigen::Index q = 0; q < mtr; ++q)
        for (Eigen::Index j = 0; j < hb; ++j)
          for (Eigen::Index qq = 0; qq < mt_mr; ++qq) {
            const Complex val = w(i * mtr + q, j * mt_mr + qq);
            if (val != Complex(0.0, 0.0)) out((i * ms + a) * mtr + q, (j * ms + a) * mt_mr + qq) = val;
          }
  return out;
}

double masked_max(const ComplexMatrix& diff, const std::vector<char>& col_mask, Eigen::Index inner) {
  // col mask applies to the slow H_B part of the column index
  double worst = 0.0;
  for (Eigen::Index c = 0; c < diff.cols(); ++c) {
    if (!col_mask.empty() && !col_mask[std::size_t(c / inner)]) continue;
    worst = std::max(worst, diff.col(c).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<ComplexMatrix> sample_words(const RepresentedBase& base, int max_len, int count,
                                        std::uint64_t seed, std::vector<int>* lengths) {
  std::vector<ComplexMatrix> letters;
  for (const auto& [name, m] : base.generators) {
    letters.push_back(m);
    letters.push_back(m.adjoint());
  }
  std::mt19937_64 gen(seed);
  std::vector<ComplexMatrix> words;
  for (int i = 0; i < count && !letters.empty(); ++i) {
    const int len = 1 + int(gen() % std::uint64_t(std::max(1, max_len)));
    ComplexMatrix w = ComplexMatrix::Identity(base.hb_dim, base.hb_dim);
    for (int l = 0; l < len; ++l) w = w * letters[gen() % letters.size()];
    words.push_back(std::move(w));
    if (lengths) lengths->push_back(len);
  }
  return words;
}

}  // namespace

double FactorSystemReport::worst() const {
  return std::max({range_identity, support_identity, covariance, cocycle_identity,
                   hom_multiplicative, hom_adjoint, unit_projection});
}

FactorSystemReport verify_factor_system(const FactorSystem& fs, const RepresentedBase& base,
                                        const FactorSystemVerifyOptions& opts) {
  FactorSystemReport report;
  const GroupModel& g = fs.group;
  const Eigen::Index hb = fs.hb_dim;
  const ComplexMatrix one = ComplexMatrix::Identity(hb, hb);

  // unit projections
  for (const auto& l : fs.window.labels) {
    ComplexMatrix p = fs.projection(l);
    report.unit_projection = std::max(report.unit_projection, max_abs(p * p - p));
    report.unit_projection = std::max(report.unit_projection, hermiticity_defect(p));
  }

  // pair list with in-margin products
  std::vector<std::pair<IrrepLabel, IrrepLabel>> pairs;
  for (const auto& s : fs.window.labels)
    for (const auto& t : fs.window.labels) {
      bool ok = true;
      for (const auto& br : tensor_decompose(g, s, t))
        if (!fs.window.in_margin(br.label)) ok = false;
      if (ok) pairs.emplace_back(s, t);
    }
  report.pairs_checked = Eigen::Index(pairs.size());

  // sampled b's for covariance and *-homomorphism checks
  std::vector<ComplexMatrix> covariance_samples;
  for (const auto& [name, m] : base.generators) covariance_samples.push_back(m);
  std::vector<char> gen_mask = fs.base_interior ? fs.base_interior(1) : std::vector<char>();

  // precompute coactions of the unit, of each sampled generator, and of the
  // matrix units (for the linear fast path) per label
  std::map<IrrepLabel, ComplexMatrix> unit_gamma;
  std::map<std::pair<IrrepLabel, std::size_t>, ComplexMatrix> gen_gamma;
  UnitCoactions units;
  units.hb = hb;
  const bool use_units = hb <= 32;
  for (const auto& [s, t] : pairs) {
    const IrrepLabel st = product_label(g, s, t);
    for (const IrrepLabel& l : {s, t, st}) {
      if (!unit_gamma.count(l)) unit_gamma[l] = fs.coaction(l, one);
      for (std::size_t bi = 0; bi < covariance_samples.size(); ++bi)
        if (!gen_gamma.count({l, bi})) gen_gamma[{l, bi}] = fs.coaction(l, covariance_samples[bi]);
    }
    if (use_units) units.prepare(fs, t);
    fs.cocycle(s, t);
  }

  std::mutex merge_mutex;
  run_chunked(Eigen::Index(pairs.size()), opts.threads, [&](Eigen::Index lo, Eigen::Index hi) {
    double range_dev = 0.0, support_dev = 0.0, cov_dev = 0.0;
    for (Eigen::Index idx = lo; idx < hi; ++idx) {
      const auto& [s, t] = pairs[idx];
      const IrrepLabel st = product_label(g, s, t);
      const int ms = fs.mult_of(s), mt = fs.mult_of(t);
      ComplexMatrix w = fs.cocycle(s, t);
      range_dev = std::max(range_dev, max_abs(w * w.adjoint() - unit_gamma.at(st)));
      ComplexMatrix rhs = coact_13(fs, t, unit_gamma.at(s), ms, use_units ? &units : nullptr);
      support_dev = std::max(support_dev, max_abs(w.adjoint() * w - rhs));
      for (std::size_t bi = 0; bi < covariance_samples.size(); ++bi) {
        ComplexMatrix lhs = gen_gamma.at({st, bi}) * w;
        ComplexMatrix rhs2 =
            w * coact_13(fs, t, gen_gamma.at({s, bi}), ms, use_units ? &units : nullptr);
        cov_dev = std::max(cov_dev, masked_max(lhs - rhs2, gen_mask, Eigen::Index(ms) * mt));
      }
    }
    std::lock_guard<std::mutex> lock(merge_mutex);
    report.range_identity = std::max(report.range_identity, range_dev);
    report.support_identity = std::max(report.support_identity, support_dev);
    report.covariance = std::max(report.covariance, cov_dev);
  });

  // cocycle identity over window triples whose products stay in the margin
  std::vector<std::array<IrrepLabel, 3>> triples;
  for (const auto& s : fs.window.labels)
    for (const auto& t : fs.window.labels) {
      const IrrepLabel st = product_label(g, s, t);
      if (!fs.window.in_margin(st)) continue;
      for (const auto& r : fs.window.labels) {
        const IrrepLabel tr = product_label(g, t, r);
        if (!fs.window.in_margin(tr)) continue;
        if (!fs.window.in_margin(product_label(g, st, r))) continue;
        triples.push_back({s, t, r});
      }
    }
  report.triples_checked = Eigen::Index(triples.size());
  // snapshot every needed cocycle into an indexed table and reduce each triple
  // to flat indices, so the parallel sweep touches no label arithmetic
  std::map<std::pair<IrrepLabel, IrrepLabel>, int> cocycle_index;
  std::vector<ComplexMatrix> cocycle_table;
  auto snapshot = [&](const IrrepLabel& a, const IrrepLabel& b) {
    auto key = std::make_pair(a, b);
    auto it = cocycle_index.find(key);
    if (it != cocycle_index.end()) return it->second;
    cocycle_table.push_back(fs.cocycle(a, b));
    cocycle_index[key] = int(cocycle_table.size()) - 1;
    return int(cocycle_table.size()) - 1;
  };
  struct TripleTask {
    int w_s_tr, w_t_r, w_st_r, w_s_t;
    const std::vector<ComplexMatrix>* units_r = nullptr;
    const IrrepLabel* r = nullptr;
    int ms, mt, mr, mst, mtr;
  };
  std::vector<TripleTask> tasks;
  tasks.reserve(triples.size());
  for (const auto& tri : triples) {
    const auto& [s, t, r] = tri;
    const IrrepLabel st = product_label(g, s, t);
    const IrrepLabel tr = product_label(g, t, r);
    TripleTask task;
    task.w_s_tr = snapshot(s, tr);
    task.w_t_r = snapshot(t, r);
    task.w_st_r = snapshot(st, r);
    task.w_s_t = snapshot(s, t);
    task.ms = fs.mult_of(s);
    task.mt = fs.mult_of(t);
    task.mr = fs.mult_of(r);
    task.mst = fs.mult_of(st);
    task.mtr = fs.mult_of(tr);
    task.r = &tri[2];
    if (use_units) {
      units.prepare(fs, tri[2]);
      task.units_r = &units.units.at(tri[2]);
    }
    tasks.push_back(task);
  }
  run_chunked(Eigen::Index(tasks.size()), opts.threads, [&](Eigen::Index lo, Eigen::Index hi) {
    double worst = 0.0;
    ComplexMatrix rhs_unit(hb, hb), diff(hb, hb);
    for (Eigen::Index idx = lo; idx < hi; ++idx) {
      const TripleTask& task = tasks[idx];
      const ComplexMatrix& w_s_tr = cocycle_table[task.w_s_tr];
      const ComplexMatrix& w_t_r = cocycle_table[task.w_t_r];
      const ComplexMatrix& w_st_r = cocycle_table[task.w_st_r];
      const ComplexMatrix& w_s_t = cocycle_table[task.w_s_t];
      double dev;
      if (task.ms == 1 && task.mt == 1 && task.mr == 1 && task.mst == 1 && task.mtr == 1 &&
          task.units_r) {
        rhs_unit.setZero();
        const auto& table = *task.units_r;
        for (Eigen::Index i = 0; i < hb; ++i)
          for (Eigen::Index j = 0; j < hb; ++j) {
            const Complex c = w_s_t(i, j);
            if (c != Complex(0.0, 0.0)) rhs_unit.noalias() += c * table[std::size_t(i * hb + j)];
          }
        diff.noalias() = w_s_tr * w_t_r;
        diff.noalias() -= w_st_r * rhs_unit;
        dev = max_abs(diff);
      } else {
        ComplexMatrix lhs =
            w_s_tr * amp_134(w_t_r, hb, task.ms, task.mtr, Eigen::Index(task.mt) * task.mr);
        ComplexMatrix rhs = w_st_r * coact_14(fs, *task.r, w_s_t, task.mst,
                                              Eigen::Index(task.ms) * task.mt,
                                              use_units ? &units : nullptr);
        dev = max_abs(lhs - rhs);
      }
      worst = std::max(worst, dev);
    }
    std::lock_guard<std::mutex> lock(merge_mutex);
    report.cocycle_identity = std::max(report.cocycle_identity, worst);
  });

  // *-homomorphism property on sampled generator words
  std::vector<int> lengths;
  std::vector<ComplexMatrix> words =
      sample_words(base, std::max(1, opts.max_word_length / 2), opts.word_samples, opts.seed,
                   &lengths);
  std::vector<IrrepLabel> hom_labels = fs.window.labels;
  if (hom_labels.size() > 8) {
    std::vector<IrrepLabel> picked;
    const std::size_t stride = hom_labels.size() / 8;
    for (std::size_t i = 0; i < hom_labels.size(); i += stride) picked.push_back(hom_labels[i]);
    hom_labels = picked;
  }
  for (std::size_t wi = 0; wi + 1 < words.size(); wi += 2) {
    const ComplexMatrix& b1 = words[wi];
    const ComplexMatrix& b2 = words[wi + 1];
    const int total_len = lengths[wi] + lengths[wi + 1];
    std::vector<char> mask = fs.base_interior ? fs.base_interior(total_len) : std::vector<char>();
    for (const auto& l : hom_labels) {
      const int m = fs.mult_of(l);
      ComplexMatrix lhs = fs.coaction(l, (b1 * b2).eval());
      ComplexMatrix rhs = fs.coaction(l, b1) * fs.coaction(l, b2);
      report.hom_multiplicative =
          std::max(report.hom_multiplicative, masked_max(lhs - rhs, mask, m));
      ComplexMatrix lhs2 = fs.coaction(l, b1.adjoint().eval());
      ComplexMatrix rhs2 = fs.coaction(l, b1).adjoint();
      // both row and column H_B coordinates must be interior for the adjoint check
      if (mask.empty()) {
        report.hom_adjoint = std::max(report.hom_adjoint, max_abs(lhs2 - rhs2));
      } else {
        ComplexMatrix diff = lhs2 - rhs2;
        for (Eigen::Index c = 0; c < diff.cols(); ++c) {
          if (!mask[std::size_t(c / m)]) continue;
          for (Eigen::Index rr = 0; rr < diff.rows(); ++rr) {
            if (!mask[std::size_t(rr / m)]) continue;
            report.hom_adjoint = std::max(report.hom_adjoint, std::abs(diff(rr, c)));
          }
        }
      }
    }
  }
  return report;
}

// ------------------------------------------------------ algebra elements

AlgebraElement& AlgebraElement::operator+=(const AlgebraElement& other) {
  for (const auto& [l, m] : other.coeff) {
    auto it = coeff.find(l);
    if (it == coeff.end())
      coeff[l] = m;
    else
      it->second += m;
  }
  return *this;
}

AlgebraElement algebra_unit(const FactorSystem& fs) {
  AlgebraElement a;
  a.coeff[trivial_label(fs.group)] = ComplexMatrix::Identity(fs.hb_dim, fs.hb_dim);
  return a;
}

AlgebraElement algebra_monomial(const FactorSystem& fs, const IrrepLabel& label,
                                const ComplexMatrix& b, int mult_index, int conj_index) {
  if (!fs.window.in_margin(label))
    throw WindowOverflowError("algebra_monomial: label outside margin");
  const int m = fs.mult_of(label);
  const int d = irrep_data(fs.group, label).dim;
  if (mult_index < 0 || mult_index >= m || conj_index < 0 || conj_index >= d)
    throw DimensionMismatchError("algebra_monomial: slot index out of range");
  AlgebraElement a;
  ComplexMatrix c = ComplexMatrix::Zero(fs.hb_dim * m * d, fs.hb_dim);
  for (Eigen::Index i = 0; i < fs.hb_dim; ++i)
    for (Eigen::Index j = 0; j < fs.hb_dim; ++j)
      c((i * m + mult_index) * d + conj_index, j) = b(i, j);
  a.coeff[label] = std::move(c);
  return a;
}

AlgebraElement algebra_scaled(const AlgebraElement& a, const Complex& z) {
  AlgebraElement out = a;
  for (auto& [l, m] : out.coeff) m *= z;
  return out;
}

AlgebraElement algebra_translate(const FactorSystem& fs, const AlgebraElement& a,
                                 const GroupPoint& g) {
  AlgebraElement out;
  for (const auto& [l, c] : a.coeff) {
    const IrrepData data = irrep_data(fs.group, l);
    const int m = fs.mult_of(l);
    const int d = data.dim;
    ComplexMatrix sg = data.sample_conj(g);
    ComplexMatrix res = ComplexMatrix::Zero(c.rows(), c.cols());
    for (Eigen::Index i = 0; i < fs.hb_dim; ++i)
      for (int q = 0; q < m; ++q)
        for (int r = 0; r < d; ++r)
          for (int r2 = 0; r2 < d; ++r2)
            res.row((i * m + q) * d + r) += sg(r, r2) * c.row((i * m + q) * d + r2);
    out.coeff[l] = std::move(res);
  }
  return out;
}

namespace {

/// The uncompressed pi-style block of the single-label term (sigma, x) acting on
/// the tau slot: per branch rho a matrix (hb m_rho d_rho) x (hb m_tau d_tau).
std::map<IrrepLabel, ComplexMatrix> uncompressed_blocks(const FactorSystem& fs,
                                                        const IrrepLabel& sigma,
                                                        const ComplexMatrix& x,
                                                        const IrrepLabel& tau) {
  const GroupModel& g = fs.group;
  const Eigen::Index hb = fs.hb_dim;
  const IrrepData dsig = irrep_data(g, sigma), dtau = irrep_data(g, tau);
  const Eigen::Index ms = fs.mult_of(sigma), mt = fs.mult_of(tau);
  const Eigen::Index ds = dsig.dim, dt = dtau.dim;
  const auto branches = tensor_decompose(g, sigma, tau);
  for (const auto& br : branches)
    if (!fs.window.in_margin(br.label))
      throw WindowOverflowError("product label " + br.label.to_string() + " escapes the margin");
  ComplexMatrix omega = fs.cocycle(sigma, tau);

  std::map<IrrepLabel, ComplexMatrix> out;
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const auto& br : branches) {
    const Eigen::Index mr = fs.mult_of(br.label);
    const Eigen::Index dr = irrep_data(g, br.label).dim;
    out[br.label] = ComplexMatrix::Zero(hb * mr * dr, hb * mt * dt);
    offsets.push_back(off);
    off += hb * mr;
  }

  for (Eigen::Index q = 0; q < ms; ++q)
    for (Eigen::Index r = 0; r < ds; ++r) {
      ComplexMatrix b(hb, hb);
      for (Eigen::Index i = 0; i < hb; ++i)
        for (Eigen::Index j = 0; j < hb; ++j) b(i, j) = x((i * ms + q) * ds + r, j);
      if (max_abs(b) == 0.0) continue;
      ComplexMatrix gt = fs.coaction(tau, b);  // (hb mt)^2
      // insert the sigma multiplicity slot: rows (i ms + q) mt + t <- (i mt + t)
      ComplexMatrix lifted = ComplexMatrix::Zero(hb * ms * mt, hb * mt);
      for (Eigen::Index i = 0; i < hb; ++i)
        for (Eigen::Index t = 0; t < mt; ++t)
          lifted.row((i * ms + q) * mt + t) = gt.row(i * mt + t);
      ComplexMatrix a_full = omega * lifted;  // (hb m_out_total) x (hb mt)
      for (std::size_t bi = 0; bi < branches.size(); ++bi) {
        const auto& br = branches[bi];
        const Eigen::Index mr = fs.mult_of(br.label);
        const Eigen::Index dr = irrep_data(g, br.label).dim;
        ComplexMatrix a_rho = a_full.middleRows(offsets[bi] * 1, hb * mr);
        // conjugate-leg factor: C[rr, t] = iota[(r d_t + t), rr]
        ComplexMatrix c(dr, dt);
        for (Eigen::Index rr = 0; rr < dr; ++rr)
          for (Eigen::Index t = 0; t < dt; ++t) c(rr, t) = br.intertwiner(r * dt + t, rr);
        if (max_abs(c) == 0.0) continue;
        out[br.label] += kron(a_rho, c);
      }
    }
  return out;
}

}  // namespace

AlgebraElement multiply(const AlgebraElement& a, const AlgebraElement& b, const FactorSystem& fs) {
  AlgebraElement out;
  for (const auto& [sigma, x] : a.coeff)
    for (const auto& [tau, y] : b.coeff) {
      auto blocks = uncompressed_blocks(fs, sigma, x, tau);
      for (const auto& [rho, m] : blocks) {
        ComplexMatrix z = m * y;
        auto it = out.coeff.find(rho);
        if (it == out.coeff.end())
          out.coeff[rho] = std::move(z);
        else
          it->second += z;
      }
    }
  return out;
}

// ------------------------------------------------------- block operators

int BlockIndex::find(const IrrepLabel& l) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == l) return int(i);
  return -1;
}

std::shared_ptr<BlockIndex> BlockIndex::make(std::vector<IrrepLabel> labels,
                                             std::vector<Eigen::Index> dims) {
  auto idx = std::make_shared<BlockIndex>();
  idx->labels = std::move(labels);
  idx->dims = std::move(dims);
  Eigen::Index off = 0;
  for (auto d : idx->dims) {
    idx->offsets.push_back(off);
    off += d;
  }
  idx->total = off;
  return idx;
}

BlockOperator BlockOperator::zero(std::shared_ptr<const BlockIndex> rows,
                                  std::shared_ptr<const BlockIndex> cols) {
  BlockOperator op;
  op.rows = std::move(rows);
  op.cols = std::move(cols);
  return op;
}

BlockOperator BlockOperator::block_diagonal(std::shared_ptr<const BlockIndex> index,
                                            const std::map<IrrepLabel, ComplexMatrix>& diag) {
  BlockOperator op = zero(index, index);
  for (const auto& [l, m] : diag) {
    const int i = index->find(l);
    if (i < 0) continue;
    op.add_block(i, i, m);
  }
  return op;
}

void BlockOperator::add_block(int row, int col, const ComplexMatrix& m) {
  if (m.rows() != rows->dims[row] || m.cols() != cols->dims[col])
    throw ShapeMismatchError("BlockOperator::add_block: block shape mismatch");
  auto key = std::make_pair(row, col);
  auto it = blocks.find(key);
  if (it == blocks.end())
    blocks[key] = m;
  else
    it->second += m;
}

BlockOperator BlockOperator::operator*(const BlockOperator& other) const {
  BlockOperator out = zero(rows, other.cols);
  for (const auto& [ka, ma] : blocks)
    for (const auto& [kb, mb] : other.blocks) {
      if (ka.second != kb.first) continue;
      out.add_block(ka.first, kb.second, (ma * mb).eval());
    }
  return out;
}

BlockOperator BlockOperator::operator+(const BlockOperator& other) const {
  BlockOperator out = *this;
  for (const auto& [k, m] : other.blocks) {
    auto it = out.blocks.find(k);
    if (it == out.blocks.end())
      out.blocks[k] = m;
    else
      it->second += m;
  }
  return out;
}

BlockOperator BlockOperator::operator-(const BlockOperator& other) const {
  return *this + other.scaled(Complex(-1.0, 0.0));
}

BlockOperator BlockOperator::adjoint() const {
  BlockOperator out = zero(cols, rows);
  for (const auto& [k, m] : blocks) out.add_block(k.second, k.first, m.adjoint().eval());
  return out;
}

BlockOperator BlockOperator::scaled(const Complex& z) const {
  BlockOperator out = *this;
  for (auto& [k, m] : out.blocks) m *= z;
  return out;
}

BlockOperator BlockOperator::amplified(const ComplexMatrix& trailing,
                                       std::shared_ptr<const BlockIndex> new_rows,
                                       std::shared_ptr<const BlockIndex> new_cols) const {
  BlockOperator out = zero(std::move(new_rows), std::move(new_cols));
  for (const auto& [k, m] : blocks) out.add_block(k.first, k.second, kron(m, trailing));
  return out;
}

ComplexVector BlockOperator::apply(const ComplexVector& v) const {
  ComplexVector out = ComplexVector::Zero(rows->total);
  for (const auto& [k, m] : blocks)
    out.segment(rows->offsets[k.first], rows->dims[k.first]) +=
        m * v.segment(cols->offsets[k.second], cols->dims[k.second]);
  return out;
}

ComplexMatrix BlockOperator::to_dense() const {
  ComplexMatrix out = ComplexMatrix::Zero(rows->total, cols->total);
  for (const auto& [k, m] : blocks)
    out.block(rows->offsets[k.first], cols->offsets[k.second], m.rows(), m.cols()) = m;
  return out;
}

double BlockOperator::norm() const {
  if (blocks.empty()) return 0.0;
  std::set<int> active_rows, active_cols;
  for (const auto& [k, m] : blocks) {
    active_rows.insert(k.first);
    active_cols.insert(k.second);
  }
  Eigen::Index nr = 0, nc = 0;
  std::map<int, Eigen::Index> rpos, cpos;
  for (int r : active_rows) {
    rpos[r] = nr;
    nr += rows->dims[r];
  }
  for (int c : active_cols) {
    cpos[c] = nc;
    nc += cols->dims[c];
  }
  ComplexMatrix packed = ComplexMatrix::Zero(nr, nc);
  for (const auto& [k, m] : blocks) packed.block(rpos[k.first], cpos[k.second], m.rows(), m.cols()) = m;
  return op_norm(packed);
}

double BlockOperator::max_block_norm() const {
  double worst = 0.0;
  for (const auto& [k, m] : blocks) worst = std::max(worst, op_norm(m));
  return worst;
}

double BlockOperator::max_entry() const {
  double worst = 0.0;
  for (const auto& [k, m] : blocks) worst = std::max(worst, max_abs(m));
  return worst;
}

// ----------------------------------------------------- covariant rep

Eigen::Index CovariantRep::rank_of(const IrrepLabel& l) const {
  return range_basis.at(l).cols();
}

ComplexMatrix CovariantRep::u_block(const IrrepLabel& l, const GroupPoint& g) const {
  const IrrepData data = irrep_data(group, l);
  return kron(ComplexMatrix::Identity(rank_of(l), rank_of(l)), data.sample_conj(g));
}

BlockOperator CovariantRep::u_operator(const GroupPoint& g) const {
  BlockOperator op = BlockOperator::zero(index, index);
  for (std::size_t i = 0; i < labels.size(); ++i) op.add_block(int(i), int(i), u_block(labels[i], g));
  return op;
}

ComplexMatrix CovariantRep::trivial_embedding() const {
  const IrrepLabel triv = trivial_label(group);
  const int ti = index->find(triv);
  ComplexMatrix t = ComplexMatrix::Zero(index->total, hb_dim);
  t.block(index->offsets[ti], 0, hb_dim, hb_dim) = range_basis.at(triv);
  return t;
}

CovariantRep build_covariant_rep(const RepresentedBase& base, const FactorSystem& fs) {
  if (base.hb_dim != fs.hb_dim)
    throw ShapeMismatchError("build_covariant_rep: base dimension mismatch");
  CovariantRep rep;
  rep.group = fs.group;
  rep.window = fs.window;
  rep.hb_dim = fs.hb_dim;
  rep.fs = std::make_shared<FactorSystem>(fs);
  rep.labels = fs.window.labels;
  std::sort(rep.labels.begin(), rep.labels.end());
  std::vector<Eigen::Index> dims;
  for (const auto& l : rep.labels) {
    rep.mult[l] = fs.mult_of(l);
    ComplexMatrix p = fs.projection(l);
    // clean tiny extraction noise so the range detection is stable
    ComplexMatrix basis = projection_range_basis(0.5 * (p + p.adjoint().eval()), 1e-7);
    rep.p_block[l] = std::move(p);
    const Eigen::Index d = irrep_data(fs.group, l).dim;
    dims.push_back(basis.cols() * d);
    rep.range_basis[l] = std::move(basis);
  }
  const IrrepLabel triv = trivial_label(fs.group);
  if (rep.rank_of(triv) != fs.hb_dim)
    throw FreenessViolationError("build_covariant_rep: trivial block is not all of H_B");
  rep.index = BlockIndex::make(rep.labels, dims);
  return rep;
}

BlockOperator represent(const AlgebraElement& a, const CovariantRep& rep) {
  const FactorSystem& fs = *rep.fs;
  BlockOperator op = BlockOperator::zero(rep.index, rep.index);
  for (std::size_t ti = 0; ti < rep.labels.size(); ++ti) {
    const IrrepLabel& tau = rep.labels[ti];
    const Eigen::Index dt = irrep_data(fs.group, tau).dim;
    ComplexMatrix right = kron(rep.range_basis.at(tau), ComplexMatrix::Identity(dt, dt));
    for (const auto& [sigma, x] : a.coeff) {
      std::map<IrrepLabel, ComplexMatrix> blocks;
      try {
        blocks = uncompressed_blocks(fs, sigma, x, tau);
      } catch (const WindowOverflowError&) {
        continue;  // product falls entirely outside the margin: truncated away
      }
      for (const auto& [rho, m] : blocks) {
        const int ri = rep.index->find(rho);
        if (ri < 0) continue;  // margin label outside the window: truncated away
        const Eigen::Index dr = irrep_data(fs.group, rho).dim;
        ComplexMatrix left = kron(rep.range_basis.at(rho), ComplexMatrix::Identity(dr, dr));
        op.add_block(ri, int(ti), (left.adjoint() * m * right).eval());
      }
    }
  }
  return op;
}

AlgebraElement involution(const AlgebraElement& a, const FactorSystem& fs,
                          const CovariantRep& rep) {
  BlockOperator r = represent(a, rep);
  const IrrepLabel triv = trivial_label(fs.group);
  const int ti = rep.index->find(triv);
  AlgebraElement out;
  for (const auto& [sigma, x] : a.coeff) {
    const IrrepLabel nu = conjugate_label(fs.group, sigma);
    const int ni = rep.index->find(nu);
    if (ni < 0)
      throw WindowOverflowError("involution: conjugate label outside the window");
    auto it = r.blocks.find({ti, ni});
    const Eigen::Index d = irrep_data(fs.group, nu).dim;
    const Eigen::Index m = fs.mult_of(nu);
    ComplexMatrix coeff = ComplexMatrix::Zero(fs.hb_dim * m * d, fs.hb_dim);
    if (it != r.blocks.end()) {
      ComplexMatrix expand = kron(rep.range_basis.at(nu), ComplexMatrix::Identity(d, d));
      // trivial block sits in the range basis of p(1) = 1
      ComplexMatrix triv_basis = rep.range_basis.at(triv);
      coeff = expand * it->second.adjoint() * triv_basis.adjoint();
    }
    auto existing = out.coeff.find(nu);
    if (existing == out.coeff.end())
      out.coeff[nu] = std::move(coeff);
    else
      existing->second += coeff;
  }
  return out;
}

SaturationReport isotypic_saturation_check(const CovariantRep& rep, const RepresentedBase& base,
                                           const IrrepLabel& sigma, int max_word_length) {
  const FactorSystem& fs = *rep.fs;
  SaturationReport report;
  report.label = sigma;
  const int si = rep.index->find(sigma);
  if (si < 0) throw WindowOverflowError("isotypic_saturation_check: label outside window");
  report.block_dim = rep.index->dims[si];

  // breadth-first generator words, identity included
  std::vector<ComplexMatrix> words = {base.unit()};
  std::vector<ComplexMatrix> letters;
  for (const auto& [n, m] : base.generators) {
    letters.push_back(m);
    letters.push_back(m.adjoint());
  }
  std::size_t frontier_begin = 0;
  for (int len = 1; len <= max_word_length && words.size() < 64; ++len) {
    const std::size_t frontier_end = words.size();
    for (std::size_t w = frontier_begin; w < frontier_end && words.size() < 64; ++w)
      for (const auto& l : letters) {
        if (words.size() >= 64) break;
        words.push_back((l * words[w]).eval());
      }
    frontier_begin = frontier_end;
  }

  const int m = fs.mult_of(sigma);
  const int d = irrep_data(fs.group, sigma).dim;
  std::vector<ComplexMatrix> columns;
  for (const auto& w : words)
    for (int q = 0; q < m; ++q)
      for (int r = 0; r < d; ++r) {
        AlgebraElement el = algebra_monomial(fs, sigma, w, q, r);
        BlockOperator op = represent(el, rep);
        auto it = op.blocks.find({si, rep.index->find(trivial_label(fs.group))});
        if (it != op.blocks.end()) columns.push_back(it->second);
      }
  if (columns.empty()) {
    report.span_rank = 0;
  } else {
    Eigen::Index total_cols = 0;
    for (const auto& c : columns) total_cols += c.cols();
    ComplexMatrix stack(report.block_dim, total_cols);
    Eigen::Index off = 0;
    for (const auto& c : columns) {
      stack.middleCols(off, c.cols()) = c;
      off += c.cols();
    }
    Eigen::BDCSVD<ComplexMatrix> svd(stack);
    const auto& sv = svd.singularValues();
    const double cut = std::max(1e-12, 1e-9 * (sv.size() ? sv(0) : 0.0));
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > cut) ++report.span_rank;
  }
  report.deficiency = report.block_dim - report.span_rank;

  // window-boundary classification: one generator step leaves the window
  if (fs.group.kind == GroupKind::Torus) {
    for (int j = 0; j < fs.group.param && !report.label_on_window_boundary; ++j)
      for (int sgn : {-1, 1}) {
        IrrepLabel step = sigma;
        step.data[j] += sgn;
        if (!fs.window.contains(step)) report.label_on_window_boundary = true;
      }
  }
  return report;
}

Classification classify_covariant_reps(const CovariantRep& rep_a, const CovariantRep& rep_b,
                                       const std::vector<AlgebraElement>& generators_a,
                                       const std::vector<AlgebraElement>& generators_b,
                                       double tol, std::uint64_t seed) {
  if (rep_a.hb_dim != rep_b.hb_dim || rep_a.labels != rep_b.labels)
    throw NotComparableError("classify_covariant_reps: different windows or base");
  if (generators_a.size() != generators_b.size())
    throw NotComparableError("classify_covariant_reps: generator lists differ in length");
  Classification out;
  // dimension comparison per label
  for (const auto& l : rep_a.labels)
    if (rep_a.rank_of(l) != rep_b.rank_of(l)) {
      out.equivalent = false;
      out.obstruction = "multiplicity mismatch at label " + l.to_string();
      return out;
    }

  std::vector<BlockOperator> ops_a, ops_b;
  for (std::size_t g = 0; g < generators_a.size(); ++g) {
    ops_a.push_back(represent(generators_a[g], rep_a));
    ops_b.push_back(represent(generators_b[g], rep_b));
  }

  // unknowns: phi_sigma on the rank leg of each label block
  const std::size_t nlab = rep_a.labels.size();
  std::vector<Eigen::Index> r(nlab), unknown_offset(nlab);
  Eigen::Index unknowns = 0;
  for (std::size_t i = 0; i < nlab; ++i) {
    r[i] = rep_a.rank_of(rep_a.labels[i]);
    unknown_offset[i] = unknowns;
    unknowns += r[i] * r[i];
  }

  struct Entry {
    Eigen::Index row, col;
    Complex value;
  };
  std::vector<Entry> trip;
  Eigen::Index row_count = 0;
  auto add_constraints = [&](const BlockOperator& A, const BlockOperator& B) {
    std::set<std::pair<int, int>> keys;
    for (const auto& [k, m] : A.blocks) keys.insert(k);
    for (const auto& [k, m] : B.blocks) keys.insert(k);
    for (const auto& key : keys) {
      const int rho = key.first, tau = key.second;
      const Eigen::Index dr = irrep_data(rep_a.group, rep_a.labels[rho]).dim;
      const Eigen::Index dt = irrep_data(rep_a.group, rep_a.labels[tau]).dim;
      ComplexMatrix ablk = ComplexMatrix::Zero(rep_a.index->dims[rho], rep_a.index->dims[tau]);
      ComplexMatrix bblk = ablk;
      if (auto it = A.blocks.find(key); it != A.blocks.end()) ablk = it->second;
      if (auto it = B.blocks.find(key); it != B.blocks.end()) bblk = it->second;
      for (Eigen::Index rr = 0; rr < dr; ++rr)
        for (Eigen::Index tt = 0; tt < dt; ++tt) {
          // phi_rho Asub - Bsub phi_tau = 0 on the rank legs
          ComplexMatrix asub(r[rho], r[tau]), bsub(r[rho], r[tau]);
          for (Eigen::Index k = 0; k < r[rho]; ++k)
            for (Eigen::Index k2 = 0; k2 < r[tau]; ++k2) {
              asub(k, k2) = ablk(k * dr + rr, k2 * dt + tt);
              bsub(k, k2) = bblk(k * dr + rr, k2 * dt + tt);
            }
          if (max_abs(asub) == 0.0 && max_abs(bsub) == 0.0) continue;
          // rows: (k, k2) entry of phi_rho*asub - bsub*phi_tau.
          // vec layout: phi_i(row, col) sits at offset_i + col*r_i + row.
          for (Eigen::Index k = 0; k < r[rho]; ++k)
            for (Eigen::Index k2 = 0; k2 < r[tau]; ++k2) {
              for (Eigen::Index k3 = 0; k3 < r[rho]; ++k3) {
                const Complex c = asub(k3, k2);
                if (c != Complex(0.0, 0.0))
                  trip.push_back({row_count, unknown_offset[rho] + k3 * r[rho] + k, c});
              }
              for (Eigen::Index k3 = 0; k3 < r[tau]; ++k3) {
                const Complex c = -bsub(k, k3);
                if (c != Complex(0.0, 0.0))
                  trip.push_back({row_count, unknown_offset[tau] + k2 * r[tau] + k3, c});
              }
              ++row_count;
            }
        }
    }
  };
  for (std::size_t gi = 0; gi < generators_a.size(); ++gi) add_constraints(ops_a[gi], ops_b[gi]);

  ComplexMatrix constraints = ComplexMatrix::Zero(std::max<Eigen::Index>(row_count, 1), unknowns);
  for (const auto& t : trip) constraints(t.row, t.col) += t.value;

  Eigen::BDCSVD<ComplexMatrix> svd(constraints, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = std::max(1e-10, (sv.size() ? sv(0) : 0.0) * 1e-10);
  std::vector<Eigen::Index> null_cols;
  for (Eigen::Index i = 0; i < unknowns; ++i)
    if (i >= sv.size() || sv(i) <= cut) null_cols.push_back(i);
  if (null_cols.empty()) {
    out.equivalent = false;
    out.obstruction = "no intertwiner: constraint system has trivial null space";
    return out;
  }

  std::mt19937_64 gen(seed);
  auto residual_of = [&](const std::map<IrrepLabel, ComplexMatrix>& phi, double* unit_defect) {
    BlockOperator big = BlockOperator::zero(rep_a.index, rep_a.index);
    double udef = 0.0;
    for (std::size_t i = 0; i < nlab; ++i) {
      const Eigen::Index d = irrep_data(rep_a.group, rep_a.labels[i]).dim;
      const ComplexMatrix& p = phi.at(rep_a.labels[i]);
      udef = std::max(udef, max_abs(p.adjoint() * p - ComplexMatrix::Identity(r[i], r[i])));
      big.add_block(int(i), int(i), kron(p, ComplexMatrix::Identity(d, d)));
    }
    if (unit_defect) *unit_defect = udef;
    double worst = 0.0;
    for (std::size_t gi = 0; gi < generators_a.size(); ++gi) {
      BlockOperator diff = big * ops_a[gi] - ops_b[gi] * big;
      worst = std::max(worst, diff.max_entry());
    }
    return worst;
  };

  for (int attempt = 0; attempt < 5; ++attempt) {
    ComplexVector z = ComplexVector::Zero(unknowns);
    for (Eigen::Index c : null_cols) {
      const double re = double(gen() >> 11) * 0x1.0p-53 - 0.5;
      const double im = double(gen() >> 11) * 0x1.0p-53 - 0.5;
      z += Complex(re, im) * svd.matrixV().col(c);
    }
    std::map<IrrepLabel, ComplexMatrix> phi;
    bool singular = false;
    for (std::size_t i = 0; i < nlab; ++i) {
      ComplexMatrix zi(r[i], r[i]);
      for (Eigen::Index col = 0; col < r[i]; ++col)
        for (Eigen::Index row = 0; row < r[i]; ++row)
          zi(row, col) = z(unknown_offset[i] + col * r[i] + row);
      Eigen::BDCSVD<ComplexMatrix> polar(zi, Eigen::ComputeFullU | Eigen::ComputeFullV);
      if (polar.singularValues().size() == 0 ||
          polar.singularValues()(polar.singularValues().size() - 1) < 1e-10) {
        singular = true;
        break;
      }
      phi[rep_a.labels[i]] = polar.matrixU() * polar.matrixV().adjoint();
    }
    if (singular) continue;
    double udef = 0.0;
    const double res = residual_of(phi, &udef);
    if (res <= tol && udef <= tol) {
      out.equivalent = true;
      out.residual = res;
      out.unitarity_defect = udef;
      out.intertwiner = std::move(phi);
      return out;
    }
    if (attempt == 4) {
      out.residual = res;
      out.unitarity_defect = udef;
    }
  }
  out.equivalent = false;
  out.obstruction = "null space produced no unitary intertwiner within tolerance";
  return out;
}

}  // namespace speclift
