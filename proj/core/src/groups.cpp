#include "speclift/groups.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace speclift {

namespace {

const Complex kI(0.0, 1.0);

long long mod_positive(long long a, long long n) {
  long long r = a % n;
  return r < 0 ? r + n : r;
}

/// Spin-j angular momentum matrices, basis ordered m = j, j-1, ..., -j.
std::vector<ComplexMatrix> angular_momentum(int twoj) {
  const int d = twoj + 1;
  ComplexMatrix jz = ComplexMatrix::Zero(d, d);
  ComplexMatrix jplus = ComplexMatrix::Zero(d, d);
  for (int a = 0; a < d; ++a) jz(a, a) = 0.5 * (twoj - 2 * a);
  const double j = 0.5 * twoj;
  for (int a = 1; a < d; ++a) {
    const double m = j - a;  // J+ |j,m> = sqrt(j(j+1) - m(m+1)) |j,m+1>
    jplus(a - 1, a) = std::sqrt(j * (j + 1) - m * (m + 1));
  }
  ComplexMatrix jminus = jplus.adjoint();
  ComplexMatrix jx = 0.5 * (jplus + jminus);
  ComplexMatrix jy = -0.5 * kI * (jplus - jminus);
  return {jx, jy, jz};
}

double factorial(int n) {
  static std::vector<double> table = {1.0};
  while (int(table.size()) <= n) table.push_back(table.back() * double(table.size()));
  return table[n];
}

}  // namespace

std::string IrrepLabel::to_string() const {
  std::ostringstream out;
  if (data.size() == 1) {
    out << data[0];
    return out.str();
  }
  out << "(";
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (i) out << ",";
    out << data[i];
  }
  out << ")";
  return out.str();
}

IrrepLabel trivial_label(const GroupModel& g) {
  switch (g.kind) {
    case GroupKind::Torus: return {std::vector<int>(g.param, 0)};
    case GroupKind::Cyclic: return {{0}};
    case GroupKind::SU2: return {{0}};
  }
  return {};
}

IrrepLabel conjugate_label(const GroupModel& g, const IrrepLabel& s) {
  switch (g.kind) {
    case GroupKind::Torus: {
      IrrepLabel out = s;
      for (auto& k : out.data) k = -k;
      return out;
    }
    case GroupKind::Cyclic: return {{int(mod_positive(-s.data[0], g.param))}};
    case GroupKind::SU2: return s;
  }
  return s;
}

IrrepLabel product_label(const GroupModel& g, const IrrepLabel& a, const IrrepLabel& b) {
  switch (g.kind) {
    case GroupKind::Torus: {
      IrrepLabel out = a;
      for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
      return out;
    }
    case GroupKind::Cyclic: return {{int(mod_positive(a.data[0] + b.data[0], g.param))}};
    case GroupKind::SU2:
      throw UnsupportedGroupError("product_label: SU2 tensor products are not single labels");
  }
  return a;
}

ComplexMatrix IrrepData::sample(const GroupPoint& p) const {
  switch (group.kind) {
    case GroupKind::Torus: {
      if (int(p.coords.size()) != group.param)
        throw DimensionMismatchError("IrrepData::sample: wrong coordinate count");
      double phase = 0.0;
      for (int j = 0; j < group.param; ++j) phase += label.data[j] * p.coords[j];
      ComplexMatrix m(1, 1);
      m(0, 0) = std::exp(kI * phase);
      return m;
    }
    case GroupKind::Cyclic: {
      const double power = p.coords.at(0);
      ComplexMatrix m(1, 1);
      m(0, 0) = std::exp(2.0 * M_PI * kI * double(label.data[0]) * power / double(group.param));
      return m;
    }
    case GroupKind::SU2: {
      if (p.coords.size() != 3)
        throw DimensionMismatchError("IrrepData::sample: SU2 expects Euler angles");
      const ComplexMatrix& dz = derived[2];
      const ComplexMatrix& dy = derived[1];
      ComplexVector out_phase_a(dim), out_phase_c(dim);
      // exp(a X3) and exp(c X3) are diagonal in this basis.
      ComplexMatrix ea = ComplexMatrix::Zero(dim, dim), ec = ComplexMatrix::Zero(dim, dim);
      for (int r = 0; r < dim; ++r) {
        ea(r, r) = std::exp(p.coords[0] * dz(r, r));
        ec(r, r) = std::exp(p.coords[2] * dz(r, r));
      }
      return ea * exp_skew(p.coords[1] * dy) * ec;
    }
  }
  throw UnsupportedGroupError("IrrepData::sample: unknown group kind");
}

ComplexMatrix IrrepData::sample_conj(const GroupPoint& p) const { return sample(p).conjugate(); }

std::vector<ComplexMatrix> IrrepData::derived_conj() const {
  std::vector<ComplexMatrix> out;
  out.reserve(derived.size());
  for (const auto& d : derived) out.push_back(d.conjugate());
  return out;
}

IrrepData irrep_data(const GroupModel& g, const IrrepLabel& label) {
  IrrepData out;
  out.group = g;
  out.label = label;
  switch (g.kind) {
    case GroupKind::Torus: {
      out.dim = 1;
      for (int j = 0; j < g.param; ++j) {
        ComplexMatrix d(1, 1);
        d(0, 0) = kI * double(label.data[j]);
        out.derived.push_back(d);
      }
      return out;
    }
    case GroupKind::Cyclic: {
      out.dim = 1;
      return out;
    }
    case GroupKind::SU2: {
      const int twoj = label.data[0];
      out.dim = twoj + 1;
      for (const auto& jk : angular_momentum(twoj)) out.derived.push_back(kI * jk);
      return out;
    }
  }
  throw UnsupportedGroupError("irrep_data: unknown group kind");
}

bool TruncationWindow::contains(const IrrepLabel& l) const {
  return std::find(labels.begin(), labels.end(), l) != labels.end();
}
bool TruncationWindow::in_margin(const IrrepLabel& l) const {
  return std::find(margin.begin(), margin.end(), l) != margin.end();
}
int TruncationWindow::index_of(const IrrepLabel& l) const {
  auto it = std::find(labels.begin(), labels.end(), l);
  return it == labels.end() ? -1 : int(it - labels.begin());
}

TruncationWindow TruncationWindow::box(const GroupModel& g, int radius) {
  return box(g, radius, radius + 1);
}

TruncationWindow TruncationWindow::box(const GroupModel& g, int radius, int margin_radius) {
  TruncationWindow w;
  auto ball = [&](int r) {
    std::vector<IrrepLabel> out;
    switch (g.kind) {
      case GroupKind::Torus: {
        std::vector<int> k(g.param, -r);
        while (true) {
          out.push_back({k});
          int j = g.param - 1;
          while (j >= 0 && k[j] == r) k[j--] = -r;
          if (j < 0) break;
          ++k[j];
        }
        break;
      }
      case GroupKind::Cyclic: {
        for (int r2 = 0; r2 < g.param; ++r2) out.push_back({{r2}});
        break;
      }
      case GroupKind::SU2: {
        for (int twoj = 0; twoj <= 2 * r; ++twoj) out.push_back({{twoj}});
        break;
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  w.labels = ball(radius);
  w.margin = ball(std::max(radius, margin_radius));
  return w;
}

std::vector<IrrepData> irreps(const GroupModel& g, const TruncationWindow& w) {
  std::vector<IrrepData> out;
  out.reserve(w.labels.size());
  for (const auto& l : w.labels) out.push_back(irrep_data(g, l));
  return out;
}

double clebsch_gordan(int twoj1, int twom1, int twoj2, int twom2, int twoj, int twom) {
  if (twom1 + twom2 != twom) return 0.0;
  if (twoj < std::abs(twoj1 - twoj2) || twoj > twoj1 + twoj2) return 0.0;
  if ((twoj1 + twoj2 + twoj) % 2 != 0) return 0.0;
  auto f2 = [](int twice) { return factorial(twice / 2); };
  const double pref = std::sqrt(double(twoj + 1) * f2(twoj + twoj1 - twoj2) *
                                f2(twoj - twoj1 + twoj2) * f2(twoj1 + twoj2 - twoj) /
                                f2(twoj1 + twoj2 + twoj + 2)) *
                      std::sqrt(f2(twoj + twom) * f2(twoj - twom) * f2(twoj1 - twom1) *
                                f2(twoj1 + twom1) * f2(twoj2 - twom2) * f2(twoj2 + twom2));
  double sum = 0.0;
  for (int twok = 0;; twok += 2) {
    const int a = twoj1 + twoj2 - twoj - twok;
    const int b = twoj1 - twom1 - twok;
    const int c = twoj2 + twom2 - twok;
    const int d = twoj - twoj2 + twom1 + twok;
    const int e = twoj - twoj1 - twom2 + twok;
    if (b < 0 || c < 0) break;
    if (a >= 0 && d >= 0 && e >= 0) {
      const double term =
          1.0 / (f2(twok) * f2(a) * f2(b) * f2(c) * f2(d) * f2(e));
      sum += ((twok / 2) % 2 == 0 ? 1.0 : -1.0) * term;
    }
    if (twok > twoj1 + twoj2) break;
  }
  return pref * sum;
}

std::vector<TensorBranch> tensor_decompose(const GroupModel& g, const IrrepLabel& s,
                                           const IrrepLabel& t) {
  std::vector<TensorBranch> out;
  if (g.abelian()) {
    TensorBranch b;
    b.label = product_label(g, s, t);
    b.intertwiner = ComplexMatrix::Ones(1, 1);
    out.push_back(std::move(b));
    return out;
  }
  const int twoj1 = s.data[0], twoj2 = t.data[0];
  const int d1 = twoj1 + 1, d2 = twoj2 + 1;
  for (int twoj = std::abs(twoj1 - twoj2); twoj <= twoj1 + twoj2; twoj += 2) {
    TensorBranch b;
    b.label = {{twoj}};
    b.intertwiner = ComplexMatrix::Zero(d1 * d2, twoj + 1);
    for (int a1 = 0; a1 < d1; ++a1)
      for (int a2 = 0; a2 < d2; ++a2) {
        const int twom1 = twoj1 - 2 * a1, twom2 = twoj2 - 2 * a2;
        const int twom = twom1 + twom2;
        if (std::abs(twom) > twoj) continue;
        const int a = (twoj - twom) / 2;
        b.intertwiner(a1 * d2 + a2, a) = clebsch_gordan(twoj1, twom1, twoj2, twom2, twoj, twom);
      }
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<TensorBranch> tensor_decompose(const GroupModel& g, const IrrepLabel& s,
                                           const IrrepLabel& t, const TruncationWindow& w) {
  if (!w.in_margin(s) || !w.in_margin(t))
    throw OutOfWindowError("tensor_decompose: label outside the window margin");
  return tensor_decompose(g, s, t);
}

ComplexMatrix RegularBlocks::left_translation(const GroupModel& g, const GroupPoint& p) const {
  ComplexMatrix out = ComplexMatrix::Zero(total, total);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    IrrepData data = irrep_data(g, labels[i]);
    ComplexMatrix block = kron(ComplexMatrix::Identity(dims[i], dims[i]), data.sample_conj(p));
    out.block(offsets[i], offsets[i], block.rows(), block.cols()) = block;
  }
  return out;
}

ComplexMatrix RegularBlocks::right_translation(const GroupModel& g, const GroupPoint& p) const {
  ComplexMatrix out = ComplexMatrix::Zero(total, total);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    IrrepData data = irrep_data(g, labels[i]);
    ComplexMatrix block = kron(data.sample(p), ComplexMatrix::Identity(dims[i], dims[i]));
    out.block(offsets[i], offsets[i], block.rows(), block.cols()) = block;
  }
  return out;
}

RegularBlocks left_regular_blocks(const GroupModel& g, const TruncationWindow& w) {
  RegularBlocks out;
  out.labels = w.labels;
  std::sort(out.labels.begin(), out.labels.end());
  for (const auto& l : out.labels) {
    const int d = irrep_data(g, l).dim;
    out.dims.push_back(d);
    out.offsets.push_back(out.total);
    out.total += Eigen::Index(d) * d;
  }
  return out;
}

HaarQuadrature haar_quadrature(const GroupModel& g, int resolution) {
  if (resolution < 1) throw std::invalid_argument("haar_quadrature: resolution must be >= 1");
  HaarQuadrature q;
  switch (g.kind) {
    case GroupKind::Torus: {
      const int d = g.param;
      std::vector<int> idx(d, 0);
      const double step = 2.0 * M_PI / resolution;
      const double w = 1.0 / std::pow(double(resolution), d);
      while (true) {
        GroupPoint p;
        for (int j = 0; j < d; ++j) p.coords.push_back(idx[j] * step);
        q.points.push_back(std::move(p));
        q.weights.push_back(w);
        int j = d - 1;
        while (j >= 0 && idx[j] == resolution - 1) idx[j--] = 0;
        if (j < 0) break;
        ++idx[j];
      }
      break;
    }
    case GroupKind::Cyclic: {
      for (int m = 0; m < g.param; ++m) {
        q.points.push_back({{double(m)}});
        q.weights.push_back(1.0 / g.param);
      }
      break;
    }
    case GroupKind::SU2: {
      // Product Euler grid, midpoint rule with sin-weighted middle angle.
      std::vector<double> beta(resolution), wbeta(resolution);
      double wsum = 0.0;
      for (int j = 0; j < resolution; ++j) {
        beta[j] = M_PI * (j + 0.5) / resolution;
        wbeta[j] = std::sin(beta[j]);
        wsum += wbeta[j];
      }
      for (int j = 0; j < resolution; ++j) wbeta[j] /= wsum;
      for (int ia = 0; ia < resolution; ++ia)
        for (int jb = 0; jb < resolution; ++jb)
          for (int kc = 0; kc < resolution; ++kc) {
            GroupPoint p;
            p.coords = {2.0 * M_PI * ia / resolution, beta[jb], 4.0 * M_PI * kc / resolution};
            q.points.push_back(std::move(p));
            q.weights.push_back(wbeta[jb] / double(resolution) / double(resolution));
          }
      break;
    }
  }
  // Character orthogonality over a small fixed label set.
  std::vector<IrrepLabel> probes;
  switch (g.kind) {
    case GroupKind::Torus: {
      probes.push_back(trivial_label(g));
      for (int j = 0; j < g.param; ++j) {
        IrrepLabel l = trivial_label(g);
        l.data[j] = 1;
        probes.push_back(l);
      }
      break;
    }
    case GroupKind::Cyclic: {
      for (int r = 0; r < std::min(g.param, 3); ++r) probes.push_back({{r}});
      break;
    }
    case GroupKind::SU2: {
      probes = {{{0}}, {{1}}, {{2}}};
      break;
    }
  }
  double defect = 0.0;
  std::vector<IrrepData> pdata;
  for (const auto& l : probes) pdata.push_back(irrep_data(g, l));
  for (std::size_t a = 0; a < probes.size(); ++a)
    for (std::size_t b = a; b < probes.size(); ++b) {
      Complex acc = 0.0;
      for (std::size_t i = 0; i < q.points.size(); ++i)
        acc += q.weights[i] * pdata[a].sample(q.points[i]).trace() *
               std::conj(pdata[b].sample(q.points[i]).trace());
      const double target = (a == b) ? 1.0 : 0.0;
      defect = std::max(defect, std::abs(acc - target));
    }
  q.orthogonality_defect = defect;
  return q;
}

}  // namespace speclift
