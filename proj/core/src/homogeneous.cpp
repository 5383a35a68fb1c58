#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "speclift/models.hpp"

namespace speclift {

namespace {

const Complex kI(0.0, 1.0);

int gcd_int(int a, int b) {
  a = std::abs(a);
  b = std::abs(b);
  while (b) {
    const int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// extended gcd: x*a + y*b = gcd(a,b)
std::pair<int, int> egcd(int a, int b) {
  if (b == 0) return {a >= 0 ? 1 : -1, 0};
  auto [x, y] = egcd(b, a % b);
  return {y, x - (a / b) * y};
}

RealMatrix su2_adjoint(const ComplexMatrix& g2) {
  // orthonormal basis X_k -> (i/2) sigma_k; entries 2 tr(X_l^* g X_k g^*)
  static const std::vector<ComplexMatrix> x = [] {
    std::vector<ComplexMatrix> out(3, ComplexMatrix(2, 2));
    out[0] << 0, kI * 0.5, kI * 0.5, 0;
    out[1] << 0, 0.5, -0.5, 0;
    out[2] << kI * 0.5, 0, 0, -kI * 0.5;
    return out;
  }();
  RealMatrix ad(3, 3);
  for (int l = 0; l < 3; ++l)
    for (int k = 0; k < 3; ++k)
      ad(l, k) = std::real(2.0 * (x[l].adjoint() * g2 * x[k] * g2.adjoint()).trace());
  return ad;
}

}  // namespace

FrameField frame_field(const HomogeneousSpec& spec, const std::vector<GroupPoint>& points) {
  FrameField field;
  field.points = points;
  const int n = spec.group.lie_dim();
  RealMatrix p_h = RealMatrix::Zero(n, n);
  if (spec.group.kind == GroupKind::Torus) {
    if (spec.group.param != int(spec.subgroup_direction.size()))
      throw UnsupportedSubgroupError("frame_field: direction dimension mismatch");
    RealVector h(n);
    for (int i = 0; i < n; ++i) h(i) = spec.subgroup_direction[i];
    p_h = (h * h.transpose()) / h.squaredNorm();
  } else if (spec.group.kind == GroupKind::SU2) {
    p_h(2, 2) = 1.0;  // diagonal U(1) spanned by X_3
  } else {
    throw UnsupportedSubgroupError("frame_field: unsupported group kind");
  }
  const RealMatrix p_gh = RealMatrix::Identity(n, n) - p_h;
  for (const auto& g : points) {
    RealMatrix ad = RealMatrix::Identity(n, n);
    if (spec.group.kind == GroupKind::SU2)
      ad = su2_adjoint(irrep_data(spec.group, {{1}}).sample(g));
    field.ad.push_back(ad);
    std::vector<RealVector> y, z;
    for (int k = 0; k < n; ++k) {
      RealVector xk = RealVector::Zero(n);
      xk(k) = 1.0;
      y.push_back(ad * p_gh * ad.transpose() * xk);
      z.push_back(ad * p_h * ad.transpose() * xk);
    }
    field.horizontal.push_back(std::move(y));
    field.vertical.push_back(std::move(z));
  }
  return field;
}

// ------------------------------------------------------------ abelian exact case

HomogeneousTorusModel build_homogeneous_torus(const HomogeneousSpec& spec) {
  if (spec.group.kind != GroupKind::Torus || spec.group.param != 2)
    throw UnsupportedSubgroupError("build_homogeneous_torus: expected the two-torus");
  if (spec.subgroup_direction.size() != 2)
    throw UnsupportedSubgroupError("build_homogeneous_torus: need an integer direction");
  const int h1 = spec.subgroup_direction[0], h2 = spec.subgroup_direction[1];
  if (gcd_int(h1, h2) != 1)
    throw UnsupportedSubgroupError("build_homogeneous_torus: direction must be primitive");

  HomogeneousTorusModel model;
  model.spec = spec;
  const int radius = spec.window_radius;
  const Eigen::Index l = 2 * radius + 1;
  const Eigen::Index modes = l * l;
  const double hnorm = std::sqrt(double(h1 * h1 + h2 * h2));
  // adapted orthonormal pair: y spans Lie(G/H), z spans Lie(H); det [y z] = +1
  const double y1 = h2 / hnorm, y2 = -h1 / hnorm;
  const double z1 = h1 / hnorm, z2 = h2 / hnorm;

  CliffordAlgebra two = clifford_algebra(2);
  CliffordAlgebra one = clifford_algebra(1);
  RealVector yv(2), zv(2);
  yv << y1, y2;
  zv << z1, z2;
  const ComplexMatrix fy_full = clifford_algebra_mul_vector(two, yv);
  const ComplexMatrix fz_full = clifford_algebra_mul_vector(two, zv);
  const ComplexMatrix fy_q = one.left_mult[0];  // on Cl(G/H)
  const ComplexMatrix fz_h = one.left_mult[0];  // on Cl(H)
  const ComplexMatrix omega_h = one.grading;
  const Eigen::Index fiber = two.dim;  // 4 on both sides
  model.dim = modes * fiber;

  // change of basis {1, y, z, y.z} -> subset basis of Cl(2); y.z = e_12
  ComplexMatrix v = ComplexMatrix::Zero(4, 4);
  v(0, 0) = 1.0;
  v(1, 1) = y1;
  v(2, 1) = y2;
  v(1, 2) = z1;
  v(2, 2) = z2;
  v(3, 3) = 1.0;
  const ComplexMatrix w_iso = v * graded_tensor_iso(1, 1);

  // means of k.y along the window lines k.h = m
  std::map<int, double> line_mean;
  {
    std::map<int, std::pair<double, int>> acc;
    for (int k1 = -radius; k1 <= radius; ++k1)
      for (int k2 = -radius; k2 <= radius; ++k2) {
        const int m = k1 * h1 + k2 * h2;
        acc[m].first += k1 * y1 + k2 * y2;
        acc[m].second += 1;
      }
    for (const auto& [m, pr] : acc) line_mean[m] = pr.first / pr.second;
  }

  model.d_h = ComplexMatrix::Zero(model.dim, model.dim);
  model.d_v = model.d_h;
  model.dhat_h = model.d_h;
  model.dhat_v = model.d_h;
  model.u = model.d_h;
  model.correction = model.d_h;
  for (int k1 = -radius; k1 <= radius; ++k1)
    for (int k2 = -radius; k2 <= radius; ++k2) {
      const Eigen::Index idx = (Eigen::Index(k1 + radius) * l + (k2 + radius)) * fiber;
      const double qy = k1 * y1 + k2 * y2;
      const double qz = k1 * z1 + k2 * z2;
      const double mean = line_mean.at(k1 * h1 + k2 * h2);
      model.d_h.block(idx, idx, fiber, fiber) = -kI * qy * fy_full;
      model.d_v.block(idx, idx, fiber, fiber) = -kI * qz * fz_full;
      model.dhat_h.block(idx, idx, fiber, fiber) = -kI * (qy + mean) * kron(fy_q, omega_h);
      model.dhat_v.block(idx, idx, fiber, fiber) =
          -kI * qz * kron(ComplexMatrix::Identity(2, 2), fz_h);
      model.u.block(idx, idx, fiber, fiber) = w_iso;
      model.correction.block(idx, idx, fiber, fiber) = kI * mean * fy_full;
      model.line_means.push_back(mean);
    }

  model.unitarity_defect =
      max_abs(model.u * model.u.adjoint() - ComplexMatrix::Identity(model.dim, model.dim));
  model.thm_horizontal_residual =
      max_abs(model.d_h - model.u * model.dhat_h * model.u.adjoint() - model.correction);
  model.thm_vertical_residual = max_abs(model.d_v - model.u * model.dhat_v * model.u.adjoint());

  // commutation of the correction with sampled multiplication operators
  double rem = 0.0;
  for (const std::array<int, 2> shift : {std::array<int, 2>{1, 0}, {0, 1}, {1, 1}}) {
    ComplexMatrix mult = ComplexMatrix::Zero(model.dim, model.dim);
    for (int k1 = -radius; k1 <= radius; ++k1)
      for (int k2 = -radius; k2 <= radius; ++k2) {
        const int t1 = k1 + shift[0], t2 = k2 + shift[1];
        if (std::abs(t1) > radius || std::abs(t2) > radius) continue;
        const Eigen::Index from = (Eigen::Index(k1 + radius) * l + (k2 + radius)) * fiber;
        const Eigen::Index to = (Eigen::Index(t1 + radius) * l + (t2 + radius)) * fiber;
        mult.block(to, from, fiber, fiber) = ComplexMatrix::Identity(fiber, fiber);
      }
    rem = std::max(rem, max_abs(model.correction * mult - mult * model.correction));
  }
  model.remark_commutation_residual = rem;

  // nonvanishing commutator witness [D_{G/H} (x) 1, p(sigma)] on a multiplicity block
  {
    const int m_witness = 1;
    auto [w1, w2] = egcd(h1, h2);
    const int k01 = w1 * m_witness, k02 = w2 * m_witness;
    std::vector<std::pair<int, int>> line;  // k0 + n (h2, -h1) inside the box
    for (int n = -4 * radius; n <= 4 * radius; ++n) {
      const int k1 = k01 + n * h2, k2 = k02 - n * h1;
      if (std::abs(k1) <= radius && std::abs(k2) <= radius) line.emplace_back(k1, k2);
    }
    const Eigen::Index lm = Eigen::Index(line.size());
    if (lm > 1) {
      std::vector<int> qmodes;
      for (int n = -4 * radius; n <= 4 * radius; ++n)
        if (std::abs(n * h2) <= radius && std::abs(n * h1) <= radius) qmodes.push_back(n);
      const Eigen::Index nq = Eigen::Index(qmodes.size());
      ComplexMatrix proj = ComplexMatrix::Zero(nq * lm, nq * lm);
      ComplexMatrix dq = ComplexMatrix::Zero(nq * lm, nq * lm);
      const int hsq = h1 * h1 + h2 * h2;
      for (Eigen::Index a = 0; a < nq; ++a)
        for (Eigen::Index i = 0; i < lm; ++i) {
          dq(a * lm + i, a * lm + i) = qmodes[a] * hnorm;
          for (Eigen::Index j = 0; j < lm; ++j) {
            const int di = ((line[i].first - line[j].first) * h2 -
                            (line[i].second - line[j].second) * h1) /
                           hsq;
            const auto it = std::find(qmodes.begin(), qmodes.end(), qmodes[a] + di);
            if (it == qmodes.end()) continue;
            proj((it - qmodes.begin()) * lm + i, a * lm + j) = 1.0 / double(lm);
          }
        }
      model.cocycle_commutator_witness = op_norm(dq * proj - proj * dq);
    }
  }
  return model;
}

// ------------------------------------------------------------ SU2 quadrature case

namespace {

struct Su2Modes {
  int two_j_max = 0;
  std::vector<std::array<int, 3>> entries;  // (twoj, a, b)
  std::vector<Eigen::Index> offset_of_twoj;
  Eigen::Index dim = 0;

  explicit Su2Modes(int two_j_max_) : two_j_max(two_j_max_) {
    for (int twoj = 0; twoj <= two_j_max; ++twoj) {
      offset_of_twoj.push_back(dim);
      const int d = twoj + 1;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) entries.push_back({twoj, a, b});
      dim += Eigen::Index(d) * d;
    }
  }
  Eigen::Index flat(int twoj, int a, int b) const {
    return offset_of_twoj[twoj] + Eigen::Index(a) * (twoj + 1) + b;
  }
};

/// Peter-Weyl <-> Euler-grid transport with the product quadrature rule.
/// Vectors are (modes x fiber) matrices; grid slices are ((r*r) x fiber)
/// matrices indexed (ia * r + kc) for a fixed middle angle.
struct Su2Machine {
  Su2Modes modes;
  int r = 0;
  std::vector<double> alpha, beta, gamma, wbeta;
  std::vector<std::vector<ComplexMatrix>> dmid;    // [twoj][jb]
  std::vector<std::vector<ComplexMatrix>> derived;  // per twoj: i J_k

  Su2Machine(int two_j_max, int resolution) : modes(two_j_max), r(resolution) {
    double wsum = 0.0;
    for (int i = 0; i < r; ++i) {
      alpha.push_back(2.0 * M_PI * i / r);
      gamma.push_back(4.0 * M_PI * i / r);
      const double b = M_PI * (i + 0.5) / r;
      beta.push_back(b);
      wbeta.push_back(std::sin(b));
      wsum += std::sin(b);
    }
    for (auto& w : wbeta) w /= wsum;
    GroupModel g = GroupModel::su2();
    for (int twoj = 0; twoj <= two_j_max; ++twoj) {
      IrrepData data = irrep_data(g, {{twoj}});
      derived.push_back(data.derived);
      std::vector<ComplexMatrix> per_beta;
      for (int jb = 0; jb < r; ++jb) per_beta.push_back(exp_skew(beta[jb] * data.derived[1]));
      dmid.push_back(std::move(per_beta));
    }
  }

  int weights() const { return 2 * modes.two_j_max + 1; }

  ComplexMatrix fundamental_at(int ia, int jb, int kc) const {
    ComplexMatrix ea(2, 2), ec(2, 2);
    ea << std::exp(kI * alpha[ia] * 0.5), 0, 0, std::exp(-kI * alpha[ia] * 0.5);
    ec << std::exp(kI * gamma[kc] * 0.5), 0, 0, std::exp(-kI * gamma[kc] * 0.5);
    return ea * dmid[1][jb] * ec;
  }

  /// values of all inputs on the grid slice jb.
  std::vector<ComplexMatrix> eval_slice(const std::vector<const ComplexMatrix*>& coeffs,
                                        int jb) const {
    const int nw = weights();
    std::vector<ComplexMatrix> out;
    for (const ComplexMatrix* coeff : coeffs) {
      const Eigen::Index fiber = coeff->cols();
      ComplexMatrix t1 = ComplexMatrix::Zero(Eigen::Index(nw) * nw, fiber);
      for (std::size_t q = 0; q < modes.entries.size(); ++q) {
        const auto [twoj, a, b] = modes.entries[q];
        const Complex dval = std::sqrt(double(twoj + 1)) * dmid[twoj][jb](a, b);
        if (dval == Complex(0.0, 0.0)) continue;
        const int wa = (twoj - 2 * a) + modes.two_j_max;
        const int wb = (twoj - 2 * b) + modes.two_j_max;
        t1.row(Eigen::Index(wa) * nw + wb) += dval * coeff->row(Eigen::Index(q));
      }
      ComplexMatrix t2 = ComplexMatrix::Zero(Eigen::Index(r) * nw, fiber);
      for (int kc = 0; kc < r; ++kc)
        for (int wb = 0; wb < nw; ++wb) {
          const Complex phase = std::exp(kI * gamma[kc] * (0.5 * (wb - modes.two_j_max)));
          for (int wa = 0; wa < nw; ++wa)
            t2.row(Eigen::Index(kc) * nw + wa) += phase * t1.row(Eigen::Index(wa) * nw + wb);
        }
      ComplexMatrix slice = ComplexMatrix::Zero(Eigen::Index(r) * r, fiber);
      for (int ia = 0; ia < r; ++ia)
        for (int wa = 0; wa < nw; ++wa) {
          const Complex phase = std::exp(kI * alpha[ia] * (0.5 * (wa - modes.two_j_max)));
          for (int kc = 0; kc < r; ++kc)
            slice.row(Eigen::Index(ia) * r + kc) += phase * t2.row(Eigen::Index(kc) * nw + wa);
        }
      out.push_back(std::move(slice));
    }
    return out;
  }

  /// quadrature projection accumulated over slices produced by `produce`.
  ComplexMatrix project(Eigen::Index fiber,
                        const std::function<ComplexMatrix(int jb)>& produce) const {
    const int nw = weights();
    ComplexMatrix coeff = ComplexMatrix::Zero(modes.dim, fiber);
    for (int jb = 0; jb < r; ++jb) {
      ComplexMatrix slice = produce(jb);
      ComplexMatrix t2 = ComplexMatrix::Zero(Eigen::Index(r) * nw, fiber);
      for (int ia = 0; ia < r; ++ia)
        for (int wa = 0; wa < nw; ++wa) {
          const Complex phase = std::exp(-kI * alpha[ia] * (0.5 * (wa - modes.two_j_max)));
          for (int kc = 0; kc < r; ++kc)
            t2.row(Eigen::Index(kc) * nw + wa) += phase * slice.row(Eigen::Index(ia) * r + kc);
        }
      ComplexMatrix t1 = ComplexMatrix::Zero(Eigen::Index(nw) * nw, fiber);
      for (int kc = 0; kc < r; ++kc)
        for (int wb = 0; wb < nw; ++wb) {
          const Complex phase = std::exp(-kI * gamma[kc] * (0.5 * (wb - modes.two_j_max)));
          for (int wa = 0; wa < nw; ++wa)
            t1.row(Eigen::Index(wa) * nw + wb) += phase * t2.row(Eigen::Index(kc) * nw + wa);
        }
      const double w = wbeta[jb] / double(r) / double(r);
      for (std::size_t q = 0; q < modes.entries.size(); ++q) {
        const auto [twoj, a, b] = modes.entries[q];
        const Complex dval = std::sqrt(double(twoj + 1)) * std::conj(dmid[twoj][jb](a, b));
        if (dval == Complex(0.0, 0.0)) continue;
        const int wa = (twoj - 2 * a) + modes.two_j_max;
        const int wb = (twoj - 2 * b) + modes.two_j_max;
        coeff.row(Eigen::Index(q)) += w * dval * t1.row(Eigen::Index(wa) * nw + wb);
      }
    }
    return coeff;
  }

  /// left-invariant derivative along X_c acting on the row leg of the modes.
  ComplexMatrix left_derivative(const ComplexMatrix& coeff, int c) const {
    ComplexMatrix out = ComplexMatrix::Zero(coeff.rows(), coeff.cols());
    for (int twoj = 0; twoj <= modes.two_j_max; ++twoj) {
      const int d = twoj + 1;
      const ComplexMatrix neg = -derived[twoj][c];
      for (int a2 = 0; a2 < d; ++a2)
        for (int a = 0; a < d; ++a) {
          const Complex cva = neg(a, a2);
          if (cva == Complex(0.0, 0.0)) continue;
          for (int b = 0; b < d; ++b)
            out.row(modes.flat(twoj, a2, b)) += cva * coeff.row(modes.flat(twoj, a, b));
        }
    }
    return out;
  }

  /// right derivative along X_c acting on the column leg of the modes.
  ComplexMatrix right_derivative_matrix(int c) const {
    ComplexMatrix rho = ComplexMatrix::Zero(modes.dim, modes.dim);
    for (int twoj = 0; twoj <= modes.two_j_max; ++twoj) {
      const int d = twoj + 1;
      const ComplexMatrix neg = -derived[twoj][c];
      for (int a = 0; a < d; ++a)
        for (int b2 = 0; b2 < d; ++b2)
          for (int b = 0; b < d; ++b)
            rho(modes.flat(twoj, a, b2), modes.flat(twoj, a, b)) += neg(b2, b);
    }
    return rho;
  }

  /// coefficient action of the right translation r_g on the column leg.
  void right_translate_fold(ComplexMatrix& fold /* fiber x modes */, int ia, int jb, int kc,
                            bool adjoint) const {
    for (int twoj = 0; twoj <= modes.two_j_max; ++twoj) {
      const int d = twoj + 1;
      ComplexMatrix dg(d, d);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          dg(a, b) = std::exp(kI * alpha[ia] * (0.5 * (twoj - 2 * a))) * dmid[twoj][jb](a, b) *
                     std::exp(kI * gamma[kc] * (0.5 * (twoj - 2 * b)));
      if (adjoint) dg = dg.adjoint().eval();
      // new(a, c) = sum_b old(a, b) dg(c, b)
      for (int a = 0; a < d; ++a) {
        ComplexMatrix sub(fold.rows(), d);
        for (int b = 0; b < d; ++b) sub.col(b) = fold.col(modes.flat(twoj, a, b));
        ComplexMatrix res = sub * dg.transpose();
        for (int c = 0; c < d; ++c) fold.col(modes.flat(twoj, a, c)) = res.col(c);
      }
    }
  }
};

/// derivation of Cl(3) induced by a skew matrix on the vector slots
ComplexMatrix clifford_derivation(const RealMatrix& a) {
  ComplexMatrix out = ComplexMatrix::Zero(8, 8);
  const int vec_slot[3] = {1, 2, 4};
  const int biv_slot[3] = {3, 5, 6};
  const int biv_pair[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(vec_slot[i], vec_slot[j]) = a(i, j);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int c = biv_pair[i][0], d = biv_pair[i][1];
      const int e = biv_pair[j][0], f = biv_pair[j][1];
      out(biv_slot[i], biv_slot[j]) = a(c, e) * (d == f ? 1.0 : 0.0) +
                                      (c == e ? 1.0 : 0.0) * a(d, f) -
                                      a(c, f) * (d == e ? 1.0 : 0.0) -
                                      (c == f ? 1.0 : 0.0) * a(d, e);
    }
  return out;
}

ComplexMatrix clifford_rotation(const RealMatrix& a) {
  ComplexMatrix out = ComplexMatrix::Zero(8, 8);
  out(0, 0) = 1.0;
  out(7, 7) = 1.0;
  const int vec_slot[3] = {1, 2, 4};
  const int biv_slot[3] = {3, 5, 6};
  const int biv_pair[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(vec_slot[i], vec_slot[j]) = a(i, j);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int c = biv_pair[i][0], d = biv_pair[i][1];
      const int e = biv_pair[j][0], f = biv_pair[j][1];
      out(biv_slot[i], biv_slot[j]) = a(c, e) * a(d, f) - a(c, f) * a(d, e);
    }
  return out;
}

RealMatrix su2_ad_generator(int l) {
  // [X_a, X_b] = -eps_{abc} X_c
  RealMatrix out = RealMatrix::Zero(3, 3);
  for (int b = 0; b < 3; ++b)
    for (int c = 0; c < 3; ++c) {
      int eps = 0;
      if (l != b && b != c && l != c) {
        const int perm[3] = {l, b, c};
        eps = ((perm[0] == 0 && perm[1] == 1) || (perm[0] == 1 && perm[1] == 2) ||
               (perm[0] == 2 && perm[1] == 0))
                  ? 1
                  : -1;
      }
      if (eps != 0) out(c, b) = -eps;
    }
  return out;
}

}  // namespace

Su2HomogeneousReport su2_homogeneous_report(const HomogeneousSpec& spec, int samples,
                                            std::uint64_t seed) {
  if (spec.group.kind != GroupKind::SU2)
    throw UnsupportedSubgroupError("su2_homogeneous_report: expected SU2");
  const int two_j_max = 2 * spec.window_radius;
  const int r = spec.quadrature_resolution;
  Su2HomogeneousReport report;
  report.resolution = r;
  {
    HaarQuadrature q = haar_quadrature(GroupModel::su2(), std::min(r, 16));
    report.quadrature_defect = haar_quadrature(GroupModel::su2(), r).orthogonality_defect;
    if (q.orthogonality_defect > 0.2)
      throw ResolutionTooLowError("su2_homogeneous_report: quadrature resolution too low");
  }

  Su2Machine mach(two_j_max, r);
  const Eigen::Index nmodes = mach.modes.dim;
  CliffordAlgebra cl3 = clifford_algebra(3);
  CliffordAlgebra cl2 = clifford_algebra(2);
  CliffordAlgebra cl1 = clifford_algebra(1);
  const ComplexMatrix w_iso = graded_tensor_iso(2, 1);
  const Eigen::Index fib_g = cl3.dim;                            // 8
  const Eigen::Index fib_cl = Eigen::Index(cl2.dim) * cl1.dim;   // 8

  // The multiplicity-space leg is truncated at a smaller spin cap than the
  // function window, so transported carriers and their products stay strictly
  // inside the window and the reported residuals are quadrature driven.
  const int two_j_h = std::max(1, two_j_max / 3);
  Su2Modes h_modes(two_j_h);
  const Eigen::Index nh = h_modes.dim;
  const Eigen::Index fib_amb = nh * fib_cl;

  // H-window fibre vectors u_m and the flat projection on the H leg
  std::map<int, ComplexVector> u_m;
  for (int tm = -two_j_h; tm <= two_j_h; ++tm) {
    ComplexVector um = ComplexVector::Zero(nh);
    double norm2 = 0.0;
    for (int twoj = std::abs(tm); twoj <= two_j_h; twoj += 2) {
      const int a = (twoj - tm) / 2;
      um(h_modes.flat(twoj, a, a)) = std::sqrt(double(twoj + 1));
      norm2 += twoj + 1;
    }
    if (norm2 > 0.0) u_m[tm] = um / std::sqrt(norm2);
  }
  ComplexMatrix p_flat = ComplexMatrix::Zero(nh, nh);
  for (const auto& [tm, um] : u_m) p_flat += um * um.adjoint();

  // (r_g u_m) in mode coordinates: the right translation hits the column leg,
  // (r_g u_m)-hat(a_m, c) = nu_j D^j(g)_{c, a_m}.
  auto transported_um = [&](int tm, int ia, int jb, int kc) {
    ComplexVector vec = ComplexVector::Zero(nh);
    for (int twoj = std::abs(tm); twoj <= two_j_h; twoj += 2) {
      const int am = (twoj - tm) / 2;
      const Complex base = u_m.at(tm)(h_modes.flat(twoj, am, am));
      for (int c = 0; c < twoj + 1; ++c) {
        const Complex d = std::exp(kI * mach.alpha[ia] * (0.5 * (twoj - 2 * c))) *
                          mach.dmid[twoj][jb](c, am) *
                          std::exp(kI * mach.gamma[kc] * 0.5 * double(tm));
        vec(h_modes.flat(twoj, am, c)) += base * d;
      }
    }
    return vec;
  };
  // the evaluation functional over the H leg: E_g = sum_m <r_g u_m, .>
  auto eval_row = [&](int ia, int jb, int kc) {
    ComplexVector row = ComplexVector::Zero(nh);
    for (const auto& [tm, um] : u_m) row += transported_um(tm, ia, jb, kc).conjugate();
    return row;
  };

  std::vector<RealMatrix> ad_gen;
  for (int l = 0; l < 3; ++l) ad_gen.push_back(su2_ad_generator(l));

  // right-derivative matrices: full window for the function leg, capped for the H leg
  std::vector<ComplexMatrix> rho_fn, rho_h;
  for (int c = 0; c < 3; ++c) {
    rho_fn.push_back(mach.right_derivative_matrix(c));
    ComplexMatrix rh = ComplexMatrix::Zero(nh, nh);
    for (int twoj = 0; twoj <= two_j_h; ++twoj) {
      const int d = twoj + 1;
      const ComplexMatrix neg = -mach.derived[twoj][c];
      for (int a = 0; a < d; ++a)
        for (int b2 = 0; b2 < d; ++b2)
          for (int b = 0; b < d; ++b)
            rh(h_modes.flat(twoj, a, b2), h_modes.flat(twoj, a, b)) += neg(b2, b);
    }
    rho_h.push_back(std::move(rh));
  }

  // fiber transforms on ambient coefficients -------------------------------
  auto transform_h_leg = [&](const ComplexMatrix& coeff, const ComplexMatrix& m) {
    ComplexMatrix out = ComplexMatrix::Zero(coeff.rows(), coeff.cols());
    for (Eigen::Index f = 0; f < fib_cl; ++f) {
      ComplexMatrix sub(coeff.rows(), nh);
      for (Eigen::Index h = 0; h < nh; ++h) sub.col(h) = coeff.col(h * fib_cl + f);
      ComplexMatrix res = sub * m.transpose();
      for (Eigen::Index h = 0; h < nh; ++h) out.col(h * fib_cl + f) = res.col(h);
    }
    return out;
  };
  auto transform_cl_leg = [&](const ComplexMatrix& coeff, const ComplexMatrix& op) {
    ComplexMatrix out(coeff.rows(), coeff.cols());
    for (Eigen::Index h = 0; h < nh; ++h)
      out.middleCols(h * fib_cl, fib_cl) = coeff.middleCols(h * fib_cl, fib_cl) * op.transpose();
    return out;
  };

  // frame data at a grid point
  auto frame_at = [&](int ia, int jb, int kc, RealMatrix* ad_out) {
    RealMatrix ad = su2_adjoint(mach.fundamental_at(ia, jb, kc));
    if (ad_out) *ad_out = ad;
    RealMatrix y(3, 3);  // row k: components of Y_k(g)
    const RealVector a3 = ad.col(2);
    const RealMatrix proj = RealMatrix::Identity(3, 3) - a3 * a3.transpose();
    for (int k = 0; k < 3; ++k) y.row(k) = proj.row(k);
    return y;
  };

  // the canonical operator split on L^2(G, Cl(3)) -------------------------------
  auto split_apply = [&](const ComplexMatrix& coeff, bool vertical) {
    std::vector<ComplexMatrix> ders;
    for (int c = 0; c < 3; ++c) ders.push_back(mach.left_derivative(coeff, c));
    std::vector<const ComplexMatrix*> inputs;
    for (const auto& d : ders) inputs.push_back(&d);
    return mach.project(fib_g, [&](int jb) {
      auto slices = mach.eval_slice(inputs, jb);
      ComplexMatrix out = ComplexMatrix::Zero(Eigen::Index(r) * r, fib_g);
      for (int ia = 0; ia < r; ++ia)
        for (int kc = 0; kc < r; ++kc) {
          const Eigen::Index p = Eigen::Index(ia) * r + kc;
          RealMatrix ad = su2_adjoint(mach.fundamental_at(ia, jb, kc));
          const RealVector a3 = ad.col(2);
          RealMatrix proj = a3 * a3.transpose();
          if (!vertical) proj = RealMatrix::Identity(3, 3) - proj;
          ComplexVector acc = ComplexVector::Zero(fib_g);
          for (int lidx = 0; lidx < 3; ++lidx) {
            ComplexVector combo = ComplexVector::Zero(fib_g);
            for (int c = 0; c < 3; ++c)
              if (proj(lidx, c) != 0.0) combo += proj(lidx, c) * slices[c].row(p).transpose();
            acc += cl3.left_mult[lidx] * combo;
          }
          out.row(p) = acc.transpose();
        }
      return out;
    });
  };

  // U and its adjoint -----------------------------------------------------------
  auto u_apply = [&](const ComplexMatrix& ambient) {
    const ComplexMatrix* input = &ambient;
    return mach.project(fib_g, [&](int jb) {
      auto slices = mach.eval_slice({input}, jb);
      ComplexMatrix out = ComplexMatrix::Zero(Eigen::Index(r) * r, fib_g);
      for (int ia = 0; ia < r; ++ia)
        for (int kc = 0; kc < r; ++kc) {
          const Eigen::Index p = Eigen::Index(ia) * r + kc;
          ComplexVector val = slices[0].row(p).transpose();
          Eigen::Map<const ComplexMatrix> fold(val.data(), fib_cl, nh);
          ComplexVector contracted = fold * eval_row(ia, jb, kc);
          RealMatrix ad = su2_adjoint(mach.fundamental_at(ia, jb, kc));
          out.row(p) = (clifford_rotation(ad) * w_iso * contracted).transpose();
        }
      return out;
    });
  };
  // lifted vertical operator: mode exact on the H leg ---------------------------
  auto dhat_v_apply = [&](const ComplexMatrix& ambient) {
    const ComplexMatrix fz = kron(ComplexMatrix::Identity(cl2.dim, cl2.dim), cl1.left_mult[0]);
    ComplexMatrix out = ComplexMatrix::Zero(ambient.rows(), ambient.cols());
    for (Eigen::Index h = 0; h < nh; ++h) {
      const auto [twoj, a, b] = h_modes.entries[h];
      const Complex mu = kI * 0.5 * double(twoj - 2 * a);
      if (mu == Complex(0.0, 0.0)) continue;
      out.middleCols(h * fib_cl, fib_cl) =
          mu * (ambient.middleCols(h * fib_cl, fib_cl) * fz.transpose());
    }
    return out;
  };

  // right translation on the capped H leg of a (fiber x nh) fold
  auto h_translate = [&](ComplexMatrix& fold, int ia, int jb, int kc, bool adjoint) {
    for (int twoj = 0; twoj <= two_j_h; ++twoj) {
      const int d = twoj + 1;
      ComplexMatrix dg(d, d);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
          dg(a, b) = std::exp(kI * mach.alpha[ia] * (0.5 * (twoj - 2 * a))) *
                     mach.dmid[twoj][jb](a, b) *
                     std::exp(kI * mach.gamma[kc] * (0.5 * (twoj - 2 * b)));
      if (adjoint) dg = dg.adjoint().eval();
      for (int a = 0; a < d; ++a) {
        ComplexMatrix sub(fold.rows(), d);
        for (int b = 0; b < d; ++b) sub.col(b) = fold.col(h_modes.flat(twoj, a, b));
        ComplexMatrix res = sub * dg.transpose();
        for (int c = 0; c < d; ++c) fold.col(h_modes.flat(twoj, a, c)) = res.col(c);
      }
    }
  };

  // lifted horizontal operator: right derivatives + pointwise range projection
  auto dhat_h_apply = [&](const ComplexMatrix& ambient) {
    ComplexMatrix pre = ComplexMatrix::Zero(ambient.rows(), ambient.cols());
    for (int c = 0; c < 2; ++c)
      pre += transform_cl_leg(ComplexMatrix(rho_fn[c] * ambient),
                              kron(cl2.left_mult[c], cl1.grading));
    // pointwise projection p(g) = r_g p r_g^{-1} on the H leg
    const ComplexMatrix* input = &pre;
    return mach.project(fib_amb, [&](int jb) {
      auto slices = mach.eval_slice({input}, jb);
      ComplexMatrix out = ComplexMatrix::Zero(Eigen::Index(r) * r, fib_amb);
      for (int ia = 0; ia < r; ++ia)
        for (int kc = 0; kc < r; ++kc) {
          const Eigen::Index p = Eigen::Index(ia) * r + kc;
          ComplexVector val = slices[0].row(p).transpose();
          ComplexMatrix fold(fib_cl, nh);
          for (Eigen::Index h = 0; h < nh; ++h) fold.col(h) = val.segment(h * fib_cl, fib_cl);
          h_translate(fold, ia, jb, kc, true);   // r_g^{-1}
          fold = fold * p_flat.transpose();
          h_translate(fold, ia, jb, kc, false);  // r_g
          ComplexVector res(fib_amb);
          for (Eigen::Index h = 0; h < nh; ++h) res.segment(h * fib_cl, fib_cl) = fold.col(h);
          out.row(p) = res.transpose();
        }
      return out;
    });
  };

  // correction term applied through a section: Sum_k F_{Y_k} (d_{Y_k} U) phi ----
  auto correction_apply = [&](const ComplexMatrix& ambient) {
    std::vector<ComplexMatrix> shifted;  // H-leg hit by the right derivatives
    for (int c = 0; c < 3; ++c) shifted.push_back(transform_h_leg(ambient, rho_h[c]));
    std::vector<const ComplexMatrix*> inputs = {&ambient, &shifted[0], &shifted[1], &shifted[2]};
    return mach.project(fib_g, [&](int jb) {
      auto slices = mach.eval_slice(inputs, jb);
      ComplexMatrix out = ComplexMatrix::Zero(Eigen::Index(r) * r, fib_g);
      for (int ia = 0; ia < r; ++ia)
        for (int kc = 0; kc < r; ++kc) {
          const Eigen::Index p = Eigen::Index(ia) * r + kc;
          RealMatrix ad;
          RealMatrix y = frame_at(ia, jb, kc, &ad);
          const ComplexMatrix rot = clifford_rotation(ad);
          const ComplexMatrix adw = rot * w_iso;
          ComplexVector row = eval_row(ia, jb, kc);
          ComplexVector acc = ComplexVector::Zero(fib_g);
          for (int k = 0; k < 3; ++k) {
            // term 1: H-leg derivative inside the evaluation functional.
            // E_{exp(-tY)g} differentiates through r_{exp(+tY)}, the negative
            // of the right-derivative convention used for the function leg.
            ComplexVector combo = ComplexVector::Zero(fib_cl);
            for (int c = 0; c < 3; ++c) {
              if (y(k, c) == 0.0) continue;
              ComplexVector val = slices[1 + c].row(p).transpose();
              Eigen::Map<const ComplexMatrix> fold(val.data(), fib_cl, nh);
              combo -= y(k, c) * (fold * row);
            }
            ComplexVector term = adw * combo;
            // term 2: derivative of the pointwise Clifford rotation
            RealMatrix ady = RealMatrix::Zero(3, 3);
            for (int c = 0; c < 3; ++c) ady += y(k, c) * ad_gen[c];
            ComplexVector val0 = slices[0].row(p).transpose();
            Eigen::Map<const ComplexMatrix> fold0(val0.data(), fib_cl, nh);
            term += -clifford_derivation(ady) * (adw * (fold0 * row));
            // Clifford multiplication by the frame vector
            RealVector yk = y.row(k).transpose();
            acc += clifford_algebra_mul_vector(cl3, yk) * term;
          }
          out.row(p) = acc.transpose();
        }
      return out;
    });
  };

  // pointwise multiplication by a sampled mode function, any fiber
  auto mult_apply = [&](const ComplexMatrix& coeff, int twoj, int a, int b) {
    const ComplexMatrix* input = &coeff;
    const Eigen::Index fiber = coeff.cols();
    return mach.project(fiber, [&](int jb) {
      auto slices = mach.eval_slice({input}, jb);
      ComplexMatrix out(Eigen::Index(r) * r, fiber);
      for (int ia = 0; ia < r; ++ia)
        for (int kc = 0; kc < r; ++kc) {
          const Eigen::Index p = Eigen::Index(ia) * r + kc;
          const Complex f = std::exp(kI * mach.alpha[ia] * (0.5 * (twoj - 2 * a))) *
                            mach.dmid[twoj][jb](a, b) *
                            std::exp(kI * mach.gamma[kc] * (0.5 * (twoj - 2 * b)));
          out.row(p) = f * slices[0].row(p);
        }
      return out;
    });
  };

  // ---- sampling genuine truncated sections of the lifted bundle ----------------
  // Sections are parametrized by weight components chi_m : G -> Cl(G/H) (x) Cl(H)
  // with chi_m(g h) = e^{-i t m / 2} (Ad_h^{-1} (x) Ad_h^{-1}) chi_m(g); the
  // ambient section is phi(g) = sum_m chi_m(g) (r_g u_m).  The equivariance is
  // enforced by averaging over the circle, the transport by quadrature.
  const Eigen::Index n_weights = 2 * two_j_h + 1;
  const Eigen::Index fib_chi = n_weights * fib_cl;
  auto chi_average = [&](const ComplexMatrix& chi) {
    const int steps = 8 * two_j_max + 8;
    ComplexMatrix acc = ComplexMatrix::Zero(chi.rows(), chi.cols());
    for (int kstep = 0; kstep < steps; ++kstep) {
      const double t = 4.0 * M_PI * kstep / steps;
      // right translation by exp(t X3) on the function leg: column phases
      ComplexMatrix moved = chi;
      for (Eigen::Index q = 0; q < nmodes; ++q) {
        const auto [twoj, a, b] = mach.modes.entries[q];
        moved.row(q) *= std::exp(kI * t * (0.5 * (twoj - 2 * b)));
      }
      // W_h^{-1}: weight phases e^{+i t m / 2} and Ad_h on the Clifford legs.
      // Ad_{exp(t X3)} fixes X3, so the Cl(H) leg is untouched; on Lie(G/H)
      // it rotates the (X1, X2) plane.
      // Ad_{exp(t X3)} = exp(t ad_3) rotates the (X1, X2) plane
      RealMatrix rot2 = RealMatrix::Identity(3, 3);
      rot2(0, 0) = std::cos(t);
      rot2(1, 1) = std::cos(t);
      rot2(0, 1) = std::sin(t);
      rot2(1, 0) = -std::sin(t);
      ComplexMatrix cl2rot = ComplexMatrix::Zero(cl2.dim, cl2.dim);
      cl2rot(0, 0) = 1.0;
      cl2rot(3, 3) = 1.0;  // the top form is rotation invariant in 2d
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) cl2rot(1 + i, 1 + j) = rot2(i, j);
      const ComplexMatrix wh = kron(cl2rot, ComplexMatrix::Identity(cl1.dim, cl1.dim));
      ComplexMatrix twisted(moved.rows(), moved.cols());
      for (Eigen::Index mw = 0; mw < n_weights; ++mw) {
        const double tm = double(mw) - two_j_h;  // twice the weight
        const Complex phase = std::exp(kI * t * 0.5 * tm);
        twisted.middleCols(mw * fib_cl, fib_cl) =
            phase * (moved.middleCols(mw * fib_cl, fib_cl) * wh.transpose());
      }
      acc += twisted;
    }
    return ComplexMatrix(acc / double(steps));
  };
  auto transport_section = [&](const ComplexMatrix& chi) {
    const ComplexMatrix* input = &chi;
    return mach.project(fib_amb, [&](int jb) {
      auto slices = mach.eval_slice({input}, jb);
      ComplexMatrix out = ComplexMatrix::Zero(Eigen::Index(r) * r, fib_amb);
      for (int ia = 0; ia < r; ++ia)
        for (int kc = 0; kc < r; ++kc) {
          const Eigen::Index p = Eigen::Index(ia) * r + kc;
          ComplexVector val = slices[0].row(p).transpose();
          ComplexVector full = ComplexVector::Zero(fib_amb);
          for (Eigen::Index mw = 0; mw < n_weights; ++mw) {
            const int tm = int(mw) - two_j_h;
            if (!u_m.count(tm)) continue;
            ComplexVector carrier = transported_um(tm, ia, jb, kc);
            for (Eigen::Index h = 0; h < nh; ++h) {
              if (carrier(h) == Complex(0.0, 0.0)) continue;
              full.segment(h * fib_cl, fib_cl) += carrier(h) * val.segment(mw * fib_cl, fib_cl);
            }
          }
          out.row(p) = full.transpose();
        }
      return out;
    });
  };

  // interior masking: drop the top spins where window truncation bites
  auto interior = [&](const ComplexMatrix& gside) {
    ComplexMatrix out = gside;
    for (Eigen::Index q = 0; q < nmodes; ++q)
      if (mach.modes.entries[q][0] > two_j_max - 1) out.row(q).setZero();
    return out;
  };

  std::mt19937_64 gen(seed);
  auto random_chi = [&]() {
    const int chi_cap = std::max(0, two_j_max - two_j_h - 3);
    ComplexMatrix chi = ComplexMatrix::Zero(nmodes, fib_chi);
    for (Eigen::Index q = 0; q < nmodes; ++q) {
      if (mach.modes.entries[q][0] > chi_cap) continue;
      for (Eigen::Index f = 0; f < fib_chi; ++f)
        chi(q, f) = Complex(double(gen() >> 11) * 0x1.0p-53 - 0.5,
                            double(gen() >> 11) * 0x1.0p-53 - 0.5);
    }
    return chi_average(chi);
  };

  for (int s = 0; s < samples; ++s) {
    ComplexMatrix phi = transport_section(random_chi());
    ComplexMatrix w = u_apply(phi);
    const double wn = w.norm();
    if (wn < 1e-12) continue;
    report.unitarity_defect =
        std::max(report.unitarity_defect, std::abs(wn / phi.norm() - 1.0));
    ComplexMatrix lhs_v = interior(split_apply(w, true) - u_apply(dhat_v_apply(phi)));
    report.thm_vertical_residual = std::max(report.thm_vertical_residual, lhs_v.norm() / wn);
    ComplexMatrix lhs_h =
        interior(split_apply(w, false) - u_apply(dhat_h_apply(phi)) - correction_apply(phi));
    report.thm_horizontal_residual = std::max(report.thm_horizontal_residual, lhs_h.norm() / wn);
    // the correction commutes with multiplication operators: move the factor
    // through U (exact pointwise) and compare both orders
    ComplexMatrix fphi = mult_apply(phi, 2, 1, 1);
    ComplexMatrix comm =
        interior(correction_apply(fphi) - mult_apply(correction_apply(phi), 2, 1, 1));
    report.remark_commutation_residual =
        std::max(report.remark_commutation_residual, comm.norm() / wn);
  }
  return report;
}

}  // namespace speclift
