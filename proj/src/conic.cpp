// Second-order cone programming via a homogeneous self-dual embedding.
//
// The public problem form is minimize c'x subject to Gx = h plus cone
// memberships on variable slots. Presolve folds auxiliary variables that are
// defined by a single equality row back into the cone slots, producing the
// internal form
//
//   minimize c'x  s.t.  A x = b,  G x + s = h,  s in K,
//
// which is solved with Nesterov-Todd scaling and a Mehrotra-style
// predictor-corrector. Everything here is deterministic.

#include "elastmatch/conic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <utility>

namespace elastmatch {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using SpMatRow = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// cone layout and Jordan-algebra helpers

struct ConeLayout {
  int l = 0;            // leading nonnegative rows
  std::vector<int> q;   // second-order cone sizes, in row order after l
  int m = 0;
  int degree() const { return l + static_cast<int>(q.size()); }
};

VectorXd cone_identity(const ConeLayout& K) {
  VectorXd e = VectorXd::Zero(K.m);
  e.head(K.l).setOnes();
  int off = K.l;
  for (int qk : K.q) {
    e[off] = 1.0;
    off += qk;
  }
  return e;
}

double cone_min_eig(const ConeLayout& K, const VectorXd& u) {
  double me = kInf;
  for (int i = 0; i < K.l; ++i) me = std::min(me, u[i]);
  int off = K.l;
  for (int qk : K.q) {
    double tail = (qk > 1) ? u.segment(off + 1, qk - 1).norm() : 0.0;
    me = std::min(me, u[off] - tail);
    off += qk;
  }
  return me;
}

VectorXd jordan_product(const ConeLayout& K, const VectorXd& a, const VectorXd& b) {
  VectorXd r(K.m);
  r.head(K.l) = a.head(K.l).cwiseProduct(b.head(K.l));
  int off = K.l;
  for (int qk : K.q) {
    r[off] = a.segment(off, qk).dot(b.segment(off, qk));
    if (qk > 1)
      r.segment(off + 1, qk - 1) =
          a[off] * b.segment(off + 1, qk - 1) + b[off] * a.segment(off + 1, qk - 1);
    off += qk;
  }
  return r;
}

// solves lambda o r = u for r (lambda strictly interior)
VectorXd jordan_solve(const ConeLayout& K, const VectorXd& lambda, const VectorXd& u) {
  VectorXd r(K.m);
  r.head(K.l) = u.head(K.l).cwiseQuotient(lambda.head(K.l));
  int off = K.l;
  for (int qk : K.q) {
    double a = lambda[off];
    double u0 = u[off];
    if (qk == 1) {
      r[off] = u0 / a;
    } else {
      auto bv = lambda.segment(off + 1, qk - 1);
      auto ut = u.segment(off + 1, qk - 1);
      double det = a * a - bv.squaredNorm();
      double r0 = (a * u0 - bv.dot(ut)) / det;
      r[off] = r0;
      r.segment(off + 1, qk - 1) = (ut - r0 * bv) / a;
    }
    off += qk;
  }
  return r;
}

// smallest alpha > 0 with a*alpha^2 + 2b*alpha + c0 = 0, assuming c0 > 0
double quad_step_bound(double a, double b, double c0) {
  if (a == 0.0) return (b < 0.0) ? -c0 / (2.0 * b) : kInf;
  if (a > 0.0) {
    if (b >= 0.0) return kInf;
    double disc = b * b - a * c0;
    if (disc <= 0.0) return kInf;
    return c0 / (-b + std::sqrt(disc));
  }
  return (b + std::sqrt(b * b - a * c0)) / (-a);
}

// sup { alpha : u + alpha d in K }, u strictly interior
double max_step(const ConeLayout& K, const VectorXd& u, const VectorXd& d) {
  double amax = kInf;
  for (int i = 0; i < K.l; ++i)
    if (d[i] < 0.0) amax = std::min(amax, -u[i] / d[i]);
  int off = K.l;
  for (int qk : K.q) {
    if (qk == 1) {
      if (d[off] < 0.0) amax = std::min(amax, -u[off] / d[off]);
    } else {
      auto ut = u.segment(off + 1, qk - 1);
      auto dt = d.segment(off + 1, qk - 1);
      double a = d[off] * d[off] - dt.squaredNorm();
      double b = u[off] * d[off] - ut.dot(dt);
      double utn = ut.norm();
      double c0 = (u[off] - utn) * (u[off] + utn);
      amax = std::min(amax, quad_step_bound(a, b, c0));
    }
    off += qk;
  }
  return amax;
}

// ---------------------------------------------------------------------------
// Nesterov-Todd scaling
//
// For the nonnegative block W = diag(sqrt(s/z)). For a second-order cone
// block W = eta*(2*v*v' - J) where v = (wbar + e)/sqrt(2*(wbar0 + 1)),
// wbar = (sbar + J*zbar)/(2*gamma), J = diag(1, -I). Then
//   W^2      = eta^2  * (2*wbar*wbar' - J)
//   W^-2     = eta^-2 * (2*(J*wbar)*(J*wbar)' - J)
// and lambda = W z = W^-1 s.

struct SocScale {
  double eta = 1.0;
  VectorXd wbar, jwbar, v, jv;
};

struct NTScaling {
  VectorXd wl;  // size l
  std::vector<SocScale> socs;
  VectorXd lambda;  // size m
};

VectorXd rank1_minus_j(const VectorXd& dir, double coef, const Eigen::Ref<const VectorXd>& u) {
  int q = static_cast<int>(dir.size());
  VectorXd r(q);
  double t = dir.dot(u);
  r[0] = coef * (2.0 * dir[0] * t - u[0]);
  if (q > 1) r.tail(q - 1) = coef * (2.0 * t * dir.tail(q - 1) + u.tail(q - 1));
  return r;
}

NTScaling identity_scaling(const ConeLayout& K) {
  NTScaling W;
  W.wl = VectorXd::Ones(K.l);
  for (int qk : K.q) {
    SocScale sc;
    sc.eta = 1.0;
    sc.wbar = VectorXd::Zero(qk);
    sc.wbar[0] = 1.0;
    sc.jwbar = sc.wbar;
    sc.v = sc.wbar;
    sc.jv = sc.wbar;
    W.socs.push_back(std::move(sc));
  }
  W.lambda = cone_identity(K);
  return W;
}

NTScaling compute_scaling(const ConeLayout& K, const VectorXd& s, const VectorXd& z) {
  NTScaling W;
  W.wl.resize(K.l);
  W.lambda.resize(K.m);
  for (int i = 0; i < K.l; ++i) {
    if (!(s[i] > 0.0) || !(z[i] > 0.0))
      throw NumericalFailure("interior-point iterate left the nonnegative cone");
    W.wl[i] = std::sqrt(s[i] / z[i]);
    W.lambda[i] = std::sqrt(s[i] * z[i]);
  }
  int off = K.l;
  for (int qk : K.q) {
    auto sb = s.segment(off, qk);
    auto zb = z.segment(off, qk);
    double stail = qk > 1 ? sb.tail(qk - 1).norm() : 0.0;
    double ztail = qk > 1 ? zb.tail(qk - 1).norm() : 0.0;
    double sres2 = (sb[0] - stail) * (sb[0] + stail);
    double zres2 = (zb[0] - ztail) * (zb[0] + ztail);
    if (!(sb[0] > 0.0) || !(zb[0] > 0.0) || !(sres2 > 0.0) || !(zres2 > 0.0))
      throw NumericalFailure("interior-point iterate left a second-order cone");
    double sres = std::sqrt(sres2), zres = std::sqrt(zres2);
    VectorXd sbar = sb / sres;
    VectorXd jzbar = zb / zres;
    if (qk > 1) jzbar.tail(qk - 1) = -jzbar.tail(qk - 1);
    double gamma = std::sqrt((1.0 + sbar.dot(zb) / zres) * 0.5);
    SocScale sc;
    sc.wbar = (sbar + jzbar) / (2.0 * gamma);
    sc.jwbar = sc.wbar;
    if (qk > 1) sc.jwbar.tail(qk - 1) = -sc.jwbar.tail(qk - 1);
    sc.v = sc.wbar;
    sc.v[0] += 1.0;
    sc.v /= std::sqrt(2.0 * (sc.wbar[0] + 1.0));
    sc.jv = sc.v;
    if (qk > 1) sc.jv.tail(qk - 1) = -sc.jv.tail(qk - 1);
    sc.eta = std::sqrt(sres / zres);
    W.lambda.segment(off, qk) = rank1_minus_j(sc.v, sc.eta, zb);
    W.socs.push_back(std::move(sc));
    off += qk;
  }
  return W;
}

VectorXd mult_W(const ConeLayout& K, const NTScaling& W, const VectorXd& u) {
  VectorXd r(K.m);
  r.head(K.l) = W.wl.cwiseProduct(u.head(K.l));
  int off = K.l;
  for (size_t k = 0; k < K.q.size(); ++k) {
    const SocScale& sc = W.socs[k];
    r.segment(off, K.q[k]) = rank1_minus_j(sc.v, sc.eta, u.segment(off, K.q[k]));
    off += K.q[k];
  }
  return r;
}

VectorXd mult_W2(const ConeLayout& K, const NTScaling& W, const VectorXd& u) {
  VectorXd r(K.m);
  r.head(K.l) = W.wl.array().square().matrix().cwiseProduct(u.head(K.l));
  int off = K.l;
  for (size_t k = 0; k < K.q.size(); ++k) {
    const SocScale& sc = W.socs[k];
    r.segment(off, K.q[k]) = rank1_minus_j(sc.wbar, sc.eta * sc.eta, u.segment(off, K.q[k]));
    off += K.q[k];
  }
  return r;
}

VectorXd mult_W2inv(const ConeLayout& K, const NTScaling& W, const VectorXd& u) {
  VectorXd r(K.m);
  r.head(K.l) = u.head(K.l).cwiseQuotient(W.wl.array().square().matrix());
  int off = K.l;
  for (size_t k = 0; k < K.q.size(); ++k) {
    const SocScale& sc = W.socs[k];
    r.segment(off, K.q[k]) =
        rank1_minus_j(sc.jwbar, 1.0 / (sc.eta * sc.eta), u.segment(off, K.q[k]));
    off += K.q[k];
  }
  return r;
}

// ---------------------------------------------------------------------------
// presolved internal form

struct FoldInfo {
  int var = -1;       // public variable eliminated
  int row = -1;       // public equality row consumed
  int slot_row = -1;  // internal cone row the variable occupied
  double alpha = 0.0;
  double rhs = 0.0;
  std::vector<std::pair<int, double>> others;  // public indices of kept vars
};

struct Internal {
  int n = 0, p = 0;
  ConeLayout K;
  VectorXd c, b, h;  // equilibrated
  SpMat A;
  SpMatRow G;
  VectorXd c0, b0, h0;  // original units
  SpMat A0;
  SpMatRow G0;
  VectorXd col_scale, eq_scale, row_scale;
  std::vector<int> keep, old2new, kept_rows;
  std::vector<FoldInfo> folds;
};

Internal build_internal(const ConicProgram& P) {
  Internal I;
  const int N = P.n;
  const long R = P.G.rows();

  std::vector<int> col_nnz(N, 0), col_row(N, -1);
  std::vector<double> col_val(N, 0.0);
  for (int j = 0; j < P.G.outerSize(); ++j)
    for (SpMat::InnerIterator it(P.G, j); it; ++it) {
      ++col_nnz[j];
      col_row[j] = static_cast<int>(it.row());
      col_val[j] = it.value();
    }

  std::vector<int> occupancy(N, 0);
  for (const auto& cone : P.soc_cones)
    for (int v : cone) ++occupancy[v];
  for (int v : P.nonneg) ++occupancy[v];

  SpMatRow Grow = P.G;
  std::vector<char> row_used(static_cast<size_t>(R), 0);
  std::vector<int> fold_of(N, -1);
  for (int v = 0; v < N; ++v) {
    if (P.c[v] != 0.0 || occupancy[v] != 1 || col_nnz[v] != 1) continue;
    if (std::abs(col_val[v]) <= 1e-12) continue;
    int r = col_row[v];
    if (row_used[r]) continue;
    row_used[r] = 1;
    FoldInfo f;
    f.var = v;
    f.row = r;
    f.alpha = col_val[v];
    f.rhs = P.h[r];
    for (SpMatRow::InnerIterator it(Grow, r); it; ++it)
      if (static_cast<int>(it.col()) != v) f.others.emplace_back(static_cast<int>(it.col()), it.value());
    fold_of[v] = static_cast<int>(I.folds.size());
    I.folds.push_back(std::move(f));
  }

  I.old2new.assign(N, -1);
  for (int v = 0; v < N; ++v)
    if (fold_of[v] < 0) {
      I.old2new[v] = static_cast<int>(I.keep.size());
      I.keep.push_back(v);
    }
  I.n = static_cast<int>(I.keep.size());

  I.c = VectorXd::Zero(I.n);
  for (int i = 0; i < I.n; ++i) I.c[i] = P.c[I.keep[i]];

  std::vector<Triplet> atrip;
  std::vector<double> bvals;
  for (long r = 0; r < R; ++r) {
    if (row_used[static_cast<size_t>(r)]) continue;
    int nr = static_cast<int>(I.kept_rows.size());
    I.kept_rows.push_back(static_cast<int>(r));
    for (SpMatRow::InnerIterator it(Grow, r); it; ++it)
      atrip.emplace_back(nr, I.old2new[static_cast<int>(it.col())], it.value());
    bvals.push_back(P.h[r]);
  }
  I.p = static_cast<int>(bvals.size());
  I.A.resize(I.p, I.n);
  I.A.setFromTriplets(atrip.begin(), atrip.end());
  I.b = I.p > 0 ? VectorXd(Eigen::Map<const VectorXd>(bvals.data(), I.p)) : VectorXd();

  I.K.l = static_cast<int>(P.nonneg.size());
  for (const auto& cone : P.soc_cones) I.K.q.push_back(static_cast<int>(cone.size()));
  I.K.m = I.K.l;
  for (int qk : I.K.q) I.K.m += qk;

  std::vector<Triplet> gtrip;
  I.h = VectorXd::Zero(I.K.m);
  int row = 0;
  auto emit_slot = [&](int v) {
    if (fold_of[v] < 0) {
      gtrip.emplace_back(row, I.old2new[v], -1.0);
    } else {
      FoldInfo& f = I.folds[static_cast<size_t>(fold_of[v])];
      f.slot_row = row;
      for (const auto& [ov, val] : f.others)
        gtrip.emplace_back(row, I.old2new[ov], val / f.alpha);
      I.h[row] = f.rhs / f.alpha;
    }
    ++row;
  };
  for (int v : P.nonneg) emit_slot(v);
  for (const auto& cone : P.soc_cones)
    for (int v : cone) emit_slot(v);
  I.G.resize(I.K.m, I.n);
  I.G.setFromTriplets(gtrip.begin(), gtrip.end());

  I.c0 = I.c;
  I.b0 = I.b;
  I.h0 = I.h;
  I.A0 = I.A;
  I.G0 = I.G;
  I.col_scale = VectorXd::Ones(I.n);
  I.eq_scale = VectorXd::Ones(I.p);
  I.row_scale = VectorXd::Ones(I.K.m);
  return I;
}

// Ruiz equilibration; rows of one second-order cone block share a scale so
// the cone is preserved.
void equilibrate(Internal& I, int passes) {
  auto safe_scale = [](double mx) { return mx > 1e-12 ? 1.0 / std::sqrt(mx) : 1.0; };
  for (int pass = 0; pass < passes; ++pass) {
    if (I.p > 0) {
      VectorXd ra = VectorXd::Zero(I.p);
      for (int j = 0; j < I.A.outerSize(); ++j)
        for (SpMat::InnerIterator it(I.A, j); it; ++it)
          ra[it.row()] = std::max(ra[it.row()], std::abs(it.value()));
      VectorXd sa = ra.unaryExpr(safe_scale);
      I.A = (sa.asDiagonal() * I.A).eval();
      I.b = I.b.cwiseProduct(sa);
      I.eq_scale = I.eq_scale.cwiseProduct(sa);
    }
    if (I.K.m > 0) {
      VectorXd rg = VectorXd::Zero(I.K.m);
      for (int r = 0; r < I.G.outerSize(); ++r)
        for (SpMatRow::InnerIterator it(I.G, r); it; ++it)
          rg[r] = std::max(rg[r], std::abs(it.value()));
      int off = I.K.l;
      for (int qk : I.K.q) {
        double mx = rg.segment(off, qk).maxCoeff();
        rg.segment(off, qk).setConstant(mx);
        off += qk;
      }
      VectorXd sg = rg.unaryExpr(safe_scale);
      I.G = (sg.asDiagonal() * I.G).eval();
      I.h = I.h.cwiseProduct(sg);
      I.row_scale = I.row_scale.cwiseProduct(sg);
    }
    VectorXd cm = VectorXd::Zero(I.n);
    for (int j = 0; j < I.A.outerSize(); ++j)
      for (SpMat::InnerIterator it(I.A, j); it; ++it)
        cm[j] = std::max(cm[j], std::abs(it.value()));
    for (int r = 0; r < I.G.outerSize(); ++r)
      for (SpMatRow::InnerIterator it(I.G, r); it; ++it)
        cm[it.col()] = std::max(cm[it.col()], std::abs(it.value()));
    VectorXd sc = cm.unaryExpr(safe_scale);
    I.A = (I.A * sc.asDiagonal()).eval();
    I.G = (I.G * sc.asDiagonal()).eval();
    I.c = I.c.cwiseProduct(sc);
    I.col_scale = I.col_scale.cwiseProduct(sc);
  }
}

// ---------------------------------------------------------------------------
// KKT system
//
//   [ 0   A'  G'  ] [x]   [bx]
//   [ A   0   0   ] [y] = [by]
//   [ G   0  -W^2 ] [z]   [bz]
//
// reduced to H = G' W^-2 G; p = 0 uses a Cholesky fast path, otherwise a
// dense LU of the saddle system. One pass of iterative refinement on the
// full system.

struct KKTSolver {
  const Internal& I;
  std::vector<std::vector<std::pair<int, double>>> grows;
  MatrixXd Ad, H, M;
  Eigen::LLT<MatrixXd> llt;
  Eigen::PartialPivLU<MatrixXd> lu;
  const NTScaling* W = nullptr;

  explicit KKTSolver(const Internal& prob) : I(prob) {
    grows.resize(static_cast<size_t>(I.K.m));
    for (int r = 0; r < I.G.outerSize(); ++r)
      for (SpMatRow::InnerIterator it(I.G, r); it; ++it)
        grows[static_cast<size_t>(r)].emplace_back(static_cast<int>(it.col()), it.value());
    Ad = MatrixXd(I.A);
    H.resize(I.n, I.n);
    if (I.p > 0) M.resize(I.n + I.p, I.n + I.p);
  }

  void accumulate_pair(const std::vector<std::pair<int, double>>& row, double coef) {
    for (const auto& [i, vi] : row)
      for (const auto& [j, vj] : row) H(i, j) += coef * vi * vj;
  }

  void factor(const NTScaling& sc) {
    W = &sc;
    H.setZero();
    for (int r = 0; r < I.K.l; ++r)
      accumulate_pair(grows[static_cast<size_t>(r)], 1.0 / (sc.wl[r] * sc.wl[r]));
    int off = I.K.l;
    VectorXd u(I.n);
    for (size_t k = 0; k < I.K.q.size(); ++k) {
      int qk = I.K.q[k];
      const SocScale& s = sc.socs[k];
      double e2i = 1.0 / (s.eta * s.eta);
      u.setZero();
      for (int j = 0; j < qk; ++j)
        for (const auto& [idx, val] : grows[static_cast<size_t>(off + j)])
          u[idx] += s.jwbar[j] * val;
      for (int j = 0; j < qk; ++j)
        accumulate_pair(grows[static_cast<size_t>(off + j)], (j == 0 ? -e2i : e2i));
      H.noalias() += (2.0 * e2i) * u * u.transpose();
      off += qk;
    }
    double base = 1.0;
    if (I.n > 0) base = std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
    if (I.p == 0) {
      for (double d : {0.0, 1e-12 * base, 1e-8 * base, 1e-4 * base}) {
        MatrixXd Hreg = H;
        if (d > 0.0) Hreg.diagonal().array() += d;
        llt.compute(Hreg);
        if (llt.info() == Eigen::Success) return;
      }
      throw NumericalFailure("cone-reduced KKT matrix is not positive definite");
    }
    double d = 1e-12 * base;
    M.setZero();
    M.topLeftCorner(I.n, I.n) = H;
    M.topLeftCorner(I.n, I.n).diagonal().array() += d;
    M.topRightCorner(I.n, I.p) = Ad.transpose();
    M.bottomLeftCorner(I.p, I.n) = Ad;
    M.bottomRightCorner(I.p, I.p).diagonal().array() -= d;
    lu.compute(M);
  }

  void solve_once(const VectorXd& bx, const VectorXd& by, const VectorXd& bz,
                  VectorXd& x, VectorXd& y, VectorXd& z) const {
    VectorXd rx = bx + I.G.transpose() * mult_W2inv(I.K, *W, bz);
    if (I.p > 0) {
      VectorXd rhs(I.n + I.p);
      rhs << rx, by;
      VectorXd sol = lu.solve(rhs);
      x = sol.head(I.n);
      y = sol.tail(I.p);
    } else {
      x = llt.solve(rx);
      y.resize(0);
    }
    z = mult_W2inv(I.K, *W, VectorXd(I.G * x - bz));
  }

  void solve(const VectorXd& bx, const VectorXd& by, const VectorXd& bz,
             VectorXd& x, VectorXd& y, VectorXd& z) const {
    solve_once(bx, by, bz, x, y, z);
    for (int pass = 0; pass < 2; ++pass) {
      VectorXd resx = bx - (I.A.transpose() * y + I.G.transpose() * z);
      VectorXd resy = by - I.A * x;
      VectorXd resz = bz - (I.G * x - mult_W2(I.K, *W, z));
      VectorXd cx, cy, cz;
      solve_once(resx, resy, resz, cx, cy, cz);
      x += cx;
      if (I.p > 0) y += cy;
      z += cz;
    }
    if (!x.allFinite() || !y.allFinite() || !z.allFinite())
      throw NumericalFailure("KKT solve produced non-finite values");
  }
};

// ---------------------------------------------------------------------------
// solution recovery

VectorXd recover_primal(const ConicProgram& P, const Internal& I, const VectorXd& xi,
                        double hom) {
  VectorXd xp = VectorXd::Zero(P.n);
  for (int i = 0; i < I.n; ++i) xp[I.keep[i]] = xi[i];
  for (const FoldInfo& f : I.folds) {
    double acc = hom * f.rhs;
    for (const auto& [ov, val] : f.others) acc -= val * xp[ov];
    xp[f.var] = acc / f.alpha;
  }
  return xp;
}

VectorXd recover_duals(const ConicProgram& P, const Internal& I, const VectorXd& yi,
                       const VectorXd& zi) {
  VectorXd yp = VectorXd::Zero(P.G.rows());
  for (int i = 0; i < I.p; ++i) yp[I.kept_rows[i]] = yi[i];
  for (const FoldInfo& f : I.folds) yp[f.row] = zi[f.slot_row] / f.alpha;
  return yp;
}

std::string trace_summary(int it, double pres, double dres, double relgap) {
  std::ostringstream os;
  os << "iteration " << it << ": primal residual " << pres << ", dual residual " << dres
     << ", relative gap " << relgap;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// public surface

void ConicProgram::validate() const {
  if (n < 0) throw DimensionMismatch("negative variable count");
  if (c.size() != n) throw DimensionMismatch("objective length does not match variable count");
  if (G.rows() != h.size()) throw DimensionMismatch("equality right-hand side length mismatch");
  if (G.rows() > 0 && G.cols() != n)
    throw DimensionMismatch("equality matrix column count does not match variable count");
  std::vector<int> occupancy(static_cast<size_t>(n), 0);
  auto touch = [&](int v) {
    if (v < 0 || v >= n) throw DimensionMismatch("cone index out of range");
    if (++occupancy[static_cast<size_t>(v)] > 1)
      throw DimensionMismatch("variable appears in more than one cone slot");
  };
  for (const auto& cone : soc_cones) {
    if (cone.empty()) throw DimensionMismatch("empty second-order cone");
    for (int v : cone) touch(v);
  }
  for (int v : nonneg) touch(v);
}

AffineExpr AffineExpr::variables(int n_total, int first, int count) {
  AffineExpr e;
  e.A.resize(count, n_total);
  std::vector<Triplet> t;
  t.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) t.emplace_back(i, first + i, 1.0);
  e.A.setFromTriplets(t.begin(), t.end());
  e.b = VectorXd::Zero(count);
  return e;
}

AffineExpr AffineExpr::constant(int n_total, const VectorXd& values) {
  AffineExpr e;
  e.A.resize(values.size(), n_total);
  e.b = values;
  return e;
}

int ProgramBuilder::add_variables(int count) {
  int first = n_;
  n_ += count;
  return first;
}

void ProgramBuilder::add_objective_term(int var, double coef) { cost_.emplace_back(var, coef); }

void ProgramBuilder::add_nonneg(int var) { nonneg_.push_back(var); }

void ProgramBuilder::add_equality(const AffineExpr& expr) {
  if (expr.A.rows() != expr.b.size()) throw DimensionMismatch("affine expression shape mismatch");
  int base = static_cast<int>(h_.size());
  for (int j = 0; j < expr.A.outerSize(); ++j)
    for (SpMat::InnerIterator it(expr.A, j); it; ++it)
      g_.emplace_back(base + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int i = 0; i < expr.rows(); ++i) h_.push_back(-expr.b[i]);
}

int ProgramBuilder::define_aux(const AffineExpr& expr) {
  if (expr.A.rows() != expr.b.size()) throw DimensionMismatch("affine expression shape mismatch");
  int first = add_variables(expr.rows());
  int base = static_cast<int>(h_.size());
  for (int i = 0; i < expr.rows(); ++i) {
    g_.emplace_back(base + i, first + i, 1.0);
    h_.push_back(expr.b[i]);
  }
  for (int j = 0; j < expr.A.outerSize(); ++j)
    for (SpMat::InnerIterator it(expr.A, j); it; ++it)
      g_.emplace_back(base + static_cast<int>(it.row()), static_cast<int>(it.col()), -it.value());
  return first;
}

void ProgramBuilder::add_norm_epigraph(const AffineExpr& expr, int t) {
  int w = define_aux(expr);
  std::vector<int> cone;
  cone.push_back(t);
  for (int i = 0; i < expr.rows(); ++i) cone.push_back(w + i);
  cones_.push_back(std::move(cone));
}

void ProgramBuilder::add_square_epigraph(const AffineExpr& expr, int bound) {
  AffineExpr head;
  head.A.resize(1, n_);
  head.A.insert(0, bound) = 1.0;
  head.b = VectorXd::Constant(1, 1.0);
  int hv = define_aux(head);

  int k = expr.rows();
  AffineExpr tail;
  tail.A.resize(k + 1, n_);
  std::vector<Triplet> t;
  for (int j = 0; j < expr.A.outerSize(); ++j)
    for (SpMat::InnerIterator it(expr.A, j); it; ++it)
      t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), 2.0 * it.value());
  t.emplace_back(k, bound, 1.0);
  tail.A.setFromTriplets(t.begin(), t.end());
  tail.b = VectorXd::Zero(k + 1);
  tail.b.head(k) = 2.0 * expr.b;
  tail.b[k] = -1.0;
  int w = define_aux(tail);

  std::vector<int> cone;
  cone.push_back(hv);
  for (int i = 0; i <= k; ++i) cone.push_back(w + i);
  cones_.push_back(std::move(cone));
}

void ProgramBuilder::add_soc_constraint(const AffineExpr& head, const AffineExpr& tail) {
  if (head.rows() != 1) throw DimensionMismatch("cone head must be a single affine row");
  int hv = define_aux(head);
  int w = define_aux(tail);
  std::vector<int> cone;
  cone.push_back(hv);
  for (int i = 0; i < tail.rows(); ++i) cone.push_back(w + i);
  cones_.push_back(std::move(cone));
}

ConicProgram ProgramBuilder::build() {
  ConicProgram P;
  P.n = n_;
  P.c = VectorXd::Zero(n_);
  for (const auto& [v, coef] : cost_) P.c[v] += coef;
  P.G.resize(static_cast<long>(h_.size()), n_);
  P.G.setFromTriplets(g_.begin(), g_.end());
  P.h = h_.empty() ? VectorXd()
                   : VectorXd(Eigen::Map<const VectorXd>(h_.data(), static_cast<long>(h_.size())));
  P.soc_cones = cones_;
  P.nonneg = nonneg_;
  P.validate();
  return P;
}

ConicSolution solve(const ConicProgram& program, const SolverOptions& opts) {
  program.validate();
  Internal I = build_internal(program);
  equilibrate(I, 3);

  const ConeLayout& K = I.K;
  const double tol = opts.tol;
  ConicSolution out;

  if (I.n == 0) {
    // everything folded to constants; just check feasibility
    double viol = I.p > 0 ? I.b0.cwiseAbs().maxCoeff() : 0.0;
    if (K.m > 0) viol = std::max(viol, -cone_min_eig(K, I.h0));
    out.x = recover_primal(program, I, VectorXd(), 1.0);
    out.y = VectorXd::Zero(program.G.rows());
    out.primal_objective = program.c.dot(out.x);
    out.dual_objective = out.primal_objective;
    if (viol <= 1e-9 * std::max(1.0, I.h0.size() ? I.h0.cwiseAbs().maxCoeff() : 1.0)) {
      out.status = SolveStatus::Optimal;
      out.message = "all variables fixed by equalities";
    } else {
      out.status = SolveStatus::Infeasible;
      out.message = "fixed variables violate the cone constraints";
    }
    return out;
  }

  const double resx0 = std::max(1.0, I.c0.norm());
  const double resy0 = std::max(1.0, I.b0.norm());
  const double resz0 = std::max(1.0, I.h0.norm());
  const VectorXd e = cone_identity(K);
  const int deg = K.degree();

  VectorXd x, y, s, z;
  double tau = 1.0, kappa = 1.0;
  KKTSolver kkt(I);
  {
    NTScaling Wid = identity_scaling(K);
    kkt.factor(Wid);
    kkt.W = &Wid;
    VectorXd xx, yy, zz;
    kkt.solve(VectorXd::Zero(I.n), I.b, I.h, xx, yy, zz);
    x = xx;
    s = -zz;
    if (K.m > 0) {
      double ts = -cone_min_eig(K, s);
      if (ts >= -1e-8 * std::max(1.0, s.norm())) s += (1.0 + ts) * e;
    }
    kkt.solve(-I.c, VectorXd::Zero(I.p), VectorXd::Zero(K.m), xx, y, z);
    if (K.m > 0) {
      double tz = -cone_min_eig(K, z);
      if (tz >= -1e-8 * std::max(1.0, z.norm())) z += (1.0 + tz) * e;
    }
  }

  double pres = kInf, dres = kInf, relgap = kInf;
  int it = 0;
  auto finalize = [&](SolveStatus st, const std::string& msg) {
    VectorXd xo = I.col_scale.cwiseProduct(x) / tau;
    VectorXd yo = I.eq_scale.cwiseProduct(y) / tau;
    VectorXd zo = I.row_scale.cwiseProduct(z) / tau;
    VectorXd so = s.cwiseQuotient(I.row_scale) / tau;
    out.x = recover_primal(program, I, xo, 1.0);
    out.y = recover_duals(program, I, yo, zo);
    out.primal_objective = program.c.dot(out.x);
    out.dual_objective = -(I.b0.dot(yo) + I.h0.dot(zo));
    out.gap = so.dot(zo);
    out.primal_residual = pres;
    out.dual_residual = dres;
    out.status = st;
    out.iterations = it;
    out.message = msg;
  };

  // numerics eventually floor out near the central path's end; remember the
  // best iterate so a late stall can still return the good point
  VectorXd best_x = x, best_y = y, best_z = z, best_s = s;
  double best_tau = tau, best_kappa = kappa;
  double best_pres = kInf, best_dres = kInf, best_relgap = kInf, best_score = kInf;
  int best_it = 0;
  double mu0 = 0.0;
  auto restore_best = [&]() {
    x = best_x;
    y = best_y;
    z = best_z;
    s = best_s;
    tau = best_tau;
    kappa = best_kappa;
    pres = best_pres;
    dres = best_dres;
    relgap = best_relgap;
  };
  auto stall_exit = [&](const char* why) {
    restore_best();
    bool near = pres <= 1e-6 && dres <= 1e-6 && relgap <= 1e-6;
    finalize(near ? SolveStatus::Optimal : SolveStatus::NumericalProblem,
             std::string(why) + (near ? ", returning reduced-accuracy solution: "
                                      : ", returning best iterate: ") +
                 trace_summary(best_it, pres, dres, relgap));
  };

  for (it = 0;; ++it) {
    VectorXd xo = I.col_scale.cwiseProduct(x);
    VectorXd yo = I.eq_scale.cwiseProduct(y);
    VectorXd zo = I.row_scale.cwiseProduct(z);
    VectorXd so = s.cwiseQuotient(I.row_scale);
    double gap_o = so.dot(zo);
    double pc = I.c0.dot(xo) / tau;
    double rp1 = I.p > 0 ? (I.A0 * xo - I.b0 * tau).norm() / resy0 : 0.0;
    double rp2 = K.m > 0 ? (I.G0 * xo + so - I.h0 * tau).norm() / resz0 : 0.0;
    pres = std::max(rp1, rp2) / tau;
    dres = (I.A0.transpose() * yo + I.G0.transpose() * zo + I.c0 * tau).norm() / (resx0 * tau);
    relgap = (gap_o / (tau * tau)) / std::max(1.0, std::abs(pc));

    if (pres <= tol && dres <= tol && relgap <= tol) {
      finalize(SolveStatus::Optimal, trace_summary(it, pres, dres, relgap));
      return out;
    }
    double score = std::max({pres, dres, relgap});
    if (score < best_score) {
      best_score = score;
      best_x = x;
      best_y = y;
      best_z = z;
      best_s = s;
      best_tau = tau;
      best_kappa = kappa;
      best_pres = pres;
      best_dres = dres;
      best_relgap = relgap;
      best_it = it;
    } else if (best_score < 1e-4 && score > 1e3 * best_score) {
      stall_exit("progress lost to roundoff");
      return out;
    }
    double nd = -(I.h0.dot(zo) + I.b0.dot(yo));
    if (nd > tol * std::max({1.0, yo.norm(), zo.norm()})) {
      double cert = (I.A0.transpose() * yo + I.G0.transpose() * zo).norm() / (resx0 * nd);
      if (cert <= tol) {
        out.y = recover_duals(program, I, yo / nd, zo / nd);
        out.x.resize(0);
        out.status = SolveStatus::Infeasible;
        out.iterations = it;
        out.message = "primal infeasibility certificate found";
        return out;
      }
    }
    double nd2 = -I.c0.dot(xo);
    if (nd2 > tol * std::max(1.0, xo.norm())) {
      double r1 = I.p > 0 ? (I.A0 * xo).norm() / resy0 : 0.0;
      double r2 = K.m > 0 ? (I.G0 * xo + so).norm() / resz0 : 0.0;
      if (std::max(r1, r2) / nd2 <= tol) {
        out.x = recover_primal(program, I, xo / nd2, 0.0);
        out.y.resize(0);
        out.status = SolveStatus::Unbounded;
        out.iterations = it;
        out.message = "dual infeasibility certificate found (objective unbounded below)";
        return out;
      }
    }
    if (it >= opts.max_iterations) {
      if (score > best_score) restore_best();
      finalize(SolveStatus::MaxIterations,
               "iteration limit reached: " + trace_summary(it, pres, dres, relgap));
      return out;
    }

    VectorXd rx = I.A.transpose() * y + I.G.transpose() * z + I.c * tau;
    VectorXd ry = I.A * x - I.b * tau;
    VectorXd rz = I.G * x + s - I.h * tau;
    double rt = I.c.dot(x) + I.b.dot(y) + I.h.dot(z) + kappa;

    NTScaling W = compute_scaling(K, s, z);
    kkt.factor(W);
    kkt.W = &W;
    double gap_s = W.lambda.squaredNorm();
    double mu = (gap_s + tau * kappa) / (deg + 1);
    if (it == 0) mu0 = std::max(mu, 1e-300);
    if (mu < 1e-13 * mu0) {
      stall_exit("barrier parameter hit the numerical floor");
      return out;
    }

    VectorXd x1, y1, z1;
    kkt.solve(-I.c, I.b, I.h, x1, y1, z1);
    double dgi = I.c.dot(x1) + I.b.dot(y1) + I.h.dot(z1) - kappa / tau;
    if (!(std::abs(dgi) > 1e-14 * (1.0 + kappa / tau))) {
      stall_exit("homogenization step degenerate");
      return out;
    }

    auto direction = [&](const VectorXd& Rx, const VectorXd& Ry, const VectorXd& Rz, double Rt,
                         const VectorXd& Rs, double Rk, VectorXd& dx, VectorXd& dy, VectorXd& dz,
                         VectorXd& dst, VectorXd& dzt, double& dtau, double& dkappa) {
      VectorXd t = jordan_solve(K, W.lambda, Rs);
      VectorXd Rz2 = Rz - mult_W(K, W, t);
      VectorXd x2, y2, z2;
      kkt.solve(Rx, Ry, Rz2, x2, y2, z2);
      dtau = (Rt - Rk / tau - (I.c.dot(x2) + I.b.dot(y2) + I.h.dot(z2))) / dgi;
      dx = x2 + dtau * x1;
      dy = y2 + dtau * y1;
      dz = z2 + dtau * z1;
      dzt = mult_W(K, W, dz);
      dst = t - dzt;
      dkappa = (Rk - kappa * dtau) / tau;
    };

    auto boundary = [&](const VectorXd& dst, const VectorXd& dzt, double dtau, double dkappa) {
      double a = std::min(max_step(K, W.lambda, dst), max_step(K, W.lambda, dzt));
      if (dtau < 0.0) a = std::min(a, -tau / dtau);
      if (dkappa < 0.0) a = std::min(a, -kappa / dkappa);
      return a;
    };

    VectorXd lamlam = jordan_product(K, W.lambda, W.lambda);
    VectorXd dxa, dya, dza, dsta, dzta;
    double dta, dka;
    direction(-rx, -ry, -rz, -rt, -lamlam, -tau * kappa, dxa, dya, dza, dsta, dzta, dta, dka);
    double alpha_aff = std::min(1.0, boundary(dsta, dzta, dta, dka));
    double sigma = std::pow(1.0 - alpha_aff, 3);
    sigma = std::min(1.0, std::max(0.0, sigma));

    VectorXd Rs = -lamlam - jordan_product(K, dsta, dzta) + sigma * mu * e;
    double Rk = -tau * kappa - dta * dka + sigma * mu;
    double f = -(1.0 - sigma);
    VectorXd dx, dy, dz, dst, dzt;
    double dtau, dkappa;
    direction(f * rx, f * ry, f * rz, f * rt, Rs, Rk, dx, dy, dz, dst, dzt, dtau, dkappa);

    double alpha = std::min(1.0, 0.99 * boundary(dst, dzt, dtau, dkappa));

    // the scaled step keeps lambda + alpha*d strictly inside the cone, but
    // mapping back through an ill-conditioned W can land outside; retreat
    // until the unscaled point is strictly interior
    VectorXd ds = mult_W(K, W, dst);
    bool stepped = false;
    for (int bt = 0; bt < 40 && !stepped; ++bt) {
      VectorXd sn = s + alpha * ds;
      VectorXd zn = z + alpha * dz;
      double tn = tau + alpha * dtau;
      double kn = kappa + alpha * dkappa;
      if (tn > 0.0 && kn > 0.0 && sn.allFinite() && zn.allFinite() &&
          cone_min_eig(K, sn) > 0.0 && cone_min_eig(K, zn) > 0.0) {
        x += alpha * dx;
        y += alpha * dy;
        z = zn;
        s = sn;
        tau = tn;
        kappa = kn;
        stepped = true;
      } else {
        alpha *= 0.5;
      }
    }
    if (!stepped) {
      stall_exit("step length collapsed");
      return out;
    }
    if (opts.verbose)
      std::fprintf(stderr,
                   "it %3d  pres %.2e  dres %.2e  relgap %.2e  mu %.2e  tau %.2e  "
                   "sigma %.2f  alpha %.3f\n",
                   it, pres, dres, relgap, mu, tau, sigma, alpha);
    if (!x.allFinite() || !y.allFinite()) {
      stall_exit("iterate diverged");
      return out;
    }
  }
}

void dump_program(const ConicProgram& program, std::ostream& os) {
  os << "variables: " << program.n << "\n";
  os << "objective:";
  for (int i = 0; i < program.n; ++i)
    if (program.c[i] != 0.0) os << " " << i << ":" << program.c[i];
  os << "\nequalities: " << program.G.rows() << "\n";
  for (int j = 0; j < program.G.outerSize(); ++j)
    for (SpMat::InnerIterator it(program.G, j); it; ++it)
      os << "  G(" << it.row() << "," << it.col() << ") = " << it.value() << "\n";
  for (long r = 0; r < program.h.size(); ++r) os << "  h(" << r << ") = " << program.h[r] << "\n";
  os << "second-order cones:\n";
  for (const auto& cone : program.soc_cones) {
    os << " ";
    for (int v : cone) os << " " << v;
    os << "\n";
  }
  os << "nonnegative:";
  for (int v : program.nonneg) os << " " << v;
  os << "\n";
}

}  // namespace elastmatch
