#include "support/socp_oracles.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace testsupport {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using elastmatch::ConicProgram;

namespace {

// projection onto the cone product described by the program's slots
void project_cones(const ConicProgram& p, VectorXd& w) {
  for (int v : p.nonneg) w[v] = std::max(0.0, w[v]);
  for (const auto& cone : p.soc_cones) {
    int q = static_cast<int>(cone.size());
    double head = w[cone[0]];
    double tail = 0.0;
    for (int i = 1; i < q; ++i) tail += w[cone[i]] * w[cone[i]];
    tail = std::sqrt(tail);
    if (tail <= head) continue;
    if (tail <= -head) {
      for (int v : cone) w[v] = 0.0;
      continue;
    }
    double beta = 0.5 * (head + tail);
    w[cone[0]] = beta;
    double scale = beta / tail;
    for (int i = 1; i < q; ++i) w[cone[i]] *= scale;
  }
}

Eigen::PartialPivLU<MatrixXd> factor_step(const ConicProgram& p, double rho) {
  int n = p.n;
  int q = static_cast<int>(p.G.rows());
  MatrixXd M = MatrixXd::Zero(n + q, n + q);
  M.topLeftCorner(n, n) = rho * MatrixXd::Identity(n, n);
  MatrixXd Gd = MatrixXd(p.G);
  M.topRightCorner(n, q) = Gd.transpose();
  M.bottomLeftCorner(q, n) = Gd;
  return Eigen::PartialPivLU<MatrixXd>(M);
}

}  // namespace

AdmmResult admm_solve(const ConicProgram& p, double rho, int max_iterations, double tol) {
  const int n = p.n;
  const int q = static_cast<int>(p.G.rows());
  AdmmResult out;

  VectorXd x = VectorXd::Zero(n), w = VectorXd::Zero(n), u = VectorXd::Zero(n);
  auto lu = factor_step(p, rho);
  double scale = std::max({1.0, p.c.norm(), p.h.size() ? p.h.norm() : 0.0});

  for (int it = 0; it < max_iterations; ++it) {
    VectorXd rhs(n + q);
    rhs.head(n) = rho * (w - u) - p.c;
    rhs.tail(q) = p.h;
    x = lu.solve(rhs).head(n);

    VectorXd w_prev = w;
    w = x + u;
    project_cones(p, w);
    u += x - w;

    double pri = (x - w).norm();
    double dua = rho * (w - w_prev).norm();
    if (pri <= tol * scale && dua <= tol * scale) {
      out.converged = true;
      out.iterations = it + 1;
      break;
    }
    if ((it + 1) % 200 == 0) {
      if (pri > 10.0 * dua) {
        rho *= 2.0;
        u *= 0.5;
        lu = factor_step(p, rho);
      } else if (dua > 10.0 * pri) {
        rho *= 0.5;
        u *= 2.0;
        lu = factor_step(p, rho);
      }
    }
  }
  if (!out.converged) out.iterations = max_iterations;
  out.x = w;
  out.objective = p.c.dot(x);
  return out;
}

ConicProgram random_feasible_socp(std::mt19937& rng, int max_vars) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> pos(0.2, 1.5);
  auto uint_below = [&](int k) { return static_cast<int>(rng() % static_cast<unsigned>(k)); };

  int n_free = uint_below(3);
  int l = uint_below(6);
  int n_cones = 1 + uint_below(3);
  std::vector<int> dims;
  int n = n_free + l;
  for (int k = 0; k < n_cones; ++k) {
    int d = 2 + uint_below(6);
    if (n + d > max_vars) break;
    dims.push_back(d);
    n += d;
  }
  if (dims.empty()) {
    dims.push_back(2);
    n += 2;
  }

  ConicProgram p;
  p.n = n;
  for (int i = 0; i < l; ++i) p.nonneg.push_back(n_free + i);
  int off = n_free + l;
  for (int d : dims) {
    std::vector<int> cone(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) cone[static_cast<size_t>(i)] = off + i;
    p.soc_cones.push_back(std::move(cone));
    off += d;
  }

  int rows = 1 + uint_below(std::max(1, n / 3));
  MatrixXd G(rows, n);
  for (int r = 0; r < rows; ++r)
    for (int j = 0; j < n; ++j) G(r, j) = gauss(rng);
  p.G = G.sparseView();

  auto interior_point = [&]() {
    VectorXd v = VectorXd::Zero(n);
    for (int i = 0; i < n_free; ++i) v[i] = gauss(rng);
    for (int i = 0; i < l; ++i) v[n_free + i] = pos(rng);
    int o = n_free + l;
    for (int d : dims) {
      double norm2 = 0.0;
      for (int i = 1; i < d; ++i) {
        v[o + i] = gauss(rng);
        norm2 += v[o + i] * v[o + i];
      }
      v[o] = std::sqrt(norm2) + pos(rng);
      o += d;
    }
    return v;
  };

  VectorXd xstar = interior_point();
  p.h = G * xstar;

  VectorXd zstar = interior_point();
  for (int i = 0; i < n_free; ++i) zstar[i] = 0.0;
  VectorXd ystar(rows);
  for (int r = 0; r < rows; ++r) ystar[r] = gauss(rng);
  p.c = -G.transpose() * ystar + zstar;
  double cs = std::max(1.0, p.c.cwiseAbs().maxCoeff());
  p.c /= cs;
  return p;
}

}  // namespace testsupport
