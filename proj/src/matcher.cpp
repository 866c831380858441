#include "elastmatch/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace elastmatch {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Frame {
  Polygon source, target;  // normalized, source CCW
  double scale = 1.0;      // original -> normalized multiplier
  Vec2 center{0.0, 0.0};
  bool source_reversed = false;
  int K = 0;
};

Frame normalize_pair(const Polygon& source, const Polygon& target) {
  if (source.size() < 3 || target.size() < 3)
    throw std::invalid_argument("polygons need at least three vertices");
  if (!is_simple(source)) throw std::invalid_argument("source polygon is not simple");
  if (!is_simple(target)) throw std::invalid_argument("target polygon is not simple");

  Vec2 lo = source[0], hi = source[0];
  auto extend = [&](const Polygon& p) {
    for (const Vec2& v : p.vertices) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
  };
  extend(source);
  extend(target);
  double diag = (hi - lo).norm();
  if (!(diag > 0.0)) throw std::invalid_argument("degenerate input extent");

  Frame fr;
  fr.scale = 1.0 / diag;
  fr.center = 0.5 * (lo + hi);
  auto map = [&](const Polygon& p) {
    Polygon q = p;
    for (Vec2& v : q.vertices) v = (v - fr.center) * fr.scale;
    return q;
  };
  fr.source = map(source);
  fr.target = map(target);
  if (signed_area(fr.source) < 0.0) {
    fr.source = fr.source.reversed();
    fr.source_reversed = true;
  }
  fr.K = fr.source.size();
  return fr;
}

// ccw-order index -> input-order index
int input_index(const Frame& fr, int i) { return fr.source_reversed ? fr.K - 1 - i : i; }

// Per-triangle linear maps from boundary displacements to the deformation
// jacobian coordinates (a, b, c, d) = ((J11+J22)/2, (J21-J12)/2,
// (J11-J22)/2, (J12+J21)/2), with constant offset (1, 0, 0, 0). Interior
// nodes follow the zero-force extension of the boundary.
struct JacobianMaps {
  std::vector<Eigen::Matrix<double, 4, Eigen::Dynamic>> maps;
};

JacobianMaps build_jacobian_maps(const TriMesh& mesh, const NodeOrdering& ord,
                                 const SchurOperator& schur) {
  const int K = schur.boundary_nodes;
  const int cols = 2 * K;
  const MatrixXd& M = schur.interior_map;
  JacobianMaps jm;
  jm.maps.reserve(mesh.triangles.size());
  for (const auto& tri : mesh.triangles) {
    Vec2 p[3] = {mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]};
    Vec2 e[3] = {p[2] - p[1], p[0] - p[2], p[1] - p[0]};
    double area2 = e[2].x() * (-e[1].y()) - e[2].y() * (-e[1].x());
    Eigen::Matrix<double, 4, Eigen::Dynamic> map =
        Eigen::Matrix<double, 4, Eigen::Dynamic>::Zero(4, cols);
    for (int m = 0; m < 3; ++m) {
      Vec2 g(-e[m].y() / area2, e[m].x() / area2);
      Eigen::Vector4d cx, cy;  // coefficients of the node's x and y dofs
      cx << 0.5 * g.x(), -0.5 * g.y(), 0.5 * g.x(), 0.5 * g.y();
      cy << 0.5 * g.y(), 0.5 * g.x(), -0.5 * g.y(), 0.5 * g.x();
      int nn = ord.new_of_old[tri[m]];
      if (nn < K) {
        map.col(2 * nn) += cx;
        map.col(2 * nn + 1) += cy;
      } else {
        map += cx * M.row(2 * (nn - K));
        map += cy * M.row(2 * (nn - K) + 1);
      }
    }
    jm.maps.push_back(std::move(map));
  }
  return jm;
}

struct CdStats {
  double max_cd = 0.0;
  double mean_cd = 0.0;
  int flipped = 0;
};

CdStats cd_stats(const JacobianMaps& jm, const VectorXd& u) {
  CdStats st;
  double sum = 0.0;
  int counted = 0;
  for (const auto& map : jm.maps) {
    Eigen::Vector4d v = map * u;
    double sp = std::hypot(1.0 + v[0], v[1]);
    double sm = std::hypot(v[2], v[3]);
    if (sp <= sm) {
      ++st.flipped;
      continue;
    }
    double cd = (sp + sm) / (sp - sm);
    st.max_cd = std::max(st.max_cd, cd);
    sum += cd;
    ++counted;
  }
  st.mean_cd = counted > 0 ? sum / counted : 0.0;
  return st;
}

const char* status_name(SolveStatus st) {
  switch (st) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::Unbounded:
      return "unbounded";
    case SolveStatus::MaxIterations:
      return "iteration_limit";
    case SolveStatus::NumericalProblem:
      return "numerical";
  }
  return "unknown";
}

struct StepResult {
  VectorXd u;
  std::string status;
  bool usable = false;
};

// Shared subproblem: minimize
//   sum_i f_i + alpha * d + beta * e
//   s.t. f_i >= ||force at vertex i||, d >= fidelity(u)^2, e >= ||u - u0||^2
// plus optional per-triangle conformal distortion cones linearized around u0.
StepResult solve_step(const SchurOperator& schur, const AffineExpr& fidelity,
                      const VectorXd& u0, const MatchConfig& cfg, double alpha, double beta,
                      const JacobianMaps* jm) {
  const int K = schur.boundary_nodes;
  const int nu = 2 * K;
  ProgramBuilder pb;
  int uvar = pb.add_variables(nu);
  int fvar = pb.add_variables(K);
  int dvar = pb.add_variables(1);
  int evar = pb.add_variables(1);
  const int nv = pb.variable_count();
  (void)uvar;

  for (int i = 0; i < K; ++i) pb.add_objective_term(fvar + i, 1.0);
  pb.add_objective_term(dvar, alpha);
  pb.add_objective_term(evar, beta);

  for (int i = 0; i < K; ++i) {
    AffineExpr rows;
    rows.A.resize(2, nv);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<size_t>(2 * nu));
    for (int j = 0; j < nu; ++j)
      for (int r = 0; r < 2; ++r) {
        double v = schur.S(2 * i + r, j);
        if (v != 0.0) t.emplace_back(r, j, v);
      }
    rows.A.setFromTriplets(t.begin(), t.end());
    rows.b = Eigen::Vector2d::Zero();
    pb.add_norm_epigraph(rows, fvar + i);
  }

  pb.add_square_epigraph(fidelity, dvar);

  {
    AffineExpr prox;
    prox.A.resize(nu, nv);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<size_t>(nu));
    for (int j = 0; j < nu; ++j) t.emplace_back(j, j, 1.0);
    prox.A.setFromTriplets(t.begin(), t.end());
    prox.b = -u0;
    pb.add_square_epigraph(prox, evar);
  }

  if (jm != nullptr && cfg.distortion_bound > 1.0) {
    double k = (cfg.distortion_bound - 1.0) / (cfg.distortion_bound + 1.0);
    for (const auto& map : jm->maps) {
      Eigen::Vector4d at0 = map * u0;
      double theta = std::atan2(at0[1], 1.0 + at0[0]);
      double ct = std::cos(theta), st = std::sin(theta);

      AffineExpr head;
      head.A.resize(1, nv);
      std::vector<Eigen::Triplet<double>> th;
      for (int j = 0; j < 2 * K; ++j) {
        double v = k * (ct * map(0, j) + st * map(1, j));
        if (v != 0.0) th.emplace_back(0, j, v);
      }
      head.A.setFromTriplets(th.begin(), th.end());
      head.b = VectorXd::Constant(1, k * ct);

      AffineExpr tail;
      tail.A.resize(2, nv);
      std::vector<Eigen::Triplet<double>> tt;
      for (int j = 0; j < 2 * K; ++j) {
        if (map(2, j) != 0.0) tt.emplace_back(0, j, map(2, j));
        if (map(3, j) != 0.0) tt.emplace_back(1, j, map(3, j));
      }
      tail.A.setFromTriplets(tt.begin(), tt.end());
      tail.b = Eigen::Vector2d::Zero();
      pb.add_soc_constraint(head, tail);
    }
  }

  StepResult out;
  try {
    ConicSolution sol = solve(pb.build(), cfg.solver);
    out.status = status_name(sol.status);
    bool near_optimal = sol.primal_residual <= 1e-6 && sol.dual_residual <= 1e-6 &&
                        sol.gap <= 1e-6 * std::max(1.0, std::abs(sol.primal_objective));
    if (sol.status == SolveStatus::Optimal ||
        ((sol.status == SolveStatus::MaxIterations ||
          sol.status == SolveStatus::NumericalProblem) &&
         near_optimal && sol.x.size() > 0)) {
      out.u = sol.x.head(nu);
      out.usable = true;
    }
  } catch (const NumericalFailure&) {
    out.status = "numerical";
  }
  return out;
}

IterationRecord make_record(int iter, const Frame& fr, const PolygonSet& target,
                            double area_sum, const SchurOperator& schur, const JacobianMaps& jm,
                            const VectorXd& u, const std::string& status) {
  IterationRecord rec;
  rec.iter = iter;
  DeformedBoundary db(fr.source, u);
  PolygonSet deformed = PolygonSet::from_outer(db.ring());
  double sd = symdiff_area(deformed, target);
  rec.area_abs = sd / (fr.scale * fr.scale);
  rec.area_fraction = sd / area_sum;
  VectorXd forces = schur.S * u;
  for (int i = 0; i < schur.boundary_nodes; ++i)
    rec.force_norm += std::hypot(forces[2 * i], forces[2 * i + 1]);
  CdStats st = cd_stats(jm, u);
  rec.max_cd = st.max_cd;
  rec.mean_cd = st.mean_cd;
  rec.flipped = st.flipped;
  rec.solver_status = status;
  return rec;
}

Vec2 nearest_on_ring(const Polygon& ring, const Vec2& p) {
  double best = std::numeric_limits<double>::infinity();
  Vec2 q = ring[0];
  int n = ring.size();
  for (int i = 0; i < n; ++i) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[(i + 1) % n];
    Vec2 e = b - a;
    double len2 = e.squaredNorm();
    double t = len2 > 0.0 ? std::clamp((p - a).dot(e) / len2, 0.0, 1.0) : 0.0;
    Vec2 cand = a + t * e;
    double d2 = (p - cand).squaredNorm();
    if (d2 < best) {
      best = d2;
      q = cand;
    }
  }
  return q;
}

MesherOptions auto_mesh_options(const MatchConfig& cfg, const Polygon& source_norm) {
  MesherOptions mo = cfg.mesh;
  if (mo.max_triangle_area > 0.0) return mo;
  double area = signed_area(source_norm);
  double lmax = 0.0;
  int n = source_norm.size();
  for (int i = 0; i < n; ++i)
    lmax = std::max(lmax, (source_norm[(i + 1) % n] - source_norm[i]).norm());
  // boundary edges are never split, so a boundary edge of length L needs
  // room for a near-equilateral triangle (area ~0.43 L^2); asking for less
  // starves the angle bound next to the boundary
  mo.max_triangle_area = std::max(area / 230.0, 0.45 * lmax * lmax);
  return mo;
}

MatchResult run_loop(const Polygon& source, const Polygon& target, const MatchConfig& cfg,
                     bool nearest_point, const TriMesh* supplied = nullptr) {
  Frame fr = normalize_pair(source, target);
  if (supplied && fr.source_reversed)
    throw std::invalid_argument("supplied mesh boundary must wind counterclockwise");
  PolygonSet tset = PolygonSet::from_outer(fr.target);
  const double area_s = signed_area(fr.source);
  const double area_t = std::abs(signed_area(fr.target));
  const double area_sum = area_s + area_t;
  // Auto weight: strong enough that shrinking the symmetric difference to
  // below stop_fraction outweighs the elastic resistance on the bundled
  // shape suite, in units that make the choice scale-free.
  const double alpha = cfg.alpha > 0.0 ? cfg.alpha : 2500.0 / (area_sum * area_sum);
  const double fd = cfg.fd_step > 0.0 ? cfg.fd_step * fr.scale : 0.0;

  TriMesh mesh;
  if (supplied) {
    mesh = *supplied;
    for (Vec2& node : mesh.nodes) node = (node - fr.center) * fr.scale;
  } else {
    mesh = triangulate(fr.source, auto_mesh_options(cfg, fr.source));
  }
  NodeOrdering ord = order_nodes(mesh);
  StiffnessMatrix stiffness = assemble(mesh, ord, cfg.elastic);
  SchurOperator schur = schur_condense(stiffness);
  JacobianMaps jm = build_jacobian_maps(mesh, ord, schur);
  const int K = fr.K;
  const bool with_distortion = cfg.distortion_bound > 1.0;

  MatchResult res;
  VectorXd u = VectorXd::Zero(2 * K);
  double beta_lm = cfg.beta;
  std::string reason;

  auto force_sum = [&](const VectorXd& v) {
    VectorXd f = schur.S * v;
    double total = 0.0;
    for (int i = 0; i < K; ++i) total += std::hypot(f[2 * i], f[2 * i + 1]);
    return total;
  };
  auto true_area = [&](const VectorXd& v) {
    return area_at(DeformedBoundary(fr.source, v), tset);
  };
  res.iterations.push_back(make_record(0, fr, tset, area_sum, schur, jm, u, "initial"));
  if (res.iterations.back().area_fraction < cfg.stop_fraction) reason = "converged";

  for (int iter = 1; iter <= cfg.max_iterations && reason.empty(); ++iter) {
    DeformedBoundary db(fr.source, u);
    if (overlap_area(db, tset) <= 0.0) {
      reason = "no_overlap";
      break;
    }

    AffineExpr fidelity;
    const int nv = 2 * K + K + 2;
    double base_area = 0.0;
    if (!nearest_point) {
      SymdiffGradient grad = central_gradient(db, tset, fd);
      base_area = grad.base_area;
      fidelity.A.resize(1, nv);
      std::vector<Eigen::Triplet<double>> t;
      for (int j = 0; j < 2 * K; ++j)
        if (grad.g[j] != 0.0) t.emplace_back(0, j, grad.g[j]);
      fidelity.A.setFromTriplets(t.begin(), t.end());
      fidelity.b = VectorXd::Constant(1, grad.base_area - grad.g.dot(u));
    } else {
      fidelity.A.resize(2 * K, nv);
      std::vector<Eigen::Triplet<double>> t;
      fidelity.b = VectorXd::Zero(2 * K);
      Polygon ring = db.ring();
      for (int i = 0; i < K; ++i) {
        Vec2 q = nearest_on_ring(fr.target, ring[i]);
        t.emplace_back(2 * i, 2 * i, 1.0);
        t.emplace_back(2 * i + 1, 2 * i + 1, 1.0);
        fidelity.b[2 * i] = fr.source[i].x() - q.x();
        fidelity.b[2 * i + 1] = fr.source[i].y() - q.y();
      }
      fidelity.A.setFromTriplets(t.begin(), t.end());
    }

    std::string step_status;
    if (!nearest_point) {
      // The area term is linearized from finite differences, so the solved
      // point is trustworthy only near the linearization point. Treat the
      // localization weight as an adaptive trust-region parameter: accept a
      // step only if it lowers the true merit (forces plus true squared
      // area), otherwise re-solve with the weight raised.
      double m0 = force_sum(u) + alpha * base_area * base_area;
      bool accepted = false;
      bool solver_broke = false;
      for (int inner = 0; inner < 8; ++inner) {
        StepResult step = solve_step(schur, fidelity, u, cfg, alpha, beta_lm,
                                     with_distortion ? &jm : nullptr);
        if (!step.usable) {
          step_status = step.status;
          solver_broke = true;
          break;
        }
        double a_lin = (fidelity.A.row(0) * step.u).value() + fidelity.b[0];
        double a_true = true_area(step.u);
        double step_force = force_sum(step.u);
        double predicted = m0 - (step_force + alpha * a_lin * a_lin);
        double actual = m0 - (step_force + alpha * a_true * a_true);
        if (actual > 0.0) {
          u = step.u;
          step_status = step.status;
          accepted = true;
          if (inner == 0 && actual > 0.75 * predicted)
            beta_lm = std::max(cfg.beta, 0.5 * beta_lm);
          break;
        }
        beta_lm = std::min(1e10, 4.0 * beta_lm);
        if (predicted <= 1e-15) break;
      }
      if (!accepted) {
        reason = solver_broke ? "solver_failure" : "stalled";
        break;
      }
    } else {
      StepResult step = solve_step(schur, fidelity, u, cfg, alpha, cfg.beta, nullptr);
      if (!step.usable) {
        reason = "solver_failure";
        if (!res.iterations.empty()) res.iterations.back().solver_status = step.status;
        break;
      }
      u = step.u;
      step_status = step.status;
    }
    res.iterations.push_back(make_record(iter, fr, tset, area_sum, schur, jm, u, step_status));

    if (nearest_point) {
      double now = std::abs(signed_area(DeformedBoundary(fr.source, u).ring()));
      if (now < 0.1 * area_s) {
        reason = "collapsed";
        break;
      }
    }
    if (res.iterations.back().area_fraction < cfg.stop_fraction) {
      reason = "converged";
      break;
    }
  }
  if (reason.empty()) reason = "iteration_limit";

  res.stop_reason = reason;
  {
    DeformedBoundary db(fr.source, u);
    PolygonSet deformed = PolygonSet::from_outer(db.ring());
    double sd = symdiff_area(deformed, tset);
    res.final_area = sd / (fr.scale * fr.scale);
    res.final_fraction = sd / area_sum;
  }

  VectorXd forces = schur.S * u;
  res.displacement = VectorXd::Zero(2 * K);
  res.boundary_forces = VectorXd::Zero(2 * K);
  res.deformed = source;
  for (int i = 0; i < K; ++i) {
    int j = input_index(fr, i);
    Vec2 du(u[2 * i] / fr.scale, u[2 * i + 1] / fr.scale);
    res.displacement[2 * j] = du.x();
    res.displacement[2 * j + 1] = du.y();
    res.boundary_forces[2 * j] = forces[2 * i];
    res.boundary_forces[2 * j + 1] = forces[2 * i + 1];
    res.deformed[j] = source[j] + du;
  }
  const int n_int = mesh.node_count() - K;
  VectorXd ui = schur.interior_map * u;
  res.interior_displacement = VectorXd::Zero(2 * n_int);
  res.interior_node_ids.resize(n_int);
  for (int k = 0; k < n_int; ++k) {
    res.interior_node_ids[k] = ord.old_of_new[K + k];
    res.interior_displacement[2 * k] = ui[2 * k] / fr.scale;
    res.interior_displacement[2 * k + 1] = ui[2 * k + 1] / fr.scale;
  }
  res.mesh = mesh;
  for (Vec2& node : res.mesh.nodes) node = node / fr.scale + fr.center;
  return res;
}

}  // namespace

std::vector<Eigen::Matrix<double, 4, Eigen::Dynamic>> jacobian_coordinate_maps(
    const TriMesh& mesh, const NodeOrdering& ordering, const SchurOperator& schur) {
  return build_jacobian_maps(mesh, ordering, schur).maps;
}

double conformal_distortion(const Eigen::Matrix2d& j) {
  double a = 0.5 * (j(0, 0) + j(1, 1));
  double b = 0.5 * (j(1, 0) - j(0, 1));
  double c = 0.5 * (j(0, 0) - j(1, 1));
  double d = 0.5 * (j(0, 1) + j(1, 0));
  double sp = std::hypot(a, b);
  double sm = std::hypot(c, d);
  if (sp <= sm) return std::numeric_limits<double>::infinity();
  return (sp + sm) / (sp - sm);
}

MatchResult match(const Polygon& source, const Polygon& target, const MatchConfig& cfg) {
  return run_loop(source, target, cfg, false);
}

MatchResult match(const TriMesh& source_mesh, const Polygon& target, const MatchConfig& cfg) {
  if (source_mesh.boundary_count() < 3)
    throw std::invalid_argument("mesh has no usable boundary loop");
  Polygon source;
  source.vertices.reserve(source_mesh.boundary_count());
  for (int id : source_mesh.boundary_loop) source.vertices.push_back(source_mesh.nodes[id]);
  return run_loop(source, target, cfg, false, &source_mesh);
}

MatchResult nearest_point_match(const Polygon& source, const Polygon& target,
                                const MatchConfig& cfg) {
  return run_loop(source, target, cfg, true);
}

}  // namespace elastmatch
