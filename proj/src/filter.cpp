#include "polycone/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "polycone/error.hpp"

namespace polycone {

namespace {

constexpr double kFeasTol = 1e-11;
constexpr double kBindTol = 1e-9;

void validate(const FilterProblem& problem) {
  const auto m = problem.reference.size();
  if (m == 0 || !problem.reference.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "reference input must be non-empty and finite");
  }
  for (const auto& c : problem.constraints) {
    if (c.a.size() != m || !c.a.allFinite() || !std::isfinite(c.b)) {
      throw Error(ErrorCode::InvalidArgument, "constraint row has wrong size or is non-finite");
    }
  }
  if (problem.bounds) {
    const auto& box = *problem.bounds;
    if (box.lower.size() != m || box.upper.size() != m || (box.lower.array() > box.upper.array()).any()) {
      throw Error(ErrorCode::InvalidArgument, "input bounds malformed");
    }
  }
}

// Normalized rows a_j u >= b_j (|a_j| = 1). Box rows come after constraint rows.
struct RowSet {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  std::vector<int> source;  // index into problem.constraints, or -1 for box rows
};

RowSet assemble(const FilterProblem& problem, double relax) {
  const auto m = problem.reference.size();
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  std::vector<int> source;
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    const auto& c = problem.constraints[i];
    const double n = c.a.norm();
    if (n == 0.0) {
      if (c.b - relax > 0.0) {
        throw Error(ErrorCode::Infeasible, "constraint " + std::to_string(i) + " has zero gradient");
      }
      continue;
    }
    rows.push_back(c.a / n);
    rhs.push_back(c.b / n - relax);
    source.push_back(static_cast<int>(i));
  }
  if (problem.bounds) {
    for (Eigen::Index j = 0; j < m; ++j) {
      Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(m);
      e(j) = 1.0;
      if (std::isfinite(problem.bounds->lower(j))) {
        rows.push_back(e);
        rhs.push_back(problem.bounds->lower(j));
        source.push_back(-1);
      }
      if (std::isfinite(problem.bounds->upper(j))) {
        rows.push_back(-e);
        rhs.push_back(-problem.bounds->upper(j));
        source.push_back(-1);
      }
    }
  }
  RowSet out;
  out.a.resize(static_cast<Eigen::Index>(rows.size()), m);
  out.b.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.a.row(static_cast<Eigen::Index>(i)) = rows[i];
    out.b(static_cast<Eigen::Index>(i)) = rhs[i];
  }
  out.source = std::move(source);
  return out;
}

struct DualSolution {
  Eigen::VectorXd x;
  int iterations = 0;
};

DualSolution goldfarb_idnani(const Eigen::VectorXd& reference, const RowSet& rows) {
  const Eigen::Index m = reference.size();
  const Eigen::Index nrows = rows.a.rows();
  const int max_iter = std::max<int>(50, 50 * static_cast<int>(m));

  Eigen::VectorXd x = reference;
  std::vector<Eigen::Index> active;
  std::vector<double> lambda;
  std::vector<char> in_active(static_cast<std::size_t>(nrows), 0);
  int iterations = 0;

  auto slack = [&](Eigen::Index j) { return rows.a.row(j).dot(x) - rows.b(j); };

  for (;;) {
    Eigen::Index p = -1;
    double worst = -kFeasTol;
    for (Eigen::Index j = 0; j < nrows; ++j) {
      if (in_active[static_cast<std::size_t>(j)]) continue;
      const double s = slack(j);
      if (s < worst) {
        worst = s;
        p = j;
      }
    }
    if (p < 0) break;

    const Eigen::VectorXd np = rows.a.row(p).transpose();
    double lambda_p = 0.0;
    for (;;) {
      if (++iterations > max_iter) throw Error(ErrorCode::MaxIterations, "active-set did not converge");

      const auto k = static_cast<Eigen::Index>(active.size());
      Eigen::VectorXd r(k);
      Eigen::VectorXd z = np;
      if (k > 0) {
        Eigen::MatrixXd n(k, m);
        for (Eigen::Index i = 0; i < k; ++i) n.row(i) = rows.a.row(active[static_cast<std::size_t>(i)]);
        r = (n * n.transpose()).ldlt().solve(n * np);
        z = np - n.transpose() * r;
      }

      // Largest dual step before an active multiplier hits zero.
      double t_dual = std::numeric_limits<double>::infinity();
      Eigen::Index drop = -1;
      for (Eigen::Index i = 0; i < k; ++i) {
        if (r(i) > 1e-14) {
          const double t = lambda[static_cast<std::size_t>(i)] / r(i);
          if (t < t_dual) {
            t_dual = t;
            drop = i;
          }
        }
      }

      const bool in_span = z.norm() <= 1e-12;
      if (in_span && drop < 0) {
        int culprit = rows.source[static_cast<std::size_t>(p)];
        for (std::size_t i = 0; culprit < 0 && i < active.size(); ++i) {
          culprit = rows.source[static_cast<std::size_t>(active[i])];
        }
        throw Error(ErrorCode::Infeasible,
                    culprit < 0 ? std::string("input bounds are inconsistent")
                                : "constraint set is empty; conflicting constraint " + std::to_string(culprit));
      }
      const double t_primal = in_span ? std::numeric_limits<double>::infinity()
                                      : -slack(p) / z.dot(np);
      const double t = std::min(t_dual, t_primal);

      if (!in_span) x += t * z;
      for (Eigen::Index i = 0; i < k; ++i) lambda[static_cast<std::size_t>(i)] -= t * r(i);
      lambda_p += t;

      if (t_primal <= t_dual) {
        active.push_back(p);
        lambda.push_back(lambda_p);
        in_active[static_cast<std::size_t>(p)] = 1;
        break;
      }
      in_active[static_cast<std::size_t>(active[static_cast<std::size_t>(drop)])] = 0;
      active.erase(active.begin() + drop);
      lambda.erase(lambda.begin() + drop);
    }
  }
  return {x, iterations};
}

FilterResult finish(const FilterProblem& problem, Eigen::VectorXd u, bool fallback, int iterations) {
  if (problem.bounds) u = u.cwiseMax(problem.bounds->lower).cwiseMin(problem.bounds->upper);
  FilterResult r;
  r.u_star = std::move(u);
  r.fallback_used = fallback;
  r.iterations = iterations;
  for (const auto& c : problem.constraints) {
    const double psi = c.a.dot(problem.reference) - c.b;
    const double margin = c.a.dot(r.u_star) - c.b;
    r.psi.push_back(psi);
    r.active.push_back(psi < 0.0 || std::abs(margin) <= kBindTol * std::max(1.0, c.a.norm()));
  }
  return r;
}

}  // namespace

FilterResult solve_closed_form(const FilterProblem& problem) {
  validate(problem);
  if (problem.constraints.size() != 1 || problem.bounds) {
    throw Error(ErrorCode::InvalidArgument, "closed form needs exactly one constraint and no bounds");
  }
  const auto& c = problem.constraints.front();
  const double psi = c.a.dot(problem.reference) - c.b;
  Eigen::VectorXd u = problem.reference;
  if (psi < 0.0) {
    const double gg = c.a.squaredNorm();
    if (std::sqrt(gg) < kZeroGradient) {
      throw Error(ErrorCode::ZeroGradient, "L_g h vanishes while the constraint is violated");
    }
    u -= c.a.transpose() * (psi / gg);
  }
  FilterResult r;
  r.u_star = std::move(u);
  r.psi = {psi};
  r.active = {psi < 0.0};
  return r;
}

FilterResult solve_active_set(const FilterProblem& problem) {
  validate(problem);
  auto sol = goldfarb_idnani(problem.reference, assemble(problem, 0.0));
  return finish(problem, std::move(sol.x), false, sol.iterations);
}

FilterResult solve_least_violation(const FilterProblem& problem) {
  validate(problem);
  // Any box-feasible point bounds the optimal violation from above.
  Eigen::VectorXd start = problem.reference;
  if (problem.bounds) start = start.cwiseMax(problem.bounds->lower).cwiseMin(problem.bounds->upper);
  double hi = 0.0;
  for (const auto& c : problem.constraints) {
    const double n = c.a.norm();
    const double viol = n > 0.0 ? (c.b - c.a.dot(start)) / n : c.b;
    hi = std::max(hi, viol);
  }
  double lo = 0.0;
  auto feasible = [&](double relax) {
    try {
      goldfarb_idnani(problem.reference, assemble(problem, relax));
      return true;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Infeasible) return false;
      throw;
    }
  };
  if (feasible(0.0)) {
    hi = 0.0;
  } else {
    for (int i = 0; i < 200 && hi - lo > 1e-12 * (1.0 + hi); ++i) {
      const double mid = 0.5 * (lo + hi);
      (feasible(mid) ? hi : lo) = mid;
    }
  }
  auto sol = goldfarb_idnani(problem.reference, assemble(problem, hi));
  return finish(problem, std::move(sol.x), true, sol.iterations);
}

// ---------------------------------------------------------------------------

namespace {

template <class Model>
constexpr bool kSpatial = std::is_same_v<Model, Quadrotor>;

}  // namespace

template <class Model>
FilterStep filter_step(const typename Model::State& state, const typename Model::Params& params,
                       std::span<const PolygonObstacle> obstacles,
                       const typename Model::InputVector& reference, const FilterConfig& config) {
  constexpr int M = Model::kInputDim;
  const auto body = body_kinematics(state, params);
  const double half_w = 0.5 * config.ego_width;

  FilterStep out;
  out.rows.resize(obstacles.size());
  FilterProblem problem;
  problem.reference = reference;
  problem.bounds = config.bounds;
  std::vector<std::size_t> owner;

  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const auto& obs = obstacles[i];
    auto& row = out.rows[i];
    const double dist = kSpatial<Model> ? obs.signed_distance(body.position)
                                        : obs.signed_distance(Vec2(body.position.template head<2>()));
    row.clearance = dist - half_w;
    if (dist > config.culling_radius) {
      row.status = RowStatus::Culled;
      continue;
    }

    std::optional<BarrierEval<M>> eval;
    if (config.kind == BarrierKind::C3BF) {
      const PlaneBasis basis = horizontal_basis();
      const auto rel = relative_kinematics(obs.center(), obs.center_velocity(), basis, body);
      const double radius = obs.circumradius() + half_w;
      row.h = c3bf_h(rel.p_rel, rel.v_rel, radius);
      if (rel.v_rel.norm() > kVanishingSpeed) {
        eval = collision_cone_barrier(rel, radius, config.class_k, reference);
      }
    } else {
      PlaneCone cone;
      if constexpr (kSpatial<Model>) {
        cone = project_3d(obs, body.position, config.ego_width, body.velocity, config.cone).selected();
      } else {
        const PlaneBasis basis = horizontal_basis();
        cone = PlaneCone{build_cone_frame(obs, EgoDisc{body.position.template head<2>(), config.ego_width},
                                          body.velocity.template head<2>(), config.cone),
                         basis};
      }
      row.h = polyc2bf_h(cone.frame);
      if (cone.frame.v_rel.norm() > kVanishingSpeed) {
        const auto rel = relative_kinematics(cone.frame, cone.basis, body);
        std::optional<ConeRates> rates;
        if (config.cone_rates) rates = ConeRates{cone.frame.p_rel_rate, cone.frame.k_hat_rate};
        eval = poly_cone_barrier(rel, cone.frame.k_hat(), config.class_k, reference, rates);
      }
    }

    if (!eval) {
      row.status = RowStatus::Dropped;
      continue;
    }
    row.status = RowStatus::Kept;
    row.psi = eval->psi_free;
    if (config.kind != BarrierKind::None && eval->psi_free < 0.0 &&
        eval->lgh.norm() < kZeroGradient) {
      throw Error(ErrorCode::ZeroGradient,
                  "L_g h vanishes for obstacle " + std::to_string(i) + " while psi < 0");
    }
    problem.constraints.push_back(
        LinearConstraint{Eigen::RowVectorXd(eval->lgh), -eval->lfh - config.class_k(eval->h)});
    owner.push_back(i);
  }

  if (config.kind == BarrierKind::None) {
    out.u_star = reference;
    return out;
  }

  FilterResult result;
  if (problem.constraints.empty() && !problem.bounds) {
    out.u_star = reference;
    return out;
  }
  if (problem.constraints.size() == 1 && !problem.bounds) {
    result = solve_closed_form(problem);
    out.closed_form = true;
  } else {
    try {
      result = solve_active_set(problem);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Infeasible) throw;
      result = solve_least_violation(problem);
    }
  }
  out.u_star = result.u_star;
  out.fallback_used = result.fallback_used;
  for (std::size_t j = 0; j < owner.size(); ++j) out.rows[owner[j]].active = result.active[j];
  return out;
}

template FilterStep filter_step<Unicycle>(const Unicycle::State&, const Unicycle::Params&,
                                          std::span<const PolygonObstacle>,
                                          const Unicycle::InputVector&, const FilterConfig&);
template FilterStep filter_step<Quadrotor>(const Quadrotor::State&, const Quadrotor::Params&,
                                           std::span<const PolygonObstacle>,
                                           const Quadrotor::InputVector&, const FilterConfig&);
template FilterStep filter_step<PointMass>(const PointMass::State&, const PointMass::Params&,
                                           std::span<const PolygonObstacle>,
                                           const PointMass::InputVector&, const FilterConfig&);

}  // namespace polycone
