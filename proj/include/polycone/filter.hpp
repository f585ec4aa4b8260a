#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "polycone/barrier.hpp"
#include "polycone/dynamics.hpp"
#include "polycone/geometry.hpp"

namespace polycone {

/// a * u >= b, i.e. L_g h u >= -L_f h - kappa(h).
struct LinearConstraint {
  Eigen::RowVectorXd a;
  double b = 0.0;
};

struct InputBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// min |u - reference|^2 subject to the constraints and optional box.
struct FilterProblem {
  Eigen::VectorXd reference;
  std::vector<LinearConstraint> constraints;
  std::optional<InputBox> bounds;
};

struct FilterResult {
  Eigen::VectorXd u_star;
  std::vector<double> psi;  // a_i * reference - b_i
  // Constraint shaped the answer: violated by the reference or binding at u_star.
  std::vector<bool> active;
  bool fallback_used = false;
  int iterations = 0;
};

/// Zero-gradient threshold for the switching law.
inline constexpr double kZeroGradient = 1e-10;

/// Closed-form switching law for one constraint and no bounds:
/// u* = pi when psi >= 0, otherwise u* = pi - a^T psi / (a a^T).
FilterResult solve_closed_form(const FilterProblem& problem);

/// Dual active-set (Goldfarb-Idnani) solver. With an identity Hessian it starts
/// from the unconstrained minimizer and adds the most violated constraint at each
/// step, so it needs no feasible starting point and detects infeasibility when a
/// violated row lies in the span of the active rows with no multiplier to release.
/// Throws Infeasible (message names the most violated constraint) or MaxIterations.
FilterResult solve_active_set(const FilterProblem& problem);

/// Minimizes the largest constraint violation (box kept hard), then the distance
/// to the reference among minimizers. Always returns with fallback_used = true.
FilterResult solve_least_violation(const FilterProblem& problem);

enum class BarrierKind { PolyC2BF, C3BF, None };

struct FilterConfig {
  BarrierKind kind = BarrierKind::PolyC2BF;
  ClassK class_k{1.0};
  double ego_width = 0.0;
  ConeOptions cone = kExactCone;
  // Account for the cone turning as the ego moves (p_rel and k_hat rates).
  // Off gives the frozen-cone constraint.
  bool cone_rates = true;
  double culling_radius = 50.0;
  std::optional<InputBox> bounds;
};

enum class RowStatus { Kept, Dropped, Culled };

struct ObstacleRow {
  RowStatus status = RowStatus::Culled;
  double h = std::numeric_limits<double>::quiet_NaN();
  double psi = std::numeric_limits<double>::quiet_NaN();
  bool active = false;
  double clearance = std::numeric_limits<double>::quiet_NaN();  // body center to obstacle, minus w/2
};

struct FilterStep {
  Eigen::VectorXd u_star;
  std::vector<ObstacleRow> rows;  // one per obstacle, in input order
  bool fallback_used = false;
  bool closed_form = false;
};

/// One safety-filter evaluation. Obstacles must already be positioned at the
/// current time. Geometry errors (ego inside an obstacle), the baseline's
/// InsideVirtualObstacle and ZeroGradient propagate as exceptions.
template <class Model>
FilterStep filter_step(const typename Model::State& state, const typename Model::Params& params,
                       std::span<const PolygonObstacle> obstacles,
                       const typename Model::InputVector& reference, const FilterConfig& config);

}  // namespace polycone
