#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "polycone/barrier.hpp"
#include "polycone/dynamics.hpp"
#include "polycone/filter.hpp"
#include "polycone/geometry.hpp"

namespace oracle {

using polycone::Vec2;
using polycone::Vec3;

// --- random inputs -------------------------------------------------------------

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random convex polygon: sorted angles on a jittered ellipse, hull-cleaned.
inline std::vector<Vec2> random_convex(std::mt19937_64& rng, Vec2 center = Vec2::Zero(),
                                       int min_n = 3, int max_n = 9) {
  for (;;) {
    const int n = std::uniform_int_distribution<int>(min_n, max_n)(rng);
    const double rx = uniform(rng, 0.3, 2.5), ry = uniform(rng, 0.3, 2.5);
    const double rot = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    std::vector<double> ang(n);
    for (auto& a : ang) a = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    std::sort(ang.begin(), ang.end());
    std::vector<Vec2> pts;
    for (double a : ang) {
      const Vec2 e(rx * std::cos(a), ry * std::sin(a));
      pts.push_back(center + Eigen::Rotation2Dd(rot) * e);
    }
    auto hull = polycone::convex_hull(pts);
    if (hull.size() >= 3) return hull;
  }
}

/// Random point at least `margin` outside the polygon.
inline Vec2 random_outside(std::mt19937_64& rng, const polycone::ConvexPolygon& poly, double margin,
                           double radius = 8.0) {
  for (;;) {
    const Vec2 p(uniform(rng, -radius, radius), uniform(rng, -radius, radius));
    if (poly.signed_distance(p) > margin) return p;
  }
}

// --- geometry ------------------------------------------------------------------

/// Signed angle from a to b in (-pi, pi].
inline double angle_from(const Vec2& a, const Vec2& b) {
  return std::atan2(polycone::cross2(a, b), a.dot(b));
}

/// O(n^2) tangent pair: the vertex pair whose sector (< pi) contains every other
/// vertex, with the one closer to the ego first.
inline std::pair<std::size_t, std::size_t> tangent_pair(const std::vector<Vec2>& poly, const Vec2& ego) {
  const std::size_t n = poly.size();
  std::optional<std::pair<std::size_t, std::size_t>> best;
  double best_spread = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const Vec2 a = poly[i] - ego, b = poly[j] - ego;
      const double spread = angle_from(a, b);  // counter-clockwise from i to j
      if (spread <= 0.0) continue;
      bool covers = true;
      for (std::size_t k = 0; k < n && covers; ++k) {
        const double t = angle_from(a, poly[k] - ego);
        covers = t >= -1e-12 && t <= spread + 1e-12;
      }
      if (covers && spread > best_spread) {
        best_spread = spread;
        best = {i, j};
      }
    }
  }
  auto [i, j] = *best;
  if ((poly[j] - ego).norm() < (poly[i] - ego).norm()) std::swap(i, j);
  return {i, j};
}

/// Distance to a convex polygon by dense sampling of its boundary, refined by a
/// ternary search around the best sample of each edge. Negative inside.
inline double sampled_distance(const std::vector<Vec2>& poly, const Vec2& p, int samples_per_edge = 2000) {
  double best = std::numeric_limits<double>::infinity();
  bool inside = true;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    if (polycone::cross2(b - a, p - a) < 0.0) inside = false;
    auto dist = [&](double t) { return (a + t * (b - a) - p).norm(); };
    int best_s = 0;
    for (int s = 1; s <= samples_per_edge; ++s) {
      if (dist(static_cast<double>(s) / samples_per_edge) < dist(static_cast<double>(best_s) / samples_per_edge)) {
        best_s = s;
      }
    }
    double lo = std::max(0.0, (best_s - 1.0) / samples_per_edge);
    double hi = std::min(1.0, (best_s + 1.0) / samples_per_edge);
    for (int it = 0; it < 200; ++it) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (dist(m1) < dist(m2)) {
        hi = m2;
      } else {
        lo = m1;
      }
    }
    best = std::min({best, dist(lo), dist(0.0), dist(1.0)});
  }
  return inside ? -best : best;
}

// --- QP ------------------------------------------------------------------------

/// Exact projection of the reference onto {a_i u >= b_i} and the box, by
/// enumerating every subset of at most dim(u) rows held at equality. Returns
/// nullopt when no candidate is feasible.
inline std::optional<Eigen::VectorXd> brute_force_projection(const polycone::FilterProblem& p,
                                                             double feas_tol = 1e-9) {
  const auto n = p.reference.size();
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (const auto& c : p.constraints) {
    rows.push_back(c.a);
    rhs.push_back(c.b);
  }
  if (p.bounds) {
    for (Eigen::Index j = 0; j < n; ++j) {
      Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(n);
      e(j) = 1.0;
      rows.push_back(e);
      rhs.push_back(p.bounds->lower(j));
      rows.push_back(-e);
      rhs.push_back(-p.bounds->upper(j));
    }
  }
  const std::size_t r = rows.size();
  auto feasible = [&](const Eigen::VectorXd& u) {
    for (std::size_t i = 0; i < r; ++i) {
      if (rows[i].dot(u) - rhs[i] < -feas_tol * (1.0 + std::abs(rhs[i]))) return false;
    }
    return true;
  };

  std::optional<Eigen::VectorXd> best;
  double best_d = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> subset;
  auto consider = [&] {
    Eigen::VectorXd u = p.reference;
    if (!subset.empty()) {
      Eigen::MatrixXd a(subset.size(), n);
      Eigen::VectorXd b(subset.size());
      for (std::size_t k = 0; k < subset.size(); ++k) {
        a.row(k) = rows[subset[k]];
        b(k) = rhs[subset[k]];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a * a.transpose());
      if (!lu.isInvertible()) return;
      u += a.transpose() * lu.solve(b - a * p.reference);
    }
    if (!feasible(u)) return;
    const double d = (u - p.reference).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = u;
    }
  };
  auto recurse = [&](auto&& self, std::size_t start) -> void {
    consider();
    if (subset.size() == static_cast<std::size_t>(n)) return;
    for (std::size_t i = start; i < r; ++i) {
      subset.push_back(i);
      self(self, i + 1);
      subset.pop_back();
    }
  };
  recurse(recurse, 0);
  return best;
}

/// Random feasible problem: rows are satisfied by a hidden point inside the box.
inline polycone::FilterProblem random_feasible_problem(std::mt19937_64& rng, int m, int k, bool with_bounds) {
  polycone::FilterProblem p;
  p.reference = Eigen::VectorXd::NullaryExpr(m, [&] { return uniform(rng, -3.0, 3.0); });
  const Eigen::VectorXd inner = Eigen::VectorXd::NullaryExpr(m, [&] { return uniform(rng, -1.0, 1.0); });
  for (int i = 0; i < k; ++i) {
    polycone::LinearConstraint c;
    c.a = Eigen::RowVectorXd::NullaryExpr(m, [&] { return uniform(rng, -2.0, 2.0); });
    c.b = c.a.dot(inner) - uniform(rng, 0.0, 1.5);
    p.constraints.push_back(c);
  }
  if (with_bounds) {
    polycone::InputBox box;
    box.lower = inner.array() - Eigen::ArrayXd::NullaryExpr(m, [&] { return uniform(rng, 0.1, 2.0); });
    box.upper = inner.array() + Eigen::ArrayXd::NullaryExpr(m, [&] { return uniform(rng, 0.1, 2.0); });
    p.bounds = box;
  }
  return p;
}

// --- barrier -------------------------------------------------------------------

/// h with the cone frozen: fixed k_hat and a target point that translates with the
/// obstacle. p and v are the relative position and velocity in plane coordinates.
inline double frozen_h(const Vec2& p, const Vec2& v, const Vec2& k_hat) {
  return p.dot(v) + v.norm() * p.dot(k_hat);
}

/// Body center position and velocity computed from the state alone.
inline std::pair<Vec3, Vec3> body_state(const polycone::UnicycleState& s, const polycone::UnicycleParams& p) {
  const double c = std::cos(s.theta), sn = std::sin(s.theta);
  return {Vec3(s.x + p.l * c, s.y + p.l * sn, 0.0),
          Vec3(s.v * c - p.l * sn * s.omega, s.v * sn + p.l * c * s.omega, 0.0)};
}

inline std::pair<Vec3, Vec3> body_state(const polycone::PointMassState& s, const polycone::PointMassParams&) {
  return {Vec3(s.position.x(), s.position.y(), 0.0), Vec3(s.velocity.x(), s.velocity.y(), 0.0)};
}

inline std::pair<Vec3, Vec3> body_state(const polycone::QuadrotorState& s, const polycone::QuadrotorParams& p) {
  const Eigen::Matrix3d r = polycone::rotation_matrix(s.attitude);
  const Vec3 offset = r * Vec3(0.0, 0.0, p.l);
  // d/dt (R e3 l) = R [omega]x e3 l with body rates omega
  return {s.position + offset, s.velocity + r * s.body_rates.cross(Vec3(0.0, 0.0, p.l))};
}

/// Central difference of the frozen-cone h along x' = f(x) + g(x) u.
template <class Model>
double frozen_hdot_fd(const typename Model::State& s, const typename Model::Params& params,
                      const typename Model::InputVector& u, const polycone::PlaneBasis& basis,
                      const Vec2& target, const Vec2& target_velocity, const Vec2& k_hat, double delta) {
  using SV = typename Model::StateVector;
  const SV x0 = Model::to_vector(s);
  const SV xdot = polycone::dynamics<Model>(s, u, params);
  auto h_at = [&](double t) {
    const auto st = Model::from_vector(x0 + t * xdot);
    const auto [pos, vel] = body_state(st, params);
    const Vec2 p = target + t * target_velocity - basis.transpose() * pos;
    const Vec2 v = target_velocity - basis.transpose() * vel;
    return frozen_h(p, v, k_hat);
  };
  return (h_at(delta) - h_at(-delta)) / (2.0 * delta);
}

}  // namespace oracle
