#pragma once

#include <optional>
#include <utility>

#include <Eigen/Dense>

#include "polycone/dynamics.hpp"
#include "polycone/error.hpp"
#include "polycone/geometry.hpp"

namespace polycone {

/// kappa(h) = gamma * h
struct ClassK {
  double gamma = 1.0;

  explicit ClassK(double g = 1.0) : gamma(g) {
    if (!(g > 0.0) || !std::isfinite(g)) throw Error(ErrorCode::InvalidArgument, "gamma must be > 0");
  }
  double operator()(double h) const { return gamma * h; }
};

/// Below this relative speed the cone gradient is undefined and the row is dropped.
inline constexpr double kVanishingSpeed = 1e-6;

/// Barrier value and Lie derivatives for one constraint row.
template <int M>
struct BarrierEval {
  double h = 0.0;
  double lfh = 0.0;
  Eigen::Matrix<double, 1, M> lgh = Eigen::Matrix<double, 1, M>::Zero();
  double psi_free = 0.0;  // hdot(x, reference) + kappa(h)
};

/// Ego body center motion in world coordinates, split into drift and input parts
/// of its acceleration. Planar models leave z at zero.
template <int M>
struct BodyKinematics {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 accel_drift = Vec3::Zero();
  Eigen::Matrix<double, 3, M> accel_input = Eigen::Matrix<double, 3, M>::Zero();
};

BodyKinematics<2> body_kinematics(const UnicycleState& s, const UnicycleParams& p);
BodyKinematics<4> body_kinematics(const QuadrotorState& s, const QuadrotorParams& p);
BodyKinematics<2> body_kinematics(const PointMassState& s, const PointMassParams& p);

/// Relative position/velocity in plane coordinates with
/// d(v_rel)/dt = accel_drift + accel_input * u (obstacles do not accelerate).
template <int M>
struct RelativeKinematics {
  Vec2 p_rel = Vec2::Zero();
  Vec2 v_rel = Vec2::Zero();
  Vec2 accel_drift = Vec2::Zero();
  Eigen::Matrix<double, 2, M> accel_input = Eigen::Matrix<double, 2, M>::Zero();
};

template <int M>
RelativeKinematics<M> relative_kinematics(const ConeFrame& frame, const PlaneBasis& basis,
                                          const BodyKinematics<M>& body) {
  RelativeKinematics<M> r;
  r.p_rel = frame.p_rel;
  r.v_rel = frame.v_rel;
  r.accel_drift = -basis.transpose() * body.accel_drift;
  r.accel_input = -basis.transpose() * body.accel_input;
  return r;
}

/// Relative kinematics toward a point (the circular baseline's obstacle center).
template <int M>
RelativeKinematics<M> relative_kinematics(const Vec3& point, const Vec3& point_velocity,
                                          const PlaneBasis& basis, const BodyKinematics<M>& body) {
  RelativeKinematics<M> r;
  r.p_rel = basis.transpose() * (point - body.position);
  r.v_rel = basis.transpose() * (point_velocity - body.velocity);
  r.accel_drift = -basis.transpose() * body.accel_drift;
  r.accel_input = -basis.transpose() * body.accel_input;
  return r;
}

/// h = <p_rel, v_rel> + |p_rel| |v_rel| cos(phi)
double polyc2bf_h(const ConeFrame& frame);
double polyc2bf_h(const Vec2& p_rel, const Vec2& v_rel, const Vec2& k);

/// Circular collision-cone baseline with cos(phi) = sqrt(|p|^2 - r^2) / |p|.
/// Throws InsideVirtualObstacle when |p_rel| <= r.
double c3bf_h(const Vec2& p_rel, const Vec2& v_rel, double radius);

/// Rates of the cone geometry along the current motion. Without them the cone is
/// frozen: d(p_rel)/dt = v_rel and d(k_hat)/dt = 0.
struct ConeRates {
  Vec2 p_rel = Vec2::Zero();
  Vec2 k_hat = Vec2::Zero();
};

/// Polygonal cone constraint, by default with k_hat frozen at the evaluation
/// instant. Throws VanishingRelativeVelocity when |v_rel| <= kVanishingSpeed.
template <int M>
BarrierEval<M> poly_cone_barrier(const RelativeKinematics<M>& rel, const Vec2& k_hat,
                                 const ClassK& kappa,
                                 const Eigen::Matrix<double, M, 1>& reference,
                                 const std::optional<ConeRates>& rates = std::nullopt) {
  const double speed = rel.v_rel.norm();
  if (!(speed > kVanishingSpeed)) {
    throw Error(ErrorCode::VanishingRelativeVelocity, "relative speed below threshold");
  }
  const double pk = rel.p_rel.dot(k_hat);
  const Vec2 q = rel.p_rel + rel.v_rel * (pk / speed);
  const Vec2 p_dot = rates ? rates->p_rel : rel.v_rel;
  BarrierEval<M> e;
  e.h = rel.p_rel.dot(rel.v_rel) + speed * pk;
  e.lfh = p_dot.dot(rel.v_rel) + speed * p_dot.dot(k_hat) + q.dot(rel.accel_drift);
  if (rates) e.lfh += speed * rel.p_rel.dot(rates->k_hat);
  e.lgh = q.transpose() * rel.accel_input;
  e.psi_free = e.lfh + e.lgh.dot(reference) + kappa(e.h);
  return e;
}

template <int M>
BarrierEval<M> collision_cone_barrier(const RelativeKinematics<M>& rel, double radius,
                                      const ClassK& kappa,
                                      const Eigen::Matrix<double, M, 1>& reference) {
  const double h = c3bf_h(rel.p_rel, rel.v_rel, radius);
  const double speed = rel.v_rel.norm();
  if (!(speed > kVanishingSpeed)) {
    throw Error(ErrorCode::VanishingRelativeVelocity, "relative speed below threshold");
  }
  const double s = std::sqrt(rel.p_rel.squaredNorm() - radius * radius);
  const double pv = rel.p_rel.dot(rel.v_rel);
  const Vec2 q = rel.p_rel + rel.v_rel * (s / speed);
  BarrierEval<M> e;
  e.h = h;
  e.lfh = speed * speed + speed * pv / s + q.dot(rel.accel_drift);
  e.lgh = q.transpose() * rel.accel_input;
  e.psi_free = e.lfh + e.lgh.dot(reference) + kappa(e.h);
  return e;
}

// --- model-specific entry points ------------------------------------------

/// Cone toward a planar obstacle as seen from the unicycle body center.
ConeFrame unicycle_cone(const UnicycleState& s, const UnicycleParams& p,
                        const PolygonObstacle& obstacle, double ego_width,
                        ConeOptions options = {});
std::pair<Vec2, Vec2> unicycle_rel_kinematics(const UnicycleState& s, const UnicycleParams& p,
                                              const PolygonObstacle& obstacle,
                                              double ego_width = 0.0);
Eigen::RowVector2d unicycle_lgh(const UnicycleState& s, const UnicycleParams& p,
                                const ConeFrame& frame);

SpatialCone quadrotor_cone(const QuadrotorState& s, const QuadrotorParams& p,
                           const PolygonObstacle& obstacle, double ego_width,
                        ConeOptions options = {});
/// Projected p_rel and v_rel in world coordinates for the given plane.
std::pair<Vec3, Vec3> quadrotor_rel_kinematics(const QuadrotorState& s, const QuadrotorParams& p,
                                               const PolygonObstacle& obstacle,
                                               ProjectionPlane plane, double ego_width = 0.0);
Eigen::RowVector4d quadrotor_lgh(const QuadrotorState& s, const QuadrotorParams& p,
                                 const PlaneCone& cone);

ConeFrame pointmass_cone(const PointMassState& s, const PolygonObstacle& obstacle,
                         double ego_width, ConeOptions options = {});
BarrierEval<2> pointmass_constraint(const PointMassState& s, const ConeFrame& frame,
                                    const ClassK& kappa = ClassK{},
                                    const Eigen::Vector2d& reference = Eigen::Vector2d::Zero());

/// Full time derivative of h including the rotation of k_hat, which the
/// frozen-cone Lie derivatives leave out.
double full_hdot(const ConeFrame& frame, const Vec2& v_rel_dot, const Vec2& k_hat_dot);

}  // namespace polycone
