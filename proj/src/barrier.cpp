#include "polycone/barrier.hpp"

#include <cmath>

namespace polycone {

BodyKinematics<2> body_kinematics(const UnicycleState& s, const UnicycleParams& p) {
  const double c = std::cos(s.theta), sn = std::sin(s.theta);
  const double l = p.l;
  BodyKinematics<2> b;
  b.position = Vec3(s.x + l * c, s.y + l * sn, 0.0);
  b.velocity = Vec3(s.v * c - l * sn * s.omega, s.v * sn + l * c * s.omega, 0.0);
  b.accel_drift = Vec3(-s.v * sn * s.omega - l * c * s.omega * s.omega,
                       s.v * c * s.omega - l * sn * s.omega * s.omega, 0.0);
  b.accel_input << c, -l * sn,
                   sn, l * c,
                   0.0, 0.0;
  return b;
}

BodyKinematics<4> body_kinematics(const QuadrotorState& s, const QuadrotorParams& p) {
  const Eigen::Matrix3d r = rotation_matrix(s.attitude);
  const Vec3 e3 = Vec3::UnitZ();
  const Vec3& w = s.body_rates;
  const Vec3 wdot_drift = -(w.cross(p.inertia.cwiseProduct(w))).cwiseQuotient(p.inertia);
  const Eigen::Matrix<double, 3, 4> wdot_input =
      p.inertia.cwiseInverse().asDiagonal() * (p.arm_length * propeller_mixing(p.torque_constant));

  BodyKinematics<4> b;
  b.position = s.position + r * e3 * p.l;
  b.velocity = s.velocity + p.l * r * w.cross(e3);
  b.accel_drift = Vec3(0.0, 0.0, -p.gravity) + p.l * r * (w.cross(w.cross(e3)) + wdot_drift.cross(e3));
  for (int i = 0; i < 4; ++i) {
    const Vec3 wdot = wdot_input.col(i);
    b.accel_input.col(i) = r * (e3 / p.mass + p.l * wdot.cross(e3));
  }
  return b;
}

BodyKinematics<2> body_kinematics(const PointMassState& s, const PointMassParams&) {
  BodyKinematics<2> b;
  b.position << s.position, 0.0;
  b.velocity << s.velocity, 0.0;
  b.accel_input.topRows<2>().setIdentity();
  return b;
}

double polyc2bf_h(const Vec2& p_rel, const Vec2& v_rel, const Vec2& k) {
  const double cos_phi = p_rel.dot(k) / (p_rel.norm() * k.norm());
  return p_rel.dot(v_rel) + p_rel.norm() * v_rel.norm() * cos_phi;
}

double polyc2bf_h(const ConeFrame& frame) {
  return frame.p_rel.dot(frame.v_rel) + frame.p_rel.norm() * frame.v_rel.norm() * frame.cos_phi;
}

double c3bf_h(const Vec2& p_rel, const Vec2& v_rel, double radius) {
  const double dist = p_rel.norm();
  if (!(dist > radius)) {
    throw Error(ErrorCode::InsideVirtualObstacle, "ego lies inside the circumscribed circle");
  }
  const double cos_phi = std::sqrt(dist * dist - radius * radius) / dist;
  return p_rel.dot(v_rel) + dist * v_rel.norm() * cos_phi;
}

ConeFrame unicycle_cone(const UnicycleState& s, const UnicycleParams& p,
                        const PolygonObstacle& obstacle, double ego_width, ConeOptions options) {
  const auto body = body_kinematics(s, p);
  return build_cone_frame(obstacle, EgoDisc{body.position.head<2>(), ego_width},
                          body.velocity.head<2>(), options);
}

std::pair<Vec2, Vec2> unicycle_rel_kinematics(const UnicycleState& s, const UnicycleParams& p,
                                              const PolygonObstacle& obstacle, double ego_width) {
  const auto f = unicycle_cone(s, p, obstacle, ego_width);
  return {f.p_rel, f.v_rel};
}

Eigen::RowVector2d unicycle_lgh(const UnicycleState& s, const UnicycleParams& p,
                                const ConeFrame& frame) {
  const double speed = frame.v_rel.norm();
  if (!(speed > kVanishingSpeed)) {
    throw Error(ErrorCode::VanishingRelativeVelocity, "relative speed below threshold");
  }
  const Vec2 q = frame.p_rel + frame.v_rel * (frame.p_rel.dot(frame.k_hat()) / speed);
  const double c = std::cos(s.theta), sn = std::sin(s.theta);
  return {q.dot(Vec2(-c, -sn)), q.dot(Vec2(p.l * sn, -p.l * c))};
}

SpatialCone quadrotor_cone(const QuadrotorState& s, const QuadrotorParams& p,
                           const PolygonObstacle& obstacle, double ego_width, ConeOptions options) {
  const auto body = body_kinematics(s, p);
  return project_3d(obstacle, body.position, ego_width, body.velocity, options);
}

std::pair<Vec3, Vec3> quadrotor_rel_kinematics(const QuadrotorState& s, const QuadrotorParams& p,
                                               const PolygonObstacle& obstacle,
                                               ProjectionPlane plane, double ego_width) {
  const auto cone = quadrotor_cone(s, p, obstacle, ego_width);
  const auto& chosen = plane == ProjectionPlane::Horizontal ? cone.horizontal : cone.vertical;
  if (!chosen) {
    throw Error(ErrorCode::EgoInsideVolume, "requested projection plane is unavailable");
  }
  return {chosen->basis * chosen->frame.p_rel, chosen->basis * chosen->frame.v_rel};
}

Eigen::RowVector4d quadrotor_lgh(const QuadrotorState& s, const QuadrotorParams& p,
                                 const PlaneCone& cone) {
  const auto& f = cone.frame;
  const double speed = f.v_rel.norm();
  if (!(speed > kVanishingSpeed)) {
    throw Error(ErrorCode::VanishingRelativeVelocity, "relative speed below threshold");
  }
  const Vec2 q = f.p_rel + f.v_rel * (f.p_rel.dot(f.k_hat()) / speed);
  // Input-bearing part of d(v_rel)/dt is -P R G f with, per propeller,
  // G = [0 L l/Iyy 0 -L l/Iyy; -L l/Ixx 0 L l/Ixx 0; 1/m 1/m 1/m 1/m].
  const double ax = p.arm_length * p.l / p.inertia.x();
  const double ay = p.arm_length * p.l / p.inertia.y();
  const double tm = 1.0 / p.mass;
  Eigen::Matrix<double, 3, 4> g;
  g << 0.0, ay,  0.0, -ay,
       -ax, 0.0, ax,  0.0,
       tm,  tm,  tm,  tm;
  const Eigen::Matrix<double, 2, 4> dv = -cone.basis.transpose() * rotation_matrix(s.attitude) * g;
  return q.transpose() * dv;
}

ConeFrame pointmass_cone(const PointMassState& s, const PolygonObstacle& obstacle,
                         double ego_width, ConeOptions options) {
  return build_cone_frame(obstacle, EgoDisc{s.position, ego_width}, s.velocity, options);
}

BarrierEval<2> pointmass_constraint(const PointMassState& s, const ConeFrame& frame,
                                    const ClassK& kappa, const Eigen::Vector2d& reference) {
  const auto rel = relative_kinematics(frame, horizontal_basis(), body_kinematics(s, {}));
  return poly_cone_barrier(rel, frame.k_hat(), kappa, reference);
}

double full_hdot(const ConeFrame& frame, const Vec2& v_rel_dot, const Vec2& k_hat_dot) {
  const Vec2& p = frame.p_rel;
  const Vec2& v = frame.v_rel;
  const double speed = v.norm();
  const Vec2 k_hat = frame.k_hat();
  double hdot = v.dot(v) + p.dot(v_rel_dot) + speed * v.dot(k_hat) + speed * p.dot(k_hat_dot);
  if (speed > 0.0) hdot += v.dot(v_rel_dot) * p.dot(k_hat) / speed;
  return hdot;
}

}  // namespace polycone
