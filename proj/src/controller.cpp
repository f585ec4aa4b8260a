#include "polycone/controller.hpp"

#include <algorithm>
#include <cmath>

namespace polycone {

namespace {

Vec3 clip_norm(const Vec3& v, double limit) {
  const double n = v.norm();
  return n > limit ? Vec3(v * (limit / n)) : v;
}

}  // namespace

UnicycleInput pd_reference(const UnicycleState& s, const Goal& goal, const UnicycleGains& gains) {
  const Vec2 err = goal.position.head<2>() - Vec2(s.x, s.y);
  const double dist = err.norm();
  const double v_des = std::min(goal.speed, gains.k_dist * dist);
  const double heading_err = dist > 1e-9 ? wrap_angle(std::atan2(err.y(), err.x()) - s.theta) : 0.0;
  return {gains.k_v * (v_des - s.v), gains.k_theta * heading_err - gains.k_omega * s.omega};
}

PointMassInput pd_reference(const PointMassState& s, const Goal& goal, const PointMassGains& gains) {
  Vec2 u = gains.k_p * (goal.position.head<2>() - s.position) - gains.k_d * s.velocity;
  const double n = u.norm();
  if (n > gains.max_accel) u *= gains.max_accel / n;
  return u;
}

QuadrotorInput pd_reference(const QuadrotorState& s, const QuadrotorParams& params,
                            const Goal& goal, const QuadrotorGains& gains) {
  const Vec3 v_des = clip_norm(gains.k_pos * (goal.position - s.position), goal.speed);
  Vec3 a_des = gains.k_vel * (v_des - s.velocity);
  a_des = a_des.cwiseMax(-gains.max_accel).cwiseMin(gains.max_accel);

  // Desired specific force, tilt-limited around world z.
  Vec3 force = a_des + Vec3(0.0, 0.0, params.gravity);
  if (force.z() < 0.1 * params.gravity) force.z() = 0.1 * params.gravity;
  const double horiz = force.head<2>().norm();
  const double max_horiz = force.z() * std::tan(gains.max_tilt);
  if (horiz > max_horiz) force.head<2>() *= max_horiz / horiz;
  const Vec3 dir = force.normalized();

  // With yaw = 0 the thrust axis is (cos r sin p, -sin r, cos r cos p).
  const Vec3 att_des(-std::asin(std::clamp(dir.y(), -1.0, 1.0)), std::atan2(dir.x(), dir.z()), 0.0);
  const Eigen::Matrix3d r = rotation_matrix(s.attitude);
  const double collective = params.mass * force.dot(r.col(2));

  Vec3 att_err = att_des - s.attitude;
  att_err(2) = wrap_angle(att_err(2));
  const Vec3 wdot_des = gains.k_att * att_err - gains.k_rate * s.body_rates;
  const Vec3& w = s.body_rates;
  const Vec3 torque = params.inertia.cwiseProduct(wdot_des) + w.cross(params.inertia.cwiseProduct(w));

  Eigen::Matrix4d mix;
  mix.row(0).setOnes();
  mix.bottomRows<3>() = params.arm_length * propeller_mixing(params.torque_constant);
  Eigen::Vector4d wrench;
  wrench << collective, torque;
  return mix.partialPivLu().solve(wrench);
}

}  // namespace polycone
