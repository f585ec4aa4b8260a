#pragma once

#include <limits>

#include <Eigen/Dense>

#include "polycone/dynamics.hpp"

namespace polycone {

/// Goal position with a cruise speed the reference controllers will not exceed.
struct Goal {
  Vec3 position = Vec3::Zero();
  double speed = 1.0;
  double tolerance = 0.1;
};

struct UnicycleGains {
  double k_v = 2.0;      // speed tracking
  double k_theta = 4.0;  // heading
  double k_omega = 3.0;  // yaw-rate damping
  double k_dist = 1.0;   // desired speed = min(cruise, k_dist * distance)
};

struct PointMassGains {
  double k_p = 1.0;
  double k_d = 1.5;
  double max_accel = std::numeric_limits<double>::infinity();
};

struct QuadrotorGains {
  double k_pos = 1.0;   // position error -> desired velocity
  double k_vel = 2.0;   // velocity error -> desired acceleration
  double k_att = 40.0;  // attitude error -> angular acceleration
  double k_rate = 12.0;
  double max_tilt = 0.5;   // rad
  double max_accel = 4.0;  // m/s^2 per axis, before gravity compensation
};

/// a = k_v (v_des - v), alpha = k_theta wrap(theta_des - theta) - k_omega omega,
/// theta_des the bearing to the goal.
UnicycleInput pd_reference(const UnicycleState& s, const Goal& goal, const UnicycleGains& gains);

/// u = k_p (p_goal - p) - k_d v, norm-limited to max_accel.
PointMassInput pd_reference(const PointMassState& s, const Goal& goal, const PointMassGains& gains);

/// Cascaded position PD -> desired thrust direction (yaw held at 0) ->
/// attitude PD -> torques -> propeller thrusts through the mixing matrix.
QuadrotorInput pd_reference(const QuadrotorState& s, const QuadrotorParams& params,
                            const Goal& goal, const QuadrotorGains& gains);

}  // namespace polycone
