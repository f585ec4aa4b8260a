#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "polycone/error.hpp"
#include "polycone/geometry.hpp"

namespace polycone {

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a <= -std::numbers::pi ? a + 2.0 * std::numbers::pi : a;
}

// ---------------------------------------------------------------------------
// Acceleration-controlled unicycle: x = (x_p, y_p, theta, v, omega), u = (a, alpha)

struct UnicycleState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  double omega = 0.0;
};

struct UnicycleInput {
  double a = 0.0;
  double alpha = 0.0;
};

struct UnicycleParams {
  double l = 0.1;  // body center ahead of the drive axis
};

struct Unicycle {
  static constexpr int kStateDim = 5;
  static constexpr int kInputDim = 2;
  using State = UnicycleState;
  using Input = UnicycleInput;
  using Params = UnicycleParams;
  using StateVector = Eigen::Matrix<double, kStateDim, 1>;
  using InputVector = Eigen::Matrix<double, kInputDim, 1>;
  using InputMatrix = Eigen::Matrix<double, kStateDim, kInputDim>;

  static StateVector to_vector(const State& s);
  static State from_vector(const StateVector& x);
  static InputVector to_vector(const Input& u) { return {u.a, u.alpha}; }
  static Input input_from_vector(const InputVector& u) { return {u(0), u(1)}; }

  static StateVector drift(const State& s, const Params& p);
  static InputMatrix input_matrix(const State& s, const Params& p);
  static void normalize(State& s) { s.theta = wrap_angle(s.theta); }
};

// ---------------------------------------------------------------------------
// Quadrotor: 12 states, four propeller thrusts.
//
// Attitude is Z-Y-X (yaw, pitch, roll); R = Rz(yaw) Ry(pitch) Rx(roll) maps
// body to inertial. Body rates relate to Euler rates by omega = W * eta_dot with
//
//       | 1      0         -sin(pitch)           |
//   W = | 0   cos(roll)   sin(roll) cos(pitch)   |
//       | 0  -sin(roll)   cos(roll) cos(pitch)   |
//
// Torques are tau = L * [1 0 -1 0; 0 1 0 -1; c -c c -c] * f.

struct QuadrotorState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 attitude = Vec3::Zero();  // roll, pitch, yaw
  Vec3 body_rates = Vec3::Zero();
};

using QuadrotorInput = Eigen::Vector4d;

struct QuadrotorParams {
  double mass = 1.0;
  Vec3 inertia = Vec3(0.01, 0.01, 0.02);  // diagonal I_xx, I_yy, I_zz
  double arm_length = 0.2;                // L
  double torque_constant = 0.05;          // c_tau
  double l = 0.1;                         // body center above the base along body z
  double gravity = 9.81;
};

/// Pitch must stay this far from +-pi/2 for W to be invertible.
inline constexpr double kPitchMargin = 1e-2;

Eigen::Matrix3d rotation_matrix(const Vec3& attitude);
Eigen::Matrix3d euler_rate_matrix(const Vec3& attitude);          // W
Eigen::Matrix3d inverse_euler_rate_matrix(const Vec3& attitude);  // W^-1
/// [1 0 -1 0; 0 1 0 -1; c -c c -c]
Eigen::Matrix<double, 3, 4> propeller_mixing(double torque_constant);

struct Quadrotor {
  static constexpr int kStateDim = 12;
  static constexpr int kInputDim = 4;
  using State = QuadrotorState;
  using Input = QuadrotorInput;
  using Params = QuadrotorParams;
  using StateVector = Eigen::Matrix<double, kStateDim, 1>;
  using InputVector = Eigen::Matrix<double, kInputDim, 1>;
  using InputMatrix = Eigen::Matrix<double, kStateDim, kInputDim>;

  static StateVector to_vector(const State& s);
  static State from_vector(const StateVector& x);
  static InputVector to_vector(const Input& u) { return u; }
  static Input input_from_vector(const InputVector& u) { return u; }

  static StateVector drift(const State& s, const Params& p);
  static InputMatrix input_matrix(const State& s, const Params& p);
  static void normalize(State& s);
};

// ---------------------------------------------------------------------------
// Planar double integrator.

struct PointMassState {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
};

using PointMassInput = Eigen::Vector2d;
struct PointMassParams {};

struct PointMass {
  static constexpr int kStateDim = 4;
  static constexpr int kInputDim = 2;
  using State = PointMassState;
  using Input = PointMassInput;
  using Params = PointMassParams;
  using StateVector = Eigen::Matrix<double, kStateDim, 1>;
  using InputVector = Eigen::Matrix<double, kInputDim, 1>;
  using InputMatrix = Eigen::Matrix<double, kStateDim, kInputDim>;

  static StateVector to_vector(const State& s);
  static State from_vector(const StateVector& x);
  static InputVector to_vector(const Input& u) { return u; }
  static Input input_from_vector(const InputVector& u) { return u; }

  static StateVector drift(const State& s, const Params& p);
  static InputMatrix input_matrix(const State& s, const Params& p);
  static void normalize(State&) {}
};

/// f(x) + g(x) u
template <class Model>
typename Model::StateVector dynamics(const typename Model::State& s,
                                     const typename Model::InputVector& u,
                                     const typename Model::Params& p) {
  return Model::drift(s, p) + Model::input_matrix(s, p) * u;
}

/// Classical RK4 with the input held over the step.
template <class Model>
typename Model::State step_rk4(const typename Model::State& s, const typename Model::InputVector& u,
                               const typename Model::Params& p, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  using SV = typename Model::StateVector;
  const SV x0 = Model::to_vector(s);
  auto eval = [&](const SV& x) { return dynamics<Model>(Model::from_vector(x), u, p); };
  const SV k1 = eval(x0);
  const SV k2 = eval(x0 + 0.5 * dt * k1);
  const SV k3 = eval(x0 + 0.5 * dt * k2);
  const SV k4 = eval(x0 + dt * k3);
  const SV x1 = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!x1.allFinite()) throw Error(ErrorCode::NonFiniteState, "integration produced a non-finite state");
  auto out = Model::from_vector(x1);
  Model::normalize(out);
  return out;
}

}  // namespace polycone
