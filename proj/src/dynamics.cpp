#include "polycone/dynamics.hpp"

namespace polycone {

Unicycle::StateVector Unicycle::to_vector(const State& s) {
  StateVector x;
  x << s.x, s.y, s.theta, s.v, s.omega;
  return x;
}

Unicycle::State Unicycle::from_vector(const StateVector& x) {
  return {x(0), x(1), x(2), x(3), x(4)};
}

Unicycle::StateVector Unicycle::drift(const State& s, const Params&) {
  StateVector f;
  f << s.v * std::cos(s.theta), s.v * std::sin(s.theta), s.omega, 0.0, 0.0;
  return f;
}

Unicycle::InputMatrix Unicycle::input_matrix(const State&, const Params&) {
  InputMatrix g = InputMatrix::Zero();
  g(3, 0) = 1.0;
  g(4, 1) = 1.0;
  return g;
}

Eigen::Matrix3d rotation_matrix(const Vec3& attitude) {
  const double cr = std::cos(attitude(0)), sr = std::sin(attitude(0));
  const double cp = std::cos(attitude(1)), sp = std::sin(attitude(1));
  const double cy = std::cos(attitude(2)), sy = std::sin(attitude(2));
  Eigen::Matrix3d r;
  r << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
       sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
       -sp,     cp * sr,                cp * cr;
  return r;
}

Eigen::Matrix3d euler_rate_matrix(const Vec3& attitude) {
  const double cr = std::cos(attitude(0)), sr = std::sin(attitude(0));
  const double cp = std::cos(attitude(1)), sp = std::sin(attitude(1));
  Eigen::Matrix3d w;
  w << 1.0, 0.0, -sp,
       0.0, cr,  sr * cp,
       0.0, -sr, cr * cp;
  return w;
}

Eigen::Matrix3d inverse_euler_rate_matrix(const Vec3& attitude) {
  const double pitch = attitude(1);
  if (std::abs(pitch) >= std::numbers::pi / 2.0 - kPitchMargin) {
    throw Error(ErrorCode::SingularAttitude, "pitch too close to +-pi/2");
  }
  const double cr = std::cos(attitude(0)), sr = std::sin(attitude(0));
  const double cp = std::cos(pitch), tp = std::tan(pitch);
  Eigen::Matrix3d wi;
  wi << 1.0, sr * tp,  cr * tp,
        0.0, cr,       -sr,
        0.0, sr / cp,  cr / cp;
  return wi;
}

Eigen::Matrix<double, 3, 4> propeller_mixing(double c) {
  Eigen::Matrix<double, 3, 4> m;
  m << 1.0, 0.0, -1.0, 0.0,
       0.0, 1.0, 0.0, -1.0,
       c,   -c,  c,   -c;
  return m;
}

Quadrotor::StateVector Quadrotor::to_vector(const State& s) {
  StateVector x;
  x << s.position, s.velocity, s.attitude, s.body_rates;
  return x;
}

Quadrotor::State Quadrotor::from_vector(const StateVector& x) {
  return {x.segment<3>(0), x.segment<3>(3), x.segment<3>(6), x.segment<3>(9)};
}

Quadrotor::StateVector Quadrotor::drift(const State& s, const Params& p) {
  const Vec3& w = s.body_rates;
  const Vec3 iw = p.inertia.cwiseProduct(w);
  StateVector f;
  f.segment<3>(0) = s.velocity;
  f.segment<3>(3) = Vec3(0.0, 0.0, -p.gravity);
  f.segment<3>(6) = inverse_euler_rate_matrix(s.attitude) * w;
  f.segment<3>(9) = -(w.cross(iw)).cwiseQuotient(p.inertia);
  return f;
}

Quadrotor::InputMatrix Quadrotor::input_matrix(const State& s, const Params& p) {
  InputMatrix g = InputMatrix::Zero();
  const Vec3 thrust_dir = rotation_matrix(s.attitude).col(2) / p.mass;
  for (int i = 0; i < 4; ++i) g.block<3, 1>(3, i) = thrust_dir;
  g.block<3, 4>(9, 0) =
      p.inertia.cwiseInverse().asDiagonal() * (p.arm_length * propeller_mixing(p.torque_constant));
  return g;
}

void Quadrotor::normalize(State& s) {
  s.attitude(0) = wrap_angle(s.attitude(0));
  s.attitude(2) = wrap_angle(s.attitude(2));
}

PointMass::StateVector PointMass::to_vector(const State& s) {
  StateVector x;
  x << s.position, s.velocity;
  return x;
}

PointMass::State PointMass::from_vector(const StateVector& x) {
  return {x.head<2>(), x.tail<2>()};
}

PointMass::StateVector PointMass::drift(const State& s, const Params&) {
  StateVector f;
  f << s.velocity, 0.0, 0.0;
  return f;
}

PointMass::InputMatrix PointMass::input_matrix(const State&, const Params&) {
  InputMatrix g = InputMatrix::Zero();
  g.bottomRows<2>().setIdentity();
  return g;
}

}  // namespace polycone
