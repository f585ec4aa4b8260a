#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "polycone/controller.hpp"
#include "polycone/dynamics.hpp"
#include "polycone/filter.hpp"
#include "polycone/geometry.hpp"

namespace polycone {

enum class ModelKind { Unicycle, Quadrotor, PointMass };

/// Exact: grown-obstacle cone about its bisector, with cone rates in the
/// constraint. Segment: segment widening, midpoint axis, frozen cone.
enum class ConeFormulation { Exact, Segment };

FilterConfig filter_config(ConeFormulation formulation);

struct UnicycleSetup {
  UnicycleState initial;
  UnicycleParams params;
  UnicycleGains gains;
};

struct QuadrotorSetup {
  QuadrotorState initial;
  QuadrotorParams params;
  QuadrotorGains gains;
};

struct PointMassSetup {
  PointMassState initial;
  PointMassParams params;
  PointMassGains gains;
};

using VehicleSetup = std::variant<UnicycleSetup, QuadrotorSetup, PointMassSetup>;

struct Scenario {
  std::string name;
  VehicleSetup vehicle = UnicycleSetup{};
  Goal goal;
  std::vector<PolygonObstacle> obstacles;
  double ego_width = 0.5;
  double gamma = 1.0;
  double dt = 0.005;
  double horizon = 30.0;
  std::optional<InputBox> input_bounds;
  BarrierKind filter = BarrierKind::PolyC2BF;
  ConeFormulation cone = ConeFormulation::Exact;
  double culling_radius = 50.0;

  ModelKind model() const { return static_cast<ModelKind>(vehicle.index()); }
};

/// Checks that cannot be expressed by the types: positive dt/horizon/width,
/// finite initial state, initial position outside every obstacle.
void validate(const Scenario& scenario);

enum class TerminalStatus { Reached, Collided, FilterFailure, Timeout };

struct StepRecord {
  double t = 0.0;
  Eigen::VectorXd state;
  Eigen::VectorXd reference;  // NaN on the terminal record
  Eigen::VectorXd u_star;     // NaN on the terminal record
  std::vector<double> h;      // per obstacle; NaN when culled
  std::vector<double> psi;    // per obstacle; NaN unless the row was kept
  std::vector<bool> active;
  std::vector<Vec3> centers;  // obstacle centers at t
  double min_clearance = 0.0;
  bool fallback_used = false;
  bool zero_gradient = false;  // previous safe input was held

  double min_h() const;
  bool all_psi_nonnegative() const;
};

struct TrajectoryLog {
  std::string scenario;
  ModelKind model = ModelKind::Unicycle;
  BarrierKind filter = BarrierKind::PolyC2BF;
  ConeFormulation cone = ConeFormulation::Exact;
  double dt = 0.0;
  double ego_width = 0.0;
  std::vector<PolygonObstacle> obstacles;  // at t = 0
  std::vector<StepRecord> steps;
  TerminalStatus status = TerminalStatus::Timeout;
  std::string failure;  // error text for FilterFailure

  // Wall-clock seconds spent in filter_step, one per filtered step. Not part of
  // the serialized log since it is not deterministic.
  std::vector<double> filter_latency;

  double min_clearance() const;
  double min_h() const;
};

TrajectoryLog run(const Scenario& scenario);

std::string_view to_string(ModelKind kind);
std::string_view to_string(BarrierKind kind);
std::string_view to_string(TerminalStatus status);
std::string_view to_string(ConeFormulation cone);
std::optional<ModelKind> parse_model_kind(std::string_view s);
std::optional<BarrierKind> parse_barrier_kind(std::string_view s);
std::optional<TerminalStatus> parse_terminal_status(std::string_view s);
std::optional<ConeFormulation> parse_cone_formulation(std::string_view s);

/// Long wall, cluttered room, two 3-D quadrotor arrangements, narrow corridor,
/// moving-obstacle crossing.
std::vector<Scenario> builtin_scenarios();
std::optional<Scenario> builtin_scenario(std::string_view name);

/// Seeded cluttered scene: random convex obstacles between start and goal,
/// rejection-sampled so every barrier starts strictly positive.
Scenario random_cluttered_scenario(std::uint64_t seed);

}  // namespace polycone
