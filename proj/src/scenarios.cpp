#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "polycone/error.hpp"
#include "polycone/sim.hpp"

namespace polycone {

namespace {

PolygonObstacle box(double cx, double cy, double sx, double sy, Vec3 velocity = Vec3::Zero()) {
  const double hx = 0.5 * sx, hy = 0.5 * sy;
  return PolygonObstacle({{cx - hx, cy - hy}, {cx + hx, cy - hy}, {cx + hx, cy + hy}, {cx - hx, cy + hy}},
                         velocity);
}

PolygonObstacle prism(double cx, double cy, double sx, double sy, double z_min, double z_max) {
  const double hx = 0.5 * sx, hy = 0.5 * sy;
  return PolygonObstacle({{cx - hx, cy - hy}, {cx + hx, cy - hy}, {cx + hx, cy + hy}, {cx - hx, cy + hy}},
                         Vec3::Zero(), std::nullopt, VerticalExtent{z_min, z_max});
}

PolygonObstacle regular(double cx, double cy, double radius, int sides, double phase = 0.0) {
  std::vector<Vec2> v;
  for (int i = 0; i < sides; ++i) {
    const double a = phase + 2.0 * std::numbers::pi * i / sides;
    v.emplace_back(cx + radius * std::cos(a), cy + radius * std::sin(a));
  }
  return PolygonObstacle(std::move(v));
}

Scenario long_wall() {
  Scenario s;
  s.name = "long-wall";
  UnicycleSetup u;
  // body center (x + l, y) sits 1 m below the wall face at y = -0.25
  u.initial = {6.0, -1.25, 0.0, 1.0, 0.0};
  u.params.l = 0.1;
  s.vehicle = u;
  s.goal.position = Vec3(6.0, 4.0, 0.0);
  s.goal.speed = 1.0;
  s.obstacles.push_back(box(0.0, 0.0, 20.0, 0.5));
  s.ego_width = 0.5;
  return s;
}

Scenario cluttered_room() {
  Scenario s;
  s.name = "cluttered-room";
  UnicycleSetup u;
  u.initial = {0.0, 0.0, 0.0, 0.8, 0.0};
  u.params.l = 0.1;
  s.vehicle = u;
  s.goal.position = Vec3(14.0, 0.5, 0.0);
  s.goal.speed = 1.0;
  s.obstacles = {
      box(7.0, -3.0, 22.0, 0.5),  // long wall alongside the route
      box(3.5, 1.3, 1.0, 1.4),
      regular(6.5, -1.0, 0.7, 6, 0.2),
      PolygonObstacle({{8.5, 0.6}, {10.0, 0.9}, {9.0, 2.2}}),
      box(11.5, -0.9, 0.8, 1.2),
      regular(12.0, 2.2, 0.6, 5, 0.4),
  };
  s.ego_width = 0.5;
  return s;
}

Scenario quadrotor_arrangement_a() {
  Scenario s;
  s.name = "quadrotor-cluttered-a";
  QuadrotorSetup q;
  // starts heading off the pillar that sits on the route
  q.initial.position = Vec3(0.0, 0.0, 4.0);
  q.initial.velocity = Vec3(0.6 * std::cos(-0.4), 0.6 * std::sin(-0.4), 0.0);
  s.vehicle = q;
  s.goal.position = Vec3(12.0, 0.4, 4.0);
  s.goal.speed = 1.0;
  s.goal.tolerance = 0.15;
  s.obstacles = {
      prism(3.5, 1.1, 0.4, 0.8, 0.0, 10.0),
      prism(5.5, 0.25, 0.4, 0.9, 0.0, 10.0),
      prism(9.5, 1.3, 0.4, 0.8, 0.0, 10.0),
      prism(7.5, 0.0, 0.5, 16.0, 0.0, 3.2),  // long low wall across the route
  };
  s.ego_width = 0.3;
  return s;
}

Scenario quadrotor_arrangement_b() {
  Scenario s;
  s.name = "quadrotor-cluttered-b";
  QuadrotorSetup q;
  q.initial.position = Vec3(0.0, 0.5, 4.0);
  q.initial.velocity = Vec3(0.6 * std::cos(0.35), 0.6 * std::sin(0.35), 0.0);
  s.vehicle = q;
  s.goal.position = Vec3(12.0, -0.3, 4.0);
  s.goal.speed = 1.0;
  s.goal.tolerance = 0.15;
  s.obstacles = {
      prism(3.0, -0.5, 0.4, 0.8, 0.0, 10.0),
      prism(5.0, 1.4, 0.4, 0.8, 0.0, 10.0),
      prism(7.0, -0.1, 0.5, 1.0, 0.0, 10.0),
      prism(9.5, -1.2, 0.4, 0.8, 0.0, 10.0),
      prism(9.6, 1.6, 0.4, 0.8, 0.0, 10.0),
  };
  s.ego_width = 0.3;
  return s;
}

Scenario narrow_corridor() {
  Scenario s;
  s.name = "narrow-corridor";
  PointMassSetup p;
  p.initial.position = Vec2(-2.0, 0.1);
  p.initial.velocity = Vec2(0.8, 0.0);
  p.gains.max_accel = 2.0;
  s.vehicle = p;
  s.goal.position = Vec3(12.0, 0.0, 0.0);
  s.obstacles = {
      box(5.0, 1.0, 10.0, 0.5),
      box(5.0, -1.0, 10.0, 0.5),
  };
  s.ego_width = 0.4;
  return s;
}

Scenario moving_crossing() {
  Scenario s;
  s.name = "moving-crossing";
  UnicycleSetup u;
  u.initial = {0.0, 0.0, 0.0, 0.3, 0.0};
  s.vehicle = u;
  s.goal.position = Vec3(14.0, 0.0, 0.0);
  s.obstacles = {
      box(7.0, -4.8, 1.2, 1.2, Vec3(0.0, 0.6, 0.0)),  // crosses the route as the vehicle arrives
      regular(10.0, 3.0, 0.6, 6, 0.0),
  };
  s.ego_width = 0.5;
  return s;
}

}  // namespace

std::vector<Scenario> builtin_scenarios() {
  return {long_wall(), cluttered_room(), quadrotor_arrangement_a(), quadrotor_arrangement_b(),
          narrow_corridor(), moving_crossing()};
}

std::optional<Scenario> builtin_scenario(std::string_view name) {
  for (auto& s : builtin_scenarios()) {
    if (s.name == name) return std::move(s);
  }
  return std::nullopt;
}

namespace {

bool initial_barriers_positive(const Scenario& s) {
  return std::visit(
      [&](const auto& setup) {
        using S = std::decay_t<decltype(setup)>;
        FilterConfig cfg;
        cfg.kind = BarrierKind::None;
        cfg.ego_width = s.ego_width;
        cfg.culling_radius = s.culling_radius;
        try {
          if constexpr (std::is_same_v<S, UnicycleSetup>) {
            const auto step = filter_step<Unicycle>(setup.initial, setup.params, s.obstacles,
                                                    Eigen::Vector2d::Zero(), cfg);
            return std::all_of(step.rows.begin(), step.rows.end(),
                               [](const ObstacleRow& r) { return r.status == RowStatus::Culled || r.h > 1e-3; });
          } else if constexpr (std::is_same_v<S, PointMassSetup>) {
            const auto step = filter_step<PointMass>(setup.initial, setup.params, s.obstacles,
                                                     Eigen::Vector2d::Zero(), cfg);
            return std::all_of(step.rows.begin(), step.rows.end(),
                               [](const ObstacleRow& r) { return r.status == RowStatus::Culled || r.h > 1e-3; });
          } else {
            return false;
          }
        } catch (const Error&) {
          return false;
        }
      },
      s.vehicle);
}

}  // namespace

Scenario random_cluttered_scenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  for (int attempt = 0; attempt < 1000; ++attempt) {
    Scenario s;
    s.name = "random-" + std::to_string(seed);
    s.ego_width = 0.4;
    const Vec2 start(0.0, uniform(-2.0, 2.0));
    const Vec2 goal(16.0, uniform(-2.0, 2.0));
    const double heading = std::atan2(goal.y() - start.y(), goal.x() - start.x());
    const double speed = uniform(0.5, 1.0);
    s.goal.position = Vec3(goal.x(), goal.y(), 0.0);
    s.goal.speed = 1.0;
    if (seed % 2 == 0) {
      UnicycleSetup u;
      u.initial = {start.x(), start.y(), heading + uniform(-0.3, 0.3), speed, 0.0};
      s.vehicle = u;
    } else {
      PointMassSetup p;
      p.initial.position = start;
      p.initial.velocity = speed * Vec2(std::cos(heading), std::sin(heading));
      p.gains.max_accel = 2.0;
      s.vehicle = p;
    }

    const int count = 5 + static_cast<int>(rng() % 4);
    std::vector<std::pair<Vec2, double>> placed;  // center, radius
    for (int tries = 0; tries < 400 && static_cast<int>(placed.size()) < count; ++tries) {
      const Vec2 c(uniform(3.0, 13.0), uniform(-5.0, 5.0));
      const double r = uniform(0.4, 1.2);
      bool ok = (c - start).norm() > r + 1.5 && (c - goal).norm() > r + 1.5;
      for (const auto& [pc, pr] : placed) ok = ok && (c - pc).norm() > r + pr + 1.2;
      if (!ok) continue;
      std::vector<Vec2> pts;
      const int n = 4 + static_cast<int>(rng() % 5);
      for (int i = 0; i < n; ++i) {
        const double a = uniform(0.0, 2.0 * std::numbers::pi);
        const double rr = r * uniform(0.6, 1.0);
        pts.emplace_back(c.x() + rr * std::cos(a), c.y() + rr * std::sin(a));
      }
      try {
        PolygonObstacle obs(pts);
        placed.emplace_back(c, r);
        s.obstacles.push_back(std::move(obs));
      } catch (const Error&) {
        // degenerate sample (all points collinear or center outside); draw again
      }
    }
    if (initial_barriers_positive(s)) return s;
  }
  throw Error(ErrorCode::InvalidArgument, "could not sample a scene with positive initial barriers");
}

}  // namespace polycone
