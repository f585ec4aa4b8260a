#include "polycone/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "polycone/barrier.hpp"
#include "polycone/error.hpp"

namespace polycone {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class Setup>
struct ModelOf;
template <>
struct ModelOf<UnicycleSetup> { using type = Unicycle; };
template <>
struct ModelOf<QuadrotorSetup> { using type = Quadrotor; };
template <>
struct ModelOf<PointMassSetup> { using type = PointMass; };

Eigen::Vector2d reference_input(const UnicycleSetup& setup, const UnicycleState& s, const Goal& g) {
  return Unicycle::to_vector(pd_reference(s, g, setup.gains));
}
Eigen::Vector2d reference_input(const PointMassSetup& setup, const PointMassState& s, const Goal& g) {
  return pd_reference(s, g, setup.gains);
}
Eigen::Vector4d reference_input(const QuadrotorSetup& setup, const QuadrotorState& s, const Goal& g) {
  return pd_reference(s, setup.params, g, setup.gains);
}

Vec3 vehicle_position(const UnicycleState& s) { return {s.x, s.y, 0.0}; }
Vec3 vehicle_position(const PointMassState& s) { return {s.position.x(), s.position.y(), 0.0}; }
Vec3 vehicle_position(const QuadrotorState& s) { return s.position; }

template <class Model>
double clearance_to(const PolygonObstacle& obs, const Vec3& body_center) {
  if constexpr (std::is_same_v<Model, Quadrotor>) return obs.signed_distance(body_center);
  else return obs.signed_distance(Vec2(body_center.head<2>()));
}

template <class Setup>
TrajectoryLog run_model(const Scenario& sc, const Setup& setup) {
  using Model = typename ModelOf<Setup>::type;
  constexpr int M = Model::kInputDim;
  const std::size_t n_obs = sc.obstacles.size();

  TrajectoryLog log;
  log.scenario = sc.name;
  log.model = sc.model();
  log.filter = sc.filter;
  log.cone = sc.cone;
  log.dt = sc.dt;
  log.ego_width = sc.ego_width;
  log.obstacles = sc.obstacles;

  FilterConfig config = filter_config(sc.cone);
  config.kind = sc.filter;
  config.class_k = ClassK(sc.gamma);
  config.ego_width = sc.ego_width;
  config.culling_radius = sc.culling_radius;
  config.bounds = sc.input_bounds;

  const Eigen::VectorXd nan_input = Eigen::VectorXd::Constant(M, kNaN);
  typename Model::State state = setup.initial;
  std::optional<Eigen::VectorXd> last_safe;
  std::vector<PolygonObstacle> current;
  current.reserve(n_obs);

  const auto max_steps = static_cast<std::size_t>(std::ceil(sc.horizon / sc.dt - 1e-9));
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * sc.dt;
    current.clear();
    for (const auto& o : sc.obstacles) current.push_back(o.at(t));

    StepRecord rec;
    rec.t = t;
    rec.state = Model::to_vector(state);
    rec.reference = nan_input;
    rec.u_star = nan_input;
    rec.h.assign(n_obs, kNaN);
    rec.psi.assign(n_obs, kNaN);
    rec.active.assign(n_obs, false);
    rec.centers.reserve(n_obs);
    for (const auto& o : current) rec.centers.push_back(o.center());

    const Vec3 body = body_kinematics(state, setup.params).position;
    rec.min_clearance = std::numeric_limits<double>::infinity();
    for (const auto& o : current) {
      rec.min_clearance = std::min(rec.min_clearance, clearance_to<Model>(o, body) - 0.5 * sc.ego_width);
    }

    auto finish = [&](TerminalStatus status) {
      log.steps.push_back(std::move(rec));
      log.status = status;
      return std::move(log);
    };

    if (rec.min_clearance < 0.0) return finish(TerminalStatus::Collided);
    if ((vehicle_position(state) - sc.goal.position).norm() <= sc.goal.tolerance) {
      return finish(TerminalStatus::Reached);
    }
    if (k >= max_steps) return finish(TerminalStatus::Timeout);

    const Eigen::Matrix<double, M, 1> reference = reference_input(setup, state, sc.goal);
    rec.reference = reference;

    Eigen::Matrix<double, M, 1> u;
    try {
      const auto t0 = std::chrono::steady_clock::now();
      const FilterStep step = filter_step<Model>(state, setup.params, current, reference, config);
      const auto t1 = std::chrono::steady_clock::now();
      log.filter_latency.push_back(std::chrono::duration<double>(t1 - t0).count());
      u = step.u_star;
      rec.fallback_used = step.fallback_used;
      for (std::size_t i = 0; i < n_obs; ++i) {
        rec.h[i] = step.rows[i].h;
        rec.psi[i] = step.rows[i].psi;
        rec.active[i] = step.rows[i].active;
      }
      last_safe = step.u_star;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroGradient) {
        log.failure = e.what();
        return finish(TerminalStatus::FilterFailure);
      }
      // hold the previous safe input and flag the step
      rec.zero_gradient = true;
      u = last_safe ? Eigen::Matrix<double, M, 1>(*last_safe) : reference;
    }
    rec.u_star = u;
    log.steps.push_back(std::move(rec));

    try {
      state = step_rk4<Model>(state, u, setup.params, sc.dt);
    } catch (const Error& e) {
      log.failure = e.what();
      log.status = TerminalStatus::FilterFailure;
      return log;
    }
  }
}

}  // namespace

double StepRecord::min_h() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : h) {
    if (!std::isnan(v)) m = std::min(m, v);
  }
  return m;
}

bool StepRecord::all_psi_nonnegative() const {
  return std::all_of(psi.begin(), psi.end(), [](double p) { return std::isnan(p) || p >= 0.0; });
}

double TrajectoryLog::min_clearance() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : steps) m = std::min(m, s.min_clearance);
  return m;
}

double TrajectoryLog::min_h() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : steps) m = std::min(m, s.min_h());
  return m;
}

void validate(const Scenario& sc) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!(sc.dt > 0.0) || !std::isfinite(sc.dt)) fail("dt must be positive");
  if (!(sc.horizon > 0.0) || !std::isfinite(sc.horizon)) fail("horizon must be positive");
  if (!(sc.ego_width > 0.0) || !std::isfinite(sc.ego_width)) fail("ego width must be positive");
  if (!(sc.gamma > 0.0)) fail("gamma must be positive");
  if (!(sc.goal.tolerance > 0.0) || !(sc.goal.speed > 0.0)) fail("goal tolerance and speed must be positive");
  if (!(sc.culling_radius > 0.0)) fail("culling radius must be positive");
  std::visit(
      [&](const auto& setup) {
        using Model = typename ModelOf<std::decay_t<decltype(setup)>>::type;
        if (!Model::to_vector(setup.initial).allFinite()) fail("initial state must be finite");
        if (sc.input_bounds && (sc.input_bounds->lower.size() != Model::kInputDim ||
                                sc.input_bounds->upper.size() != Model::kInputDim)) {
          fail("input bounds have the wrong dimension");
        }
        const Vec3 body = body_kinematics(setup.initial, setup.params).position;
        for (const auto& o : sc.obstacles) {
          if (clearance_to<Model>(o, body) <= 0.0) fail("initial position lies inside an obstacle");
        }
      },
      sc.vehicle);
}

TrajectoryLog run(const Scenario& scenario) {
  validate(scenario);
  return std::visit([&](const auto& setup) { return run_model(scenario, setup); }, scenario.vehicle);
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Unicycle: return "unicycle";
    case ModelKind::Quadrotor: return "quadrotor";
    case ModelKind::PointMass: return "pointmass";
  }
  return "unknown";
}

std::string_view to_string(BarrierKind kind) {
  switch (kind) {
    case BarrierKind::PolyC2BF: return "polyc2bf";
    case BarrierKind::C3BF: return "c3bf";
    case BarrierKind::None: return "none";
  }
  return "unknown";
}

std::string_view to_string(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::Reached: return "reached";
    case TerminalStatus::Collided: return "collided";
    case TerminalStatus::FilterFailure: return "filter-failure";
    case TerminalStatus::Timeout: return "timeout";
  }
  return "unknown";
}

FilterConfig filter_config(ConeFormulation formulation) {
  FilterConfig config;
  if (formulation == ConeFormulation::Segment) {
    config.cone = kSegmentCone;
    config.cone_rates = false;
  }
  return config;
}

std::string_view to_string(ConeFormulation cone) {
  return cone == ConeFormulation::Exact ? "exact" : "segment";
}

std::optional<ConeFormulation> parse_cone_formulation(std::string_view s) {
  for (auto k : {ConeFormulation::Exact, ConeFormulation::Segment}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::optional<ModelKind> parse_model_kind(std::string_view s) {
  for (auto k : {ModelKind::Unicycle, ModelKind::Quadrotor, ModelKind::PointMass}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::optional<BarrierKind> parse_barrier_kind(std::string_view s) {
  for (auto k : {BarrierKind::PolyC2BF, BarrierKind::C3BF, BarrierKind::None}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::optional<TerminalStatus> parse_terminal_status(std::string_view s) {
  for (auto k : {TerminalStatus::Reached, TerminalStatus::Collided, TerminalStatus::FilterFailure,
                 TerminalStatus::Timeout}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

}  // namespace polycone
