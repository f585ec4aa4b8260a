#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "polycone/error.hpp"
#include "polycone/io.hpp"

namespace polycone {

namespace {

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& what) {
  const auto mark = node.Mark();
  std::string where = mark.is_null() ? std::string("line ?") : "line " + std::to_string(mark.line + 1);
  throw Error(ErrorCode::ParseError, where + ": " + what);
}

void require_map(const YAML::Node& node, const std::string& name) {
  if (!node.IsMap()) fail_at(node, "'" + name + "' must be a mapping");
}

void check_keys(const YAML::Node& node, const std::string& name, const std::set<std::string>& allowed) {
  require_map(node, name);
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) fail_at(kv.first, "unknown key '" + key + "' in " + name);
  }
}

double as_double(const YAML::Node& node, const std::string& name) {
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    fail_at(node, "'" + name + "' must be a number");
  }
}

std::string as_string(const YAML::Node& node, const std::string& name) {
  if (!node.IsScalar()) fail_at(node, "'" + name + "' must be a string");
  return node.as<std::string>();
}

Eigen::VectorXd as_vector(const YAML::Node& node, const std::string& name, int min_size, int max_size) {
  if (!node.IsSequence()) fail_at(node, "'" + name + "' must be a list of numbers");
  const auto n = static_cast<int>(node.size());
  if (n < min_size || n > max_size) {
    fail_at(node, "'" + name + "' must have " + std::to_string(min_size) +
                      (min_size == max_size ? "" : "-" + std::to_string(max_size)) + " entries");
  }
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = as_double(node[i], name);
  return v;
}

Vec3 as_vec3(const YAML::Node& node, const std::string& name, int min_size = 2) {
  const auto v = as_vector(node, name, min_size, 3);
  return Vec3(v(0), v.size() > 1 ? v(1) : 0.0, v.size() > 2 ? v(2) : 0.0);
}

void read_double(const YAML::Node& map, const char* key, double& out) {
  if (const auto n = map[key]) out = as_double(n, key);
}

PolygonObstacle parse_obstacle(const YAML::Node& node, std::size_t index) {
  const std::string name = "obstacles[" + std::to_string(index) + "]";
  check_keys(node, name, {"vertices", "velocity", "center", "z_range"});
  const auto verts = node["vertices"];
  if (!verts || !verts.IsSequence()) fail_at(node, name + " needs a 'vertices' list");
  std::vector<Vec2> pts;
  for (const auto& v : verts) {
    const auto p = as_vector(v, name + ".vertices", 2, 2);
    pts.emplace_back(p(0), p(1));
  }
  Vec3 velocity = Vec3::Zero();
  if (const auto v = node["velocity"]) velocity = as_vec3(v, name + ".velocity");
  std::optional<Vec3> center;
  if (const auto c = node["center"]) center = as_vec3(c, name + ".center");
  std::optional<VerticalExtent> extent;
  if (const auto z = node["z_range"]) {
    const auto r = as_vector(z, name + ".z_range", 2, 2);
    extent = VerticalExtent{r(0), r(1)};
  }
  try {
    return PolygonObstacle(std::move(pts), velocity, center, extent);
  } catch (const Error& e) {
    fail_at(node, name + ": " + e.what());
  }
}

UnicycleSetup parse_unicycle(const YAML::Node& root) {
  UnicycleSetup u;
  const auto s = root["initial_state"];
  check_keys(s, "initial_state", {"x", "y", "theta", "v", "omega"});
  read_double(s, "x", u.initial.x);
  read_double(s, "y", u.initial.y);
  read_double(s, "theta", u.initial.theta);
  read_double(s, "v", u.initial.v);
  read_double(s, "omega", u.initial.omega);
  if (const auto p = root["params"]) {
    check_keys(p, "params", {"l"});
    read_double(p, "l", u.params.l);
    if (!(u.params.l > 0.0)) fail_at(p, "params.l must be > 0");
  }
  if (const auto g = root["gains"]) {
    check_keys(g, "gains", {"k_v", "k_theta", "k_omega", "k_dist"});
    read_double(g, "k_v", u.gains.k_v);
    read_double(g, "k_theta", u.gains.k_theta);
    read_double(g, "k_omega", u.gains.k_omega);
    read_double(g, "k_dist", u.gains.k_dist);
  }
  return u;
}

PointMassSetup parse_pointmass(const YAML::Node& root) {
  PointMassSetup p;
  const auto s = root["initial_state"];
  check_keys(s, "initial_state", {"position", "velocity"});
  if (const auto n = s["position"]) p.initial.position = as_vector(n, "position", 2, 2);
  if (const auto n = s["velocity"]) p.initial.velocity = as_vector(n, "velocity", 2, 2);
  if (const auto n = root["params"]) check_keys(n, "params", {});
  if (const auto g = root["gains"]) {
    check_keys(g, "gains", {"k_p", "k_d", "max_accel"});
    read_double(g, "k_p", p.gains.k_p);
    read_double(g, "k_d", p.gains.k_d);
    read_double(g, "max_accel", p.gains.max_accel);
  }
  return p;
}

QuadrotorSetup parse_quadrotor(const YAML::Node& root) {
  QuadrotorSetup q;
  const auto s = root["initial_state"];
  check_keys(s, "initial_state", {"position", "velocity", "attitude", "body_rates"});
  if (const auto n = s["position"]) q.initial.position = as_vector(n, "position", 3, 3);
  if (const auto n = s["velocity"]) q.initial.velocity = as_vector(n, "velocity", 3, 3);
  if (const auto n = s["attitude"]) q.initial.attitude = as_vector(n, "attitude", 3, 3);
  if (const auto n = s["body_rates"]) q.initial.body_rates = as_vector(n, "body_rates", 3, 3);
  if (const auto p = root["params"]) {
    check_keys(p, "params", {"mass", "inertia", "arm_length", "torque_constant", "l", "gravity"});
    read_double(p, "mass", q.params.mass);
    if (const auto n = p["inertia"]) q.params.inertia = as_vector(n, "inertia", 3, 3);
    read_double(p, "arm_length", q.params.arm_length);
    read_double(p, "torque_constant", q.params.torque_constant);
    read_double(p, "l", q.params.l);
    read_double(p, "gravity", q.params.gravity);
    if (!(q.params.mass > 0.0) || !(q.params.inertia.minCoeff() > 0.0) || !(q.params.arm_length > 0.0) ||
        !(q.params.torque_constant > 0.0)) {
      fail_at(p, "quadrotor mass, inertia, arm_length and torque_constant must be > 0");
    }
  }
  if (const auto g = root["gains"]) {
    check_keys(g, "gains", {"k_pos", "k_vel", "k_att", "k_rate", "max_tilt", "max_accel"});
    read_double(g, "k_pos", q.gains.k_pos);
    read_double(g, "k_vel", q.gains.k_vel);
    read_double(g, "k_att", q.gains.k_att);
    read_double(g, "k_rate", q.gains.k_rate);
    read_double(g, "max_tilt", q.gains.max_tilt);
    read_double(g, "max_accel", q.gains.max_accel);
  }
  return q;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw Error(ErrorCode::ParseError, "line 1: scenario must be a mapping");
  check_keys(root, "scenario",
             {"schema_version", "name", "model", "filter", "cone", "ego_width", "gamma", "dt", "horizon",
              "culling_radius", "goal", "initial_state", "params", "gains", "input_bounds", "obstacles"});

  const auto version = root["schema_version"];
  if (!version) fail_at(root, "missing 'schema_version'");
  if (as_double(version, "schema_version") != kScenarioSchemaVersion) {
    fail_at(version, "unsupported schema_version (expected " + std::to_string(kScenarioSchemaVersion) + ")");
  }

  Scenario s;
  if (const auto n = root["name"]) s.name = as_string(n, "name");

  const auto model_node = root["model"];
  if (!model_node) fail_at(root, "missing 'model'");
  const auto model = parse_model_kind(as_string(model_node, "model"));
  if (!model) fail_at(model_node, "model must be unicycle, quadrotor or pointmass");
  if (!root["initial_state"]) fail_at(root, "missing 'initial_state'");
  switch (*model) {
    case ModelKind::Unicycle: s.vehicle = parse_unicycle(root); break;
    case ModelKind::Quadrotor: s.vehicle = parse_quadrotor(root); break;
    case ModelKind::PointMass: s.vehicle = parse_pointmass(root); break;
  }

  if (const auto n = root["filter"]) {
    const auto kind = parse_barrier_kind(as_string(n, "filter"));
    if (!kind) fail_at(n, "filter must be polyc2bf, c3bf or none");
    s.filter = *kind;
  }
  if (const auto n = root["cone"]) {
    const auto c = parse_cone_formulation(as_string(n, "cone"));
    if (!c) fail_at(n, "cone must be exact or segment");
    s.cone = *c;
  }
  read_double(root, "ego_width", s.ego_width);
  read_double(root, "gamma", s.gamma);
  read_double(root, "dt", s.dt);
  read_double(root, "horizon", s.horizon);
  read_double(root, "culling_radius", s.culling_radius);

  const auto goal = root["goal"];
  if (!goal) fail_at(root, "missing 'goal'");
  check_keys(goal, "goal", {"position", "speed", "tolerance"});
  if (!goal["position"]) fail_at(goal, "goal needs a 'position'");
  s.goal.position = as_vec3(goal["position"], "goal.position");
  read_double(goal, "speed", s.goal.speed);
  read_double(goal, "tolerance", s.goal.tolerance);

  if (const auto b = root["input_bounds"]) {
    check_keys(b, "input_bounds", {"lower", "upper"});
    if (!b["lower"] || !b["upper"]) fail_at(b, "input_bounds needs 'lower' and 'upper'");
    s.input_bounds = InputBox{as_vector(b["lower"], "input_bounds.lower", 1, 4),
                              as_vector(b["upper"], "input_bounds.upper", 1, 4)};
  }

  if (const auto obs = root["obstacles"]) {
    if (!obs.IsSequence()) fail_at(obs, "'obstacles' must be a list");
    for (std::size_t i = 0; i < obs.size(); ++i) s.obstacles.push_back(parse_obstacle(obs[i], i));
  }

  try {
    validate(s);
  } catch (const Error& e) {
    fail_at(root, e.what());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

namespace {

template <class V>
void emit_list(YAML::Emitter& out, const V& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << v(i);
  out << YAML::EndSeq;
}

}  // namespace

std::string emit_scenario(const Scenario& s) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "schema_version" << YAML::Value << kScenarioSchemaVersion;
  out << YAML::Key << "name" << YAML::Value << s.name;
  out << YAML::Key << "model" << YAML::Value << std::string(to_string(s.model()));
  out << YAML::Key << "filter" << YAML::Value << std::string(to_string(s.filter));
  out << YAML::Key << "cone" << YAML::Value << std::string(to_string(s.cone));
  out << YAML::Key << "ego_width" << YAML::Value << s.ego_width;
  out << YAML::Key << "gamma" << YAML::Value << s.gamma;
  out << YAML::Key << "dt" << YAML::Value << s.dt;
  out << YAML::Key << "horizon" << YAML::Value << s.horizon;
  out << YAML::Key << "culling_radius" << YAML::Value << s.culling_radius;

  out << YAML::Key << "goal" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "position";
  emit_list(out, s.goal.position);
  out << YAML::Key << "speed" << YAML::Value << s.goal.speed;
  out << YAML::Key << "tolerance" << YAML::Value << s.goal.tolerance;
  out << YAML::EndMap;

  if (const auto* u = std::get_if<UnicycleSetup>(&s.vehicle)) {
    out << YAML::Key << "initial_state" << YAML::Value << YAML::Flow << YAML::BeginMap
        << YAML::Key << "x" << YAML::Value << u->initial.x << YAML::Key << "y" << YAML::Value << u->initial.y
        << YAML::Key << "theta" << YAML::Value << u->initial.theta << YAML::Key << "v" << YAML::Value
        << u->initial.v << YAML::Key << "omega" << YAML::Value << u->initial.omega << YAML::EndMap;
    out << YAML::Key << "params" << YAML::Value << YAML::Flow << YAML::BeginMap << YAML::Key << "l"
        << YAML::Value << u->params.l << YAML::EndMap;
    out << YAML::Key << "gains" << YAML::Value << YAML::Flow << YAML::BeginMap
        << YAML::Key << "k_v" << YAML::Value << u->gains.k_v << YAML::Key << "k_theta" << YAML::Value
        << u->gains.k_theta << YAML::Key << "k_omega" << YAML::Value << u->gains.k_omega
        << YAML::Key << "k_dist" << YAML::Value << u->gains.k_dist << YAML::EndMap;
  } else if (const auto* p = std::get_if<PointMassSetup>(&s.vehicle)) {
    out << YAML::Key << "initial_state" << YAML::Value << YAML::BeginMap << YAML::Key << "position";
    emit_list(out, p->initial.position);
    out << YAML::Key << "velocity";
    emit_list(out, p->initial.velocity);
    out << YAML::EndMap;
    out << YAML::Key << "gains" << YAML::Value << YAML::Flow << YAML::BeginMap
        << YAML::Key << "k_p" << YAML::Value << p->gains.k_p << YAML::Key << "k_d" << YAML::Value
        << p->gains.k_d << YAML::Key << "max_accel" << YAML::Value << p->gains.max_accel << YAML::EndMap;
  } else if (const auto* q = std::get_if<QuadrotorSetup>(&s.vehicle)) {
    out << YAML::Key << "initial_state" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "position";
    emit_list(out, q->initial.position);
    out << YAML::Key << "velocity";
    emit_list(out, q->initial.velocity);
    out << YAML::Key << "attitude";
    emit_list(out, q->initial.attitude);
    out << YAML::Key << "body_rates";
    emit_list(out, q->initial.body_rates);
    out << YAML::EndMap;
    out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "mass" << YAML::Value << q->params.mass << YAML::Key << "inertia";
    emit_list(out, q->params.inertia);
    out << YAML::Key << "arm_length" << YAML::Value << q->params.arm_length << YAML::Key
        << "torque_constant" << YAML::Value << q->params.torque_constant << YAML::Key << "l"
        << YAML::Value << q->params.l << YAML::Key << "gravity" << YAML::Value << q->params.gravity;
    out << YAML::EndMap;
    out << YAML::Key << "gains" << YAML::Value << YAML::Flow << YAML::BeginMap
        << YAML::Key << "k_pos" << YAML::Value << q->gains.k_pos << YAML::Key << "k_vel" << YAML::Value
        << q->gains.k_vel << YAML::Key << "k_att" << YAML::Value << q->gains.k_att << YAML::Key
        << "k_rate" << YAML::Value << q->gains.k_rate << YAML::Key << "max_tilt" << YAML::Value
        << q->gains.max_tilt << YAML::Key << "max_accel" << YAML::Value << q->gains.max_accel
        << YAML::EndMap;
  }

  if (s.input_bounds) {
    out << YAML::Key << "input_bounds" << YAML::Value << YAML::BeginMap << YAML::Key << "lower";
    emit_list(out, s.input_bounds->lower);
    out << YAML::Key << "upper";
    emit_list(out, s.input_bounds->upper);
    out << YAML::EndMap;
  }

  out << YAML::Key << "obstacles" << YAML::Value << YAML::BeginSeq;
  for (const auto& o : s.obstacles) {
    out << YAML::BeginMap << YAML::Key << "vertices" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& v : o.footprint().vertices()) emit_list(out, v);
    out << YAML::EndSeq;
    out << YAML::Key << "velocity";
    emit_list(out, o.center_velocity());
    out << YAML::Key << "center";
    emit_list(out, o.center());
    if (o.extent()) {
      out << YAML::Key << "z_range" << YAML::Value << YAML::Flow << YAML::BeginSeq << o.extent()->z_min
          << o.extent()->z_max << YAML::EndSeq;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace polycone
