#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <unistd.h>

#include "polycone/error.hpp"
#include "polycone/io.hpp"

namespace polycone {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_num(const std::string& s, std::size_t line) {
  if (s == "nan") return kNaN;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

int input_dim(ModelKind m) { return m == ModelKind::Quadrotor ? 4 : 2; }

}  // namespace

std::vector<std::string> state_columns(ModelKind model) {
  switch (model) {
    case ModelKind::Unicycle: return {"x", "y", "theta", "v", "omega"};
    case ModelKind::PointMass: return {"x", "y", "vx", "vy"};
    case ModelKind::Quadrotor:
      return {"x", "y", "z", "vx", "vy", "vz", "roll", "pitch", "yaw", "p", "q", "r"};
  }
  return {};
}

void write_log_csv(std::ostream& out, const TrajectoryLog& log) {
  out << "# format polycone-log " << kLogFormatVersion << '\n';
  out << "# scenario " << log.scenario << '\n';
  out << "# model " << to_string(log.model) << '\n';
  out << "# filter " << to_string(log.filter) << '\n';
  out << "# cone " << to_string(log.cone) << '\n';
  out << "# dt " << num(log.dt) << '\n';
  out << "# ego_width " << num(log.ego_width) << '\n';
  out << "# status " << to_string(log.status) << '\n';
  if (!log.failure.empty()) out << "# failure " << log.failure << '\n';
  for (const auto& o : log.obstacles) {
    // velocity, center, z range, vertex count, vertices
    out << "# obstacle";
    for (int i = 0; i < 3; ++i) out << ' ' << num(o.center_velocity()(i));
    for (int i = 0; i < 3; ++i) out << ' ' << num(o.center()(i));
    out << ' ' << num(o.extent() ? o.extent()->z_min : kNaN) << ' ' << num(o.extent() ? o.extent()->z_max : kNaN);
    out << ' ' << o.footprint().size();
    for (const auto& v : o.footprint().vertices()) out << ' ' << num(v.x()) << ' ' << num(v.y());
    out << '\n';
  }

  const int m = input_dim(log.model);
  std::vector<std::string> header{"t"};
  for (const auto& c : state_columns(log.model)) header.push_back(c);
  for (int j = 0; j < m; ++j) header.push_back("ref_" + std::to_string(j));
  for (int j = 0; j < m; ++j) header.push_back("u_" + std::to_string(j));
  header.insert(header.end(), {"min_clearance", "fallback", "zero_gradient"});
  for (std::size_t i = 0; i < log.obstacles.size(); ++i) {
    const auto s = std::to_string(i);
    header.insert(header.end(), {"h_" + s, "psi_" + s, "active_" + s, "cx_" + s, "cy_" + s, "cz_" + s});
  }
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';

  for (const auto& r : log.steps) {
    out << num(r.t);
    for (Eigen::Index i = 0; i < r.state.size(); ++i) out << ',' << num(r.state(i));
    for (Eigen::Index i = 0; i < r.reference.size(); ++i) out << ',' << num(r.reference(i));
    for (Eigen::Index i = 0; i < r.u_star.size(); ++i) out << ',' << num(r.u_star(i));
    out << ',' << num(r.min_clearance) << ',' << int(r.fallback_used) << ',' << int(r.zero_gradient);
    for (std::size_t i = 0; i < r.h.size(); ++i) {
      out << ',' << num(r.h[i]) << ',' << num(r.psi[i]) << ',' << int(r.active[i]);
      for (int k = 0; k < 3; ++k) out << ',' << num(r.centers[i](k));
    }
    out << '\n';
  }
}

TrajectoryLog read_log_csv(std::istream& in) {
  TrajectoryLog log;
  std::string line;
  std::size_t lineno = 0;
  bool have_model = false, have_header = false;
  std::size_t columns = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      std::istringstream ss(line.substr(2));
      std::string key;
      ss >> key;
      std::string rest;
      std::getline(ss >> std::ws, rest);
      if (key == "format") {
        if (rest != "polycone-log " + std::to_string(kLogFormatVersion)) fail("unsupported log format");
      } else if (key == "scenario") {
        log.scenario = rest;
      } else if (key == "model") {
        const auto m = parse_model_kind(rest);
        if (!m) fail("unknown model '" + rest + "'");
        log.model = *m;
        have_model = true;
      } else if (key == "filter") {
        const auto f = parse_barrier_kind(rest);
        if (!f) fail("unknown filter '" + rest + "'");
        log.filter = *f;
      } else if (key == "cone") {
        const auto c = parse_cone_formulation(rest);
        if (!c) fail("unknown cone formulation '" + rest + "'");
        log.cone = *c;
      } else if (key == "dt") {
        log.dt = parse_num(rest, lineno);
      } else if (key == "ego_width") {
        log.ego_width = parse_num(rest, lineno);
      } else if (key == "status") {
        const auto s = parse_terminal_status(rest);
        if (!s) fail("unknown status '" + rest + "'");
        log.status = *s;
      } else if (key == "failure") {
        log.failure = rest;
      } else if (key == "obstacle") {
        const auto f = split(rest, ' ');
        if (f.size() < 9) fail("truncated obstacle line");
        std::vector<double> v;
        for (const auto& s : f) v.push_back(parse_num(s, lineno));
        const auto n = static_cast<std::size_t>(v[8]);
        if (f.size() != 9 + 2 * n) fail("obstacle vertex count mismatch");
        std::vector<Vec2> pts;
        for (std::size_t i = 0; i < n; ++i) pts.emplace_back(v[9 + 2 * i], v[10 + 2 * i]);
        std::optional<VerticalExtent> ext;
        if (!std::isnan(v[6])) ext = VerticalExtent{v[6], v[7]};
        log.obstacles.emplace_back(std::move(pts), Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5]), ext);
      }
      continue;
    }
    if (!have_model) fail("missing model metadata");
    const auto fields = split(line, ',');
    const int ns = static_cast<int>(state_columns(log.model).size());
    const int m = input_dim(log.model);
    const std::size_t n_obs = log.obstacles.size();
    const std::size_t expected = 1 + ns + 2 * m + 3 + 6 * n_obs;
    if (!have_header) {
      if (fields.size() != expected || fields[0] != "t") fail("header does not match the metadata");
      have_header = true;
      columns = expected;
      continue;
    }
    if (fields.size() != columns) fail("expected " + std::to_string(columns) + " fields");
    std::size_t c = 0;
    auto next = [&] { return parse_num(fields[c++], lineno); };
    StepRecord r;
    r.t = next();
    r.state.resize(ns);
    for (int i = 0; i < ns; ++i) r.state(i) = next();
    r.reference.resize(m);
    for (int i = 0; i < m; ++i) r.reference(i) = next();
    r.u_star.resize(m);
    for (int i = 0; i < m; ++i) r.u_star(i) = next();
    r.min_clearance = next();
    r.fallback_used = next() != 0.0;
    r.zero_gradient = next() != 0.0;
    for (std::size_t i = 0; i < n_obs; ++i) {
      r.h.push_back(next());
      r.psi.push_back(next());
      r.active.push_back(next() != 0.0);
      const double x = next(), y = next(), z = next();
      r.centers.emplace_back(x, y, z);
    }
    log.steps.push_back(std::move(r));
  }
  if (!have_header) throw Error(ErrorCode::ParseError, "log has no header row");
  return log;
}

void save_log_csv(const std::string& path, const TrajectoryLog& log) {
  std::ostringstream ss;
  write_log_csv(ss, log);
  write_file_atomic(path, ss.str());
}

TrajectoryLog load_log_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  return read_log_csv(in);
}

LatencyStats latency_stats(const std::vector<double>& seconds) {
  LatencyStats s;
  if (seconds.empty()) return s;
  std::vector<double> us(seconds.size());
  std::transform(seconds.begin(), seconds.end(), us.begin(), [](double x) { return 1e6 * x; });
  std::sort(us.begin(), us.end());
  s.mean_us = std::accumulate(us.begin(), us.end(), 0.0) / static_cast<double>(us.size());
  const auto idx = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(us.size()))) - 1;
  s.p99_us = us[std::min(idx, us.size() - 1)];
  s.max_us = us.back();
  return s;
}

std::size_t minimal_intervention_violations(const TrajectoryLog& log) {
  std::size_t count = 0;
  for (const auto& r : log.steps) {
    if (!r.u_star.allFinite() || r.zero_gradient || r.fallback_used) continue;
    if (!r.all_psi_nonnegative()) continue;
    if ((r.u_star - r.reference).norm() > 1e-9) ++count;
  }
  return count;
}

nlohmann::json run_summary(const TrajectoryLog& log) {
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  std::size_t fallback = 0, zero_grad = 0, active = 0, filtered = 0;
  double intervention = 0.0;
  for (const auto& r : log.steps) {
    fallback += r.fallback_used;
    zero_grad += r.zero_gradient;
    if (std::any_of(r.active.begin(), r.active.end(), [](bool a) { return a; })) ++active;
    if (r.u_star.allFinite() && r.reference.allFinite()) {
      intervention += (r.u_star - r.reference).norm();
      ++filtered;
    }
  }
  const auto lat = latency_stats(log.filter_latency);
  nlohmann::json j;
  j["scenario"] = log.scenario;
  j["model"] = std::string(to_string(log.model));
  j["filter"] = std::string(to_string(log.filter));
  j["cone"] = std::string(to_string(log.cone));
  j["status"] = std::string(to_string(log.status));
  if (!log.failure.empty()) j["failure"] = log.failure;
  j["steps"] = log.steps.size();
  j["final_time"] = log.steps.empty() ? 0.0 : log.steps.back().t;
  j["min_clearance"] = finite_or_null(log.min_clearance());
  j["min_h"] = finite_or_null(log.min_h());
  j["mean_intervention"] = filtered ? intervention / static_cast<double>(filtered) : 0.0;
  j["active_steps"] = active;
  j["fallback_steps"] = fallback;
  j["zero_gradient_steps"] = zero_grad;
  j["minimal_intervention_violations"] = minimal_intervention_violations(log);
  j["latency_us"] = {{"mean", lat.mean_us}, {"p99", lat.p99_us}, {"max", lat.max_us}};
  return j;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::InvalidArgument, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::InvalidArgument, "cannot rename onto " + path + ": " + ec.message());
  }
}

int exit_code(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::Reached: return 0;
    case TerminalStatus::Collided: return 2;
    case TerminalStatus::FilterFailure: return 3;
    case TerminalStatus::Timeout: return 4;
  }
  return 1;
}

}  // namespace polycone
