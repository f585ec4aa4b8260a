#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "polycone/error.hpp"
#include "polycone/io.hpp"

namespace polycone {

namespace {

constexpr double kPanelW = 520.0;
constexpr double kPanelH = 420.0;
constexpr double kMargin = 40.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct Box {
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();

  void add(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  void pad(double frac) {
    if (!std::isfinite(x0)) *this = {0.0, 1.0, 0.0, 1.0};
    const double dx = std::max(x1 - x0, 1e-6) * frac, dy = std::max(y1 - y0, 1e-6) * frac;
    x0 -= dx;
    x1 += dx;
    y0 -= dy;
    y1 += dy;
  }
};

struct Mapper {
  Box box;
  double ox, oy, sx, sy;

  Mapper(Box b, double left, double top, double w, double h, bool equal_aspect) : box(b), ox(left), oy(top) {
    sx = w / (box.x1 - box.x0);
    sy = h / (box.y1 - box.y0);
    if (equal_aspect) sx = sy = std::min(sx, sy);
  }
  double x(double v) const { return ox + (v - box.x0) * sx; }
  double y(double v) const { return oy + kPanelH - 2 * kMargin - (v - box.y0) * sy; }
};

void polyline(std::ostringstream& out, const std::vector<std::pair<double, double>>& pts, const Mapper& m,
              const std::string& style) {
  if (pts.empty()) return;
  out << "<polyline fill=\"none\" " << style << " points=\"";
  for (const auto& [x, y] : pts) {
    if (!std::isfinite(x) || !std::isfinite(y)) continue;
    out << fmt(m.x(x)) << ',' << fmt(m.y(y)) << ' ';
  }
  out << "\"/>\n";
}

}  // namespace

std::string render_svg(const TrajectoryLog& log) {
  if (log.steps.empty()) throw Error(ErrorCode::InvalidArgument, "cannot plot an empty log");

  std::ostringstream out;
  const double width = 2 * kPanelW, height = kPanelH;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kMargin << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << log.scenario
      << " (" << to_string(log.model) << ", " << to_string(log.filter) << "): " << to_string(log.status)
      << "</text>\n";

  // top-down panel
  Box world;
  for (const auto& s : log.steps) world.add(s.state(0), s.state(1));
  const double t_end = log.steps.back().t;
  for (const auto& o : log.obstacles) {
    for (const auto& v : o.footprint().vertices()) {
      world.add(v.x(), v.y());
      world.add(v.x() + o.center_velocity().x() * t_end, v.y() + o.center_velocity().y() * t_end);
    }
  }
  world.pad(0.05);
  const Mapper top(world, kMargin, kMargin, kPanelW - 2 * kMargin, kPanelH - 2 * kMargin, true);
  out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kPanelW - 2 * kMargin
      << "\" height=\"" << kPanelH - 2 * kMargin << "\" fill=\"none\" stroke=\"#ccc\"/>\n";

  for (const auto& o : log.obstacles) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& v : o.footprint().vertices()) pts.emplace_back(v.x(), v.y());
    pts.push_back(pts.front());
    polyline(out, pts, top, "stroke=\"black\" stroke-width=\"1.5\"");
    if (o.center_velocity().head<2>().norm() > 0.0) {
      const Vec2 shift = o.center_velocity().head<2>() * t_end;
      for (auto& [x, y] : pts) {
        x += shift.x();
        y += shift.y();
      }
      polyline(out, pts, top, "stroke=\"gray\" stroke-dasharray=\"4 3\"");
    }
    if (log.filter == BarrierKind::C3BF) {
      const double r = o.circumradius() + 0.5 * log.ego_width;
      out << "<circle cx=\"" << fmt(top.x(o.center().x())) << "\" cy=\"" << fmt(top.y(o.center().y()))
          << "\" r=\"" << fmt(r * top.sx) << "\" fill=\"none\" stroke=\"#c44\" stroke-dasharray=\"2 3\"/>\n";
    }
  }

  std::vector<std::pair<double, double>> path;
  for (const auto& s : log.steps) path.emplace_back(s.state(0), s.state(1));
  polyline(out, path, top, "stroke=\"#1f5fbf\" stroke-width=\"2\"");
  out << "<circle cx=\"" << fmt(top.x(path.front().first)) << "\" cy=\"" << fmt(top.y(path.front().second))
      << "\" r=\"4\" fill=\"#1f5fbf\"/>\n";

  // barrier time series
  std::vector<std::pair<double, double>> h_series, psi_series;
  Box series;
  for (const auto& s : log.steps) {
    double h = s.min_h();
    double psi = std::numeric_limits<double>::infinity();
    for (double p : s.psi) {
      if (!std::isnan(p)) psi = std::min(psi, p);
    }
    if (!std::isfinite(h)) h = std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(psi)) psi = std::numeric_limits<double>::quiet_NaN();
    h_series.emplace_back(s.t, h);
    psi_series.emplace_back(s.t, psi);
    series.add(s.t, h);
    series.add(s.t, psi);
  }
  series.add(0.0, 0.0);
  series.pad(0.05);
  const double left = kPanelW + kMargin;
  const Mapper ts(series, left, kMargin, kPanelW - 2 * kMargin, kPanelH - 2 * kMargin, false);
  out << "<rect x=\"" << left << "\" y=\"" << kMargin << "\" width=\"" << kPanelW - 2 * kMargin
      << "\" height=\"" << kPanelH - 2 * kMargin << "\" fill=\"none\" stroke=\"#ccc\"/>\n";
  polyline(out, {{series.x0, 0.0}, {series.x1, 0.0}}, ts, "stroke=\"#999\" stroke-dasharray=\"3 3\"");
  polyline(out, h_series, ts, "stroke=\"#1f5fbf\" stroke-width=\"1.5\"");
  polyline(out, psi_series, ts, "stroke=\"#d07a00\" stroke-width=\"1\"");
  const double label_y = kPanelH - 12;
  out << "<text x=\"" << left << "\" y=\"" << label_y
      << "\" font-family=\"sans-serif\" font-size=\"12\"><tspan fill=\"#1f5fbf\">min h</tspan>  "
         "<tspan fill=\"#d07a00\">min psi</tspan>  t in [0, "
      << fmt(t_end) << "] s, y in [" << fmt(series.y0) << ", " << fmt(series.y1) << "]</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace polycone
