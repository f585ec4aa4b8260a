#include "polycone/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "polycone/error.hpp"

namespace polycone {

namespace {

constexpr double kAngleTieTol = 1e-12;

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double s = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}

std::vector<Vec2> drop_repeated(const std::vector<Vec2>& points) {
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    if (!p.allFinite()) throw Error(ErrorCode::InvalidObstacle, "non-finite vertex");
    if (out.empty() || (p - out.back()).norm() > 0.0) out.push_back(p);
  }
  while (out.size() > 1 && (out.front() - out.back()).norm() == 0.0) out.pop_back();
  return out;
}

// Strictly convex and simple, in either orientation. Returns +1 (CCW), -1 (CW) or 0.
int strict_convex_orientation(const std::vector<Vec2>& pts) {
  const std::size_t n = pts.size();
  if (n < 3) return 0;
  int sign = 0;
  double winding = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e0 = pts[(i + 1) % n] - pts[i];
    const Vec2 e1 = pts[(i + 2) % n] - pts[(i + 1) % n];
    const double c = cross2(e0, e1);
    if (c == 0.0) return 0;
    const int s = c > 0.0 ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign) return 0;
    winding += std::atan2(c, e0.dot(e1));
  }
  // a star-shaped self-intersecting input turns the same way but winds more than once
  if (std::abs(std::abs(winding) - 2.0 * std::numbers::pi) > 1e-6) return 0;
  return sign;
}

}  // namespace

std::vector<Vec2> convex_hull(std::vector<Vec2> points) {
  std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 3) return points;

  std::vector<Vec2> hull(2 * points.size());
  std::size_t k = 0;
  for (const auto& p : points) {
    while (k >= 2 && cross2(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
    const auto& p = points[i];
    while (k >= lower && cross2(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

ConvexPolygon::ConvexPolygon(std::vector<Vec2> points) {
  auto pts = drop_repeated(points);
  const int orientation = strict_convex_orientation(pts);
  if (orientation > 0) {
    vertices_ = std::move(pts);
  } else if (orientation < 0) {
    std::reverse(pts.begin() + 1, pts.end());
    vertices_ = std::move(pts);
  } else {
    vertices_ = convex_hull(std::move(pts));
  }
  if (vertices_.size() < 3 || !(area() > 0.0)) {
    throw Error(ErrorCode::InvalidObstacle, "polygon needs at least 3 non-collinear vertices");
  }
}

Vec2 ConvexPolygon::vertex_centroid() const {
  Vec2 c = Vec2::Zero();
  for (const auto& v : vertices_) c += v;
  return c / static_cast<double>(vertices_.size());
}

double ConvexPolygon::area() const {
  double a = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    a += cross2(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
  }
  return 0.5 * a;
}

double ConvexPolygon::signed_distance(const Vec2& p) const {
  const std::size_t n = vertices_.size();
  double dist = std::numeric_limits<double>::infinity();
  bool inside = true;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = vertices_[i];
    const Vec2& b = vertices_[(i + 1) % n];
    dist = std::min(dist, segment_distance(p, a, b));
    if (cross2(b - a, p - a) <= 0.0) inside = false;
  }
  return inside ? -dist : dist;
}

ConvexPolygon ConvexPolygon::translated(const Vec2& offset) const {
  ConvexPolygon out;
  out.vertices_.reserve(vertices_.size());
  for (const auto& v : vertices_) out.vertices_.push_back(v + offset);
  return out;
}

PolygonObstacle::PolygonObstacle(std::vector<Vec2> vertices, Vec3 center_velocity,
                                 std::optional<Vec3> center,
                                 std::optional<VerticalExtent> extent)
    : footprint_(std::move(vertices)), velocity_(center_velocity), extent_(extent) {
  if (!velocity_.allFinite()) throw Error(ErrorCode::InvalidObstacle, "non-finite velocity");
  if (extent_ && !(extent_->z_max > extent_->z_min)) {
    throw Error(ErrorCode::InvalidObstacle, "vertical extent must have z_max > z_min");
  }
  if (center) {
    center_ = *center;
  } else {
    const Vec2 c = footprint_.vertex_centroid();
    const double cz = extent_ ? 0.5 * (extent_->z_min + extent_->z_max) : 0.0;
    center_ = Vec3(c.x(), c.y(), cz);
  }
  if (!center_.allFinite() || !(footprint_.signed_distance(center_.head<2>()) < 0.0)) {
    throw Error(ErrorCode::InvalidObstacle, "center must lie strictly inside the polygon");
  }
}

PolygonObstacle::PolygonObstacle(ConvexPolygon footprint, Vec3 velocity, Vec3 center,
                                 std::optional<VerticalExtent> extent)
    : footprint_(std::move(footprint)), velocity_(velocity), center_(center), extent_(extent) {}

PolygonObstacle PolygonObstacle::at(double t) const {
  const Vec3 shift = velocity_ * t;
  std::optional<VerticalExtent> ext = extent_;
  if (ext) {
    ext->z_min += shift.z();
    ext->z_max += shift.z();
  }
  return PolygonObstacle(footprint_.translated(shift.head<2>()), velocity_, center_ + shift, ext);
}

double PolygonObstacle::circumradius() const {
  double r = 0.0;
  for (const auto& v : footprint_.vertices()) r = std::max(r, (v - center_.head<2>()).norm());
  return r;
}

double PolygonObstacle::signed_distance(const Vec3& p) const {
  const double dh = footprint_.signed_distance(p.head<2>());
  if (!extent_) return dh;
  const double dv = std::max(extent_->z_min - p.z(), p.z() - extent_->z_max);
  if (dh > 0.0 && dv > 0.0) return std::hypot(dh, dv);
  return std::max(dh, dv);
}

std::pair<std::size_t, std::size_t> select_cone_vertex_indices(const ConvexPolygon& polygon,
                                                               const Vec2& ego_center) {
  if (!(polygon.signed_distance(ego_center) > 0.0)) {
    throw Error(ErrorCode::EgoInsidePolygon, "ego center is inside or on the obstacle boundary");
  }
  // Bearings relative to the direction of an interior point all lie in (-pi, pi)
  // because a convex polygon seen from outside subtends less than pi.
  const Vec2 ref = polygon.vertex_centroid() - ego_center;
  std::size_t lo = 0;
  std::size_t hi = 0;
  double lo_angle = std::numeric_limits<double>::infinity();
  double hi_angle = -std::numeric_limits<double>::infinity();
  double lo_dist = 0.0;
  double hi_dist = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Vec2 r = polygon[i] - ego_center;
    const double angle = std::atan2(cross2(ref, r), ref.dot(r));
    const double dist = r.norm();
    if (angle < lo_angle - kAngleTieTol ||
        (std::abs(angle - lo_angle) <= kAngleTieTol && dist < lo_dist)) {
      lo = i;
      lo_angle = angle;
      lo_dist = dist;
    }
    if (angle > hi_angle + kAngleTieTol ||
        (std::abs(angle - hi_angle) <= kAngleTieTol && dist < hi_dist)) {
      hi = i;
      hi_angle = angle;
      hi_dist = dist;
    }
  }
  const bool lo_first = lo_dist < hi_dist || (lo_dist == hi_dist && lo < hi);
  return lo_first ? std::pair{lo, hi} : std::pair{hi, lo};
}

std::pair<Vec2, Vec2> select_cone_vertices(const ConvexPolygon& polygon, const Vec2& ego_center) {
  const auto [a, b] = select_cone_vertex_indices(polygon, ego_center);
  return {polygon[a], polygon[b]};
}

std::pair<Vec2, Vec2> select_cone_vertices(const PolygonObstacle& obstacle,
                                           const Vec2& ego_center) {
  return select_cone_vertices(obstacle.footprint(), ego_center);
}

std::pair<std::size_t, std::size_t> select_disc_vertex_indices(const ConvexPolygon& polygon,
                                                               const Vec2& ego_center, double radius) {
  if (!(polygon.signed_distance(ego_center) > 0.0)) {
    throw Error(ErrorCode::EgoInsidePolygon, "ego center is inside or on the obstacle boundary");
  }
  const Vec2 ref = polygon.vertex_centroid() - ego_center;
  std::size_t lo = 0;
  std::size_t hi = 0;
  double lo_angle = std::numeric_limits<double>::infinity();
  double hi_angle = -std::numeric_limits<double>::infinity();
  double lo_dist = 0.0;
  double hi_dist = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Vec2 r = polygon[i] - ego_center;
    const double dist = r.norm();
    const double angle = std::atan2(cross2(ref, r), ref.dot(r));
    const double spread = dist > radius ? std::asin(radius / dist) : 0.5 * std::numbers::pi;
    if (angle - spread < lo_angle - kAngleTieTol ||
        (std::abs(angle - spread - lo_angle) <= kAngleTieTol && dist < lo_dist)) {
      lo = i;
      lo_angle = angle - spread;
      lo_dist = dist;
    }
    if (angle + spread > hi_angle + kAngleTieTol ||
        (std::abs(angle + spread - hi_angle) <= kAngleTieTol && dist < hi_dist)) {
      hi = i;
      hi_angle = angle + spread;
      hi_dist = dist;
    }
  }
  const bool lo_first = lo_dist < hi_dist || (lo_dist == hi_dist && lo < hi);
  return lo_first ? std::pair{lo, hi} : std::pair{hi, lo};
}

namespace {

// One widened cone edge: the ray from the ego through `point`, its bearing
// relative to `ref` (unwrapped) and the bearing's rate of change.
struct Edge {
  Vec2 point;
  double bearing = 0.0;
  double rate = 0.0;
};

Edge segment_edge(const Vec2& extended, const Vec2& ego, const Vec2& ref, const Vec2& v_rel) {
  const Vec2 k = extended - ego;
  return {extended, std::atan2(cross2(ref, k), ref.dot(k)), cross2(k, v_rel) / k.squaredNorm()};
}

// Ray tangent to the disc of `radius` around `vertex` on side `sign`
// (+1 counter-clockwise of the vertex bearing).
Edge disc_edge(const Vec2& vertex, const Vec2& ego, const Vec2& ref, double radius, double sign,
               const Vec2& v_rel) {
  const Vec2 d = vertex - ego;
  const double d2 = d.squaredNorm();
  const double dist = std::sqrt(d2);
  const bool outside = dist > radius;
  const double spread = outside ? std::asin(radius / dist) : 0.5 * std::numbers::pi;
  const double len = outside ? std::sqrt(d2 - radius * radius) : radius;
  const double c = std::cos(spread), sn = sign * std::sin(spread);
  const Vec2 dir = Vec2(c * d.x() - sn * d.y(), sn * d.x() + c * d.y()) / dist;

  Edge e;
  e.point = ego + len * dir;
  e.bearing = std::atan2(cross2(ref, d), ref.dot(d)) + sign * spread;
  e.rate = cross2(d, v_rel) / d2;
  if (outside && radius > 0.0) e.rate -= sign * radius * d.dot(v_rel) / (d2 * len);
  return e;
}

Vec2 rotated(const Vec2& unit, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * unit.x() - s * unit.y(), s * unit.x() + c * unit.y()};
}

}  // namespace

ConeFrame build_cone_frame(const ConvexPolygon& polygon, const Vec2& polygon_velocity,
                           const EgoDisc& ego, const Vec2& ego_velocity, ConeOptions options) {
  if (!(ego.width >= 0.0) || !std::isfinite(ego.width)) {
    throw Error(ErrorCode::InvalidArgument, "ego width must be finite and non-negative");
  }
  const double radius = 0.5 * ego.width;
  const Vec2& c = ego.body_center;
  const auto [ia, ib] = options.widening == Widening::AlongSegment
                            ? select_cone_vertex_indices(polygon, c)
                            : select_disc_vertex_indices(polygon, c, radius);
  const Vec2 va = polygon[ia];
  const Vec2 vb = polygon[ib];
  const Vec2 ref = polygon.vertex_centroid() - c;

  ConeFrame f;
  f.vertex_a = va;
  f.vertex_b = vb;
  f.v_rel = polygon_velocity - ego_velocity;

  Edge ea, eb;
  if (options.widening == Widening::AlongSegment) {
    const Vec2 span = va - vb;
    const double span_len = span.norm();
    const Vec2 u = span_len > 0.0 ? Vec2(span / span_len) : Vec2::Zero();
    ea = segment_edge(va + radius * u, c, ref, f.v_rel);
    eb = segment_edge(vb - radius * u, c, ref, f.v_rel);
  } else {
    // a takes the counter-clockwise edge when its bearing is counter-clockwise of b
    double side = cross2(vb - c, va - c) >= 0.0 ? 1.0 : -1.0;
    if (ia == ib) side = 1.0;
    ea = disc_edge(va, c, ref, radius, side, f.v_rel);
    eb = disc_edge(vb, c, ref, radius, -side, f.v_rel);
  }
  f.extended_a = ea.point;
  f.extended_b = eb.point;
  if ((f.extended_a - f.extended_b).norm() <= 0.0) {
    throw Error(ErrorCode::DegenerateCone, "extended cone vertices coincide");
  }

  f.target = 0.5 * (va + vb);
  const Vec2 to_mid = f.target - c;
  const double p_norm = to_mid.norm();
  if (!(p_norm > 0.0)) throw Error(ErrorCode::DegenerateCone, "zero relative position");

  const Vec2 ka = f.extended_a - c;
  const Vec2 kb = f.extended_b - c;
  const Vec2 ref_hat = ref.normalized();

  if (options.axis == ConeAxis::Midpoint) {
    f.p_rel = to_mid;
    f.p_rel_rate = f.v_rel;
    const double cos_a = f.p_rel.dot(ka) / (p_norm * ka.norm());
    const double cos_b = f.p_rel.dot(kb) / (p_norm * kb.norm());
    // smaller cosine = larger angle; vertex_a already wins distance/order ties
    f.k_from_a = cos_a <= cos_b + kAngleTieTol;
    f.cos_phi = f.k_from_a ? cos_a : cos_b;
  } else {
    // axis halfway between the two edges; both edges then sit at the half-angle
    const double axis = 0.5 * (ea.bearing + eb.bearing);
    const double axis_rate = 0.5 * (ea.rate + eb.rate);
    const Vec2 p_hat = rotated(ref_hat, axis);
    const Vec2 p_perp(-p_hat.y(), p_hat.x());
    f.p_rel = p_norm * p_hat;
    f.p_rel_rate = (to_mid.dot(f.v_rel) / p_norm) * p_hat + p_norm * axis_rate * p_perp;
    f.k_from_a = true;
    f.cos_phi = std::cos(0.5 * std::abs(ea.bearing - eb.bearing));
  }
  f.k = f.k_from_a ? ka : kb;
  f.m = f.k_from_a ? kb : ka;
  const Edge& ek = f.k_from_a ? ea : eb;
  const Vec2 k_hat = f.k.normalized();
  f.k_hat_rate = ek.rate * Vec2(-k_hat.y(), k_hat.x());
  return f;
}

ConeFrame build_cone_frame(const PolygonObstacle& obstacle, const EgoDisc& ego,
                           const Vec2& ego_velocity, ConeOptions options) {
  return build_cone_frame(obstacle.footprint(), obstacle.center_velocity().head<2>(), ego,
                          ego_velocity, options);
}

PlaneBasis horizontal_basis() {
  PlaneBasis b;
  b << 1.0, 0.0,
       0.0, 1.0,
       0.0, 0.0;
  return b;
}

PlaneBasis vertical_basis(const ConvexPolygon& footprint) {
  const auto& v = footprint.vertices();
  const std::size_t n = v.size();
  double best_width = std::numeric_limits<double>::infinity();
  Vec2 normal = Vec2::UnitY();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 edge = (v[(i + 1) % n] - v[i]).normalized();
    const Vec2 outward(edge.y(), -edge.x());
    double width = 0.0;
    for (const auto& p : v) width = std::max(width, (v[i] - p).dot(outward));
    if (width < best_width - 1e-12) {
      best_width = width;
      normal = outward;
    }
  }
  PlaneBasis b;
  b << normal.x(), 0.0,
       normal.y(), 0.0,
       0.0,        1.0;
  return b;
}

SpatialCone project_3d(const PolygonObstacle& obstacle, const Vec3& ego_center, double ego_width,
                       const Vec3& ego_velocity, ConeOptions options) {
  SpatialCone out;
  const ConvexPolygon& footprint = obstacle.footprint();
  const Vec3& cdot = obstacle.center_velocity();

  if (footprint.signed_distance(ego_center.head<2>()) > 0.0) {
    const PlaneBasis b = horizontal_basis();
    out.horizontal = PlaneCone{
        build_cone_frame(footprint, b.transpose() * cdot,
                         EgoDisc{b.transpose() * ego_center, ego_width},
                         b.transpose() * ego_velocity, options),
        b};
  }

  if (const auto& ext = obstacle.extent()) {
    const PlaneBasis b = vertical_basis(footprint);
    const Vec2 n = b.col(0).head<2>();
    double s_min = std::numeric_limits<double>::infinity();
    double s_max = -s_min;
    for (const auto& v : footprint.vertices()) {
      s_min = std::min(s_min, n.dot(v));
      s_max = std::max(s_max, n.dot(v));
    }
    const ConvexPolygon rect({{s_min, ext->z_min}, {s_max, ext->z_min},
                              {s_max, ext->z_max}, {s_min, ext->z_max}});
    const Vec2 ego_plane = b.transpose() * ego_center;
    if (rect.signed_distance(ego_plane) > 0.0) {
      out.vertical = PlaneCone{
          build_cone_frame(rect, b.transpose() * cdot, EgoDisc{ego_plane, ego_width},
                           b.transpose() * ego_velocity, options),
          b};
    }
  }

  if (!out.horizontal && !out.vertical) {
    throw Error(ErrorCode::EgoInsideVolume, "ego center is inside the obstacle volume");
  }
  if (out.horizontal && out.vertical) {
    const double kh = out.horizontal->frame.k.norm();
    const double kv = out.vertical->frame.k.norm();
    out.chosen = kh <= kv + 1e-12 * std::max(kh, kv) ? ProjectionPlane::Horizontal
                                                     : ProjectionPlane::Vertical;
  } else {
    out.chosen = out.horizontal ? ProjectionPlane::Horizontal : ProjectionPlane::Vertical;
  }
  return out;
}

double distance_to_polygon(const Vec2& point, const PolygonObstacle& obstacle) {
  return obstacle.footprint().signed_distance(point);
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidObstacle: return "InvalidObstacle";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EgoInsidePolygon: return "EgoInsidePolygon";
    case ErrorCode::EgoInsideVolume: return "EgoInsideVolume";
    case ErrorCode::DegenerateCone: return "DegenerateCone";
    case ErrorCode::SingularAttitude: return "SingularAttitude";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::VanishingRelativeVelocity: return "VanishingRelativeVelocity";
    case ErrorCode::InsideVirtualObstacle: return "InsideVirtualObstacle";
    case ErrorCode::ZeroGradient: return "ZeroGradient";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace polycone
