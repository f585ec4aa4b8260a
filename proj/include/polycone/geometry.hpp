#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace polycone {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
// Columns are orthonormal world-frame directions spanning a projection plane.
using PlaneBasis = Eigen::Matrix<double, 3, 2>;

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Convex polygon with counter-clockwise vertices.
///
/// Input that is already convex keeps its vertex order (reversed if it was
/// clockwise). Anything else is replaced by its convex hull, which is a
/// conservative over-approximation for cone construction since tangent
/// vertices always lie on the hull.
class ConvexPolygon {
 public:
  explicit ConvexPolygon(std::vector<Vec2> points);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  const Vec2& operator[](std::size_t i) const { return vertices_[i]; }

  Vec2 vertex_centroid() const;
  double area() const;
  /// Signed Euclidean distance; negative inside.
  double signed_distance(const Vec2& p) const;
  ConvexPolygon translated(const Vec2& offset) const;

 private:
  ConvexPolygon() = default;
  std::vector<Vec2> vertices_;
};

/// Convex hull by monotone chain, CCW, collinear points dropped.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

struct VerticalExtent {
  double z_min = 0.0;
  double z_max = 0.0;
};

/// A translating (never rotating) polygonal obstacle. For 3-D use it is a
/// vertical prism over the footprint; without an extent it is unbounded in z.
class PolygonObstacle {
 public:
  PolygonObstacle(std::vector<Vec2> vertices, Vec3 center_velocity = Vec3::Zero(),
                  std::optional<Vec3> center = std::nullopt,
                  std::optional<VerticalExtent> extent = std::nullopt);

  const ConvexPolygon& footprint() const { return footprint_; }
  const Vec3& center() const { return center_; }
  const Vec3& center_velocity() const { return velocity_; }
  const std::optional<VerticalExtent>& extent() const { return extent_; }

  /// Position after moving for `t` seconds at the constant center velocity.
  PolygonObstacle at(double t) const;

  /// Largest distance from the center to a footprint vertex.
  double circumradius() const;

  /// Signed distance to the prism (or the footprint, for planar use when
  /// there is no extent).
  double signed_distance(const Vec3& p) const;
  double signed_distance(const Vec2& p) const { return footprint_.signed_distance(p); }

 private:
  PolygonObstacle(ConvexPolygon footprint, Vec3 velocity, Vec3 center,
                  std::optional<VerticalExtent> extent);

  ConvexPolygon footprint_;
  Vec3 velocity_;
  Vec3 center_;
  std::optional<VerticalExtent> extent_;
};

struct EgoDisc {
  Vec2 body_center = Vec2::Zero();
  double width = 0.0;  // w, the predetermined ego diameter
};

/// Polygonal collision cone for one ego/obstacle pair, in 2-D plane coordinates.
struct ConeFrame {
  Vec2 vertex_a;    // selected tangent vertex closer to the ego
  Vec2 vertex_b;
  Vec2 extended_a;  // point on the widened edge through vertex_a (see Widening)
  Vec2 extended_b;
  Vec2 target;      // midpoint of vertex_a and vertex_b
  Vec2 p_rel;
  Vec2 v_rel;
  Vec2 k;           // ego -> extended vertex forming the larger angle with p_rel
  Vec2 m;
  double cos_phi = 1.0;
  bool k_from_a = true;
  // time derivatives from v_rel with the selected vertex pair held fixed
  Vec2 p_rel_rate = Vec2::Zero();
  Vec2 k_hat_rate = Vec2::Zero();

  Vec2 k_hat() const { return k.normalized(); }
};

/// How the cone is widened for the ego width w.
///   AlongSegment: each selected vertex is pushed w/2 outward along the segment
///     joining the two selected vertices.
///   VertexDisc: cone edges are the outermost rays tangent to discs of radius
///     w/2 around every vertex, i.e. the exact cone of the obstacle grown by the
///     ego disc. Extended points are the tangent points.
enum class Widening { AlongSegment, VertexDisc };

/// Direction of p_rel.
///   Midpoint: toward the midpoint of the two selected vertices; the cone is
///     symmetric about it with the larger of the two edge angles.
///   Bisector: halfway between the two widened edges, so the symmetric cone is
///     the widened cone itself. |p_rel| is still the distance to the midpoint.
enum class ConeAxis { Midpoint, Bisector };

struct ConeOptions {
  Widening widening = Widening::AlongSegment;
  ConeAxis axis = ConeAxis::Midpoint;
};

inline constexpr ConeOptions kSegmentCone{};
inline constexpr ConeOptions kExactCone{Widening::VertexDisc, ConeAxis::Bisector};

/// Tangent vertex indices (closer to the ego first).
std::pair<std::size_t, std::size_t> select_cone_vertex_indices(const ConvexPolygon& polygon,
                                                               const Vec2& ego_center);

std::pair<Vec2, Vec2> select_cone_vertices(const ConvexPolygon& polygon, const Vec2& ego_center);
std::pair<Vec2, Vec2> select_cone_vertices(const PolygonObstacle& obstacle, const Vec2& ego_center);

/// Vertex indices whose w/2 discs bound the grown cone (closer first).
std::pair<std::size_t, std::size_t> select_disc_vertex_indices(const ConvexPolygon& polygon,
                                                               const Vec2& ego_center, double radius);

ConeFrame build_cone_frame(const ConvexPolygon& polygon, const Vec2& polygon_velocity,
                           const EgoDisc& ego, const Vec2& ego_velocity,
                           ConeOptions options = {});
ConeFrame build_cone_frame(const PolygonObstacle& obstacle, const EgoDisc& ego,
                           const Vec2& ego_velocity, ConeOptions options = {});

enum class ProjectionPlane { Horizontal, Vertical };

struct PlaneCone {
  ConeFrame frame;
  PlaneBasis basis;  // plane coords -> world; the projection is basis * basis^T
};

struct SpatialCone {
  std::optional<PlaneCone> horizontal;
  std::optional<PlaneCone> vertical;
  ProjectionPlane chosen = ProjectionPlane::Horizontal;

  const PlaneCone& selected() const {
    return chosen == ProjectionPlane::Horizontal ? *horizontal : *vertical;
  }
};

/// Horizontal basis (world x, y).
PlaneBasis horizontal_basis();

/// Vertical plane fixed per obstacle: spanned by the footprint's minimum-width
/// direction and world z, so the projection never changes as the ego moves.
PlaneBasis vertical_basis(const ConvexPolygon& footprint);

/// Cones in the horizontal and vertical projection planes. The plane with the
/// shorter k wins; ties go horizontal. A plane in which the ego's projection
/// falls inside the obstacle's projection is unavailable.
SpatialCone project_3d(const PolygonObstacle& obstacle, const Vec3& ego_center, double ego_width,
                       const Vec3& ego_velocity = Vec3::Zero(),
                       ConeOptions options = {});

double distance_to_polygon(const Vec2& point, const PolygonObstacle& obstacle);

}  // namespace polycone
