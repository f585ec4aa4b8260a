#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "polycone/error.hpp"
#include "polycone/geometry.hpp"

using namespace polycone;

namespace {

std::vector<Vec2> unit_square() { return {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}; }

double angle_between(const Vec2& a, const Vec2& b) { return std::abs(oracle::angle_from(a, b)); }

bool same_point(const Vec2& a, const Vec2& b) { return (a - b).norm() < 1e-12; }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("convex polygon normalizes orientation and replaces non-convex input by its hull") {
    const ConvexPolygon cw({{-0.5, 0.5}, {0.5, 0.5}, {0.5, -0.5}, {-0.5, -0.5}});
    CHECK(cw.area() == doctest::Approx(1.0));
    const auto& v = cw.vertices();
    for (std::size_t i = 0; i < v.size(); ++i) {
      CHECK(cross2(v[(i + 1) % 4] - v[i], v[(i + 2) % 4] - v[(i + 1) % 4]) > 0.0);
    }

    const ConvexPolygon dented({{0, 0}, {2, 0}, {1, 0.5}, {2, 2}, {0, 2}});
    CHECK(dented.size() == 4);
    CHECK(dented.area() == doctest::Approx(4.0));

    CHECK(code_of([] { ConvexPolygon({{0, 0}, {1, 1}, {2, 2}}); }) == ErrorCode::InvalidObstacle);
    CHECK(code_of([] { ConvexPolygon({{0, 0}, {1, 0}}); }) == ErrorCode::InvalidObstacle);
    CHECK(code_of([] { ConvexPolygon({{0, 0}, {1, 0}, {0, NAN}}); }) == ErrorCode::InvalidObstacle);
  }

  TEST_CASE("obstacle construction checks center, extent and velocity") {
    CHECK(code_of([] { PolygonObstacle(unit_square(), Vec3::Zero(), Vec3(3, 0, 0)); }) ==
          ErrorCode::InvalidObstacle);
    CHECK(code_of([] { PolygonObstacle(unit_square(), Vec3::Zero(), std::nullopt, VerticalExtent{1, 1}); }) ==
          ErrorCode::InvalidObstacle);
    CHECK(code_of([] { PolygonObstacle(unit_square(), Vec3(INFINITY, 0, 0)); }) == ErrorCode::InvalidObstacle);

    const PolygonObstacle moving(unit_square(), Vec3(1.0, -2.0, 0.0));
    const auto later = moving.at(0.5);
    CHECK(later.center().x() == doctest::Approx(0.5));
    CHECK(later.center().y() == doctest::Approx(-1.0));
    CHECK(later.footprint()[0].x() == doctest::Approx(moving.footprint()[0].x() + 0.5));
    CHECK(moving.circumradius() == doctest::Approx(std::sqrt(0.5)));
  }

  TEST_CASE("tangent vertices of the unit square seen from the left") {
    const auto [a, b] = select_cone_vertices(ConvexPolygon(unit_square()), Vec2(-5, 0));
    const bool ok = (same_point(a, {-0.5, 0.5}) && same_point(b, {-0.5, -0.5})) ||
                    (same_point(a, {-0.5, -0.5}) && same_point(b, {-0.5, 0.5}));
    CHECK(ok);
  }

  TEST_CASE("tangent vertices of a triangle") {
    const auto [a, b] = select_cone_vertices(ConvexPolygon({{0, 0}, {1, 0}, {0, 1}}), Vec2(-1, -1));
    const bool ok = (same_point(a, {1, 0}) && same_point(b, {0, 1})) ||
                    (same_point(a, {0, 1}) && same_point(b, {1, 0}));
    CHECK(ok);
  }

  TEST_CASE("closer tangent vertex comes first") {
    const auto [a, b] = select_cone_vertices(ConvexPolygon(unit_square()), Vec2(-5, 2));
    CHECK(same_point(a, {-0.5, -0.5}));
    CHECK(same_point(b, {0.5, 0.5}));
  }

  TEST_CASE("ego inside or on the boundary is rejected") {
    const ConvexPolygon sq(unit_square());
    CHECK(code_of([&] { select_cone_vertices(sq, Vec2(0.1, 0.2)); }) == ErrorCode::EgoInsidePolygon);
    CHECK(code_of([&] { select_cone_vertices(sq, Vec2(0.5, 0.0)); }) == ErrorCode::EgoInsidePolygon);
    CHECK(code_of([&] { build_cone_frame(sq, Vec2::Zero(), EgoDisc{{0, 0}, 0.2}, Vec2::Zero()); }) ==
          ErrorCode::EgoInsidePolygon);
  }

  TEST_CASE("tangent selection matches the brute-force pair oracle") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
      const auto pts = oracle::random_convex(rng);
      const ConvexPolygon poly(pts);
      const Vec2 ego = oracle::random_outside(rng, poly, 1e-3);
      const auto got = select_cone_vertex_indices(poly, ego);
      const auto want = oracle::tangent_pair(poly.vertices(), ego);
      REQUIRE(got == want);
      // every vertex lies in the sector spanned by the pair
      const Vec2 a = poly[got.first] - ego, b = poly[got.second] - ego;
      const double spread = angle_between(a, b);
      for (const auto& v : poly.vertices()) {
        CHECK(angle_between(a, v - ego) <= spread + 1e-9);
        CHECK(angle_between(b, v - ego) <= spread + 1e-9);
      }
    }
  }

  TEST_CASE("cone frame for the unit square, w = 0 and w = 1") {
    const ConvexPolygon sq(unit_square());
    const auto f0 = build_cone_frame(sq, Vec2::Zero(), EgoDisc{{-5, 0}, 0.0}, Vec2::Zero(), kSegmentCone);
    CHECK(f0.target.x() == doctest::Approx(-0.5));
    CHECK(f0.target.y() == doctest::Approx(0.0));
    CHECK(f0.p_rel.x() == doctest::Approx(4.5));
    CHECK(f0.p_rel.y() == doctest::Approx(0.0));
    CHECK(f0.cos_phi == doctest::Approx(4.5 / std::hypot(4.5, 0.5)).epsilon(1e-12));
    CHECK(f0.cos_phi == doctest::Approx(0.99387).epsilon(1e-5));
    CHECK(angle_between(f0.k, f0.p_rel) == doctest::Approx(angle_between(f0.m, f0.p_rel)));

    const auto f1 = build_cone_frame(sq, Vec2::Zero(), EgoDisc{{-5, 0}, 1.0}, Vec2::Zero(), kSegmentCone);
    const bool ext = (same_point(f1.extended_a, {-0.5, 1.0}) && same_point(f1.extended_b, {-0.5, -1.0})) ||
                     (same_point(f1.extended_a, {-0.5, -1.0}) && same_point(f1.extended_b, {-0.5, 1.0}));
    CHECK(ext);
    CHECK(f1.cos_phi == doctest::Approx(4.5 / std::hypot(4.5, 1.0)).epsilon(1e-12));
    CHECK(f1.cos_phi == doctest::Approx(0.97618).epsilon(1e-5));
  }

  TEST_CASE("segment cone invariants on random polygons") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 2000; ++trial) {
      const ConvexPolygon poly(oracle::random_convex(rng));
      const Vec2 ego = oracle::random_outside(rng, poly, 1e-2);
      const double w = oracle::uniform(rng, 0.0, 1.0);
      const Vec2 ego_v(oracle::uniform(rng, -1, 1), oracle::uniform(rng, -1, 1));
      const auto f = build_cone_frame(poly, Vec2::Zero(), EgoDisc{ego, w}, ego_v, kSegmentCone);
      const auto [a, b] = select_cone_vertices(poly, ego);
      CHECK((f.target - 0.5 * (a + b)).norm() < 1e-12);
      CHECK((f.p_rel - (f.target - ego)).norm() < 1e-12);
      CHECK((f.v_rel + ego_v).norm() < 1e-12);
      CHECK(angle_between(f.k, f.p_rel) >= angle_between(f.m, f.p_rel) - 1e-12);
      CHECK(f.cos_phi == doctest::Approx(f.p_rel.dot(f.k) / (f.p_rel.norm() * f.k.norm())).epsilon(1e-12));
      const Vec2 u = (f.vertex_a - f.vertex_b).normalized();
      CHECK((f.extended_a - (f.vertex_a + 0.5 * w * u)).norm() < 1e-12);
      CHECK((f.extended_b - (f.vertex_b - 0.5 * w * u)).norm() < 1e-12);
    }
  }

  TEST_CASE("closer selected vertex supplies k") {
    std::mt19937_64 rng(13);
    int checked = 0;
    for (int trial = 0; trial < 2000; ++trial) {
      const ConvexPolygon poly(oracle::random_convex(rng));
      const Vec2 ego = oracle::random_outside(rng, poly, 1e-2);
      const auto f = build_cone_frame(poly, Vec2::Zero(), EgoDisc{ego, 0.0}, Vec2::Zero(), kSegmentCone);
      const double da = (f.vertex_a - ego).norm(), db = (f.vertex_b - ego).norm();
      if (std::abs(da - db) < 1e-9) continue;
      ++checked;
      CHECK(f.k_from_a);
      CHECK((f.k - (f.extended_a - ego)).norm() < 1e-12);
    }
    CHECK(checked > 1000);
  }

  TEST_CASE("widening is monotone for both cone constructions") {
    std::mt19937_64 rng(14);
    for (auto options : {kSegmentCone, kExactCone}) {
      for (int trial = 0; trial < 1000; ++trial) {
        const ConvexPolygon poly(oracle::random_convex(rng));
        const Vec2 ego = oracle::random_outside(rng, poly, 1.0);
        double prev = 2.0;
        for (double w = 0.0; w <= 1.6; w += 0.2) {
          const auto f = build_cone_frame(poly, Vec2::Zero(), EgoDisc{ego, w}, Vec2::Zero(), options);
          CHECK(f.cos_phi <= prev + 1e-12);
          prev = f.cos_phi;
        }
      }
    }
  }

  TEST_CASE("approaching along the axis widens the cone") {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 500; ++trial) {
      const ConvexPolygon poly(oracle::random_convex(rng));
      const Vec2 ego = oracle::random_outside(rng, poly, 0.5);
      const auto far = build_cone_frame(poly, Vec2::Zero(), EgoDisc{ego, 0.3}, Vec2::Zero(), kSegmentCone);
      const Vec2 closer = ego + 0.3 * far.p_rel;
      if (!(poly.signed_distance(closer) > 0.0)) continue;
      const auto near = build_cone_frame(poly, Vec2::Zero(), EgoDisc{closer, 0.3}, Vec2::Zero(), kSegmentCone);
      // the same vertex pair must still be selected for the comparison to hold
      if (!same_point(near.vertex_a, far.vertex_a) && !same_point(near.vertex_a, far.vertex_b)) continue;
      if (!same_point(near.vertex_b, far.vertex_a) && !same_point(near.vertex_b, far.vertex_b)) continue;
      CHECK(near.cos_phi < far.cos_phi);
    }
  }

  TEST_CASE("exact cone contains the obstacle grown by the ego disc") {
    std::mt19937_64 rng(16);
    for (int trial = 0; trial < 1000; ++trial) {
      const ConvexPolygon poly(oracle::random_convex(rng));
      const double w = oracle::uniform(rng, 0.0, 1.0);
      const Vec2 ego = oracle::random_outside(rng, poly, 0.5 * w + 0.05);
      const auto f = build_cone_frame(poly, Vec2::Zero(), EgoDisc{ego, w}, Vec2::Zero(), kExactCone);
      const double half = std::acos(std::clamp(f.cos_phi, -1.0, 1.0));
      // every point of every vertex disc lies inside the symmetric cone about p_rel
      for (const auto& v : poly.vertices()) {
        const Vec2 d = v - ego;
        const double off = angle_between(f.p_rel, d) + std::asin(std::min(1.0, 0.5 * w / d.norm()));
        CHECK(off <= half + 1e-9);
      }
      // and the two bounding discs touch the cone edges
      const double da = (f.vertex_a - ego).norm(), db = (f.vertex_b - ego).norm();
      const double ea = angle_between(f.p_rel, f.vertex_a - ego) + std::asin(0.5 * w / da);
      const double eb = angle_between(f.p_rel, f.vertex_b - ego) + std::asin(0.5 * w / db);
      CHECK(ea == doctest::Approx(half).epsilon(1e-9));
      CHECK(eb == doctest::Approx(half).epsilon(1e-9));
    }
  }

  TEST_CASE("signed distance examples") {
    const PolygonObstacle sq(unit_square());
    CHECK(distance_to_polygon({0, 0}, sq) == doctest::Approx(-0.5));
    CHECK(distance_to_polygon({1.5, 0}, sq) == doctest::Approx(1.0));
    CHECK(distance_to_polygon({1.5, 1.5}, sq) == doctest::Approx(std::sqrt(2.0)));
  }

  TEST_CASE("signed distance agrees with dense boundary sampling") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
      const ConvexPolygon poly(oracle::random_convex(rng));
      const Vec2 p(oracle::uniform(rng, -4, 4), oracle::uniform(rng, -4, 4));
      const double exact = poly.signed_distance(p);
      const double sampled = oracle::sampled_distance(poly.vertices(), p);
      CHECK(std::abs(exact - sampled) < 1e-9);
    }
  }

  TEST_CASE("prism signed distance") {
    const PolygonObstacle box(unit_square(), Vec3::Zero(), std::nullopt, VerticalExtent{0.0, 2.0});
    CHECK(box.signed_distance(Vec3(0, 0, 1)) == doctest::Approx(-0.5));
    CHECK(box.signed_distance(Vec3(0, 0, 3)) == doctest::Approx(1.0));
    CHECK(box.signed_distance(Vec3(1.5, 0, 3)) == doctest::Approx(std::sqrt(2.0)));
    CHECK(box.signed_distance(Vec3(1.5, 0, 1)) == doctest::Approx(1.0));
  }

  TEST_CASE("tall pillar projects to the horizontal plane") {
    const PolygonObstacle pillar(unit_square(), Vec3::Zero(), std::nullopt, VerticalExtent{0.0, 10.0});
    const Vec2 n = vertical_basis(pillar.footprint()).col(0).head<2>();
    const auto c = project_3d(pillar, Vec3(-5.0 * n.x(), -5.0 * n.y(), 5.0), 0.0);
    REQUIRE(c.horizontal);
    REQUIRE(c.vertical);
    CHECK(c.chosen == ProjectionPlane::Horizontal);
    CHECK(c.horizontal->frame.k.norm() < 0.8 * c.vertical->frame.k.norm());
    const Vec3 world_k = c.selected().basis * c.selected().frame.k;
    CHECK(world_k.z() == 0.0);
  }

  TEST_CASE("wide low wall projects to the vertical plane") {
    const PolygonObstacle wall({{-0.5, -10}, {0.5, -10}, {0.5, 10}, {-0.5, 10}}, Vec3::Zero(), std::nullopt,
                               VerticalExtent{0.0, 1.0});
    const auto c = project_3d(wall, Vec3(-5.0, 0.0, 0.5), 0.0);
    REQUIRE(c.vertical);
    CHECK(c.chosen == ProjectionPlane::Vertical);
    // the vertical plane is spanned by the thin direction and z
    CHECK(std::abs(c.vertical->basis(0, 0)) == doctest::Approx(1.0));
    CHECK(c.vertical->basis(2, 1) == doctest::Approx(1.0));
  }

  TEST_CASE("equal k lengths choose the horizontal plane") {
    const PolygonObstacle cube(unit_square(), Vec3::Zero(), std::nullopt, VerticalExtent{-0.5, 0.5});
    const PlaneBasis vb = vertical_basis(cube.footprint());
    const Vec2 n = vb.col(0).head<2>();
    const Vec3 ego(-5.0 * n.x(), -5.0 * n.y(), 0.0);
    const auto c = project_3d(cube, ego, 0.0);
    REQUIRE(c.horizontal);
    REQUIRE(c.vertical);
    CHECK(c.horizontal->frame.k.norm() == doctest::Approx(c.vertical->frame.k.norm()).epsilon(1e-12));
    CHECK(c.chosen == ProjectionPlane::Horizontal);
  }

  TEST_CASE("planes covering the ego are unavailable; a volume containing it is an error") {
    const PolygonObstacle pillar(unit_square(), Vec3::Zero(), std::nullopt, VerticalExtent{0.0, 1.0});
    const auto over = project_3d(pillar, Vec3(0.0, 0.0, 3.0), 0.0);
    CHECK_FALSE(over.horizontal);
    REQUIRE(over.vertical);
    CHECK(over.chosen == ProjectionPlane::Vertical);
    CHECK(code_of([&] { project_3d(pillar, Vec3(0.0, 0.0, 0.5), 0.0); }) == ErrorCode::EgoInsideVolume);
  }

  TEST_CASE("vertical basis is fixed per obstacle") {
    std::mt19937_64 rng(18);
    for (int trial = 0; trial < 200; ++trial) {
      const ConvexPolygon poly(oracle::random_convex(rng));
      const PlaneBasis b = vertical_basis(poly);
      CHECK((b.transpose() * b - Eigen::Matrix2d::Identity()).norm() < 1e-12);
      CHECK(b(2, 0) == 0.0);
      // the normal achieves the minimum width over all edge normals
      const Vec2 n = b.col(0).head<2>();
      auto width = [&](const Vec2& dir) {
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& v : poly.vertices()) {
          lo = std::min(lo, dir.dot(v));
          hi = std::max(hi, dir.dot(v));
        }
        return hi - lo;
      };
      for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2 e = (poly[(i + 1) % poly.size()] - poly[i]).normalized();
        CHECK(width(n) <= width(Vec2(-e.y(), e.x())) + 1e-12);
      }
    }
  }

  TEST_CASE("cone rates match finite differences of the cone geometry") {
    std::mt19937_64 rng(19);
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const ConvexPolygon poly(oracle::random_convex(rng));
      const double w = oracle::uniform(rng, 0.0, 0.8);
      const Vec2 ego = oracle::random_outside(rng, poly, 0.5 * w + 0.1);
      const Vec2 ev(oracle::uniform(rng, -1, 1), oracle::uniform(rng, -1, 1));
      const Vec2 ov(oracle::uniform(rng, -0.5, 0.5), oracle::uniform(rng, -0.5, 0.5));
      const double dt = 1e-6;
      const auto f = build_cone_frame(poly, ov, EgoDisc{ego, w}, ev, kExactCone);
      const auto fp = build_cone_frame(poly.translated(ov * dt), ov, EgoDisc{ego + ev * dt, w}, ev, kExactCone);
      const auto fm = build_cone_frame(poly.translated(-ov * dt), ov, EgoDisc{ego - ev * dt, w}, ev, kExactCone);
      // skip steps that switch the selected vertices
      if (!same_point(fp.vertex_a - ov * dt, f.vertex_a) || !same_point(fm.vertex_a + ov * dt, f.vertex_a) ||
          !same_point(fp.vertex_b - ov * dt, f.vertex_b) || !same_point(fm.vertex_b + ov * dt, f.vertex_b)) {
        continue;
      }
      ++checked;
      const Vec2 p_fd = (fp.p_rel - fm.p_rel) / (2 * dt);
      const Vec2 k_fd = (fp.k_hat() - fm.k_hat()) / (2 * dt);
      CHECK((p_fd - f.p_rel_rate).norm() < 1e-5 * (1.0 + f.p_rel_rate.norm()));
      CHECK((k_fd - f.k_hat_rate).norm() < 1e-5 * (1.0 + f.k_hat_rate.norm()));
    }
    CHECK(checked > 900);
  }

  TEST_CASE("midpoint axis moves with the relative velocity") {
    const ConvexPolygon sq(unit_square());
    const auto f = build_cone_frame(sq, Vec2(0.2, 0.1), EgoDisc{{-5, 1}, 0.4}, Vec2(1, 0), kSegmentCone);
    CHECK((f.p_rel_rate - f.v_rel).norm() < 1e-15);
  }
}
