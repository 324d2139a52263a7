#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gcsim/error.hpp"
#include "gcsim/geometry.hpp"
#include "gcsim/graph.hpp"
#include "gcsim/scene.hpp"
#include "support.hpp"

using namespace gcsim;
using gcsim::testing::plan_from;

namespace {

bool close(Vec2 a, Vec2 b, double tol) { return distance(a, b) <= tol; }

ObjectId add(Scene& s, Variant v, std::vector<Input> in) {
  ObjectSpec spec;
  spec.variant = v;
  spec.inputs = std::move(in);
  return s.add_object(spec);
}

// Reachability by repeated relaxation over an adjacency matrix.
std::vector<std::vector<bool>> floyd_warshall(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (auto [u, v] : edges) r[u][v] = true;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (r[i][k] && r[k][j]) r[i][j] = true;
  return r;
}

std::vector<std::pair<int, int>> random_dag(int n, double p, std::mt19937_64& rng) {
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::bernoulli_distribution coin(p);
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng)) e.emplace_back(perm[i], perm[j]);
  return e;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("project fixed points") {
  const Viewport v;
  CHECK(close(project(v, {0, 0}), {640, 360}, 1e-12));
  CHECK(close(project(v, {-5, 5}), {0, 0}, 1e-12));
  CHECK(close(project(v, {2.5, -2.5}), {960, 540}, 1e-12));
  CHECK(close(unproject(v, {640, 360}), {0, 0}, 1e-12));
  CHECK(close(unproject(v, {0, 0}), {-5, 5}, 1e-12));
  CHECK(close(unproject(v, {960, 540}), {2.5, -2.5}, 1e-12));
}

TEST_CASE("overridden window") {
  const Viewport v{0, 10, 0, 10, 1280, 720};
  CHECK(close(project(v, {5, 5}), {640, 360}, 1e-12));
}

TEST_CASE("degenerate viewport") {
  const Viewport flat{1, 1, -5, 5, 1280, 720};
  CHECK_THROWS_AS(project(flat, {0, 0}), Error);
  try {
    unproject(flat, {0, 0});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateViewport);
  }
}

TEST_CASE("projection round trip and axis orientation") {
  const Viewport v;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(v.x_min, v.x_max), uy(v.y_min, v.y_max);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p{ux(rng), uy(rng)};
    CHECK(distance(unproject(v, project(v, p)), p) <= 1e-9);
    const Vec2 q{p.x + 0.01, p.y + 0.01};
    CHECK(project(v, q).x > project(v, p).x);
    CHECK(project(v, q).y < project(v, p).y);
  }
}

TEST_CASE("midpoint and bisectors") {
  CHECK(close(midpoint({0, 0}, {2, 2}), {1, 1}, 1e-15));
  const Line b = angle_bisector({1, 0}, {0, 0}, {0, 1});
  CHECK(b.distance_to({0, 0}) < 1e-12);
  const Vec2 d = canonical_direction(b.direction);
  CHECK(close(d, {std::sqrt(0.5), std::sqrt(0.5)}, 1e-12));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 200; ++i) {
    const Vec2 a{u(rng), u(rng)}, c{u(rng), u(rng)};
    if (distance(a, c) < 1e-3) continue;
    CHECK(midpoint(a, c) == midpoint(c, a));
    const Line pb = perpendicular_bisector(a, c);
    for (double t : {-3.0, 0.0, 1.7, 10.0}) {
      const Vec2 p = pb.at(t);
      CHECK(std::abs(distance(p, a) - distance(p, c)) <= 1e-9);
    }
  }
}

TEST_CASE("tangent points from (2,0) to the unit circle") {
  const auto [t1, t2] = tangent_points({2, 0}, {0, 0}, 1.0);
  const Vec2 up{0.5, std::sqrt(3.0) / 2}, down{0.5, -std::sqrt(3.0) / 2};
  CHECK(((close(t1, up, 1e-12) && close(t2, down, 1e-12)) || (close(t1, down, 1e-12) && close(t2, up, 1e-12))));

  // Brute force: sample the circle and keep points where the radius is orthogonal to the tangent.
  std::vector<Vec2> found;
  const int n = 3600000;
  double prev = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double th = 2 * std::numbers::pi * k / n;
    const Vec2 t{std::cos(th), std::sin(th)};
    const double f = dot(t, Vec2{2, 0} - t);
    if (k > 0 && (f > 0) != (prev > 0)) found.push_back(t);
    prev = f;
  }
  REQUIRE(found.size() == 2);
  for (const Vec2& f : found) CHECK((close(f, up, 1e-5) || close(f, down, 1e-5)));
}

TEST_CASE("tangency property") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3, 3), ur(0.2, 2.0);
  for (int i = 0; i < 500; ++i) {
    const Vec2 o{u(rng), u(rng)};
    const double r = ur(rng);
    const Vec2 a{u(rng), u(rng)};
    if (distance(a, o) <= r * 1.01) {
      CHECK_THROWS_AS(tangent_points(a, o, r), Error);
      continue;
    }
    const auto [t1, t2] = tangent_points(a, o, r);
    for (const Vec2& t : {t1, t2}) {
      CHECK(std::abs(distance(t, o) - r) <= 1e-9);
      CHECK(std::abs(dot(t - o, a - t)) <= 1e-9);
    }
  }
}

TEST_CASE("degenerate derived inputs") {
  const Vec2 same[2] = {{1, 1}, {1, 1}};
  CHECK_THROWS_AS(evaluate_derived(DerivedKind::PerpendicularBisector, same), Error);
  CHECK_THROWS_AS(tangent_points({0.5, 0}, {0, 0}, 1.0), Error);
}

TEST_CASE("add_object and references") {
  Scene s;
  const ObjectId seg = add(s, Variant::Segment, {Vec2{0, 0}, Vec2{2, 0}});
  CHECK(s.size() == 1);
  CHECK(s.at(seg).variant == Variant::Segment);
  const ObjectId c = add(s, Variant::Circle, {Vec2{0, 0}, Vec2{1, 0}});
  CHECK(distance_to(s.at(c), {0, 0}) == doctest::Approx(1.0));
  try {
    add(s, Variant::AngleBisector, {ObjectId{99}, Vec2{0, 0}, Vec2{1, 1}});
    FAIL("expected an unresolved reference");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnresolvedRef);
  }
  try {
    add(s, Variant::Polygon, {Vec2{0, 0}, Vec2{0, 0}, Vec2{1, 1}});
    FAIL("expected a malformed polygon");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedSpec);
  }
  CHECK(s.verify().empty());
}

TEST_CASE("point_on_object") {
  Scene s;
  const GeoObject& circle = s.at(add(s, Variant::Circle, {Vec2{0, 0}, Vec2{1, 0}}));
  CHECK(point_on_object(circle, {1, 0}, 1e-9));
  CHECK_FALSE(point_on_object(circle, {1.01, 0}, 1e-6));
  const GeoObject& seg = s.at(add(s, Variant::Segment, {Vec2{0, 0}, Vec2{2, 0}}));
  CHECK_FALSE(point_on_object(seg, {3, 0}, 1e-6));
  CHECK(point_on_object(seg, {1.5, 0}, 1e-6));
}

TEST_CASE("anchors per variant") {
  Scene s;
  const auto seg = anchors(s.at(add(s, Variant::Segment, {Vec2{0, 0}, Vec2{4, 0}})));
  REQUIRE(seg.size() == 3);
  CHECK(seg[0] == Vec2{0, 0});
  CHECK(seg[1] == Vec2{4, 0});
  CHECK(seg[2] == Vec2{2, 0});
  const auto circ = anchors(s.at(add(s, Variant::Circle, {Vec2{1, 1}, Vec2{1, 3}})));
  REQUIRE(circ.size() == 2);
  CHECK(circ[0] == Vec2{1, 1});
  CHECK(circ[1] == Vec2{1, 3});
  const auto poly = anchors(s.at(add(s, Variant::Polygon, {Vec2{0, 0}, Vec2{2, 0}, Vec2{2, 2}, Vec2{0, 2}})));
  REQUIRE(poly.size() == 4);
  CHECK(poly[2] == Vec2{2, 2});
}

TEST_CASE("scene json round trip keeps the hash") {
  Scene s;
  add(s, Variant::Segment, {Vec2{0, 0}, Vec2{4, 0}});
  add(s, Variant::Circle, {Vec2{1, 1}, Vec2{1, 3}});
  const Scene back = Scene::from_json(s.to_json());
  CHECK(back.hash() == s.hash());
}

TEST_CASE("construction graph edges") {
  const auto square = build_construction_graph(plan_from(R"([
    {"function":"draw_polygon","args":{"points":[[0,0],[2,0],[2,2],[0,2]]}},
    {"function":"draw_segment","args":{"points":[[0,0],[2,2]]}}])"));
  REQUIRE(square.edges().size() == 1);
  CHECK(square.edges()[0] == std::pair{0, 1});

  const auto loose = build_construction_graph(plan_from(R"([
    {"function":"draw_point","args":{"points":[[0,0]]}},
    {"function":"draw_point","args":{"points":[[1,2]]}}])"));
  CHECK(loose.edges().empty());

  // P feeds two segments; the bisector needs both.
  const auto diamond = build_construction_graph(plan_from(R"([
    {"function":"draw_point","args":{"points":[[0,0]]}},
    {"function":"draw_segment","args":{"points":[[0,0],[2,0]]}},
    {"function":"draw_segment","args":{"points":[[0,0],[0,2]]}},
    {"function":"angle_bisector","args":{"points":[[2,0],[0,0],[0,2]]}}])"));
  for (auto e : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 3}, std::pair{2, 3}}) {
    CHECK(std::find(diamond.edges().begin(), diamond.edges().end(), e) != diamond.edges().end());
  }
  CHECK(diamond.reachable(0, 3));
  CHECK_FALSE(diamond.reachable(1, 2));
  CHECK_FALSE(diamond.reachable(3, 0));
}

TEST_CASE("topo_check") {
  const ConstructionGraph chain(3, {{0, 1}, {1, 2}});
  const int good[] = {0, 1, 2}, bad[] = {1, 0, 2}, dup[] = {0, 0, 2};
  CHECK(topo_check(chain, good));
  CHECK_FALSE(topo_check(chain, bad));
  try {
    topo_check(chain, dup);
    FAIL("expected NOT_A_PERMUTATION");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotAPermutation);
  }
  try {
    ConstructionGraph(3, {{0, 1}, {1, 2}, {2, 0}});
    FAIL("expected CYCLE_DETECTED");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CycleDetected);
  }
}

TEST_CASE("closure matches brute force on random DAGs") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 50);
    const auto edges = random_dag(n, 0.1, rng);
    const ConstructionGraph g(n, edges);
    const auto fw = floyd_warshall(n, edges);
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) CHECK(g.reachable(u, v) == fw[u][v]);

    // Any Kahn order, whatever the tie-break, respects the closure.
    const auto order = g.topological_order([&](const std::vector<int>& ready) { return static_cast<std::size_t>(rng() % ready.size()); });
    REQUIRE(static_cast<int>(order.size()) == n);
    CHECK(topo_check(g, order));
  }
}

}  // TEST_SUITE
