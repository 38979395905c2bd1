#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "pvi/errors.hpp"
#include "pvi/polyhedra.hpp"
#include "pvi/rng.hpp"
#include "support/oracles.hpp"

using namespace pvi;

namespace {

bool has_vector(const std::vector<VectorXd>& vs, const VectorXd& v,
                double tol = 1e-9) {
  return std::any_of(vs.begin(), vs.end(),
                     [&](const VectorXd& w) { return (w - v).norm() < tol; });
}

VectorXd vec2(double a, double b) {
  VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("orthant generators") {
  const PolyhedralSet K = PolyhedralSet::orthant(2);
  const GeneratorRep g = generators(K);
  REQUIRE(g.vertices.size() == 1);
  CHECK(g.vertices[0].norm() == 0.0);
  REQUIRE(g.rays.size() == 2);
  CHECK(has_vector(g.rays, vec2(1, 0)));
  CHECK(has_vector(g.rays, vec2(0, 1)));
  CHECK(g.lineality.empty());
}

TEST_CASE("box generators are the four corners") {
  const PolyhedralSet K =
      PolyhedralSet::box(vec2(-1, 0), vec2(2, 3));
  const GeneratorRep g = generators(K);
  REQUIRE(g.vertices.size() == 4);
  CHECK(has_vector(g.vertices, vec2(-1, 0)));
  CHECK(has_vector(g.vertices, vec2(-1, 3)));
  CHECK(has_vector(g.vertices, vec2(2, 0)));
  CHECK(has_vector(g.vertices, vec2(2, 3)));
  CHECK(g.rays.empty());
  CHECK(g.lineality.empty());
}

TEST_CASE("whole space is pure lineality") {
  const PolyhedralSet K = PolyhedralSet::whole_space(3);
  const GeneratorRep g = generators(K);
  CHECK(g.vertices.size() == 1);
  CHECK(g.rays.empty());
  CHECK(g.lineality.size() == 3);
}

TEST_CASE("half plane mixes a ray and a lineality direction") {
  MatrixXd C(1, 2);
  C << -1, 0;
  const PolyhedralSet K(C, VectorXd::Zero(1));
  const GeneratorRep g = generators(K);
  CHECK(g.rays.size() == 1);
  CHECK(has_vector(g.rays, vec2(1, 0)));
  REQUIRE(g.lineality.size() == 1);
  CHECK(std::abs(std::abs(g.lineality[0](1)) - 1.0) < 1e-12);
}

TEST_CASE("equality constraints cut a line segment") {
  // x1 + x2 = 1 inside the unit box: segment from (1,0) to (0,1).
  MatrixXd C(4, 2);
  C << -1, 0, 0, -1, 1, 0, 0, 1;
  VectorXd b(4);
  b << 0, 0, 1, 1;
  MatrixXd E(1, 2);
  E << 1, 1;
  VectorXd d(1);
  d << 1;
  const PolyhedralSet K(C, b, E, d);
  const GeneratorRep g = generators(K);
  REQUIRE(g.vertices.size() == 2);
  CHECK(has_vector(g.vertices, vec2(1, 0)));
  CHECK(has_vector(g.vertices, vec2(0, 1)));
  CHECK(g.rays.empty());
  CHECK(g.lineality.empty());
}

TEST_CASE("emptiness detection") {
  MatrixXd C(2, 1);
  C << 1, -1;  // x <= -1 and x >= 2
  VectorXd b(2);
  b << -1, -2;
  CHECK_FALSE(is_nonempty(PolyhedralSet(C, b)));
  CHECK(is_nonempty(PolyhedralSet::orthant(3)));
  CHECK(is_nonempty(PolyhedralSet::whole_space(2)));
}

TEST_CASE("contains respects tolerances") {
  const PolyhedralSet K = PolyhedralSet::orthant(2);
  CHECK(contains(K, vec2(0.5, 0), 1e-9));
  CHECK(contains(K, vec2(-1e-12, 0), 1e-9));
  CHECK_FALSE(contains(K, vec2(-1e-3, 0), 1e-9));
}

TEST_CASE("recession cone of a translated orthant is the orthant cone") {
  // x1 >= 1, x2 >= -2: recession directions are the nonnegative quadrant.
  MatrixXd C(2, 2);
  C << -1, 0, 0, -1;
  VectorXd b(2);
  b << -1, 2;
  const PolyhedralCone cone = recession_cone(PolyhedralSet(C, b));
  const GeneratorRep g = generators(cone.as_set());
  CHECK(has_vector(g.rays, vec2(1, 0)));
  CHECK(has_vector(g.rays, vec2(0, 1)));
  CHECK(g.lineality.empty());
}

TEST_CASE("recession cone of a box is the origin") {
  const PolyhedralCone cone =
      recession_cone(PolyhedralSet::box(vec2(0, 0), vec2(1, 1)));
  const GeneratorRep g = generators(cone.as_set());
  CHECK(g.rays.empty());
  CHECK(g.lineality.empty());
}

TEST_CASE("dual cone of the orthant is itself") {
  const PolyhedralCone cone = recession_cone(PolyhedralSet::orthant(2));
  const GeneratorRep g = dual_cone(cone);
  CHECK(has_vector(g.rays, vec2(1, 0)));
  CHECK(has_vector(g.rays, vec2(0, 1)));
  CHECK(g.lineality.empty());
}

TEST_CASE("set equals its own translates along recession directions") {
  // K = K + K_inf, sampled: pushing any point along any recession ray stays
  // inside the set.
  MatrixXd C(3, 2);
  C << -1, 0, 0, -1, 1, -1;  // x1 >= 0, x2 >= 0, x1 - x2 <= 1
  VectorXd b(3);
  b << 0, 0, 1;
  const PolyhedralSet K(C, b);
  const GeneratorRep g = generators(K);
  const GeneratorRep rc = generators(recession_cone(K).as_set());
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const VectorXd x = sample_point(g, rng);
    REQUIRE(contains(K, x, 1e-8));
    for (const VectorXd& r : rc.rays) {
      for (double t : {0.5, 10.0, 1000.0}) {
        CHECK(contains(K, x + t * r, 1e-8));
      }
    }
  }
}

TEST_CASE("pseudo faces of the orthant") {
  const PolyhedralSet K = PolyhedralSet::orthant(2);
  const std::vector<PseudoFace> faces = pseudo_faces(K);
  REQUIRE(faces.size() == 4);
  CHECK(faces[0].alpha.empty());
  CHECK(faces[1].alpha == std::vector<int>{0});
  CHECK(faces[2].alpha == std::vector<int>{1});
  CHECK(faces[3].alpha == std::vector<int>{0, 1});
}

TEST_CASE("pseudo faces drop empty strata and keep interior samples") {
  // x1 >= 0, x2 >= 0, x1 + x2 <= 1, plus the unreachable x1 + x2 <= 3.
  MatrixXd C(4, 2);
  C << -1, 0, 0, -1, 1, 1, 1, 1;
  VectorXd b(4);
  b << 0, 0, 1, 3;
  const PolyhedralSet K(C, b);
  const std::vector<PseudoFace> faces = pseudo_faces(K);
  for (const PseudoFace& f : faces) {
    // Row 3 can never be active inside K.
    CHECK(std::find(f.alpha.begin(), f.alpha.end(), 3) == f.alpha.end());
    // The sample realizes the face: active rows tight, the rest slack.
    for (int i = 0; i < K.num_ineq(); ++i) {
      const double slack = K.b()(i) - K.C().row(i).dot(f.sample);
      const bool active =
          std::find(f.alpha.begin(), f.alpha.end(), i) != f.alpha.end();
      if (active) {
        CHECK(std::abs(slack) < 1e-7);
      } else {
        CHECK(slack > 1e-10);
      }
    }
  }
  // Strata with both x1 + x2 <= 1 rows active exist ({2} and pairs), the
  // two-active-vertex faces among them.
  const auto has_alpha = [&](std::vector<int> a) {
    return std::any_of(faces.begin(), faces.end(),
                       [&](const PseudoFace& f) { return f.alpha == a; });
  };
  CHECK(has_alpha({}));
  CHECK(has_alpha({0}));
  CHECK(has_alpha({1}));
  CHECK(has_alpha({2}));
  CHECK(has_alpha({0, 1}));
  CHECK(has_alpha({0, 2}));
  CHECK(has_alpha({1, 2}));
  CHECK_FALSE(has_alpha({0, 1, 2}));
}

TEST_CASE("sampled points land in exactly one enumerated stratum") {
  const PolyhedralSet K =
      PolyhedralSet::box(vec2(0, 0), vec2(1, 2));
  const std::vector<PseudoFace> faces = pseudo_faces(K);
  const GeneratorRep g = generators(K);
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    // Random convex combinations, occasionally snapped to the boundary so
    // nontrivial strata actually get hit.
    VectorXd x = sample_point(g, rng);
    if (trial % 3 == 1) x(0) = 0.0;
    if (trial % 3 == 2) x(1) = 2.0;
    std::vector<int> alpha;
    for (int i = 0; i < K.num_ineq(); ++i) {
      if (std::abs(K.b()(i) - K.C().row(i).dot(x)) < 1e-12) alpha.push_back(i);
    }
    int matches = 0;
    for (const PseudoFace& f : faces) matches += f.alpha == alpha ? 1 : 0;
    CHECK(matches == 1);
  }
}

TEST_CASE("face cap throws") {
  // Halfplanes tangent to the unit circle; 25 rows exceed the default cap.
  auto fan = [](int m) {
    MatrixXd C(m, 2);
    VectorXd b = VectorXd::Ones(m);
    for (int i = 0; i < m; ++i) {
      const double a = 2.0 * M_PI * i / m;
      C(i, 0) = std::cos(a);
      C(i, 1) = std::sin(a);
    }
    return PolyhedralSet(C, b);
  };
  CHECK_THROWS_AS(pseudo_faces(fan(25)), CapError);
  // The cap knob works in both directions around the row count.
  CHECK_THROWS_AS(pseudo_faces(fan(8), 7), CapError);
  CHECK(pseudo_faces(fan(8), 8).size() > 8);
}

TEST_CASE("licq holds on generic sets and fails on duplicated rows") {
  CHECK(licq_check(PolyhedralSet::orthant(3)).holds);
  CHECK(licq_check(PolyhedralSet::box(vec2(0, 0), vec2(1, 1))).holds);

  // The same halfplane written twice: both rows active together on the
  // boundary with dependent gradients.
  MatrixXd C(2, 2);
  C << -1, 0, -2, 0;
  const LicqVerdict v = licq_check(PolyhedralSet(C, VectorXd::Zero(2)));
  CHECK_FALSE(v.holds);
  REQUIRE(v.failing_alpha.size() == 2);
  CHECK(std::abs(v.witness(0)) < 1e-8);
}

TEST_CASE("lp agrees with the brute-force oracle") {
  const PolyhedralSet box = PolyhedralSet::box(vec2(-1, -2), vec2(3, 4));
  const GeneratorRep g = generators(box);
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const VectorXd c = rng.normal_vec(2);
    const LpResult lp = lp_minimize(c, box);
    const testing::BruteLp ref = testing::brute_lp(c, g);
    REQUIRE(lp.bounded == ref.bounded);
    if (lp.bounded) {
      CHECK(lp.value == doctest::Approx(ref.value).epsilon(1e-10));
    }
  }
}

TEST_CASE("lp reports unbounded rays on cones") {
  const PolyhedralSet K = PolyhedralSet::orthant(2);
  const LpResult lp = lp_minimize(vec2(-1, 0), K);
  REQUIRE_FALSE(lp.bounded);
  REQUIRE(lp.unbounded_ray.size() == 2);
  // The certified ray descends.
  CHECK(vec2(-1, 0).dot(lp.unbounded_ray) < -1e-10);
  CHECK(contains(recession_cone(K).as_set(), lp.unbounded_ray, 1e-9));
}

TEST_CASE("lp on a whole space is bounded only for the zero objective") {
  const PolyhedralSet K = PolyhedralSet::whole_space(2);
  CHECK_FALSE(lp_minimize(vec2(0.3, -0.7), K).bounded);
  CHECK(lp_minimize(vec2(0, 0), K).bounded);
}

TEST_CASE("sample_point stays inside the set") {
  const PolyhedralSet K = PolyhedralSet::orthant(3);
  const GeneratorRep g = generators(K);
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    CHECK(contains(K, sample_point(g, rng), 1e-9));
  }
}

TEST_CASE("input validation") {
  MatrixXd C(1, 2);
  C << 1, 0;
  CHECK_THROWS_AS(PolyhedralSet(C, VectorXd::Zero(2)), DimensionError);
  CHECK_THROWS_AS(
      PolyhedralSet(C, VectorXd::Zero(1), MatrixXd::Zero(1, 3),
                    VectorXd::Zero(1)),
      DimensionError);
}
