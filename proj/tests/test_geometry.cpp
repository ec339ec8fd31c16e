#include "doctest.h"

#include "lrp/geometry.hpp"

#include <algorithm>
#include <random>

using namespace lrp;

namespace {

LrpLayout layout_of(std::initializer_list<Point3d> positions, int type = 0) {
  LrpLayout layout;
  for (const auto& p : positions) layout.lrps.push_back({p, type, 1.0});
  return layout;
}

}  // namespace

TEST_CASE("slant distance examples") {
  const Pose origin(0.0, 0.0);
  CHECK(slant_distance(Lrp{Point3d(0, 0, 3)}, origin, 0.0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(slant_distance(Lrp{Point3d(3, 0, 3)}, origin, 0.0) == doctest::Approx(std::sqrt(18.0)).epsilon(1e-12));
  CHECK(slant_distance(Lrp{Point3d(0, 4, 0)}, Pose(3.0, 0.0, 1.2), 0.0) == doctest::Approx(5.0).epsilon(1e-12));
  // a raised radar shortens the vertical leg
  CHECK(slant_distance(Lrp{Point3d(0, 0, 3)}, origin, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("slant distance works for float scalars") {
  const float d = slant_distance<float>(Point3<float>(3.f, 0.f, 4.f), Point2<float>(0.f, 0.f), 0.f);
  CHECK(d == doctest::Approx(5.0f));
}

TEST_CASE("planar distance ignores height") {
  CHECK(planar_distance(Point3d(0, 0, 3), Point3d(3, 4, 0)) == doctest::Approx(5.0));
}

TEST_CASE("fingerprint of two same-type reflectors") {
  const LrpLayout layout = layout_of({Point3d(0, 0, 0), Point3d(4, 0, 0)});
  const Fingerprint a = fingerprint(layout, Point2d(0, 3));
  const Fingerprint b = fingerprint(layout, Point2d(4, 3));
  REQUIRE(a.distances[0].size() == 2);
  CHECK(a.distances[0][0] == doctest::Approx(3.0));
  CHECK(a.distances[0][1] == doctest::Approx(5.0));
  CHECK(a.distances[1].empty());
  CHECK(a == b);
}

TEST_CASE("fingerprint matches direct per-reflector recomputation") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  LrpLayout layout;
  for (int i = 0; i < 4; ++i) layout.lrps.push_back({Point3d(u(rng), u(rng), 3.0), i % 2, 1.0});
  for (int k = 0; k < 50; ++k) {
    const Point2d p(u(rng), u(rng));
    std::array<std::vector<double>, kNumTypes> expected;
    for (const Lrp& l : layout.lrps) {
      const double dx = p.x() - l.position.x();
      const double dy = p.y() - l.position.y();
      expected[l.type].push_back(std::sqrt(dx * dx + dy * dy + 9.0));
    }
    for (auto& v : expected) std::sort(v.begin(), v.end());
    const Fingerprint fp = fingerprint(layout, p);
    for (int t = 0; t < kNumTypes; ++t) {
      REQUIRE(fp.distances[t].size() == expected[t].size());
      for (std::size_t i = 0; i < expected[t].size(); ++i) CHECK(fp.distances[t][i] == doctest::Approx(expected[t][i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("fingerprint lists are sorted and concatenated type-first") {
  LrpLayout layout;
  layout.lrps = {{Point3d(4, 4, 0), 1, 1.0}, {Point3d(1, 0, 0), 0, 1.0}, {Point3d(3, 0, 0), 0, 1.0}};
  const Fingerprint fp = fingerprint(layout, Point2d(0, 0));
  CHECK(std::is_sorted(fp.distances[0].begin(), fp.distances[0].end()));
  const Eigen::VectorXd c = fp.concatenated();
  REQUIRE(c.size() == 3);
  CHECK(c(0) == doctest::Approx(1.0));
  CHECK(c(1) == doctest::Approx(3.0));
  CHECK(c(2) == doctest::Approx(std::sqrt(32.0)));
}

TEST_CASE("planar fingerprint drops heights") {
  const LrpLayout layout = layout_of({Point3d(3, 0, 3)});
  CHECK(planar_fingerprint(layout, Point2d(0, 0)).distances[0][0] == doctest::Approx(3.0));
  CHECK(fingerprint(layout, Point2d(0, 0)).distances[0][0] == doctest::Approx(std::sqrt(18.0)));
}

TEST_CASE("quantize examples") {
  Fingerprint fp;
  fp.distances[0] = {3.0, 5.0};
  CHECK(quantize(fp, 0.075).bins[0] == std::vector<int>{40, 66});

  Fingerprint zero;
  zero.distances[0] = {0.0};
  CHECK(quantize(zero, 0.3).bins[0] == std::vector<int>{0});

  Fingerprint diag;
  diag.distances[1] = {4.2426};
  const QuantizedFingerprint q = quantize(diag, 0.075);
  CHECK(q.bins[1] == std::vector<int>{56});
  CHECK(q.bins[0].empty());
}

TEST_CASE("quantize rejects non-positive bins") {
  Fingerprint fp;
  fp.distances[0] = {1.0};
  CHECK_THROWS_AS(quantize(fp, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(quantize(fp, -0.1), std::invalid_argument);
}

TEST_CASE("bin centers quantize back to the same bins") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 8.0);
  for (int k = 0; k < 200; ++k) {
    Fingerprint fp;
    fp.distances[0] = {u(rng), u(rng)};
    fp.distances[1] = {u(rng)};
    fp.sort();
    const QuantizedFingerprint q = quantize(fp, 0.075);
    const Fingerprint c = bin_centers(q);
    CHECK(quantize(c, 0.075) == q);
    for (int t = 0; t < kNumTypes; ++t) {
      for (std::size_t i = 0; i < fp.distances[t].size(); ++i) {
        CHECK(std::abs(c.distances[t][i] - fp.distances[t][i]) <= 0.0375 + 1e-12);
      }
    }
  }
}

TEST_CASE("quantized keys separate the two type lists") {
  QuantizedFingerprint a;
  a.bins[0] = {1, 2};
  QuantizedFingerprint b;
  b.bins[0] = {1};
  b.bins[1] = {2};
  CHECK(a.key() != b.key());
}

TEST_CASE("wrap_angle maps into [-pi, pi)") {
  const double pi = std::numbers::pi;
  CHECK(wrap_angle(pi) == doctest::Approx(-pi));
  CHECK(wrap_angle(3.0 * pi / 2.0) == doctest::Approx(-pi / 2.0));
  CHECK(wrap_angle(-3.0 * pi / 2.0) == doctest::Approx(pi / 2.0));
  CHECK(wrap_angle(0.25) == doctest::Approx(0.25));
  CHECK(Pose(0, 0, 2.0 * pi + 0.1).theta == doctest::Approx(0.1));
}

TEST_CASE("layout validation") {
  const Room room;
  LrpLayout ok = layout_of({Point3d(1, 1, 3), Point3d(4, 4, 3)});
  CHECK_NOTHROW(ok.validate(room));
  CHECK(ok.count_of_type(0) == 2);
  CHECK(ok.count_of_type(1) == 0);

  LrpLayout outside = layout_of({Point3d(6, 1, 3)});
  CHECK_THROWS_AS(outside.validate(room), InvalidLayout);

  LrpLayout bad_type = ok;
  bad_type.lrps[0].type = 2;
  CHECK_THROWS_AS(bad_type.validate(room), InvalidLayout);

  LrpLayout bad_rcs = ok;
  bad_rcs.lrps[1].rcs = 0.0;
  CHECK_THROWS_AS(bad_rcs.validate(room), InvalidLayout);

  LrpLayout uneven = ok;
  uneven.lrps[1].position.z() = 2.5;
  CHECK_THROWS_AS(uneven.validate(room), InvalidLayout);
  CHECK_NOTHROW(uneven.validate(room, false));

  CHECK_THROWS_AS(LrpLayout{}.validate(room), InvalidLayout);

  LrpLayout high_radar = ok;
  high_radar.radar_height = 5.0;
  CHECK_THROWS_AS(high_radar.validate(room), InvalidLayout);

  CHECK_THROWS_AS((Room{0.0, 5.0, 4.0}.validate()), InvalidLayout);
}
