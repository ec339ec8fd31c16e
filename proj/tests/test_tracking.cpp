#include "doctest.h"

#include "lrp/tracking.hpp"

#include <random>

using namespace lrp;

namespace {

Detection det(double range, double rcs, double velocity = 0.0) {
  Detection d;
  d.range = range;
  d.radial_velocity = velocity;
  d.estimated_rcs = rcs;
  return d;
}

LrpLayout four_lrps() {
  LrpLayout layout;
  layout.lrps = {{Point3d(0.5, 0.5, 3.0), 0, 1.0},
                 {Point3d(4.5, 0.7, 3.0), 0, 1.0},
                 {Point3d(0.6, 4.4, 3.0), 1, 4.0},
                 {Point3d(4.2, 4.5, 3.0), 1, 4.0}};
  return layout;
}

// Exact per-reflector detections in layout order.
std::vector<Detection> exact_detections(const LrpLayout& layout, const Point2d& p, const Point2d& v) {
  std::vector<Detection> out;
  for (const Lrp& l : layout.lrps) {
    const Point3d los = l.position - Point3d(p.x(), p.y(), layout.radar_height);
    out.push_back(det(los.norm(), l.rcs, -los.head<2>().dot(v) / los.norm()));
  }
  return out;
}

}  // namespace

TEST_CASE("constant-velocity prediction") {
  Track t;
  t.distance = 5.0;
  t.radial_velocity = 1.0;
  t.variance = 0.01;
  const Prediction p = predict(t, 0.25, 0.25);
  CHECK(p.distance == doctest::Approx(5.25));
  CHECK(p.variance == doctest::Approx(0.01 + 0.25 * 0.0625));
  t.radial_velocity = 0.0;
  CHECK(predict(t, 0.25, 0.0).distance == 5.0);
  CHECK_THROWS_AS(predict(t, 0.0, 0.1), std::invalid_argument);
}

TEST_CASE("per-step range change at walking speed stays inside the gate") {
  const TrackingConfig cfg = TrackingConfig::for_resolution(0.075);
  CHECK(cfg.gate == doctest::Approx(0.75));
  CHECK(cfg.w_dist == doctest::Approx(0.225));
  CHECK(cfg.r_var == doctest::Approx(0.0375 * 0.0375));
  Track t;
  t.radial_velocity = -2.0;
  t.distance = 3.0;
  CHECK(std::abs(predict(t, 0.25, 0.0).distance - t.distance) <= 0.5);
  CHECK(0.5 < cfg.gate);
}

TEST_CASE("zero innovation keeps the mean and contracts the variance") {
  Track t;
  t.distance = 2.0;
  t.variance = 0.04;
  const Prediction prior{2.3, 0.05};
  const Track out = kalman_update(t, prior, 2.3, 0.4, 0.01);
  CHECK(out.distance == doctest::Approx(2.3));
  CHECK(out.variance < prior.variance);
  CHECK(out.radial_velocity == 0.4);
}

TEST_CASE("uninformative prior follows the measurement") {
  const Track out = kalman_update(Track{}, Prediction{0.0, 1e9}, 4.2, 0.0, 0.01);
  CHECK(out.distance == doctest::Approx(4.2).epsilon(1e-9));
  CHECK(out.variance == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("gain lies strictly between zero and one") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(1e-6, 10.0);
  for (int i = 0; i < 200; ++i) {
    const double p = u(rng);
    const double r = u(rng);
    const double k = kalman_gain(p, r);
    CHECK(k > 0.0);
    CHECK(k < 1.0);
    const Track out = kalman_update(Track{}, Prediction{1.0, p}, 1.5, 0.0, r);
    CHECK(out.variance < p);
    CHECK(out.variance < r);
  }
  CHECK_THROWS_AS(kalman_update(Track{}, Prediction{1.0, 1.0}, 1.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("Kalman smoothing beats raw measurements on a constant-velocity target") {
  const double dr = 0.075;
  int better = 0;
  double ratio_sum = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, dr);
    const double v = 1.5;
    const double dt = 0.25;
    Track t;
    t.distance = 2.0 + noise(rng);
    t.radial_velocity = v;
    t.variance = dr * dr;
    double raw = 0.0;
    double smooth = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double truth = 2.0 + v * dt * k;
      const double z = truth + noise(rng);
      t = kalman_update(t, predict(t, dt, 0.01), z, v, dr * dr);
      raw += (z - truth) * (z - truth);
      smooth += (t.distance - truth) * (t.distance - truth);
    }
    const double ratio = std::sqrt(smooth / raw);
    ratio_sum += ratio;
    if (ratio <= 0.8) ++better;
  }
  CHECK(ratio_sum / 100.0 <= 0.8);
  CHECK(better >= 95);
}

TEST_CASE("association score weights RCS and distance") {
  const TrackingConfig cfg;
  CHECK(association_score(det(3.0, 1.0), 3.0, 1.0, cfg) == doctest::Approx(0.0));
  CHECK(association_score(det(3.225, 1.0), 3.0, 1.0, cfg) == doctest::Approx(1.0));
  CHECK(association_score(det(3.0, from_db(3.0)), 3.0, 1.0, cfg) == doctest::Approx(1.0));
}

TEST_CASE("clean detections map one-to-one") {
  const TrackingConfig cfg;
  std::vector<Track> tracks(4);
  std::vector<Prediction> pred;
  const std::vector<double> ranges{3.1, 3.9, 4.6, 5.2};
  for (int i = 0; i < 4; ++i) {
    tracks[i].known_rcs = i < 2 ? 1.0 : 4.0;
    pred.push_back({ranges[i] + 0.02, 0.01});
  }
  // shuffled order
  const std::vector<Detection> dets{det(4.6, 4.0), det(3.1, 1.0), det(5.2, 4.0), det(3.9, 1.0)};
  const Association a = associate(dets, tracks, pred, cfg);
  REQUIRE(a.matches.size() == 4);
  CHECK(a.matches[0] == std::optional<std::size_t>(1));
  CHECK(a.matches[1] == std::optional<std::size_t>(3));
  CHECK(a.matches[2] == std::optional<std::size_t>(0));
  CHECK(a.matches[3] == std::optional<std::size_t>(2));
}

TEST_CASE("clutter with a wrong cross-section is ignored") {
  const TrackingConfig cfg;
  std::vector<Track> tracks(1);
  const std::vector<Prediction> pred{{3.0, 0.01}};
  const std::vector<Detection> dets{det(3.0, from_db(10.0)), det(3.1, 1.0)};
  const Association a = associate(dets, tracks, pred, cfg);
  CHECK(a.matches[0] == std::optional<std::size_t>(1));
  const Association none = associate({det(3.0, from_db(10.0))}, tracks, pred, cfg);
  CHECK_FALSE(none.matches[0].has_value());
}

TEST_CASE("association prefers the globally cheapest assignment") {
  const TrackingConfig cfg;
  std::vector<Track> tracks(2);
  // greedy would give detection 0 to track 0 and leave track 1 empty
  const std::vector<Prediction> pred{{3.00, 0.01}, {3.30, 0.01}};
  const std::vector<Detection> dets{det(3.10, 1.0), det(2.80, 1.0)};
  const Association a = associate(dets, tracks, pred, cfg);
  CHECK(a.matches[0] == std::optional<std::size_t>(1));
  CHECK(a.matches[1] == std::optional<std::size_t>(0));
  CHECK_THROWS_AS(associate(dets, tracks, {pred[0]}, cfg), std::invalid_argument);
}

TEST_CASE("associations are one-to-one") {
  const TrackingConfig cfg;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(1.0, 6.0);
  std::uniform_real_distribution<double> db(-4.0, 4.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Track> tracks(4);
    std::vector<Prediction> pred;
    for (auto& t : tracks) {
      t.known_rcs = from_db(db(rng));
      pred.push_back({u(rng), 0.01});
    }
    std::vector<Detection> dets;
    for (int i = 0; i < 6; ++i) dets.push_back(det(u(rng), from_db(db(rng))));
    const Association a = associate(dets, tracks, pred, cfg);
    std::vector<int> used(dets.size(), 0);
    for (std::size_t t = 0; t < tracks.size(); ++t) {
      if (!a.matches[t]) continue;
      ++used[*a.matches[t]];
      CHECK(std::abs(dets[*a.matches[t]].range - pred[t].distance) <= cfg.gate);
    }
    for (int n : used) CHECK(n <= 1);
  }
}

TEST_CASE("noiseless detections keep the fingerprint within half a range bin") {
  const LrpLayout layout = four_lrps();
  TrackSet set(layout, TrackingConfig::for_resolution(0.075));
  CHECK_FALSE(set.initialized());
  const Point2d v(2.0, 0.0);
  for (int k = 0; k < 12; ++k) {
    const Point2d p(1.0 + 0.5 * k * 0.25, 2.0);
    const TrackerOutput out = set.step(exact_detections(layout, p, v), 0.25);
    CHECK_FALSE(out.degraded);
    const Fingerprint truth = fingerprint(layout, p);
    for (int t = 0; t < kNumTypes; ++t) {
      for (std::size_t i = 0; i < truth.distances[t].size(); ++i) {
        CHECK(std::abs(out.fingerprint.distances[t][i] - truth.distances[t][i]) <= 0.0375);
      }
    }
  }
  CHECK(set.initialized());
  CHECK(set.tracks()[0].age == 12);
}

TEST_CASE("a missed reflector coasts on its prediction and flags the epoch") {
  const LrpLayout layout = four_lrps();
  TrackSet set(layout, TrackingConfig::for_resolution(0.075));
  const Point2d v(1.0, 0.5);
  set.step(exact_detections(layout, Point2d(2.0, 2.0), v), 0.25);
  const Track before = set.tracks()[2];
  auto dets = exact_detections(layout, Point2d(2.25, 2.125), v);
  dets.erase(dets.begin() + 2);
  const TrackerOutput out = set.step(dets, 0.25);
  CHECK(out.degraded);
  CHECK_FALSE(out.association.matches[2].has_value());
  CHECK(set.tracks()[2].missed == 1);
  CHECK(set.tracks()[2].distance == doctest::Approx(before.distance + 0.25 * before.radial_velocity));
  CHECK(set.tracks()[2].variance > before.variance);
  CHECK(set.tracks()[0].missed == 0);
}

TEST_CASE("coasting error grows with the unmodelled acceleration") {
  const double a = 0.8;
  const double dt = 0.25;
  Track t;
  t.distance = 3.0;
  t.radial_velocity = 0.5;
  t.variance = 1e-4;
  for (int k = 1; k <= 8; ++k) {
    const Prediction p = predict(t, dt, 0.25);
    t.distance = p.distance;
    t.variance = p.variance;
    const double tk = k * dt;
    const double truth = 3.0 + 0.5 * tk + 0.5 * a * tk * tk;
    CHECK(std::abs(t.distance - truth) <= 0.5 * a * tk * tk + 1e-12);
  }
}

TEST_CASE("bootstrap assigns by cross-section and reset clears the state") {
  const LrpLayout layout = four_lrps();
  TrackSet set(layout, TrackingConfig{});
  const TrackerOutput empty = set.step({}, 0.25);
  CHECK(empty.degraded);
  set.reset();
  CHECK_FALSE(set.initialized());
  const TrackerOutput out = set.step({det(2.0, 4.0), det(3.0, 1.0), det(4.0, 1.0), det(5.0, 4.0)}, 0.25);
  CHECK_FALSE(out.degraded);
  CHECK(out.fingerprint.distances[0] == std::vector<double>{3.0, 4.0});
  CHECK(out.fingerprint.distances[1] == std::vector<double>{2.0, 5.0});
}
