#pragma once

#include "lrp/geometry.hpp"
#include "lrp/radar.hpp"

#include <optional>
#include <vector>

namespace lrp {

/// Scalar constant-velocity range track of one reflector.
struct Track {
  double distance = 0.0;
  double radial_velocity = 0.0;
  double variance = 1.0;
  int age = 0;
  int missed = 0;
  int type = 0;
  double known_rcs = 1.0;
};

struct TrackingConfig {
  double gate = 0.75;      // meters, 10 range bins
  double w_rcs_db = 3.0;   // dB per unit score
  double w_dist = 0.225;   // meters per unit score, 3 range bins
  double rcs_gate_db = 6.0;
  double process_noise = 0.25;  // (m/s^2)^2
  double r_var = 0.0375 * 0.0375;

  /// Defaults tied to a radar's range resolution.
  static TrackingConfig for_resolution(double range_resolution);
};

struct Prediction {
  double distance = 0.0;
  double variance = 0.0;
};

Prediction predict(const Track& track, double dt, double process_noise);

/// Scalar Kalman update of the distance; the velocity is taken from the matched detection.
Track kalman_update(const Track& track, const Prediction& prior, double measured_distance,
                    double measured_velocity, double r_var);

/// Gain of the update above; lies in (0, 1) for finite positive variances.
inline double kalman_gain(double prior_variance, double r_var) { return prior_variance / (prior_variance + r_var); }

/// Cost of explaining `detection` by a track predicted at `predicted_distance`.
double association_score(const Detection& detection, double predicted_distance, double known_rcs,
                         const TrackingConfig& cfg);

struct Association {
  /// Index into the detection list per track, or nullopt when the track coasts.
  std::vector<std::optional<std::size_t>> matches;
  double total_cost = 0.0;
};

/// Minimum-cost one-to-one assignment of detections to predicted tracks.
/// Detections beyond the distance gate or the RCS gate are unmatchable.
Association associate(const std::vector<Detection>& detections, const std::vector<Track>& tracks,
                      const std::vector<Prediction>& predictions, const TrackingConfig& cfg);

struct TrackerOutput {
  Fingerprint fingerprint;
  bool degraded = false;
  Association association;
};

/// Fixed-cardinality set of reflector tracks; one per layout reflector.
class TrackSet {
 public:
  TrackSet(const LrpLayout& layout, TrackingConfig cfg);

  bool initialized() const { return initialized_; }
  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackingConfig& config() const { return cfg_; }

  /// Processes one measurement epoch. The first call bootstraps by RCS only.
  TrackerOutput step(const std::vector<Detection>& detections, double dt);

  void reset();

 private:
  TrackerOutput bootstrap(const std::vector<Detection>& detections);
  Fingerprint current_fingerprint() const;

  std::vector<Track> tracks_;
  TrackingConfig cfg_;
  bool initialized_ = false;
};

}  // namespace lrp
