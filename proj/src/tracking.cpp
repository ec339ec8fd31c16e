#include "lrp/tracking.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace lrp {

TrackingConfig TrackingConfig::for_resolution(double range_resolution) {
  TrackingConfig cfg;
  cfg.gate = 10.0 * range_resolution;
  cfg.w_dist = 3.0 * range_resolution;
  cfg.r_var = 0.25 * range_resolution * range_resolution;
  return cfg;
}

Prediction predict(const Track& track, double dt, double process_noise) {
  if (!(dt > 0.0)) throw std::invalid_argument("predict: dt must be positive");
  return {track.distance + track.radial_velocity * dt, track.variance + process_noise * dt * dt};
}

Track kalman_update(const Track& track, const Prediction& prior, double measured_distance, double measured_velocity,
                    double r_var) {
  if (!(r_var > 0.0)) throw std::invalid_argument("kalman_update: measurement variance must be positive");
  Track out = track;
  const double gain = kalman_gain(prior.variance, r_var);
  out.distance = std::max(0.0, prior.distance + gain * (measured_distance - prior.distance));
  out.variance = (1.0 - gain) * prior.variance;
  out.radial_velocity = measured_velocity;
  return out;
}

double association_score(const Detection& detection, double predicted_distance, double known_rcs,
                         const TrackingConfig& cfg) {
  const double rcs_db = detection.estimated_rcs > 0.0 ? to_db(detection.estimated_rcs) : -300.0;
  return std::abs(rcs_db - to_db(known_rcs)) / cfg.w_rcs_db + std::abs(detection.range - predicted_distance) / cfg.w_dist;
}

namespace {

bool gated(const Detection& d, double predicted_distance, double known_rcs, const TrackingConfig& cfg) {
  if (!(d.estimated_rcs > 0.0)) return false;
  if (std::abs(d.range - predicted_distance) > cfg.gate) return false;
  return std::abs(to_db(d.estimated_rcs) - to_db(known_rcs)) <= cfg.rcs_gate_db;
}

struct AssignmentSearch {
  const std::vector<std::vector<std::pair<std::size_t, double>>>& candidates;
  double miss_cost;
  std::vector<bool> used;
  std::vector<std::optional<std::size_t>> current;
  std::vector<std::optional<std::size_t>> best;
  double best_cost = std::numeric_limits<double>::infinity();

  void run(std::size_t track, double cost) {
    if (cost >= best_cost) return;
    if (track == candidates.size()) {
      best_cost = cost;
      best = current;
      return;
    }
    for (const auto& [det, c] : candidates[track]) {
      if (used[det]) continue;
      used[det] = true;
      current[track] = det;
      run(track + 1, cost + c);
      used[det] = false;
    }
    current[track].reset();
    run(track + 1, cost + miss_cost);
  }
};

}  // namespace

Association associate(const std::vector<Detection>& detections, const std::vector<Track>& tracks,
                      const std::vector<Prediction>& predictions, const TrackingConfig& cfg) {
  if (tracks.size() != predictions.size()) throw std::invalid_argument("associate: one prediction per track");
  std::vector<std::vector<std::pair<std::size_t, double>>> candidates(tracks.size());
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    for (std::size_t d = 0; d < detections.size(); ++d) {
      if (!gated(detections[d], predictions[t].distance, tracks[t].known_rcs, cfg)) continue;
      candidates[t].emplace_back(d, association_score(detections[d], predictions[t].distance, tracks[t].known_rcs, cfg));
    }
    std::sort(candidates[t].begin(), candidates[t].end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
  }
  // A miss costs more than any set of gated matches, so matchings are maximal.
  const double max_match = cfg.rcs_gate_db / cfg.w_rcs_db + cfg.gate / cfg.w_dist;
  AssignmentSearch search{candidates, static_cast<double>(tracks.size()) * max_match + 1.0,
                          std::vector<bool>(detections.size(), false),
                          std::vector<std::optional<std::size_t>>(tracks.size()), {}};
  search.run(0, 0.0);
  return {search.best, search.best_cost};
}

TrackSet::TrackSet(const LrpLayout& layout, TrackingConfig cfg) : cfg_(cfg) {
  for (const Lrp& l : layout.lrps) {
    Track t;
    t.type = l.type;
    t.known_rcs = l.rcs;
    t.variance = cfg_.r_var;
    tracks_.push_back(t);
  }
}

void TrackSet::reset() {
  for (Track& t : tracks_) {
    const Track fresh{.type = t.type, .known_rcs = t.known_rcs};
    t = fresh;
    t.variance = cfg_.r_var;
  }
  initialized_ = false;
}

Fingerprint TrackSet::current_fingerprint() const {
  Fingerprint fp;
  for (const Track& t : tracks_) fp.distances[static_cast<std::size_t>(t.type)].push_back(t.distance);
  fp.sort();
  return fp;
}

TrackerOutput TrackSet::bootstrap(const std::vector<Detection>& detections) {
  TrackerOutput out;
  out.association.matches.assign(tracks_.size(), std::nullopt);
  std::vector<bool> used(detections.size(), false);
  for (std::size_t t = 0; t < tracks_.size(); ++t) {
    Track& track = tracks_[t];
    std::optional<std::size_t> pick;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < detections.size(); ++d) {
      if (used[d] || !(detections[d].estimated_rcs > 0.0)) continue;
      const double miss = std::abs(to_db(detections[d].estimated_rcs) - to_db(track.known_rcs));
      if (miss < best) {
        best = miss;
        pick = d;
      }
    }
    if (pick) {
      used[*pick] = true;
      track.distance = detections[*pick].range;
      track.radial_velocity = detections[*pick].radial_velocity;
      out.association.matches[t] = pick;
    } else {
      out.degraded = true;
    }
    track.variance = cfg_.r_var;
    track.age = 1;
    track.missed = pick ? 0 : 1;
  }
  initialized_ = true;
  out.fingerprint = current_fingerprint();
  return out;
}

TrackerOutput TrackSet::step(const std::vector<Detection>& detections, double dt) {
  if (!initialized_) return bootstrap(detections);

  std::vector<Prediction> predictions;
  predictions.reserve(tracks_.size());
  for (const Track& t : tracks_) predictions.push_back(predict(t, dt, cfg_.process_noise));

  TrackerOutput out;
  out.association = associate(detections, tracks_, predictions, cfg_);
  for (std::size_t t = 0; t < tracks_.size(); ++t) {
    Track& track = tracks_[t];
    if (const auto& m = out.association.matches[t]) {
      const Detection& d = detections[*m];
      track = kalman_update(track, predictions[t], d.range, d.radial_velocity, cfg_.r_var);
      track.missed = 0;
    } else {
      track.distance = std::max(0.0, predictions[t].distance);
      track.variance = predictions[t].variance;
      ++track.missed;
      out.degraded = true;
    }
    ++track.age;
  }
  out.fingerprint = current_fingerprint();
  return out;
}

}  // namespace lrp
