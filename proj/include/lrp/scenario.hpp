#pragma once

#include "lrp/geometry.hpp"
#include "lrp/positioning.hpp"
#include "lrp/radar.hpp"
#include "lrp/tracking.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace lrp {

enum class Method { kLut, kAmcl, kBoth };

/// Replaces the tracked fingerprint at one step by the geometric fingerprint of `position`.
struct FingerprintInjection {
  int step = 0;  // 1-based
  Point2d position = Point2d::Zero();
};

struct Scenario {
  Room room;
  LrpLayout layout;
  std::vector<Point2d> waypoints;
  double speed = 2.0;
  double period = 0.25;

  RadarParams radar = default_params();
  double noise_floor = 0.0;
  CfarConfig cfar;
  ChannelConfig channel;
  TrackingConfig tracking = TrackingConfig::for_resolution(0.075);
  AmclConfig amcl;
  double lut_delta = 0.075;
  double lut_fine = 0.01;

  int runs = 10;
  std::uint64_t seed = 42;
  int warmup = 0;
  Method method = Method::kBoth;
  int converged_from_step = 7;
  std::optional<FingerprintInjection> inject;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct PathSample {
  Pose pose;
  Point2d velocity = Point2d::Zero();
  /// Motion from this sample to the next (zero for the last sample).
  OdometryDelta odometry;
};

/// Constant-speed samples every `period` along the piecewise-linear path.
/// Headings follow the chord travelled into each sample (the first sample
/// uses the first chord), so rotate-then-translate odometry is exact.
std::vector<PathSample> interpolate_path(const std::vector<Point2d>& waypoints, double speed, double period);

struct StepRecord {
  int run = 0;
  int step = 0;  // 1-based
  Pose truth;
  std::optional<Point2d> lut;
  std::optional<Point2d> amcl;
  double err_lut = 0.0;
  double err_amcl = 0.0;
  int n_particles = 0;
  bool degraded = false;
};

struct StepStats {
  int step = 0;
  double lut_mean = 0.0;
  double lut_std = 0.0;
  double amcl_mean = 0.0;
  double amcl_std = 0.0;
};

struct Report {
  int runs = 0;
  int n_steps = 0;
  bool has_lut = false;
  bool has_amcl = false;
  int converged_from_step = 7;
  std::vector<StepRecord> records;  // ordered by (run, step)
  std::vector<StepStats> per_step;
  double lut_mean_error = 0.0;
  double amcl_mean_error = 0.0;
  double amcl_mean_error_converged = 0.0;
  /// First step from which the mean AMCL error stays at or below three range bins.
  int convergence_step = 0;
};

/// Fills per_step and aggregate fields from `records`.
void aggregate(Report& report, double range_resolution);

/// Runs every Monte Carlo run of the scenario. A prebuilt table may be passed in
/// to skip rebuilding it.
Report run_scenario(const Scenario& scenario, const LookupTable* table = nullptr);

/// Writes steps.csv and summary.json into `dir` (created if needed).
void emit_report(const Report& report, const std::filesystem::path& dir);

}  // namespace lrp
