#pragma once

#include "lrp/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

namespace lrp {

// ---------------------------------------------------------------------------
// Lookup table
// ---------------------------------------------------------------------------

struct LutEntry {
  Point2d center;
  int count = 0;
};

/// Quantized fingerprint -> representative position. Keys are
/// QuantizedFingerprint::key() vectors.
struct LookupTable {
  double bin_width = 0.0;
  std::array<int, kNumTypes> per_type{0, 0};
  std::map<std::vector<int>, LutEntry> entries;

  std::size_t size() const { return entries.size(); }
};

/// Sweeps a `fine_step` grid over the room and groups positions by quantized
/// slant fingerprint. Each entry's center is the member position closest to
/// the group's centroid, so every center quantizes back to its own key.
LookupTable build_lut(const LrpLayout& layout, const Room& room, double bin_width, double fine_step = 0.01);

/// Exact key match, falling back to the entry whose bin-center vector is
/// nearest in Euclidean distance (ties go to the smaller key).
Point2d lut_lookup(const LookupTable& table, const Fingerprint& fp);

// ---------------------------------------------------------------------------
// Adaptive Monte Carlo localization
// ---------------------------------------------------------------------------

/// Particle poses stored column-wise as (x, y, theta).
struct ParticleSet {
  Eigen::Matrix3Xd poses;
  Eigen::VectorXd weights;
  int iteration = 0;

  Eigen::Index size() const { return poses.cols(); }
  Pose pose(Eigen::Index i) const { return {poses(0, i), poses(1, i), poses(2, i)}; }
};

struct OdometryDelta {
  double turned_angle = 0.0;
  double traveled_distance = 0.0;
};

enum class PoseEstimator { kTopK, kWeightedMean };

struct AmclConfig {
  int n0 = 10000;
  int n_min = 500;
  double sigma_theta_deg = 5.0;
  double sigma_d = 0.05;
  double likelihood_sigma = 0.075;
  int top_k = 20;
  double top_radius = 0.15;
  bool adapt = true;
  double beta = 50.0;
  double range_resolution = 0.075;
  PoseEstimator estimator = PoseEstimator::kTopK;
};

/// Initial distribution: uniform over the room and all headings unless a pose is given.
struct AmclPrior {
  std::optional<Pose> point;
};

ParticleSet amcl_init(int n0, const AmclPrior& prior, const Room& room, std::uint64_t seed);

/// Replaces the weights by the normalized Gaussian fingerprint likelihood.
/// Returns false (and leaves uniform weights) when every likelihood underflows.
bool weight_particles(ParticleSet& set, const Fingerprint& fp_est, const LrpLayout& layout, double likelihood_sigma);

Pose estimate_pose(const ParticleSet& set, const AmclConfig& cfg);

/// Systematic low-variance resampling; returns source indices of the new particles.
std::vector<Eigen::Index> systematic_resample_indices(const Eigen::VectorXd& weights, Eigen::Index n_out,
                                                      std::mt19937_64& rng);
ParticleSet systematic_resample(const ParticleSet& set, Eigen::Index n_out, std::mt19937_64& rng);

/// Rotate by the turned angle, then move the traveled distance, each perturbed by zero-mean Gaussian noise.
void propagate(ParticleSet& set, const OdometryDelta& odo, double sigma_theta, double sigma_d, std::mt19937_64& rng);

/// Trace of the weighted covariance of the particle positions.
double positional_variance(const ParticleSet& set);

/// Population size for the next iteration.
int adapt_particle_count(const ParticleSet& set, const AmclConfig& cfg);

struct AmclStep {
  Pose estimate;
  ParticleSet next;
  bool degraded = false;
};

/// One iteration: weight, normalize, estimate, resample, propagate.
AmclStep amcl_step(const ParticleSet& set, const Fingerprint& fp_est, const OdometryDelta& odo, const LrpLayout& layout,
                   const AmclConfig& cfg, std::mt19937_64& rng);

}  // namespace lrp
