#pragma once

#include "lrp/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lrp {

inline constexpr double kSpeedOfLight = 299'792'458.0;

class InvalidParameterization : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <typename Scalar>
Scalar to_db(Scalar linear) {
  return Scalar(10) * std::log10(linear);
}
template <typename Scalar>
Scalar from_db(Scalar db) {
  return std::pow(Scalar(10), db / Scalar(10));
}

/// Chirp-sequence FMCW parameterization. Powers in watts, gains linear.
struct RadarParams {
  double carrier_freq = 60e9;
  double bandwidth = 0.0;
  int n_range_bins = 0;
  int n_doppler_bins = 0;
  double chirp_interval = 0.0;
  double range_resolution = 0.0;
  double max_range = 0.0;
  double velocity_resolution = 0.0;
  double max_velocity = 0.0;
  double tx_power = 1.0;
  double tx_gain = 1.0;
  double rx_gain = 1.0;

  double wavelength() const { return kSpeedOfLight / carrier_freq; }
};

/// Derives bandwidth, bin counts and chirp interval from the requested
/// resolutions. Throws InvalidParameterization unless both bin counts are
/// integers to within 1e-6 relative.
RadarParams design_params(double range_resolution, double max_range, double velocity_resolution, double max_velocity,
                          double carrier_freq);

/// Parameters of the indoor demonstrator: 0.075 m / 19.125 m, 0.3551 m/s / 5.6816 m/s, 60 GHz.
RadarParams default_params();

template <typename Scalar>
Scalar rcs_spherical(Scalar diameter) {
  const Scalar r = diameter / Scalar(2);
  return std::numbers::pi_v<Scalar> * r * r;
}

template <typename Scalar>
Scalar rcs_trihedral(Scalar edge, Scalar wavelength) {
  const Scalar a2 = edge * edge;
  return Scalar(4) * std::numbers::pi_v<Scalar> * a2 * a2 / (Scalar(3) * wavelength * wavelength);
}

/// Monostatic radar equation: received power of a single reflection at range r.
double radar_equation_power(const RadarParams& params, double range, double rcs);

/// Received power of a path with N reflections. `segments` holds d_0..d_N
/// (N + 1 lengths), `rcs` holds sigma_1..sigma_N.
double multipath_power(const RadarParams& params, const std::vector<double>& segments, const std::vector<double>& rcs);

/// Inverse of the radar equation.
double estimate_rcs(double received_power, double range, const RadarParams& params);

struct PropagationPath {
  double total_length = 0.0;     // round trip, meters
  double radial_velocity = 0.0;  // rate of change of total_length / 2
  double received_power = 0.0;
  int n_reflections = 1;
  bool is_lrp_path = false;  // ground truth only
};

struct ChannelConfig {
  double wall_rcs = 0.1;
  /// Maximum number of scattering events per path (reflector hits included).
  int reflection_order = 2;
  /// Paths with a segment shorter than this are dropped (e.g. a radar sitting on the floor).
  double min_segment = 1e-3;
};

/// Geometric channel of a monostatic radar at `pose` moving with `velocity`:
/// direct reflector paths plus image-method bounces off the six room surfaces.
std::vector<PropagationPath> simulate_channel(const LrpLayout& layout, const Room& room, const Pose& pose,
                                              const Point2d& velocity, const RadarParams& params,
                                              const ChannelConfig& cfg = {});

/// Power spectrum indexed (range bin, Doppler bin). Doppler bin n_doppler/2 is zero velocity.
struct RangeDopplerMap {
  Eigen::MatrixXd power;

  Eigen::Index range_bins() const { return power.rows(); }
  Eigen::Index doppler_bins() const { return power.cols(); }
};

int range_bin_of(double one_way_length, const RadarParams& params);
int doppler_bin_of(double radial_velocity, const RadarParams& params);

/// Deposits each path with a 3x3 raised-cosine kernel (bins wrap modulo the
/// map size) and adds exponentially distributed noise of mean `noise_floor`.
RangeDopplerMap synthesize_map(const std::vector<PropagationPath>& paths, const RadarParams& params,
                               double noise_floor = 0.0, std::uint64_t noise_seed = 0);

struct CfarConfig {
  int train_cells = 8;
  int guard_cells = 2;
  double pfa = 1e-4;
};

/// Number of training cells in the 2D CA-CFAR ring.
int cfar_training_cells(const CfarConfig& cfg);
/// Threshold multiplier giving false-alarm probability `pfa` on exponential noise.
double cfar_threshold_factor(const CfarConfig& cfg);

struct Detection {
  double range = 0.0;
  double radial_velocity = 0.0;
  double power = 0.0;  // 3x3 integrated peak power
  double estimated_rcs = 0.0;
  int range_bin = 0;
  int doppler_bin = 0;
};

/// 2D cell-averaging CFAR with a 3x3 local-maximum requirement.
std::vector<Detection> cfar_detect(const RangeDopplerMap& map, const RadarParams& params, const CfarConfig& cfg = {});
std::vector<Detection> cfar_detect(const RangeDopplerMap& map, const RadarParams& params, const CfarConfig& cfg,
                                   double threshold_factor);

}  // namespace lrp
