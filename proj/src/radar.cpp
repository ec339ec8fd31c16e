#include "lrp/radar.hpp"

#include <Eigen/Geometry>

#include <array>
#include <cmath>
#include <optional>
#include <random>

namespace lrp {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

int checked_bin_count(double ratio, const char* what) {
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-6 * std::max(1.0, ratio)) {
    throw InvalidParameterization(std::string(what) + " is not an integer bin count (" + std::to_string(ratio) + ")");
  }
  return static_cast<int>(rounded);
}

int wrap_index(long long i, long long n) {
  const long long r = i % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

}  // namespace

RadarParams design_params(double range_resolution, double max_range, double velocity_resolution, double max_velocity,
                          double carrier_freq) {
  if (!(range_resolution > 0.0) || !(max_range > 0.0) || !(velocity_resolution > 0.0) || !(max_velocity > 0.0) ||
      !(carrier_freq > 0.0)) {
    throw InvalidParameterization("radar parameters must be positive");
  }
  RadarParams p;
  p.carrier_freq = carrier_freq;
  p.n_range_bins = checked_bin_count(max_range / range_resolution, "max_range / range_resolution");
  p.n_doppler_bins = checked_bin_count(2.0 * max_velocity / velocity_resolution, "2 * max_velocity / velocity_resolution");
  p.max_range = max_range;
  p.max_velocity = max_velocity;
  p.range_resolution = max_range / p.n_range_bins;
  p.velocity_resolution = 2.0 * max_velocity / p.n_doppler_bins;
  p.bandwidth = kSpeedOfLight / (2.0 * p.range_resolution);
  p.chirp_interval = p.wavelength() / (4.0 * max_velocity);
  return p;
}

RadarParams default_params() { return design_params(0.075, 19.125, 0.3551, 5.6816, 60e9); }

double radar_equation_power(const RadarParams& params, double range, double rcs) {
  const double lambda = params.wavelength();
  const double r2 = range * range;
  return params.tx_power * params.tx_gain * params.rx_gain * lambda * lambda / (kFourPi * kFourPi * kFourPi * r2 * r2) *
         rcs;
}

double multipath_power(const RadarParams& params, const std::vector<double>& segments, const std::vector<double>& rcs) {
  if (segments.size() != rcs.size() + 1 || rcs.empty()) {
    throw std::invalid_argument("multipath_power: need N reflections and N + 1 segments");
  }
  const double lambda = params.wavelength();
  double p = params.tx_power * params.tx_gain * params.rx_gain * lambda * lambda /
             (kFourPi * kFourPi * segments[0] * segments[0]);
  for (std::size_t n = 0; n < rcs.size(); ++n) p *= rcs[n] / (kFourPi * segments[n + 1] * segments[n + 1]);
  return p;
}

double estimate_rcs(double received_power, double range, const RadarParams& params) {
  if (!(range > 0.0) || !(received_power > 0.0)) throw std::invalid_argument("estimate_rcs: power and range must be positive");
  const double lambda = params.wavelength();
  const double r2 = range * range;
  return received_power * kFourPi * kFourPi * kFourPi * r2 * r2 /
         (params.tx_power * params.tx_gain * params.rx_gain * lambda * lambda);
}

namespace {

// Mirror image of a point across one of the six room surfaces.
struct Surface {
  int axis;      // 0 = x, 1 = y, 2 = z
  double value;  // plane position along the axis
};

struct Image {
  Eigen::Matrix3d linear = Eigen::Matrix3d::Identity();
  Point3d offset = Point3d::Zero();

  Point3d apply(const Point3d& p) const { return linear * p + offset; }
  Image then(const Surface& s) const {
    Image out = *this;
    out.linear.row(s.axis) *= -1.0;
    out.offset(s.axis) = 2.0 * s.value - offset(s.axis);
    return out;
  }
};

std::array<Surface, 6> room_surfaces(const Room& room) {
  return {{{0, 0.0}, {0, room.width}, {1, 0.0}, {1, room.depth}, {2, 0.0}, {2, room.height}}};
}

bool on_face(const Point3d& p, const Surface& s, const Room& room) {
  constexpr double slack = 1e-9;
  const Point3d hi(room.width, room.depth, room.height);
  for (int a = 0; a < 3; ++a) {
    if (a == s.axis) continue;
    if (p(a) < -slack || p(a) > hi(a) + slack) return false;
  }
  return true;
}

// Where the segment from `from` to `to` crosses surface `s`.
std::optional<Point3d> cross_surface(const Point3d& from, const Point3d& to, const Surface& s, const Room& room) {
  const double denom = to(s.axis) - from(s.axis);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = (s.value - from(s.axis)) / denom;
  if (t < 0.0 || t > 1.0) return std::nullopt;
  Point3d hit = from + t * (to - from);
  hit(s.axis) = s.value;
  if (!on_face(hit, s, room)) return std::nullopt;
  return hit;
}

struct PathBuilder {
  const RadarParams& params;
  const ChannelConfig& cfg;
  std::vector<PropagationPath>& out;

  void emit(const std::vector<double>& segments, const std::vector<double>& rcs, double length_rate, bool is_lrp) const {
    for (double d : segments) {
      if (d < cfg.min_segment) return;
    }
    PropagationPath path;
    for (double d : segments) path.total_length += d;
    path.radial_velocity = 0.5 * length_rate;
    path.n_reflections = static_cast<int>(rcs.size());
    path.received_power =
        rcs.size() == 1 ? radar_equation_power(params, segments[0], rcs[0]) : multipath_power(params, segments, rcs);
    path.is_lrp_path = is_lrp;
    out.push_back(path);
  }
};

}  // namespace

std::vector<PropagationPath> simulate_channel(const LrpLayout& layout, const Room& room, const Pose& pose,
                                              const Point2d& velocity, const RadarParams& params,
                                              const ChannelConfig& cfg) {
  std::vector<PropagationPath> paths;
  const PathBuilder builder{params, cfg, paths};
  const Point3d radar(pose.x, pose.y, layout.radar_height);
  const Point3d v(velocity.x(), velocity.y(), 0.0);
  const auto surfaces = room_surfaces(room);

  // Single reflections: reflectors (radar equation) and bare surfaces.
  for (const Lrp& l : layout.lrps) {
    const Point3d los = l.position - radar;
    const double r = los.norm();
    if (r < cfg.min_segment) continue;
    builder.emit({r, r}, {l.rcs}, -2.0 * los.dot(v) / r, true);
  }
  if (cfg.reflection_order < 1) return paths;

  // d|X - I(X)|/dt for an image I(X) = A X + b of the moving radar.
  auto loop_rate = [&](const Image& img) {
    const Point3d diff = radar - img.apply(radar);
    const double n = diff.norm();
    return n > 0.0 ? diff.dot(v - img.linear * v) / n : 0.0;
  };

  for (const Surface& s : surfaces) {
    const Image img = Image{}.then(s);
    const double half = 0.5 * (radar - img.apply(radar)).norm();
    builder.emit({half, half}, {cfg.wall_rcs}, loop_rate(img), false);
  }
  if (cfg.reflection_order < 2) return paths;

  // Surface -> surface -> radar.
  for (const Surface& s1 : surfaces) {
    for (const Surface& s2 : surfaces) {
      if (s1.axis == s2.axis && s1.value == s2.value) continue;
      const Image img1 = Image{}.then(s1);
      const Image img12 = img1.then(s2);
      const auto p2 = cross_surface(radar, img12.apply(radar), s2, room);
      if (!p2) continue;
      const auto p1 = cross_surface(*p2, img1.apply(radar), s1, room);
      if (!p1) continue;
      builder.emit({(*p1 - radar).norm(), (*p2 - *p1).norm(), (radar - *p2).norm()}, {cfg.wall_rcs, cfg.wall_rcs},
                   loop_rate(img12), false);
    }
  }

  // Surface -> reflector -> radar, and its reverse.
  for (const Lrp& l : layout.lrps) {
    const Point3d los = l.position - radar;
    const double direct = los.norm();
    const double direct_rate = -los.dot(v) / std::max(direct, 1e-12);
    for (const Surface& s : surfaces) {
      const Image img = Image{}.then(s);
      const Point3d mirrored = img.apply(radar);
      const auto hit = cross_surface(l.position, mirrored, s, room);
      if (!hit) continue;
      const Point3d to_image = l.position - mirrored;
      const double image_rate = -to_image.dot(img.linear * v) / std::max(to_image.norm(), 1e-12);
      const double d0 = (*hit - radar).norm();
      const double d1 = (l.position - *hit).norm();
      const double rate = image_rate + direct_rate;
      builder.emit({d0, d1, direct}, {cfg.wall_rcs, l.rcs}, rate, false);
      builder.emit({direct, d1, d0}, {l.rcs, cfg.wall_rcs}, rate, false);
    }
  }
  return paths;
}

int range_bin_of(double one_way_length, const RadarParams& params) {
  return wrap_index(std::llround(one_way_length / params.range_resolution), params.n_range_bins);
}

int doppler_bin_of(double radial_velocity, const RadarParams& params) {
  return wrap_index(std::llround(radial_velocity / params.velocity_resolution + 0.5 * params.n_doppler_bins),
                    params.n_doppler_bins);
}

RangeDopplerMap synthesize_map(const std::vector<PropagationPath>& paths, const RadarParams& params, double noise_floor,
                               std::uint64_t noise_seed) {
  RangeDopplerMap map{Eigen::MatrixXd::Zero(params.n_range_bins, params.n_doppler_bins)};
  const Eigen::Vector3d taps(0.25, 0.5, 0.25);
  const Eigen::Matrix3d kernel = taps * taps.transpose();
  for (const PropagationPath& path : paths) {
    const int rb = range_bin_of(0.5 * path.total_length, params);
    const int db = doppler_bin_of(path.radial_velocity, params);
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dd = -1; dd <= 1; ++dd) {
        map.power(wrap_index(rb + dr, params.n_range_bins), wrap_index(db + dd, params.n_doppler_bins)) +=
            kernel(dr + 1, dd + 1) * path.received_power;
      }
    }
  }
  if (noise_floor > 0.0) {
    std::mt19937_64 rng(noise_seed);
    std::exponential_distribution<double> noise(1.0 / noise_floor);
    for (Eigen::Index j = 0; j < map.power.cols(); ++j) {
      for (Eigen::Index i = 0; i < map.power.rows(); ++i) map.power(i, j) += noise(rng);
    }
  }
  return map;
}

int cfar_training_cells(const CfarConfig& cfg) {
  const int outer = 2 * (cfg.train_cells + cfg.guard_cells) + 1;
  const int inner = 2 * cfg.guard_cells + 1;
  return outer * outer - inner * inner;
}

double cfar_threshold_factor(const CfarConfig& cfg) {
  if (!(cfg.pfa > 0.0 && cfg.pfa < 1.0)) throw std::invalid_argument("CFAR pfa must lie in (0, 1)");
  const double n = cfar_training_cells(cfg);
  return n * (std::pow(cfg.pfa, -1.0 / n) - 1.0);
}

std::vector<Detection> cfar_detect(const RangeDopplerMap& map, const RadarParams& params, const CfarConfig& cfg) {
  return cfar_detect(map, params, cfg, cfar_threshold_factor(cfg));
}

std::vector<Detection> cfar_detect(const RangeDopplerMap& map, const RadarParams& params, const CfarConfig& cfg,
                                   double threshold_factor) {
  const auto rows = static_cast<int>(map.range_bins());
  const auto cols = static_cast<int>(map.doppler_bins());
  const int outer = cfg.train_cells + cfg.guard_cells;
  if (cfg.train_cells < 1 || cfg.guard_cells < 0 || rows <= 2 * outer + 1 || cols <= 2 * outer + 1) {
    throw std::invalid_argument("cfar_detect: map too small for the CFAR window");
  }

  // Summed-area table over the map extended periodically by `outer` cells.
  const int pr = rows + 2 * outer;
  const int pc = cols + 2 * outer;
  Eigen::MatrixXd sat = Eigen::MatrixXd::Zero(pr + 1, pc + 1);
  for (int i = 0; i < pr; ++i) {
    for (int j = 0; j < pc; ++j) {
      sat(i + 1, j + 1) = map.power(wrap_index(i - outer, rows), wrap_index(j - outer, cols)) + sat(i, j + 1) +
                          sat(i + 1, j) - sat(i, j);
    }
  }
  // Sum of the square of half-width `h` centred on map cell (i, j).
  auto box = [&](int i, int j, int h) {
    const int r0 = i + outer - h;
    const int c0 = j + outer - h;
    const int r1 = i + outer + h + 1;
    const int c1 = j + outer + h + 1;
    return sat(r1, c1) - sat(r0, c1) - sat(r1, c0) + sat(r0, c0);
  };
  const double n_train = cfar_training_cells(cfg);

  std::vector<Detection> detections;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double cell = map.power(i, j);
      if (!(cell > 0.0)) continue;
      const double noise = (box(i, j, outer) - box(i, j, cfg.guard_cells)) / n_train;
      if (!(cell > threshold_factor * noise)) continue;
      bool is_peak = true;
      double integrated = 0.0;
      for (int di = -1; di <= 1 && is_peak; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          const double other = map.power(wrap_index(i + di, rows), wrap_index(j + dj, cols));
          integrated += other;
          if (di == 0 && dj == 0) continue;
          // Plateaus resolve to the first cell in scan order.
          const bool earlier = di < 0 || (di == 0 && dj < 0);
          if (earlier ? other >= cell : other > cell) {
            is_peak = false;
            break;
          }
        }
      }
      if (!is_peak) continue;
      Detection d;
      d.range_bin = i;
      d.doppler_bin = j;
      d.range = i * params.range_resolution;
      d.radial_velocity = (j - 0.5 * cols) * params.velocity_resolution;
      d.power = integrated;
      d.estimated_rcs = d.range > 0.0 ? estimate_rcs(integrated, d.range, params) : 0.0;
      detections.push_back(d);
    }
  }
  return detections;
}

}  // namespace lrp
