#include "lrp/positioning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lrp {

LookupTable build_lut(const LrpLayout& layout, const Room& room, double bin_width, double fine_step) {
  if (!(bin_width > 0.0) || !(fine_step > 0.0)) throw std::invalid_argument("build_lut: steps must be positive");
  if (fine_step > 0.5 * bin_width + 1e-12) throw std::invalid_argument("build_lut: fine step must be at most half a bin");
  room.validate();

  LookupTable table;
  table.bin_width = bin_width;
  for (int t = 0; t < kNumTypes; ++t) table.per_type[static_cast<std::size_t>(t)] = layout.count_of_type(t);

  const int nx = static_cast<int>(std::floor(room.width / fine_step + 1e-9)) + 1;
  const int ny = static_cast<int>(std::floor(room.depth / fine_step + 1e-9)) + 1;
  auto grid_point = [&](int ix, int iy) {
    return Point2d(std::min(ix * fine_step, room.width), std::min(iy * fine_step, room.depth));
  };

  struct Accumulator {
    Point2d sum = Point2d::Zero();
    int count = 0;
    double best = std::numeric_limits<double>::infinity();
    Point2d representative;
  };
  std::map<std::vector<int>, Accumulator> groups;
  std::vector<std::map<std::vector<int>, Accumulator>::iterator> cell_group;
  cell_group.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      const Point2d p = grid_point(ix, iy);
      auto it = groups.try_emplace(quantize(fingerprint(layout, p), bin_width).key()).first;
      it->second.sum += p;
      ++it->second.count;
      cell_group.push_back(it);
    }
  }
  std::size_t k = 0;
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      const Point2d p = grid_point(ix, iy);
      Accumulator& acc = cell_group[k++]->second;
      const double d = (p - acc.sum / acc.count).squaredNorm();
      if (d < acc.best) {
        acc.best = d;
        acc.representative = p;
      }
    }
  }
  for (const auto& [key, acc] : groups) table.entries.emplace(key, LutEntry{acc.representative, acc.count});
  return table;
}

Point2d lut_lookup(const LookupTable& table, const Fingerprint& fp) {
  if (table.entries.empty()) throw std::invalid_argument("lut_lookup: empty table");
  for (std::size_t t = 0; t < fp.distances.size(); ++t) {
    if (static_cast<int>(fp.distances[t].size()) != table.per_type[t]) {
      throw std::invalid_argument("lut_lookup: fingerprint cardinality does not match the table");
    }
  }
  const auto exact = table.entries.find(quantize(fp, table.bin_width).key());
  if (exact != table.entries.end()) return exact->second.center;

  std::vector<double> observed;
  for (const auto& list : fp.distances) observed.insert(observed.end(), list.begin(), list.end());
  const LutEntry* best = nullptr;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (const auto& [key, entry] : table.entries) {
    double d2 = 0.0;
    std::size_t i = 0;
    for (int bin : key) {
      if (bin < 0) continue;
      const double diff = (bin + 0.5) * table.bin_width - observed[i++];
      d2 += diff * diff;
    }
    if (d2 < best_d2) {
      best_d2 = d2;
      best = &entry;
    }
  }
  return best->center;
}

ParticleSet amcl_init(int n0, const AmclPrior& prior, const Room& room, std::uint64_t seed) {
  if (n0 < 1) throw std::invalid_argument("amcl_init: need at least one particle");
  ParticleSet set;
  set.poses.resize(3, n0);
  set.weights = Eigen::VectorXd::Constant(n0, 1.0 / n0);
  if (prior.point) {
    set.poses.colwise() = Eigen::Vector3d(prior.point->x, prior.point->y, prior.point->theta);
    return set;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, room.width);
  std::uniform_real_distribution<double> uy(0.0, room.depth);
  std::uniform_real_distribution<double> ut(-std::numbers::pi, std::numbers::pi);
  for (Eigen::Index i = 0; i < n0; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    set.poses.col(i) << x, y, ut(rng);
  }
  return set;
}

bool weight_particles(ParticleSet& set, const Fingerprint& fp_est, const LrpLayout& layout, double likelihood_sigma) {
  const Eigen::Index n = set.size();
  const Eigen::VectorXd observed = fp_est.concatenated();
  if (observed.size() != static_cast<Eigen::Index>(layout.size())) {
    throw std::invalid_argument("weight_particles: fingerprint cardinality does not match the layout");
  }
  Eigen::VectorXd log_w(n);
  const double inv_two_var = 0.5 / (likelihood_sigma * likelihood_sigma);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd expected = fingerprint(layout, Point2d(set.poses(0, i), set.poses(1, i))).concatenated();
    log_w(i) = -inv_two_var * (expected - observed).squaredNorm();
  }
  const double peak = log_w.maxCoeff();
  // Raw likelihoods below the smallest normal double count as underflow.
  if (!std::isfinite(peak) || peak < std::log(std::numeric_limits<double>::min())) {
    set.weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    return false;
  }
  set.weights = (log_w.array() - peak).exp().matrix();
  set.weights /= set.weights.sum();
  return true;
}

namespace {

Pose weighted_pose(const ParticleSet& set, const std::vector<Eigen::Index>& members) {
  Point2d pos = Point2d::Zero();
  Point2d heading = Point2d::Zero();
  double total = 0.0;
  for (Eigen::Index i : members) {
    const double w = set.weights(i);
    pos += w * set.poses.col(i).head<2>();
    heading += w * Point2d(std::cos(set.poses(2, i)), std::sin(set.poses(2, i)));
    total += w;
  }
  if (!(total > 0.0)) {
    // Degenerate weights: plain average.
    pos.setZero();
    heading.setZero();
    for (Eigen::Index i : members) {
      pos += set.poses.col(i).head<2>();
      heading += Point2d(std::cos(set.poses(2, i)), std::sin(set.poses(2, i)));
    }
    total = static_cast<double>(members.size());
  }
  pos /= total;
  return {pos.x(), pos.y(), std::atan2(heading.y(), heading.x())};
}

}  // namespace

Pose estimate_pose(const ParticleSet& set, const AmclConfig& cfg) {
  const Eigen::Index n = set.size();
  if (n == 0) throw std::invalid_argument("estimate_pose: empty particle set");
  std::vector<Eigen::Index> members;
  if (cfg.estimator == PoseEstimator::kWeightedMean) {
    members.resize(static_cast<std::size_t>(n));
    std::iota(members.begin(), members.end(), Eigen::Index{0});
    return weighted_pose(set, members);
  }
  Eigen::Index best = 0;
  set.weights.maxCoeff(&best);
  const Point2d center = set.poses.col(best).head<2>();
  const double r2 = cfg.top_radius * cfg.top_radius;
  for (Eigen::Index i = 0; i < n; ++i) {
    if ((set.poses.col(i).head<2>() - center).squaredNorm() <= r2) members.push_back(i);
  }
  const auto k = std::min<std::size_t>(members.size(), static_cast<std::size_t>(std::max(cfg.top_k, 1)));
  std::partial_sort(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(k), members.end(),
                    [&](Eigen::Index a, Eigen::Index b) {
                      return set.weights(a) > set.weights(b) || (set.weights(a) == set.weights(b) && a < b);
                    });
  members.resize(k);
  return weighted_pose(set, members);
}

std::vector<Eigen::Index> systematic_resample_indices(const Eigen::VectorXd& weights, Eigen::Index n_out,
                                                      std::mt19937_64& rng) {
  if (n_out < 1 || weights.size() == 0) throw std::invalid_argument("systematic_resample: empty input or output");
  const double total = weights.sum();
  const double step = total / static_cast<double>(n_out);
  std::uniform_real_distribution<double> u(0.0, step);
  double pointer = u(rng);
  double cumulative = weights(0);
  Eigen::Index src = 0;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n_out));
  for (Eigen::Index k = 0; k < n_out; ++k) {
    while (pointer > cumulative && src + 1 < weights.size()) cumulative += weights(++src);
    idx[static_cast<std::size_t>(k)] = src;
    pointer += step;
  }
  return idx;
}

ParticleSet systematic_resample(const ParticleSet& set, Eigen::Index n_out, std::mt19937_64& rng) {
  const auto idx = systematic_resample_indices(set.weights, n_out, rng);
  ParticleSet out;
  out.poses.resize(3, n_out);
  for (Eigen::Index k = 0; k < n_out; ++k) out.poses.col(k) = set.poses.col(idx[static_cast<std::size_t>(k)]);
  out.weights = Eigen::VectorXd::Constant(n_out, 1.0 / static_cast<double>(n_out));
  out.iteration = set.iteration;
  return out;
}

void propagate(ParticleSet& set, const OdometryDelta& odo, double sigma_theta, double sigma_d, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  for (Eigen::Index i = 0; i < set.size(); ++i) {
    const double theta = set.poses(2, i) + odo.turned_angle + (sigma_theta > 0.0 ? sigma_theta * n01(rng) : 0.0);
    const double dist = odo.traveled_distance + (sigma_d > 0.0 ? sigma_d * n01(rng) : 0.0);
    set.poses(0, i) += dist * std::cos(theta);
    set.poses(1, i) += dist * std::sin(theta);
    set.poses(2, i) = wrap_angle(theta);
  }
}

double positional_variance(const ParticleSet& set) {
  const double total = set.weights.sum();
  const Eigen::Matrix2Xd xy = set.poses.topRows<2>();
  const Point2d mean = xy * set.weights / total;
  return ((xy.colwise() - mean).colwise().squaredNorm() * set.weights)(0) / total;
}

int adapt_particle_count(const ParticleSet& set, const AmclConfig& cfg) {
  if (!cfg.adapt) return static_cast<int>(set.size());
  const double wanted =
      std::ceil(cfg.beta * positional_variance(set) / (cfg.range_resolution * cfg.range_resolution));
  return static_cast<int>(std::clamp(wanted, static_cast<double>(cfg.n_min), static_cast<double>(cfg.n0)));
}

AmclStep amcl_step(const ParticleSet& set, const Fingerprint& fp_est, const OdometryDelta& odo, const LrpLayout& layout,
                   const AmclConfig& cfg, std::mt19937_64& rng) {
  if (set.size() == 0) throw std::invalid_argument("amcl_step: particle set not initialized");
  ParticleSet weighted = set;
  AmclStep result;
  result.degraded = !weight_particles(weighted, fp_est, layout, cfg.likelihood_sigma);
  if (result.degraded) {
    // Tied weights leave the top-k estimator without a peak; fall back to the cloud mean.
    AmclConfig mean_cfg = cfg;
    mean_cfg.estimator = PoseEstimator::kWeightedMean;
    result.estimate = estimate_pose(weighted, mean_cfg);
  } else {
    result.estimate = estimate_pose(weighted, cfg);
  }
  const int n_next = adapt_particle_count(weighted, cfg);
  result.next = systematic_resample(weighted, n_next, rng);
  propagate(result.next, odo, cfg.sigma_theta_deg * std::numbers::pi / 180.0, cfg.sigma_d, rng);
  result.next.iteration = set.iteration + 1;
  return result;
}

}  // namespace lrp
