#include "lrp/scenario.hpp"

#include "lrp/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <random>
#include <thread>

namespace lrp {

void Scenario::validate() const {
  try {
    room.validate();
    layout.validate(room);
  } catch (const InvalidLayout& e) {
    throw ConfigError("layout", e.what());
  }
  if (waypoints.size() < 2) throw ConfigError("waypoints", "need at least two waypoints");
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    if (!room.contains(waypoints[i])) throw ConfigError("waypoints[" + std::to_string(i) + "]", "outside the room");
  }
  if (!(speed > 0.0)) throw ConfigError("speed_mps", "must be positive");
  if (!(period > 0.0)) throw ConfigError("period_s", "must be positive");
  if (runs < 1) throw ConfigError("runs", "must be at least 1");
  if (warmup < 0) throw ConfigError("warmup", "must be non-negative");
  if (noise_floor < 0.0) throw ConfigError("radar.noise_floor_w", "must be non-negative");
  if (!(cfar.pfa > 0.0 && cfar.pfa < 1.0)) throw ConfigError("radar.cfar.pfa", "must lie in (0, 1)");
  if (cfar.train_cells < 1) throw ConfigError("radar.cfar.train", "must be at least 1");
  if (cfar.guard_cells < 0) throw ConfigError("radar.cfar.guard", "must be non-negative");
  const int window = 2 * (cfar.train_cells + cfar.guard_cells) + 1;
  if (radar.n_range_bins <= window || radar.n_doppler_bins <= window) {
    throw ConfigError("radar.cfar", "CFAR window does not fit into the range-Doppler map");
  }
  if (!(channel.wall_rcs >= 0.0)) throw ConfigError("radar.wall_rcs_m2", "must be non-negative");
  if (channel.reflection_order < 0 || channel.reflection_order > 2) {
    throw ConfigError("radar.reflection_order", "must be 0, 1 or 2");
  }
  if (!(tracking.gate > 0.0)) throw ConfigError("tracking.gate_m", "must be positive");
  if (!(tracking.w_rcs_db > 0.0)) throw ConfigError("tracking.w_rcs_db", "must be positive");
  if (!(tracking.w_dist > 0.0)) throw ConfigError("tracking.w_dist_m", "must be positive");
  if (!(tracking.process_noise >= 0.0)) throw ConfigError("tracking.process_noise", "must be non-negative");
  if (!(tracking.r_var > 0.0)) throw ConfigError("tracking.r_var", "must be positive");
  if (amcl.n0 < 1) throw ConfigError("amcl.n0", "must be at least 1");
  if (amcl.n_min < 1 || amcl.n_min > amcl.n0) throw ConfigError("amcl.n_min", "must lie in [1, n0]");
  if (!(amcl.likelihood_sigma > 0.0)) throw ConfigError("amcl.likelihood_sigma_m", "must be positive");
  if (amcl.sigma_d < 0.0) throw ConfigError("amcl.sigma_d_m", "must be non-negative");
  if (amcl.sigma_theta_deg < 0.0) throw ConfigError("amcl.sigma_theta_deg", "must be non-negative");
  if (amcl.top_k < 1) throw ConfigError("amcl.top_k", "must be at least 1");
  if (!(amcl.top_radius > 0.0)) throw ConfigError("amcl.top_radius_m", "must be positive");
  if (!(lut_delta > 0.0)) throw ConfigError("lut.delta_m", "must be positive");
  if (!(lut_fine > 0.0) || lut_fine > 0.5 * lut_delta + 1e-12) throw ConfigError("lut.fine_m", "must lie in (0, delta/2]");
  if (inject && !room.contains(inject->position)) throw ConfigError("inject", "position outside the room");
}

std::vector<PathSample> interpolate_path(const std::vector<Point2d>& waypoints, double speed, double period) {
  if (waypoints.size() < 2) throw std::invalid_argument("interpolate_path: need at least two waypoints");
  if (!(speed > 0.0) || !(period > 0.0)) throw std::invalid_argument("interpolate_path: speed and period must be positive");

  std::vector<double> cumulative{0.0};
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    cumulative.push_back(cumulative.back() + (waypoints[i] - waypoints[i - 1]).norm());
  }
  const double total = cumulative.back();
  const double stride = speed * period;

  std::vector<Point2d> positions;
  std::vector<Point2d> velocities;
  if (total == 0.0) {
    // Stationary vehicle: one epoch per listed location.
    positions.assign(waypoints.size(), waypoints.front());
    velocities.assign(waypoints.size(), Point2d::Zero());
  } else {
    const auto n = static_cast<std::size_t>(std::floor(total / stride + 1e-9)) + 1;
    // Departing segment at a waypoint, arriving segment at the path end.
    auto segment_at = [&](double s) {
      std::size_t seg = 0;
      for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
        if (cumulative[i + 1] > cumulative[i] && s >= cumulative[i] - 1e-12) seg = i;
      }
      return seg;
    };
    for (std::size_t k = 0; k < n; ++k) {
      const double s = std::min(static_cast<double>(k) * stride, total);
      const std::size_t seg = segment_at(s);
      const double len = cumulative[seg + 1] - cumulative[seg];
      const double t = std::clamp((s - cumulative[seg]) / len, 0.0, 1.0);
      positions.push_back(waypoints[seg] + t * (waypoints[seg + 1] - waypoints[seg]));
      velocities.push_back(speed * (waypoints[seg + 1] - waypoints[seg]) / len);
    }
  }

  std::vector<PathSample> samples(positions.size());
  double heading = 0.0;
  for (std::size_t k = 1; k < positions.size(); ++k) {
    const Point2d chord = positions[k] - positions[k - 1];
    if (chord.norm() > 1e-12) {
      heading = std::atan2(chord.y(), chord.x());
      break;
    }
  }
  for (std::size_t k = 0; k < positions.size(); ++k) {
    if (k > 0) {
      const Point2d chord = positions[k] - positions[k - 1];
      if (chord.norm() > 1e-12) heading = std::atan2(chord.y(), chord.x());
    }
    samples[k].pose = Pose(positions[k].x(), positions[k].y(), heading);
    samples[k].velocity = velocities[k];
  }
  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    samples[k].odometry.traveled_distance = (positions[k + 1] - positions[k]).norm();
    samples[k].odometry.turned_angle = wrap_angle(samples[k + 1].pose.theta - samples[k].pose.theta);
  }
  return samples;
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

TrackerOutput measure(const Scenario& sc, const PathSample& sample, TrackSet& tracks, std::uint64_t noise_seed) {
  const auto paths = simulate_channel(sc.layout, sc.room, sample.pose, sample.velocity, sc.radar, sc.channel);
  const auto map = synthesize_map(paths, sc.radar, sc.noise_floor, noise_seed);
  const auto detections = cfar_detect(map, sc.radar, sc.cfar);
  return tracks.step(detections, sc.period);
}

std::vector<StepRecord> run_once(const Scenario& sc, const LookupTable* table, const std::vector<PathSample>& samples,
                                 int run) {
  const bool use_lut = sc.method != Method::kAmcl;
  const bool use_amcl = sc.method != Method::kLut;
  // Per-run seeds: master seed + run index.
  const std::uint64_t run_seed = sc.seed + static_cast<std::uint64_t>(run);
  std::mt19937_64 rng(mix_seed(run_seed, 1));

  TrackSet tracks(sc.layout, sc.tracking);
  ParticleSet particles;
  if (use_amcl) {
    particles = amcl_init(sc.amcl.n0, AmclPrior{}, sc.room, mix_seed(run_seed, 2));
    if (sc.warmup > 0) {
      TrackSet probe(sc.layout, sc.tracking);
      const Fingerprint fp = measure(sc, samples.front(), probe, mix_seed(run_seed, 3)).fingerprint;
      for (int w = 0; w < sc.warmup; ++w) particles = amcl_step(particles, fp, {}, sc.layout, sc.amcl, rng).next;
    }
  }

  std::vector<StepRecord> records;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const PathSample& sample = samples[k];
    StepRecord rec;
    rec.run = run;
    rec.step = static_cast<int>(k) + 1;
    rec.truth = sample.pose;

    const TrackerOutput m = measure(sc, sample, tracks, mix_seed(run_seed, 4, k));
    Fingerprint fp = m.fingerprint;
    rec.degraded = m.degraded;
    if (sc.inject && sc.inject->step == rec.step) fp = fingerprint(sc.layout, sc.inject->position);

    if (use_lut) {
      rec.lut = lut_lookup(*table, fp);
      rec.err_lut = (*rec.lut - sample.pose.position()).norm();
    }
    if (use_amcl) {
      rec.n_particles = static_cast<int>(particles.size());
      const AmclStep step = amcl_step(particles, fp, sample.odometry, sc.layout, sc.amcl, rng);
      rec.amcl = step.estimate.position();
      rec.err_amcl = (*rec.amcl - sample.pose.position()).norm();
      rec.degraded = rec.degraded || step.degraded;
      particles = step.next;
    }
    records.push_back(rec);
  }
  return records;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

void aggregate(Report& report, double range_resolution) {
  report.per_step.clear();
  std::vector<double> all_lut;
  std::vector<double> all_amcl;
  std::vector<double> converged_amcl;
  for (int s = 1; s <= report.n_steps; ++s) {
    std::vector<double> lut;
    std::vector<double> amcl;
    for (const StepRecord& r : report.records) {
      if (r.step != s) continue;
      if (r.lut) lut.push_back(r.err_lut);
      if (r.amcl) amcl.push_back(r.err_amcl);
    }
    all_lut.insert(all_lut.end(), lut.begin(), lut.end());
    all_amcl.insert(all_amcl.end(), amcl.begin(), amcl.end());
    if (s >= report.converged_from_step) converged_amcl.insert(converged_amcl.end(), amcl.begin(), amcl.end());
    report.per_step.push_back({s, mean_of(lut), sample_std(lut), mean_of(amcl), sample_std(amcl)});
  }
  report.lut_mean_error = mean_of(all_lut);
  report.amcl_mean_error = mean_of(all_amcl);
  report.amcl_mean_error_converged = mean_of(converged_amcl);

  report.convergence_step = report.n_steps + 1;
  if (report.has_amcl) {
    for (int s = report.n_steps; s >= 1; --s) {
      if (report.per_step[static_cast<std::size_t>(s - 1)].amcl_mean > 3.0 * range_resolution) break;
      report.convergence_step = s;
    }
  }
}

Report run_scenario(const Scenario& scenario, const LookupTable* table) {
  scenario.validate();
  const auto samples = interpolate_path(scenario.waypoints, scenario.speed, scenario.period);

  LookupTable own;
  if (scenario.method != Method::kAmcl && table == nullptr) {
    own = build_lut(scenario.layout, scenario.room, scenario.lut_delta, scenario.lut_fine);
    table = &own;
  }

  // Runs are independent; merge in run order.
  std::vector<std::vector<StepRecord>> per_run(static_cast<std::size_t>(scenario.runs));
  const unsigned workers = std::max(1u, std::min(std::thread::hardware_concurrency(), static_cast<unsigned>(scenario.runs)));
  if (workers == 1) {
    for (int r = 0; r < scenario.runs; ++r) per_run[static_cast<std::size_t>(r)] = run_once(scenario, table, samples, r);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (int r = static_cast<int>(w); r < scenario.runs; r += static_cast<int>(workers)) {
          per_run[static_cast<std::size_t>(r)] = run_once(scenario, table, samples, r);
        }
      }));
    }
    for (auto& j : jobs) j.get();
  }

  Report report;
  report.runs = scenario.runs;
  report.n_steps = static_cast<int>(samples.size());
  report.has_lut = scenario.method != Method::kAmcl;
  report.has_amcl = scenario.method != Method::kLut;
  report.converged_from_step = scenario.converged_from_step;
  for (auto& recs : per_run) report.records.insert(report.records.end(), recs.begin(), recs.end());
  aggregate(report, scenario.radar.range_resolution);
  return report;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void emit_report(const Report& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "steps.csv");
  if (!csv) throw std::runtime_error("cannot write " + (dir / "steps.csv").string());
  csv << "run,step,true_x,true_y,est_x_lut,est_y_lut,err_lut,est_x_amcl,est_y_amcl,err_amcl,n_particles,degraded\n";
  for (const StepRecord& r : report.records) {
    csv << r.run << ',' << r.step << ',' << num(r.truth.x) << ',' << num(r.truth.y) << ',';
    if (r.lut) {
      csv << num(r.lut->x()) << ',' << num(r.lut->y()) << ',' << num(r.err_lut) << ',';
    } else {
      csv << ",,,";
    }
    if (r.amcl) {
      csv << num(r.amcl->x()) << ',' << num(r.amcl->y()) << ',' << num(r.err_amcl) << ',';
    } else {
      csv << ",,,";
    }
    csv << r.n_particles << ',' << (r.degraded ? 1 : 0) << '\n';
  }

  nlohmann::json summary;
  summary["runs"] = report.runs;
  summary["n_steps"] = report.n_steps;
  summary["converged_from_step"] = report.converged_from_step;
  summary["convergence_step"] = report.convergence_step;
  auto& steps = summary["per_step"] = nlohmann::json::array();
  for (const StepStats& s : report.per_step) {
    nlohmann::json row{{"step", s.step}};
    if (report.has_lut) {
      row["lut_mean_m"] = s.lut_mean;
      row["lut_std_m"] = s.lut_std;
    }
    if (report.has_amcl) {
      row["amcl_mean_m"] = s.amcl_mean;
      row["amcl_std_m"] = s.amcl_std;
    }
    steps.push_back(row);
  }
  if (report.has_lut) summary["lut_mean_error_m"] = report.lut_mean_error;
  if (report.has_amcl) {
    summary["amcl_mean_error_m"] = report.amcl_mean_error;
    summary["amcl_mean_error_converged_m"] = report.amcl_mean_error_converged;
  }
  std::ofstream js(dir / "summary.json");
  if (!js) throw std::runtime_error("cannot write " + (dir / "summary.json").string());
  js << summary.dump(2) << '\n';
}

}  // namespace lrp
