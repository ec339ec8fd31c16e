#include "lrp/io.hpp"

#include "lrp/radar.hpp"

#include <fstream>
#include <sstream>

namespace lrp {

using nlohmann::json;

namespace {

std::string join(const std::string& base, const std::string& field) { return base.empty() ? field : base + "." + field; }

const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(join(path, key), "missing");
  return j.at(key);
}

double number(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
  return v.get<double>();
}

double number_or(const json& j, const std::string& key, const std::string& path, double fallback) {
  return j.is_object() && j.contains(key) ? number(j, key, path) : fallback;
}

int integer_or(const json& j, const std::string& key, const std::string& path, int fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v.get<int>();
}

bool boolean_or(const json& j, const std::string& key, const std::string& path, bool fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(join(path, key), "expected true or false");
  return v.get<bool>();
}

Room room_from_json(const json& j, const std::string& path) {
  Room room{number(j, "width", path), number(j, "depth", path), number(j, "height", path)};
  try {
    room.validate();
  } catch (const InvalidLayout& e) {
    throw ConfigError(path, e.what());
  }
  return room;
}

}  // namespace

json layout_to_json(const Room& room, const LrpLayout& layout) {
  json lrps = json::array();
  for (const Lrp& l : layout.lrps) {
    lrps.push_back({{"x", l.position.x()}, {"y", l.position.y()}, {"z", l.position.z()}, {"type", l.type}, {"rcs", l.rcs}});
  }
  return {{"room", {{"width", room.width}, {"depth", room.depth}, {"height", room.height}}},
          {"radar_height", layout.radar_height},
          {"lrps", lrps}};
}

LayoutFile layout_from_json(const json& j, const std::string& path) {
  LayoutFile out;
  out.room = room_from_json(require(j, "room", path), join(path, "room"));
  out.layout.radar_height = number_or(j, "radar_height", path, 0.0);
  const json& lrps = require(j, "lrps", path);
  if (!lrps.is_array() || lrps.empty()) throw ConfigError(join(path, "lrps"), "expected a non-empty array");
  for (std::size_t i = 0; i < lrps.size(); ++i) {
    const std::string where = join(path, "lrps[" + std::to_string(i) + "]");
    const json& e = lrps[i];
    Lrp l;
    l.position = Point3d(number(e, "x", where), number(e, "y", where), number(e, "z", where));
    l.type = integer_or(e, "type", where, 0);
    l.rcs = number(e, "rcs", where);
    out.layout.lrps.push_back(l);
  }
  try {
    out.layout.validate(out.room);
  } catch (const InvalidLayout& e) {
    throw ConfigError(path.empty() ? "lrps" : path, e.what());
  }
  return out;
}

json read_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string(), "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string(), std::string("invalid JSON: ") + e.what());
  }
}

namespace {

void write_json(const std::filesystem::path& file, const json& j) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

}  // namespace

LayoutFile load_layout(const std::filesystem::path& file) { return layout_from_json(read_json(file)); }

void save_layout(const std::filesystem::path& file, const Room& room, const LrpLayout& layout) {
  write_json(file, layout_to_json(room, layout));
}

json lut_to_json(const LookupTable& table) {
  json entries = json::array();
  for (const auto& [key, entry] : table.entries) {
    entries.push_back({{"key", key}, {"x", entry.center.x()}, {"y", entry.center.y()}, {"count", entry.count}});
  }
  return {{"bin_width", table.bin_width}, {"per_type", table.per_type}, {"entries", entries}};
}

LookupTable lut_from_json(const json& j) {
  LookupTable table;
  table.bin_width = number(j, "bin_width", "");
  if (j.contains("per_type")) table.per_type = j.at("per_type").get<std::array<int, kNumTypes>>();
  const json& entries = require(j, "entries", "");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string where = "entries[" + std::to_string(i) + "]";
    const json& e = entries[i];
    auto key = require(e, "key", where).get<std::vector<int>>();
    table.entries.emplace(std::move(key), LutEntry{Point2d(number(e, "x", where), number(e, "y", where)),
                                                   integer_or(e, "count", where, 0)});
  }
  if (!j.contains("per_type") && !table.entries.empty()) {
    // Older dumps: recover the split from the -1 separator of any key.
    const auto& key = table.entries.begin()->first;
    const auto sep = std::find(key.begin(), key.end(), -1);
    table.per_type = {static_cast<int>(sep - key.begin()), static_cast<int>(key.end() - sep) - 1};
  }
  return table;
}

void save_lut(const std::filesystem::path& file, const LookupTable& table) { write_json(file, lut_to_json(table)); }

LookupTable load_lut(const std::filesystem::path& file) { return lut_from_json(read_json(file)); }

void save_ambiguities_csv(const std::filesystem::path& file, const std::vector<AmbiguityPair>& pairs) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "p_x,p_y,q_x,q_y,gap_m\n";
  out.precision(10);
  for (const AmbiguityPair& a : pairs) {
    out << a.p.x() << ',' << a.p.y() << ',' << a.q.x() << ',' << a.q.y() << ',' << a.distance_gap << '\n';
  }
}

Room parse_room(const std::string& spec) {
  std::array<double, 3> dims{};
  std::stringstream ss(spec);
  std::string part;
  std::size_t i = 0;
  while (std::getline(ss, part, 'x')) {
    if (i >= 3) throw ConfigError("room", "expected WxDxH");
    try {
      std::size_t used = 0;
      dims[i++] = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw ConfigError("room", "cannot parse '" + spec + "'");
    }
  }
  if (i != 3) throw ConfigError("room", "expected WxDxH");
  Room room{dims[0], dims[1], dims[2]};
  try {
    room.validate();
  } catch (const InvalidLayout& e) {
    throw ConfigError("room", e.what());
  }
  return room;
}

Scenario scenario_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("<root>", "expected an object");
  Scenario sc;

  if (j.contains("layout")) {
    const LayoutFile lf = layout_from_json(j.at("layout"), "layout");
    sc.room = lf.room;
    sc.layout = lf.layout;
  } else if (j.contains("layout_file")) {
    if (!j.at("layout_file").is_string()) throw ConfigError("layout_file", "expected a path");
    std::filesystem::path file = j.at("layout_file").get<std::string>();
    if (file.is_relative()) file = base_dir / file;
    const LayoutFile lf = load_layout(file);
    sc.room = lf.room;
    sc.layout = lf.layout;
  } else if (j.contains("plan")) {
    const json& plan = j.at("plan");
    sc.room = room_from_json(require(j, "room", ""), "room");
    LayoutConstraints lc;
    lc.wall_clearance = number_or(plan, "wall_clearance_m", "plan", lc.wall_clearance);
    lc.min_spacing = number_or(plan, "min_spacing_m", "plan", lc.min_spacing);
    lc.axis_margin = number_or(plan, "axis_margin_m", "plan", lc.axis_margin);
    lc.mount_height = number_or(plan, "mount_height_m", "plan", lc.mount_height);
    const double lambda = kSpeedOfLight / number_or(j.value("radar", json::object()), "fc_hz", "radar", 60e9);
    lc.rcs = {rcs_trihedral(0.05, lambda), rcs_trihedral(0.07, lambda)};
    lc.rcs[0] = number_or(plan, "rcs_m2", "plan", lc.rcs[0]);
    try {
      sc.layout = generate_layout(sc.room, 4, integer_or(plan, "types", "plan", 1), integer_or(plan, "candidates", "plan", 500),
                                  lc, static_cast<std::uint64_t>(integer_or(plan, "seed", "plan", 1)), ScanSettings{},
                                  number_or(plan, "radar_height_m", "plan", 0.0))
                      .layout;
    } catch (const SearchExhausted& e) {
      throw ConfigError("plan", e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("plan", e.what());
    }
  } else {
    throw ConfigError("layout", "one of layout, layout_file or plan is required");
  }

  const json& wps = require(j, "waypoints", "");
  if (!wps.is_array()) throw ConfigError("waypoints", "expected an array of [x, y]");
  for (std::size_t i = 0; i < wps.size(); ++i) {
    const json& w = wps[i];
    if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
      throw ConfigError("waypoints[" + std::to_string(i) + "]", "expected [x, y]");
    }
    sc.waypoints.emplace_back(w[0].get<double>(), w[1].get<double>());
  }
  sc.speed = number_or(j, "speed_mps", "", sc.speed);
  sc.period = number_or(j, "period_s", "", sc.period);

  const json radar = j.value("radar", json::object());
  try {
    sc.radar = design_params(number_or(radar, "delta_d_m", "radar", 0.075), number_or(radar, "d_max_m", "radar", 19.125),
                             number_or(radar, "delta_v_mps", "radar", 0.3551),
                             number_or(radar, "v_max_mps", "radar", 5.6816), number_or(radar, "fc_hz", "radar", 60e9));
  } catch (const InvalidParameterization& e) {
    throw ConfigError("radar", e.what());
  }
  sc.noise_floor = number_or(radar, "noise_floor_w", "radar", 0.0);
  const json cfar = radar.value("cfar", json::object());
  sc.cfar.train_cells = integer_or(cfar, "train", "radar.cfar", sc.cfar.train_cells);
  sc.cfar.guard_cells = integer_or(cfar, "guard", "radar.cfar", sc.cfar.guard_cells);
  sc.cfar.pfa = number_or(cfar, "pfa", "radar.cfar", sc.cfar.pfa);
  sc.channel.wall_rcs = number_or(radar, "wall_rcs_m2", "radar", sc.channel.wall_rcs);
  sc.channel.reflection_order = integer_or(radar, "reflection_order", "radar", sc.channel.reflection_order);

  const json tracking = j.value("tracking", json::object());
  sc.tracking = TrackingConfig::for_resolution(sc.radar.range_resolution);
  sc.tracking.gate = number_or(tracking, "gate_m", "tracking", sc.tracking.gate);
  sc.tracking.w_rcs_db = number_or(tracking, "w_rcs_db", "tracking", sc.tracking.w_rcs_db);
  sc.tracking.w_dist = number_or(tracking, "w_dist_m", "tracking", sc.tracking.w_dist);
  sc.tracking.rcs_gate_db = number_or(tracking, "rcs_gate_db", "tracking", sc.tracking.rcs_gate_db);
  sc.tracking.process_noise = number_or(tracking, "process_noise", "tracking", sc.tracking.process_noise);
  sc.tracking.r_var = number_or(tracking, "r_var", "tracking", sc.tracking.r_var);

  const json amcl = j.value("amcl", json::object());
  sc.amcl.range_resolution = sc.radar.range_resolution;
  sc.amcl.n0 = integer_or(amcl, "n0", "amcl", sc.amcl.n0);
  sc.amcl.n_min = integer_or(amcl, "n_min", "amcl", sc.amcl.n_min);
  sc.amcl.sigma_theta_deg = number_or(amcl, "sigma_theta_deg", "amcl", sc.amcl.sigma_theta_deg);
  sc.amcl.sigma_d = number_or(amcl, "sigma_d_m", "amcl", sc.amcl.sigma_d);
  sc.amcl.likelihood_sigma = number_or(amcl, "likelihood_sigma_m", "amcl", sc.amcl.likelihood_sigma);
  sc.amcl.top_k = integer_or(amcl, "top_k", "amcl", sc.amcl.top_k);
  sc.amcl.top_radius = number_or(amcl, "top_radius_m", "amcl", sc.amcl.top_radius);
  sc.amcl.adapt = boolean_or(amcl, "adapt", "amcl", sc.amcl.adapt);
  sc.amcl.beta = number_or(amcl, "beta", "amcl", sc.amcl.beta);
  if (amcl.contains("estimator")) {
    const std::string est = amcl.at("estimator").is_string() ? amcl.at("estimator").get<std::string>() : "";
    if (est == "top_k") {
      sc.amcl.estimator = PoseEstimator::kTopK;
    } else if (est == "weighted_mean") {
      sc.amcl.estimator = PoseEstimator::kWeightedMean;
    } else {
      throw ConfigError("amcl.estimator", "expected \"top_k\" or \"weighted_mean\"");
    }
  }

  const json lut = j.value("lut", json::object());
  sc.lut_delta = number_or(lut, "delta_m", "lut", sc.radar.range_resolution);
  sc.lut_fine = number_or(lut, "fine_m", "lut", sc.lut_fine);

  sc.runs = integer_or(j, "runs", "", sc.runs);
  if (j.contains("seed")) {
    const json& seed = j.at("seed");
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
      throw ConfigError("seed", "expected a non-negative integer");
    }
    sc.seed = j.at("seed").get<std::uint64_t>();
  }
  sc.warmup = integer_or(j, "warmup", "", sc.warmup);
  sc.converged_from_step = integer_or(j, "converged_from_step", "", sc.converged_from_step);
  if (j.contains("inject")) {
    const json& inj = j.at("inject");
    sc.inject = FingerprintInjection{integer_or(inj, "step", "inject", 0),
                                     Point2d(number(inj, "x", "inject"), number(inj, "y", "inject"))};
  }
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& file) {
  return scenario_from_json(read_json(file), file.has_parent_path() ? file.parent_path() : ".");
}

}  // namespace lrp
