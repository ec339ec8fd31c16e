// Command-line front end: layout planning, ambiguity checks, lookup tables
// and end-to-end simulation.

#include "lrp/ambiguity.hpp"
#include "lrp/io.hpp"
#include "lrp/positioning.hpp"
#include "lrp/radar.hpp"
#include "lrp/scenario.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>

namespace {

constexpr int kConfigError = 2;

int plan_layout(const std::string& room_spec, int lrps, int types, int candidates, std::uint64_t seed,
                double radar_height, const lrp::ScanSettings& scan, const std::string& out) {
  const lrp::Room room = lrp::parse_room(room_spec);
  lrp::LayoutConstraints lc;
  const double lambda = lrp::default_params().wavelength();
  lc.rcs = {lrp::rcs_trihedral(0.05, lambda), lrp::rcs_trihedral(0.07, lambda)};
  const auto result = lrp::generate_layout(room, lrps, types, candidates, lc, seed, scan, radar_height);
  lrp::save_layout(out, room, result.layout);
  std::printf("accepted %d of %d candidates; best layout has %zu ambiguity pairs -> %s\n", result.accepted,
              result.candidates, result.ambiguities.size(), out.c_str());
  return 0;
}

int check_layout(const std::string& layout_path, const lrp::ScanSettings& scan, const std::string& report) {
  const lrp::LayoutFile lf = lrp::load_layout(layout_path);
  if (lf.layout.size() == 4) {
    std::printf("four-reflector condition: %s (clearance %.4f m)\n",
                lrp::four_lrp_condition(lf.layout) ? "satisfied" : "violated", lrp::four_lrp_clearance(lf.layout));
  }
  const auto pairs = lrp::brute_force_scan(lf.layout, lf.room, scan);
  std::printf("ambiguity pairs (grid %.4g m, tol %.4g m): %zu\n", scan.grid_step, scan.tol, pairs.size());
  if (!report.empty()) lrp::save_ambiguities_csv(report, pairs);
  return 0;
}

int build_lut(const std::string& layout_path, double delta, double fine, const std::string& out) {
  const lrp::LayoutFile lf = lrp::load_layout(layout_path);
  const lrp::LookupTable table = lrp::build_lut(lf.layout, lf.room, delta, fine);
  lrp::save_lut(out, table);
  std::printf("lookup table: %zu entries -> %s\n", table.size(), out.c_str());
  return 0;
}

int simulate(const std::string& scenario_path, int runs, std::int64_t seed, const std::string& out,
             const std::string& method, int warmup) {
  lrp::Scenario sc = lrp::load_scenario(scenario_path);
  if (runs > 0) sc.runs = runs;
  if (seed >= 0) sc.seed = static_cast<std::uint64_t>(seed);
  if (warmup >= 0) sc.warmup = warmup;
  if (method == "lut") {
    sc.method = lrp::Method::kLut;
  } else if (method == "amcl") {
    sc.method = lrp::Method::kAmcl;
  } else {
    sc.method = lrp::Method::kBoth;
  }
  sc.validate();
  const lrp::Report report = lrp::run_scenario(sc);
  lrp::emit_report(report, out);
  if (report.has_lut) std::printf("LUT mean error:  %.4f m\n", report.lut_mean_error);
  if (report.has_amcl) {
    std::printf("AMCL mean error: %.4f m (steps >= %d: %.4f m), converged at step %d\n", report.amcl_mean_error,
                report.converged_from_step, report.amcl_mean_error_converged, report.convergence_step);
  }
  std::printf("wrote %s/steps.csv and %s/summary.json\n", out.c_str(), out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radar indoor positioning with passive reflectors"};
  app.require_subcommand(1);

  std::string room_spec = "5x5x4";
  int lrps = 4;
  int types = 1;
  int candidates = 500;
  std::uint64_t plan_seed = 1;
  double radar_height = 0.0;
  std::string layout_out = "layout.json";
  lrp::ScanSettings plan_scan;
  auto* plan = app.add_subcommand("plan-layout", "search random reflector layouts");
  plan->add_option("--room", room_spec, "room size WxDxH in meters")->capture_default_str();
  plan->add_option("--lrps", lrps, "number of reflectors")->capture_default_str();
  plan->add_option("--types", types, "number of reflector types (1 or 2)")->capture_default_str();
  plan->add_option("--candidates", candidates, "random layouts to evaluate")->capture_default_str();
  plan->add_option("--seed", plan_seed, "random seed")->capture_default_str();
  plan->add_option("--radar-height", radar_height, "radar mounting height in meters")->capture_default_str();
  plan->add_option("--grid", plan_scan.grid_step, "scan grid step in meters")->capture_default_str();
  plan->add_option("--tol", plan_scan.tol, "scan tolerance in meters")->capture_default_str();
  plan->add_option("--out", layout_out, "output layout JSON")->capture_default_str();

  std::string layout_path;
  std::string report_path;
  lrp::ScanSettings check_scan;
  auto* check = app.add_subcommand("check-layout", "check a layout for fingerprint ambiguities");
  check->add_option("--layout", layout_path, "layout JSON")->required();
  check->add_option("--grid", check_scan.grid_step, "scan grid step in meters")->capture_default_str();
  check->add_option("--tol", check_scan.tol, "scan tolerance in meters")->capture_default_str();
  check->add_option("--report", report_path, "ambiguity CSV output");

  double delta = 0.075;
  double fine = 0.01;
  std::string lut_out = "lut.json";
  auto* lut = app.add_subcommand("build-lut", "build a quantized fingerprint lookup table");
  lut->add_option("--layout", layout_path, "layout JSON")->required();
  lut->add_option("--delta", delta, "quantization bin width in meters")->capture_default_str();
  lut->add_option("--fine", fine, "sweep grid step in meters")->capture_default_str();
  lut->add_option("--out", lut_out, "output JSON")->capture_default_str();

  std::string scenario_path;
  int runs = 0;
  std::int64_t sim_seed = -1;
  std::string out_dir = "out";
  std::string method = "both";
  int warmup = -1;
  auto* sim = app.add_subcommand("simulate", "run the end-to-end positioning simulation");
  sim->add_option("--scenario", scenario_path, "scenario JSON")->required();
  sim->add_option("--runs", runs, "number of Monte Carlo runs (overrides the scenario)");
  sim->add_option("--seed", sim_seed, "master seed (overrides the scenario)");
  sim->add_option("--out", out_dir, "output directory")->capture_default_str();
  sim->add_option("--method", method, "lut, amcl or both")
      ->check(CLI::IsMember({"lut", "amcl", "both"}))
      ->capture_default_str();
  sim->add_option("--warmup", warmup, "AMCL warm-up iterations at the start pose");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*plan) return plan_layout(room_spec, lrps, types, candidates, plan_seed, radar_height, plan_scan, layout_out);
    if (*check) return check_layout(layout_path, check_scan, report_path);
    if (*lut) return build_lut(layout_path, delta, fine, lut_out);
    if (*sim) return simulate(scenario_path, runs, sim_seed, out_dir, method, warmup);
  } catch (const lrp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const lrp::SearchExhausted& e) {
    std::cerr << "layout search failed: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
