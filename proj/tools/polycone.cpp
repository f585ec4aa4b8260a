#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "polycone/error.hpp"
#include "polycone/io.hpp"
#include "polycone/sim.hpp"

namespace fs = std::filesystem;
using namespace polycone;

namespace {

constexpr int kUsageError = 1;

Scenario resolve_scenario(const std::string& target, std::uint64_t seed) {
  if (target.rfind("builtin:", 0) == 0) {
    const auto name = target.substr(8);
    auto s = builtin_scenario(name);
    if (!s) throw Error(ErrorCode::ParseError, "unknown builtin scenario '" + name + "'");
    return *s;
  }
  if (target == "random") return random_cluttered_scenario(seed);
  return load_scenario(target);
}

void write_outputs(const fs::path& dir, const TrajectoryLog& log, const nlohmann::json& summary) {
  save_log_csv((dir / "log.csv").string(), log);
  write_file_atomic((dir / "summary.json").string(), summary.dump(2) + "\n");
}

int cmd_run(const std::string& target, const std::string& out, const std::string& filter,
            const std::string& cone, std::uint64_t seed) {
  Scenario sc;
  try {
    sc = resolve_scenario(target, seed);
  } catch (const Error& e) {
    std::cerr << "error: " << target << ": " << e.what() << '\n';
    return kUsageError;
  }
  if (!filter.empty()) sc.filter = *parse_barrier_kind(filter);
  if (!cone.empty()) sc.cone = *parse_cone_formulation(cone);
  const auto log = run(sc);
  const auto summary = run_summary(log);
  write_outputs(out, log, summary);
  std::cout << sc.name << " [" << to_string(sc.filter) << "] " << to_string(log.status);
  if (!log.failure.empty()) std::cout << ": " << log.failure;
  std::cout << '\n';
  return exit_code(log.status);
}

int cmd_suite(const std::string& out) {
  std::ostringstream table;
  table << "scenario,model,filter,status,final_time,min_clearance,min_h,mean_intervention,"
           "latency_mean_us,latency_p99_us,minimal_intervention_violations\n";
  for (const auto& base : builtin_scenarios()) {
    for (auto kind : {BarrierKind::PolyC2BF, BarrierKind::C3BF}) {
      Scenario sc = base;
      sc.filter = kind;
      const auto log = run(sc);
      const auto j = run_summary(log);
      write_outputs(fs::path(out) / (sc.name + "-" + std::string(to_string(kind))), log, j);
      auto field = [&](const char* key) {
        return j[key].is_null() ? std::string("nan") : j[key].dump();
      };
      table << sc.name << ',' << to_string(sc.model()) << ',' << to_string(kind) << ',' << to_string(log.status)
            << ',' << field("final_time") << ',' << field("min_clearance") << ',' << field("min_h") << ','
            << field("mean_intervention") << ',' << j["latency_us"]["mean"].dump() << ','
            << j["latency_us"]["p99"].dump() << ',' << field("minimal_intervention_violations") << '\n';
      std::cout << sc.name << " [" << to_string(kind) << "] " << to_string(log.status) << '\n';
    }
  }
  write_file_atomic((fs::path(out) / "comparison.csv").string(), table.str());
  return 0;
}

int cmd_plot(const std::string& path, const std::string& out) {
  try {
    const auto log = load_log_csv(path);
    write_file_atomic(out, render_svg(log));
  } catch (const Error& e) {
    std::cerr << "error: " << path << ": " << e.what() << '\n';
    return kUsageError;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polygonal collision-cone CBF safety filter simulator"};
  app.require_subcommand(1);

  std::string target, out = "out", filter, cone;
  std::uint64_t seed = 0;
  auto* run_cmd = app.add_subcommand("run", "Simulate one scenario and write log.csv and summary.json");
  run_cmd->add_option("scenario", target, "Scenario file, builtin:<name>, or random")->required();
  run_cmd->add_option("--out", out, "Output directory")->capture_default_str();
  run_cmd->add_option("--filter", filter, "Override the scenario's filter")
      ->check(CLI::IsMember({"polyc2bf", "c3bf", "none"}));
  run_cmd->add_option("--cone", cone, "Override the cone formulation")
      ->check(CLI::IsMember({"exact", "segment"}));
  run_cmd->add_option("--seed", seed, "Seed for the random scenario")->capture_default_str();

  std::string suite_out = "suite";
  auto* suite_cmd = app.add_subcommand("suite", "Run every builtin under both filters");
  suite_cmd->add_option("--out", suite_out, "Output directory")->capture_default_str();

  std::string log_path, svg_out = "plot.svg";
  auto* plot_cmd = app.add_subcommand("plot", "Render a trajectory log to SVG");
  plot_cmd->add_option("log", log_path, "Trajectory log (CSV)")->required();
  plot_cmd->add_option("--out", svg_out, "SVG output path")->capture_default_str();

  auto* list_cmd = app.add_subcommand("list", "List builtin scenarios");

  std::string dump_target;
  auto* dump_cmd = app.add_subcommand("dump", "Print a scenario in the file format");
  dump_cmd->add_option("scenario", dump_target, "Scenario file, builtin:<name>, or random")->required();
  dump_cmd->add_option("--seed", seed, "Seed for the random scenario");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*run_cmd) return cmd_run(target, out, filter, cone, seed);
    if (*suite_cmd) return cmd_suite(suite_out);
    if (*plot_cmd) return cmd_plot(log_path, svg_out);
    if (*list_cmd) {
      for (const auto& s : builtin_scenarios()) std::cout << s.name << '\t' << to_string(s.model()) << '\n';
      return 0;
    }
    if (*dump_cmd) {
      std::cout << emit_scenario(resolve_scenario(dump_target, seed));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}
