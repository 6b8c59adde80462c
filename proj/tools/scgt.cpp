#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "runner.hpp"

namespace {

using namespace scgt::cli;

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) return false;
  out << text;
  return static_cast<bool>(out);
}

std::vector<double> parse_epsilons(const std::string& list) {
  std::vector<double> eps;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = parse_number(item);
    if (!v) throw ConfigError("--epsilons", -1, "'" + item + "' is not a number");
    eps.push_back(*v);
  }
  if (eps.empty()) throw ConfigError("--epsilons", -1, "empty list");
  return eps;
}

int cmd_run(const std::string& config, const std::string& out_path, std::size_t grid_scale,
            std::optional<std::uint64_t> seed) {
  const auto s = load_scenario(config, LoadOptions{grid_scale, seed});
  const auto r = run_scenario(s);
  if (!write_file(out_path, r.report.dump(2) + "\n")) {
    std::cerr << "error: cannot write '" << out_path << "'\n";
    return kExitConfig;
  }
  for (const auto& v : r.violations) std::cerr << "violation: " << v << "\n";
  const auto& st = r.report["status"];
  std::cout << "scgt run: " << s.points.size() << " point(s), " << st["violations"].get<int>()
            << " violation(s), " << st["errors"].get<int>() << " error(s), "
            << r.report["warnings"].size() << " warning(s); exit " << r.exit_code << "\n";
  return r.exit_code;
}

int cmd_sweep(const std::string& config, const std::string& epsilons, const std::string& out_path) {
  const auto s = load_scenario(config);
  const auto r = sweep_epsilon(s, parse_epsilons(epsilons));
  std::ostringstream csv;
  csv.precision(12);
  csv << "epsilon,nu_C,nu_C_closed_form,abs_diff\n";
  for (const auto& row : r.rows)
    csv << row.epsilon << "," << row.nu_C << "," << row.closed_form << "," << row.abs_diff << "\n";
  if (!write_file(out_path, csv.str())) {
    std::cerr << "error: cannot write '" << out_path << "'\n";
    return kExitConfig;
  }
  for (const auto& row : r.rows)
    if (row.abs_diff > s.tol.phase)
      std::cerr << "violation: epsilon " << row.epsilon << " |nu_C - closed form| = " << row.abs_diff
                << " > " << s.tol.phase << "\n";
  std::cout << "scgt sweep-epsilon: " << r.rows.size() << " value(s); exit " << r.exit_code << "\n";
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-classical and quantum geometric tensors over parameterized state families"};
  app.require_subcommand(1);

  std::string config, out, epsilons;
  std::size_t grid_scale = 1;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Evaluate a scenario and write a JSON report");
  run->add_option("--config", config, "Scenario file (YAML)")->required();
  run->add_option("--out", out, "Report path")->required();
  run->add_option("--grid-scale", grid_scale, "Refine phase and point grids by this factor")
      ->check(CLI::PositiveNumber);
  auto* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");

  auto* sweep = app.add_subcommand("sweep-epsilon", "Tabulate nu_C against its closed form");
  sweep->add_option("--config", config, "Scenario file (YAML)")->required();
  sweep->add_option("--epsilons", epsilons, "Comma-separated epsilon values")->required();
  sweep->add_option("--out", out, "CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(config, out, grid_scale,
                     seed_opt->count() ? std::optional<std::uint64_t>(seed) : std::nullopt);
    return cmd_sweep(config, epsilons, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const scgt::Error& e) {
    std::cerr << "error: " << scgt::to_string(e.code()) << ": " << e.what() << "\n";
    return kExitConfig;
  }
}
