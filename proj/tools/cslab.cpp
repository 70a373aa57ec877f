#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "cslab/cli_io.hpp"
#include "cslab/error.hpp"
#include "cslab/experiments.hpp"
#include "cslab/test_function.hpp"

namespace {

// Exit codes: 0 all assertions pass, 1 an assertion failed, 2 invalid run or bad input.
constexpr int ok = 0, failed = 1, invalid = 2;

int run(const std::string& config_path, std::string out_dir) {
  const cslab::RunConfig cfg = cslab::load_config(config_path);
  if (out_dir.empty()) out_dir = cfg.output_dir;
  if (out_dir.empty()) throw cslab::ConfigError("no output directory: pass --out or set output_dir");
  const cslab::ScenarioReport report = cslab::run_scenario(cfg.scenario);
  for (const auto& p : cslab::write_report(report, out_dir)) std::cout << p.string() << "\n";

  std::size_t passed = 0;
  for (const auto& a : report.assertions) {
    if (a.passed) ++passed;
    else std::cerr << "FAIL " << a.name << " measured " << a.measured << " tolerance " << a.tolerance << "\n";
  }
  for (const auto& why : report.invalid_reasons) std::cerr << "INVALID " << why << "\n";
  std::cout << report.scenario << ": " << passed << "/" << report.assertions.size() << " assertions passed"
            << (report.valid ? "" : ", run invalid") << "\n";
  if (!report.valid) return invalid;
  return report.all_passed() ? ok : failed;
}

int verify_phi(int n, std::optional<double> eta) {
  const cslab::TestFunction tf = n == 3 && !eta ? cslab::build_phi_n3()
                                 : eta         ? cslab::build_phi_general(n, *eta)
                                               : cslab::build_phi_general(n);
  std::vector<double> radii;
  for (int k = 1; k <= 200; ++k) radii.push_back(0.05 * k);
  const cslab::PropertyReport pr = cslab::verify_properties(tf, radii);
  std::cout << cslab::property_report_json(pr);
  return pr.all_passed() ? ok : failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local smoothing laboratory"};
  app.require_subcommand(1);

  std::string config, out;
  auto* run_cmd = app.add_subcommand("run", "run the scenario of a config file and write its report");
  run_cmd->add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out, "output directory (overrides output_dir)");

  int n = 3;
  std::optional<double> eta;
  auto* phi_cmd = app.add_subcommand("verify-phi", "check the multiplier profile properties for dimension n");
  phi_cmd->add_option("--n", n, "dimension")->required();
  phi_cmd->add_option("--eta", eta, "source exponent (n >= 4); defaults to the interval midpoint");

  auto* list_cmd = app.add_subcommand("list-scenarios", "print the scenario names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : invalid;
  }

  try {
    if (*run_cmd) return run(config, out);
    if (*phi_cmd) return verify_phi(n, eta);
    if (*list_cmd) {
      for (auto s : cslab::all_scenarios()) std::cout << cslab::to_string(s) << "  " << cslab::describe(s) << "\n";
      return ok;
    }
  } catch (const cslab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
  } catch (const cslab::ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
  } catch (const cslab::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
  } catch (const cslab::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
  }
  return invalid;
}
