// Batch runner: executes experiment configs, truncation-convergence studies,
// and the symbolic expression evaluator.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "endoscope/pipeline.hpp"
#include "endoscope/symbolic.hpp"

namespace {

endo::ExperimentConfig load_with_overrides(const std::string& path,
                                           const std::optional<unsigned long>& seed,
                                           const std::optional<double>& tol_scale,
                                           const std::optional<std::string>& out) {
  endo::ExperimentConfig cfg = endo::load_config(path);
  if (seed) cfg.seed = *seed;
  if (tol_scale) cfg.tolerance_scale = *tol_scale;
  if (out) cfg.out_dir = *out;
  return cfg;
}

int run_symbolic(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open expression file: " << path << "\n";
    return 2;
  }
  std::string line;
  int lineno = 0, status = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = line;
    size_t hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    if (s.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      endo::CuntzElement e = endo::parse_element(s);
      std::cout << endo::print(e) << "\n";
    } catch (const std::exception& ex) {
      std::cerr << "line " << lineno << ": " << ex.what() << "\n";
      status = 1;
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"endoscope: Cuntz families, transfer operators, and module bases "
               "for N-to-one circle and shift systems"};
  app.require_subcommand(1);

  std::optional<unsigned long> seed;
  std::optional<double> tol_scale;
  std::optional<std::string> out_dir;
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--tolerance-scale", tol_scale, "scale all nonzero tolerances");
  app.add_option("--out", out_dir, "override the report directory");

  std::string run_config;
  CLI::App* run = app.add_subcommand("run", "execute a config's pipeline and write reports");
  run->add_option("config", run_config, "config file")->required();

  std::string study_config, study_check;
  CLI::App* study = app.add_subcommand("study", "defect of one check across the truncation schedule");
  study->add_option("config", study_config, "config file")->required();
  study->add_option("--check", study_check, "check name")->required();

  std::string expr_file;
  CLI::App* symbolic = app.add_subcommand("symbolic", "canonicalize Cuntz algebra expressions");
  symbolic->add_option("file", expr_file, "expression file, one element per line")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return endo::run_experiment(load_with_overrides(run_config, seed, tol_scale, out_dir));
    if (study->parsed()) {
      endo::ExperimentConfig cfg = load_with_overrides(study_config, seed, tol_scale, out_dir);
      auto rows = endo::convergence_study(cfg, study_check);
      std::cout << endo::convergence_table(study_check, rows);
      return 0;
    }
    if (symbolic->parsed()) return run_symbolic(expr_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
