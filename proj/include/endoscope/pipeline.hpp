#pragma once

#include <string>
#include <vector>

#include "endoscope/config.hpp"
#include "endoscope/verify.hpp"

namespace endo {

struct StageResult {
  std::string stage;
  int truncation = 0;
  double seconds = 0.0;
  VerificationReport report;
};

struct PipelineResult {
  std::vector<StageResult> stages;
  bool all_pass() const;
};

// executes the configured stages at every truncation; pure (no file output)
PipelineResult run_pipeline(const ExperimentConfig& cfg);

// run_pipeline plus report files <stage>-<truncation>.{json,txt} and a
// summary table under cfg.out_dir; returns the process exit status
int run_experiment(const ExperimentConfig& cfg);

struct ConvergenceRow {
  int truncation = 0;
  double defect = 0.0;
};

// defect of one named check across the truncation schedule
std::vector<ConvergenceRow> convergence_study(const ExperimentConfig& cfg,
                                              const std::string& check);
std::string convergence_table(const std::string& check, const std::vector<ConvergenceRow>& rows);

}  // namespace endo
