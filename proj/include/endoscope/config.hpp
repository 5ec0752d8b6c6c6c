#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "endoscope/dynamics.hpp"

namespace endo {

struct ConfigError : std::runtime_error {
  int line = 0;
  ConfigError(int line_, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_) + ": " + what), line(line_) {}
};

// Versioned key-value experiment description.  Sections: [system] selects and
// parameterizes the dynamical system, [pipeline] orders the stages and the
// truncation schedule, [output] names the report directory and formats.
struct ExperimentConfig {
  SystemDescriptor system;
  std::vector<std::string> stages;
  std::vector<int> truncations;     // strictly increasing
  unsigned long seed = 1;
  double tolerance_scale = 1.0;
  std::string out_dir = "out";
  std::vector<std::string> formats = {"json", "text"};
};

// stage names in dependency order
const std::vector<std::string>& known_stages();

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace endo
