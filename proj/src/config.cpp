#include "endoscope/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace endo {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& s, int line) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw ConfigError(line, "expected a number, got '" + s + "'");
  return v;
}

long to_long(const std::string& s, int line) {
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw ConfigError(line, "expected an integer, got '" + s + "'");
  return v;
}

// a, ai, a+bi, a-bi with decimal parts
cd to_complex(const std::string& s, int line) {
  const char* p = s.c_str();
  char* end = nullptr;
  double first = std::strtod(p, &end);
  if (end == p) throw ConfigError(line, "expected a complex number, got '" + s + "'");
  if (*end == 'i' && *(end + 1) == '\0') return cd(0.0, first);
  if (*end == '\0') return cd(first, 0.0);
  if (*end != '+' && *end != '-') throw ConfigError(line, "malformed complex number '" + s + "'");
  const char* q = end;
  double second = std::strtod(q, &end);
  if (end == q || *end != 'i' || *(end + 1) != '\0')
    throw ConfigError(line, "malformed complex number '" + s + "'");
  return cd(first, second);
}

struct Entry {
  std::string value;
  int line = 0;
};

}  // namespace

const std::vector<std::string>& known_stages() {
  static const std::vector<std::string> order = {
      "decompose",      "build-sections", "build-polar",    "build-transfer",
      "verify-all",     "pairing-study",  "symbolic-suite",
  };
  return order;
}

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, Entry> kv;  // "section.key" -> value
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  bool have_version = false;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    size_t hash = s.find('#');
    if (hash != std::string::npos) s = trim(s.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "system" && section != "pipeline" && section != "output")
        throw ConfigError(line, "unknown section '" + section + "'");
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError(line, "empty key");
    if (key == "spec_version") {
      if (to_long(value, line) != 1) throw ConfigError(line, "unsupported spec_version");
      have_version = true;
      continue;
    }
    if (section.empty()) throw ConfigError(line, "key '" + key + "' outside any section");
    std::string full = section + "." + key;
    if (kv.count(full)) throw ConfigError(line, "duplicate key '" + key + "'");
    kv[full] = {value, line};
  }
  if (!have_version) throw ConfigError(0, "missing required key spec_version");

  auto take = [&](const std::string& full) -> const Entry* {
    auto it = kv.find(full);
    if (it == kv.end()) return nullptr;
    return &it->second;
  };

  ExperimentConfig cfg;

  const Entry* kind = take("system.kind");
  if (!kind) throw ConfigError(0, "missing required key kind in [system]");
  int branches = 2;
  if (const Entry* e = take("system.branches")) branches = static_cast<int>(to_long(e->value, e->line));
  if (kind->value == "full-shift") {
    cfg.system = SystemDescriptor::full_shift(branches);
  } else if (kind->value == "circle-monomial") {
    cfg.system = SystemDescriptor::circle_monomial(branches);
  } else if (kind->value == "blaschke") {
    const Entry* z = take("system.zeros");
    if (!z) throw ConfigError(kind->line, "blaschke systems need a zeros list");
    std::vector<cd> zeros;
    for (const std::string& item : split_list(z->value)) zeros.push_back(to_complex(item, z->line));
    cfg.system = SystemDescriptor::blaschke(std::move(zeros));
  } else if (kind->value == "weighted-circle-monomial") {
    double amp = 0.5;
    if (const Entry* e = take("system.rho_amplitude")) amp = to_double(e->value, e->line);
    cfg.system = SystemDescriptor::weighted_circle(branches, TrigPoly::one_plus_cos(amp));
  } else if (kind->value == "product-shift-rotation") {
    const Entry* r = take("system.rotation");
    if (!r) throw ConfigError(kind->line, "product systems need a rotation angle");
    cfg.system = SystemDescriptor::product_shift_rotation(branches, to_double(r->value, r->line));
  } else {
    throw ConfigError(kind->line, "unknown system kind '" + kind->value + "'");
  }
  cfg.system.validate();

  const Entry* st = take("pipeline.stages");
  if (!st) throw ConfigError(0, "missing required key stages in [pipeline]");
  cfg.stages = split_list(st->value);
  if (cfg.stages.empty()) throw ConfigError(st->line, "stages list is empty");
  static const std::map<std::string, std::string> prereq = {
      {"build-sections", "decompose"},   {"build-polar", "decompose"},
      {"build-transfer", "build-polar"}, {"verify-all", "decompose"},
      {"pairing-study", "build-sections"},
  };
  for (size_t i = 0; i < cfg.stages.size(); ++i) {
    const std::string& s = cfg.stages[i];
    const auto& order = known_stages();
    if (std::find(order.begin(), order.end(), s) == order.end())
      throw ConfigError(st->line, "unknown stage '" + s + "'");
    if (std::count(cfg.stages.begin(), cfg.stages.end(), s) > 1)
      throw ConfigError(st->line, "stage '" + s + "' listed twice");
    auto p = prereq.find(s);
    if (p != prereq.end()) {
      auto at = std::find(cfg.stages.begin(), cfg.stages.begin() + i, p->second);
      if (at == cfg.stages.begin() + static_cast<long>(i))
        throw ConfigError(st->line, "stage '" + s + "' needs '" + p->second + "' before it");
    }
  }

  const Entry* tr = take("pipeline.truncations");
  if (!tr) throw ConfigError(0, "missing required key truncations in [pipeline]");
  for (const std::string& item : split_list(tr->value))
    cfg.truncations.push_back(static_cast<int>(to_long(item, tr->line)));
  if (cfg.truncations.empty()) throw ConfigError(tr->line, "truncation schedule is empty");
  for (size_t i = 0; i + 1 < cfg.truncations.size(); ++i)
    if (cfg.truncations[i] >= cfg.truncations[i + 1])
      throw ConfigError(tr->line, "truncation sizes strictly increasing");
  for (int t : cfg.truncations)
    if (t < 1) throw ConfigError(tr->line, "truncation sizes must be positive");

  if (const Entry* e = take("pipeline.seed")) cfg.seed = static_cast<unsigned long>(to_long(e->value, e->line));
  if (const Entry* e = take("pipeline.tolerance_scale")) {
    cfg.tolerance_scale = to_double(e->value, e->line);
    if (cfg.tolerance_scale <= 0) throw ConfigError(e->line, "tolerance_scale must be positive");
  }

  if (const Entry* e = take("output.directory")) cfg.out_dir = e->value;
  if (const Entry* e = take("output.formats")) {
    cfg.formats = split_list(e->value);
    for (const std::string& f : cfg.formats)
      if (f != "json" && f != "text") throw ConfigError(e->line, "unknown format '" + f + "'");
  }

  for (const auto& [full, entry] : kv) {
    static const std::vector<std::string> known = {
        "system.kind",          "system.branches",       "system.zeros",
        "system.rho_amplitude", "system.rotation",       "pipeline.stages",
        "pipeline.truncations", "pipeline.seed",         "pipeline.tolerance_scale",
        "output.directory",     "output.formats",
    };
    if (std::find(known.begin(), known.end(), full) == known.end())
      throw ConfigError(entry.line, "unknown key '" + full + "'");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace endo
