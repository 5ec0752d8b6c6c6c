#include "endoscope/report.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace endo {

namespace {

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

// context plus the dimension fields, so the serialized record is flat
std::map<std::string, std::string> full_context(const CheckRecord& c) {
  std::map<std::string, std::string> ctx(c.context.begin(), c.context.end());
  if (c.is_dimension) {
    ctx["dimension"] = std::to_string(c.dimension);
    ctx["expected-dimension"] = std::to_string(c.expected_dimension);
  }
  if (c.exact) ctx["exact"] = "true";
  return ctx;
}

}  // namespace

std::string report_json(const VerificationReport& rep) {
  nlohmann::ordered_json root = nlohmann::ordered_json::array();
  for (const CheckRecord& c : rep.checks) {
    nlohmann::ordered_json j;
    j["name"] = c.name;
    j["defect"] = sci(c.defect);
    j["tolerance"] = sci(c.tolerance);
    j["pass"] = c.pass;
    nlohmann::ordered_json ctx = nlohmann::ordered_json::object();
    for (const auto& [k, v] : full_context(c)) ctx[k] = v;
    j["context"] = ctx;
    root.push_back(j);
  }
  return root.dump(2) + "\n";
}

std::string report_table(const VerificationReport& rep) {
  size_t w = 4;
  for (const CheckRecord& c : rep.checks) w = std::max(w, c.name.size());
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s  %-13s  %-13s  %-6s  %s\n", static_cast<int>(w), "name",
                "defect", "tolerance", "status", "notes");
  os << line;
  for (const CheckRecord& c : rep.checks) {
    std::string notes;
    for (const auto& [k, v] : full_context(c)) {
      if (!notes.empty()) notes += "; ";
      notes += k + "=" + v;
    }
    std::snprintf(line, sizeof line, "%-*s  %-13.6e  %-13.6e  %-6s  ", static_cast<int>(w),
                  c.name.c_str(), c.defect, c.tolerance, c.pass ? "PASS" : "FAIL");
    os << line << notes << "\n";
  }
  return os.str();
}

std::string matrix_csv(const Eigen::MatrixXcd& m) {
  std::ostringstream os;
  char cell[64];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(cell, sizeof cell, "%.12e%+.12ei", m(r, c).real(), m(r, c).imag());
      os << (c ? "," : "") << cell;
    }
    os << "\n";
  }
  return os.str();
}

void write_matrix(const std::string& path, const Eigen::MatrixXcd& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write("ENDOMTRX", 8);
  std::int64_t rows = m.rows(), cols = m.cols();
  out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double re = m(r, c).real(), im = m(r, c).imag();
      out.write(reinterpret_cast<const char*>(&re), sizeof re);
      out.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Eigen::MatrixXcd read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != "ENDOMTRX")
    throw std::runtime_error("not a matrix dump: " + path);
  std::int64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!in || rows < 0 || cols < 0) throw std::runtime_error("corrupt matrix dump: " + path);
  Eigen::MatrixXcd m(rows, cols);
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t c = 0; c < cols; ++c) {
      double re = 0, im = 0;
      in.read(reinterpret_cast<char*>(&re), sizeof re);
      in.read(reinterpret_cast<char*>(&im), sizeof im);
      m(r, c) = cd(re, im);
    }
  if (!in) throw std::runtime_error("corrupt matrix dump: " + path);
  return m;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace endo
