#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "endoscope/verify.hpp"

namespace endo {

// machine format: one array of {name, defect, tolerance, pass, context}
std::string report_json(const VerificationReport& rep);

// aligned human-readable table, one row per check
std::string report_table(const VerificationReport& rep);

// cell format re+imi, comma-separated columns
std::string matrix_csv(const Eigen::MatrixXcd& m);

// raw dump: 8-byte magic, int64 rows, int64 cols, row-major complex doubles
void write_matrix(const std::string& path, const Eigen::MatrixXcd& m);
Eigen::MatrixXcd read_matrix(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace endo
