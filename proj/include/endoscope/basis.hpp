#pragma once

// Truncated orthonormal bases of L^2(X, mu).
//
//   FourierModes   e_k(theta) = exp(2 pi i k theta), |k| <= K.  Orthonormal
//                  for arc length; for a weighted measure the modes are
//                  re-orthonormalized against rho dtheta (Cholesky of the
//                  Gram matrix, deterministic).
//   CylinderDepth  normalized cylinder indicators e_w = chi_[w] / sqrt(mu[w])
//                  at a fixed depth d (shift lane; matrices exact).
//   TensorProduct  CylinderDepth x FourierModes for the product system.

#include "endoscope/dynamics.hpp"
#include "endoscope/quadrature.hpp"

#include <memory>

namespace endo {

enum class BasisKind { FourierModes, CylinderDepth, TensorProduct };

class TruncationBasis {
 public:
  BasisKind kind = BasisKind::FourierModes;
  SystemDescriptor sys;

  // FourierModes
  int K = 0;        // modes |k| <= K, size 2K+1
  Quadrature quad;  // shared grid, weights include the measure density
  Eigen::MatrixXcd samples;  // nodes x size, column j = basis function j
  Eigen::MatrixXcd coeff;    // raw-mode coefficients, column j (weighted case)

  // CylinderDepth / TensorProduct shift factor
  int N = 2;
  int depth = 0;

  long size() const;
  std::string label(long j) const;

  // circle lane
  cd eval(long j, double theta) const;
  CircleFn fn(long j) const;
  Eigen::VectorXcd expand(const CircleFn& f) const;  // <e_j, f>_mu
  // shift lane: value of e_w on the cylinder of a depth >= `depth` word
  double shift_value(long j, const Word& w) const;

  static std::shared_ptr<const TruncationBasis> fourier(const SystemDescriptor& sys,
                                                        const BranchDecomposition& dec, int K,
                                                        long target_nodes = 4096,
                                                        int breakpoint_depth = 3);
  static std::shared_ptr<const TruncationBasis> cylinders(const SystemDescriptor& sys, int depth);
  static std::shared_ptr<const TruncationBasis> tensor(const SystemDescriptor& sys, int depth,
                                                       int K, long target_nodes = 2048);
};

// max |Gram - I| under mu; exact 0 for CylinderDepth by construction
double gram_defect(const TruncationBasis& b);

}  // namespace endo
