#pragma once

// Circle quadrature.  Two flavors:
//  * uniform midpoint rule (spectral for smooth periodic integrands, exact
//    for jumps aligned to the grid) -- the independent oracle path;
//  * composite 16-point Gauss-Legendre panels subdivided at cylinder
//    breakpoints -- spectrally exact for the piecewise-analytic integrands
//    produced by branch-localized operators, including maps whose branch
//    endpoints are not grid-aligned.

#include "endoscope/dynamics.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <vector>

namespace endo {

using CircleFn = std::function<cd(double)>;

// wrap f with a value table; worthwhile whenever the same evaluation points
// recur across compression columns (not safe for concurrent callers)
CircleFn memoize_fn(CircleFn f);

const std::array<double, 16>& gl16_nodes();    // on [0, 1]
const std::array<double, 16>& gl16_weights();  // sum to 1

// integral over [a, b] with composite Gauss-Legendre panels of length
// at most max_panel
cd integrate_arc(const CircleFn& f, double a, double b, double max_panel);

struct Quadrature {
  Eigen::ArrayXd x;  // nodes in [0, 1)
  Eigen::ArrayXd w;  // weights including the measure density

  long size() const { return x.size(); }

  cd integrate(const CircleFn& f) const;
  cd inner(const CircleFn& f, const CircleFn& g) const;  // <f, g> = int conj(f) g dmu
  Eigen::VectorXcd sample(const CircleFn& f) const;

  // <A_j, B_k> for sampled column families (nodes x m), (nodes x n)
  Eigen::MatrixXcd gram(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) const;

  static Quadrature midpoint(long M, const std::function<double(double)>& density = {});
  static Quadrature panels(std::vector<double> breakpoints, long target_nodes,
                           const std::function<double(double)>& density = {});
  // breakpoints = endpoints of all cylinders up to `cylinder_depth`, plus extras
  static Quadrature for_system(const SystemDescriptor& sys, const BranchDecomposition& dec,
                               int cylinder_depth, std::vector<double> extra_breakpoints,
                               long target_nodes);
};

}  // namespace endo
