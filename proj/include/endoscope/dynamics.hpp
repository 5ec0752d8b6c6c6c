#pragma once

// Concrete N-to-one measure dynamical systems (X, mu, phi) together with
// their branch decompositions: domains U_i on which phi is injective,
// sections psi_i = (phi|U_i)^{-1}, and Radon-Nikodym weights
// u_i = d(mu|U_i o psi_i)/dmu.  The sum of the weights is the density w of
// mu o phi^{-1} with respect to mu.

#include "endoscope/exact.hpp"
#include "endoscope/util.hpp"
#include "endoscope/words.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace endo {

struct InvalidSystem : std::runtime_error {
  explicit InvalidSystem(const std::string& what) : std::runtime_error(what) {}
};
struct InvalidPoint : std::runtime_error {
  explicit InvalidPoint(const std::string& what) : std::runtime_error(what) {}
};

// f(theta) = sum_k c_k e^{2 pi i k theta}
struct TrigPoly {
  std::map<int, cd> c;

  TrigPoly() = default;
  static TrigPoly constant(cd v);
  static TrigPoly mode(int k, cd coeff = cd(1, 0));
  static TrigPoly one_plus_cos(double amp);  // 1 + amp*cos(2 pi theta)

  cd operator()(double theta) const;
  cd coeff(int k) const;
  int degree() const;
  bool empty() const { return c.empty(); }
  bool is_real() const;  // c_{-k} == conj(c_k)

  TrigPoly conjugate() const;
  TrigPoly operator+(const TrigPoly& o) const;
  TrigPoly operator*(const TrigPoly& o) const;
  TrigPoly scaled(cd s) const;
  // antiderivative evaluated between endpoints: integral of f over [a, b)
  cd integral(double a, double b) const;
};

enum class SystemKind {
  FullShift,
  CircleMonomial,
  BlaschkeCover,
  WeightedCircleMonomial,
  ProductShiftRotation,
};

std::string kind_name(SystemKind k);

struct SystemDescriptor {
  SystemKind kind = SystemKind::FullShift;
  int N = 2;              // number of branches
  std::vector<cd> zeros;  // BlaschkeCover
  TrigPoly rho;           // WeightedCircleMonomial density
  double tau = 0.0;       // ProductShiftRotation rotation angle

  static SystemDescriptor full_shift(int N);
  static SystemDescriptor circle_monomial(int N);
  static SystemDescriptor blaschke(std::vector<cd> zeros);
  static SystemDescriptor weighted_circle(int N, TrigPoly rho);
  static SystemDescriptor product_shift_rotation(int N, double tau);

  void validate() const;  // throws InvalidSystem
  bool circle_lane() const { return kind != SystemKind::FullShift; }
  bool exact_lane() const { return kind == SystemKind::FullShift; }
};

// A point: symbol prefix for shift components, angle in [0,1) for circle
// components.  Pure circle systems leave `symbols` empty; FullShift ignores
// `angle`.
struct Point {
  Word symbols;
  double angle = 0.0;
};

Point evaluate_map(const SystemDescriptor& sys, const Point& p);

struct Arc {
  double a = 0.0, b = 0.0;  // [a, b) with 0 <= a < b <= 1
  double length() const { return b - a; }
  bool contains(double t) const { return t >= a && t < b; }
};

// Boundary action of a finite Blaschke product with all zeros in the open
// disk.  The continuous lift is closed form:
//   Theta(theta) = sum_j [theta - Arg(1 - conj(a_j) e^{2 pi i theta}) / pi],
// strictly increasing with Theta(theta + 1) = Theta(theta) + N, and
//   Theta'(theta) = sum_j (1 - |a_j|^2) / |e^{2 pi i theta} - a_j|^2.
class BlaschkeMap {
 public:
  explicit BlaschkeMap(std::vector<cd> zeros);
  int degree() const { return static_cast<int>(zeros_.size()); }
  const std::vector<cd>& zeros() const { return zeros_; }

  cd eval_complex(double theta) const;  // value of the product at e^{2 pi i theta}
  double map(double theta) const;
  double lift(double theta) const;
  double lift_prime(double theta) const;
  double branch_point(int i) const { return tpts_[static_cast<size_t>(i)]; }  // i = 0..N
  double section(int i, double y) const;  // psi_i(y), i = 1..N, y in [0, 1)

 private:
  std::vector<cd> zeros_;
  double lift0_ = 0.0;
  std::vector<double> tpts_;
  double invert(double target, double lo, double hi) const;
};

struct NodeCache;

struct BranchDecomposition {
  SystemDescriptor sys;
  int N = 2;
  std::shared_ptr<const BlaschkeMap> bl;  // only for BlaschkeCover

  // circle lane
  Arc domain(int i) const;              // U_i, i = 1..N
  int branch_of(double theta) const;    // i with theta in U_i
  double map(double theta) const;       // phi
  double section(int i, double y) const;        // psi_i(y), y in [0, 1)
  double section_closed(int i, double y) const; // allows y == 1, returns sup
  double weight(int i, double y) const;         // u_i(y)
  // u_i(y) when s = psi_i(y) is already known (avoids re-inverting)
  double weight_at_section(int i, double y, double s) const;
  double total_weight(double y) const;          // w(y)
  double density(double theta) const;           // d mu / d theta

  // everything the operator closures need at one point, memoized; copies of
  // the decomposition share the table, so quadrature nodes are resolved once
  // no matter how many closures revisit them
  struct NodeInfo {
    int branch = 0;         // branch whose domain contains the point
    double y = 0.0;         // phi(point)
    double u_fwd = 0.0;     // u_branch(phi(point)), evaluated at the exact preimage
    double w_fwd = 0.0;     // w(phi(point))
    std::vector<double> s;  // sections psi_k(point), k = 1..N at index k-1
    std::vector<double> u;  // weights u_k(point)
    double w = 0.0;         // total weight at the point
  };
  const NodeInfo& node(double theta) const;  // circle lane only

  // exact lane (FullShift; shift factor of the product)
  Rat weight_exact() const { return Rat(1) / N; }

  mutable std::shared_ptr<NodeCache> cache;
};

BranchDecomposition decompose(const SystemDescriptor& sys);

struct CylinderSet {
  Word w;
  std::optional<Arc> arc;  // circle kinds
  double measure = 0.0;
  bool has_exact = false;
  Rat exact_measure;  // FullShift / ProductShiftRotation: N^{-|w|}
};

CylinderSet cylinder(const SystemDescriptor& sys, const BranchDecomposition& dec, const Word& w);

// test functions for the sigma-algebra generation diagnostic
struct CircleTestFn {
  std::function<cd(double)> f;
  std::vector<double> breakpoints;  // interior jump locations of f
};
struct ShiftTestFn {
  int depth = 0;  // f is constant on depth-`depth` cylinders
  std::function<cd(const Word&)> value;
};
struct ProductTestFn {
  int shift_depth = 0;
  std::vector<double> circle_breakpoints;
  std::function<cd(const Word&, double)> value;
};

// || f - E[f | sigma(U_w : |w| <= depth)] ||_{L^2(mu)}
double generation_defect(const SystemDescriptor& sys, const BranchDecomposition& dec, int depth,
                         const CircleTestFn& f);
double generation_defect(const SystemDescriptor& sys, const BranchDecomposition& dec, int depth,
                         const ShiftTestFn& f);
double generation_defect(const SystemDescriptor& sys, const BranchDecomposition& dec, int depth,
                         const ProductTestFn& f);

}  // namespace endo
