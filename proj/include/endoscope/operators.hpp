#pragma once

// Operator compressions between truncated bases, plus the structural
// (function-space) operator abstraction.
//
// A compression P A P of a product of operators is not the product of the
// compressions: composition operators concentrate mass near truncation
// edges and the clipped cross terms are O(1/K), far above the tolerances
// the identities are supposed to meet.  Identity checks therefore act on
// functions first (closures composed exactly, sampled on the panel grid)
// and compress once at the end; raw matrix products are reserved for
// negative tests and spectra.  Finite-rank conjugations A T A* compress
// exactly through the column matrices P A B, which is what makes the
// extension-comparison checks reliable on compressions.

#include "endoscope/basis.hpp"

#include <memory>
#include <optional>

namespace endo {

struct OperatorMatrix {
  std::shared_ptr<const TruncationBasis> domain, codomain;
  Eigen::MatrixXcd m;
  Eigen::ArrayXd spillover;  // per column: ||true image||^2 - ||captured||^2

  std::vector<long> interior(double tol = 1e-8) const;
  // square sub-block on interior columns of both sides (square matrices)
  Eigen::MatrixXcd interior_block(double tol = 1e-8) const;
};

double spectral_norm(const Eigen::MatrixXcd& m);

// <codomain_j, f . domain_k>_mu.  Closed-form banded entries on pure
// Fourier bases; quadrature with a refinement cross-check otherwise.
OperatorMatrix multiplication_operator(const TrigPoly& f,
                                       std::shared_ptr<const TruncationBasis> in,
                                       std::shared_ptr<const TruncationBasis> out);
OperatorMatrix multiplication_operator(const CircleFn& f, std::vector<double> breaks,
                                       std::shared_ptr<const TruncationBasis> in,
                                       std::shared_ptr<const TruncationBasis> out);

// <codomain_j, domain_k o phi>_mu with per-column spillover
OperatorMatrix composition_operator(const SystemDescriptor& sys, const BranchDecomposition& dec,
                                    std::shared_ptr<const TruncationBasis> in,
                                    std::shared_ptr<const TruncationBasis> out);

struct PolarDecomposition {
  OperatorMatrix S;  // isometry factor, S*S = I to machine precision
  OperatorMatrix a;  // positive factor (C*C)^{1/2} on the domain
  Eigen::VectorXd eigenvalues;  // of C*C
  double reconstruct_defect = 0.0;  // ||S a - C||_2
};

// throws if C is not bounded below at this truncation (smallest singular
// value <= 1e-10)
PolarDecomposition polar_decompose(const OperatorMatrix& C);

std::pair<double, double> singular_bounds(const OperatorMatrix& C);
// restricted to columns with spillover <= tol
std::pair<double, double> singular_bounds(const OperatorMatrix& C, double interior_tol);

// Structural operator: acts on functions through a closure when one is
// known, otherwise through its matrix (P-expansion).
class LinearOperator {
 public:
  using Action = std::function<CircleFn(const CircleFn&)>;

  static LinearOperator structural(Action act, std::shared_ptr<const TruncationBasis> in,
                                   std::shared_ptr<const TruncationBasis> out);
  static LinearOperator matrix(OperatorMatrix m);

  bool is_structural() const { return static_cast<bool>(act_); }
  CircleFn apply(const CircleFn& f) const;
  const OperatorMatrix& compress() const;  // cached
  const std::shared_ptr<const TruncationBasis>& domain() const { return domain_; }
  const std::shared_ptr<const TruncationBasis>& codomain() const { return codomain_; }

 private:
  Action act_;
  std::shared_ptr<const TruncationBasis> domain_, codomain_;
  mutable std::optional<OperatorMatrix> mat_;
};

// compression of a structural action: columns = <out_j, act(in_k)>_mu,
// spillover tracked against the true image norms
OperatorMatrix compress_action(const LinearOperator::Action& act,
                               const std::shared_ptr<const TruncationBasis>& in,
                               const std::shared_ptr<const TruncationBasis>& out);

}  // namespace endo
