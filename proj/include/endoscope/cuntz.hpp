#pragma once

// Cuntz families implementing the Koopman endomorphism alpha(f) = f o phi,
// built by the two available routes:
//   Sections          (S_i f)(x) = chi_{U_i}(x) f(phi(x)) u_i(phi(x))^{-1/2}
//   PolarModuleBasis  S_i = M_{xi_i} S_phi with S_phi the polar isometry of
//                     C_phi and xi_i a module basis
// plus twisted variants used to probe the pairing dichotomy.
//
// On the circle the family carries exact function-space actions (closures)
// and their one-shot compressions; on the full shift everything is an exact
// matrix on cylinder bases, V_{d_in} -> V_{d_out} with d_out = d_in + 1.

#include "endoscope/exact_ops.hpp"
#include "endoscope/operators.hpp"

namespace endo {

enum class Route { Sections, PolarModuleBasis, Twisted };
std::string route_name(Route r);

struct CuntzFamily {
  Route route = Route::Sections;
  SystemDescriptor sys;
  BranchDecomposition dec;
  int N = 2;

  // circle lane
  std::shared_ptr<const TruncationBasis> domain, codomain;
  std::vector<LinearOperator::Action> act;  // f -> S_i f
  std::vector<LinearOperator::Action> adj;  // g -> S_i* g
  std::vector<OperatorMatrix> mats;         // compressions, codomain x domain

  // shift lane
  bool exact = false;
  int d_in = 0, d_out = 0;
  std::vector<EMat> emats;

  long members() const { return exact ? static_cast<long>(emats.size()) : static_cast<long>(act.size()); }
};

CuntzFamily cuntz_from_sections(const SystemDescriptor& sys, const BranchDecomposition& dec,
                                std::shared_ptr<const TruncationBasis> domain,
                                std::shared_ptr<const TruncationBasis> codomain);
// shift lane: exact matrices at depth d_in -> d_in + 1
CuntzFamily cuntz_from_sections_exact(const SystemDescriptor& sys, const BranchDecomposition& dec,
                                      int d_in);

struct TransferData {
  SystemDescriptor sys;
  BranchDecomposition dec;
  bool exact = false;

  CircleFn w;      // density of mu o phi^{-1} w.r.t. mu (total branch weight)
  CircleFn a_phi;  // sqrt(w), the positive polar factor as a function

  // pointwise transfer L(a)(y) = (1/w(y)) sum_i u_i(y) a(psi_i(y))
  CircleFn apply(const CircleFn& a) const;

  // reconciliation of the operator route S_phi* M_a S_phi against the
  // pointwise formula, and of the polar positive factor against M_sqrt(w)
  double route_defect = 0.0;
  double polar_a_defect = 0.0;
  double polar_s_defect = 0.0;
  std::optional<double> offdiag_defect;  // non-Toeplitz mass (pure Fourier bases)
};

// circle lane; throws if the two transfer routes disagree beyond tol
TransferData transfer(const SystemDescriptor& sys, const BranchDecomposition& dec,
                      const PolarDecomposition& polar, const std::vector<TrigPoly>& test_fns,
                      double tol = 1e-6);
// shift lane (exact): value-vector transfer is transfer_values(); this
// packages the metadata only
TransferData transfer_exact(const SystemDescriptor& sys, const BranchDecomposition& dec);

struct ModuleVector {
  // circle lane
  CircleFn f;
  // shift lane
  bool exact = false;
  int depth = 0;
  std::vector<SqrtExt> vals;
};

// xi_i = chi_{U_i} ((w/u_i) o phi)^{1/2}, so that M_{xi_i} S_phi recovers
// the section isometries and <xi_i, xi_j>_L = delta_ij
std::vector<ModuleVector> module_basis_from_sections(const SystemDescriptor& sys,
                                                     const BranchDecomposition& dec);

// throws if the xis fail <xi_i, xi_j>_L = delta_ij beyond 1e-6
CuntzFamily lift_to_cuntz(const SystemDescriptor& sys, const BranchDecomposition& dec,
                          const std::vector<ModuleVector>& xis,
                          std::shared_ptr<const TruncationBasis> domain,
                          std::shared_ptr<const TruncationBasis> codomain);
CuntzFamily lift_to_cuntz_exact(const SystemDescriptor& sys, const BranchDecomposition& dec,
                                const std::vector<ModuleVector>& xis, int d_in);

struct TwistSpec {
  Eigen::MatrixXcd scalar;          // N x N scalar unitary, or
  std::vector<TrigPoly> functions;  // diagonal of unimodular multipliers

  bool is_scalar() const { return scalar.size() > 0; }
  static TwistSpec rotation2(double angle);  // 2x2 real rotation
  static TwistSpec diagonal(std::vector<TrigPoly> ms);
};

// scalar case Q_j = sum_i S_i u_{ij}; function case Q_i = S_i M_{m_i}.
// Throws if the spec is not unitary/unimodular to 1e-10.
CuntzFamily twist_family(const CuntzFamily& S, const TwistSpec& u);

struct PairingData {
  long rows = 0, cols = 0;
  std::vector<OperatorMatrix> blocks;  // row-major U_ij = S_i* Q_j, square on the domain
  std::vector<EMat> eblocks;           // exact lane
  Eigen::MatrixXcd scalars;            // lambda_ij = tr(U_ij)/dim
  Eigen::MatrixXd scalarity;           // ||U_ij - lambda_ij I||_F / sqrt(dim)
  double unitarity_defect = 0.0;       // max over both U*U and UU* block identities
  bool exact = false;
  long recovered_n = -1;  // member count when square and block-unitary, else -1

  double max_scalarity() const { return scalarity.size() ? scalarity.maxCoeff() : 0.0; }
};

PairingData pairing_matrix(const CuntzFamily& S, const CuntzFamily& Q,
                           double unitary_tol = 1e-6);

}  // namespace endo
