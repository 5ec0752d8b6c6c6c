#pragma once

// Defect measurements for every operator identity the families are supposed
// to satisfy.  Each check returns structured records; pass is always
// recomputable from defect and tolerance (or dimension and expectation).
//
// Lower-bound claims (witness separations, norm floors) are recorded as a
// shortfall: defect = max(0, floor - observed), tolerance = allowed slack,
// with the observed value kept in the context map.

#include "endoscope/cuntz.hpp"
#include "endoscope/util.hpp"

#include <map>
#include <string>

namespace endo {

struct CheckRecord {
  std::string name;
  double defect = 0.0;
  double tolerance = 0.0;
  bool is_dimension = false;
  long dimension = 0;
  long expected_dimension = 0;
  bool exact = false;
  bool pass = true;
  std::map<std::string, std::string> context;

  void finish() { pass = is_dimension ? (dimension == expected_dimension) : (defect <= tolerance); }
};

struct VerificationReport {
  std::vector<CheckRecord> checks;

  bool all_pass() const;
  CheckRecord& add(CheckRecord r);
  CheckRecord& add_defect(const std::string& name, double defect, double tol, bool exact = false);
  // observed must stay >= floor - slack
  CheckRecord& add_floor(const std::string& name, double observed, double floor, double slack,
                         bool exact = false);
  CheckRecord& add_dimension(const std::string& name, long dim, long expected, bool exact = false);
  void merge(VerificationReport other);
};

struct TestFunctions {
  std::vector<TrigPoly> circle;
  int shift_depth = 2;

  static TestFunctions defaults(const SystemDescriptor& sys);
};

// branch data sanity: sections invert the map, land in their arcs, stay
// separated; the arcs tile the circle; the weights reproduce the pushforward
// (checked against an independent midpoint quadrature)
VerificationReport decomposition_checks(const SystemDescriptor& sys,
                                        const BranchDecomposition& dec);

// S_i*S_j = delta_ij I and sum_i S_iS_i* = I
VerificationReport check_cuntz(const CuntzFamily& S, double tol);

// sum_i S_i M_f S_i* = M_{f o phi}
VerificationReport check_implements(const CuntzFamily& S, const TestFunctions& fns, double tol);

// beta_i(a) = S_i* M_a S_i is multiplication by a o psi_i, and beta_i
// reverses the endomorphism: beta_i(a o phi) = a
VerificationReport check_left_inverses(const CuntzFamily& S, const TestFunctions& fns, double tol);

// T = S_1*(sum_i S_i T S_i*)S_1 on random T, plus the non-surjectivity
// witness: least-squares distance from S_1 to { M_{g o phi} } stays above 1/2
VerificationReport check_injectivity_identity(const CuntzFamily& S, int trials, Rng& rng,
                                              double tol);

// S_1 M_a = M_{a o phi} S_1, formed as a closure composite and compressed
// once, so no truncation gating enters
VerificationReport check_intertwiner(const CuntzFamily& S, const TestFunctions& fns, double tol);

// same identity for an arbitrary compressed T, on rows/columns where the
// multiplications lose no mass; the probe form for generic (failing) T
VerificationReport check_intertwiner(const OperatorMatrix& T, const SystemDescriptor& sys,
                                     const BranchDecomposition& dec, const TestFunctions& fns,
                                     double tol);

// dimension of { f in the depth-d span : f o phi = f }; 1 means ergodic
CheckRecord fixed_space_masa(const SystemDescriptor& sys, const BranchDecomposition& dec,
                             int depth);
CheckRecord fixed_space_masa(const SystemDescriptor& sys, const BranchDecomposition& dec,
                             std::shared_ptr<const TruncationBasis> in,
                             std::shared_ptr<const TruncationBasis> out, double cutoff = 1e-8);

// dimension of { T : T P_w = P_w T, |w| <= depth } on the depth-`ambient`
// cylinder span; the expected value N^depth * N^{2(ambient-depth)} collapses
// to the diagonal MASA dimension N^depth when ambient = depth
CheckRecord word_projection_commutant(const CuntzFamily& S, int depth, int ambient_depth = -1);

// max over seeded random T of ||alpha_S(T) - alpha_Q(T)||, with the pairing
// scalarity; expect_equal = false turns both into witness floors
VerificationReport compare_extensions(const CuntzFamily& S, const CuntzFamily& Q, int trials,
                                      unsigned long seed, double tol, bool expect_equal = true,
                                      double difference_floor = 0.1, double scalarity_floor = 0.5);

// <xi_i, xi_j>_L = delta_ij and a = sum_i xi_i alpha(L(conj(xi_i) a))
VerificationReport check_module_basis(const std::vector<ModuleVector>& xis, const TransferData& T,
                                      const TestFunctions& fns, double tol);

// ||a||_L <= ||a||_inf <= M ||a||_L with M = c1 sqrt(K_b); c1 from the
// singular values of the composition compression, K_b the measured
// boundedness constant max mu(phi(U_w))/mu(U_w)
VerificationReport check_norm_equivalence(const TransferData& T, const OperatorMatrix& C,
                                          const TestFunctions& fns, double tol = 1e-8);
VerificationReport check_norm_equivalence_exact(const TransferData& T, int depth,
                                                double tol = 1e-8);

}  // namespace endo
