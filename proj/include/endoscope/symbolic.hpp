#pragma once

// Exact term rewriting in the Cuntz algebra O_N.  Elements are finite linear
// combinations of words s_mu s_nu* with Gaussian rational coefficients, kept
// in a canonical form: no zero coefficients and no collapsible family
// sum_i c s_{mu i} s_{nu i}* (which rewrites to c s_mu s_nu*).  Equality of
// canonical forms decides equality in the algebraic span.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "endoscope/exact.hpp"
#include "endoscope/words.hpp"

namespace endo {

struct CuntzElement {
  int N = 2;
  std::map<std::pair<Word, Word>, GaussRat> terms;

  CuntzElement() = default;
  explicit CuntzElement(int n) : N(n) {}

  static CuntzElement zero(int n) { return CuntzElement(n); }
  static CuntzElement identity(int n);
  static CuntzElement word(int n, Word mu, Word nu = {}, GaussRat coeff = GaussRat(1));

  bool is_zero() const { return terms.empty(); }
  bool is_identity() const;
  friend bool operator==(const CuntzElement&, const CuntzElement&) = default;
};

// collapse rule applied to a fixpoint; idempotent
CuntzElement normalize(CuntzElement a);

CuntzElement adjoint(const CuntzElement& a);
CuntzElement multiply(const CuntzElement& a, const CuntzElement& b);
CuntzElement scale(const GaussRat& c, CuntzElement a);

CuntzElement operator+(const CuntzElement& a, const CuntzElement& b);
CuntzElement operator-(const CuntzElement& a, const CuntzElement& b);
inline CuntzElement operator*(const CuntzElement& a, const CuntzElement& b) {
  return multiply(a, b);
}

// compact text form, e.g. (3/2+1/2i)*s[1,2]·s*[2] + s[1]; round-trips through
// parse_element back to the identical canonical form
std::string print(const CuntzElement& a);
CuntzElement parse_element(const std::string& text, int n = 2);

struct BasisWitness {
  bool ok = true;
  std::string detail;
};

// <b_i, b_j> = b_i* b_j = delta_ij and x = sum_i b_i (b_i* x), all exact;
// returns the first failing identity when one exists
BasisWitness verify_basis(const std::vector<CuntzElement>& basis,
                          const std::vector<CuntzElement>& xs);

struct ModuleMatrix {
  long rows = 0, cols = 0;
  std::vector<CuntzElement> entries;  // row major

  ModuleMatrix(long r, long c, int n);
  CuntzElement& at(long r, long c) { return entries[r * cols + c]; }
  const CuntzElement& at(long r, long c) const { return entries[r * cols + c]; }
};

// U U* and U* U both reduce to identity grids
bool module_unitary_check(const ModuleMatrix& U);

// the 1 x n row [s_1, s_2 s_1, s_2 s_2, ...] obtained by repeatedly expanding
// the last entry; exhibits module bases of every reachable cardinality
ModuleMatrix iterated_basis(int n_entries, int n = 2);

// matrix of the element on the shift spaces V_{d_in} -> V_{d_out}; every term
// must satisfy |nu| <= d_in and |mu| - |nu| = d_out - d_in
EMat rep_exact(const CuntzElement& a, int d_in, int d_out);

}  // namespace endo
