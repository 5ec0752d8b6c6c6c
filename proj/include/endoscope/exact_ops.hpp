#pragma once

// Exact matrices on the cylinder bases of the full shift.  V_d denotes the
// span of the normalized depth-d cylinder indicators e_w = chi_[w] N^{d/2};
// every operator below maps V_d into V_{d+1} or acts diagonally, and all
// entries live in the exact scalar tower, so the shift-lane identities are
// literal matrix equalities.

#include "endoscope/exact.hpp"
#include "endoscope/words.hpp"

#include <vector>

namespace endo {

// e_w -> e_{iw}
EMat shift_isometry(int N, int d, int i);

// C_sigma e_w = N^{-1/2} sum_i e_{iw}
EMat shift_composition(int N, int d);

// refinement isometry J e_w = N^{-1/2} sum_i e_{wi}; J f is the same
// function f viewed one level deeper
EMat shift_embed(int N, int d);

// diagonal multiplication by the depth-d value vector
EMat shift_mult(int N, int d, const std::vector<SqrtExt>& vals);

// value vector utilities on depth-d functions
std::vector<SqrtExt> extend_values(int N, int d_from, const std::vector<SqrtExt>& vals, int d_to);
// f o sigma at depth d+1 from f at depth d (Koopman / alpha)
std::vector<SqrtExt> compose_values(int N, int d, const std::vector<SqrtExt>& vals);
// transfer: (L f)(v) = (1/N) sum_i f(iv), depth d -> depth d-1
std::vector<SqrtExt> transfer_values(int N, int d, const std::vector<SqrtExt>& vals);
// pointwise product and conjugate
std::vector<SqrtExt> mult_values(const std::vector<SqrtExt>& a, const std::vector<SqrtExt>& b);
std::vector<SqrtExt> conj_values(const std::vector<SqrtExt>& a);

}  // namespace endo
