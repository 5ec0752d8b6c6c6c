#pragma once

// Exact scalar tower used by the shift lane and the symbolic engine.
//
//   Rat      arbitrary-precision rational
//   GaussRat complex rational  re + im*i
//   SqrtExt  a + b*sqrt(n), a and b Gaussian rational
//
// SqrtExt is closed under +, -, *, conj and inversion, so every scalar of
// the form q * N^(k/2) that shows up in shift-space matrices lives here
// exactly.  Exact matrices are Eigen::Matrix<SqrtExt, ...>; only ring
// operations (product, sum, transpose, block) go through Eigen.  Anything
// that would need abs/sqrt (decompositions, adjoints) is provided as free
// functions below instead.  Do not call .adjoint()/.norm() on EMat.

#include <Eigen/Core>
#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace endo {

using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& r) { return r.convert_to<double>(); }

inline Rat rat_pow(const Rat& base, long e) {
  if (e == 0) return Rat(1);
  Rat b = e > 0 ? base : Rat(1) / base;
  unsigned long n = e > 0 ? static_cast<unsigned long>(e) : static_cast<unsigned long>(-e);
  Rat acc(1);
  while (n) {
    if (n & 1) acc *= b;
    b *= b;
    n >>= 1;
  }
  return acc;
}

struct GaussRat {
  Rat re, im;

  GaussRat() : re(0), im(0) {}
  GaussRat(int v) : re(v), im(0) {}
  GaussRat(long v) : re(v), im(0) {}
  GaussRat(Rat r) : re(std::move(r)), im(0) {}
  GaussRat(Rat r, Rat i) : re(std::move(r)), im(std::move(i)) {}

  bool is_zero() const { return re == 0 && im == 0; }
  GaussRat conj() const { return {re, -im}; }
  Rat norm2() const { return re * re + im * im; }

  GaussRat operator-() const { return {-re, -im}; }
  GaussRat& operator+=(const GaussRat& o) { re += o.re; im += o.im; return *this; }
  GaussRat& operator-=(const GaussRat& o) { re -= o.re; im -= o.im; return *this; }
  GaussRat& operator*=(const GaussRat& o) {
    Rat r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = std::move(r);
    return *this;
  }
  friend GaussRat operator+(GaussRat a, const GaussRat& b) { return a += b; }
  friend GaussRat operator-(GaussRat a, const GaussRat& b) { return a -= b; }
  friend GaussRat operator*(GaussRat a, const GaussRat& b) { return a *= b; }
  GaussRat inv() const {
    Rat n = norm2();
    if (n == 0) throw std::domain_error("GaussRat: division by zero");
    return {re / n, -im / n};
  }
  friend GaussRat operator/(const GaussRat& a, const GaussRat& b) { return a * b.inv(); }
  friend bool operator==(const GaussRat& a, const GaussRat& b) { return a.re == b.re && a.im == b.im; }
  friend bool operator!=(const GaussRat& a, const GaussRat& b) { return !(a == b); }

  std::complex<double> value() const { return {to_double(re), to_double(im)}; }
};

namespace detail {
inline long isqrt_if_square(long n) {
  if (n < 0) return -1;
  long r = static_cast<long>(std::lround(std::sqrt(static_cast<double>(n))));
  for (long c = r - 1; c <= r + 1; ++c)
    if (c >= 0 && c * c == n) return c;
  return -1;
}
}  // namespace detail

// a + b*sqrt(n); invariant: n == 1 implies b == 0 (perfect squares folded).
struct SqrtExt {
  GaussRat a, b;
  long n = 1;

  SqrtExt() = default;
  SqrtExt(int v) : a(v) {}
  SqrtExt(long v) : a(v) {}
  SqrtExt(Rat r) : a(std::move(r)) {}
  SqrtExt(GaussRat g) : a(std::move(g)) {}
  SqrtExt(GaussRat a_, GaussRat b_, long n_) : a(std::move(a_)), b(std::move(b_)), n(n_) { reduce(); }

  static SqrtExt sqrt_of(long n) { return SqrtExt(GaussRat(0), GaussRat(1), n); }
  static SqrtExt i() { return SqrtExt(GaussRat(Rat(0), Rat(1))); }
  // N^(k/2) for integer k (possibly negative)
  static SqrtExt half_power(long N, long k) {
    if (k % 2 == 0) return SqrtExt(rat_pow(Rat(N), k / 2));
    return SqrtExt(GaussRat(0), GaussRat(rat_pow(Rat(N), (k - 1) / 2)), N);
  }

  void reduce() {
    if (b.is_zero()) { n = 1; return; }
    if (n <= 0) throw std::domain_error("SqrtExt: radicand must be positive");
    long r = detail::isqrt_if_square(n);
    if (r >= 0) {
      a += b * GaussRat(Rat(r));
      b = GaussRat(0);
      n = 1;
    }
  }

  bool is_zero() const { return a.is_zero() && b.is_zero(); }
  bool is_rational() const { return b.is_zero() && a.im == 0; }

  SqrtExt conj() const { return SqrtExt(a.conj(), b.conj(), n); }

  static long merge_radicand(const SqrtExt& x, const SqrtExt& y) {
    if (x.b.is_zero()) return y.n;
    if (y.b.is_zero()) return x.n;
    if (x.n != y.n) throw std::logic_error("SqrtExt: mixed radicands");
    return x.n;
  }

  SqrtExt operator-() const { return SqrtExt(-a, -b, n); }
  SqrtExt& operator+=(const SqrtExt& o) {
    long m = merge_radicand(*this, o);
    a += o.a;
    b += o.b;
    n = m;
    reduce();
    return *this;
  }
  SqrtExt& operator-=(const SqrtExt& o) { return *this += -o; }
  SqrtExt& operator*=(const SqrtExt& o) {
    long m = merge_radicand(*this, o);
    GaussRat na = a * o.a + GaussRat(Rat(m)) * b * o.b;
    GaussRat nb = a * o.b + b * o.a;
    a = std::move(na);
    b = std::move(nb);
    n = m;
    reduce();
    return *this;
  }
  friend SqrtExt operator+(SqrtExt x, const SqrtExt& y) { return x += y; }
  friend SqrtExt operator-(SqrtExt x, const SqrtExt& y) { return x -= y; }
  friend SqrtExt operator*(SqrtExt x, const SqrtExt& y) { return x *= y; }

  SqrtExt inv() const {
    if (is_zero()) throw std::domain_error("SqrtExt: division by zero");
    // (a + b sqrt n)(a - b sqrt n) = a^2 - n b^2, a nonzero GaussRat
    GaussRat d = a * a - GaussRat(Rat(n)) * b * b;
    GaussRat di = d.inv();
    return SqrtExt(a * di, -b * di, n);
  }
  friend SqrtExt operator/(const SqrtExt& x, const SqrtExt& y) { return x * y.inv(); }
  friend bool operator==(const SqrtExt& x, const SqrtExt& y) {
    return x.a == y.a && x.b == y.b && (x.b.is_zero() || x.n == y.n);
  }
  friend bool operator!=(const SqrtExt& x, const SqrtExt& y) { return !(x == y); }

  std::complex<double> value() const {
    std::complex<double> v = a.value();
    if (!b.is_zero()) v += b.value() * std::sqrt(static_cast<double>(n));
    return v;
  }
};

inline SqrtExt qconj(const SqrtExt& x) { return x.conj(); }

}  // namespace endo

namespace Eigen {
template <>
struct NumTraits<endo::SqrtExt> {
  typedef endo::SqrtExt Real;
  typedef endo::SqrtExt NonInteger;
  typedef endo::SqrtExt Nested;
  typedef endo::SqrtExt Literal;
  enum {
    IsComplex = 0,  // conjugation handled by endo::adj, never Eigen's
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 16,
    AddCost = 60,
    MulCost = 90,
  };
  static inline Real epsilon() { return Real(0); }
  static inline Real dummy_precision() { return Real(0); }
  static inline int digits10() { return 0; }
};
}  // namespace Eigen

namespace endo {

using EMat = Eigen::Matrix<SqrtExt, Eigen::Dynamic, Eigen::Dynamic>;
using EVec = Eigen::Matrix<SqrtExt, Eigen::Dynamic, 1>;

inline EMat eidentity(Eigen::Index n) {
  EMat m = EMat::Constant(n, n, SqrtExt(0));
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = SqrtExt(1);
  return m;
}

inline EMat ezero(Eigen::Index r, Eigen::Index c) { return EMat::Constant(r, c, SqrtExt(0)); }

// plain product; Eigen's GEMM kernels are bypassed for the exact scalar
inline EMat emul(const EMat& A, const EMat& B) {
  if (A.cols() != B.rows()) throw std::logic_error("emul: dimension mismatch");
  EMat r = ezero(A.rows(), B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index k = 0; k < A.cols(); ++k) {
      if (A(i, k).is_zero()) continue;
      for (Eigen::Index j = 0; j < B.cols(); ++j) {
        if (B(k, j).is_zero()) continue;
        r(i, j) += A(i, k) * B(k, j);
      }
    }
  return r;
}

// conjugate transpose (Eigen's .adjoint() is unsafe for this scalar)
inline EMat adj(const EMat& m) {
  EMat r(m.cols(), m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) r(j, i) = m(i, j).conj();
  return r;
}

inline bool is_zero(const EMat& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (!m(i, j).is_zero()) return false;
  return true;
}

inline double max_abs(const EMat& m) {
  double mx = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) mx = std::max(mx, std::abs(m(i, j).value()));
  return mx;
}

inline Eigen::MatrixXcd to_complex(const EMat& m) {
  Eigen::MatrixXcd r(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) r(i, j) = m(i, j).value();
  return r;
}

// Row echelon over the exact field.  Returns pivot column indices; m is
// reduced in place to RREF.
inline std::vector<Eigen::Index> rref(EMat& m) {
  std::vector<Eigen::Index> pivots;
  Eigen::Index row = 0;
  for (Eigen::Index col = 0; col < m.cols() && row < m.rows(); ++col) {
    Eigen::Index p = -1;
    for (Eigen::Index r = row; r < m.rows(); ++r)
      if (!m(r, col).is_zero()) { p = r; break; }
    if (p < 0) continue;
    if (p != row)
      for (Eigen::Index j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(row, j));
    SqrtExt inv = m(row, col).inv();
    for (Eigen::Index j = col; j < m.cols(); ++j) m(row, j) = m(row, j) * inv;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (r == row || m(r, col).is_zero()) continue;
      SqrtExt f = m(r, col);
      for (Eigen::Index j = col; j < m.cols(); ++j) m(r, j) = m(r, j) - f * m(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

inline Eigen::Index rank(EMat m) { return static_cast<Eigen::Index>(rref(m).size()); }

// columns span ker(m)
inline EMat kernel(EMat m) {
  const Eigen::Index nc = m.cols();
  std::vector<Eigen::Index> pivots = rref(m);
  std::vector<bool> is_pivot(nc, false);
  for (auto p : pivots) is_pivot[p] = true;
  std::vector<Eigen::Index> free_cols;
  for (Eigen::Index c = 0; c < nc; ++c)
    if (!is_pivot[c]) free_cols.push_back(c);
  EMat K = ezero(nc, static_cast<Eigen::Index>(free_cols.size()));
  for (size_t f = 0; f < free_cols.size(); ++f) {
    Eigen::Index fc = free_cols[f];
    K(fc, static_cast<Eigen::Index>(f)) = SqrtExt(1);
    for (size_t pi = 0; pi < pivots.size(); ++pi)
      K(pivots[pi], static_cast<Eigen::Index>(f)) = -m(static_cast<Eigen::Index>(pi), fc);
  }
  return K;
}

// solve A x = b for square invertible A (throws if singular)
inline EVec solve(const EMat& A, const EVec& b) {
  if (A.rows() != A.cols() || A.rows() != b.rows()) throw std::invalid_argument("solve: shape");
  EMat aug(A.rows(), A.cols() + 1);
  aug.block(0, 0, A.rows(), A.cols()) = A;
  aug.col(A.cols()) = b;
  std::vector<Eigen::Index> pivots = rref(aug);
  if (static_cast<Eigen::Index>(pivots.size()) != A.cols() ||
      (!pivots.empty() && pivots.back() == A.cols()))
    throw std::domain_error("solve: singular system");
  EVec x(A.cols());
  for (Eigen::Index i = 0; i < A.cols(); ++i) x(i) = aug(i, A.cols());
  return x;
}

inline SqrtExt frob_inner(const EMat& x, const EMat& y) {
  SqrtExt s(0);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) s += x(i, j).conj() * y(i, j);
  return s;
}

}  // namespace endo
