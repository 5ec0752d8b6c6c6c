#include "endoscope/symbolic.hpp"

#include <sstream>
#include <stdexcept>

#include "endoscope/exact_ops.hpp"

namespace endo {

namespace {

void check_letters(int n, const Word& w) {
  for (int a : w)
    if (a < 1 || a > n) throw std::invalid_argument("word letter outside alphabet");
}

void accumulate(CuntzElement& out, std::pair<Word, Word> key, const GaussRat& c) {
  auto [it, inserted] = out.terms.try_emplace(std::move(key), GaussRat());
  it->second += c;
  if (it->second.is_zero()) out.terms.erase(it);
}

}  // namespace

CuntzElement CuntzElement::identity(int n) {
  CuntzElement e(n);
  e.terms[{{}, {}}] = GaussRat(1);
  return e;
}

CuntzElement CuntzElement::word(int n, Word mu, Word nu, GaussRat coeff) {
  check_letters(n, mu);
  check_letters(n, nu);
  CuntzElement e(n);
  if (!coeff.is_zero()) e.terms[{std::move(mu), std::move(nu)}] = std::move(coeff);
  return e;
}

bool CuntzElement::is_identity() const {
  return terms.size() == 1 && terms.begin()->first.first.empty() &&
         terms.begin()->first.second.empty() && terms.begin()->second == GaussRat(1);
}

CuntzElement normalize(CuntzElement a) {
  for (auto it = a.terms.begin(); it != a.terms.end();)
    it = it->second.is_zero() ? a.terms.erase(it) : std::next(it);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [key, c] : a.terms) {
      const Word& mu = key.first;
      const Word& nu = key.second;
      if (mu.empty() || nu.empty() || mu.back() != nu.back()) continue;
      Word pm(mu.begin(), mu.end() - 1), pn(nu.begin(), nu.end() - 1);
      bool all = true;
      for (int i = 1; i <= a.N && all; ++i) {
        auto f = a.terms.find({cat(pm, {i}), cat(pn, {i})});
        all = f != a.terms.end() && f->second == c;
      }
      if (!all) continue;
      GaussRat c0 = c;
      for (int i = 1; i <= a.N; ++i) a.terms.erase({cat(pm, {i}), cat(pn, {i})});
      auto [pit, inserted] = a.terms.try_emplace({std::move(pm), std::move(pn)}, GaussRat());
      pit->second += c0;
      if (pit->second.is_zero()) a.terms.erase(pit);
      changed = true;
      break;
    }
  }
  return a;
}

CuntzElement adjoint(const CuntzElement& a) {
  CuntzElement out(a.N);
  for (const auto& [key, c] : a.terms) out.terms[{key.second, key.first}] = c.conj();
  return out;
}

CuntzElement multiply(const CuntzElement& a, const CuntzElement& b) {
  if (a.N != b.N) throw std::invalid_argument("alphabet mismatch");
  CuntzElement out(a.N);
  for (const auto& [ka, ca] : a.terms)
    for (const auto& [kb, cb] : b.terms) {
      const Word& nu = ka.second;
      const Word& al = kb.first;
      // s_nu* s_al collapses by prefix comparison, or annihilates
      if (is_prefix(nu, al))
        accumulate(out, {cat(ka.first, drop_prefix(al, nu.size())), kb.second}, ca * cb);
      else if (is_prefix(al, nu))
        accumulate(out, {ka.first, cat(kb.second, drop_prefix(nu, al.size()))}, ca * cb);
    }
  return normalize(std::move(out));
}

CuntzElement scale(const GaussRat& c, CuntzElement a) {
  if (c.is_zero()) return CuntzElement::zero(a.N);
  for (auto& [key, v] : a.terms) v *= c;
  return a;
}

CuntzElement operator+(const CuntzElement& a, const CuntzElement& b) {
  if (a.N != b.N) throw std::invalid_argument("alphabet mismatch");
  CuntzElement out = a;
  for (const auto& [key, c] : b.terms) accumulate(out, key, c);
  return normalize(std::move(out));
}

CuntzElement operator-(const CuntzElement& a, const CuntzElement& b) {
  return a + scale(GaussRat(-1), b);
}

namespace {

std::string fmt_rat(const Rat& r) {
  std::ostringstream os;
  os << numerator(r);
  if (denominator(r) != 1) os << "/" << denominator(r);
  return os.str();
}

std::string fmt_coeff(const GaussRat& c) {
  std::ostringstream os;
  os << "(";
  if (c.im == 0) {
    os << fmt_rat(c.re);
  } else if (c.re == 0) {
    os << fmt_rat(c.im) << "i";
  } else {
    os << fmt_rat(c.re) << (c.im > 0 ? "+" : "-") << fmt_rat(c.im > 0 ? c.im : Rat(-c.im)) << "i";
  }
  os << ")";
  return os.str();
}

std::string fmt_word(const Word& w, bool star) {
  std::ostringstream os;
  os << (star ? "s*[" : "s[");
  for (size_t i = 0; i < w.size(); ++i) os << (i ? "," : "") << w[i];
  os << "]";
  return os.str();
}

}  // namespace

std::string print(const CuntzElement& a) {
  if (a.terms.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [key, c] : a.terms) {
    if (!first) os << " + ";
    first = false;
    const Word& mu = key.first;
    const Word& nu = key.second;
    bool unit = (c == GaussRat(1));
    if (!unit) os << fmt_coeff(c);
    if (mu.empty() && nu.empty()) {
      if (!unit) os << "*";
      os << "1";
    } else {
      if (!unit) os << "*";
      if (!mu.empty()) os << fmt_word(mu, false);
      if (!mu.empty() && !nu.empty()) os << "\xc2\xb7";
      if (!nu.empty()) os << fmt_word(nu, true);
    }
  }
  return os.str();
}

namespace {

struct Scanner {
  const std::string& s;
  size_t p = 0;

  void ws() {
    while (p < s.size() && (s[p] == ' ' || s[p] == '\t' || s[p] == '\n' || s[p] == '\r')) ++p;
  }
  bool eof() {
    ws();
    return p >= s.size();
  }
  char peek() {
    ws();
    return p < s.size() ? s[p] : '\0';
  }
  bool take(const char* tok) {
    ws();
    size_t n = std::string_view(tok).size();
    if (s.compare(p, n, tok) == 0) {
      p += n;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) {
    throw std::invalid_argument("parse error at offset " + std::to_string(p) + ": " + what);
  }

  Rat rational() {
    ws();
    bool neg = take("-");
    std::string digits;
    while (p < s.size() && s[p] >= '0' && s[p] <= '9') digits += s[p++];
    if (digits.empty()) fail("expected a number");
    Rat r{boost::multiprecision::cpp_int(digits)};
    if (take("/")) {
      std::string den;
      while (p < s.size() && s[p] >= '0' && s[p] <= '9') den += s[p++];
      if (den.empty()) fail("expected a denominator");
      r /= Rat(boost::multiprecision::cpp_int(den));
    }
    return neg ? Rat(-r) : r;
  }

  GaussRat complex_number() {
    Rat first = rational();
    if (take("i")) return GaussRat(Rat(0), first);
    if (peek() == '+' || peek() == '-') {
      bool neg = s[p] == '-';
      ++p;
      Rat second = rational();
      if (!take("i")) fail("expected i after the imaginary part");
      return GaussRat(first, neg ? Rat(-second) : second);
    }
    return GaussRat(first);
  }

  Word letters(int n) {
    if (!take("[")) fail("expected [");
    Word w;
    while (true) {
      ws();
      std::string digits;
      while (p < s.size() && s[p] >= '0' && s[p] <= '9') digits += s[p++];
      if (digits.empty()) fail("expected a letter");
      int a = std::stoi(digits);
      if (a < 1 || a > n) fail("letter outside alphabet");
      w.push_back(a);
      if (take("]")) return w;
      if (!take(",")) fail("expected , or ]");
    }
  }

  // s[..], s*[..], s[..]·s*[..], or 1
  std::pair<Word, Word> factor(int n) {
    if (take("1")) return {{}, {}};
    if (take("s*")) return {{}, letters(n)};
    if (take("s")) {
      Word mu = letters(n);
      if (take("\xc2\xb7")) {
        if (!take("s*")) fail("expected s* after the separator");
        return {mu, letters(n)};
      }
      return {mu, {}};
    }
    fail("expected s, s*, or 1");
  }

  CuntzElement term(int n) {
    GaussRat c(1);
    bool have_coeff = false;
    if (take("(")) {
      c = complex_number();
      if (!take(")")) fail("expected )");
      have_coeff = true;
    } else if (peek() == '-' || (peek() >= '0' && peek() <= '9')) {
      size_t mark = p;
      c = complex_number();
      have_coeff = true;
      // a bare 1 with no * and no word following is the identity factor
      if (c == GaussRat(1) && peek() != '*' && s.compare(mark, 1, "1") == 0)
        return CuntzElement::identity(n);
    }
    if (have_coeff && !take("*")) return scale(c, CuntzElement::identity(n));
    auto [mu, nu] = factor(n);
    return CuntzElement::word(n, std::move(mu), std::move(nu), c);
  }
};

}  // namespace

CuntzElement parse_element(const std::string& text, int n) {
  Scanner sc{text};
  if (sc.take("0") && sc.eof()) return CuntzElement::zero(n);
  sc.p = 0;
  CuntzElement out = sc.term(n);
  while (!sc.eof()) {
    if (!sc.take("+")) sc.fail("expected +");
    out = out + sc.term(n);
  }
  return normalize(std::move(out));
}

BasisWitness verify_basis(const std::vector<CuntzElement>& basis,
                          const std::vector<CuntzElement>& xs) {
  if (basis.empty()) throw std::invalid_argument("basis must be nonempty");
  int n = basis[0].N;
  for (size_t i = 0; i < basis.size(); ++i)
    for (size_t j = 0; j < basis.size(); ++j) {
      CuntzElement p = multiply(adjoint(basis[i]), basis[j]);
      CuntzElement expect = (i == j) ? CuntzElement::identity(n) : CuntzElement::zero(n);
      if (!(p == expect)) {
        std::ostringstream os;
        os << "<b_" << i + 1 << ", b_" << j + 1 << "> = " << print(p);
        return {false, os.str()};
      }
    }
  for (size_t k = 0; k < xs.size(); ++k) {
    CuntzElement acc = CuntzElement::zero(n);
    for (const auto& b : basis) acc = acc + multiply(b, multiply(adjoint(b), xs[k]));
    if (!(acc == xs[k])) {
      std::ostringstream os;
      os << "x_" << k + 1 << " reconstructs to " << print(acc) << " instead of " << print(xs[k]);
      return {false, os.str()};
    }
  }
  return {true, ""};
}

ModuleMatrix::ModuleMatrix(long r, long c, int n) : rows(r), cols(c) {
  if (r <= 0 || c <= 0) throw std::invalid_argument("module matrix dimensions must be positive");
  entries.assign(r * c, CuntzElement::zero(n));
}

bool module_unitary_check(const ModuleMatrix& U) {
  int n = U.entries[0].N;
  for (long r = 0; r < U.rows; ++r)
    for (long c = 0; c < U.rows; ++c) {
      CuntzElement acc = CuntzElement::zero(n);
      for (long k = 0; k < U.cols; ++k) acc = acc + multiply(U.at(r, k), adjoint(U.at(c, k)));
      if (!(acc == (r == c ? CuntzElement::identity(n) : CuntzElement::zero(n)))) return false;
    }
  for (long r = 0; r < U.cols; ++r)
    for (long c = 0; c < U.cols; ++c) {
      CuntzElement acc = CuntzElement::zero(n);
      for (long k = 0; k < U.rows; ++k) acc = acc + multiply(adjoint(U.at(k, r)), U.at(k, c));
      if (!(acc == (r == c ? CuntzElement::identity(n) : CuntzElement::zero(n)))) return false;
    }
  return true;
}

ModuleMatrix iterated_basis(int n_entries, int n) {
  if (n_entries == 1) {
    ModuleMatrix U(1, 1, n);
    U.at(0, 0) = CuntzElement::identity(n);
    return U;
  }
  if (n_entries < n || (n_entries - n) % (n - 1) != 0)
    throw std::invalid_argument("basis size unreachable by expansion steps");
  std::vector<CuntzElement> row;
  for (int i = 1; i <= n; ++i) row.push_back(CuntzElement::word(n, {i}));
  while (static_cast<int>(row.size()) < n_entries) {
    CuntzElement last = row.back();
    row.pop_back();
    for (int i = 1; i <= n; ++i)
      row.push_back(multiply(last, CuntzElement::word(n, {i})));
  }
  ModuleMatrix U(1, n_entries, n);
  for (int k = 0; k < n_entries; ++k) U.at(0, k) = row[k];
  return U;
}

namespace {

// S_w as a map V_{d_from} -> V_{d_from + |w|}
EMat word_matrix(int n, const Word& w, int d_from) {
  EMat M = eidentity(word_count(n, d_from));
  for (int p = static_cast<int>(w.size()) - 1; p >= 0; --p) {
    int depth = d_from + (static_cast<int>(w.size()) - 1 - p);
    M = emul(shift_isometry(n, depth, w[p]), M);
  }
  return M;
}

}  // namespace

EMat rep_exact(const CuntzElement& a, int d_in, int d_out) {
  long rows = word_count(a.N, d_out), cols = word_count(a.N, d_in);
  EMat M = ezero(rows, cols);
  for (const auto& [key, c] : a.terms) {
    int dm = static_cast<int>(key.first.size());
    int dn = static_cast<int>(key.second.size());
    if (dn > d_in || d_in - dn + dm != d_out)
      throw std::invalid_argument("term degree does not fit the requested spaces");
    EMat T = emul(word_matrix(a.N, key.first, d_in - dn),
                  adj(word_matrix(a.N, key.second, d_in - dn)));
    SqrtExt s{c};
    for (long r = 0; r < rows; ++r)
      for (long cc = 0; cc < cols; ++cc)
        if (!T(r, cc).is_zero()) M(r, cc) += s * T(r, cc);
  }
  return M;
}

}  // namespace endo
