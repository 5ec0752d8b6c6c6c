#include "endoscope/exact_ops.hpp"

namespace endo {

EMat shift_isometry(int N, int d, int i) {
  if (i < 1 || i > N) throw std::invalid_argument("shift_isometry: branch out of range");
  const long nc = word_count(N, d);
  EMat m = ezero(word_count(N, d + 1), nc);
  const long block = static_cast<long>(i - 1) * nc;
  for (long w = 0; w < nc; ++w) m(block + w, w) = SqrtExt(1);
  return m;
}

EMat shift_composition(int N, int d) {
  const long nc = word_count(N, d);
  EMat m = ezero(nc * N, nc);
  const SqrtExt r = SqrtExt::half_power(N, -1);
  for (long w = 0; w < nc; ++w)
    for (long i = 0; i < N; ++i) m(i * nc + w, w) = r;
  return m;
}

EMat shift_embed(int N, int d) {
  const long nc = word_count(N, d);
  EMat m = ezero(nc * N, nc);
  const SqrtExt r = SqrtExt::half_power(N, -1);
  for (long w = 0; w < nc; ++w)
    for (long i = 0; i < N; ++i) m(w * N + i, w) = r;
  return m;
}

EMat shift_mult(int N, int d, const std::vector<SqrtExt>& vals) {
  const long nc = word_count(N, d);
  if (static_cast<long>(vals.size()) != nc) throw std::invalid_argument("shift_mult: size");
  EMat m = ezero(nc, nc);
  for (long w = 0; w < nc; ++w) m(w, w) = vals[static_cast<size_t>(w)];
  return m;
}

std::vector<SqrtExt> extend_values(int N, int d_from, const std::vector<SqrtExt>& vals, int d_to) {
  if (d_to < d_from) throw std::invalid_argument("extend_values: target depth too small");
  const long tail = word_count(N, d_to - d_from);
  std::vector<SqrtExt> out;
  out.reserve(vals.size() * static_cast<size_t>(tail));
  for (const SqrtExt& v : vals)
    for (long t = 0; t < tail; ++t) out.push_back(v);
  return out;
}

std::vector<SqrtExt> compose_values(int N, int d, const std::vector<SqrtExt>& vals) {
  const long nc = word_count(N, d);
  if (static_cast<long>(vals.size()) != nc) throw std::invalid_argument("compose_values: size");
  std::vector<SqrtExt> out(static_cast<size_t>(nc * N));
  // (f o sigma)(w) for |w| = d+1 is f(w_2..w_{d+1}); index(w) = (w_1-1) N^d + index(rest)
  for (long i = 0; i < N; ++i)
    for (long w = 0; w < nc; ++w) out[static_cast<size_t>(i * nc + w)] = vals[static_cast<size_t>(w)];
  return out;
}

std::vector<SqrtExt> transfer_values(int N, int d, const std::vector<SqrtExt>& vals) {
  if (d < 1) throw std::invalid_argument("transfer_values: depth must be >= 1");
  const long nc = word_count(N, d - 1);
  if (static_cast<long>(vals.size()) != nc * N) throw std::invalid_argument("transfer_values: size");
  const SqrtExt inv_n = SqrtExt(Rat(1) / N);
  std::vector<SqrtExt> out(static_cast<size_t>(nc));
  for (long v = 0; v < nc; ++v) {
    SqrtExt acc(0);
    for (long i = 0; i < N; ++i) acc += vals[static_cast<size_t>(i * nc + v)];
    out[static_cast<size_t>(v)] = acc * inv_n;
  }
  return out;
}

std::vector<SqrtExt> mult_values(const std::vector<SqrtExt>& a, const std::vector<SqrtExt>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("mult_values: size");
  std::vector<SqrtExt> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

std::vector<SqrtExt> conj_values(const std::vector<SqrtExt>& a) {
  std::vector<SqrtExt> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i].conj();
  return out;
}

}  // namespace endo
