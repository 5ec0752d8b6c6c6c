#pragma once

// Finite words over the alphabet {1, ..., N}: cylinder labels, branch
// itineraries, and Cuntz-word subscripts all share this type.

#include <stdexcept>
#include <string>
#include <vector>

namespace endo {

using Word = std::vector<int>;

inline long word_count(int N, int depth) {
  long c = 1;
  for (int i = 0; i < depth; ++i) c *= N;
  return c;
}

// big-endian: the first letter is the most significant digit, so
// index(i.w, depth+1) = (i-1)*N^depth + index(w, depth)
inline long word_index(int N, const Word& w) {
  long idx = 0;
  for (int s : w) {
    if (s < 1 || s > N) throw std::invalid_argument("word letter out of range");
    idx = idx * N + (s - 1);
  }
  return idx;
}

inline Word word_at(int N, int depth, long index) {
  Word w(depth);
  for (int i = depth - 1; i >= 0; --i) {
    w[i] = static_cast<int>(index % N) + 1;
    index /= N;
  }
  return w;
}

inline Word cat(Word a, const Word& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline bool is_prefix(const Word& p, const Word& w) {
  if (p.size() > w.size()) return false;
  for (size_t i = 0; i < p.size(); ++i)
    if (p[i] != w[i]) return false;
  return true;
}

inline Word drop_prefix(const Word& w, size_t k) {
  return Word(w.begin() + static_cast<long>(k), w.end());
}

inline std::string word_str(const Word& w) {
  if (w.empty()) return "e";
  std::string s;
  for (size_t i = 0; i < w.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(w[i]);
  }
  return s;
}

}  // namespace endo
