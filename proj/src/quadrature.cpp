#include "endoscope/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <unordered_map>

namespace endo {

CircleFn memoize_fn(CircleFn f) {
  auto tab = std::make_shared<std::unordered_map<double, cd>>();
  return [f, tab](double x) -> cd {
    auto it = tab->find(x);
    if (it != tab->end()) return it->second;
    cd v = f(x);
    tab->emplace(x, v);
    return v;
  };
}

namespace {

// Legendre roots by Newton iteration, mapped to [0, 1]
std::pair<std::array<double, 16>, std::array<double, 16>> make_gl16() {
  constexpr int n = 16;
  std::array<double, 16> x{}, w{};
  for (int i = 0; i < n; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[static_cast<size_t>(n - 1 - i)] = (t + 1.0) / 2.0;
    w[static_cast<size_t>(n - 1 - i)] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
  return {x, w};
}

const auto& gl16_pair() {
  static const auto p = make_gl16();
  return p;
}

}  // namespace

const std::array<double, 16>& gl16_nodes() { return gl16_pair().first; }
const std::array<double, 16>& gl16_weights() { return gl16_pair().second; }

cd integrate_arc(const CircleFn& f, double a, double b, double max_panel) {
  if (b <= a) return {0.0, 0.0};
  const auto& xs = gl16_nodes();
  const auto& ws = gl16_weights();
  long panels = std::max(1L, static_cast<long>(std::ceil((b - a) / max_panel)));
  double h = (b - a) / static_cast<double>(panels);
  cd acc(0, 0);
  for (long p = 0; p < panels; ++p) {
    double lo = a + h * static_cast<double>(p);
    for (int q = 0; q < 16; ++q) acc += ws[static_cast<size_t>(q)] * f(lo + h * xs[static_cast<size_t>(q)]);
  }
  return acc * h;
}

cd Quadrature::integrate(const CircleFn& f) const {
  cd acc(0, 0);
  for (long i = 0; i < size(); ++i) acc += w[i] * f(x[i]);
  return acc;
}

cd Quadrature::inner(const CircleFn& f, const CircleFn& g) const {
  cd acc(0, 0);
  for (long i = 0; i < size(); ++i) acc += w[i] * std::conj(f(x[i])) * g(x[i]);
  return acc;
}

Eigen::VectorXcd Quadrature::sample(const CircleFn& f) const {
  Eigen::VectorXcd v(size());
  for (long i = 0; i < size(); ++i) v(i) = f(x[i]);
  return v;
}

Eigen::MatrixXcd Quadrature::gram(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) const {
  return A.adjoint() * w.matrix().asDiagonal() * B;
}

Quadrature Quadrature::midpoint(long M, const std::function<double(double)>& density) {
  Quadrature q;
  q.x.resize(M);
  q.w.resize(M);
  for (long i = 0; i < M; ++i) {
    q.x[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(M);
    q.w[i] = 1.0 / static_cast<double>(M);
    if (density) q.w[i] *= density(q.x[i]);
  }
  return q;
}

Quadrature Quadrature::panels(std::vector<double> breakpoints, long target_nodes,
                              const std::function<double(double)>& density) {
  breakpoints.push_back(0.0);
  std::sort(breakpoints.begin(), breakpoints.end());
  std::vector<double> cuts;
  for (double t : breakpoints) {
    if (t < 0.0 || t >= 1.0) continue;
    if (cuts.empty() || t - cuts.back() > 1e-13) cuts.push_back(t);
  }
  cuts.push_back(1.0);

  const auto& xs = gl16_nodes();
  const auto& ws = gl16_weights();
  std::vector<double> nx, nw;
  nx.reserve(static_cast<size_t>(target_nodes) + 64);
  nw.reserve(static_cast<size_t>(target_nodes) + 64);
  double per_len = static_cast<double>(target_nodes) / 16.0;
  for (size_t s = 0; s + 1 < cuts.size(); ++s) {
    double a = cuts[s], b = cuts[s + 1];
    long panels = std::max(1L, static_cast<long>(std::ceil((b - a) * per_len)));
    double h = (b - a) / static_cast<double>(panels);
    for (long p = 0; p < panels; ++p) {
      double lo = a + h * static_cast<double>(p);
      for (int q = 0; q < 16; ++q) {
        nx.push_back(lo + h * xs[static_cast<size_t>(q)]);
        nw.push_back(h * ws[static_cast<size_t>(q)]);
      }
    }
  }
  Quadrature q;
  q.x = Eigen::Map<Eigen::ArrayXd>(nx.data(), static_cast<long>(nx.size()));
  q.w = Eigen::Map<Eigen::ArrayXd>(nw.data(), static_cast<long>(nw.size()));
  if (density)
    for (long i = 0; i < q.size(); ++i) q.w[i] *= density(q.x[i]);
  return q;
}

Quadrature Quadrature::for_system(const SystemDescriptor& sys, const BranchDecomposition& dec,
                                  int cylinder_depth, std::vector<double> extra_breakpoints,
                                  long target_nodes) {
  if (!sys.circle_lane()) throw InvalidSystem("quadrature: no circle factor on this system");
  std::vector<double> cuts = std::move(extra_breakpoints);
  if (sys.kind != SystemKind::ProductShiftRotation) {
    long nw = word_count(sys.N, cylinder_depth);
    for (long i = 0; i < nw; ++i) {
      CylinderSet cs = cylinder(sys, dec, word_at(sys.N, cylinder_depth, i));
      cuts.push_back(cs.arc->a);
    }
  }
  std::function<double(double)> density;
  if (sys.kind == SystemKind::WeightedCircleMonomial) {
    TrigPoly rho = sys.rho;
    density = [rho](double t) { return rho(t).real(); };
  }
  return panels(std::move(cuts), target_nodes, density);
}

}  // namespace endo
