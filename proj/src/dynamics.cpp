#include "endoscope/dynamics.hpp"

#include "endoscope/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <unordered_map>

namespace endo {

// ---------------------------------------------------------------- TrigPoly

TrigPoly TrigPoly::constant(cd v) {
  TrigPoly p;
  if (v != cd(0, 0)) p.c[0] = v;
  return p;
}

TrigPoly TrigPoly::mode(int k, cd coeff) {
  TrigPoly p;
  if (coeff != cd(0, 0)) p.c[k] = coeff;
  return p;
}

TrigPoly TrigPoly::one_plus_cos(double amp) {
  TrigPoly p;
  p.c[0] = 1.0;
  p.c[1] = amp / 2.0;
  p.c[-1] = amp / 2.0;
  return p;
}

cd TrigPoly::operator()(double theta) const {
  cd acc(0, 0);
  for (const auto& [k, v] : c) acc += v * std::polar(1.0, two_pi * k * theta);
  return acc;
}

cd TrigPoly::coeff(int k) const {
  auto it = c.find(k);
  return it == c.end() ? cd(0, 0) : it->second;
}

int TrigPoly::degree() const {
  int d = 0;
  for (const auto& [k, v] : c)
    if (std::abs(v) > 0) d = std::max(d, std::abs(k));
  return d;
}

bool TrigPoly::is_real() const {
  for (const auto& [k, v] : c)
    if (std::abs(v - std::conj(coeff(-k))) > 1e-12) return false;
  return true;
}

TrigPoly TrigPoly::conjugate() const {
  TrigPoly p;
  for (const auto& [k, v] : c) p.c[-k] = std::conj(v);
  return p;
}

TrigPoly TrigPoly::operator+(const TrigPoly& o) const {
  TrigPoly p = *this;
  for (const auto& [k, v] : o.c) p.c[k] += v;
  return p;
}

TrigPoly TrigPoly::operator*(const TrigPoly& o) const {
  TrigPoly p;
  for (const auto& [k1, v1] : c)
    for (const auto& [k2, v2] : o.c) p.c[k1 + k2] += v1 * v2;
  return p;
}

TrigPoly TrigPoly::scaled(cd s) const {
  TrigPoly p;
  for (const auto& [k, v] : c) p.c[k] = v * s;
  return p;
}

cd TrigPoly::integral(double a, double b) const {
  cd acc(0, 0);
  for (const auto& [k, v] : c) {
    if (k == 0) {
      acc += v * (b - a);
    } else {
      cd den(0, two_pi * k);
      acc += v * (std::polar(1.0, two_pi * k * b) - std::polar(1.0, two_pi * k * a)) / den;
    }
  }
  return acc;
}

// ------------------------------------------------------------------ system

std::string kind_name(SystemKind k) {
  switch (k) {
    case SystemKind::FullShift: return "FullShift";
    case SystemKind::CircleMonomial: return "CircleMonomial";
    case SystemKind::BlaschkeCover: return "BlaschkeCover";
    case SystemKind::WeightedCircleMonomial: return "WeightedCircleMonomial";
    case SystemKind::ProductShiftRotation: return "ProductShiftRotation";
  }
  return "?";
}

SystemDescriptor SystemDescriptor::full_shift(int N) {
  SystemDescriptor s;
  s.kind = SystemKind::FullShift;
  s.N = N;
  s.validate();
  return s;
}

SystemDescriptor SystemDescriptor::circle_monomial(int N) {
  SystemDescriptor s;
  s.kind = SystemKind::CircleMonomial;
  s.N = N;
  s.validate();
  return s;
}

SystemDescriptor SystemDescriptor::blaschke(std::vector<cd> zeros) {
  SystemDescriptor s;
  s.kind = SystemKind::BlaschkeCover;
  s.zeros = std::move(zeros);
  for (auto& z : s.zeros)
    if (std::abs(z) < 1e-13) z = cd(0, 0);
  s.N = static_cast<int>(s.zeros.size());
  s.validate();
  return s;
}

SystemDescriptor SystemDescriptor::weighted_circle(int N, TrigPoly rho) {
  SystemDescriptor s;
  s.kind = SystemKind::WeightedCircleMonomial;
  s.N = N;
  s.rho = std::move(rho);
  s.validate();
  return s;
}

SystemDescriptor SystemDescriptor::product_shift_rotation(int N, double tau) {
  SystemDescriptor s;
  s.kind = SystemKind::ProductShiftRotation;
  s.N = N;
  s.tau = tau;
  s.validate();
  return s;
}

void SystemDescriptor::validate() const {
  if (N < 2) throw InvalidSystem("branch count must be at least 2");
  switch (kind) {
    case SystemKind::FullShift:
    case SystemKind::CircleMonomial:
      break;
    case SystemKind::BlaschkeCover: {
      if (static_cast<int>(zeros.size()) != N) throw InvalidSystem("zero count must equal degree");
      bool has_origin = false;
      for (const cd& z : zeros) {
        if (std::abs(z) >= 1.0 - 1e-12)
          throw InvalidSystem("Blaschke zero outside the open unit disk");
        if (z == cd(0, 0)) has_origin = true;
      }
      if (!has_origin) throw InvalidSystem("Blaschke product needs a zero at the origin");
      break;
    }
    case SystemKind::WeightedCircleMonomial: {
      if (!rho.is_real()) throw InvalidSystem("density must be real");
      if (std::abs(rho.coeff(0) - cd(1, 0)) > 1e-12)
        throw InvalidSystem("density must integrate to 1");
      for (int i = 0; i < 2048; ++i)
        if (rho(i / 2048.0).real() <= 1e-9) throw InvalidSystem("density must be strictly positive");
      break;
    }
    case SystemKind::ProductShiftRotation: {
      if (tau <= 0.0 || tau >= 1.0) throw InvalidSystem("rotation angle must lie in (0,1)");
      for (long q = 1; q <= 1000; ++q) {
        double p = std::round(tau * static_cast<double>(q));
        if (std::abs(tau - p / static_cast<double>(q)) < 1e-9)
          throw InvalidSystem("rotation angle too close to rational " + std::to_string((long)p) +
                              "/" + std::to_string(q));
      }
      break;
    }
  }
}

Point evaluate_map(const SystemDescriptor& sys, const Point& p) {
  switch (sys.kind) {
    case SystemKind::FullShift: {
      if (p.symbols.empty()) throw InvalidPoint("shift point needs a nonempty symbol prefix");
      return {drop_prefix(p.symbols, 1), 0.0};
    }
    case SystemKind::CircleMonomial:
    case SystemKind::WeightedCircleMonomial: {
      if (!p.symbols.empty()) throw InvalidPoint("circle point must not carry symbols");
      return {{}, frac(static_cast<double>(sys.N) * p.angle)};
    }
    case SystemKind::BlaschkeCover: {
      if (!p.symbols.empty()) throw InvalidPoint("circle point must not carry symbols");
      BlaschkeMap m(sys.zeros);
      return {{}, m.map(p.angle)};
    }
    case SystemKind::ProductShiftRotation: {
      if (p.symbols.empty()) throw InvalidPoint("product point needs a nonempty symbol prefix");
      return {drop_prefix(p.symbols, 1), frac(p.angle + sys.tau)};
    }
  }
  throw InvalidSystem("unknown kind");
}

// ------------------------------------------------------------- BlaschkeMap

BlaschkeMap::BlaschkeMap(std::vector<cd> zeros) : zeros_(std::move(zeros)) {
  lift0_ = lift(0.0);
  const int N = degree();
  tpts_.assign(static_cast<size_t>(N) + 1, 0.0);
  tpts_[0] = 0.0;
  tpts_[static_cast<size_t>(N)] = 1.0;
  for (int i = 1; i < N; ++i)
    tpts_[static_cast<size_t>(i)] = invert(lift0_ + static_cast<double>(i), tpts_[static_cast<size_t>(i - 1)], 1.0);
}

cd BlaschkeMap::eval_complex(double theta) const {
  cd z = std::polar(1.0, two_pi * theta);
  cd acc(1, 0);
  for (const cd& a : zeros_) acc *= (z - a) / (1.0 - std::conj(a) * z);
  return acc;
}

double BlaschkeMap::lift(double theta) const {
  // arg of (z-a)/(1-conj(a)z) at z = e^{2 pi i t} equals
  // 2 pi t - 2 Arg(1 - conj(a) e^{2 pi i t}); the Arg stays in (-pi/2, pi/2)
  double acc = 0.0;
  for (const cd& a : zeros_) {
    cd u = 1.0 - std::conj(a) * std::polar(1.0, two_pi * theta);
    acc += theta - std::arg(u) / (two_pi / 2.0);
  }
  return acc;
}

double BlaschkeMap::lift_prime(double theta) const {
  double acc = 0.0;
  cd z = std::polar(1.0, two_pi * theta);
  for (const cd& a : zeros_) acc += (1.0 - std::norm(a)) / std::norm(z - a);
  return acc;
}

double BlaschkeMap::map(double theta) const { return frac(lift(theta)); }

double BlaschkeMap::invert(double target, double lo, double hi) const {
  // Theta is strictly increasing.  Newton from the bracket midpoint, keeping
  // the sign bracket tight and falling back to bisection whenever a step
  // escapes; roots that sit on a bracket edge are returned exactly instead of
  // being chased (targets often coincide with Theta at a branch point).
  if (lift(lo) - target >= 0.0) return lo;
  if (lift(hi) - target <= 0.0) return hi;
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 80; ++it) {
    double ft = lift(t) - target;
    if (ft == 0.0) return t;
    if (ft < 0.0) lo = t; else hi = t;
    double next = t - ft / lift_prime(t);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 4e-16 || std::abs(next - t) < 1e-16) return next;
    t = next;
  }
  return t;
}

double BlaschkeMap::section(int i, double y) const {
  double target = lift0_ + static_cast<double>(i - 1) + frac(y - lift0_);
  return invert(target, tpts_[static_cast<size_t>(i - 1)], tpts_[static_cast<size_t>(i)]);
}

// ---------------------------------------------------- BranchDecomposition

Arc BranchDecomposition::domain(int i) const {
  switch (sys.kind) {
    case SystemKind::CircleMonomial:
    case SystemKind::WeightedCircleMonomial:
      return {static_cast<double>(i - 1) / N, static_cast<double>(i) / N};
    case SystemKind::BlaschkeCover:
      return {bl->branch_point(i - 1), bl->branch_point(i)};
    default:
      throw InvalidSystem("domain arcs only exist on circle systems");
  }
}

int BranchDecomposition::branch_of(double theta) const {
  theta = frac(theta);
  switch (sys.kind) {
    case SystemKind::CircleMonomial:
    case SystemKind::WeightedCircleMonomial:
      return 1 + static_cast<int>(std::floor(theta * N));
    case SystemKind::BlaschkeCover: {
      for (int i = 1; i <= N; ++i)
        if (theta < bl->branch_point(i)) return i;
      return N;
    }
    default:
      throw InvalidSystem("branch_of only exists on circle systems");
  }
}

double BranchDecomposition::map(double theta) const {
  switch (sys.kind) {
    case SystemKind::CircleMonomial:
    case SystemKind::WeightedCircleMonomial:
      return frac(static_cast<double>(N) * theta);
    case SystemKind::BlaschkeCover:
      return bl->map(theta);
    default:
      throw InvalidSystem("map only exists on circle systems");
  }
}

double BranchDecomposition::section(int i, double y) const {
  switch (sys.kind) {
    case SystemKind::CircleMonomial:
    case SystemKind::WeightedCircleMonomial:
      return (y + static_cast<double>(i - 1)) / static_cast<double>(N);
    case SystemKind::BlaschkeCover:
      return bl->section(i, y);
    default:
      throw InvalidSystem("sections only exist on circle systems");
  }
}

double BranchDecomposition::section_closed(int i, double y) const {
  if (y >= 1.0) return domain(i).b;
  return section(i, y);
}

double BranchDecomposition::weight(int i, double y) const {
  if (sys.kind == SystemKind::CircleMonomial) return 1.0 / static_cast<double>(N);
  return weight_at_section(i, y, section(i, y));
}

double BranchDecomposition::weight_at_section(int i, double y, double s) const {
  (void)i;
  switch (sys.kind) {
    case SystemKind::CircleMonomial:
      return 1.0 / static_cast<double>(N);
    case SystemKind::WeightedCircleMonomial:
      return sys.rho(s).real() / (static_cast<double>(N) * sys.rho(y).real());
    case SystemKind::BlaschkeCover:
      return 1.0 / bl->lift_prime(s);
    default:
      throw InvalidSystem("weights only exist on circle systems");
  }
}

double BranchDecomposition::total_weight(double y) const {
  double acc = 0.0;
  for (int i = 1; i <= N; ++i) acc += weight(i, y);
  return acc;
}

double BranchDecomposition::density(double theta) const {
  if (sys.kind == SystemKind::WeightedCircleMonomial) return sys.rho(theta).real();
  return 1.0;
}

struct NodeCache {
  std::mutex mu;
  std::unordered_map<double, BranchDecomposition::NodeInfo> tab;
};

const BranchDecomposition::NodeInfo& BranchDecomposition::node(double theta) const {
  if (!cache) cache = std::make_shared<NodeCache>();
  std::lock_guard<std::mutex> lk(cache->mu);
  auto it = cache->tab.find(theta);
  if (it != cache->tab.end()) return it->second;
  NodeInfo ni;
  ni.branch = branch_of(theta);
  ni.y = map(theta);
  ni.u_fwd = weight_at_section(ni.branch, ni.y, theta);
  ni.w_fwd = ni.u_fwd;
  for (int k = 1; k <= N; ++k)
    if (k != ni.branch) ni.w_fwd += weight(k, ni.y);
  ni.s.resize(static_cast<size_t>(N));
  ni.u.resize(static_cast<size_t>(N));
  for (int k = 1; k <= N; ++k) {
    ni.s[static_cast<size_t>(k - 1)] = section(k, theta);
    ni.u[static_cast<size_t>(k - 1)] = weight_at_section(k, theta, ni.s[static_cast<size_t>(k - 1)]);
    ni.w += ni.u[static_cast<size_t>(k - 1)];
  }
  return cache->tab.emplace(theta, std::move(ni)).first->second;
}

BranchDecomposition decompose(const SystemDescriptor& sys) {
  sys.validate();
  BranchDecomposition d;
  d.sys = sys;
  d.N = sys.N;
  if (sys.kind == SystemKind::BlaschkeCover) d.bl = std::make_shared<BlaschkeMap>(sys.zeros);
  d.cache = std::make_shared<NodeCache>();
  return d;
}

// ---------------------------------------------------------------- cylinder

CylinderSet cylinder(const SystemDescriptor& sys, const BranchDecomposition& dec, const Word& w) {
  CylinderSet cs;
  cs.w = w;
  for (int s : w)
    if (s < 1 || s > sys.N) throw InvalidSystem("cylinder word letter out of range");
  const int d = static_cast<int>(w.size());
  switch (sys.kind) {
    case SystemKind::FullShift: {
      cs.has_exact = true;
      cs.exact_measure = rat_pow(Rat(sys.N), -d);
      cs.measure = to_double(cs.exact_measure);
      return cs;
    }
    case SystemKind::ProductShiftRotation: {
      cs.has_exact = true;
      cs.exact_measure = rat_pow(Rat(sys.N), -d);
      cs.measure = to_double(cs.exact_measure);
      cs.arc = Arc{0.0, 1.0};
      return cs;
    }
    default: {
      double lo = 0.0, hi = 1.0;
      for (int j = d - 1; j >= 0; --j) {
        lo = dec.section(w[static_cast<size_t>(j)], lo);
        hi = dec.section_closed(w[static_cast<size_t>(j)], hi);
      }
      cs.arc = Arc{lo, hi};
      if (sys.kind == SystemKind::WeightedCircleMonomial)
        cs.measure = sys.rho.integral(lo, hi).real();
      else
        cs.measure = hi - lo;
      return cs;
    }
  }
}

// ------------------------------------------------------- generation defect

namespace {

// integral of g over [a,b) against the system density, splitting at the
// given interior breakpoints of g
cd arc_integral(const BranchDecomposition& dec, const CircleFn& g, double a, double b,
                const std::vector<double>& breaks) {
  std::vector<double> cuts{a};
  for (double t : breaks)
    if (t > a + 1e-14 && t < b - 1e-14) cuts.push_back(t);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  const SystemKind kind = dec.sys.kind;
  const TrigPoly* rho = kind == SystemKind::WeightedCircleMonomial ? &dec.sys.rho : nullptr;
  CircleFn h = [&](double t) { return rho ? g(t) * (*rho)(t).real() : g(t); };
  cd acc(0, 0);
  for (size_t s = 0; s + 1 < cuts.size(); ++s)
    acc += integrate_arc(h, cuts[s], cuts[s + 1], 1.0 / 64.0);
  return acc;
}

}  // namespace

double generation_defect(const SystemDescriptor& sys, const BranchDecomposition& dec, int depth,
                         const CircleTestFn& f) {
  if (!sys.circle_lane() || sys.kind == SystemKind::ProductShiftRotation)
    throw InvalidSystem("circle test function requires a pure circle system");
  const long nw = word_count(sys.N, depth);
  double defect2 = 0.0;
  for (long i = 0; i < nw; ++i) {
    CylinderSet cs = cylinder(sys, dec, word_at(sys.N, depth, i));
    const double a = cs.arc->a, b = cs.arc->b;
    double m0 = cs.measure;
    if (m0 <= 0) continue;
    cd m1 = arc_integral(dec, f.f, a, b, f.breakpoints);
    cd m2 = arc_integral(dec, [&](double t) { return cd(std::norm(f.f(t)), 0.0); }, a, b,
                         f.breakpoints);
    defect2 += m2.real() - std::norm(m1) / m0;
  }
  return std::sqrt(std::max(0.0, defect2));
}

double generation_defect(const SystemDescriptor& sys, const BranchDecomposition& dec, int depth,
                         const ShiftTestFn& f) {
  (void)dec;
  if (sys.kind != SystemKind::FullShift)
    throw InvalidSystem("shift test function requires FullShift");
  const int D = std::max(depth, f.depth);
  const long total = word_count(sys.N, D);
  const long group = word_count(sys.N, D - depth);
  const double p = 1.0 / static_cast<double>(total);
  double defect2 = 0.0;
  for (long pre = 0; pre < word_count(sys.N, depth); ++pre) {
    cd mean(0, 0);
    for (long s = 0; s < group; ++s)
      mean += f.value(word_at(sys.N, D, pre * group + s));
    mean /= static_cast<double>(group);
    for (long s = 0; s < group; ++s)
      defect2 += p * std::norm(f.value(word_at(sys.N, D, pre * group + s)) - mean);
  }
  return std::sqrt(std::max(0.0, defect2));
}

double generation_defect(const SystemDescriptor& sys, const BranchDecomposition& dec, int depth,
                         const ProductTestFn& f) {
  (void)dec;
  if (sys.kind != SystemKind::ProductShiftRotation)
    throw InvalidSystem("product test function requires ProductShiftRotation");
  const int D = std::max(depth, f.shift_depth);
  const long total = word_count(sys.N, D);
  const long group = word_count(sys.N, D - depth);
  const double p = 1.0 / static_cast<double>(total);

  auto t_integral = [&](const Word& w, const std::function<cd(double)>& g) {
    std::vector<double> cuts{0.0};
    for (double t : f.circle_breakpoints)
      if (t > 1e-14 && t < 1.0 - 1e-14) cuts.push_back(t);
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());
    cd acc(0, 0);
    for (size_t s = 0; s + 1 < cuts.size(); ++s)
      acc += integrate_arc(g, cuts[s], cuts[s + 1], 1.0 / 64.0);
    (void)w;
    return acc;
  };

  double defect2 = 0.0;
  for (long pre = 0; pre < word_count(sys.N, depth); ++pre) {
    // mean of f over the cylinder V_prefix = U_prefix x [0,1)
    cd mean(0, 0);
    for (long s = 0; s < group; ++s) {
      Word w = word_at(sys.N, D, pre * group + s);
      mean += t_integral(w, [&](double t) { return f.value(w, t); });
    }
    mean /= static_cast<double>(group);
    for (long s = 0; s < group; ++s) {
      Word w = word_at(sys.N, D, pre * group + s);
      cd m2 = t_integral(w, [&](double t) { return cd(std::norm(f.value(w, t) - mean), 0.0); });
      defect2 += p * m2.real();
    }
  }
  return std::sqrt(std::max(0.0, defect2));
}

}  // namespace endo
