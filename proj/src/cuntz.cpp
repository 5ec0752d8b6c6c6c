#include "endoscope/cuntz.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace endo {

std::string route_name(Route r) {
  switch (r) {
    case Route::Sections: return "sections";
    case Route::PolarModuleBasis: return "polar-module-basis";
    case Route::Twisted: return "twisted";
  }
  return "?";
}

namespace {

// modes safe for matrix-route comparisons: spillover below a threshold that
// widens tenfold until at least three modes qualify
std::vector<long> gated_modes(const Eigen::ArrayXd& spill) {
  double thr = 1e-13;
  std::vector<long> idx;
  while (thr <= 1e-2) {
    idx.clear();
    for (long k = 0; k < spill.size(); ++k)
      if (spill(k) <= thr) idx.push_back(k);
    if (idx.size() >= 3) return idx;
    thr *= 10.0;
  }
  if (idx.empty()) throw std::runtime_error("no interior modes survive spillover gating");
  return idx;
}

Eigen::ArrayXd cwise_max(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) {
  return a.max(b);
}

}  // namespace

CuntzFamily cuntz_from_sections(const SystemDescriptor& sys, const BranchDecomposition& dec,
                                std::shared_ptr<const TruncationBasis> domain,
                                std::shared_ptr<const TruncationBasis> codomain) {
  CuntzFamily F;
  F.route = Route::Sections;
  F.sys = sys;
  F.dec = dec;
  F.N = dec.N;
  F.domain = domain;
  F.codomain = codomain;
  for (int i = 1; i <= dec.N; ++i) {
    // (S_i f)(x) = chi_{U_i}(x) f(phi x) u_i(phi x)^{-1/2}
    F.act.push_back([dec, i](const CircleFn& f) -> CircleFn {
      return [dec, i, f](double x) -> cd {
        const auto& nx = dec.node(x);
        if (nx.branch != i) return cd(0.0, 0.0);
        return f(nx.y) / std::sqrt(nx.u_fwd);
      };
    });
    // (S_i* g)(y) = u_i(y)^{1/2} g(psi_i y)
    F.adj.push_back([dec, i](const CircleFn& g) -> CircleFn {
      return [dec, i, g](double y) -> cd {
        const auto& n = dec.node(y);
        return std::sqrt(n.u[static_cast<size_t>(i - 1)]) * g(n.s[static_cast<size_t>(i - 1)]);
      };
    });
  }
  for (int i = 0; i < dec.N; ++i) F.mats.push_back(compress_action(F.act[i], domain, codomain));
  return F;
}

CuntzFamily cuntz_from_sections_exact(const SystemDescriptor& sys, const BranchDecomposition& dec,
                                      int d_in) {
  if (sys.kind != SystemKind::FullShift)
    throw std::invalid_argument("exact section families live on the full shift");
  CuntzFamily F;
  F.route = Route::Sections;
  F.sys = sys;
  F.dec = dec;
  F.N = dec.N;
  F.exact = true;
  F.d_in = d_in;
  F.d_out = d_in + 1;
  for (int i = 1; i <= dec.N; ++i) F.emats.push_back(shift_isometry(dec.N, d_in, i));
  return F;
}

CircleFn TransferData::apply(const CircleFn& a) const {
  if (exact) throw std::logic_error("shift-lane transfer acts on value vectors");
  BranchDecomposition d = dec;
  return [d, a](double y) -> cd {
    const auto& n = d.node(y);
    cd acc(0.0, 0.0);
    for (int k = 0; k < d.N; ++k)
      acc += n.u[static_cast<size_t>(k)] * a(n.s[static_cast<size_t>(k)]);
    return acc / n.w;
  };
}

TransferData transfer(const SystemDescriptor& sys, const BranchDecomposition& dec,
                      const PolarDecomposition& polar, const std::vector<TrigPoly>& test_fns,
                      double tol) {
  TransferData T;
  T.sys = sys;
  T.dec = dec;
  BranchDecomposition d = dec;
  T.w = [d](double y) -> cd { return cd(d.total_weight(y), 0.0); };
  T.a_phi = [d](double y) -> cd { return cd(std::sqrt(d.total_weight(y)), 0.0); };

  auto dom = polar.S.domain;
  auto cod = polar.S.codomain;
  const Eigen::ArrayXd& base = polar.S.spillover;

  // polar isometry factor against the weighted composition S_phi = C_phi M_{w^{-1/2}}
  LinearOperator::Action sphi = [d](const CircleFn& f) -> CircleFn {
    return [d, f](double x) -> cd {
      const auto& nx = d.node(x);
      return f(nx.y) / std::sqrt(nx.w_fwd);
    };
  };
  OperatorMatrix Sphi = compress_action(sphi, dom, cod);
  for (long m : gated_modes(cwise_max(base, Sphi.spillover)))
    T.polar_s_defect = std::max(T.polar_s_defect, (polar.S.m.col(m) - Sphi.m.col(m)).norm());

  // positive factor against multiplication by sqrt(w)
  OperatorMatrix Msw = multiplication_operator(T.a_phi, {}, dom, dom);
  for (long m : gated_modes(cwise_max(base, Msw.spillover)))
    T.polar_a_defect = std::max(T.polar_a_defect, (polar.a.m.col(m) - Msw.m.col(m)).norm());

  // route agreement: the closure composite S_phi* M_a S_phi takes f to
  // f . L(a) pointwise, since phi(psi_k(y)) = y; compressing the composite
  // once and comparing with the multiplication matrix of L(a) needs no
  // spillover gating because both sides clip identically
  bool fourier_plain = dom->kind == BasisKind::FourierModes && dom->coeff.size() == 0;
  double off = 0.0;
  bool have_off = false;
  for (const TrigPoly& a : test_fns) {
    CircleFn af = memoize_fn([a](double t) -> cd { return a(t); });
    OperatorMatrix Mla = multiplication_operator(memoize_fn(T.apply(af)), {}, dom, dom);
    LinearOperator::Action route = [d, af, sphi](const CircleFn& f) -> CircleFn {
      CircleFn g = sphi(f);
      return [d, af, g](double y) -> cd {
        const auto& n = d.node(y);
        cd acc(0.0, 0.0);
        for (int k = 0; k < d.N; ++k) {
          double s = n.s[static_cast<size_t>(k)];
          acc += n.u[static_cast<size_t>(k)] * af(s) * g(s);
        }
        return acc / std::sqrt(n.w);
      };
    };
    OperatorMatrix R = compress_action(route, dom, dom);
    T.route_defect = std::max(T.route_defect, spectral_norm(R.m - Mla.m));
    if (fourier_plain) {
      // the transfer of a trig poly multiplies, so its compressed matrix is
      // Toeplitz up to quadrature; measure the deviation from diagonal means
      have_off = true;
      long n = R.m.rows();
      std::map<long, cd> diag_sum;
      std::map<long, long> diag_cnt;
      for (long r = 0; r < n; ++r)
        for (long c = 0; c < n; ++c) {
          diag_sum[r - c] += R.m(r, c);
          diag_cnt[r - c] += 1;
        }
      for (long r = 0; r < n; ++r)
        for (long c = 0; c < n; ++c) {
          cd mean = diag_sum[r - c] / static_cast<double>(diag_cnt[r - c]);
          off = std::max(off, std::abs(R.m(r, c) - mean));
        }
    }
  }
  if (have_off) T.offdiag_defect = off;

  if (T.route_defect > tol || T.polar_a_defect > tol || T.polar_s_defect > tol) {
    std::ostringstream os;
    os << "transfer routes disagree: route " << T.route_defect << ", polar a " << T.polar_a_defect
       << ", polar S " << T.polar_s_defect << " (tol " << tol << ")";
    throw std::runtime_error(os.str());
  }
  return T;
}

TransferData transfer_exact(const SystemDescriptor& sys, const BranchDecomposition& dec) {
  TransferData T;
  T.sys = sys;
  T.dec = dec;
  T.exact = true;
  T.w = [](double) -> cd { return cd(1.0, 0.0); };
  T.a_phi = [](double) -> cd { return cd(1.0, 0.0); };
  return T;
}

std::vector<ModuleVector> module_basis_from_sections(const SystemDescriptor& sys,
                                                     const BranchDecomposition& dec) {
  std::vector<ModuleVector> xis;
  if (sys.exact_lane()) {
    for (int i = 1; i <= dec.N; ++i) {
      ModuleVector v;
      v.exact = true;
      v.depth = 1;
      v.vals.assign(dec.N, SqrtExt(0));
      v.vals[i - 1] = SqrtExt::half_power(dec.N, 1);  // sqrt(N) on [i]
      xis.push_back(std::move(v));
    }
    return xis;
  }
  for (int i = 1; i <= dec.N; ++i) {
    ModuleVector v;
    // xi_i = chi_{U_i} ((w / u_i) o phi)^{1/2}
    v.f = [dec, i](double x) -> cd {
      const auto& nx = dec.node(x);
      if (nx.branch != i) return cd(0.0, 0.0);
      return cd(std::sqrt(nx.w_fwd / nx.u_fwd), 0.0);
    };
    xis.push_back(std::move(v));
  }
  return xis;
}

CuntzFamily lift_to_cuntz(const SystemDescriptor& sys, const BranchDecomposition& dec,
                          const std::vector<ModuleVector>& xis,
                          std::shared_ptr<const TruncationBasis> domain,
                          std::shared_ptr<const TruncationBasis> codomain) {
  if (static_cast<int>(xis.size()) != dec.N)
    throw std::invalid_argument("module basis size must match the branch count");

  // reciprocity gate: <xi_i, xi_j>_L = L(conj(xi_i) xi_j) must be delta_ij
  const Eigen::ArrayXd& nodes = domain->quad.x;
  double gram_dev = 0.0;
  for (long t = 0; t < nodes.size(); ++t) {
    const auto& n = dec.node(nodes(t));
    std::vector<std::vector<cd>> xv(dec.N, std::vector<cd>(dec.N));
    for (int i = 0; i < dec.N; ++i)
      for (int k = 0; k < dec.N; ++k) xv[i][k] = xis[i].f(n.s[static_cast<size_t>(k)]);
    for (int i = 0; i < dec.N; ++i)
      for (int j = 0; j < dec.N; ++j) {
        cd acc(0.0, 0.0);
        for (int k = 0; k < dec.N; ++k)
          acc += n.u[static_cast<size_t>(k)] * std::conj(xv[i][k]) * xv[j][k];
        acc /= n.w;
        gram_dev = std::max(gram_dev, std::abs(acc - (i == j ? cd(1.0) : cd(0.0))));
      }
  }
  if (gram_dev > 1e-6) {
    std::ostringstream os;
    os << "module vectors fail <xi_i, xi_j>_L = delta_ij (deviation " << gram_dev << ")";
    throw std::invalid_argument(os.str());
  }

  CuntzFamily F;
  F.route = Route::PolarModuleBasis;
  F.sys = sys;
  F.dec = dec;
  F.N = dec.N;
  F.domain = domain;
  F.codomain = codomain;
  for (int i = 0; i < dec.N; ++i) {
    CircleFn xi = xis[i].f;
    // S_i = M_{xi_i} S_phi
    F.act.push_back([dec, xi](const CircleFn& f) -> CircleFn {
      return [dec, xi, f](double x) -> cd {
        cd xv = xi(x);
        if (xv == cd(0.0, 0.0)) return cd(0.0, 0.0);
        const auto& nx = dec.node(x);
        return xv * f(nx.y) / std::sqrt(nx.w_fwd);
      };
    });
    // S_i* = S_phi* M_{conj(xi_i)}
    F.adj.push_back([dec, xi](const CircleFn& g) -> CircleFn {
      return [dec, xi, g](double y) -> cd {
        const auto& n = dec.node(y);
        cd acc(0.0, 0.0);
        for (int k = 0; k < dec.N; ++k) {
          double s = n.s[static_cast<size_t>(k)];
          acc += n.u[static_cast<size_t>(k)] * std::conj(xi(s)) * g(s);
        }
        return acc / std::sqrt(n.w);
      };
    });
  }
  for (int i = 0; i < dec.N; ++i) F.mats.push_back(compress_action(F.act[i], domain, codomain));
  return F;
}

CuntzFamily lift_to_cuntz_exact(const SystemDescriptor& sys, const BranchDecomposition& dec,
                                const std::vector<ModuleVector>& xis, int d_in) {
  if (sys.kind != SystemKind::FullShift)
    throw std::invalid_argument("exact lifts live on the full shift");
  if (static_cast<int>(xis.size()) != dec.N)
    throw std::invalid_argument("module basis size must match the branch count");
  CuntzFamily F;
  F.route = Route::PolarModuleBasis;
  F.sys = sys;
  F.dec = dec;
  F.N = dec.N;
  F.exact = true;
  F.d_in = d_in;
  F.d_out = d_in + 1;
  EMat C = shift_composition(dec.N, d_in);
  for (int i = 0; i < dec.N; ++i) {
    std::vector<SqrtExt> vals = extend_values(dec.N, xis[i].depth, xis[i].vals, d_in + 1);
    F.emats.push_back(emul(shift_mult(dec.N, d_in + 1, vals), C));
  }
  return F;
}

TwistSpec TwistSpec::rotation2(double angle) {
  TwistSpec t;
  t.scalar.resize(2, 2);
  t.scalar << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return t;
}

TwistSpec TwistSpec::diagonal(std::vector<TrigPoly> ms) {
  TwistSpec t;
  t.functions = std::move(ms);
  return t;
}

CuntzFamily twist_family(const CuntzFamily& S, const TwistSpec& u) {
  if (S.exact) throw std::logic_error("twisted families live on the circle lane");
  CuntzFamily Q;
  Q.route = Route::Twisted;
  Q.sys = S.sys;
  Q.dec = S.dec;
  Q.N = S.N;
  Q.domain = S.domain;
  Q.codomain = S.codomain;

  if (u.is_scalar()) {
    if (u.scalar.rows() != S.N || u.scalar.cols() != S.N)
      throw std::invalid_argument("scalar twist must be N x N");
    Eigen::MatrixXcd dev = u.scalar.adjoint() * u.scalar - Eigen::MatrixXcd::Identity(S.N, S.N);
    if (dev.cwiseAbs().maxCoeff() > 1e-10)
      throw std::invalid_argument("scalar twist is not unitary");
    for (int j = 0; j < S.N; ++j) {
      std::vector<cd> col(S.N);
      for (int i = 0; i < S.N; ++i) col[i] = u.scalar(i, j);
      // Q_j = sum_i u_ij S_i
      Q.act.push_back([acts = S.act, col](const CircleFn& f) -> CircleFn {
        std::vector<CircleFn> parts;
        parts.reserve(acts.size());
        for (const auto& a : acts) parts.push_back(a(f));
        return [parts, col](double x) -> cd {
          cd v(0.0, 0.0);
          for (size_t i = 0; i < parts.size(); ++i) v += col[i] * parts[i](x);
          return v;
        };
      });
      Q.adj.push_back([adjs = S.adj, col](const CircleFn& g) -> CircleFn {
        std::vector<CircleFn> parts;
        parts.reserve(adjs.size());
        for (const auto& a : adjs) parts.push_back(a(g));
        return [parts, col](double y) -> cd {
          cd v(0.0, 0.0);
          for (size_t i = 0; i < parts.size(); ++i) v += std::conj(col[i]) * parts[i](y);
          return v;
        };
      });
    }
  } else {
    if (static_cast<int>(u.functions.size()) != S.N)
      throw std::invalid_argument("function twist needs one multiplier per branch");
    for (const TrigPoly& m : u.functions)
      for (int t = 0; t < 512; ++t)
        if (std::abs(std::abs(m(t / 512.0)) - 1.0) > 1e-10)
          throw std::invalid_argument("twist multiplier is not unimodular");
    for (int i = 0; i < S.N; ++i) {
      TrigPoly m = u.functions[i];
      // Q_i = S_i M_{m_i}
      Q.act.push_back([base = S.act[i], m](const CircleFn& f) -> CircleFn {
        CircleFn mf = [m, f](double t) -> cd { return m(t) * f(t); };
        return base(mf);
      });
      Q.adj.push_back([base = S.adj[i], m](const CircleFn& g) -> CircleFn {
        CircleFn r = base(g);
        return [m, r](double y) -> cd { return std::conj(m(y)) * r(y); };
      });
    }
  }
  for (int i = 0; i < S.N; ++i) Q.mats.push_back(compress_action(Q.act[i], Q.domain, Q.codomain));
  return Q;
}

PairingData pairing_matrix(const CuntzFamily& S, const CuntzFamily& Q, double unitary_tol) {
  if (S.exact != Q.exact) throw std::invalid_argument("pairing needs families on the same lane");
  PairingData P;
  P.exact = S.exact;
  P.rows = S.members();
  P.cols = Q.members();

  if (P.exact) {
    if (S.d_in != Q.d_in) throw std::invalid_argument("pairing needs matching depths");
    long dim = word_count(S.N, S.d_in);
    P.scalars.resize(P.rows, P.cols);
    P.scalarity.resize(P.rows, P.cols);
    for (long i = 0; i < P.rows; ++i)
      for (long j = 0; j < P.cols; ++j) {
        EMat U = emul(adj(S.emats[i]), Q.emats[j]);
        Eigen::MatrixXcd Uc = to_complex(U);
        cd lam = Uc.trace() / static_cast<double>(dim);
        P.scalars(i, j) = lam;
        P.scalarity(i, j) =
            (Uc - lam * Eigen::MatrixXcd::Identity(dim, dim)).norm() / std::sqrt(double(dim));
        P.eblocks.push_back(std::move(U));
      }
    // (U*U)_ij = sum_k U_ki^* U_kj and (UU*)_ij = sum_k U_ik U_jk^*
    for (long i = 0; i < P.cols; ++i)
      for (long j = 0; j < P.cols; ++j) {
        EMat acc = ezero(dim, dim);
        for (long k = 0; k < P.rows; ++k)
          acc += emul(adj(P.eblocks[k * P.cols + i]), P.eblocks[k * P.cols + j]);
        if (i == j) acc -= eidentity(dim);
        P.unitarity_defect = std::max(P.unitarity_defect, max_abs(acc));
      }
    for (long i = 0; i < P.rows; ++i)
      for (long j = 0; j < P.rows; ++j) {
        EMat acc = ezero(dim, dim);
        for (long k = 0; k < P.cols; ++k)
          acc += emul(P.eblocks[i * P.cols + k], adj(P.eblocks[j * P.cols + k]));
        if (i == j) acc -= eidentity(dim);
        P.unitarity_defect = std::max(P.unitarity_defect, max_abs(acc));
      }
  } else {
    auto dom = Q.domain;
    if (S.domain->size() != dom->size())
      throw std::invalid_argument("pairing needs families over the same truncation");
    long dim = dom->size();
    P.scalars.resize(P.rows, P.cols);
    P.scalarity.resize(P.rows, P.cols);
    for (long i = 0; i < P.rows; ++i)
      for (long j = 0; j < P.cols; ++j) {
        // U_ij = S_i* Q_j, compressed once as a composite
        LinearOperator::Action uij = [&S, &Q, i, j](const CircleFn& f) -> CircleFn {
          return S.adj[i](Q.act[j](f));
        };
        OperatorMatrix blk = compress_action(uij, dom, S.domain);
        cd lam = blk.m.trace() / static_cast<double>(dim);
        P.scalars(i, j) = lam;
        P.scalarity(i, j) =
            (blk.m - lam * Eigen::MatrixXcd::Identity(dim, dim)).norm() / std::sqrt(double(dim));
        P.blocks.push_back(std::move(blk));
      }
    // block rows/columns of the pairing must be unitary; both composites are
    // exact operator identities, so they are formed structurally and
    // compressed once at the end
    for (long j = 0; j < P.cols; ++j)
      for (long m = 0; m < dim; ++m) {
        CircleFn bm = dom->fn(m);
        CircleFn h = memoize_fn(Q.act[j](bm));
        std::vector<CircleFn> parts;
        for (long k = 0; k < P.rows; ++k) parts.push_back(S.act[k](S.adj[k](h)));
        CircleFn g = memoize_fn([parts](double x) -> cd {
          cd v(0.0, 0.0);
          for (const auto& p : parts) v += p(x);
          return v;
        });
        for (long i = 0; i < P.cols; ++i) {
          Eigen::VectorXcd vec = dom->expand(Q.adj[i](g));
          vec(m) -= (i == j) ? 1.0 : 0.0;
          P.unitarity_defect = std::max(P.unitarity_defect, vec.norm());
        }
      }
    for (long j = 0; j < P.rows; ++j)
      for (long m = 0; m < dim; ++m) {
        CircleFn bm = dom->fn(m);
        CircleFn h = memoize_fn(S.act[j](bm));
        std::vector<CircleFn> parts;
        for (long k = 0; k < P.cols; ++k) parts.push_back(Q.act[k](Q.adj[k](h)));
        CircleFn g = memoize_fn([parts](double x) -> cd {
          cd v(0.0, 0.0);
          for (const auto& p : parts) v += p(x);
          return v;
        });
        for (long i = 0; i < P.rows; ++i) {
          Eigen::VectorXcd vec = dom->expand(S.adj[i](g));
          vec(m) -= (i == j) ? 1.0 : 0.0;
          P.unitarity_defect = std::max(P.unitarity_defect, vec.norm());
        }
      }
  }
  if (P.rows == P.cols && P.unitarity_defect <= unitary_tol) P.recovered_n = P.rows;
  return P;
}

}  // namespace endo
