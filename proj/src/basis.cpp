#include "endoscope/basis.hpp"

#include <Eigen/Cholesky>

namespace endo {

long TruncationBasis::size() const {
  switch (kind) {
    case BasisKind::FourierModes: return 2L * K + 1;
    case BasisKind::CylinderDepth: return word_count(N, depth);
    case BasisKind::TensorProduct: return word_count(N, depth) * (2L * K + 1);
  }
  return 0;
}

std::string TruncationBasis::label(long j) const {
  switch (kind) {
    case BasisKind::FourierModes: return "k=" + std::to_string(j - K);
    case BasisKind::CylinderDepth: return "w=" + word_str(word_at(N, depth, j));
    case BasisKind::TensorProduct: {
      const long modes = 2L * K + 1;
      return "w=" + word_str(word_at(N, depth, j / modes)) +
             ";k=" + std::to_string(j % modes - K);
    }
  }
  return "?";
}

namespace {

// sum_m c_m e^{2 pi i (m - K) t} by Horner in z = e^{2 pi i t}
cd horner_modes(const Eigen::VectorXcd& c, long K, double t) {
  const cd z = std::polar(1.0, two_pi * t);
  cd acc(0, 0);
  for (long m = c.size() - 1; m >= 0; --m) acc = acc * z + c(m);
  return acc * std::polar(1.0, -two_pi * static_cast<double>(K) * t);
}

}  // namespace

cd TruncationBasis::eval(long j, double theta) const {
  if (kind != BasisKind::FourierModes) throw std::logic_error("eval: circle basis only");
  if (coeff.size() == 0) return std::polar(1.0, two_pi * static_cast<double>(j - K) * theta);
  return horner_modes(coeff.col(j), K, theta);
}

CircleFn TruncationBasis::fn(long j) const {
  if (coeff.size() == 0) {
    const double k = static_cast<double>(j - K);
    return [k](double t) { return std::polar(1.0, two_pi * k * t); };
  }
  Eigen::VectorXcd c = coeff.col(j);
  const int KK = K;
  return [c, KK](double t) { return horner_modes(c, KK, t); };
}

Eigen::VectorXcd TruncationBasis::expand(const CircleFn& f) const {
  if (kind != BasisKind::FourierModes) throw std::logic_error("expand: circle basis only");
  Eigen::VectorXcd fx = quad.sample(f);
  return samples.adjoint() * (quad.w.matrix().asDiagonal() * fx);
}

double TruncationBasis::shift_value(long j, const Word& w) const {
  if (kind != BasisKind::CylinderDepth) throw std::logic_error("shift_value: cylinder basis only");
  Word base = word_at(N, depth, j);
  if (static_cast<int>(w.size()) < depth) throw std::invalid_argument("word shorter than depth");
  return is_prefix(base, w) ? std::sqrt(static_cast<double>(word_count(N, depth))) : 0.0;
}

std::shared_ptr<const TruncationBasis> TruncationBasis::fourier(const SystemDescriptor& sys,
                                                                const BranchDecomposition& dec,
                                                                int K, long target_nodes,
                                                                int breakpoint_depth) {
  auto b = std::make_shared<TruncationBasis>();
  b->kind = BasisKind::FourierModes;
  b->sys = sys;
  b->K = K;
  b->N = sys.N;
  b->quad = Quadrature::for_system(sys, dec, breakpoint_depth, {}, target_nodes);
  const long n = b->quad.size();
  const long sz = 2L * K + 1;
  Eigen::MatrixXcd raw(n, sz);
  for (long j = 0; j < sz; ++j) {
    const double k = static_cast<double>(j - K);
    for (long i = 0; i < n; ++i) raw(i, j) = std::polar(1.0, two_pi * k * b->quad.x(i));
  }
  if (sys.kind == SystemKind::WeightedCircleMonomial) {
    // Gram-Schmidt against rho dtheta via Cholesky: G = L L*, B = raw L^{-*}
    Eigen::MatrixXcd G = b->quad.gram(raw, raw);
    Eigen::LLT<Eigen::MatrixXcd> llt(G);
    if (llt.info() != Eigen::Success) throw std::runtime_error("basis Gram not positive definite");
    Eigen::MatrixXcd Linv =
        llt.matrixL().solve(Eigen::MatrixXcd::Identity(sz, sz));  // L^{-1}
    b->coeff = Linv.adjoint();
    b->samples = raw * b->coeff;
  } else {
    b->samples = std::move(raw);
  }
  return b;
}

std::shared_ptr<const TruncationBasis> TruncationBasis::cylinders(const SystemDescriptor& sys,
                                                                  int depth) {
  if (!sys.exact_lane()) throw std::logic_error("cylinder basis is the shift lane");
  auto b = std::make_shared<TruncationBasis>();
  b->kind = BasisKind::CylinderDepth;
  b->sys = sys;
  b->N = sys.N;
  b->depth = depth;
  return b;
}

std::shared_ptr<const TruncationBasis> TruncationBasis::tensor(const SystemDescriptor& sys,
                                                               int depth, int K,
                                                               long target_nodes) {
  if (sys.kind != SystemKind::ProductShiftRotation)
    throw std::logic_error("tensor basis is for the product system");
  auto b = std::make_shared<TruncationBasis>();
  b->kind = BasisKind::TensorProduct;
  b->sys = sys;
  b->N = sys.N;
  b->depth = depth;
  b->K = K;
  b->quad = Quadrature::midpoint(target_nodes);
  return b;
}

double gram_defect(const TruncationBasis& b) {
  switch (b.kind) {
    case BasisKind::CylinderDepth:
      return 0.0;  // mu[w] = N^{-d} exactly and cylinders are disjoint
    case BasisKind::FourierModes: {
      Eigen::MatrixXcd G = b.quad.gram(b.samples, b.samples);
      G.diagonal().array() -= 1.0;
      return G.cwiseAbs().maxCoeff();
    }
    case BasisKind::TensorProduct: {
      // circle factor on the midpoint grid; shift factor exact
      const long sz = 2L * b.K + 1;
      Eigen::MatrixXcd raw(b.quad.size(), sz);
      for (long j = 0; j < sz; ++j)
        for (long i = 0; i < b.quad.size(); ++i)
          raw(i, j) = std::polar(1.0, two_pi * static_cast<double>(j - b.K) * b.quad.x(i));
      Eigen::MatrixXcd G = b.quad.gram(raw, raw);
      G.diagonal().array() -= 1.0;
      return G.cwiseAbs().maxCoeff();
    }
  }
  return 0.0;
}

}  // namespace endo
