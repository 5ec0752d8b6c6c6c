#include "endoscope/operators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace endo {

std::vector<long> OperatorMatrix::interior(double tol) const {
  std::vector<long> cols;
  if (spillover.size() == 0) {
    for (long k = 0; k < m.cols(); ++k) cols.push_back(k);
    return cols;
  }
  for (long k = 0; k < spillover.size(); ++k)
    if (spillover(k) <= tol) cols.push_back(k);
  return cols;
}

Eigen::MatrixXcd OperatorMatrix::interior_block(double tol) const {
  if (m.rows() != m.cols()) throw std::logic_error("interior_block: square matrices only");
  std::vector<long> idx = interior(tol);
  Eigen::MatrixXcd b(idx.size(), idx.size());
  for (size_t r = 0; r < idx.size(); ++r)
    for (size_t c = 0; c < idx.size(); ++c) b(r, c) = m(idx[r], idx[c]);
  return b;
}

double spectral_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  return m.jacobiSvd().singularValues()(0);
}

namespace {

bool pure_fourier(const TruncationBasis& b) {
  return b.kind == BasisKind::FourierModes && b.coeff.size() == 0;
}

// columns sampled on the codomain grid -> compression + spillover
OperatorMatrix from_samples(std::shared_ptr<const TruncationBasis> in,
                            std::shared_ptr<const TruncationBasis> out,
                            const Eigen::MatrixXcd& cols) {
  OperatorMatrix r;
  r.domain = std::move(in);
  r.codomain = std::move(out);
  r.m = r.codomain->quad.gram(r.codomain->samples, cols);
  r.spillover.resize(cols.cols());
  for (long k = 0; k < cols.cols(); ++k) {
    const double full =
        (r.codomain->quad.w * cols.col(k).array().abs2()).sum();
    r.spillover(k) = std::max(0.0, full - r.m.col(k).squaredNorm());
  }
  return r;
}

}  // namespace

OperatorMatrix multiplication_operator(const TrigPoly& f,
                                       std::shared_ptr<const TruncationBasis> in,
                                       std::shared_ptr<const TruncationBasis> out) {
  if (pure_fourier(*in) && pure_fourier(*out)) {
    OperatorMatrix r;
    r.domain = in;
    r.codomain = out;
    const long nc = in->size(), nr = out->size();
    r.m = Eigen::MatrixXcd::Zero(nr, nc);
    for (long j = 0; j < nr; ++j)
      for (long k = 0; k < nc; ++k) r.m(j, k) = f.coeff(static_cast<int>((j - out->K) - (k - in->K)));
    r.spillover.resize(nc);
    for (long k = 0; k < nc; ++k) {
      double spill = 0.0;
      for (const auto& [mm, v] : f.c)
        if (std::abs((k - in->K) + mm) > out->K) spill += std::norm(v);
      r.spillover(k) = spill;
    }
    return r;
  }
  return multiplication_operator([f](double t) { return f(t); }, {}, std::move(in),
                                 std::move(out));
}

OperatorMatrix multiplication_operator(const CircleFn& f, std::vector<double> breaks,
                                       std::shared_ptr<const TruncationBasis> in,
                                       std::shared_ptr<const TruncationBasis> out) {
  const Quadrature& q = out->quad;
  Eigen::VectorXcd fx = q.sample(f);
  Eigen::MatrixXcd cols(q.size(), in->size());
  for (long k = 0; k < in->size(); ++k) {
    CircleFn bk = in->fn(k);
    for (long i = 0; i < q.size(); ++i) cols(i, k) = fx(i) * bk(q.x(i));
  }
  OperatorMatrix r = from_samples(in, out, cols);

  // refinement cross-check: recompute a spread of first-column entries on a
  // grid split at the declared jumps of f with twice the panel budget
  {
    std::vector<double> cuts = breaks;
    const BranchDecomposition dec = decompose(out->sys);
    Quadrature fine = Quadrature::for_system(out->sys, dec, 3, cuts, 2 * q.size());
    CircleFn b0 = in->fn(0);
    double worst = 0.0;
    const long nr = out->size();
    const long stride = std::max(1L, nr / 8);
    for (long j = 0; j < nr; j += stride) {
      CircleFn cj = out->fn(j);
      cd e = fine.inner(cj, [&](double t) { return f(t) * b0(t); });
      worst = std::max(worst, std::abs(e - r.m(j, 0)));
    }
    if (worst > 1e-7)
      throw std::runtime_error("multiplication_operator: quadrature did not converge (defect " +
                               std::to_string(worst) + " after refinement)");
  }
  return r;
}

OperatorMatrix composition_operator(const SystemDescriptor& sys, const BranchDecomposition& dec,
                                    std::shared_ptr<const TruncationBasis> in,
                                    std::shared_ptr<const TruncationBasis> out) {
  if (sys.kind == SystemKind::CircleMonomial && pure_fourier(*in) && pure_fourier(*out)) {
    OperatorMatrix r;
    r.domain = in;
    r.codomain = out;
    const long nc = in->size();
    r.m = Eigen::MatrixXcd::Zero(out->size(), nc);
    r.spillover = Eigen::ArrayXd::Zero(nc);
    for (long k = 0; k < nc; ++k) {
      const long target = static_cast<long>(sys.N) * (k - in->K);  // e_k o phi = e_{Nk}
      if (std::abs(target) <= out->K)
        r.m(target + out->K, k) = 1.0;
      else
        r.spillover(k) = 1.0;
    }
    return r;
  }
  if (!sys.circle_lane() || sys.kind == SystemKind::ProductShiftRotation)
    throw std::logic_error("composition_operator: circle systems only (shift lane is exact)");
  const Quadrature& q = out->quad;
  Eigen::MatrixXcd cols(q.size(), in->size());
  for (long k = 0; k < in->size(); ++k) {
    CircleFn bk = in->fn(k);
    for (long i = 0; i < q.size(); ++i) cols(i, k) = bk(dec.map(q.x(i)));
  }
  return from_samples(std::move(in), std::move(out), cols);
}

PolarDecomposition polar_decompose(const OperatorMatrix& C) {
  PolarDecomposition p;
  Eigen::MatrixXcd H = C.m.adjoint() * C.m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  if (es.info() != Eigen::Success) throw std::runtime_error("polar_decompose: eigensolver failed");
  p.eigenvalues = es.eigenvalues();
  const double lmin = p.eigenvalues.minCoeff();
  if (lmin <= 1e-10)
    throw std::runtime_error(
        "polar_decompose: operator not bounded below at this truncation (min eigenvalue " +
        std::to_string(lmin) + ")");
  const Eigen::MatrixXcd& V = es.eigenvectors();
  Eigen::ArrayXd sq = p.eigenvalues.array().sqrt();
  p.a.domain = C.domain;
  p.a.codomain = C.domain;
  p.a.m = V * sq.matrix().asDiagonal() * V.adjoint();
  p.S.domain = C.domain;
  p.S.codomain = C.codomain;
  p.S.m = C.m * (V * sq.inverse().matrix().asDiagonal() * V.adjoint());
  p.S.spillover = C.spillover;
  p.reconstruct_defect = spectral_norm(p.S.m * p.a.m - C.m);
  return p;
}

std::pair<double, double> singular_bounds(const OperatorMatrix& C) {
  if (C.m.size() == 0) return {0.0, 0.0};
  Eigen::VectorXd sv = C.m.jacobiSvd().singularValues();
  return {sv(sv.size() - 1), sv(0)};
}

std::pair<double, double> singular_bounds(const OperatorMatrix& C, double interior_tol) {
  std::vector<long> idx = C.interior(interior_tol);
  if (idx.empty()) return {0.0, 0.0};
  Eigen::MatrixXcd sub(C.m.rows(), idx.size());
  for (size_t k = 0; k < idx.size(); ++k) sub.col(k) = C.m.col(idx[k]);
  Eigen::VectorXd sv = sub.jacobiSvd().singularValues();
  return {sv(sv.size() - 1), sv(0)};
}

LinearOperator LinearOperator::structural(Action act, std::shared_ptr<const TruncationBasis> in,
                                          std::shared_ptr<const TruncationBasis> out) {
  LinearOperator op;
  op.act_ = std::move(act);
  op.domain_ = std::move(in);
  op.codomain_ = std::move(out);
  return op;
}

LinearOperator LinearOperator::matrix(OperatorMatrix m) {
  LinearOperator op;
  op.domain_ = m.domain;
  op.codomain_ = m.codomain;
  op.mat_ = std::move(m);
  return op;
}

CircleFn LinearOperator::apply(const CircleFn& f) const {
  if (act_) return act_(f);
  Eigen::VectorXcd c = mat_->m * domain_->expand(f);
  auto out = codomain_;
  return [out, c](double t) {
    cd acc(0, 0);
    for (long j = 0; j < c.size(); ++j) acc += c(j) * out->eval(j, t);
    return acc;
  };
}

const OperatorMatrix& LinearOperator::compress() const {
  if (!mat_) mat_ = compress_action(act_, domain_, codomain_);
  return *mat_;
}

OperatorMatrix compress_action(const LinearOperator::Action& act,
                               const std::shared_ptr<const TruncationBasis>& in,
                               const std::shared_ptr<const TruncationBasis>& out) {
  const Quadrature& q = out->quad;
  Eigen::MatrixXcd cols(q.size(), in->size());
  for (long k = 0; k < in->size(); ++k) {
    CircleFn img = act(in->fn(k));
    for (long i = 0; i < q.size(); ++i) cols(i, k) = img(q.x(i));
  }
  return from_samples(in, out, cols);
}

}  // namespace endo
