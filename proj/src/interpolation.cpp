#include "sobscale/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sobscale/errors.hpp"
#include "sobscale/rng.hpp"
#include "weights_node.hpp"

namespace sobscale {

namespace {

constexpr double kPencilConditionLimit = 1e12;

void require_hermitian_pd(const MatrixC& g, const char* name) {
  if (g.rows() == 0 || g.rows() != g.cols()) {
    throw std::invalid_argument(std::string(name) + " must be square and non-empty");
  }
  const double scale = std::max(g.norm(), 1e-300);
  if ((g - g.adjoint()).norm() > 1e-12 * scale) {
    throw std::invalid_argument(std::string(name) + " is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<MatrixC> es(g, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  if (!(ev.minCoeff() > 1e-10 * ev.maxCoeff())) {
    throw std::invalid_argument(std::string(name) + " is not positive definite");
  }
}

struct ReducedPencil {
  Eigen::LLT<MatrixC> chol;
  Eigen::VectorXd mu;  // eigenvalues of L^{-1} G1 L^{-H}, ascending
  MatrixC q;
};

ReducedPencil reduce(const MatrixC& g0, const MatrixC& g1) {
  ReducedPencil r;
  r.chol.compute(g0);
  if (r.chol.info() != Eigen::Success) throw ConditioningError("Cholesky of G0 failed");
  const auto& l = r.chol.matrixL();
  MatrixC c = l.solve(g1);
  c = l.solve(c.adjoint()).adjoint();
  c = (0.5 * (c + c.adjoint())).eval();
  Eigen::SelfAdjointEigenSolver<MatrixC> es(c);
  if (es.info() != Eigen::Success) throw ConditioningError("pencil eigensolve failed");
  r.mu = es.eigenvalues();
  r.q = es.eigenvectors();
  return r;
}

MatrixC hermitian_power(const MatrixC& gram, double p) {
  Eigen::SelfAdjointEigenSolver<MatrixC> es(0.5 * (gram + gram.adjoint()));
  Eigen::VectorXd d = es.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = std::pow(d(i), p);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

HilbertPair::HilbertPair(MatrixC g0, MatrixC g1) : g0_(std::move(g0)), g1_(std::move(g1)) {
  if (g0_.rows() != g1_.rows() || g0_.cols() != g1_.cols()) {
    throw std::invalid_argument("Gram matrices of a pair must have equal size");
  }
  require_hermitian_pd(g0_, "G0");
  require_hermitian_pd(g1_, "G1");
  const auto r = reduce(g0_, g1_);
  embedding_constant_ = 1.0 / std::sqrt(r.mu.minCoeff());
}

GeneratingOperator generating_operator(const HilbertPair& pair) {
  const auto r = reduce(pair.g0(), pair.g1());
  if (!(r.mu.minCoeff() > 0.0) || r.mu.maxCoeff() / r.mu.minCoeff() > kPencilConditionLimit) {
    throw ConditioningError("Gram pencil condition exceeds 1e12");
  }
  GeneratingOperator op(pair);
  op.lambda_ = r.mu.cwiseSqrt();
  // V = L^{-H} Q satisfies V^H G0 V = I and V^H G1 V = diag(mu).
  op.v_ = r.chol.matrixU().solve(r.q);
  op.j_ = op.v_ * op.lambda_.asDiagonal() * op.v_.adjoint() * pair.g0();
  return op;
}

VectorC GeneratingOperator::coordinates(const VectorC& u) const {
  return v_.adjoint() * (pair_.g0() * u);
}

MatrixC GeneratingOperator::function_of(const InterpParameter& psi) const {
  Eigen::VectorXd f(lambda_.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = psi(lambda_(i));
  return v_ * f.asDiagonal() * v_.adjoint() * pair_.g0();
}

MatrixC GeneratingOperator::interpolated_gram(const InterpParameter& psi) const {
  Eigen::VectorXd f2(lambda_.size());
  for (Eigen::Index i = 0; i < f2.size(); ++i) {
    const double f = psi(lambda_(i));
    f2(i) = f * f;
  }
  const MatrixC w = pair_.g0() * v_;
  MatrixC g = w * f2.asDiagonal() * w.adjoint();
  return 0.5 * (g + g.adjoint());
}

double interp_norm(const GeneratingOperator& op, const InterpParameter& psi, const VectorC& u) {
  const VectorC c = op.coordinates(u);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double f = psi(op.eigenvalues()(i));
    acc += f * f * std::norm(c(i));
  }
  return std::sqrt(acc);
}

double gram_norm(const MatrixC& gram, const VectorC& u) {
  return std::sqrt(std::max(0.0, u.dot(gram * u).real()));
}

MatrixC hermitian_sqrt(const MatrixC& gram) { return hermitian_power(gram, 0.5); }
MatrixC hermitian_inv_sqrt(const MatrixC& gram) { return hermitian_power(gram, -0.5); }

double operator_norm(const MatrixC& t, const MatrixC& gram_from, const MatrixC& gram_to) {
  if (t.cols() != gram_from.rows() || t.rows() != gram_to.rows()) {
    throw std::invalid_argument("operator_norm: dimension mismatch");
  }
  const MatrixC b = hermitian_sqrt(gram_to) * t * hermitian_inv_sqrt(gram_from);
  Eigen::JacobiSVD<MatrixC> svd(b);
  return svd.singularValues()(0);
}

InterpolationBound interpolation_bound(const HilbertPair& from, const HilbertPair& to,
                                       const MatrixC& t, const InterpParameter& psi,
                                       double general_constant, double slack) {
  if (t.cols() != from.dim() || t.rows() != to.dim()) {
    throw std::invalid_argument("interpolation_bound: operator does not map H into K");
  }
  const auto op_from = generating_operator(from);
  const auto op_to = generating_operator(to);
  InterpolationBound out;
  out.r0 = operator_norm(t, from.g0(), to.g0());
  out.r1 = operator_norm(t, from.g1(), to.g1());
  out.r_psi = operator_norm(t, op_from.interpolated_gram(psi), op_to.interpolated_gram(psi));
  if (const auto* p = std::get_if<detail::PPower>(&psi.node().form)) {
    const double theta = p->exponent;
    if (theta >= 0.0 && theta <= 1.0) {
      out.power_parameter = true;
      out.bound = std::pow(out.r0, 1.0 - theta) * std::pow(out.r1, theta);
    }
  }
  if (!out.power_parameter) out.bound = general_constant * std::max(out.r0, out.r1);
  out.satisfied = out.r_psi <= out.bound + slack;
  return out;
}

NormComparison reiteration(const GeneratingOperator& op, const InterpParameter& lambda,
                           const InterpParameter& eta, const InterpParameter& psi, int trials,
                           Rng& rng) {
  const HilbertPair inner(op.interpolated_gram(lambda), op.interpolated_gram(eta));
  const auto inner_op = generating_operator(inner);
  const auto omega = InterpParameter::quadratic(lambda, eta, psi);
  NormComparison out;
  out.trials = trials;
  for (int i = 0; i < trials; ++i) {
    const VectorC u = random_vector(op.pair().dim(), rng);
    const double lhs = interp_norm(inner_op, psi, u);
    const double rhs = interp_norm(op, omega, u);
    out.max_relative_gap = std::max(out.max_relative_gap, std::abs(lhs - rhs) / rhs);
  }
  return out;
}

HilbertPair DirectSumPair::block_pair() const {
  if (copies < 1) throw std::invalid_argument("direct sum needs at least one copy");
  const int d = base.dim();
  MatrixC g0 = MatrixC::Zero(d * copies, d * copies);
  MatrixC g1 = MatrixC::Zero(d * copies, d * copies);
  for (int k = 0; k < copies; ++k) {
    g0.block(k * d, k * d, d, d) = base.g0();
    g1.block(k * d, k * d, d, d) = base.g1();
  }
  return HilbertPair(std::move(g0), std::move(g1));
}

NormComparison direct_sum_interp(const HilbertPair& pair, int copies, const InterpParameter& psi,
                                 int trials, Rng& rng) {
  const DirectSumPair sum{pair, copies};
  const auto block_op = generating_operator(sum.block_pair());
  const auto base_op = generating_operator(pair);
  const int d = pair.dim();
  NormComparison out;
  out.trials = trials;
  for (int i = 0; i < trials; ++i) {
    const VectorC u = random_vector(d * copies, rng);
    double blockwise = 0.0;
    for (int k = 0; k < copies; ++k) {
      const double nk = interp_norm(base_op, psi, u.segment(k * d, d));
      blockwise += nk * nk;
    }
    blockwise = std::sqrt(blockwise);
    const double whole = interp_norm(block_op, psi, u);
    out.max_relative_gap = std::max(out.max_relative_gap, std::abs(whole - blockwise) / blockwise);
  }
  return out;
}

HilbertPair dual_pair(const HilbertPair& pair) {
  MatrixC a = pair.g1().inverse();
  MatrixC b = pair.g0().inverse();
  return HilbertPair(0.5 * (a + a.adjoint()), 0.5 * (b + b.adjoint()));
}

double dual_norm(const GeneratingOperator& op, const InterpParameter& psi, const VectorC& f) {
  const MatrixC g = op.interpolated_gram(psi);
  const VectorC x = g.llt().solve(f);
  return std::sqrt(std::max(0.0, f.dot(x).real()));
}

EmbeddingChain embedding_chain(const GeneratingOperator& op, const InterpParameter& psi) {
  EmbeddingChain out;
  for (Eigen::Index i = 0; i < op.eigenvalues().size(); ++i) {
    const double l = op.eigenvalues()(i);
    const double f = psi(l);
    out.h0_by_psi = std::max(out.h0_by_psi, 1.0 / f);
    out.psi_by_h1 = std::max(out.psi_by_h1, f / l);
  }
  return out;
}

MatrixC random_matrix(int rows, int cols, Rng& rng) {
  MatrixC m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = rng.complex_normal();
  }
  return m;
}

VectorC random_vector(int dim, Rng& rng) {
  VectorC v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.complex_normal();
  return v;
}

MatrixC random_spd(int dim, double lo, double hi, Rng& rng) {
  const MatrixC q = Eigen::HouseholderQR<MatrixC>(random_matrix(dim, dim, rng)).householderQ();
  Eigen::VectorXd d(dim);
  for (int i = 0; i < dim; ++i) d(i) = std::exp(rng.uniform(std::log(lo), std::log(hi)));
  MatrixC g = q * d.asDiagonal() * q.adjoint();
  return 0.5 * (g + g.adjoint());
}

}  // namespace sobscale
