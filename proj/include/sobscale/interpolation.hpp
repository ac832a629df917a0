#pragma once

// Finite-dimensional Hilbert pairs [H0, H1] given by Gram matrices on C^d,
// their generating operator J, and interpolation with a function parameter:
//
//   ||u||_psi = ||psi(J) u||_H0.

#include <Eigen/Dense>

#include "sobscale/weights.hpp"

namespace sobscale {

class Rng;

using MatrixC = Eigen::MatrixXcd;
using VectorC = Eigen::VectorXcd;

class HilbertPair {
 public:
  /// Both Grams must be Hermitian and positive definite with
  /// lambda_min > 1e-10 * lambda_max; throws std::invalid_argument otherwise.
  HilbertPair(MatrixC g0, MatrixC g1);

  int dim() const { return static_cast<int>(g0_.rows()); }
  const MatrixC& g0() const { return g0_; }
  const MatrixC& g1() const { return g1_; }
  /// ||id||_{H1 -> H0}
  double embedding_constant() const { return embedding_constant_; }

 private:
  MatrixC g0_;
  MatrixC g1_;
  double embedding_constant_ = 0.0;
};

class GeneratingOperator {
 public:
  const HilbertPair& pair() const { return pair_; }
  /// J as a matrix on C^d; G0-self-adjoint with J^H G0 J = G1.
  const MatrixC& matrix() const { return j_; }
  /// Spectrum of J (ascending, positive).
  const Eigen::VectorXd& eigenvalues() const { return lambda_; }
  /// G0-orthonormal eigenvectors (columns).
  const MatrixC& eigenvectors() const { return v_; }

  /// Coordinates of u in the G0-orthonormal eigenbasis.
  VectorC coordinates(const VectorC& u) const;
  /// psi(J) as a matrix.
  MatrixC function_of(const InterpParameter& psi) const;
  /// Gram matrix of H_psi: (psi(J))^H G0 psi(J).
  MatrixC interpolated_gram(const InterpParameter& psi) const;

 private:
  friend GeneratingOperator generating_operator(const HilbertPair& pair);
  explicit GeneratingOperator(HilbertPair pair) : pair_(std::move(pair)) {}

  HilbertPair pair_;
  MatrixC j_;
  Eigen::VectorXd lambda_;
  MatrixC v_;
};

/// J = (G0^{-1} G1)^{1/2} from the reduced pencil G1 v = lambda^2 G0 v.
/// Throws ConditioningError when the pencil condition exceeds 1e12.
GeneratingOperator generating_operator(const HilbertPair& pair);

double interp_norm(const GeneratingOperator& op, const InterpParameter& psi, const VectorC& u);

/// (u^H G u)^{1/2}
double gram_norm(const MatrixC& gram, const VectorC& u);

/// Hermitian square root and inverse square root via eigendecomposition.
MatrixC hermitian_sqrt(const MatrixC& gram);
MatrixC hermitian_inv_sqrt(const MatrixC& gram);

/// ||T||_{A -> B} = sigma_max(G_B^{1/2} T G_A^{-1/2}).
double operator_norm(const MatrixC& t, const MatrixC& gram_from, const MatrixC& gram_to);

struct InterpolationBound {
  double r0 = 0.0;     // ||T||_{H0 -> K0}
  double r1 = 0.0;     // ||T||_{H1 -> K1}
  double r_psi = 0.0;  // ||T||_{H_psi -> K_psi}
  /// r0^{1-theta} r1^theta for power parameters, constant * max(r0, r1) otherwise.
  double bound = 0.0;
  bool power_parameter = false;
  bool satisfied = false;
};

InterpolationBound interpolation_bound(const HilbertPair& from, const HilbertPair& to,
                                       const MatrixC& t, const InterpParameter& psi,
                                       double general_constant = 4.0, double slack = 1e-10);

struct NormComparison {
  double max_relative_gap = 0.0;
  int trials = 0;
};

/// Interpolates [H_lambda, H_eta] with psi and compares against
/// H_omega, omega = lambda psi(eta / lambda), on random vectors.
NormComparison reiteration(const GeneratingOperator& op, const InterpParameter& lambda,
                           const InterpParameter& eta, const InterpParameter& psi, int trials,
                           Rng& rng);

struct DirectSumPair {
  HilbertPair base;
  int copies = 1;

  /// Block-diagonal pair with `copies` identical blocks.
  HilbertPair block_pair() const;
};

/// Interpolation of the K-fold block pair vs the l2-sum of blockwise
/// interpolated norms, on random block vectors.
NormComparison direct_sum_interp(const HilbertPair& pair, int copies, const InterpParameter& psi,
                                 int trials, Rng& rng);

/// Dual pair [H1*, H0*] in the pairing <f, u> = f^H u: Grams (G1^{-1}, G0^{-1}).
HilbertPair dual_pair(const HilbertPair& pair);
/// sup_u |f^H u| / ||u||_psi
double dual_norm(const GeneratingOperator& op, const InterpParameter& psi, const VectorC& f);

struct EmbeddingChain {
  double h0_by_psi = 0.0;  // ||u||_0 <= h0_by_psi * ||u||_psi
  double psi_by_h1 = 0.0;  // ||u||_psi <= psi_by_h1 * ||u||_1
};

EmbeddingChain embedding_chain(const GeneratingOperator& op, const InterpParameter& psi);

/// Random Hermitian positive-definite matrix with spectrum in [lo, hi].
MatrixC random_spd(int dim, double lo, double hi, Rng& rng);
VectorC random_vector(int dim, Rng& rng);
MatrixC random_matrix(int rows, int cols, Rng& rng);

}  // namespace sobscale
