#pragma once

// Pseudo-differential operators on the periodic grid,
//
//   (Op[a] u)(x) = L^{-n} sum_k e^{i x.xi_k} a(x, xi_k) u_hat(xi_k),
//
// symbol-class and ellipticity certificates, the H^phi -> H^{t^{-m} phi}
// mapping-norm probe, and the A-scale generated by <D> + v.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "sobscale/interpolation.hpp"
#include "sobscale/spectral.hpp"
#include "sobscale/symbol_expr.hpp"
#include "sobscale/weights.hpp"

namespace sobscale {

class Rng;

using Point = std::array<double, 3>;

class Symbol {
 public:
  enum class Form { multiplier, separable, general };

  /// a(x, xi) = f(<xi>)
  static Symbol multiplier(const Weight& f, double order);
  /// a(x, xi) = chi(x) f(<xi>), chi sampled on the operator grid.
  static Symbol separable(const GridFunction& chi, const Weight& f, double order);
  /// Closed-form a(x, xi); `dim` is the space dimension it will act on.
  static Symbol general(const std::string& expr, double order, int dim);

  /// Copy whose Schwartz kernel is truncated to |x - y| <= radius.
  Symbol with_properness_radius(double radius) const;

  Form form() const { return form_; }
  double order() const { return order_; }
  int dim() const { return dim_; }
  bool depends_on_x() const;
  const std::optional<double>& properness_radius() const { return radius_; }
  const std::optional<Weight>& weight() const { return f_; }
  const std::optional<GridFunction>& chi() const { return chi_; }
  const std::optional<SymbolExpr>& expr() const { return expr_; }

  /// a(x, xi) for general and multiplier symbols; separable symbols need the
  /// grid index of x, see eval_at_index.
  double eval(const Point& x, const Point& xi) const;
  /// a(x_flat, xi) with x a grid point of `grid`.
  double eval_at_index(const Grid& grid, std::size_t flat, const Point& xi) const;

 private:
  Form form_ = Form::multiplier;
  double order_ = 0.0;
  int dim_ = 1;
  std::optional<Weight> f_;
  std::optional<GridFunction> chi_;
  std::optional<SymbolExpr> expr_;
  std::optional<double> radius_;
};

class PdoOperator {
 public:
  /// Dense kernels are built for general symbols when N^n <= kDenseLimit;
  /// larger grids evaluate the symbol on the fly.
  static constexpr std::size_t kDenseLimit = 2048;

  PdoOperator(Symbol symbol, Grid grid);

  const Symbol& symbol() const { return symbol_; }
  const Grid& grid() const { return grid_; }

  GridFunction apply(const GridFunction& u) const;
  /// Adjoint in the grid l2 (equivalently L2) inner product.
  GridFunction apply_adjoint(const GridFunction& w) const;
  /// Matrix on grid values, (Op u)(x) = sum_y M(x, y) u(y). Throws
  /// std::invalid_argument when N^n > kDenseLimit.
  MatrixC dense_matrix() const;
  bool has_dense_matrix() const { return dense_.has_value(); }

 private:
  Symbol symbol_;
  Grid grid_;
  // kernel_(x, k) = L^{-n} a(x, xi_k) e^{i x.xi_k}; general symbols only
  std::optional<MatrixC> kernel_;
  // grid-space matrix; built when a properness radius is set
  std::optional<MatrixC> dense_;
};

struct SymbolBound {
  std::array<int, 3> alpha{};  // xi derivatives
  std::array<int, 3> beta{};   // x derivatives
  double constant = 0.0;       // sup |d_xi^alpha d_x^beta a| / <xi>^{m - |alpha|}
  std::vector<double> block_max;  // same sup restricted to each dyadic |xi| block
  bool growth = false;
};

struct SymbolSampling {
  int x_samples = 16;      // per axis, general symbols
  int blocks = 10;         // dyadic blocks |xi| in [2^b, 2^{b+1}), b < blocks
  int per_block = 4;       // magnitudes per block
  double xi_step = 1e-2;   // relative to <xi>
  double x_step = 1e-2;    // general symbols; separable ones use the grid spacing
  double growth_ratio = 1.5;
  double growth_floor = 1e-6;
};

struct SymbolCertificate {
  int k = 0;
  std::vector<SymbolBound> bounds;  // ordered by |alpha| + |beta|, then lexicographic
  bool ok = false;                  // no bound grows across the last two blocks
  SymbolSampling sampling;
};

/// For separable symbols the x samples are the grid points of chi.
SymbolCertificate certify_symbol(const Symbol& s, int k, const SymbolSampling& sampling = {});

struct EllipticCertificate {
  double constant = 0.0;  // inf |a| / |xi|^m over sampled x and |xi| > R
  double last_block_min = 0.0;
  double previous_block_min = 0.0;
  bool ok = false;  // constant > 1e-10 and the last block does not decay
};

EllipticCertificate certify_elliptic(const Symbol& s, double R, const SymbolSampling& sampling = {});

struct FamilyCertificate {
  std::vector<SymbolCertificate> members;
  double common_bound = 0.0;  // max of every member constant
  bool ok = false;
};

/// certify_symbol per member; the family is bounded when every member is.
FamilyCertificate certify_family(const std::vector<Symbol>& family, int k,
                                 const SymbolSampling& sampling = {});

struct MappingNorm {
  double norm = 0.0;
  double residual = 0.0;  // ||B^H B z - norm^2 z|| / norm^2 at the final iterate
  int iterations = 0;
  bool converged = false;
};

/// Largest singular value of W2 . Op . W1^{-1} on Fourier coefficients,
/// W1 = phi(<xi>), W2 = <xi>^{-m} phi(<xi>), by power iteration on B^H B.
MappingNorm mapping_norm(const PdoOperator& op, const Weight& phi, Rng& rng, int max_iterations = 500,
                         double tolerance = 1e-12);

struct AScaleGenerator {
  Grid grid;
  Eigen::MatrixXd a;  // <D> + diag(v) (+ shift)
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  double shift = 0.0;
  double hermitian_defect = 0.0;  // ||A - A^T||_F before symmetrization
};

/// n = 1, N <= 1024. Shifts by 1 - lambda_min + 1e-6 when lambda_min < 1 - 1e-12.
AScaleGenerator build_ascale(const Grid& grid, const std::vector<double>& v);

/// ||phi(A) u||_{L2}
double ascale_norm(const AScaleGenerator& gen, const Weight& phi, const GridFunction& u);

struct RatioInterval {
  double c_low = 0.0;
  double c_high = 0.0;
  int trials = 0;
};

/// Extreme ratios ascale_norm / hphi_norm over band-limited trials.
RatioInterval ascale_equivalence(const AScaleGenerator& gen, const Weight& phi, int trials, int kmax,
                                 Rng& rng);

}  // namespace sobscale
