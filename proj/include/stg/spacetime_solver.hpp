#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "stg/spatial_fem.hpp"
#include "stg/temporal_mra.hpp"
#include "stg/wavelet_compression.hpp"

namespace stg {

class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history(std::move(history)) {}
  std::vector<double> history;
};

// ---------------------------------------------------------------------------
// Kronecker products through the vec identity

enum class KronOrder { TemporalFirst, SpatialFirst };

// Order of B X A^T by the size of the intermediate result: X A^T first when
// rows(A) * rows(X) <= cols(X) * rows(B).
KronOrder choose_kron_order(long a_rows, long x_rows, long x_cols, long b_rows);
// Multiply-add count of B X A^T for a given order.
double kron_flops(KronOrder order, const SpMat& A, const SpMat& B, long x_rows, long x_cols);
// B X A^T, the reshaped (A kron B) vec(X).
Eigen::MatrixXd kron_matvec(const SpMat& A, const SpMat& B, const Eigen::MatrixXd& X);

// ---------------------------------------------------------------------------
// Temporal matrices

// A_t and M_t of one wavelet basis on (0,T), stored on one common pattern.
struct TemporalOperators {
  std::shared_ptr<const WaveletBasis> basis;
  SupportTable supports;
  CsrMatrix A;
  CsrMatrix M;
  double horizon = 1.0;
};

// Compressed with the default parameters (union of the patterns of A_t and
// M_t), or dense when compress is false.
std::shared_ptr<const TemporalOperators> build_temporal_operators(int moments, int level,
                                                                  bool compress = true,
                                                                  double horizon = 1.0);

// YA(:, r - r0) += A(r, c) XA(:, c - c0) and YM(:, r - r0) += M(r, c) XM(:, c - c0)
// for rows r in [r0, r0 + nr) and columns c in [c0, c0 + nc), that is the
// products with the transposed blocks. All blocks have `rows` rows, A and M
// share one pattern, and YA may alias YM. A null output is skipped. Returns
// the number of multiply-adds.
double right_multiply_block(const CsrMatrix& A, const CsrMatrix& M, int r0, int nr, int c0, int nc,
                            const double* XA, const double* XM, int rows, double* YA, double* YM);

// ---------------------------------------------------------------------------
// Space-time system

enum class TensorMode { Full, Sparse };

struct TensorBlock {
  int spatial_level;
  int temporal_offset;  // into the multiscale temporal index
  int temporal_size;
  int spatial_size;
  long offset;  // into the coefficient vector; stored column-major
  long size() const { return long(spatial_size) * temporal_size; }
};

class BpxPreconditioner;

// Galerkin matrix A_t kron M_x + M_t kron A_x of the heat equation, on the
// full tensor space S_J^x (x) S_J^t or on the sparse tensor space
// sum_b S_{J-b}^x (x) W_b^t, where W_0 are the scaling functions of the
// coarsest temporal level and W_b, b >= 1, the wavelets of level j0 + b.
class SpaceTimeSystem {
 public:
  SpaceTimeSystem(TensorMode mode, int level, std::shared_ptr<const TemporalOperators> temporal,
                  int spatial_dim = 2);

  TensorMode mode() const { return mode_; }
  int level() const { return J_; }
  int spatial_dim() const { return dim_; }
  long size() const { return size_; }
  const std::vector<TensorBlock>& blocks() const { return blocks_; }
  const TemporalOperators& temporal() const { return *temporal_; }
  const FemMatrices& spatial(int level) const { return spatial_.at(level - 1); }

  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;

  // Right-hand side of a source f(x, t) = prod_k g(x_k) q(t).
  Eigen::VectorXd rhs_separable(const std::function<double(double)>& g,
                                const std::function<double(double)>& q) const;
  // Right-hand side of a general source f(x, t), x of length spatial_dim.
  Eigen::VectorXd rhs(const std::function<double(const double*, double)>& f) const;

  // Coefficients on the full tensor grid: nodal in space at level J and
  // single-scale (hats of level J) in time, as an N_x x N_t matrix.
  Eigen::MatrixXd to_single_scale(const Eigen::VectorXd& u) const;
  // Multiscale temporal coefficients on the full spatial grid of level J.
  Eigen::MatrixXd embed(const Eigen::VectorXd& u) const;
  // Transpose of embed restricted to the tensor space: the load vector of
  // the space for a load matrix given on the full grid.
  Eigen::VectorXd project(const Eigen::MatrixXd& full) const;

  // Multiply-adds spent in apply since construction.
  double flops() const { return flops_; }

 private:
  TensorMode mode_;
  int J_;
  int dim_;
  long size_ = 0;
  std::shared_ptr<const TemporalOperators> temporal_;
  std::vector<FemMatrices> spatial_;
  std::vector<SpMat> prolong_;  // prolong_[l-1]: level l -> l+1
  std::vector<TensorBlock> blocks_;
  mutable double flops_ = 0.0;

  friend class BpxPreconditioner;
  const SpMat& prolongation_from(int level) const { return prolong_.at(level - 1); }
};

// Dense A_t kron M_x + M_t kron A_x for small full systems.
Eigen::MatrixXd dense_kronecker_matrix(const SpaceTimeSystem& system);

// ---------------------------------------------------------------------------
// Multilevel preconditioner

struct BpxOptions {
  // Weight c of the temporal factor A_t + c h_l^{-2} M_t.
  double scale = 1.0;
  // Divide by the diagonal of the spatial mass matrix (L2-normalized hats).
  bool mass_scaling = true;
  // Replace the temporal solve by the identity.
  bool identity_temporal = false;
};

class BpxPreconditioner {
 public:
  BpxPreconditioner(const SpaceTimeSystem& system, BpxOptions options = {});

  Eigen::VectorXd apply(const Eigen::VectorXd& r) const;
  int factorizations() const { return int(factors_.size()); }

 private:
  const SpaceTimeSystem& system_;
  BpxOptions options_;
  std::vector<int> tau_;  // temporal level per spatial level
  std::map<int, std::shared_ptr<const SparseLU>> factors_;  // per spatial level
  std::vector<Eigen::VectorXd> mass_diag_;

  void temporal_solve(int level, Eigen::MatrixXd& R) const;
};

// ---------------------------------------------------------------------------
// GMRES

using LinearMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct GmresResult {
  Eigen::VectorXd x;
  int iterations = 0;
  std::vector<double> history;  // relative residual norms, history[0] = 1
};

// Right-preconditioned GMRES without restart, initial guess 0. Stops when
// the relative residual is at most tol.
GmresResult gmres_solve(const LinearMap& op, const LinearMap& preconditioner,
                        const Eigen::VectorXd& b, double tol = 1e-8, int max_iterations = 500);

// ---------------------------------------------------------------------------
// Error of the heat equation solution

// ||u - u_h||_{L2(Q)} on Q = (0,1)^dim x (0,T) for u(x,t) = prod_k g(x_k) w(t).
// The inner products with u use Gauss quadrature in space and time; the
// norm of u_h is exact.
double l2q_error_separable(const SpaceTimeSystem& system, const Eigen::VectorXd& u,
                           const std::function<double(double)>& g,
                           const std::function<double(double)>& w, double norm_u_squared);

// ---------------------------------------------------------------------------
// Condition numbers

struct ConditionEstimate {
  double value = 0.0;
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  bool converged = false;
};

// Spectral condition number of D^{-1/2} B D^{-1/2}, D = diag(B). Dense SVD up
// to dense_limit unknowns, otherwise Lanczos on the normal equations and
// their inverse (through a sparse LU).
ConditionEstimate diagonally_scaled_condition(const CsrMatrix& B, const SupportTable* supports,
                                              int dense_limit = 1024);

}  // namespace stg
