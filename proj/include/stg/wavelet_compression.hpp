#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "stg/hilbert_kernel.hpp"
#include "stg/temporal_mra.hpp"

namespace stg {

class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CompressionParams {
  double a = 1.25;
  double delta = 2.5;
  double q = 0.5;
  int d = 2;
  int dtilde = 2;
  int finest = 0;

  // delta at the midpoint of (d, dtilde + 2q).
  static CompressionParams defaults(int dtilde, double q, int finest);
  bool window_ok() const { return a > 1.0 && d < delta && delta < dtilde + 2.0 * q; }
};

struct Cutoffs {
  double B;
  double Bs;
};

Cutoffs cutoff_parameters(const CompressionParams& p, int l, int lp);

// Supports and singular supports (knots) of the multiscale functions on (0,1).
struct SupportTable {
  std::vector<int> level;
  std::vector<double> lo, hi;
  std::vector<std::vector<double>> knots;

  int size() const { return int(level.size()); }
};

SupportTable build_supports(const WaveletBasis& basis);

double interval_distance(double a0, double a1, double b0, double b1);
double points_interval_distance(const std::vector<double>& pts, double b0, double b1);

struct SparsityPattern {
  int n = 0;
  std::vector<int> rowptr{0};
  std::vector<int> cols;  // sorted within each row

  std::size_t nnz() const { return cols.size(); }
  bool contains(int r, int c) const;
};

// Positions kept by the first and second compression. Rows and columns of the
// coarsest scaling block (no vanishing moments) are kept in full.
SparsityPattern build_pattern(const CompressionParams& p, const SupportTable& s,
                              int coarsest_level);
SparsityPattern full_pattern(int n);
SparsityPattern pattern_union(const SparsityPattern& a, const SparsityPattern& b);

struct CsrMatrix {
  int n = 0;
  std::vector<int> rowptr{0};
  std::vector<int> col;
  std::vector<double> val;

  std::size_t nnz() const { return col.size(); }
  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd dense() const;
  SparsityPattern pattern() const;
};

CsrMatrix assemble_compressed(const WaveletBasis& basis, TemporalKind kind,
                              const SparsityPattern& pattern,
                              TemporalAssembler* assembler = nullptr);
// alpha*A + beta*B on the union of both patterns.
CsrMatrix combine(const CsrMatrix& a, double alpha, const CsrMatrix& b, double beta);
CsrMatrix leading_block(const CsrMatrix& a, int n);
CsrMatrix from_dense(const Eigen::MatrixXd& a, double drop = 0.0);

// Fill-reducing order by recursive bisection of (0,1). Functions centred on
// either side of a cut are eliminated before a vertex separator of the cut
// edges. Pieces of at most leaf_size functions, and every separator, are
// ordered by minimum degree subject to the dissection order.
std::vector<int> nested_dissection_order(const SparsityPattern& pattern,
                                         const SupportTable& supports, int leaf_size = 128);

// LU factorization without pivoting of P A P^T, restricted to the symbolic
// fill of the elimination (left-looking).
class SparseLU {
 public:
  SparseLU() = default;
  SparseLU(const CsrMatrix& a, std::vector<int> perm = {});

  int size() const { return n_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::VectorXd solve_transpose(const Eigen::VectorXd& b) const;
  // W (rows x n, column-major, leading dimension ld) is overwritten with
  // W X^{-T}, i.e. every row of W is replaced by the solution for that row.
  void solve_rows(double* w, int rows, int ld) const;

  std::size_t nnz_L() const { return Li_.size() - std::size_t(n_); }  // strictly lower
  std::size_t nnz_U() const { return Ui_.size(); }
  const std::vector<int>& permutation() const { return perm_; }
  // max |(P A P^T - L U)_{ij}|, dense; for tests on small matrices.
  double reconstruction_error(const CsrMatrix& a) const;

 private:
  int n_ = 0;
  std::vector<int> perm_;
  std::vector<int> Lp_, Li_;
  std::vector<double> Lx_;
  std::vector<int> Up_, Ui_;
  std::vector<double> Ux_;
};

}  // namespace stg
