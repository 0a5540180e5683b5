#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace stg {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TemporalMesh {
  TemporalMesh(int level, double horizon);

  int cells() const { return 1 << level; }
  double h() const { return horizon / cells(); }
  double node(int k) const { return horizon * k / cells(); }

  int level;
  double horizon;
};

struct Rational {
  std::int64_t num;
  std::int64_t den;
  double value() const { return double(num) / double(den); }
};

// A piecewise linear function on (0,1) given by its coefficients with
// respect to the hats phi_{level,n}, n = first_node, first_node+1, ...
struct HatExpansion {
  int level = 0;
  int first_node = 1;
  std::vector<double> coeffs;

  int last_node() const { return first_node + int(coeffs.size()) - 1; }
};

// The restriction of a HatExpansion to one cell of its level.
struct CellPiece {
  int cell;      // cell [cell*h, (cell+1)*h]
  double left;   // value at the left end
  double right;  // value at the right end
};

std::vector<CellPiece> cell_pieces(const HatExpansion& f);

// Hat function phi_{level,node} on (0,1). The hat at node 2^level is a half
// hat since there is no condition at t = 1.
double evaluate_hat(int level, int node, double t);

int default_coarsest_level(int moments);
int minimal_coarsest_level(int moments);

// Piecewise linear wavelets on (0,1) with homogeneous condition at t = 0.
// Multiscale ordering: the 2^j0 hats of level j0, then for each level
// l = j0+1..J the 2^(l-1) wavelets of that level.
class WaveletBasis {
 public:
  struct Stencil {
    int first_node;
    std::vector<Rational> coeffs;
  };

  WaveletBasis(int moments, int level, int coarsest = 0);

  int moments() const { return moments_; }
  int coarsest() const { return j0_; }
  int finest() const { return J_; }
  int dim() const { return 1 << J_; }

  // Block of multiscale indices for a level; level j0 is the scaling block.
  int block_offset(int level) const;
  int block_size(int level) const;
  int level_of(int index) const;
  // 1-based position inside the level block.
  int local_index(int index) const { return index - block_offset(level_of(index)) + 1; }

  Stencil wavelet_stencil(int level, int k) const;
  HatExpansion expansion(int index) const;
  double evaluate(int index, double t) const;

  // Single-scale coefficients at the finest level of a multiscale vector.
  Eigen::VectorXd inverse_transform(const Eigen::VectorXd& c) const;
  Eigen::VectorXd forward_transform(const Eigen::VectorXd& v) const;
  // Transpose of inverse_transform; maps single-scale load vectors to
  // multiscale load vectors.
  Eigen::VectorXd inverse_transform_transpose(const Eigen::VectorXd& v) const;
  // Matrix of inverse_transform (columns are the multiscale functions).
  Eigen::SparseMatrix<double> transform_matrix() const;

  // ||f_i||_{L2(0,1)} of every multiscale function.
  const Eigen::VectorXd& l2_norms() const { return l2_norms_; }

 private:
  int moments_;
  int J_;
  int j0_;
  Eigen::VectorXd l2_norms_;
  std::vector<Eigen::SparseMatrix<double>> two_scale_;
  std::vector<std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>>> two_scale_lu_;

  void refine_add(const double* coarse, int coarse_level, double* fine) const;
  void refine_transpose(const double* fine, int coarse_level, double* coarse) const;
};

// Exact L2 Gram matrix of the hats of one level on (0,1).
Eigen::SparseMatrix<double> hat_gram(int level);

}  // namespace stg
