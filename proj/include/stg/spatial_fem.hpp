#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace stg {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Uniform grid of 2^level cells per direction on (0,1)^dim with homogeneous
// Dirichlet conditions. Interior node (i_1, ..., i_dim), i_k = 1..2^level-1,
// has index (i_1 - 1) + n (i_2 - 1) + ... with n = 2^level - 1.
struct SpatialGrid {
  SpatialGrid(int level, int dim = 2);

  int nodes_per_direction() const { return (1 << level) - 1; }
  int size() const;
  double h() const { return 1.0 / double(1 << level); }

  int level;
  int dim;
};

struct FemMatrices {
  SpMat M;  // mass
  SpMat A;  // stiffness of -div(c grad)
};

// Q1 mass and stiffness matrices on interior nodes.
FemMatrices assemble_spatial(const SpatialGrid& grid, double coefficient = 1.0);

// Bilinear interpolation from `level` to `level + 1`; restriction is the
// transpose.
SpMat prolongation(int level, int dim = 2);

Eigen::VectorXd prolongate(const Eigen::VectorXd& v, int level, int dim = 2);
Eigen::VectorXd restrict_to(const Eigen::VectorXd& w, int level, int dim = 2);

// Composite transfers between arbitrary levels coarse <= fine, applied to
// every column of X.
Eigen::MatrixXd prolongate_columns(const Eigen::MatrixXd& X, int coarse, int fine, int dim = 2);
Eigen::MatrixXd restrict_columns(const Eigen::MatrixXd& X, int fine, int coarse, int dim = 2);

// Nodal interpolant.
Eigen::VectorXd interpolate(const SpatialGrid& grid,
                            const std::function<double(const double*)>& f);

// <g, phi_i> by Gauss quadrature on every cell.
Eigen::VectorXd load_vector(const SpatialGrid& grid,
                            const std::function<double(const double*)>& g, int points = 5);

// <g, phi_i> for a product g(x) = prod_k g1(x_k).
Eigen::VectorXd load_vector_separable(const SpatialGrid& grid,
                                      const std::function<double(double)>& g1, int points = 5);

}  // namespace stg
