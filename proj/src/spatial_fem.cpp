#include "stg/spatial_fem.hpp"

#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

#include "stg/quadrature.hpp"
#include "stg/temporal_mra.hpp"

namespace stg {

namespace {

SpMat tridiag(int n, double diag, double off) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < n; ++i) {
    trip.emplace_back(i, i, diag);
    if (i + 1 < n) {
      trip.emplace_back(i, i + 1, off);
      trip.emplace_back(i + 1, i, off);
    }
  }
  SpMat m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SpMat prolongation_1d(int level) {
  const int nc = (1 << level) - 1, nf = (1 << (level + 1)) - 1;
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < nc; ++i) {
    // coarse node i+1 sits at fine node 2(i+1)
    const int f = 2 * (i + 1) - 1;
    trip.emplace_back(f, i, 1.0);
    trip.emplace_back(f - 1, i, 0.5);
    trip.emplace_back(f + 1, i, 0.5);
  }
  SpMat p(nf, nc);
  p.setFromTriplets(trip.begin(), trip.end());
  return p;
}

SpMat kron(const SpMat& a, const SpMat& b) {
  SpMat k = Eigen::kroneckerProduct(a, b).eval();
  k.makeCompressed();
  return k;
}

void check_dim(int dim) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("spatial dimension must be 1 or 2");
}

}  // namespace

SpatialGrid::SpatialGrid(int level_, int dim_) : level(level_), dim(dim_) {
  if (level < 1) throw std::invalid_argument("spatial level must be at least 1");
  check_dim(dim);
}

int SpatialGrid::size() const {
  const int n = nodes_per_direction();
  return dim == 1 ? n : n * n;
}

FemMatrices assemble_spatial(const SpatialGrid& grid, double coefficient) {
  const int n = grid.nodes_per_direction();
  const double h = grid.h();
  SpMat m1 = tridiag(n, 4.0 * h / 6.0, h / 6.0);
  SpMat a1 = tridiag(n, 2.0 / h, -1.0 / h);
  FemMatrices out;
  if (grid.dim == 1) {
    out.M = m1;
    out.A = coefficient * a1;
  } else {
    out.M = kron(m1, m1);
    out.A = coefficient * (kron(m1, a1) + kron(a1, m1));
  }
  out.M.makeCompressed();
  out.A.makeCompressed();
  return out;
}

SpMat prolongation(int level, int dim) {
  check_dim(dim);
  SpMat p1 = prolongation_1d(level);
  return dim == 1 ? p1 : kron(p1, p1);
}

Eigen::VectorXd prolongate(const Eigen::VectorXd& v, int level, int dim) {
  SpMat p = prolongation(level, dim);
  if (v.size() != p.cols()) throw DimensionError("vector does not match the coarse grid");
  return p * v;
}

Eigen::VectorXd restrict_to(const Eigen::VectorXd& w, int level, int dim) {
  SpMat p = prolongation(level, dim);
  if (w.size() != p.rows()) throw DimensionError("vector does not match the fine grid");
  return p.transpose() * w;
}

Eigen::MatrixXd prolongate_columns(const Eigen::MatrixXd& X, int coarse, int fine, int dim) {
  if (X.rows() != SpatialGrid(coarse, dim).size())
    throw DimensionError("block does not match the coarse grid");
  Eigen::MatrixXd y = X;
  for (int l = coarse; l < fine; ++l) y = prolongation(l, dim) * y;
  return y;
}

Eigen::MatrixXd restrict_columns(const Eigen::MatrixXd& X, int fine, int coarse, int dim) {
  if (X.rows() != SpatialGrid(fine, dim).size())
    throw DimensionError("block does not match the fine grid");
  Eigen::MatrixXd y = X;
  for (int l = fine - 1; l >= coarse; --l) y = prolongation(l, dim).transpose() * y;
  return y;
}

Eigen::VectorXd interpolate(const SpatialGrid& grid,
                            const std::function<double(const double*)>& f) {
  const int n = grid.nodes_per_direction();
  const double h = grid.h();
  Eigen::VectorXd v(grid.size());
  double x[2];
  if (grid.dim == 1) {
    for (int i = 0; i < n; ++i) {
      x[0] = (i + 1) * h;
      v[i] = f(x);
    }
  } else {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        x[0] = (i + 1) * h;
        x[1] = (j + 1) * h;
        v[i + n * j] = f(x);
      }
  }
  return v;
}

Eigen::VectorXd load_vector(const SpatialGrid& grid,
                            const std::function<double(const double*)>& g, int points) {
  const QuadratureRule& q = gauss_legendre(points);
  const int cells = 1 << grid.level;
  const int n = grid.nodes_per_direction();
  const double h = grid.h();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(grid.size());
  double x[2];
  if (grid.dim == 1) {
    for (int c = 0; c < cells; ++c)
      for (std::size_t k = 0; k < q.nodes.size(); ++k) {
        const double s = q.nodes[k];
        x[0] = (c + s) * h;
        const double w = q.weights[k] * h * g(x);
        if (c >= 1) b[c - 1] += w * (1.0 - s);
        if (c < n) b[c] += w * s;
      }
    return b;
  }
  for (int cy = 0; cy < cells; ++cy)
    for (int cx = 0; cx < cells; ++cx)
      for (std::size_t ky = 0; ky < q.nodes.size(); ++ky)
        for (std::size_t kx = 0; kx < q.nodes.size(); ++kx) {
          const double sx = q.nodes[kx], sy = q.nodes[ky];
          x[0] = (cx + sx) * h;
          x[1] = (cy + sy) * h;
          const double w = q.weights[kx] * q.weights[ky] * h * h * g(x);
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
              const int i = cx + dx - 1, j = cy + dy - 1;
              if (i < 0 || j < 0 || i >= n || j >= n) continue;
              b[i + n * j] += w * (dx ? sx : 1.0 - sx) * (dy ? sy : 1.0 - sy);
            }
        }
  return b;
}

Eigen::VectorXd load_vector_separable(const SpatialGrid& grid,
                                      const std::function<double(double)>& g1, int points) {
  SpatialGrid line(grid.level, 1);
  Eigen::VectorXd b1 = load_vector(line, [&](const double* x) { return g1(x[0]); }, points);
  if (grid.dim == 1) return b1;
  const int n = grid.nodes_per_direction();
  Eigen::VectorXd b(grid.size());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) b[i + n * j] = b1[i] * b1[j];
  return b;
}

}  // namespace stg
