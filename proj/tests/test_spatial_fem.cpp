#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "stg/spatial_fem.hpp"

using namespace stg;

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXd random_vector(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(gen);
  return v;
}

// Smallest generalized eigenvalue of the 2D Q1 pair (A, M): twice the 1D
// value of the sine mode, (12 / h^2) sin^2(pi h / 2) / (2 + cos(pi h)).
double q1_smallest_eigenvalue(double h) {
  const double s = std::sin(0.5 * kPi * h);
  return 2.0 * 12.0 / (h * h) * s * s / (2.0 + std::cos(kPi * h));
}

}  // namespace

TEST_CASE("grid sizes") {
  CHECK(SpatialGrid(4).size() == 225);
  CHECK(SpatialGrid(4, 1).size() == 15);
  CHECK(SpatialGrid(4).h() == 1.0 / 16);
  CHECK_THROWS(SpatialGrid(0));
  CHECK_THROWS(SpatialGrid(3, 3));
}

TEST_CASE("one interior node in 1D") {
  const FemMatrices m = assemble_spatial(SpatialGrid(1, 1));
  CHECK(m.A.coeff(0, 0) == doctest::Approx(4.0));
  CHECK(m.M.coeff(0, 0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("symmetry, positivity and row sums") {
  for (int dim : {1, 2})
    for (int level = 1; level <= 5; ++level) {
      const SpatialGrid g(level, dim);
      const FemMatrices m = assemble_spatial(g);
      const Eigen::MatrixXd A(m.A), M(m.M);
      CHECK((A - A.transpose()).norm() == 0.0);
      CHECK((M - M.transpose()).norm() == 0.0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(A, Eigen::EigenvaluesOnly), em(M, Eigen::EigenvaluesOnly);
      CHECK(ea.eigenvalues().minCoeff() > 0.0);
      CHECK(em.eigenvalues().minCoeff() > 0.0);
      if (dim == 2 && level >= 3) {
        // interior node away from the boundary
        const int n = g.nodes_per_direction(), i = n / 2 + n * (n / 2);
        CHECK(std::abs(A.row(i).sum()) < 1e-12);
      }
    }
}

TEST_CASE("smallest eigenvalue approaches 2 pi^2") {
  const SpatialGrid g(4);
  const FemMatrices m = assemble_spatial(g);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(m.A), Eigen::MatrixXd(m.M),
                                                                Eigen::EigenvaluesOnly);
  CHECK(eig.eigenvalues().minCoeff() == doctest::Approx(q1_smallest_eigenvalue(g.h())).epsilon(1e-10));

  // inverse iteration at a finer level
  const SpatialGrid g7(7);
  const FemMatrices m7 = assemble_spatial(g7);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(Eigen::SparseMatrix<double>(m7.A));
  Eigen::VectorXd x = Eigen::VectorXd::Ones(g7.size());
  double lambda = 0.0;
  for (int it = 0; it < 60; ++it) {
    x = solver.solve(Eigen::VectorXd(m7.M * x));
    x /= std::sqrt(x.dot(m7.M * x));
    lambda = x.dot(m7.A * x);
  }
  CHECK(lambda == doctest::Approx(q1_smallest_eigenvalue(g7.h())).epsilon(1e-8));
  CHECK(lambda == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-3));
}

TEST_CASE("energy of the interpolant of the manufactured solution") {
  auto u = [](const double* x) { return std::sin(2 * kPi * x[0]) * std::sin(2 * kPi * x[1]); };
  double prev = 0.0;
  for (int level = 4; level <= 8; ++level) {
    const SpatialGrid g(level);
    const FemMatrices m = assemble_spatial(g);
    const Eigen::VectorXd v = interpolate(g, u);
    const double energy = v.dot(m.A * v);
    if (level == 8) CHECK(energy == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-3));
    if (prev > 0.0) CHECK(std::abs(energy - 2.0 * kPi * kPi) < std::abs(prev - 2.0 * kPi * kPi));
    prev = energy;
  }
}

TEST_CASE("transfer operators") {
  for (int dim : {1, 2}) {
    CAPTURE(dim);
    SUBCASE("constants are reproduced away from the boundary") {
      const int level = 3;
      const SpatialGrid coarse(level, dim), fine(level + 1, dim);
      const Eigen::VectorXd w = prolongate(Eigen::VectorXd::Ones(coarse.size()), level, dim);
      const int n = fine.nodes_per_direction();
      for (int i = 0; i < fine.size(); ++i) {
        const int i1 = i % n + 1, i2 = dim == 2 ? i / n + 1 : 2;
        if (i1 >= 2 && i1 <= n - 1 && i2 >= 2 && i2 <= n - 1) CHECK(w[i] == doctest::Approx(1.0));
      }
    }
    SUBCASE("restriction is the transpose") {
      for (int level = 1; level <= 4; ++level) {
        const int nc = SpatialGrid(level, dim).size(), nf = SpatialGrid(level + 1, dim).size();
        const Eigen::VectorXd v = random_vector(nc, level), w = random_vector(nf, 10 + level);
        CHECK(restrict_to(w, level, dim).dot(v) == doctest::Approx(w.dot(prolongate(v, level, dim))));
      }
    }
    SUBCASE("Galerkin identity") {
      for (int level = 1; level <= 5; ++level) {
        const SpMat P = prolongation(level, dim);
        const FemMatrices c = assemble_spatial(SpatialGrid(level, dim));
        const FemMatrices f = assemble_spatial(SpatialGrid(level + 1, dim));
        const Eigen::MatrixXd ga = Eigen::MatrixXd(P.transpose() * f.A * P) - Eigen::MatrixXd(c.A);
        const Eigen::MatrixXd gm = Eigen::MatrixXd(P.transpose() * f.M * P) - Eigen::MatrixXd(c.M);
        CHECK(ga.cwiseAbs().maxCoeff() < 1e-12);
        CHECK(gm.cwiseAbs().maxCoeff() < 1e-12);
      }
    }
    SUBCASE("composite transfers") {
      const Eigen::MatrixXd X = Eigen::MatrixXd::Random(SpatialGrid(2, dim).size(), 3);
      Eigen::MatrixXd step = X;
      for (int l = 2; l < 5; ++l) step = prolongation(l, dim) * step;
      CHECK((prolongate_columns(X, 2, 5, dim) - step).norm() < 1e-13);
      const Eigen::MatrixXd Y = Eigen::MatrixXd::Random(SpatialGrid(5, dim).size(), 2);
      Eigen::MatrixXd down = Y;
      for (int l = 4; l >= 2; --l) down = prolongation(l, dim).transpose() * down;
      CHECK((restrict_columns(Y, 5, 2, dim) - down).norm() < 1e-12);
      CHECK((prolongate_columns(X, 2, 2, dim) - X).norm() == 0.0);
    }
    SUBCASE("dimension errors") {
      CHECK_THROWS(prolongate(Eigen::VectorXd::Zero(5), 3, dim));
    }
  }
}

TEST_CASE("discrete maximum principle") {
  for (int level = 2; level <= 6; ++level) {
    const SpatialGrid g(level);
    const FemMatrices m = assemble_spatial(g);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(Eigen::SparseMatrix<double>(m.A));
    const Eigen::VectorXd u = solver.solve(Eigen::VectorXd(m.M * Eigen::VectorXd::Ones(g.size())));
    CHECK(u.minCoeff() > 0.0);
  }
}

TEST_CASE("load vectors") {
  SUBCASE("a function of the finite element space") {
    // min(x, 1 - x) is piecewise linear on every grid
    auto tent = [](const double* x) { return std::min(x[0], 1.0 - x[0]); };
    const SpatialGrid g(4, 1);
    const FemMatrices m = assemble_spatial(g);
    CHECK((load_vector(g, tent) - m.M * interpolate(g, tent)).norm() < 1e-14);
    const SpatialGrid g2(3);
    auto tent2 = [&](const double* x) { return tent(x) * tent(x + 1); };
    CHECK((load_vector(g2, tent2) - assemble_spatial(g2).M * interpolate(g2, tent2)).norm() < 1e-14);
  }
  SUBCASE("separable and general paths agree") {
    auto g1 = [](double x) { return std::sin(2 * kPi * x) + x * x; };
    const SpatialGrid g(5);
    const Eigen::VectorXd a = load_vector(g, [&](const double* x) { return g1(x[0]) * g1(x[1]); });
    CHECK((load_vector_separable(g, g1) - a).norm() < 1e-13 * a.norm());
  }
  SUBCASE("coefficient scales the stiffness only") {
    const SpatialGrid g(3);
    const FemMatrices a = assemble_spatial(g), b = assemble_spatial(g, 2.5);
    CHECK(Eigen::MatrixXd(b.A - 2.5 * a.A).norm() < 1e-12);
    CHECK(Eigen::MatrixXd(b.M - a.M).norm() == 0.0);
  }
}
