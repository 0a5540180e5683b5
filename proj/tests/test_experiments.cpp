#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "stg/experiments.hpp"
#include "stg/quadrature.hpp"

using namespace stg;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

}  // namespace

TEST_CASE("convergence rates") {
  const auto r = rates({4.0, 1.0, 0.25});
  CHECK(std::isnan(r[0]));
  CHECK(r[1] == doctest::Approx(2.0));
  CHECK(r[2] == doctest::Approx(2.0));
  CHECK(rates({3.0, 3.0})[1] == 0.0);
  // reference L2 errors for two vanishing moments, j = 4..8
  const auto p = rates({3.28e-2, 7.64e-3, 1.87e-3, 4.67e-4, 1.17e-4});
  CHECK(p[1] == doctest::Approx(2.10).epsilon(0.005));
  CHECK(p[2] == doctest::Approx(2.03).epsilon(0.005));
  CHECK(p[3] == doctest::Approx(2.01).epsilon(0.005));
  CHECK(p[4] == doctest::Approx(2.00).epsilon(0.005));
}

TEST_CASE("exact solution of the ODE") {
  CHECK(ode_exact(0.0) == 0.0);
  // derivative against central differences
  for (double t : {0.3, 1.1, 1.7}) {
    const double h = 1e-5;
    CHECK(ode_exact_derivative(t) == doctest::Approx((ode_exact(t + h) - ode_exact(t - h)) / (2 * h)).epsilon(1e-8));
  }
  // sine coefficients against quadrature, V_m(t) = sqrt(2 / T) sin((m + 1/2) pi t / T)
  const double T = 2.0, pi = 3.14159265358979323846;
  const auto& rule = gauss_legendre(20);
  for (long m : {0L, 1L, 2L, 7L}) {
    double s = 0.0;
    for (int c = 0; c < 64; ++c)
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double t = (c + rule.nodes[q]) * T / 64;
        s += rule.weights[q] * T / 64 * ode_exact(t) * std::sqrt(2.0 / T) * std::sin((m + 0.5) * pi * t / T);
      }
    CAPTURE(m);
    CHECK(ode_exact_sine_coefficient(m, T) == doctest::Approx(s).epsilon(1e-10));
  }
}

TEST_CASE("ODE experiment") {
  SUBCASE("reference values at j = 10") {
    OdeConfig c;
    c.level_min = c.level_max = 10;
    const auto rows = run_ode1d(c);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].n == 1024);
    CHECK(rows[0].l2 == doctest::Approx(7.28e-6).epsilon(0.05));
    CHECK(rows[0].h1 == doctest::Approx(2.89e-2).epsilon(0.05));
    CHECK(rows[0].residual < 1e-10);
    CHECK(rows[0].nnz_percent < 100.0);
  }
  SUBCASE("second order in L2 without reaction") {
    OdeConfig c;
    c.mu = 0.0;
    c.level_min = 6;
    c.level_max = 8;
    c.hhalf_terms = 1000;
    const auto rows = run_ode1d(c);
    CHECK(rows[2].rate_l2 == doctest::Approx(2.0).epsilon(0.05));
    CHECK(rows[2].rate_h1 == doctest::Approx(1.0).epsilon(0.05));
  }
  SUBCASE("invalid configurations") {
    OdeConfig c;
    c.moments = 3;
    CHECK_THROWS(run_ode1d(c));
    c.moments = 2;
    c.level_min = 8;
    c.level_max = 7;
    CHECK_THROWS(run_ode1d(c));
  }
}

TEST_CASE("condition number sweep") {
  CondConfig c;
  c.mus = {10.0};
  c.level_min = 3;
  c.level_max = 8;
  const auto rows = run_cond(c);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].dof == 8);
  CHECK(rows[0].cond[0] == doctest::Approx(4.2814).epsilon(0.01));
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].cond[0] >= rows[i - 1].cond[0]);
}

TEST_CASE("heat experiment") {
  HeatConfig full;
  full.level_min = 4;
  full.level_max = 5;
  HeatConfig sparse = full;
  sparse.mode = TensorMode::Sparse;
  const auto a = run_heat2d(full), b = run_heat2d(sparse);
  REQUIRE(a.size() == 2);
  CHECK(a[0].nx == 289);
  CHECK(a[1].nx == 1089);
  CHECK(a[0].nx_interior == 225);
  CHECK(a[0].nt == 16);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a[i].converged);
    CHECK(b[i].converged);
    CHECK(b[i].error / a[i].error == doctest::Approx(1.0).epsilon(0.1));
    CHECK(b[i].dofs <= a[i].dofs);
  }
  CHECK(a[1].rate == doctest::Approx(2.0).epsilon(0.05));
  CHECK(heat_bpx_scale(TensorMode::Full) == 1.0);
  CHECK(heat_bpx_scale(TensorMode::Sparse) == 6.0);
}

TEST_CASE("CSV output") {
  SUBCASE("ODE") {
    OdeConfig c;
    c.level_min = 4;
    c.level_max = 5;
    c.hhalf_terms = 500;
    std::ostringstream out;
    write_csv(out, c, run_ode1d(c));
    const auto lines = lines_of(out.str());
    REQUIRE(lines.size() == 7);
    CHECK(lines[0] == "# schema: stg-ode1d/1");
    CHECK(starts_with(lines[1], "# git: "));
    CHECK(starts_with(lines[2], "# config: moments=2 levels=4..5"));
    CHECK(starts_with(lines[3], "# compression: a="));
    CHECK(starts_with(lines[4], "j,N,nnz,nnz_percent,L2"));
    CHECK(starts_with(lines[5], "4,16,"));
    CHECK(starts_with(lines[6], "5,32,"));
  }
  SUBCASE("dense ODE") {
    OdeConfig c;
    c.compress = false;
    c.level_min = c.level_max = 4;
    c.hhalf_terms = 100;
    std::ostringstream out;
    write_csv(out, c, run_ode1d(c));
    CHECK(lines_of(out.str())[3] == "# compression: dense");
  }
  SUBCASE("condition numbers") {
    CondConfig c;
    c.level_min = 3;
    c.level_max = 4;
    std::ostringstream out;
    write_csv(out, c, run_cond(c));
    const auto lines = lines_of(out.str());
    REQUIRE(lines.size() == 7);
    CHECK(lines[0] == "# schema: stg-cond/1");
    CHECK(lines[4] == "dof,cond_mu1,cond_mu10,cond_mu100");
    CHECK(starts_with(lines[5], "8,"));
  }
  SUBCASE("heat and history") {
    HeatConfig c;
    c.level_min = c.level_max = 4;
    const auto rows = run_heat2d(c);
    std::ostringstream out, hist;
    write_csv(out, c, rows);
    write_history_csv(hist, rows);
    const auto lines = lines_of(out.str());
    REQUIRE(lines.size() == 6);
    CHECK(lines[0] == "# schema: stg-heat2d/1");
    CHECK(starts_with(lines[5], "full,4,16,289,225,"));
    const auto h = lines_of(hist.str());
    CHECK(h.size() == rows[0].history.size() + 2);
    CHECK(h[2] == "4,0,1");
  }
}
