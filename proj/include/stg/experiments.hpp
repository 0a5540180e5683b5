#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stg/spacetime_solver.hpp"

namespace stg {

// rate_j = log2(e_{j-1} / e_j); the first entry is NaN.
std::vector<double> rates(const std::vector<double>& errors);

// ---------------------------------------------------------------------------
// u' + mu u = f on (0,T), u(0) = 0, u(t) = -2 sin(3 pi t / 4) + sin(9 pi t / 4)

struct OdeConfig {
  int moments = 2;
  int level_min = 4;
  int level_max = 10;
  double mu = 10.0;
  double horizon = 2.0;
  bool compress = true;
  // Overrides of the default compression parameters of A_t.
  std::optional<double> a;
  std::optional<double> delta;
  long hhalf_terms = 10000;
};

struct OdeRow {
  int level = 0;
  int n = 0;
  std::size_t nnz = 0;
  double nnz_percent = 0.0;
  double l2 = 0.0;
  double h1 = 0.0;
  double hhalf = 0.0;         // spectral norm of H^{1/2}_{0,}(0,T)
  double hhalf_tail = 0.0;    // estimated truncation remainder
  double hhalf_interp = 0.0;  // sqrt(L2 * H1)
  double rate_l2 = 0.0, rate_h1 = 0.0, rate_hhalf = 0.0, rate_hhalf_interp = 0.0;
  double residual = 0.0;      // ||B x - b|| / ||b||
  double fill = 0.0;          // (nnz(L) + nnz(U)) / nnz(B)
  double seconds = 0.0;
};

double ode_exact(double t);
double ode_exact_derivative(double t);
// <u, V_m>_{L2(0,T)} in closed form.
double ode_exact_sine_coefficient(long m, double horizon);

std::vector<OdeRow> run_ode1d(const OdeConfig& config);

// ---------------------------------------------------------------------------
// Condition numbers of the diagonally scaled A_t + mu T M_t

struct CondConfig {
  std::vector<double> mus{1.0, 10.0, 100.0};
  int level_min = 3;
  int level_max = 12;
  int moments = 2;
  double horizon = 2.0;
  int coarsest = 0;  // 0: minimal coarsest level of the basis
  int dense_limit = 1024;
};

struct CondRow {
  int level = 0;
  int dof = 0;
  std::vector<double> cond;  // NaN when the estimate did not converge
};

std::vector<CondRow> run_cond(const CondConfig& config);

// ---------------------------------------------------------------------------
// Heat equation on (0,1)^2 x (0,1) with u = sin(2 pi x1) sin(2 pi x2) sin t

struct HeatConfig {
  TensorMode mode = TensorMode::Full;
  int level_min = 4;
  int level_max = 7;
  double tol = 1e-8;
  int max_iterations = 500;
  // Weight of the BPX temporal factor; by default 1 (full) and 6 (sparse).
  std::optional<double> bpx_scale;
};

struct HeatRow {
  int level = 0;
  int nt = 0;
  long nx_interior = 0;
  long nx = 0;  // including boundary nodes
  long dofs = 0;
  int iterations = 0;
  bool converged = false;
  double error = 0.0;
  double rate = 0.0;
  double flops = 0.0;  // multiply-adds of the operator applications
  double seconds = 0.0;
  std::vector<double> history;
};

double heat_bpx_scale(TensorMode mode);
std::vector<HeatRow> run_heat2d(const HeatConfig& config);

// ---------------------------------------------------------------------------
// CSV output: `#` metadata lines, one header line, one line per row.

std::string git_revision();
void write_csv(std::ostream& out, const OdeConfig& config, const std::vector<OdeRow>& rows);
void write_csv(std::ostream& out, const CondConfig& config, const std::vector<CondRow>& rows);
void write_csv(std::ostream& out, const HeatConfig& config, const std::vector<HeatRow>& rows);
// One line per GMRES iteration and level.
void write_history_csv(std::ostream& out, const std::vector<HeatRow>& rows);

}  // namespace stg
