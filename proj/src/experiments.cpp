#include "stg/experiments.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#ifndef STG_GIT_REVISION
#define STG_GIT_REVISION "unknown"
#endif

namespace stg {

namespace {

constexpr double kPi = 3.14159265358979323846;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// sin(x T) / x, continued by T at x = 0.
double sinc_integral(double x, double T) {
  if (std::abs(x) < 1e-12) return T;
  return std::sin(x * T) / x;
}

// int_0^T sin(alpha t) sin(kappa t) dt
double sine_product_integral(double alpha, double kappa, double T) {
  return 0.5 * (sinc_integral(alpha - kappa, T) - sinc_integral(alpha + kappa, T));
}

std::string format_number(double v, int digits = 6) {
  if (std::isnan(v)) return "";
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

std::string format_rate(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v;
  return s.str();
}

// Heat source: f = g(x1) g(x2) q(t) with g = sin(2 pi x).
double heat_g(double x) { return std::sin(2.0 * kPi * x); }
double heat_q(double t) { return std::cos(t) + 8.0 * kPi * kPi * std::sin(t); }
double heat_w(double t) { return std::sin(t); }

}  // namespace

std::vector<double> rates(const std::vector<double>& errors) {
  std::vector<double> r(errors.size(), kNaN);
  for (std::size_t i = 1; i < errors.size(); ++i) r[i] = std::log2(errors[i - 1] / errors[i]);
  return r;
}

// ---------------------------------------------------------------------------

double ode_exact(double t) {
  return -2.0 * std::sin(0.75 * kPi * t) + std::sin(2.25 * kPi * t);
}

double ode_exact_derivative(double t) {
  return -1.5 * kPi * std::cos(0.75 * kPi * t) + 2.25 * kPi * std::cos(2.25 * kPi * t);
}

double ode_exact_sine_coefficient(long m, double horizon) {
  const double kappa = kPi * (0.5 + double(m)) / horizon;
  const double s = -2.0 * sine_product_integral(0.75 * kPi, kappa, horizon) +
                   sine_product_integral(2.25 * kPi, kappa, horizon);
  return std::sqrt(2.0 / horizon) * s;
}

std::vector<OdeRow> run_ode1d(const OdeConfig& config) {
  if (config.moments != 2 && config.moments != 4)
    throw ConfigurationError("ode1d supports 2 or 4 vanishing moments");
  if (config.level_min < minimal_coarsest_level(config.moments) + 1 ||
      config.level_max < config.level_min)
    throw ConfigurationError("invalid level range");
  const double T = config.horizon, mu = config.mu;
  auto f = [&](double t) { return ode_exact_derivative(t) + mu * ode_exact(t); };

  std::vector<OdeRow> rows;
  for (int j = config.level_min; j <= config.level_max; ++j) {
    const auto t0 = std::chrono::steady_clock::now();
    const int j0 = std::min(default_coarsest_level(config.moments), j - 1);
    WaveletBasis basis(config.moments, j, j0);
    const int n = basis.dim();
    SparsityPattern pattern_a, pattern_m;
    if (config.compress) {
      const SupportTable supports = build_supports(basis);
      auto pa = CompressionParams::defaults(config.moments, 0.5, j);
      if (config.a) pa.a = *config.a;
      if (config.delta) pa.delta = *config.delta;
      if (!pa.window_ok()) throw ConfigurationError("compression parameters outside the admissible window");
      pattern_a = build_pattern(pa, supports, basis.coarsest());
      pattern_m = pattern_a;
      if (config.moments == 4) {
        auto pm = CompressionParams::defaults(config.moments, 0.0, j);
        if (config.a) pm.a = *config.a;
        pattern_m = build_pattern(pm, supports, basis.coarsest());
      }
    } else {
      pattern_a = pattern_m = full_pattern(n);
    }
    TemporalAssembler assembler;
    const CsrMatrix A = assemble_compressed(basis, TemporalKind::Stiffness, pattern_a, &assembler);
    const CsrMatrix M = assemble_compressed(basis, TemporalKind::Mass, pattern_m, &assembler);
    const CsrMatrix B = combine(A, 1.0, M, mu * T);
    const Eigen::VectorXd b = basis.inverse_transform_transpose(hilbert_load_vector(j, f, T));

    const SupportTable supports = build_supports(basis);
    const SparseLU lu(B, nested_dissection_order(B.pattern(), supports));
    const Eigen::VectorXd x = lu.solve(b);
    const Eigen::VectorXd uh = basis.inverse_transform(x);

    OdeRow row;
    row.level = j;
    row.n = n;
    row.nnz = B.nnz();
    row.nnz_percent = 100.0 * double(B.nnz()) / (double(n) * n);
    row.residual = (B * x - b).norm() / b.norm();
    row.fill = double(lu.nnz_L() + lu.nnz_U()) / double(B.nnz());
    row.l2 = l2_error(ode_exact, uh, T);
    row.h1 = h1_error(ode_exact, ode_exact_derivative, uh, T);
    const NormError hh =
        hhalf_error([&](long m) { return ode_exact_sine_coefficient(m, T); }, uh, T, config.hhalf_terms);
    row.hhalf = hh.value;
    row.hhalf_tail = hh.tail;
    row.hhalf_interp = std::sqrt(row.l2 * row.h1);
    row.seconds = seconds_since(t0);
    rows.push_back(row);
  }
  auto fill_rates = [&](auto member, auto rate) {
    std::vector<double> e;
    for (const auto& r : rows) e.push_back(r.*member);
    const auto q = rates(e);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].*rate = q[i];
  };
  fill_rates(&OdeRow::l2, &OdeRow::rate_l2);
  fill_rates(&OdeRow::h1, &OdeRow::rate_h1);
  fill_rates(&OdeRow::hhalf, &OdeRow::rate_hhalf);
  fill_rates(&OdeRow::hhalf_interp, &OdeRow::rate_hhalf_interp);
  return rows;
}

// ---------------------------------------------------------------------------

std::vector<CondRow> run_cond(const CondConfig& config) {
  const int j0 = config.coarsest > 0 ? config.coarsest : minimal_coarsest_level(config.moments);
  if (config.level_min <= j0 - 1 || config.level_max < config.level_min)
    throw ConfigurationError("invalid level range");
  std::vector<CondRow> rows;
  for (int j = std::max(config.level_min, j0); j <= config.level_max; ++j) {
    WaveletBasis basis(config.moments, j, j0);
    const SupportTable supports = build_supports(basis);
    const SparsityPattern pattern =
        build_pattern(CompressionParams::defaults(config.moments, 0.5, j), supports, basis.coarsest());
    TemporalAssembler assembler;
    const CsrMatrix A = assemble_compressed(basis, TemporalKind::Stiffness, pattern, &assembler);
    const CsrMatrix M = assemble_compressed(basis, TemporalKind::Mass, pattern, &assembler);
    CondRow row;
    row.level = j;
    row.dof = basis.dim();
    for (double mu : config.mus) {
      const auto e = diagonally_scaled_condition(combine(A, 1.0, M, mu * config.horizon), &supports,
                                                 config.dense_limit);
      row.cond.push_back(e.converged ? e.value : kNaN);
    }
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------

double heat_bpx_scale(TensorMode mode) { return mode == TensorMode::Full ? 1.0 : 6.0; }

std::vector<HeatRow> run_heat2d(const HeatConfig& config) {
  if (config.level_min < minimal_coarsest_level(4) + 1 || config.level_max < config.level_min)
    throw ConfigurationError("invalid level range");
  // ||u||^2 over Q: (1/4) (1/2 - sin(2) / 4)
  const double norm_u_squared = 0.25 * (0.5 - std::sin(2.0) / 4.0);
  BpxOptions options;
  options.scale = config.bpx_scale ? *config.bpx_scale : heat_bpx_scale(config.mode);

  std::vector<HeatRow> rows;
  for (int j = config.level_min; j <= config.level_max; ++j) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto temporal = build_temporal_operators(4, j);
    const SpaceTimeSystem system(config.mode, j, temporal);
    const BpxPreconditioner bpx(system, options);
    const Eigen::VectorXd b = system.rhs_separable(heat_g, heat_q);

    HeatRow row;
    row.level = j;
    row.nt = 1 << j;
    const long side = (1L << j) - 1;
    row.nx_interior = side * side;
    row.nx = (side + 2) * (side + 2);
    row.dofs = system.size();
    try {
      const GmresResult r = gmres_solve([&](const Eigen::VectorXd& v) { return system.apply(v); },
                                        [&](const Eigen::VectorXd& v) { return bpx.apply(v); }, b,
                                        config.tol, config.max_iterations);
      row.iterations = r.iterations;
      row.converged = true;
      row.history = r.history;
      row.error = l2q_error_separable(system, r.x, heat_g, heat_w, norm_u_squared);
    } catch (const NonConvergenceError& e) {
      row.iterations = config.max_iterations;
      row.history = e.history;
      row.error = kNaN;
    }
    row.flops = system.flops();
    row.seconds = seconds_since(t0);
    rows.push_back(row);
  }
  std::vector<double> e;
  for (const auto& r : rows) e.push_back(r.error);
  const auto q = rates(e);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rate = q[i];
  return rows;
}

// ---------------------------------------------------------------------------

std::string git_revision() { return STG_GIT_REVISION; }

void write_csv(std::ostream& out, const OdeConfig& c, const std::vector<OdeRow>& rows) {
  out << "# schema: stg-ode1d/1\n# git: " << git_revision() << "\n";
  out << "# config: moments=" << c.moments << " levels=" << c.level_min << ".." << c.level_max
      << " mu=" << c.mu << " T=" << c.horizon << " hhalf_terms=" << c.hhalf_terms << "\n";
  if (c.compress) {
    const auto p = CompressionParams::defaults(c.moments, 0.5, c.level_max);
    out << "# compression: a=" << (c.a ? *c.a : p.a) << " delta="
        << (c.delta ? format_number(*c.delta) : std::string("midpoint")) << " d=" << p.d
        << " q=0.5 (stiffness)" << (c.moments == 4 ? ", q=0 (mass)" : "")
        << "; coarsest scaling block kept in full\n";
  } else {
    out << "# compression: dense\n";
  }
  out << "j,N,nnz,nnz_percent,L2,L2_rate,H1,H1_rate,Hhalf,Hhalf_rate,Hhalf_tail,"
         "Hhalf_interp,Hhalf_interp_rate,residual,fill,seconds\n";
  for (const auto& r : rows) {
    out << r.level << ',' << r.n << ',' << r.nnz << ',' << std::fixed << std::setprecision(2)
        << r.nnz_percent << std::defaultfloat << ',' << format_number(r.l2) << ','
        << format_rate(r.rate_l2) << ',' << format_number(r.h1) << ',' << format_rate(r.rate_h1)
        << ',' << format_number(r.hhalf) << ',' << format_rate(r.rate_hhalf) << ','
        << format_number(r.hhalf_tail, 3) << ',' << format_number(r.hhalf_interp) << ','
        << format_rate(r.rate_hhalf_interp) << ',' << format_number(r.residual, 3) << ','
        << format_number(r.fill, 4) << ',' << format_number(r.seconds, 3) << '\n';
  }
}

void write_csv(std::ostream& out, const CondConfig& c, const std::vector<CondRow>& rows) {
  out << "# schema: stg-cond/1\n# git: " << git_revision() << "\n";
  out << "# config: moments=" << c.moments << " levels=" << c.level_min << ".." << c.level_max
      << " T=" << c.horizon << " coarsest="
      << (c.coarsest > 0 ? c.coarsest : minimal_coarsest_level(c.moments)) << "\n";
  out << "# compression: default a and delta; matrix A_t + mu T M_t scaled by its diagonal\n";
  out << "dof";
  for (double mu : c.mus) out << ",cond_mu" << format_number(mu);
  out << '\n';
  for (const auto& r : rows) {
    out << r.dof;
    for (double v : r.cond) out << ',' << format_number(v);
    out << '\n';
  }
}

void write_csv(std::ostream& out, const HeatConfig& c, const std::vector<HeatRow>& rows) {
  const char* mode = c.mode == TensorMode::Full ? "full" : "sparse";
  out << "# schema: stg-heat2d/1\n# git: " << git_revision() << "\n";
  out << "# config: mode=" << mode << " levels=" << c.level_min << ".." << c.level_max
      << " tol=" << c.tol << " bpx_scale="
      << (c.bpx_scale ? *c.bpx_scale : heat_bpx_scale(c.mode)) << " moments=4\n";
  out << "# compression: default a and delta, union of the stiffness and mass patterns\n";
  out << "mode,j,N_t,N_x,N_x_interior,dofs,iterations,converged,L2Q_error,rate,wall_ops,seconds\n";
  for (const auto& r : rows) {
    out << mode << ',' << r.level << ',' << r.nt << ',' << r.nx << ',' << r.nx_interior << ','
        << r.dofs << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ','
        << format_number(r.error) << ',' << format_rate(r.rate) << ','
        << format_number(r.flops, 6) << ',' << format_number(r.seconds, 3) << '\n';
  }
}

void write_history_csv(std::ostream& out, const std::vector<HeatRow>& rows) {
  out << "# schema: stg-heat2d-history/1\nj,iteration,relative_residual\n";
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.history.size(); ++i)
      out << r.level << ',' << i << ',' << format_number(r.history[i], 8) << '\n';
}

}  // namespace stg
