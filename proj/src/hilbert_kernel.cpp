#include "stg/hilbert_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stg/quadrature.hpp"

namespace stg {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double omega_of(long m) { return kPi * (0.5 + double(m)); }

// ln tan(pi x / 4) for x in (0,2), evaluated through the cotangent near 2.
double log_tan_quarter(double x) {
  if (x <= 1.0) return std::log(std::tan(0.25 * kPi * x));
  return -std::log(std::tan(0.25 * kPi * (2.0 - x)));
}

// Coefficients on (0,1) of the unit hat with respect to sqrt(2) sin(w t) and
// sqrt(2) cos(w t).
void hat_coefficients(int level, int node, double w, double& sine, double& cosine) {
  const int n = 1 << level;
  const double h = std::ldexp(1.0, -level);
  const double b = node * h, a = b - h;
  const double sh = std::sin(0.5 * w * h);
  if (node < n) {
    const double f = 4.0 * sh * sh / (h * w * w);
    sine = std::sqrt(2.0) * f * std::sin(w * b);
    cosine = std::sqrt(2.0) * f * std::cos(w * b);
  } else {
    const double mid = 0.5 * (a + b);
    sine = std::sqrt(2.0) * 2.0 * std::cos(w * mid) * sh / (h * w * w);
    cosine = std::sqrt(2.0) * (std::sin(w * b) / w - 2.0 * std::sin(w * mid) * sh / (h * w * w));
  }
}

struct Piece {
  double u0, u1;
};

class LogIntegrand {
 public:
  LogIntegrand(LogPart part, double x0, double x1, double y0, double y1, int power)
      : part_(part), x0_(x0), x1_(x1), y0_(y0), y1_(y1), p_(power) {}

  double correlation(double u) const {
    double a, b;
    if (part_ == LogPart::Minus) {
      a = std::max(y0_, x0_ - u);
      b = std::min(y1_, x1_ - u);
    } else {
      a = std::max(y0_, u - x1_);
      b = std::min(y1_, u - x0_);
    }
    if (b <= a) return 0.0;
    const double ly = y1_ - y0_;
    if (p_ == 0) return b - a;
    const double ta = (a - y0_) / ly, tb = (b - y0_) / ly;
    return ly * (std::pow(tb, p_ + 1) - std::pow(ta, p_ + 1)) / (p_ + 1);
  }

  double kernel(double u) const {
    if (part_ == LogPart::Minus) return log_tan_quarter(std::abs(u));
    return log_tan_quarter(u);
  }

  std::vector<double> singular_points() const {
    if (part_ == LogPart::Minus) return {0.0};
    return {0.0, 2.0};
  }

  std::vector<double> breakpoints() const {
    std::vector<double> bp;
    if (part_ == LogPart::Minus)
      bp = {x0_ - y1_, x0_ - y0_, x1_ - y1_, x1_ - y0_};
    else
      bp = {x0_ + y0_, x1_ + y0_, x0_ + y1_, x1_ + y1_};
    std::sort(bp.begin(), bp.end());
    const double lo = bp.front(), hi = bp.back();
    for (double z : singular_points())
      if (z > lo && z < hi) bp.push_back(z);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    return bp;
  }

  // int_0^eps of the kernel's leading logarithm at singular point z, with the
  // orientation given by `dir` (+1: to the right of z).
  double singular_tail(double z, double eps) const {
    const double base = eps * (std::log(0.25 * kPi * eps) - 1.0);
    if (part_ == LogPart::Plus && z == 2.0) return -base;
    return base;
  }

 private:
  LogPart part_;
  double x0_, x1_, y0_, y1_;
  int p_;
};

double gauss_piece(const LogIntegrand& f, double u0, double u1) {
  const QuadratureRule& g = gauss_legendre(10);
  const double len = u1 - u0;
  double s = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double u = u0 + len * g.nodes[i];
    s += g.weights[i] * f.kernel(u) * f.correlation(u);
  }
  return s * len;
}

// Geometric grading toward the singular endpoint z of [u0,u1].
double graded_piece(const LogIntegrand& f, double u0, double u1, double z) {
  constexpr int kLevels = 20;
  const double len = u1 - u0;
  const double dir = (z == u0) ? 1.0 : -1.0;
  double s = 0.0;
  for (int k = 0; k < kLevels; ++k) {
    const double a = std::ldexp(len, -k - 1), b = std::ldexp(len, -k);
    const double p = z + dir * a, q = z + dir * b;
    s += gauss_piece(f, std::min(p, q), std::max(p, q));
  }
  const double eps = std::ldexp(len, -kLevels);
  s += f.correlation(z + dir * 0.5 * eps) * f.singular_tail(z, eps);
  return s;
}

double integrate_piece(const LogIntegrand& f, double u0, double u1) {
  const double len = u1 - u0;
  if (len <= 0.0) return 0.0;
  double dist = std::numeric_limits<double>::infinity();
  for (double z : f.singular_points())
    dist = std::min(dist, z < u0 ? u0 - z : (z > u1 ? z - u1 : 0.0));
  if (dist >= len) return gauss_piece(f, u0, u1);
  if (dist == 0.0) {
    bool at0 = false, at1 = false;
    for (double z : f.singular_points()) {
      at0 = at0 || z == u0;
      at1 = at1 || z == u1;
    }
    if (at0 && at1) {
      const double mid = 0.5 * (u0 + u1);
      return graded_piece(f, u0, mid, u0) + graded_piece(f, mid, u1, u1);
    }
    if (at0 || at1) return graded_piece(f, u0, u1, at0 ? u0 : u1);
  }
  const double mid = 0.5 * (u0 + u1);
  return integrate_piece(f, u0, mid) + integrate_piece(f, mid, u1);
}

}  // namespace

double kernel_eval(KernelKind which, double s, double t) {
  const double half_pi = 0.5 * kPi;
  switch (which) {
    case KernelKind::KPlus:
      if (s + t <= 0.0 || s + t >= 2.0) throw SingularityError("K+ is singular at s+t in {0,2}");
      return 0.5 / std::sin(half_pi * (s + t));
    case KernelKind::KMinus:
      if (s == t) throw SingularityError("K- is singular at s = t");
      return 0.5 / std::sin(half_pi * std::abs(s - t));
    case KernelKind::K:
      if (s == t) throw SingularityError("K is singular at s = t");
      return 0.5 / std::sin(half_pi * (s + t)) + 0.5 / std::sin(half_pi * (s - t));
    case KernelKind::KMinusOne:
      if (s == t) throw SingularityError("K_{-1} is singular at s = t");
      return -(log_tan_quarter(s + t) + log_tan_quarter(std::abs(s - t))) / kPi;
  }
  return kNaN;
}

double EigenPair::omega() const { return omega_of(index) / horizon; }

double EigenPair::V(double t) const {
  return std::sqrt(2.0 / horizon) * std::sin(omega() * t);
}

double EigenPair::W(double t) const {
  return std::sqrt(2.0 / horizon) * std::cos(omega() * t);
}

double hat_sine_coefficient(int level, int node, long m, double horizon) {
  double s, c;
  hat_coefficients(level, node, omega_of(m), s, c);
  return std::sqrt(horizon) * s;
}

double hat_cosine_coefficient(int level, int node, long m, double horizon) {
  double s, c;
  hat_coefficients(level, node, omega_of(m), s, c);
  return std::sqrt(horizon) * c;
}

std::function<double(double)> ht_apply_series(const std::vector<double>& coeffs, double horizon) {
  return [coeffs, horizon](double t) {
    double v = 0.0;
    for (long k = long(coeffs.size()) - 1; k >= 0; --k)
      v += coeffs[k] * EigenPair{k, horizon}.W(t);
    return v;
  };
}

Eigen::MatrixXd SeriesOracle::single_scale(int level, TemporalKind kind) const {
  const int n = 1 << level;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd v(n), w(n);
  for (long m = terms_ - 1; m >= 0; --m) {
    const double om = omega_of(m);
    for (int k = 0; k < n; ++k) hat_coefficients(level, k + 1, om, v[k], w[k]);
    if (kind == TemporalKind::Stiffness)
      out.noalias() += om * v * v.transpose();
    else
      out.noalias() += v * w.transpose();
  }
  return out;
}

double SeriesOracle::entry(TemporalKind kind, const HatExpansion& row,
                           const HatExpansion& col) const {
  double sum = 0.0;
  for (long m = terms_ - 1; m >= 0; --m) {
    const double om = omega_of(m);
    double vr = 0.0, vc = 0.0, wc = 0.0;
    for (std::size_t i = 0; i < row.coeffs.size(); ++i) {
      double s, c;
      hat_coefficients(row.level, row.first_node + int(i), om, s, c);
      vr += row.coeffs[i] * s;
    }
    for (std::size_t i = 0; i < col.coeffs.size(); ++i) {
      double s, c;
      hat_coefficients(col.level, col.first_node + int(i), om, s, c);
      vc += col.coeffs[i] * s;
      wc += col.coeffs[i] * c;
    }
    sum += kind == TemporalKind::Stiffness ? om * vr * vc : vr * wc;
  }
  return sum;
}

double SeriesOracle::hhalf_norm_squared(const HatExpansion& f) const {
  return entry(TemporalKind::Stiffness, f, f);
}

double log_cell_integral(LogPart part, double x0, double x1, double y0, double y1, int power) {
  LogIntegrand f(part, x0, x1, y0, y1, power);
  std::vector<double> bp = f.breakpoints();
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) s += integrate_piece(f, bp[i], bp[i + 1]);
  return s;
}

double kminus1_cell_integral(double x0, double x1, double y0, double y1, int power) {
  return -(log_cell_integral(LogPart::Plus, x0, x1, y0, y1, power) +
           log_cell_integral(LogPart::Minus, x0, x1, y0, y1, power)) /
         kPi;
}

TemporalAssembler::Table& TemporalAssembler::table(int row_level, int col_level) {
  auto key = std::make_pair(row_level, col_level);
  auto it = tables_.find(key);
  if (it != tables_.end()) return it->second;
  Table t;
  t.fine_level = std::max(row_level, col_level);
  return tables_.emplace(key, std::move(t)).first->second;
}

double TemporalAssembler::cell(int row_level, int rc, int col_level, int cc, int power) {
  if (power < 0 || power > kMaxPower) throw std::out_of_range("cell integral power");
  Table& t = table(row_level, col_level);
  const int m = t.fine_level;
  const std::size_t size = (std::size_t(2) << m) + 1;
  auto& minus = t.minus[power];
  auto& plus = t.plus[power];
  if (minus.empty()) {
    minus.assign(size, kNaN);
    plus.assign(size, kNaN);
  }
  const long xr = long(rc) << (m - row_level);
  const long yc = long(cc) << (m - col_level);
  const std::size_t di = std::size_t(xr - yc + (long(1) << m));
  const std::size_t si = std::size_t(xr + yc);
  const double hr = std::ldexp(1.0, -row_level), hc = std::ldexp(1.0, -col_level);
  const double x0 = rc * hr, y0 = cc * hc;
  if (std::isnan(minus[di])) {
    minus[di] = log_cell_integral(LogPart::Minus, x0, x0 + hr, y0, y0 + hc, power);
    ++computed_;
  }
  if (std::isnan(plus[si])) {
    plus[si] = log_cell_integral(LogPart::Plus, x0, x0 + hr, y0, y0 + hc, power);
    ++computed_;
  }
  return -(minus[di] + plus[si]) / kPi;
}

double TemporalAssembler::entry(TemporalKind kind, int row_level,
                                const std::vector<CellPiece>& row, int col_level,
                                const std::vector<CellPiece>& col) {
  const double hr = std::ldexp(1.0, -row_level), hc = std::ldexp(1.0, -col_level);
  double sum = 0.0;
  for (const CellPiece& r : row) {
    const double sr = (r.right - r.left) / hr;
    if (sr == 0.0) continue;
    for (const CellPiece& c : col) {
      if (kind == TemporalKind::Stiffness) {
        const double sc = (c.right - c.left) / hc;
        if (sc != 0.0) sum += sr * sc * cell(row_level, r.cell, col_level, c.cell, 0);
      } else {
        const double i0 = cell(row_level, r.cell, col_level, c.cell, 0);
        const double i1 = cell(row_level, r.cell, col_level, c.cell, 1);
        sum += sr * (c.left * (i0 - i1) + c.right * i1);
      }
    }
  }
  return sum;
}

double TemporalAssembler::entry(TemporalKind kind, const HatExpansion& row,
                                const HatExpansion& col) {
  return entry(kind, row.level, cell_pieces(row), col.level, cell_pieces(col));
}

Eigen::MatrixXd assemble_dense(int level, TemporalKind kind) {
  const int n = 1 << level;
  TemporalAssembler asmb;
  std::vector<std::vector<CellPiece>> pieces(n);
  for (int k = 0; k < n; ++k) pieces[k] = cell_pieces(HatExpansion{level, k + 1, {1.0}});
  Eigen::MatrixXd out(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out(r, c) = asmb.entry(kind, level, pieces[r], level, pieces[c]);
  return out;
}

Eigen::MatrixXd assemble_dense(const WaveletBasis& basis, TemporalKind kind) {
  const int n = basis.dim();
  TemporalAssembler asmb;
  std::vector<std::vector<CellPiece>> pieces(n);
  std::vector<int> levels(n);
  for (int i = 0; i < n; ++i) {
    HatExpansion f = basis.expansion(i);
    pieces[i] = cell_pieces(f);
    levels[i] = f.level;
  }
  Eigen::MatrixXd out(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      out(r, c) = asmb.entry(kind, levels[r], pieces[r], levels[c], pieces[c]);
  return out;
}

Eigen::MatrixXd hilbert_load_matrix(int level,
                                    const std::function<Eigen::VectorXd(double)>& f,
                                    int components, double horizon) {
  constexpr int kDeg = TemporalAssembler::kMaxPower;
  constexpr int kPts = kDeg + 1;
  const int n = 1 << level;
  const double h = 1.0 / n;

  // Per-cell monomial coefficients (in the local coordinate) of the degree-7
  // interpolant of f(T tau) at Chebyshev points.
  std::array<double, kPts> tau;
  Eigen::MatrixXd vander(kPts, kPts);
  for (int i = 0; i < kPts; ++i) {
    tau[i] = 0.5 * (1.0 - std::cos(kPi * (2 * i + 1) / (2.0 * kPts)));
    for (int p = 0; p < kPts; ++p) vander(i, p) = std::pow(tau[i], p);
  }
  Eigen::MatrixXd vinv = vander.fullPivLu().inverse();
  Eigen::MatrixXd coef(kPts * n, components);
  Eigen::MatrixXd samples(kPts, components);
  for (int c = 0; c < n; ++c) {
    for (int i = 0; i < kPts; ++i) {
      Eigen::VectorXd v = f(horizon * (c + tau[i]) * h);
      if (v.size() != components) throw DimensionError("load function has wrong length");
      samples.row(i) = v.transpose();
    }
    coef.middleRows(kPts * c, kPts) = vinv * samples;
  }

  TemporalAssembler asmb;
  Eigen::MatrixXd cells(n, kPts * n);
  for (int rc = 0; rc < n; ++rc)
    for (int cc = 0; cc < n; ++cc)
      for (int p = 0; p < kPts; ++p) cells(rc, kPts * cc + p) = asmb.cell(level, rc, level, cc, p);
  Eigen::MatrixXd g = cells * coef;
  Eigen::MatrixXd b(n, components);
  for (int k = 1; k <= n; ++k) {
    b.row(k - 1) = g.row(k - 1);
    if (k < n) b.row(k - 1) -= g.row(k);
  }
  return (horizon / h) * b;
}

Eigen::VectorXd hilbert_load_vector(int level, const std::function<double(double)>& f,
                                    double horizon) {
  return hilbert_load_matrix(
      level, [&](double t) { return Eigen::VectorXd::Constant(1, f(t)); }, 1, horizon);
}

double l2_error(const std::function<double(double)>& u, const Eigen::VectorXd& uh,
                double horizon) {
  const QuadratureRule& g = gauss_legendre(10);
  const int n = int(uh.size());
  const double h = horizon / n;
  double s = 0.0;
  for (int c = 0; c < n; ++c) {
    const double l = c == 0 ? 0.0 : uh[c - 1], r = uh[c];
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const double x = g.nodes[i];
      const double e = u((c + x) * h) - (l + (r - l) * x);
      s += g.weights[i] * h * e * e;
    }
  }
  return std::sqrt(s);
}

double h1_error(const std::function<double(double)>& u, const std::function<double(double)>& du,
                const Eigen::VectorXd& uh, double horizon) {
  const QuadratureRule& g = gauss_legendre(10);
  const int n = int(uh.size());
  const double h = horizon / n;
  double s = 0.0;
  for (int c = 0; c < n; ++c) {
    const double l = c == 0 ? 0.0 : uh[c - 1], r = uh[c];
    const double slope = (r - l) / h;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const double x = g.nodes[i];
      const double t = (c + x) * h;
      const double e = u(t) - (l + (r - l) * x);
      const double de = du(t) - slope;
      s += g.weights[i] * h * (e * e + de * de);
    }
  }
  return std::sqrt(s);
}

NormError hhalf_error(const std::function<double(long)>& exact_sine_coeff,
                      const Eigen::VectorXd& uh, double horizon, long terms) {
  const int n = int(uh.size());
  const int level = int(std::lround(std::log2(double(n))));
  if ((1 << level) != n) throw DimensionError("hhalf_error expects 2^j nodal values");
  const double h = 1.0 / n;
  double total = 0.0, upper_half = 0.0;
  for (long m = terms - 1; m >= 0; --m) {
    const double w = omega_of(m);
    const double sh = std::sin(0.5 * w * h);
    const double f = 4.0 * sh * sh / (h * w * w);
    double proj = 0.0;
    for (int k = 1; k < n; ++k) proj += uh[k - 1] * std::sin(w * k * h);
    proj *= f;
    const double mid = 1.0 - 0.5 * h;
    proj += uh[n - 1] * 2.0 * std::cos(w * mid) * sh / (h * w * w);
    proj *= std::sqrt(2.0) * std::sqrt(horizon);
    const double e = exact_sine_coeff(m) - proj;
    const double term = (w / horizon) * e * e;
    total += term;
    if (m >= terms / 2) upper_half += term;
  }
  NormError r;
  // For terms decaying like m^-3 the remainder beyond L is a third of the
  // contribution of (L/2, L].
  r.tail = upper_half / 3.0;
  r.value = std::sqrt(total);
  r.tail_warning = r.tail > 0.01 * total;
  return r;
}

}  // namespace stg
