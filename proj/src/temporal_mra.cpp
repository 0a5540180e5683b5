#include "stg/temporal_mra.hpp"

#include <cmath>
#include <string>

namespace stg {

namespace {

// Wavelet stencils in terms of the hats of the same level.
constexpr Rational kD2Left[] = {{5, 8}, {-3, 4}, {-1, 4}, {1, 4}, {1, 8}};
constexpr Rational kD2Stationary[] = {{-1, 8}, {-1, 4}, {3, 4}, {-1, 4}, {-1, 8}};
constexpr Rational kD2Right[] = {{-1, 16}, {-1, 8}, {9, 16}, {-3, 4}};

constexpr Rational kD4Left1[] = {{63, 128}, {-65, 64}, {-1, 16}, {57, 64}, {13, 64},
                                 {-31, 64}, {-3, 16},  {7, 64},  {7, 128}};
constexpr Rational kD4Left2[] = {{-7, 128}, {-7, 64}, {21, 32}, {-37, 64}, {-11, 64},
                                 {15, 64},  {3, 32},  {-3, 64}, {-3, 128}};
constexpr Rational kD4Stationary[] = {{3, 128}, {3, 64}, {-1, 8}, {-19, 64}, {45, 64},
                                      {-19, 64}, {-1, 8}, {3, 64}, {3, 128}};
constexpr Rational kD4Right1[] = {{9, 512},  {9, 256},     {-53, 512}, {-31, 128},
                                  {345, 512}, {-105, 256}, {-45, 512}, {15, 64}};
constexpr Rational kD4Right2[] = {{-5, 512},  {-5, 256},   {67, 1536},  {41, 384},
                                  {-53, 512}, {-241, 768}, {875, 1536}, {-35, 64}};

template <std::size_t n>
std::vector<Rational> as_vector(const Rational (&a)[n]) {
  return std::vector<Rational>(a, a + n);
}

}  // namespace

TemporalMesh::TemporalMesh(int level_, double horizon_) : level(level_), horizon(horizon_) {
  if (level < 0) throw std::invalid_argument("mesh level must be nonnegative");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
}

std::vector<CellPiece> cell_pieces(const HatExpansion& f) {
  const int n_nodes = 1 << f.level;
  auto value = [&](int node) {
    int i = node - f.first_node;
    if (i < 0 || i >= int(f.coeffs.size())) return 0.0;
    return f.coeffs[i];
  };
  std::vector<CellPiece> pieces;
  int c0 = std::max(0, f.first_node - 1);
  int c1 = std::min(n_nodes - 1, f.last_node());
  for (int c = c0; c <= c1; ++c) {
    double l = value(c), r = value(c + 1);
    if (l != 0.0 || r != 0.0) pieces.push_back({c, l, r});
  }
  return pieces;
}

double evaluate_hat(int level, int node, double t) {
  double x = std::ldexp(t, level) - node;
  return std::max(0.0, 1.0 - std::abs(x));
}

int default_coarsest_level(int moments) {
  if (moments == 2) return 3;
  if (moments == 4) return 4;
  throw std::invalid_argument("moments must be 2 or 4");
}

int minimal_coarsest_level(int moments) {
  if (moments == 2) return 2;
  if (moments == 4) return 3;
  throw std::invalid_argument("moments must be 2 or 4");
}

WaveletBasis::WaveletBasis(int moments, int level, int coarsest)
    : moments_(moments), J_(level), j0_(coarsest > 0 ? coarsest : default_coarsest_level(moments)) {
  if (j0_ < minimal_coarsest_level(moments))
    throw std::invalid_argument("level too coarse for stencil width");
  if (J_ < j0_) throw std::invalid_argument("level too coarse for stencil width");

  for (int l = j0_ + 1; l <= J_; ++l) {
    const int nf = 1 << l, nc = nf / 2;
    std::vector<Eigen::Triplet<double>> trip;
    for (int m = 1; m <= nc; ++m) {
      trip.emplace_back(2 * m - 2, m - 1, 0.5);
      trip.emplace_back(2 * m - 1, m - 1, 1.0);
      if (2 * m + 1 <= nf) trip.emplace_back(2 * m, m - 1, 0.5);
    }
    for (int k = 1; k <= nc; ++k) {
      Stencil s = wavelet_stencil(l, k);
      for (std::size_t i = 0; i < s.coeffs.size(); ++i)
        trip.emplace_back(s.first_node - 1 + int(i), nc + k - 1, s.coeffs[i].value());
    }
    Eigen::SparseMatrix<double> m(nf, nf);
    m.setFromTriplets(trip.begin(), trip.end());
    m.makeCompressed();
    auto lu = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu->compute(m);
    if (lu->info() != Eigen::Success)
      throw std::runtime_error("two-scale matrix is singular at level " + std::to_string(l));
    two_scale_.push_back(std::move(m));
    two_scale_lu_.push_back(std::move(lu));
  }

  l2_norms_.resize(dim());
  for (int i = 0; i < dim(); ++i) {
    HatExpansion f = expansion(i);
    const double h = std::ldexp(1.0, -f.level);
    double s = 0.0;
    for (const CellPiece& p : cell_pieces(f))
      s += h / 3.0 * (p.left * p.left + p.left * p.right + p.right * p.right);
    l2_norms_[i] = std::sqrt(s);
  }
}

int WaveletBasis::block_offset(int level) const {
  if (level < j0_ || level > J_) throw std::out_of_range("level outside basis");
  return level == j0_ ? 0 : 1 << (level - 1);
}

int WaveletBasis::block_size(int level) const {
  if (level < j0_ || level > J_) throw std::out_of_range("level outside basis");
  return level == j0_ ? 1 << j0_ : 1 << (level - 1);
}

int WaveletBasis::level_of(int index) const {
  if (index < 0 || index >= dim()) throw std::out_of_range("multiscale index outside basis");
  if (index < (1 << j0_)) return j0_;
  int l = 0;
  while ((1 << l) <= index) ++l;
  return l;
}

WaveletBasis::Stencil WaveletBasis::wavelet_stencil(int level, int k) const {
  if (level <= j0_) throw std::invalid_argument("level too coarse for stencil width");
  const int half = 1 << (level - 1);
  const int n = 1 << level;
  if (k < 1 || k > half) throw std::out_of_range("wavelet index outside level");
  if (moments_ == 2) {
    if (k == 1) return {1, as_vector(kD2Left)};
    if (k == half) return {n - 3, as_vector(kD2Right)};
    return {2 * k - 3, as_vector(kD2Stationary)};
  }
  if (k == 1) return {1, as_vector(kD4Left1)};
  if (k == 2) return {1, as_vector(kD4Left2)};
  if (k == half - 1) return {n - 7, as_vector(kD4Right1)};
  if (k == half) return {n - 7, as_vector(kD4Right2)};
  return {2 * k - 5, as_vector(kD4Stationary)};
}

HatExpansion WaveletBasis::expansion(int index) const {
  const int l = level_of(index);
  const int k = local_index(index);
  if (l == j0_) return {l, k, {1.0}};
  Stencil s = wavelet_stencil(l, k);
  HatExpansion f{l, s.first_node, {}};
  for (const Rational& r : s.coeffs) f.coeffs.push_back(r.value());
  return f;
}

double WaveletBasis::evaluate(int index, double t) const {
  HatExpansion f = expansion(index);
  double v = 0.0;
  for (std::size_t i = 0; i < f.coeffs.size(); ++i)
    v += f.coeffs[i] * evaluate_hat(f.level, f.first_node + int(i), t);
  return v;
}

void WaveletBasis::refine_add(const double* coarse, int coarse_level, double* fine) const {
  const int nc = 1 << coarse_level, nf = 2 * nc;
  for (int m = 1; m <= nc; ++m) {
    const double c = coarse[m - 1];
    fine[2 * m - 2] += 0.5 * c;
    fine[2 * m - 1] += c;
    if (2 * m + 1 <= nf) fine[2 * m] += 0.5 * c;
  }
}

void WaveletBasis::refine_transpose(const double* fine, int coarse_level, double* coarse) const {
  const int nc = 1 << coarse_level, nf = 2 * nc;
  for (int m = 1; m <= nc; ++m) {
    double c = 0.5 * fine[2 * m - 2] + fine[2 * m - 1];
    if (2 * m + 1 <= nf) c += 0.5 * fine[2 * m];
    coarse[m - 1] = c;
  }
}

Eigen::VectorXd WaveletBasis::inverse_transform(const Eigen::VectorXd& c) const {
  if (c.size() != dim()) throw DimensionError("multiscale vector has wrong length");
  Eigen::VectorXd v = c.head(1 << j0_);
  for (int l = j0_ + 1; l <= J_; ++l) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(1 << l);
    refine_add(v.data(), l - 1, w.data());
    const int off = block_offset(l);
    for (int k = 1; k <= block_size(l); ++k) {
      const double d = c[off + k - 1];
      if (d == 0.0) continue;
      Stencil s = wavelet_stencil(l, k);
      for (std::size_t i = 0; i < s.coeffs.size(); ++i)
        w[s.first_node - 1 + int(i)] += d * s.coeffs[i].value();
    }
    v = std::move(w);
  }
  return v;
}

Eigen::VectorXd WaveletBasis::inverse_transform_transpose(const Eigen::VectorXd& v) const {
  if (v.size() != dim()) throw DimensionError("single-scale vector has wrong length");
  Eigen::VectorXd out(dim());
  Eigen::VectorXd w = v;
  for (int l = J_; l > j0_; --l) {
    const int off = block_offset(l);
    for (int k = 1; k <= block_size(l); ++k) {
      Stencil s = wavelet_stencil(l, k);
      double d = 0.0;
      for (std::size_t i = 0; i < s.coeffs.size(); ++i)
        d += w[s.first_node - 1 + int(i)] * s.coeffs[i].value();
      out[off + k - 1] = d;
    }
    Eigen::VectorXd coarse(1 << (l - 1));
    refine_transpose(w.data(), l - 1, coarse.data());
    w = std::move(coarse);
  }
  out.head(1 << j0_) = w;
  return out;
}

Eigen::VectorXd WaveletBasis::forward_transform(const Eigen::VectorXd& v) const {
  if (v.size() != dim()) throw DimensionError("single-scale vector has wrong length");
  Eigen::VectorXd out(dim());
  Eigen::VectorXd w = v;
  for (int l = J_; l > j0_; --l) {
    Eigen::VectorXd x = two_scale_lu_[l - j0_ - 1]->solve(w);
    const int nc = 1 << (l - 1);
    out.segment(block_offset(l), nc) = x.tail(nc);
    w = x.head(nc);
  }
  out.head(1 << j0_) = w;
  return out;
}

Eigen::SparseMatrix<double> WaveletBasis::transform_matrix() const {
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim());
  for (int i = 0; i < dim(); ++i) {
    e[i] = 1.0;
    Eigen::VectorXd col = inverse_transform(e);
    e[i] = 0.0;
    for (int r = 0; r < dim(); ++r)
      if (col[r] != 0.0) trip.emplace_back(r, i, col[r]);
  }
  Eigen::SparseMatrix<double> t(dim(), dim());
  t.setFromTriplets(trip.begin(), trip.end());
  return t;
}

Eigen::SparseMatrix<double> hat_gram(int level) {
  const int n = 1 << level;
  const double h = std::ldexp(1.0, -level);
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < n; ++i) {
    trip.emplace_back(i, i, i == n - 1 ? h / 3.0 : 2.0 * h / 3.0);
    if (i + 1 < n) {
      trip.emplace_back(i, i + 1, h / 6.0);
      trip.emplace_back(i + 1, i, h / 6.0);
    }
  }
  Eigen::SparseMatrix<double> g(n, n);
  g.setFromTriplets(trip.begin(), trip.end());
  return g;
}

}  // namespace stg
