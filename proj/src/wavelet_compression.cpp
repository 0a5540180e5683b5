#include "stg/wavelet_compression.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <limits>
#include <numeric>
#include <string>

namespace stg {

namespace {

constexpr double kSlack = 1e-14;

}  // namespace

CompressionParams CompressionParams::defaults(int dtilde, double q, int finest) {
  CompressionParams p;
  p.dtilde = dtilde;
  p.q = q;
  p.finest = finest;
  p.delta = 0.5 * (p.d + dtilde + 2.0 * q);
  return p;
}

Cutoffs cutoff_parameters(const CompressionParams& p, int l, int lp) {
  if (!p.window_ok())
    throw ConfigurationError("compression parameters outside the admissible window");
  const double j = p.finest, dt = p.dtilde, q = p.q, dl = p.delta;
  const int lmin = std::min(l, lp), lmax = std::max(l, lp);
  const double e1 = (2.0 * j * (dl - q) - (l + lp) * (dl + dt)) / (2.0 * (dt + q));
  const double e2 = (2.0 * j * (dl - q) - (l + lp) * dl - lmax * dt) / (dt + 2.0 * q);
  return {p.a * std::max(std::ldexp(1.0, -lmin), std::exp2(e1)),
          p.a * std::max(std::ldexp(1.0, -lmax), std::exp2(e2))};
}

SupportTable build_supports(const WaveletBasis& basis) {
  SupportTable s;
  const int n = basis.dim();
  s.level.resize(n);
  s.lo.resize(n);
  s.hi.resize(n);
  s.knots.resize(n);
  for (int i = 0; i < n; ++i) {
    HatExpansion f = basis.expansion(i);
    const int nodes = 1 << f.level;
    const double h = std::ldexp(1.0, -f.level);
    auto value = [&](int node) {
      int k = node - f.first_node;
      return (k < 0 || k >= int(f.coeffs.size())) ? 0.0 : f.coeffs[k];
    };
    const int n0 = f.first_node - 1, n1 = std::min(f.last_node() + 1, nodes);
    s.level[i] = f.level;
    s.lo[i] = n0 * h;
    s.hi[i] = n1 * h;
    for (int node = n0; node <= n1; ++node) {
      const double left = value(node) - value(node - 1);
      const double right = (node == nodes ? 0.0 : value(node + 1)) - value(node);
      const bool boundary_jump = node == nodes && value(node) != 0.0;
      if (left != right || boundary_jump) s.knots[i].push_back(node * h);
    }
  }
  return s;
}

double interval_distance(double a0, double a1, double b0, double b1) {
  return std::max({0.0, b0 - a1, a0 - b1});
}

double points_interval_distance(const std::vector<double>& pts, double b0, double b1) {
  double d = std::numeric_limits<double>::infinity();
  for (double x : pts) d = std::min(d, interval_distance(x, x, b0, b1));
  return d;
}

bool SparsityPattern::contains(int r, int c) const {
  auto b = cols.begin() + rowptr[r], e = cols.begin() + rowptr[r + 1];
  return std::binary_search(b, e, c);
}

SparsityPattern build_pattern(const CompressionParams& p, const SupportTable& s,
                              int coarsest_level) {
  const int n = s.size();
  int finest = coarsest_level;
  for (int l : s.level) finest = std::max(finest, l);
  // Level blocks in multiscale order.
  std::vector<int> offset(finest + 2, 0), size(finest + 2, 0);
  for (int l = coarsest_level; l <= finest; ++l) {
    offset[l] = l == coarsest_level ? 0 : 1 << (l - 1);
    size[l] = l == coarsest_level ? 1 << l : 1 << (l - 1);
  }

  SparsityPattern pat;
  pat.n = n;
  std::vector<int> row;
  for (int r = 0; r < n; ++r) {
    row.clear();
    const int lr = s.level[r];
    for (int lc = coarsest_level; lc <= finest; ++lc) {
      const int c0 = offset[lc], cn = size[lc];
      if (lr == coarsest_level || lc == coarsest_level) {
        for (int c = c0; c < c0 + cn; ++c) row.push_back(c);
        continue;
      }
      const Cutoffs cut = cutoff_parameters(p, lr, lc);
      // Wavelet k of level lc is centred near (k - 1/2) 2^{1-lc}, support
      // width below 10 * 2^{-lc}.
      const double per = std::ldexp(1.0, lc - 1);
      int k0 = int(std::floor((s.lo[r] - cut.B) * per)) - 6;
      int k1 = int(std::ceil((s.hi[r] + cut.B) * per)) + 6;
      k0 = std::max(k0, 0);
      k1 = std::min(k1, cn - 1);
      const double near = std::ldexp(1.0, -std::min(lr, lc));
      for (int k = k0; k <= k1; ++k) {
        const int c = c0 + k;
        const double dist = interval_distance(s.lo[r], s.hi[r], s.lo[c], s.hi[c]);
        if (dist > cut.B + kSlack) continue;
        if (dist <= near + kSlack && lr != lc) {
          const double ds = lc > lr ? points_interval_distance(s.knots[r], s.lo[c], s.hi[c])
                                    : points_interval_distance(s.knots[c], s.lo[r], s.hi[r]);
          if (ds > cut.Bs + kSlack) continue;
        }
        row.push_back(c);
      }
    }
    std::sort(row.begin(), row.end());
    pat.cols.insert(pat.cols.end(), row.begin(), row.end());
    pat.rowptr.push_back(int(pat.cols.size()));
  }
  return pat;
}

SparsityPattern full_pattern(int n) {
  SparsityPattern p;
  p.n = n;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) p.cols.push_back(c);
    p.rowptr.push_back(int(p.cols.size()));
  }
  return p;
}

SparsityPattern pattern_union(const SparsityPattern& a, const SparsityPattern& b) {
  if (a.n != b.n) throw DimensionError("pattern sizes differ");
  SparsityPattern p;
  p.n = a.n;
  for (int r = 0; r < a.n; ++r) {
    std::set_union(a.cols.begin() + a.rowptr[r], a.cols.begin() + a.rowptr[r + 1],
                   b.cols.begin() + b.rowptr[r], b.cols.begin() + b.rowptr[r + 1],
                   std::back_inserter(p.cols));
    p.rowptr.push_back(int(p.cols.size()));
  }
  return p;
}

Eigen::VectorXd CsrMatrix::operator*(const Eigen::VectorXd& x) const {
  if (x.size() != n) throw DimensionError("csr matvec dimension mismatch");
  Eigen::VectorXd y(n);
  for (int r = 0; r < n; ++r) {
    double s = 0.0;
    for (int p = rowptr[r]; p < rowptr[r + 1]; ++p) s += val[p] * x[col[p]];
    y[r] = s;
  }
  return y;
}

Eigen::MatrixXd CsrMatrix::dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int r = 0; r < n; ++r)
    for (int p = rowptr[r]; p < rowptr[r + 1]; ++p) d(r, col[p]) = val[p];
  return d;
}

SparsityPattern CsrMatrix::pattern() const {
  SparsityPattern p;
  p.n = n;
  p.rowptr = rowptr;
  p.cols = col;
  return p;
}

CsrMatrix assemble_compressed(const WaveletBasis& basis, TemporalKind kind,
                              const SparsityPattern& pattern, TemporalAssembler* assembler) {
  TemporalAssembler local;
  TemporalAssembler& asmb = assembler ? *assembler : local;
  const int n = basis.dim();
  if (pattern.n != n) throw DimensionError("pattern does not match basis");
  std::vector<std::vector<CellPiece>> pieces(n);
  std::vector<int> levels(n);
  for (int i = 0; i < n; ++i) {
    HatExpansion f = basis.expansion(i);
    pieces[i] = cell_pieces(f);
    levels[i] = f.level;
  }
  CsrMatrix m;
  m.n = n;
  m.rowptr = pattern.rowptr;
  m.col = pattern.cols;
  m.val.resize(pattern.nnz());
  for (int r = 0; r < n; ++r)
    for (int p = pattern.rowptr[r]; p < pattern.rowptr[r + 1]; ++p) {
      const int c = pattern.cols[p];
      m.val[p] = asmb.entry(kind, levels[r], pieces[r], levels[c], pieces[c]);
    }
  return m;
}

CsrMatrix combine(const CsrMatrix& a, double alpha, const CsrMatrix& b, double beta) {
  if (a.n != b.n) throw DimensionError("matrix sizes differ");
  CsrMatrix m;
  m.n = a.n;
  for (int r = 0; r < a.n; ++r) {
    int p = a.rowptr[r], q = b.rowptr[r];
    const int pe = a.rowptr[r + 1], qe = b.rowptr[r + 1];
    while (p < pe || q < qe) {
      if (q >= qe || (p < pe && a.col[p] < b.col[q])) {
        m.col.push_back(a.col[p]);
        m.val.push_back(alpha * a.val[p++]);
      } else if (p >= pe || b.col[q] < a.col[p]) {
        m.col.push_back(b.col[q]);
        m.val.push_back(beta * b.val[q++]);
      } else {
        m.col.push_back(a.col[p]);
        m.val.push_back(alpha * a.val[p++] + beta * b.val[q++]);
      }
    }
    m.rowptr.push_back(int(m.col.size()));
  }
  return m;
}

CsrMatrix leading_block(const CsrMatrix& a, int n) {
  if (n > a.n) throw DimensionError("leading block larger than matrix");
  CsrMatrix m;
  m.n = n;
  for (int r = 0; r < n; ++r) {
    for (int p = a.rowptr[r]; p < a.rowptr[r + 1]; ++p)
      if (a.col[p] < n) {
        m.col.push_back(a.col[p]);
        m.val.push_back(a.val[p]);
      }
    m.rowptr.push_back(int(m.col.size()));
  }
  return m;
}

CsrMatrix from_dense(const Eigen::MatrixXd& a, double drop) {
  CsrMatrix m;
  m.n = int(a.rows());
  for (int r = 0; r < m.n; ++r) {
    for (int c = 0; c < m.n; ++c)
      if (std::abs(a(r, c)) > drop || r == c) {
        m.col.push_back(c);
        m.val.push_back(a(r, c));
      }
    m.rowptr.push_back(int(m.col.size()));
  }
  return m;
}

namespace {

// Minimum-degree elimination on the graph of the symmetrized pattern, where a
// vertex may only be eliminated once all groups before its own are done.
std::vector<int> constrained_minimum_degree(const SparsityPattern& pattern,
                                            const std::vector<std::vector<int>>& groups) {
  const int n = pattern.n;
  std::vector<std::vector<int>> adj(n);
  for (int r = 0; r < n; ++r)
    for (int p = pattern.rowptr[r]; p < pattern.rowptr[r + 1]; ++p) {
      const int c = pattern.cols[p];
      if (c == r) continue;
      adj[r].push_back(c);
      adj[c].push_back(r);
    }
  std::vector<int> mark(n, -1);
  for (int v = 0; v < n; ++v) {
    auto& a = adj[v];
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  std::vector<char> done(n, 0);
  std::vector<int> order;
  order.reserve(n);
  int stamp = 0;
  for (const auto& group : groups) {
    for (std::size_t step = 0; step < group.size(); ++step) {
      int best = -1;
      std::size_t best_deg = 0;
      for (int v : group) {
        if (done[v]) continue;
        if (best < 0 || adj[v].size() < best_deg) {
          best = v;
          best_deg = adj[v].size();
        }
      }
      const int v = best;
      done[v] = 1;
      order.push_back(v);
      const std::vector<int> nb = std::move(adj[v]);
      adj[v].clear();
      for (int x : nb) {
        ++stamp;
        std::vector<int> merged;
        merged.reserve(adj[x].size() + nb.size());
        mark[x] = stamp;
        mark[v] = stamp;
        for (int y : adj[x])
          if (mark[y] != stamp) {
            mark[y] = stamp;
            merged.push_back(y);
          }
        for (int y : nb)
          if (mark[y] != stamp) {
            mark[y] = stamp;
            merged.push_back(y);
          }
        adj[x] = std::move(merged);
      }
    }
  }
  return order;
}

}  // namespace

std::vector<int> nested_dissection_order(const SparsityPattern& pattern,
                                         const SupportTable& supports, int leaf_size) {
  const int n = pattern.n;
  if (n == 0) return {};
  std::vector<double> centre(n);
  for (int i = 0; i < n; ++i) centre[i] = 0.5 * (supports.lo[i] + supports.hi[i]);

  std::vector<int> stamp(n, -1), side(n, 0);
  std::vector<char> sep(n, 0);
  int next_stamp = 0;
  std::vector<std::vector<int>> groups;

  auto finest_first = [&](std::vector<int>& v) {
    std::stable_sort(v.begin(), v.end(), [&](int x, int y) {
      if (supports.level[x] != supports.level[y]) return supports.level[x] > supports.level[y];
      return centre[x] < centre[y];
    });
  };
  auto emit = [&](std::vector<int> v) {
    if (v.empty()) return;
    finest_first(v);
    groups.push_back(std::move(v));
  };

  std::function<void(std::vector<int>, double, double)> dissect = [&](std::vector<int> verts,
                                                                        double a, double b) {
    if (int(verts.size()) <= leaf_size || b - a < 1e-6) {
      emit(std::move(verts));
      return;
    }
    const double mid = 0.5 * (a + b);
    const int st = next_stamp++;
    std::vector<std::pair<int, int>> cut;
    std::map<int, int> crossings;
    for (int v : verts) {
      stamp[v] = st;
      side[v] = centre[v] < mid ? 0 : 1;
      sep[v] = 0;
    }
    for (int u : verts)
      for (int p = pattern.rowptr[u]; p < pattern.rowptr[u + 1]; ++p) {
        const int w = pattern.cols[p];
        if (stamp[w] != st || side[w] == side[u] || u > w) continue;
        cut.emplace_back(u, w);
        ++crossings[u];
        ++crossings[w];
      }
    // Greedy vertex cover of the cut edges, most crossings first.
    for (;;) {
      int best = -1, best_count = 0;
      for (auto [u, w] : cut) {
        if (sep[u] || sep[w]) continue;
        for (int z : {u, w})
          if (crossings[z] > best_count) {
            best = z;
            best_count = crossings[z];
          }
      }
      if (best < 0) break;
      sep[best] = 1;
    }
    std::vector<int> left, right, middle;
    for (int v : verts) (sep[v] ? middle : (side[v] == 0 ? left : right)).push_back(v);
    if (!left.empty()) dissect(std::move(left), a, mid);
    if (!right.empty()) dissect(std::move(right), mid, b);
    emit(std::move(middle));
  };
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  dissect(std::move(all), 0.0, 1.0);
  return constrained_minimum_degree(pattern, groups);
}

SparseLU::SparseLU(const CsrMatrix& a, std::vector<int> perm) : n_(a.n), perm_(std::move(perm)) {
  if (perm_.empty()) {
    perm_.resize(n_);
    std::iota(perm_.begin(), perm_.end(), 0);
  }
  if (int(perm_.size()) != n_) throw DimensionError("permutation has wrong length");
  std::vector<int> inv(n_, -1);
  for (int i = 0; i < n_; ++i) {
    if (perm_[i] < 0 || perm_[i] >= n_ || inv[perm_[i]] != -1)
      throw std::invalid_argument("not a permutation");
    inv[perm_[i]] = i;
  }

  // Column-compressed form of C = P A P^T: C(i,j) = A(perm[i], perm[j]).
  std::vector<int> Cp(n_ + 1, 0), Ci(a.nnz());
  std::vector<double> Cx(a.nnz());
  for (int r = 0; r < n_; ++r)
    for (int p = a.rowptr[r]; p < a.rowptr[r + 1]; ++p) ++Cp[inv[a.col[p]] + 1];
  for (int j = 0; j < n_; ++j) Cp[j + 1] += Cp[j];
  {
    std::vector<int> next(Cp.begin(), Cp.end() - 1);
    for (int r = 0; r < n_; ++r)
      for (int p = a.rowptr[r]; p < a.rowptr[r + 1]; ++p) {
        const int j = inv[a.col[p]];
        Ci[next[j]] = inv[r];
        Cx[next[j]++] = a.val[p];
      }
  }
  double scale = 0.0;
  for (int r = 0; r < n_; ++r)
    for (int p = a.rowptr[r]; p < a.rowptr[r + 1]; ++p)
      if (a.col[p] == r) scale = std::max(scale, std::abs(a.val[p]));

  Lp_.assign(1, 0);
  Up_.assign(1, 0);
  std::vector<double> x(n_, 0.0);
  std::vector<int> mark(n_, -1), xi(n_), stack(n_), pos(n_);
  for (int k = 0; k < n_; ++k) {
    // Reach of column k through the graph of L (depth-first, post-order).
    int top = n_;
    for (int p = Cp[k]; p < Cp[k + 1]; ++p) {
      const int root = Ci[p];
      if (mark[root] == k) continue;
      int head = 0;
      stack[0] = root;
      mark[root] = k;
      pos[root] = root < k ? Lp_[root] + 1 : 0;
      while (head >= 0) {
        const int j = stack[head];
        bool pushed = false;
        if (j < k) {
          const int end = Lp_[j + 1];
          while (pos[j] < end) {
            const int i = Li_[pos[j]++];
            if (mark[i] == k) continue;
            mark[i] = k;
            pos[i] = i < k ? Lp_[i] + 1 : 0;
            stack[++head] = i;
            pushed = true;
            break;
          }
        }
        if (!pushed) {
          --head;
          xi[--top] = j;
        }
      }
    }
    for (int p = Cp[k]; p < Cp[k + 1]; ++p) x[Ci[p]] = Cx[p];
    for (int p = top; p < n_; ++p) {
      const int j = xi[p];
      if (j >= k) continue;
      const double xj = x[j];
      for (int q = Lp_[j] + 1; q < Lp_[j + 1]; ++q) x[Li_[q]] -= Lx_[q] * xj;
    }
    double pivot = 0.0;
    bool have_pivot = false;
    for (int p = top; p < n_; ++p)
      if (xi[p] == k) {
        pivot = x[k];
        have_pivot = true;
      }
    if (!have_pivot || std::abs(pivot) <= 1e-13 * scale)
      throw FactorizationError("zero pivot at position " + std::to_string(k));
    Li_.push_back(k);
    Lx_.push_back(1.0);
    for (int p = top; p < n_; ++p) {
      const int i = xi[p];
      if (i < k) {
        Ui_.push_back(i);
        Ux_.push_back(x[i]);
      } else if (i > k) {
        Li_.push_back(i);
        Lx_.push_back(x[i] / pivot);
      }
      x[i] = 0.0;
    }
    Ui_.push_back(k);
    Ux_.push_back(pivot);
    Lp_.push_back(int(Li_.size()));
    Up_.push_back(int(Ui_.size()));
  }
}

Eigen::VectorXd SparseLU::solve(const Eigen::VectorXd& b) const {
  if (b.size() != n_) throw DimensionError("rhs has wrong length");
  Eigen::VectorXd y(n_);
  for (int i = 0; i < n_; ++i) y[i] = b[perm_[i]];
  for (int j = 0; j < n_; ++j) {
    const double yj = y[j];
    for (int q = Lp_[j] + 1; q < Lp_[j + 1]; ++q) y[Li_[q]] -= Lx_[q] * yj;
  }
  for (int j = n_ - 1; j >= 0; --j) {
    const int d = Up_[j + 1] - 1;
    y[j] /= Ux_[d];
    const double yj = y[j];
    for (int q = Up_[j]; q < d; ++q) y[Ui_[q]] -= Ux_[q] * yj;
  }
  Eigen::VectorXd x(n_);
  for (int i = 0; i < n_; ++i) x[perm_[i]] = y[i];
  return x;
}

Eigen::VectorXd SparseLU::solve_transpose(const Eigen::VectorXd& b) const {
  if (b.size() != n_) throw DimensionError("rhs has wrong length");
  Eigen::VectorXd y(n_);
  for (int i = 0; i < n_; ++i) y[i] = b[perm_[i]];
  for (int j = 0; j < n_; ++j) {
    const int d = Up_[j + 1] - 1;
    double s = y[j];
    for (int q = Up_[j]; q < d; ++q) s -= Ux_[q] * y[Ui_[q]];
    y[j] = s / Ux_[d];
  }
  for (int j = n_ - 1; j >= 0; --j) {
    double s = y[j];
    for (int q = Lp_[j] + 1; q < Lp_[j + 1]; ++q) s -= Lx_[q] * y[Li_[q]];
    y[j] = s;
  }
  Eigen::VectorXd x(n_);
  for (int i = 0; i < n_; ++i) x[perm_[i]] = y[i];
  return x;
}

void SparseLU::solve_rows(double* w, int rows, int ld) const {
  constexpr int kChunk = 128;
  std::vector<double> buf(std::size_t(kChunk) * n_);
  for (int r0 = 0; r0 < rows; r0 += kChunk) {
    const int m = std::min(kChunk, rows - r0);
    for (int i = 0; i < n_; ++i) {
      const double* src = w + std::size_t(perm_[i]) * ld + r0;
      std::copy(src, src + m, buf.data() + std::size_t(i) * kChunk);
    }
    for (int j = 0; j < n_; ++j) {
      const double* yj = buf.data() + std::size_t(j) * kChunk;
      for (int q = Lp_[j] + 1; q < Lp_[j + 1]; ++q) {
        double* yi = buf.data() + std::size_t(Li_[q]) * kChunk;
        const double l = Lx_[q];
        for (int t = 0; t < m; ++t) yi[t] -= l * yj[t];
      }
    }
    for (int j = n_ - 1; j >= 0; --j) {
      const int d = Up_[j + 1] - 1;
      double* yj = buf.data() + std::size_t(j) * kChunk;
      const double inv = 1.0 / Ux_[d];
      for (int t = 0; t < m; ++t) yj[t] *= inv;
      for (int q = Up_[j]; q < d; ++q) {
        double* yi = buf.data() + std::size_t(Ui_[q]) * kChunk;
        const double u = Ux_[q];
        for (int t = 0; t < m; ++t) yi[t] -= u * yj[t];
      }
    }
    for (int i = 0; i < n_; ++i) {
      double* dst = w + std::size_t(perm_[i]) * ld + r0;
      const double* src = buf.data() + std::size_t(i) * kChunk;
      std::copy(src, src + m, dst);
    }
  }
}

double SparseLU::reconstruction_error(const CsrMatrix& a) const {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n_, n_), U = Eigen::MatrixXd::Zero(n_, n_);
  for (int j = 0; j < n_; ++j) {
    for (int q = Lp_[j]; q < Lp_[j + 1]; ++q) L(Li_[q], j) = Lx_[q];
    for (int q = Up_[j]; q < Up_[j + 1]; ++q) U(Ui_[q], j) = Ux_[q];
  }
  Eigen::MatrixXd d = a.dense();
  Eigen::MatrixXd c(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) c(i, j) = d(perm_[i], perm_[j]);
  return (c - L * U).cwiseAbs().maxCoeff();
}

}  // namespace stg
