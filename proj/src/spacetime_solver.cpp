#include "stg/spacetime_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stg/hilbert_kernel.hpp"
#include "stg/quadrature.hpp"

namespace stg {

// ---------------------------------------------------------------------------
// Kronecker products

KronOrder choose_kron_order(long a_rows, long x_rows, long x_cols, long b_rows) {
  return a_rows * x_rows <= x_cols * b_rows ? KronOrder::TemporalFirst : KronOrder::SpatialFirst;
}

double kron_flops(KronOrder order, const SpMat& A, const SpMat& B, long x_rows, long x_cols) {
  if (order == KronOrder::TemporalFirst)
    return double(A.nonZeros()) * x_rows + double(B.nonZeros()) * A.rows();
  return double(B.nonZeros()) * x_cols + double(A.nonZeros()) * B.rows();
}

Eigen::MatrixXd kron_matvec(const SpMat& A, const SpMat& B, const Eigen::MatrixXd& X) {
  if (B.cols() != X.rows() || A.cols() != X.cols())
    throw DimensionError("Kronecker factors do not match the block shape");
  if (choose_kron_order(A.rows(), X.rows(), X.cols(), B.rows()) == KronOrder::TemporalFirst) {
    Eigen::MatrixXd y = X * A.transpose();
    return B * y;
  }
  Eigen::MatrixXd y = B * X;
  return y * A.transpose();
}

// ---------------------------------------------------------------------------
// Temporal matrices

std::shared_ptr<const TemporalOperators> build_temporal_operators(int moments, int level,
                                                                  bool compress, double horizon) {
  auto ops = std::make_shared<TemporalOperators>();
  ops->basis = std::make_shared<WaveletBasis>(moments, level);
  ops->supports = build_supports(*ops->basis);
  ops->horizon = horizon;
  const int n = ops->basis->dim();
  SparsityPattern pattern;
  if (compress) {
    pattern = build_pattern(CompressionParams::defaults(moments, 0.5, level), ops->supports,
                            ops->basis->coarsest());
    if (moments == 4)
      pattern = pattern_union(pattern,
                              build_pattern(CompressionParams::defaults(moments, 0.0, level),
                                            ops->supports, ops->basis->coarsest()));
  } else {
    pattern = full_pattern(n);
  }
  TemporalAssembler asmb;
  ops->A = assemble_compressed(*ops->basis, TemporalKind::Stiffness, pattern, &asmb);
  ops->M = assemble_compressed(*ops->basis, TemporalKind::Mass, pattern, &asmb);
  for (double& v : ops->M.val) v *= horizon;
  return ops;
}

double right_multiply_block(const CsrMatrix& A, const CsrMatrix& M, int r0, int nr, int c0, int nc,
                            const double* XA, const double* XM, int rows, double* YA,
                            double* YM) {
  double count = 0.0;
  for (int r = r0; r < r0 + nr; ++r) {
    const int* begin = A.col.data() + A.rowptr[r];
    const int* end = A.col.data() + A.rowptr[r + 1];
    const int* first = std::lower_bound(begin, end, c0);
    double* ya = YA ? YA + std::size_t(rows) * (r - r0) : nullptr;
    double* ym = YM ? YM + std::size_t(rows) * (r - r0) : nullptr;
    for (const int* it = first; it != end && *it < c0 + nc; ++it) {
      const std::size_t p = std::size_t(it - A.col.data());
      const std::size_t shift = std::size_t(rows) * (*it - c0);
      if (ya) {
        const double a = A.val[p];
        const double* xa = XA + shift;
        for (int i = 0; i < rows; ++i) ya[i] += a * xa[i];
        count += rows;
      }
      if (ym) {
        const double m = M.val[p];
        const double* xm = XM + shift;
        for (int i = 0; i < rows; ++i) ym[i] += m * xm[i];
        count += rows;
      }
    }
  }
  return count;
}

// ---------------------------------------------------------------------------
// Space-time system

namespace {

using Map = Eigen::Map<Eigen::MatrixXd>;
using ConstMap = Eigen::Map<const Eigen::MatrixXd>;

double sparse_flops(const SpMat& m, long cols) { return double(m.nonZeros()) * cols; }

}  // namespace

SpaceTimeSystem::SpaceTimeSystem(TensorMode mode, int level,
                                 std::shared_ptr<const TemporalOperators> temporal, int spatial_dim)
    : mode_(mode), J_(level), dim_(spatial_dim), temporal_(std::move(temporal)) {
  if (!temporal_) throw ConfigurationError("temporal operators missing");
  const WaveletBasis& basis = *temporal_->basis;
  if (basis.finest() != J_) throw DimensionError("temporal basis level differs from system level");
  if (J_ < 1) throw DimensionError("system level must be at least 1");
  for (int l = 1; l <= J_; ++l) {
    spatial_.push_back(assemble_spatial(SpatialGrid(l, dim_)));
    if (l < J_) prolong_.push_back(prolongation(l, dim_));
  }
  const int j0 = basis.coarsest();
  if (mode_ == TensorMode::Full) {
    blocks_.push_back({J_, 0, basis.dim(), SpatialGrid(J_, dim_).size(), 0});
  } else {
    long offset = 0;
    for (int b = 0; b <= J_ - j0; ++b) {
      const int tl = j0 + b;
      TensorBlock blk{J_ - b, basis.block_offset(tl), basis.block_size(tl),
                      SpatialGrid(J_ - b, dim_).size(), offset};
      offset += blk.size();
      blocks_.push_back(blk);
    }
  }
  for (const TensorBlock& b : blocks_) size_ += b.size();
}

Eigen::VectorXd SpaceTimeSystem::apply(const Eigen::VectorXd& u) const {
  if (u.size() != size_) throw DimensionError("vector does not match the tensor space");
  const CsrMatrix& At = temporal_->A;
  const CsrMatrix& Mt = temporal_->M;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(size_);
  const int nb = int(blocks_.size());

  // Sources at least as fine in space as the target: spatial matrix on the
  // source level, restrictions down to the target level, temporal block.
  for (int b = 0; b < nb; ++b) {
    const TensorBlock& src = blocks_[b];
    ConstMap U(u.data() + src.offset, src.spatial_size, src.temporal_size);
    const FemMatrices& fem = spatial(src.spatial_level);
    Eigen::MatrixXd W1 = fem.M * U;
    Eigen::MatrixXd W2 = fem.A * U;
    flops_ += sparse_flops(fem.M, src.temporal_size) + sparse_flops(fem.A, src.temporal_size);
    for (int t = b; t < nb; ++t) {
      const TensorBlock& dst = blocks_[t];
      if (t > b) {
        const SpMat& P = prolongation_from(dst.spatial_level);
        W1 = P.transpose() * W1;
        W2 = P.transpose() * W2;
        flops_ += 2.0 * sparse_flops(P, src.temporal_size);
      }
      double* out = v.data() + dst.offset;
      flops_ += right_multiply_block(At, Mt, dst.temporal_offset, dst.temporal_size,
                                     src.temporal_offset, src.temporal_size, W1.data(), W2.data(),
                                     dst.spatial_size, out, out);
    }
  }

  // Sources coarser in space than the target: temporal block on the source
  // level, then prolongations accumulated from the coarsest source upwards,
  // then the spatial matrices of the target level.
  for (int t = 0; t + 1 < nb; ++t) {
    const TensorBlock& dst = blocks_[t];
    Eigen::MatrixXd accA, accM;
    for (int b = nb - 1; b > t; --b) {
      const TensorBlock& src = blocks_[b];
      if (accA.size() == 0) {
        accA = Eigen::MatrixXd::Zero(src.spatial_size, dst.temporal_size);
        accM = Eigen::MatrixXd::Zero(src.spatial_size, dst.temporal_size);
      } else {
        const SpMat& P = prolongation_from(src.spatial_level - 1);
        accA = P * accA;
        accM = P * accM;
        flops_ += 2.0 * sparse_flops(P, dst.temporal_size);
      }
      flops_ += right_multiply_block(At, Mt, dst.temporal_offset, dst.temporal_size,
                                     src.temporal_offset, src.temporal_size,
                                     u.data() + src.offset, u.data() + src.offset,
                                     src.spatial_size, accA.data(), accM.data());
    }
    const SpMat& P = prolongation_from(dst.spatial_level - 1);
    accA = P * accA;
    accM = P * accM;
    flops_ += 2.0 * sparse_flops(P, dst.temporal_size);
    const FemMatrices& fem = spatial(dst.spatial_level);
    Map V(v.data() + dst.offset, dst.spatial_size, dst.temporal_size);
    V.noalias() += fem.M * accA;
    V.noalias() += fem.A * accM;
    flops_ += sparse_flops(fem.M, dst.temporal_size) + sparse_flops(fem.A, dst.temporal_size);
  }
  return v;
}

Eigen::VectorXd SpaceTimeSystem::rhs_separable(const std::function<double(double)>& g,
                                               const std::function<double(double)>& q) const {
  const WaveletBasis& basis = *temporal_->basis;
  Eigen::VectorXd tload =
      basis.inverse_transform_transpose(hilbert_load_vector(J_, q, temporal_->horizon));
  Eigen::VectorXd out(size_);
  for (const TensorBlock& blk : blocks_) {
    Eigen::VectorXd sload = load_vector_separable(SpatialGrid(blk.spatial_level, dim_), g);
    Map B(out.data() + blk.offset, blk.spatial_size, blk.temporal_size);
    B = sload * tload.segment(blk.temporal_offset, blk.temporal_size).transpose();
  }
  return out;
}

Eigen::VectorXd SpaceTimeSystem::rhs(const std::function<double(const double*, double)>& f) const {
  const WaveletBasis& basis = *temporal_->basis;
  const SpatialGrid grid(J_, dim_);
  const int nx = grid.size();
  auto spatial_load = [&](double t) {
    return load_vector(grid, [&](const double* x) { return f(x, t); });
  };
  // rows: single-scale temporal index, columns: spatial nodes
  Eigen::MatrixXd tl = hilbert_load_matrix(J_, spatial_load, nx, temporal_->horizon);
  Eigen::MatrixXd full(nx, basis.dim());
  for (int i = 0; i < nx; ++i)
    full.row(i) = basis.inverse_transform_transpose(tl.col(i)).transpose();
  return project(full);
}

Eigen::MatrixXd SpaceTimeSystem::embed(const Eigen::VectorXd& u) const {
  if (u.size() != size_) throw DimensionError("vector does not match the tensor space");
  const int nt = temporal_->basis->dim();
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(SpatialGrid(J_, dim_).size(), nt);
  for (const TensorBlock& blk : blocks_) {
    ConstMap U(u.data() + blk.offset, blk.spatial_size, blk.temporal_size);
    Eigen::MatrixXd X = U;
    for (int l = blk.spatial_level; l < J_; ++l) X = prolongation_from(l) * X;
    full.middleCols(blk.temporal_offset, blk.temporal_size) = X;
  }
  return full;
}

Eigen::VectorXd SpaceTimeSystem::project(const Eigen::MatrixXd& full) const {
  if (full.rows() != SpatialGrid(J_, dim_).size() || full.cols() != temporal_->basis->dim())
    throw DimensionError("full-grid matrix has wrong shape");
  Eigen::VectorXd out(size_);
  for (const TensorBlock& blk : blocks_) {
    Eigen::MatrixXd X = full.middleCols(blk.temporal_offset, blk.temporal_size);
    for (int l = J_ - 1; l >= blk.spatial_level; --l) X = prolongation_from(l).transpose() * X;
    Map(out.data() + blk.offset, blk.spatial_size, blk.temporal_size) = X;
  }
  return out;
}

Eigen::MatrixXd SpaceTimeSystem::to_single_scale(const Eigen::VectorXd& u) const {
  Eigen::MatrixXd full = embed(u);
  Eigen::SparseMatrix<double> T = temporal_->basis->transform_matrix();
  return full * T.transpose();
}

Eigen::MatrixXd dense_kronecker_matrix(const SpaceTimeSystem& system) {
  const long n = system.size();
  if (n > 20000) throw DimensionError("system too large for a dense matrix");
  Eigen::MatrixXd m(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (long i = 0; i < n; ++i) {
    e[i] = 1.0;
    m.col(i) = system.apply(e);
    e[i] = 0.0;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Multilevel preconditioner

BpxPreconditioner::BpxPreconditioner(const SpaceTimeSystem& system, BpxOptions options)
    : system_(system), options_(options) {
  const int J = system.level();
  const TemporalOperators& top = system.temporal();
  const int j0 = top.basis->coarsest();
  tau_.assign(J + 1, J);
  mass_diag_.resize(J + 1);
  for (int l = 1; l <= J; ++l) {
    if (system.mode() == TensorMode::Sparse) tau_[l] = std::min(J, J + j0 - l);
    mass_diag_[l] = system.spatial(l).M.diagonal();
    if (options_.identity_temporal) continue;
    const int n = 1 << tau_[l];
    const double weight = options_.scale * std::ldexp(1.0, 2 * l);
    CsrMatrix X = leading_block(combine(top.A, 1.0, top.M, weight), n);
    SupportTable sup;
    sup.level.assign(top.supports.level.begin(), top.supports.level.begin() + n);
    sup.lo.assign(top.supports.lo.begin(), top.supports.lo.begin() + n);
    sup.hi.assign(top.supports.hi.begin(), top.supports.hi.begin() + n);
    sup.knots.assign(top.supports.knots.begin(), top.supports.knots.begin() + n);
    factors_[l] = std::make_shared<SparseLU>(X, nested_dissection_order(X.pattern(), sup));
  }
}

void BpxPreconditioner::temporal_solve(int level, Eigen::MatrixXd& R) const {
  if (options_.mass_scaling) R.array().colwise() /= mass_diag_[level].array();
  if (options_.identity_temporal) return;
  auto it = factors_.find(level);
  if (it == factors_.end()) throw ConfigurationError("temporal factorization missing");
  it->second->solve_rows(R.data(), int(R.rows()), int(R.rows()));
}

Eigen::VectorXd BpxPreconditioner::apply(const Eigen::VectorXd& r) const {
  if (r.size() != system_.size()) throw DimensionError("vector does not match the tensor space");
  const int J = system_.level();
  const auto& blocks = system_.blocks();

  // R[l]: restriction of r to spatial level l, temporal indices [0, 2^tau_l).
  std::vector<Eigen::MatrixXd> R(J + 1);
  for (int l = J; l >= 1; --l) {
    const int nx = system_.spatial(l).M.rows();
    const int nt = 1 << tau_[l];
    Eigen::MatrixXd X(nx, nt);
    int filled = 0;
    if (l < J) {
      X.leftCols(R[l + 1].cols()) = system_.prolongation_from(l).transpose() * R[l + 1];
      filled = int(R[l + 1].cols());
    }
    for (const TensorBlock& blk : blocks) {
      if (blk.spatial_level != l) continue;
      if (blk.temporal_offset != filled) throw DimensionError("tensor blocks out of order");
      X.middleCols(blk.temporal_offset, blk.temporal_size) =
          ConstMap(r.data() + blk.offset, blk.spatial_size, blk.temporal_size);
      filled += blk.temporal_size;
    }
    if (filled != nt) throw DimensionError("restriction does not cover the temporal space");
    R[l] = std::move(X);
  }
  for (int l = 1; l <= J; ++l) temporal_solve(l, R[l]);

  Eigen::VectorXd z(r.size());
  Eigen::MatrixXd acc = std::move(R[1]);
  for (int l = 1; l <= J; ++l) {
    if (l > 1) {
      Eigen::MatrixXd up = system_.prolongation_from(l - 1) * acc.leftCols(R[l].cols());
      acc = std::move(up);
      acc += R[l];
      R[l].resize(0, 0);
    }
    for (const TensorBlock& blk : blocks)
      if (blk.spatial_level == l)
        Map(z.data() + blk.offset, blk.spatial_size, blk.temporal_size) =
            acc.middleCols(blk.temporal_offset, blk.temporal_size);
  }
  return z;
}

// ---------------------------------------------------------------------------
// GMRES

GmresResult gmres_solve(const LinearMap& op, const LinearMap& preconditioner,
                        const Eigen::VectorXd& b, double tol, int max_iterations) {
  GmresResult res;
  res.x = Eigen::VectorXd::Zero(b.size());
  const double beta = b.norm();
  res.history.push_back(1.0);
  if (beta == 0.0) return res;

  std::vector<Eigen::VectorXd> V;
  V.push_back(b / beta);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(max_iterations + 1, max_iterations);
  std::vector<double> cs, sn;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(max_iterations + 1);
  g[0] = beta;
  int k = 0;
  bool converged = false;
  while (k < max_iterations) {
    Eigen::VectorXd w = op(preconditioner(V[k]));
    for (int i = 0; i <= k; ++i) {
      H(i, k) = V[i].dot(w);
      w -= H(i, k) * V[i];
    }
    H(k + 1, k) = w.norm();
    for (int i = 0; i < k; ++i) {
      const double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
      H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
      H(i, k) = t;
    }
    const double denom = std::hypot(H(k, k), H(k + 1, k));
    const double c = denom == 0.0 ? 1.0 : H(k, k) / denom;
    const double s = denom == 0.0 ? 0.0 : H(k + 1, k) / denom;
    cs.push_back(c);
    sn.push_back(s);
    const double hk1 = H(k + 1, k);
    H(k, k) = c * H(k, k) + s * hk1;
    H(k + 1, k) = 0.0;
    g[k + 1] = -s * g[k];
    g[k] = c * g[k];
    ++k;
    res.history.push_back(std::abs(g[k]) / beta);
    if (res.history.back() <= tol || hk1 == 0.0) {
      converged = true;
      break;
    }
    V.push_back(w / hk1);
  }
  Eigen::VectorXd y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
  Eigen::VectorXd combo = Eigen::VectorXd::Zero(b.size());
  for (int i = 0; i < k; ++i) combo += y[i] * V[i];
  V.clear();
  res.x = preconditioner(combo);
  res.iterations = k;
  if (!converged)
    throw NonConvergenceError("GMRES did not converge in " + std::to_string(max_iterations) +
                                  " iterations",
                              res.history);
  return res;
}

// ---------------------------------------------------------------------------
// Errors

double l2q_error_separable(const SpaceTimeSystem& system, const Eigen::VectorXd& u,
                           const std::function<double(double)>& g,
                           const std::function<double(double)>& w, double norm_u_squared) {
  const int J = system.level();
  const double T = system.temporal().horizon;
  Eigen::MatrixXd U = system.to_single_scale(u);
  const SpatialGrid grid(J, system.spatial_dim());
  Eigen::VectorXd gl = load_vector_separable(grid, g);

  const int nt = int(U.cols());
  const double h = T / nt;
  const QuadratureRule& q = gauss_legendre(10);
  Eigen::VectorXd wl = Eigen::VectorXd::Zero(nt);
  for (int c = 0; c < nt; ++c)
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
      const double s = q.nodes[i];
      const double val = q.weights[i] * h * w((c + s) * h);
      if (c >= 1) wl[c - 1] += val * (1.0 - s);
      wl[c] += val * s;
    }
  Eigen::SparseMatrix<double> Gt = hat_gram(J) * T;
  const double cross = gl.dot(U * wl);
  Eigen::MatrixXd MU = system.spatial(J).M * U;
  Eigen::MatrixXd UG = U * Gt;
  const double norm_h = (MU.array() * UG.array()).sum();
  const double e2 = norm_u_squared - 2.0 * cross + norm_h;
  return std::sqrt(std::max(0.0, e2));
}

// ---------------------------------------------------------------------------
// Condition numbers

namespace {

// Largest eigenvalue of a symmetric positive operator by Lanczos with full
// reorthogonalization.
std::pair<double, bool> lanczos_max(const LinearMap& op, int n, int max_steps) {
  std::vector<Eigen::VectorXd> Q;
  Eigen::VectorXd q = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i) q[i] += 0.1 * std::sin(1.0 + 7.0 * i);
  q.normalize();
  std::vector<double> alpha, beta;
  double prev = 0.0, current = 0.0;
  for (int k = 0; k < std::min(max_steps, n); ++k) {
    Q.push_back(q);
    Eigen::VectorXd w = op(q);
    alpha.push_back(q.dot(w));
    for (const auto& v : Q) w -= v.dot(w) * v;
    for (const auto& v : Q) w -= v.dot(w) * v;
    Eigen::MatrixXd Tm = Eigen::MatrixXd::Zero(k + 1, k + 1);
    for (int i = 0; i <= k; ++i) {
      Tm(i, i) = alpha[i];
      if (i < k) Tm(i, i + 1) = Tm(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Tm, Eigen::EigenvaluesOnly);
    current = es.eigenvalues().maxCoeff();
    const double b = w.norm();
    if (k > 2 && std::abs(current - prev) <= 1e-12 * std::abs(current)) return {current, true};
    if (b <= 1e-14 * std::abs(current)) return {current, true};
    beta.push_back(b);
    q = w / b;
    prev = current;
  }
  return {current, std::min(max_steps, n) >= n};
}

}  // namespace

ConditionEstimate diagonally_scaled_condition(const CsrMatrix& B, const SupportTable* supports,
                                              int dense_limit) {
  ConditionEstimate est;
  const int n = B.n;
  Eigen::VectorXd d(n);
  for (int r = 0; r < n; ++r) {
    d[r] = 0.0;
    for (int p = B.rowptr[r]; p < B.rowptr[r + 1]; ++p)
      if (B.col[p] == r) d[r] = B.val[p];
    if (!(d[r] > 0.0)) throw ConfigurationError("diagonal is not positive");
  }
  Eigen::VectorXd s = d.cwiseSqrt().cwiseInverse();
  if (n <= dense_limit) {
    Eigen::MatrixXd S = s.asDiagonal() * B.dense() * s.asDiagonal();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(S);
    est.sigma_max = svd.singularValues()(0);
    est.sigma_min = svd.singularValues()(n - 1);
    est.value = est.sigma_max / est.sigma_min;
    est.converged = true;
    return est;
  }
  CsrMatrix S = B;
  for (int r = 0; r < n; ++r)
    for (int p = S.rowptr[r]; p < S.rowptr[r + 1]; ++p) S.val[p] *= s[r] * s[S.col[p]];
  std::vector<int> order;
  if (supports) order = nested_dissection_order(S.pattern(), *supports);
  SparseLU lu(S, order);
  CsrMatrix St;  // transpose of S
  St.n = n;
  {
    std::vector<std::vector<std::pair<int, double>>> rows(n);
    for (int r = 0; r < n; ++r)
      for (int p = S.rowptr[r]; p < S.rowptr[r + 1]; ++p) rows[S.col[p]].push_back({r, S.val[p]});
    for (int r = 0; r < n; ++r) {
      std::sort(rows[r].begin(), rows[r].end());
      for (auto [c, v] : rows[r]) {
        St.col.push_back(c);
        St.val.push_back(v);
      }
      St.rowptr.push_back(int(St.col.size()));
    }
  }
  auto normal = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return St * (S * x); };
  auto inverse_normal = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return lu.solve(lu.solve_transpose(x));
  };
  auto [lmax, ok1] = lanczos_max(normal, n, 300);
  auto [lmin_inv, ok2] = lanczos_max(inverse_normal, n, 300);
  est.sigma_max = std::sqrt(lmax);
  est.sigma_min = 1.0 / std::sqrt(lmin_inv);
  est.value = est.sigma_max / est.sigma_min;
  est.converged = ok1 && ok2;
  return est;
}

}  // namespace stg
