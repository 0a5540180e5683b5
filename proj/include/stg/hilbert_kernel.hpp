#pragma once

#include <array>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "stg/temporal_mra.hpp"

namespace stg {

class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class KernelKind { K, KPlus, KMinus, KMinusOne };

// Kernels of the modified Hilbert transform on (0,1). K uses the signed
// difference s - t in its second term; KMinus uses |s - t|.
double kernel_eval(KernelKind which, double s, double t);

enum class TemporalKind { Stiffness, Mass };

// Eigenfunctions of the modified Hilbert transform on (0,T).
struct EigenPair {
  long index;
  double horizon = 1.0;

  double omega() const;
  double lambda() const { return omega() * omega(); }
  double V(double t) const;
  double W(double t) const;
};

// <phi, V_m> and <phi, W_m> in L2(0,T) for the hat phi_{level,node}
// dilated to (0,T), in closed form.
double hat_sine_coefficient(int level, int node, long m, double horizon = 1.0);
double hat_cosine_coefficient(int level, int node, long m, double horizon = 1.0);

// (H_T v)(t) = sum_k v_k W_k(t) for v = sum_k v_k V_k.
std::function<double(double)> ht_apply_series(const std::vector<double>& coeffs,
                                              double horizon = 1.0);

// Truncated eigen-series representation of the temporal bilinear forms on
// (0,1). Used as an independent oracle for the quadrature assembly.
class SeriesOracle {
 public:
  explicit SeriesOracle(long terms) : terms_(terms) {}

  Eigen::MatrixXd single_scale(int level, TemporalKind kind) const;
  double entry(TemporalKind kind, const HatExpansion& row, const HatExpansion& col) const;
  double hhalf_norm_squared(const HatExpansion& f) const;

 private:
  long terms_;
};

enum class LogPart { Plus, Minus };

// int_{y0}^{y1} tau^power int_{x0}^{x1} k(s,t) ds dt with tau = (t-y0)/(y1-y0)
// and k = ln tan(pi(s+t)/4) (Plus) or ln tan(pi|s-t|/4) (Minus).
double log_cell_integral(LogPart part, double x0, double x1, double y0, double y1, int power);

// Same with the full kernel K_{-1}.
double kminus1_cell_integral(double x0, double x1, double y0, double y1, int power);

// Quadrature assembly of the temporal bilinear forms on (0,1):
//   A[r,c] = int c'(t) int K_{-1}(s,t) r'(s) ds dt,
//   M[r,c] = int c(t)  int K_{-1}(s,t) r'(s) ds dt.
// Cell integrals are translation invariant, so they are memoized per pair
// of levels in Toeplitz (s - t) and Hankel (s + t) tables.
class TemporalAssembler {
 public:
  static constexpr int kMaxPower = 7;

  double entry(TemporalKind kind, const HatExpansion& row, const HatExpansion& col);
  double entry(TemporalKind kind, int row_level, const std::vector<CellPiece>& row,
               int col_level, const std::vector<CellPiece>& col);

  // int_{Y} tau^power int_{X} K_{-1} ds dt for cell rc of level row_level
  // (variable s) and cell cc of level col_level (variable t).
  double cell(int row_level, int rc, int col_level, int cc, int power);

  std::size_t computed_integrals() const { return computed_; }

 private:
  struct Table {
    int fine_level = 0;
    std::array<std::vector<double>, kMaxPower + 1> minus;
    std::array<std::vector<double>, kMaxPower + 1> plus;
  };
  std::map<std::pair<int, int>, Table> tables_;
  std::size_t computed_ = 0;

  Table& table(int row_level, int col_level);
};

Eigen::MatrixXd assemble_dense(int level, TemporalKind kind);
Eigen::MatrixXd assemble_dense(const WaveletBasis& basis, TemporalKind kind);

// Load vector <f, H_T phi_{level,k}>_{L2(0,T)}, k = 1..2^level.
Eigen::VectorXd hilbert_load_vector(int level, const std::function<double(double)>& f,
                                    double horizon);
// The same for every component of a vector valued f; row k, column i holds
// <f_i, H_T phi_{level,k}>.
Eigen::MatrixXd hilbert_load_matrix(int level,
                                    const std::function<Eigen::VectorXd(double)>& f,
                                    int components, double horizon);

struct NormError {
  double value = 0.0;
  double tail = 0.0;
  bool tail_warning = false;
};

// Errors of the piecewise linear function with nodal values uh at t_1..t_N
// on (0,T), u_h(0) = 0.
double l2_error(const std::function<double(double)>& u, const Eigen::VectorXd& uh,
                double horizon);
double h1_error(const std::function<double(double)>& u, const std::function<double(double)>& du,
                const Eigen::VectorXd& uh, double horizon);
// Spectral H^{1/2} error sqrt(sum_k lambda_k^{1/2} e_k^2), e_k = <u - u_h, V_k>,
// truncated after `terms` modes; the tail is extrapolated from the last half.
NormError hhalf_error(const std::function<double(long)>& exact_sine_coeff,
                      const Eigen::VectorXd& uh, double horizon, long terms);

}  // namespace stg
