#pragma once

#include <cmath>
#include <vector>

#include "stg/hilbert_kernel.hpp"
#include "stg/wavelet_compression.hpp"

namespace stg::testing {

// Slope of log |entry| against log distance for pairs of wavelets of one
// level placed symmetrically about 1/2, with centre distances in
// [min_distance, max_distance].
inline double decay_exponent(int moments, int level, TemporalKind kind,
                             double min_distance = 0.15, double max_distance = 0.65) {
  WaveletBasis basis(moments, level);
  const SupportTable sup = build_supports(basis);
  TemporalAssembler assembler;
  const int off = basis.block_offset(level), n = basis.block_size(level);
  std::vector<double> xs, ys;
  for (int k = n / 2 - 1; k >= 3; --k) {
    const int r = off + k - 1, c = off + n - k;
    const double d = 0.5 * (sup.lo[c] + sup.hi[c] - sup.lo[r] - sup.hi[r]);
    if (d < min_distance || d > max_distance) continue;
    const double v = assembler.entry(kind, basis.expansion(r), basis.expansion(c));
    xs.push_back(std::log(d));
    ys.push_back(std::log(std::abs(v)));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= double(xs.size());
  my /= double(xs.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return -sxy / sxx;
}

}  // namespace stg::testing
