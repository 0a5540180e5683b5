#include "stg/quadrature.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace stg {

namespace {

template <unsigned N>
QuadratureRule make_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < x.size(); ++i) {
    pts.emplace_back(x[i], w[i]);
    if (x[i] != 0.0) pts.emplace_back(-x[i], w[i]);
  }
  std::sort(pts.begin(), pts.end());
  QuadratureRule r;
  for (auto [xi, wi] : pts) {
    r.nodes.push_back(0.5 * (xi + 1.0));
    r.weights.push_back(0.5 * wi);
  }
  return r;
}

QuadratureRule build(int n) {
  switch (n) {
    case 2: return make_rule<2>();
    case 3: return make_rule<3>();
    case 4: return make_rule<4>();
    case 5: return make_rule<5>();
    case 6: return make_rule<6>();
    case 8: return make_rule<8>();
    case 10: return make_rule<10>();
    case 12: return make_rule<12>();
    case 16: return make_rule<16>();
    case 20: return make_rule<20>();
    default: throw std::invalid_argument("unsupported Gauss-Legendre order");
  }
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
  static std::map<int, QuadratureRule> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build(n)).first;
  return it->second;
}

}  // namespace stg
