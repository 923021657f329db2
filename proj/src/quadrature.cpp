#include "khess/quadrature.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

namespace khess {

GaussLegendre::GaussLegendre(int order) {
  if (order < 1 || order > 512) throw std::domain_error("GaussLegendre: bad order");
  nodes_.resize(order);
  weights_.resize(order);
  const int m = (order + 1) / 2;
  for (int i = 1; i <= m; ++i) {
    // Chebyshev-angle initial guess, then Newton on P_order(z)
    double z = std::cos(M_PI * (i - 0.25) / (order + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < order; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
      }
      pp = order * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::fabs(dz) < 1e-15) break;
    }
    nodes_[i - 1] = -z;
    nodes_[order - i] = z;
    const double w = 2.0 / ((1.0 - z * z) * pp * pp);
    weights_[i - 1] = w;
    weights_[order - i] = w;
  }
}

const GaussLegendre& GaussLegendre::cached(int order) {
  static std::mutex mtx;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, GaussLegendre(order)).first;
  return it->second;
}

}  // namespace khess
