#include "kyleot/gauss_hermite.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace kyleot {
namespace {

// Orthonormal Hermite recurrence (weight e^{-x^2}) evaluated at x:
// returns p_n(x) and p_{n-1}(x), stable for large n.
void orthonormal_hermite(int n, double x, double& pn, double& pnm1) {
  double p0 = 0.7511255444649424828587030047762;  // pi^{-1/4}
  double p1 = 1.4142135623730950488016887242097 * x * p0;
  if (n == 0) {
    pn = p0;
    pnm1 = 0.0;
    return;
  }
  for (int k = 1; k < n; ++k) {
    const double p2 = x * std::sqrt(2.0 / (k + 1.0)) * p1 - std::sqrt(k / (k + 1.0)) * p0;
    p0 = p1;
    p1 = p2;
  }
  pn = p1;
  pnm1 = p0;
}

GaussHermiteRule build_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
  GaussHermiteRule rule;
  rule.node.resize(n);
  rule.weight.resize(n);

  const int half = (n + 1) / 2;
  double x = 0.0;
  for (int i = 0; i < half; ++i) {
    // Initial guesses for the i-th largest root, then Newton.
    if (i == 0) {
      x = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      x -= 1.14 * std::pow(static_cast<double>(n), 0.426) / x;
    } else if (i == 2) {
      x = 1.86 * x - 0.86 * rule.node[0];
    } else if (i == 3) {
      x = 1.91 * x - 0.91 * rule.node[1];
    } else {
      x = 2.0 * x - rule.node[i - 2];
    }
    double pn = 0.0, pnm1 = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
      orthonormal_hermite(n, x, pn, pnm1);
      const double dpn = std::sqrt(2.0 * n) * pnm1;  // p_n'(x)
      const double dx = pn / dpn;
      x -= dx;
      if (std::abs(dx) <= 1e-15 * (1.0 + std::abs(x))) break;
    }
    orthonormal_hermite(n, x, pn, pnm1);
    rule.node[i] = x;
    rule.weight[i] = 2.0 / (2.0 * n * pnm1 * pnm1);
  }
  // Mirror to the negative half; enforce exact symmetry.
  for (int i = 0; i < half; ++i) {
    rule.node[n - 1 - i] = -rule.node[i];
    rule.weight[n - 1 - i] = rule.weight[i];
  }
  if (n % 2 == 1) rule.node[half - 1] = 0.0;
  // Ascending node order.
  for (int i = 0; i < n / 2; ++i) {
    std::swap(rule.node[i], rule.node[n - 1 - i]);
    std::swap(rule.weight[i], rule.weight[n - 1 - i]);
  }
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(int order) {
  static std::mutex mutex;
  static std::map<int, GaussHermiteRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build_rule(order)).first;
  return it->second;
}

}  // namespace kyleot
