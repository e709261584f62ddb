#pragma once

#include <vector>

namespace kyleot {

// Gauss-Hermite rule for weight exp(-x^2): integral f(x) e^{-x^2} dx ~ sum w_i f(x_i).
struct GaussHermiteRule {
  std::vector<double> node;
  std::vector<double> weight;  // includes the sqrt(pi) mass
};

// Cached rule of the given order (orders are cached process-wide, thread-safe).
const GaussHermiteRule& gauss_hermite(int order);

// E[f(m + s*Z)] with Z standard normal, for callable f.
template <typename F>
double gauss_expectation(const F& f, double mean, double stddev, int order) {
  const GaussHermiteRule& rule = gauss_hermite(order);
  const double scale = stddev * 1.4142135623730950488016887242097;  // sqrt(2)*s
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.node.size(); ++i) acc += rule.weight[i] * f(mean + scale * rule.node[i]);
  return acc / 1.7724538509055160272981674833411;  // sqrt(pi)
}

// As above but doubling the order until the relative change drops below rtol.
template <typename F>
double gauss_expectation_adaptive(const F& f, double mean, double stddev, int start_order, double rtol,
                                  int max_order = 512) {
  double prev = gauss_expectation(f, mean, stddev, start_order);
  for (int order = 2 * start_order; order <= max_order; order *= 2) {
    const double cur = gauss_expectation(f, mean, stddev, order);
    if (std::abs(cur - prev) <= rtol * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace kyleot
