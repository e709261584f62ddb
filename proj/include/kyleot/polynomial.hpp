#pragma once

#include <cstddef>
#include <vector>

namespace kyleot {

// Dense polynomial in one variable, coefficient of x^k at index k.
struct Polynomial {
  std::vector<double> coef;

  Polynomial() = default;
  explicit Polynomial(std::vector<double> c) : coef(std::move(c)) {}

  int degree() const {
    for (int k = static_cast<int>(coef.size()) - 1; k >= 0; --k)
      if (coef[static_cast<std::size_t>(k)] != 0.0) return k;
    return 0;
  }

  double operator()(double x) const {
    double acc = 0.0;
    for (std::size_t k = coef.size(); k-- > 0;) acc = acc * x + coef[k];
    return acc;
  }

  Polynomial derivative() const {
    if (coef.size() <= 1) return Polynomial{{0.0}};
    std::vector<double> d(coef.size() - 1);
    for (std::size_t k = 1; k < coef.size(); ++k) d[k - 1] = coef[k] * static_cast<double>(k);
    return Polynomial{std::move(d)};
  }

  Polynomial antiderivative() const {  // constant term 0
    std::vector<double> a(coef.size() + 1, 0.0);
    for (std::size_t k = 0; k < coef.size(); ++k) a[k + 1] = coef[k] / static_cast<double>(k + 1);
    return Polynomial{std::move(a)};
  }

  // Coefficients of p(a*x + b).
  Polynomial compose_affine(double a, double b) const {
    std::vector<double> out(coef.size(), 0.0);
    // Horner on the shifted variable: out = ((c_n)*(ax+b) + c_{n-1})*(ax+b) + ...
    for (std::size_t k = coef.size(); k-- > 0;) {
      // out = out*(a x + b) + c_k
      std::vector<double> next(out.size(), 0.0);
      for (std::size_t j = 0; j < out.size(); ++j) {
        if (out[j] == 0.0) continue;
        next[j] += out[j] * b;
        if (j + 1 < next.size()) next[j + 1] += out[j] * a;
      }
      next[0] += coef[k];
      out = std::move(next);
    }
    return Polynomial{std::move(out)};
  }
};

}  // namespace kyleot
