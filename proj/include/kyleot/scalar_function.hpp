#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <utility>

#include "kyleot/polynomial.hpp"

namespace kyleot {

// User-supplied scalar function with an optional analytic derivative and an
// optional polynomial representation. Without a derivative, central
// differences with step h = 1e-6 * (1 + |x|) are used.
class ScalarFunction {
 public:
  ScalarFunction() = default;

  explicit ScalarFunction(std::function<double(double)> f,
                          std::function<double(double)> df = nullptr)
      : f_(std::move(f)), df_(std::move(df)) {}

  static ScalarFunction identity() {
    ScalarFunction s([](double x) { return x; }, [](double) { return 1.0; });
    s.poly_ = Polynomial{{0.0, 1.0}};
    return s;
  }

  static ScalarFunction from_polynomial(Polynomial p) {
    Polynomial dp = p.derivative();
    ScalarFunction s([p](double x) { return p(x); }, [dp](double x) { return dp(x); });
    s.poly_ = std::move(p);
    return s;
  }

  double operator()(double x) const { return f_(x); }

  double derivative(double x) const {
    if (df_) return df_(x);
    const double h = 1e-6 * (1.0 + std::abs(x));
    return (f_(x + h) - f_(x - h)) / (2.0 * h);
  }

  bool has_analytic_derivative() const { return static_cast<bool>(df_); }
  const std::optional<Polynomial>& polynomial() const { return poly_; }
  bool valid() const { return static_cast<bool>(f_); }

 private:
  std::function<double(double)> f_;
  std::function<double(double)> df_;
  std::optional<Polynomial> poly_;
};

}  // namespace kyleot
