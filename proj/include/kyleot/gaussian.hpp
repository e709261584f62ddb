#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace kyleot {

using Vec2 = std::array<double, 2>;

// Symmetric 2x2 matrix stored as (xx, xy, yy).
struct Mat2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;

  double det() const { return xx * yy - xy * xy; }
  double trace() const { return xx + yy; }

  // Positive semidefinite up to a relative tolerance on the diagonal scale.
  bool psd(double tol = 1e-12) const {
    const double scale = std::max({std::abs(xx), std::abs(yy), 1e-300});
    return xx >= -tol * scale && yy >= -tol * scale && det() >= -tol * scale * scale;
  }

  // Solve M v = b for symmetric M.
  Vec2 solve(const Vec2& b) const {
    const double d = det();
    return {(yy * b[0] - xy * b[1]) / d, (xx * b[1] - xy * b[0]) / d};
  }
};

inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }

inline double quad_form(const Mat2& m, const Vec2& v) {
  return m.xx * v[0] * v[0] + 2.0 * m.xy * v[0] * v[1] + m.yy * v[1] * v[1];
}

inline double normal_pdf(double x, double mean, double stddev) {
  const double z = (x - mean) / stddev;
  return std::exp(-0.5 * z * z) / (stddev * 2.506628274631000502415765284811);
}

inline double normal_cdf(double x, double mean = 0.0, double stddev = 1.0) {
  return 0.5 * std::erfc(-(x - mean) / (stddev * 1.4142135623730950488016887242097));
}

// Characteristic function convention used throughout: E[exp(-i theta.X)] for a
// bivariate Gaussian X ~ N(mean, cov).
inline std::complex<double> gaussian_cf(const Vec2& theta, const Vec2& mean, const Mat2& cov) {
  const double phase = -dot(theta, mean);
  const double decay = -0.5 * quad_form(cov, theta);
  return std::exp(std::complex<double>(decay, phase));
}

}  // namespace kyleot
