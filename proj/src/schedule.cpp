#include "kyleot/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kyleot {

PiecewiseConstantSchedule::PiecewiseConstantSchedule() : t_break_{0.0}, value_{0.0} {}

PiecewiseConstantSchedule::PiecewiseConstantSchedule(std::vector<double> t_break, std::vector<double> value)
    : t_break_(std::move(t_break)), value_(std::move(value)) {
  if (t_break_.empty() || t_break_.size() != value_.size())
    throw std::invalid_argument("schedule: need matching, nonempty breakpoints and values");
  if (t_break_.front() != 0.0) throw std::invalid_argument("schedule: first breakpoint must be 0");
  for (std::size_t i = 1; i < t_break_.size(); ++i)
    if (!(t_break_[i] > t_break_[i - 1])) throw std::invalid_argument("schedule: breakpoints must increase");
  for (double v : value_)
    if (!std::isfinite(v)) throw std::invalid_argument("schedule: values must be finite");
}

PiecewiseConstantSchedule PiecewiseConstantSchedule::constant(double value) {
  return PiecewiseConstantSchedule({0.0}, {value});
}

double PiecewiseConstantSchedule::at(double t) const {
  auto it = std::upper_bound(t_break_.begin(), t_break_.end(), t);
  const std::size_t idx = static_cast<std::size_t>(it - t_break_.begin());
  return value_[idx == 0 ? 0 : idx - 1];
}

double PiecewiseConstantSchedule::integral_sq(double a, double b) const {
  if (b <= a) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < t_break_.size(); ++i) {
    const double lo = std::max(a, t_break_[i]);
    const double hi = std::min(b, i + 1 < t_break_.size() ? t_break_[i + 1] : b);
    if (hi > lo) acc += value_[i] * value_[i] * (hi - lo);
  }
  return acc;
}

bool PiecewiseConstantSchedule::nonnegative() const {
  for (double v : value_)
    if (v < 0.0) return false;
  return true;
}

}  // namespace kyleot
