#pragma once

#include <vector>

namespace kyleot {

// Right-open piecewise-constant function on [0, infinity): value(i) holds on
// [t_break(i), t_break(i+1)), the last value extends to infinity. Breakpoints
// start at 0 and increase strictly. Squared integrals are exact.
class PiecewiseConstantSchedule {
 public:
  PiecewiseConstantSchedule();  // identically zero
  PiecewiseConstantSchedule(std::vector<double> t_break, std::vector<double> value);

  static PiecewiseConstantSchedule constant(double value);

  double at(double t) const;
  double integral_sq(double a, double b) const;  // exact on each piece

  const std::vector<double>& breakpoints() const { return t_break_; }
  const std::vector<double>& values() const { return value_; }

  bool nonnegative() const;

 private:
  std::vector<double> t_break_;
  std::vector<double> value_;
};

}  // namespace kyleot
