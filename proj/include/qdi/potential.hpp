#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace qdi {

/// Even pair potential with superlinear growth.
///   quadratic(c): V(t) = c t^2 / 2
///   quartic(a,b): V(t) = a t^2 / 2 + b t^4,  b > 0 or (b = 0 and a > 0)
class Potential {
 public:
  enum class Family { quadratic, quartic };

  static Potential quadratic(double c = 1.0) {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("quadratic potential needs c > 0");
    return Potential(Family::quadratic, c, 0.0);
  }

  static Potential quartic(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b) || b < 0.0 || (b == 0.0 && !(a > 0.0)))
      throw std::invalid_argument("quartic potential needs b > 0, or b = 0 with a > 0");
    return Potential(Family::quartic, a, b);
  }

  Family family() const { return family_; }
  double a() const { return a_; }
  double b() const { return b_; }

  double value(double t) const {
    const double t2 = t * t;
    return 0.5 * a_ * t2 + b_ * t2 * t2;
  }

  double derivative(double t) const { return a_ * t + 4.0 * b_ * t * t * t; }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    if (family_ == Family::quadratic)
      os << "quadratic:" << a_;
    else
      os << "quartic:" << a_ << ":" << b_;
    return os.str();
  }

  friend bool operator==(const Potential&, const Potential&) = default;

 private:
  Potential(Family f, double a, double b) : family_(f), a_(a), b_(b) {}

  Family family_;
  double a_;
  double b_;
};

}  // namespace qdi
