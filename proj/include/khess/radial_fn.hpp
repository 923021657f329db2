#ifndef KHESS_RADIAL_FN_HPP
#define KHESS_RADIAL_FN_HPP

#include <functional>
#include <stdexcept>

namespace khess {

// A radially symmetric scalar function with first derivative. The second
// derivative is optional; consumers fall back to finite differences when
// it is absent.
class RadialFunction {
 public:
  virtual ~RadialFunction() = default;
  virtual double value(double r) const = 0;
  virtual double deriv(double r) const = 0;
  virtual bool has_second_deriv() const { return false; }
  virtual double second_deriv(double /*r*/) const {
    throw std::logic_error("RadialFunction: second derivative not provided");
  }
};

// Adapter for ad-hoc functions in tests and composition.
class LambdaRadialFunction final : public RadialFunction {
 public:
  LambdaRadialFunction(std::function<double(double)> value_fn,
                       std::function<double(double)> deriv_fn)
      : value_(std::move(value_fn)), deriv_(std::move(deriv_fn)) {}
  double value(double r) const override { return value_(r); }
  double deriv(double r) const override { return deriv_(r); }

 private:
  std::function<double(double)> value_, deriv_;
};

class ConstantRadialFunction final : public RadialFunction {
 public:
  explicit ConstantRadialFunction(double c) : c_(c) {}
  double value(double) const override { return c_; }
  double deriv(double) const override { return 0.0; }
  bool has_second_deriv() const override { return true; }
  double second_deriv(double) const override { return 0.0; }

 private:
  double c_;
};

}  // namespace khess

#endif
