#pragma once

#include <complex>
#include <functional>
#include <string>

namespace fracspec {

/// A named scalar function of the spectral variable lambda >= 0.
///
/// The catalog covers the maps used across the toolkit; `custom` wraps any
/// bounded function. Maps are cheap value types.
class ScalarMap {
 public:
  using Function = std::function<std::complex<double>(double)>;

  static ScalarMap identity();
  /// lambda^alpha. Negative exponents are allowed here; they are singular on
  /// a zero eigenvalue, which apply_function reports.
  static ScalarMap power(double alpha);
  /// e^{-t lambda}
  static ScalarMap heat(double t);
  /// e^{i t lambda^alpha}
  static ScalarMap unitary_frac(double t, double alpha);
  /// e^{t(-eps lambda^2 + i lambda^alpha)}
  static ScalarMap viscous(double eps, double t, double alpha);
  /// (lambda + 1)^alpha, defined for every real alpha.
  static ScalarMap shifted_power(double alpha);
  static ScalarMap custom(std::string name, Function fn, bool real_valued);

  std::complex<double> operator()(double lambda) const { return fn_(lambda); }
  const std::string& name() const noexcept { return name_; }
  bool is_real() const noexcept { return real_; }

  /// Pointwise product (g f)(lambda) = g(lambda) f(lambda).
  ScalarMap operator*(const ScalarMap& other) const;

 private:
  ScalarMap(std::string name, Function fn, bool real) : name_(std::move(name)), fn_(std::move(fn)), real_(real) {}

  std::string name_;
  Function fn_;
  bool real_;
};

}  // namespace fracspec
