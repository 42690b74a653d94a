#include "fracspec/scalar_map.hpp"

#include <cmath>
#include <sstream>

namespace fracspec {

namespace {

std::string label(const char* name, std::initializer_list<double> args) {
  std::ostringstream os;
  os << name << '(';
  bool first = true;
  for (double a : args) {
    if (!first) os << ", ";
    os << a;
    first = false;
  }
  os << ')';
  return os.str();
}

}  // namespace

ScalarMap ScalarMap::identity() {
  return ScalarMap("identity", [](double l) { return std::complex<double>(l, 0.0); }, true);
}

ScalarMap ScalarMap::power(double alpha) {
  return ScalarMap(
      label("power", {alpha}),
      [alpha](double l) {
        if (alpha == 0.0) return std::complex<double>(1.0, 0.0);
        return std::complex<double>(std::pow(l, alpha), 0.0);
      },
      true);
}

ScalarMap ScalarMap::heat(double t) {
  return ScalarMap(label("heat", {t}), [t](double l) { return std::complex<double>(std::exp(-t * l), 0.0); },
                   true);
}

ScalarMap ScalarMap::unitary_frac(double t, double alpha) {
  return ScalarMap(label("unitary_frac", {t, alpha}),
                   [t, alpha](double l) { return std::polar(1.0, t * std::pow(l, alpha)); }, false);
}

ScalarMap ScalarMap::viscous(double eps, double t, double alpha) {
  return ScalarMap(label("viscous", {eps, t, alpha}),
                   [eps, t, alpha](double l) {
                     return std::polar(std::exp(-eps * t * l * l), t * std::pow(l, alpha));
                   },
                   false);
}

ScalarMap ScalarMap::shifted_power(double alpha) {
  return ScalarMap(label("shifted_power", {alpha}),
                   [alpha](double l) { return std::complex<double>(std::pow(l + 1.0, alpha), 0.0); }, true);
}

ScalarMap ScalarMap::custom(std::string name, Function fn, bool real_valued) {
  return ScalarMap(std::move(name), std::move(fn), real_valued);
}

ScalarMap ScalarMap::operator*(const ScalarMap& other) const {
  auto f = fn_;
  auto g = other.fn_;
  return ScalarMap(name_ + "*" + other.name_, [f, g](double l) { return f(l) * g(l); },
                   real_ && other.real_);
}

}  // namespace fracspec
