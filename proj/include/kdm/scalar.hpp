#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>

namespace kdm {

using cd = std::complex<double>;
using rational = boost::multiprecision::mpq_rational;

// Gaussian rational re + i*im, exact.
struct QQi {
  rational re, im;

  QQi() = default;
  QQi(int r) : re(r) {}
  QQi(long r) : re(r) {}
  QQi(rational r) : re(std::move(r)) {}
  QQi(rational r, rational i) : re(std::move(r)), im(std::move(i)) {}

  QQi& operator+=(const QQi& o) { re += o.re; im += o.im; return *this; }
  QQi& operator-=(const QQi& o) { re -= o.re; im -= o.im; return *this; }
  QQi& operator*=(const QQi& o) {
    rational r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = std::move(r);
    return *this;
  }
  QQi& operator/=(const QQi& o) {
    rational n = o.re * o.re + o.im * o.im;
    if (n == 0) throw std::domain_error("QQi division by zero");
    rational r = (re * o.re + im * o.im) / n;
    im = (im * o.re - re * o.im) / n;
    re = std::move(r);
    return *this;
  }
  friend QQi operator+(QQi a, const QQi& b) { return a += b; }
  friend QQi operator-(QQi a, const QQi& b) { return a -= b; }
  friend QQi operator*(QQi a, const QQi& b) { return a *= b; }
  friend QQi operator/(QQi a, const QQi& b) { return a /= b; }
  friend QQi operator-(const QQi& a) { return QQi(-a.re, -a.im); }
  friend bool operator==(const QQi& a, const QQi& b) { return a.re == b.re && a.im == b.im; }
  friend bool operator!=(const QQi& a, const QQi& b) { return !(a == b); }
  friend std::ostream& operator<<(std::ostream& os, const QQi& x) {
    os << x.re;
    if (x.im != 0) os << (x.im > 0 ? "+" : "") << x.im << "i";
    return os;
  }
};

inline QQi conj(const QQi& x) { return QQi(x.re, -x.im); }

template <class S>
struct scalar_traits;

template <>
struct scalar_traits<cd> {
  static constexpr bool exact = false;
  static constexpr const char* name = "complex-double";
  static cd ratio(long p, long q = 1) { return cd(double(p) / double(q), 0.0); }
  static cd gauss(long re, long im, long q = 1) { return cd(double(re) / q, double(im) / q); }
  static double mag(const cd& x) { return std::abs(x); }
  static bool is_zero(const cd& x) { return std::abs(x) < 1e-13; }
  static cd conj(const cd& x) { return std::conj(x); }
  static cd to_cd(const cd& x) { return x; }
  static cd from_cd(const cd& x) { return x; }
};

template <>
struct scalar_traits<QQi> {
  static constexpr bool exact = true;
  static constexpr const char* name = "exact-gaussian-rational";
  static QQi ratio(long p, long q = 1) { return QQi(rational(p, q)); }
  static QQi gauss(long re, long im, long q = 1) { return QQi(rational(re, q), rational(im, q)); }
  static double mag(const QQi& x) {
    double r = x.re.convert_to<double>(), i = x.im.convert_to<double>();
    return std::hypot(r, i);
  }
  static bool is_zero(const QQi& x) { return x.re == 0 && x.im == 0; }
  static QQi conj(const QQi& x) { return kdm::conj(x); }
  static cd to_cd(const QQi& x) { return cd(x.re.convert_to<double>(), x.im.convert_to<double>()); }
  // Only used for values known to be dyadic/small rationals (e.g. test data).
  static QQi from_cd(const cd& x) {
    auto approx = [](double v) {
      // continued-fraction style rational recovery for small denominators
      for (long q = 1; q <= 4096; ++q) {
        double p = std::round(v * double(q));
        if (std::abs(p / double(q) - v) < 1e-12) return rational(static_cast<long>(p), q);
      }
      return rational(static_cast<long>(std::round(v * 1e6)), 1000000L);
    };
    return QQi(approx(x.real()), approx(x.imag()));
  }
};

template <class S>
inline S zero() { return S(0); }
template <class S>
inline S one() { return S(1); }

template <class S>
inline std::string to_string(const S& x) {
  std::ostringstream os;
  if constexpr (scalar_traits<S>::exact) {
    os << x;
  } else {
    os.precision(12);
    os << x.real();
    if (x.imag() != 0.0) os << (x.imag() > 0 ? "+" : "") << x.imag() << "i";
  }
  return os.str();
}

}  // namespace kdm

namespace Eigen {
template <>
struct NumTraits<kdm::QQi> : GenericNumTraits<kdm::QQi> {
  typedef kdm::QQi Real;
  typedef kdm::QQi NonInteger;
  typedef kdm::QQi Nested;
  enum {
    IsInteger = 0,
    IsSigned = 1,
    IsComplex = 0,
    RequireInitialization = 1,
    ReadCost = 10,
    AddCost = 40,
    MulCost = 100
  };
  static inline Real epsilon() { return Real(0); }
  static inline Real dummy_precision() { return Real(0); }
  static inline int digits10() { return 0; }
};
}  // namespace Eigen
