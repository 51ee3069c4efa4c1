#pragma once

// Bessel J_nu, modified Bessel I_nu and Kelvin ber_nu / bei_nu of the first
// kind for integer and half-integer orders, with first and second
// derivatives.
//
// Evaluation strategy
//   integer J      ascending series for x <= 2, Miller downward recurrence
//                  normalised by J_0 + 2 sum J_2k = 1 otherwise
//   integer I      ascending series (all terms positive, no cancellation)
//   half-integer   spherical reduction J_{n+1/2} = sqrt(2x/pi) j_n(x) and
//                  I_{n+1/2} = sqrt(2x/pi) i_n(x); j_n, i_n from their short
//                  series for x <= 1, otherwise Miller recurrence normalised
//                  by the closed forms sin x / x, sinh x / x
//   Kelvin         real form of the series of J_nu(x e^{3 pi i / 4})

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "bkm/errors.hpp"

namespace bkm::specfun {

/// Order nu = twice_nu / 2, so integer and half-integer orders are exact.
struct Order {
  int twice_nu = 0;

  static constexpr Order integer(int n) { return Order{2 * n}; }
  static constexpr Order half_odd(int twice) { return Order{twice}; }
  static constexpr Order from_twice(int twice) { return Order{twice}; }

  constexpr double value() const { return 0.5 * twice_nu; }
  constexpr bool is_integer() const { return twice_nu % 2 == 0; }
  constexpr Order next() const { return Order{twice_nu + 2}; }
  friend constexpr bool operator==(Order, Order) = default;
};

enum class Function { J, I, Ber, Bei };

inline constexpr int kMaxTwiceNu = 40;     // nu <= 20
inline constexpr double kMaxBesselArg = 100.0;
inline constexpr double kMaxKelvinArg = 50.0;

namespace detail {

inline constexpr double kSeriesEps = 1e-17;

// (x/2)^nu / Gamma(nu + 1)
inline double leading_term(double nu, double x) {
  if (nu == 0.0) return 1.0;
  return std::pow(0.5 * x, nu) / std::tgamma(nu + 1.0);
}

// sum_k sign^k (x/2)^{2k+nu} / (k! Gamma(k+nu+1))
inline double ascending_series(double nu, double x, double sign) {
  double term = leading_term(nu, x);
  double sum = term;
  const double q = 0.25 * x * x;
  for (int k = 1; k < 500; ++k) {
    term *= sign * q / (k * (k + nu));
    sum += term;
    if (std::abs(term) <= kSeriesEps * std::abs(sum) && k > 0.5 * x) break;
  }
  return sum;
}

inline double miller_start(double order, double x) {
  const double top = std::max(order, x);
  const int start = static_cast<int>(top + 20.0 + std::sqrt(60.0 * (top + 1.0)));
  return start + (start % 2);
}

// J_n(x), integer n, x > 0, via Miller's algorithm.
inline double miller_j(int n, double x) {
  constexpr double big = 1e200;
  const int m = static_cast<int>(miller_start(n, x));
  const double tox = 2.0 / x;
  double bjp = 0.0, bj = 1.0, ans = 0.0, sum = 0.0;
  bool add = false;
  for (int j = m; j > 0; --j) {
    const double bjm = j * tox * bj - bjp;
    bjp = bj;
    bj = bjm;
    if (std::abs(bj) > big) {
      bj /= big;
      bjp /= big;
      ans /= big;
      sum /= big;
    }
    if (add) sum += bj;
    add = !add;
    if (j == n) ans = bjp;
  }
  sum = 2.0 * sum - bj;
  return n == 0 ? bj / sum : ans / sum;
}

// x^n / (2n+1)!! * sum_k (sign x^2/2)^k / (k! prod_{i=1..k} (2n+2i+1))
inline double spherical_series(int n, double x, double sign) {
  double prefactor = 1.0;
  for (int i = 1; i <= n; ++i) prefactor *= x / (2 * i + 1);
  double term = 1.0, sum = 1.0;
  const double q = 0.5 * sign * x * x;
  for (int k = 0; k < 200; ++k) {
    term *= q / ((k + 1) * (2.0 * n + 2 * k + 3));
    sum += term;
    if (std::abs(term) <= kSeriesEps * std::abs(sum)) break;
  }
  return prefactor * sum;
}

// Spherical j_n(x) for x > 1: downward recurrence normalised by whichever of
// the closed forms j_0, j_1 is larger in magnitude.
inline double spherical_j_miller(int n, double x) {
  constexpr double big = 1e200;
  const int start = static_cast<int>(miller_start(n + 0.5, x));
  double fp = 0.0, f = 1e-30, at_n = (start == n) ? f : 0.0;
  double f1 = 0.0;
  for (int l = start; l > 0; --l) {
    const double fm = (2 * l + 1) / x * f - fp;
    fp = f;
    f = fm;
    if (std::abs(f) > big) {
      f /= big;
      fp /= big;
      at_n /= big;
    }
    if (l - 1 == n) at_n = f;
  }
  f1 = fp;
  const double s = std::sin(x), c = std::cos(x);
  const double j0 = s / x;
  const double j1 = s / (x * x) - c / x;
  const double scale = std::abs(j0) >= std::abs(j1) ? j0 / f : j1 / f1;
  return at_n * scale;
}

// Modified spherical i_n(x) for x > 1, normalised by i_0 = sinh x / x.
inline double spherical_i_miller(int n, double x) {
  constexpr double big = 1e200;
  const int start = static_cast<int>(miller_start(n + 0.5, x));
  double fp = 0.0, f = 1e-30, at_n = (start == n) ? f : 0.0;
  for (int l = start; l > 0; --l) {
    const double fm = (2 * l + 1) / x * f + fp;
    fp = f;
    f = fm;
    if (std::abs(f) > big) {
      f /= big;
      fp /= big;
      at_n /= big;
    }
    if (l - 1 == n) at_n = f;
  }
  return at_n * (std::sinh(x) / x) / f;
}

// Unchecked evaluators; the public functions validate first.
inline double j_value(Order nu, double x) {
  if (x == 0.0) return nu.twice_nu == 0 ? 1.0 : 0.0;
  if (nu.is_integer()) {
    const int n = nu.twice_nu / 2;
    return x <= 2.0 ? ascending_series(n, x, -1.0) : miller_j(n, x);
  }
  const int n = (nu.twice_nu - 1) / 2;
  const double jn = x <= 1.0 ? spherical_series(n, x, -1.0) : spherical_j_miller(n, x);
  return std::sqrt(2.0 * x / std::numbers::pi) * jn;
}

inline double i_value(Order nu, double x) {
  if (x == 0.0) return nu.twice_nu == 0 ? 1.0 : 0.0;
  if (nu.is_integer()) return ascending_series(nu.value(), x, 1.0);
  const int n = (nu.twice_nu - 1) / 2;
  if (n == 0) return std::sqrt(2.0 / (std::numbers::pi * x)) * std::sinh(x);
  const double in = x <= 1.0 ? spherical_series(n, x, 1.0) : spherical_i_miller(n, x);
  return std::sqrt(2.0 * x / std::numbers::pi) * in;
}

// cos and sin of q*pi/8, q in [0, 16).
inline std::pair<double, double> eighth_turn(int q) {
  static constexpr std::array<double, 5> c{1.0, 0.92387953251128675613, 0.70710678118654752440,
                                           0.38268343236508977173, 0.0};
  q %= 16;
  const int quadrant = q / 4;
  const int r = q % 4;
  const double cr = c[r], sr = c[4 - r];
  switch (quadrant) {
    case 0: return {cr, sr};
    case 1: return {-sr, cr};
    case 2: return {-cr, -sr};
    default: return {sr, -cr};
  }
}

// ber_nu(x) + i bei_nu(x) = J_nu(x e^{3 pi i/4}). The k-th series term has
// modulus (x/2)^{2k+nu}/(k! Gamma(k+nu+1)) and phase pi (20k + 3 twice_nu)/8.
inline std::complex<double> kelvin_value(Order nu, double x) {
  const double v = nu.value();
  if (x == 0.0) return nu.twice_nu == 0 ? 1.0 : 0.0;
  double modulus = leading_term(v, x);
  const double q = 0.25 * x * x;
  double re = 0.0, im = 0.0;
  for (int k = 0; k < 500; ++k) {
    if (k > 0) modulus *= q / (k * (k + v));
    const auto [c, s] = eighth_turn(20 * k + 3 * nu.twice_nu);
    re += modulus * c;
    im += modulus * s;
    if (k > 0.5 * x && modulus <= kSeriesEps * std::max(std::abs(re), std::abs(im))) break;
  }
  return {re, im};
}

inline void check_order(Order nu, const char* fn) {
  if (nu.twice_nu < 0 || nu.twice_nu > kMaxTwiceNu)
    throw DomainError(std::string(fn) + ": unsupported order 2*nu = " +
                      std::to_string(nu.twice_nu));
}

inline void check_arg(double x, double max_x, const char* fn) {
  if (!std::isfinite(x) || x < 0.0 || x > max_x)
    throw DomainError(std::string(fn) + ": argument out of range: " + std::to_string(x));
}

// Coefficient of x^{nu+2j} in the series of f_nu and its phase-resolved
// real value; used for derivative limits at x = 0.
inline double series_coefficient(Function f, Order nu, int j) {
  const double v = nu.value();
  const double base = std::pow(0.5, 2 * j + v) / (std::tgamma(j + 1.0) * std::tgamma(j + v + 1.0));
  switch (f) {
    case Function::J: return (j % 2 ? -1.0 : 1.0) * base;
    case Function::I: return base;
    case Function::Ber: return base * eighth_turn(20 * j + 3 * nu.twice_nu).first;
    case Function::Bei: return base * eighth_turn(20 * j + 3 * nu.twice_nu).second;
  }
  return 0.0;
}

}  // namespace detail

inline double bessel_j(Order nu, double x) {
  detail::check_order(nu, "bessel_j");
  detail::check_arg(x, kMaxBesselArg, "bessel_j");
  return detail::j_value(nu, x);
}

inline double bessel_i(Order nu, double x) {
  detail::check_order(nu, "bessel_i");
  detail::check_arg(x, kMaxBesselArg, "bessel_i");
  return detail::i_value(nu, x);
}

/// ber_nu(x) + i bei_nu(x).
inline std::complex<double> kelvin(Order nu, double x) {
  detail::check_order(nu, "kelvin");
  detail::check_arg(x, kMaxKelvinArg, "kelvin");
  return detail::kelvin_value(nu, x);
}

inline double kelvin_ber(Order nu, double x) { return kelvin(nu, x).real(); }
inline double kelvin_bei(Order nu, double x) { return kelvin(nu, x).imag(); }

/// k-th derivative (k = 1, 2) of f_nu at x.
///
/// For x > 0 only orders nu and nu+1 are needed:
///   J'  = (nu/x) J_nu - J_{nu+1}
///   J'' = (nu(nu-1)/x^2 - 1) J_nu + J_{nu+1}/x
/// with the analogous I and Kelvin forms (for Kelvin w = x e^{3 pi i/4},
/// w^2 = -i x^2). At x = 0 the limit is taken from the series and a
/// DomainError is thrown when it does not exist.
inline double derivative(Function f, Order nu, double x, int k) {
  detail::check_order(nu, "derivative");
  const double max_x = (f == Function::Ber || f == Function::Bei) ? kMaxKelvinArg : kMaxBesselArg;
  detail::check_arg(x, max_x, "derivative");
  if (k != 1 && k != 2) throw DomainError("derivative: order k must be 1 or 2");
  const double v = nu.value();

  if (x == 0.0) {
    double value = 0.0;
    for (int j = 0; 2 * j + v <= k; ++j) {
      const double e = 2 * j + v;
      const double c = detail::series_coefficient(f, nu, j);
      if (e == k) {
        value += c * (k == 1 ? 1.0 : 2.0);
      } else if (!nu.is_integer() && c != 0.0) {
        throw DomainError("derivative: singular at x = 0 for half-integer order");
      }
    }
    return value;
  }

  switch (f) {
    case Function::J: {
      const double a = detail::j_value(nu, x), b = detail::j_value(nu.next(), x);
      return k == 1 ? v / x * a - b : (v * (v - 1) / (x * x) - 1.0) * a + b / x;
    }
    case Function::I: {
      const double a = detail::i_value(nu, x), b = detail::i_value(nu.next(), x);
      return k == 1 ? v / x * a + b : (v * (v - 1) / (x * x) + 1.0) * a - b / x;
    }
    case Function::Ber:
    case Function::Bei: {
      const std::complex<double> rot(-std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2);
      const auto a = detail::kelvin_value(nu, x), b = detail::kelvin_value(nu.next(), x);
      const std::complex<double> d =
          k == 1 ? v / x * a - rot * b
                 : (v * (v - 1) / (x * x) + std::complex<double>(0.0, 1.0)) * a + rot * b / x;
      return f == Function::Ber ? d.real() : d.imag();
    }
  }
  return 0.0;
}

}  // namespace bkm::specfun
