#pragma once

// Nonsingular general solutions u_m(r) of Helmholtz-like and plate operators.
//
//   Helmholtz            Q_m z^{m-p} J_{m+p}(z),  z = gamma r
//   ModifiedHelmholtz    Q_m z^{m-p} I_{m+p}(z),  z = tau r
//   VibrationPlate       z^{m-p} (A_m J_{m+p}(z) + B_m I_{m+p}(z)),  z = sqrt(lambda) r
//   WinklerPlate         z^{m-p} (C_m ber_q(z) + D_m bei_q(z)),      z = sqrt(kappa) r
//                        q = n/2 for odd m, n/2 - 1 for even m
//   BurgerPlate          E_m r^{2m-2} + F_m z^{m-p} I_{m+p}(z),      z = mu r
//
// with p = n/2 - 1, Q_0 = 1 and Q_m = Q_{m-1} / (2 m param^2).
//
// Every Bessel/Kelvin term is an even entire function of z, so kernels and
// their derivatives are evaluated from the power series for z <= 2 (this
// also covers the removable limit at r = 0) and from the special functions
// plus order recurrences beyond.

#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <string>
#include <vector>

#include "bkm/errors.hpp"
#include "bkm/specfun.hpp"
#include "bkm/vec.hpp"

namespace bkm::gensol {

enum class FamilyKind { Helmholtz, ModifiedHelmholtz, VibrationPlate, WinklerPlate, BurgerPlate };

inline std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::Helmholtz: return "helmholtz";
    case FamilyKind::ModifiedHelmholtz: return "modified_helmholtz";
    case FamilyKind::VibrationPlate: return "vibration_plate";
    case FamilyKind::WinklerPlate: return "winkler_plate";
    case FamilyKind::BurgerPlate: return "burger_plate";
  }
  return "unknown";
}

inline constexpr int kMaxKernelOrder = 8;

/// Governing operator with its characteristic parameter and dimension.
///
/// `constants[m]` holds the (A_m, B_m), (C_m, D_m) or (E_m, F_m) pair of the
/// plate families; orders without an entry use (1, 1), except the Burger
/// m = 0 pair which defaults to (0, 1) so that the kernel is nonsingular.
/// Helmholtz-type families ignore `constants` and use Q_m.
struct OperatorFamily {
  FamilyKind kind = FamilyKind::Helmholtz;
  double param = 1.0;
  int dim = 2;
  std::vector<std::array<double, 2>> constants;

  static OperatorFamily helmholtz(double gamma, int dim) { return make(FamilyKind::Helmholtz, gamma, dim); }
  static OperatorFamily modified_helmholtz(double tau, int dim) {
    return make(FamilyKind::ModifiedHelmholtz, tau, dim);
  }
  static OperatorFamily vibration_plate(double lambda, int dim) {
    return make(FamilyKind::VibrationPlate, lambda, dim);
  }
  static OperatorFamily winkler_plate(double kappa, int dim) {
    return make(FamilyKind::WinklerPlate, kappa, dim);
  }
  static OperatorFamily burger_plate(double mu, int dim) { return make(FamilyKind::BurgerPlate, mu, dim); }

  static OperatorFamily make(FamilyKind kind, double param, int dim) {
    OperatorFamily f{kind, param, dim, {}};
    f.validate();
    return f;
  }

  std::array<double, 2> coefficients(int m) const {
    if (m >= 0 && static_cast<std::size_t>(m) < constants.size()) return constants[m];
    if (kind == FamilyKind::BurgerPlate && m == 0) return {0.0, 1.0};
    return {1.0, 1.0};
  }

  void validate() const {
    if (!(param > 0.0) || !std::isfinite(param))
      throw DomainError("OperatorFamily: parameter must be positive and finite");
    if (dim != 2 && dim != 3) throw DomainError("OperatorFamily: dimension must be 2 or 3");
    for (const auto& c : constants)
      if (!std::isfinite(c[0]) || !std::isfinite(c[1]))
        throw DomainError("OperatorFamily: non-finite constant");
  }
};

/// Q_0 = 1, Q_m = Q_{m-1} / (2 m gamma^2).
inline double q_coeff(int m, double gamma) {
  double q = 1.0;
  for (int k = 1; k <= m; ++k) q /= 2.0 * k * gamma * gamma;
  return q;
}

/// Value and first four radial derivatives of a radial function.
struct RadialJet {
  std::array<double, 5> d{};
  double value() const { return d[0]; }
};

namespace detail {

// x(x-1)...(x-k+1)
inline double falling(double x, int k) {
  double f = 1.0;
  for (int i = 0; i < k; ++i) f *= x - i;
  return f;
}

inline double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

// coeff * z^power * f_nu(z), z = scale * r
struct BesselTerm {
  double coeff;
  double scale;
  double power;
  specfun::Function fn;
  specfun::Order nu;

  bool kelvin() const { return fn == specfun::Function::Ber || fn == specfun::Function::Bei; }

  double value(double r) const {
    if (coeff == 0.0) return 0.0;
    if (r < 1e-6) return jet_series(r, 0)[0];
    const double z = scale * r;
    double f = 0.0;
    switch (fn) {
      case specfun::Function::J: f = specfun::bessel_j(nu, z); break;
      case specfun::Function::I: f = specfun::bessel_i(nu, z); break;
      case specfun::Function::Ber: f = specfun::kelvin_ber(nu, z); break;
      case specfun::Function::Bei: f = specfun::kelvin_bei(nu, z); break;
    }
    return coeff * std::pow(z, power) * f;
  }

  std::array<double, 5> jet(double r, int max_k) const {
    if (coeff == 0.0) return {};
    return scale * r <= 2.0 ? jet_series(r, max_k) : jet_recurrence(r, max_k);
  }

  // Termwise-differentiated power series; z^power f_nu(z) = sum_k c_k z^{e0+2k}.
  std::array<double, 5> jet_series(double r, int max_k) const {
    const double z = scale * r;
    const double v = nu.value();
    const int e0 = static_cast<int>(std::lround(power + v));
    std::array<double, 5> out{};
    double modulus = std::pow(0.5, v) / std::tgamma(v + 1.0);
    for (int k = 0; k < 200; ++k) {
      if (k > 0) modulus /= 4.0 * k * (k + v);
      double c = modulus;
      switch (fn) {
        case specfun::Function::J: c = (k % 2 ? -modulus : modulus); break;
        case specfun::Function::I: break;
        case specfun::Function::Ber: c = modulus * specfun::detail::eighth_turn(20 * k + 3 * nu.twice_nu).first; break;
        case specfun::Function::Bei: c = modulus * specfun::detail::eighth_turn(20 * k + 3 * nu.twice_nu).second; break;
      }
      const int e = e0 + 2 * k;
      double largest = 0.0;
      for (int j = 0; j <= max_k; ++j) {
        if (e < j) continue;
        const double zp = (e == j ? 1.0 : std::pow(z, e - j));
        out[j] += c * falling(e, j) * zp;
        largest = std::max(largest, modulus * falling(e, j) * zp / (std::abs(out[j]) + 1e-300));
      }
      if (e > max_k && (z == 0.0 || (largest < 1e-17 && k > 2))) break;
    }
    double s = coeff;
    for (int j = 0; j <= max_k; ++j) {
      out[j] *= s;
      s *= scale;
    }
    return out;
  }

  // f^{(j)} = P_j(z) f_nu + R_j(z) f_{nu+1} with P, R Laurent polynomials in z,
  // generated from f_nu' = (nu/z) f_nu + alpha f_{nu+1} and
  // f_{nu+1}' = beta f_nu - ((nu+1)/z) f_{nu+1}; then Leibniz for z^power.
  std::array<double, 5> jet_recurrence(double r, int max_k) const {
    using cplx = std::complex<double>;
    const double z = scale * r;
    const double v = nu.value();
    cplx alpha, beta, f0, f1;
    switch (fn) {
      case specfun::Function::J:
        alpha = -1.0;
        beta = 1.0;
        f0 = specfun::detail::j_value(nu, z);
        f1 = specfun::detail::j_value(nu.next(), z);
        break;
      case specfun::Function::I:
        alpha = 1.0;
        beta = 1.0;
        f0 = specfun::detail::i_value(nu, z);
        f1 = specfun::detail::i_value(nu.next(), z);
        break;
      default: {
        const cplx rot(-std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2);
        alpha = -rot;
        beta = rot;
        specfun::detail::check_arg(z, specfun::kMaxKelvinArg, "kernel");
        f0 = specfun::detail::kelvin_value(nu, z);
        f1 = specfun::detail::kelvin_value(nu.next(), z);
      }
    }
    if (!kelvin()) specfun::detail::check_arg(z, specfun::kMaxBesselArg, "kernel");

    constexpr int kTerms = 6;  // coefficient of z^{-e}, e = 0..5
    using Laurent = std::array<cplx, kTerms>;
    Laurent p{}, q{};
    p[0] = 1.0;
    std::array<cplx, 5> g{};
    auto eval = [z](const Laurent& l) {
      cplx s = 0.0;
      for (int e = kTerms - 1; e >= 0; --e) s = s / z + l[e];
      return s;
    };
    for (int j = 0; j <= max_k; ++j) {
      g[j] = eval(p) * f0 + eval(q) * f1;
      Laurent np{}, nq{};
      for (int e = 0; e + 1 < kTerms; ++e) {
        np[e + 1] += -double(e) * p[e] + v * p[e];
        nq[e + 1] += -double(e) * q[e] - (v + 1.0) * q[e];
      }
      for (int e = 0; e < kTerms; ++e) {
        np[e] += beta * q[e];
        nq[e] += alpha * p[e];
      }
      p = np;
      q = nq;
    }

    std::array<double, 5> out{};
    double s = coeff;
    for (int k = 0; k <= max_k; ++k) {
      cplx dk = 0.0;
      for (int j = 0; j <= k; ++j)
        dk += binomial(k, j) * falling(power, k - j) * std::pow(z, power - (k - j)) * g[j];
      const double part = fn == specfun::Function::Bei ? dk.imag() : dk.real();
      out[k] = s * part;
      s *= scale;
    }
    return out;
  }
};

}  // namespace detail

/// u_m(r) for one operator family and order m.
class Kernel {
 public:
  Kernel(OperatorFamily family, int order) : family_(std::move(family)), order_(order) {
    family_.validate();
    if (order_ < 0 || order_ > kMaxKernelOrder)
      throw DomainError("Kernel: order must be in [0, " + std::to_string(kMaxKernelOrder) + "]");
    build();
  }

  const OperatorFamily& family() const { return family_; }
  int order() const { return order_; }
  int dim() const { return family_.dim; }

  /// u_m(r), r >= 0; at r = 0 the removable limit.
  double eval(double r) const {
    check_radius(r);
    check_singular(r);
    double v = 0.0;
    for (const auto& t : terms_) v += t.value(r);
    if (poly_coeff_ != 0.0) v += poly_coeff_ * std::pow(r, poly_exp_);
    return v;
  }

  /// d^k u_m / dr^k for k = 1, 2 and r > 0.
  double radial_derivative(double r, int k) const {
    check_radius(r);
    if (r == 0.0) throw DomainError("radial_derivative: r must be positive");
    if (k != 1 && k != 2) throw DomainError("radial_derivative: k must be 1 or 2");
    return jet(r, k).d[k];
  }

  /// Value and derivatives up to `max_k` (<= 4). Valid at r = 0 for every
  /// nonsingular kernel, where it returns the limits.
  RadialJet jet(double r, int max_k = 4) const {
    check_radius(r);
    check_singular(r);
    RadialJet out;
    for (const auto& t : terms_) {
      const auto d = t.jet(r, max_k);
      for (int k = 0; k <= max_k; ++k) out.d[k] += d[k];
    }
    if (poly_coeff_ != 0.0)
      for (int k = 0; k <= max_k; ++k) {
        if (poly_exp_ >= 0 && poly_exp_ < k) continue;
        out.d[k] += poly_coeff_ * detail::falling(poly_exp_, k) * std::pow(r, poly_exp_ - k);
      }
    return out;
  }

 private:
  void build() {
    using specfun::Function;
    const int n = family_.dim;
    const int m = order_;
    const double power = m - 0.5 * (n - 2);
    const specfun::Order nu{(n - 2) + 2 * m};
    const auto [c0, c1] = family_.coefficients(m);
    switch (family_.kind) {
      case FamilyKind::Helmholtz:
        terms_.push_back({q_coeff(m, family_.param), family_.param, power, Function::J, nu});
        break;
      case FamilyKind::ModifiedHelmholtz:
        terms_.push_back({q_coeff(m, family_.param), family_.param, power, Function::I, nu});
        break;
      case FamilyKind::VibrationPlate: {
        const double s = std::sqrt(family_.param);
        terms_.push_back({c0, s, power, Function::J, nu});
        terms_.push_back({c1, s, power, Function::I, nu});
        break;
      }
      case FamilyKind::WinklerPlate: {
        const double s = std::sqrt(family_.param);
        const specfun::Order q{m % 2 == 1 ? n : n - 2};
        terms_.push_back({c0, s, power, Function::Ber, q});
        terms_.push_back({c1, s, power, Function::Bei, q});
        break;
      }
      case FamilyKind::BurgerPlate:
        poly_coeff_ = c0;
        poly_exp_ = 2 * m - 2;
        terms_.push_back({c1, family_.param, power, Function::I, nu});
        break;
    }
  }

  static void check_radius(double r) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("kernel: radius must be finite and >= 0");
  }

  void check_singular(double r) const {
    if (poly_coeff_ != 0.0 && poly_exp_ < 0 && r < 1e-150)
      throw KernelSingularityError("kernel: " + to_string(family_.kind) + " order " +
                                   std::to_string(order_) + " is singular at r = 0");
  }

  OperatorFamily family_;
  int order_;
  std::vector<detail::BesselTerm> terms_;
  double poly_coeff_ = 0.0;
  int poly_exp_ = 0;
};

inline double eval(const Kernel& kernel, double r) { return kernel.eval(r); }
inline double radial_derivative(const Kernel& kernel, double r, int k) {
  return kernel.radial_derivative(r, k);
}

inline constexpr double kCoincidenceTolerance = 1e-12;

/// Derivative of u(|x - s|) with respect to x along n_x.
inline double normal_derivative(const Kernel& kernel, Vec3 x, Vec3 s, Vec3 n_x) {
  const Vec3 d = x - s;
  const double r = norm(d);
  if (r < kCoincidenceTolerance) throw CoincidentPointError("normal_derivative: x and s coincide");
  return kernel.jet(r, 1).d[1] * dot(d, n_x) / r;
}

/// Mixed derivative d^2 u(|x - s|) / dn_x dn_s. With e = (x - s)/r:
///   -u'' (e.n_x)(e.n_s) - (u'/r) (n_x.n_s - (e.n_x)(e.n_s))
inline double mixed_normal_derivative(const Kernel& kernel, Vec3 x, Vec3 n_x, Vec3 s, Vec3 n_s) {
  const Vec3 d = x - s;
  const double r = norm(d);
  if (r < kCoincidenceTolerance)
    throw CoincidentPointError("mixed_normal_derivative: x and s coincide");
  const auto j = kernel.jet(r, 2);
  const double ex = dot(d, n_x) / r, es = dot(d, n_s) / r;
  return -j.d[2] * ex * es - j.d[1] / r * (dot(n_x, n_s) - ex * es);
}

// Collocation entries: same as above, but coincident points return the
// removable limits (u'(0) = 0 and u'/r, u'' -> u''(0)).
inline double value_entry(const Kernel& kernel, Vec3 x, Vec3 s) { return kernel.eval(norm(x - s)); }

inline double normal_entry(const Kernel& kernel, Vec3 x, Vec3 s, Vec3 n_x) {
  if (norm(x - s) < kCoincidenceTolerance) return 0.0;
  return normal_derivative(kernel, x, s, n_x);
}

inline double mixed_entry(const Kernel& kernel, Vec3 x, Vec3 n_x, Vec3 s, Vec3 n_s) {
  if (norm(x - s) < kCoincidenceTolerance) return -kernel.jet(0.0, 2).d[2] * dot(n_x, n_s);
  return mixed_normal_derivative(kernel, x, n_x, s, n_s);
}

/// Radial Laplacian g'' + (n-1)/r g'.
inline double laplacian(int dim, const RadialJet& g, double r) {
  return g.d[2] + (dim - 1) / r * g.d[1];
}

/// Radial bilaplacian, the Laplacian applied twice.
inline double bilaplacian(int dim, const RadialJet& g, double r) {
  const double c = dim - 1;
  const double h1 = g.d[3] + c * (g.d[2] / r - g.d[1] / (r * r));
  const double h2 = g.d[4] + c * (g.d[3] / r - 2.0 * g.d[2] / (r * r) + 2.0 * g.d[1] / (r * r * r));
  return h2 + c / r * h1;
}

template <class F>
concept RadialFunction = std::invocable<const F&, double> &&
    std::convertible_to<std::invoke_result_t<const F&, double>, RadialJet>;

/// L{g}(r) for the family's operator:
///   nabla^2 + gamma^2, nabla^2 - tau^2, nabla^4 - lambda^2, nabla^4 + kappa^2,
///   nabla^4 - mu^2 nabla^2.
template <RadialFunction G>
double apply_operator(const OperatorFamily& family, const G& g, double r) {
  if (!(r > 0.0)) throw DomainError("apply_operator: r must be positive");
  const RadialJet j = g(r);
  const double p2 = family.param * family.param;
  const int n = family.dim;
  switch (family.kind) {
    case FamilyKind::Helmholtz: return laplacian(n, j, r) + p2 * j.d[0];
    case FamilyKind::ModifiedHelmholtz: return laplacian(n, j, r) - p2 * j.d[0];
    case FamilyKind::VibrationPlate: return bilaplacian(n, j, r) - p2 * j.d[0];
    case FamilyKind::WinklerPlate: return bilaplacian(n, j, r) + p2 * j.d[0];
    case FamilyKind::BurgerPlate: return bilaplacian(n, j, r) - p2 * laplacian(n, j, r);
  }
  return 0.0;
}

inline double apply_operator(const OperatorFamily& family, const Kernel& kernel, double r) {
  return apply_operator(family, [&kernel](double s) { return kernel.jet(s); }, r);
}

}  // namespace bkm::gensol
