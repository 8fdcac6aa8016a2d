// Separable profiles sigma^2_ij = d_i d~_j: the Master Equations collapse to
// one scalar equation in u(s) = 1 - F(s). Includes the sampled (integral)
// version and the two-level closed form.
#pragma once

#include "vps/core.hpp"
#include "vps/profiles.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <string>

namespace vps {

struct SeparableSolution {
  double s = 0.0;
  double u = 0.0;
  bool converged = false;
};

namespace detail {

// Root of the strictly decreasing g on [0, 1] by bisection.
template <typename G>
double bisect_unit(G&& g, double width) {
  double lo = 0.0, hi = 1.0;
  const double glo = g(lo), ghi = g(hi);
  if (!(glo >= 0.0) || !(ghi <= 0.0)) throw Error(Errc::NoRoot, "no sign change on [0, 1]");
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Unique u in [0, 1] with (1/n) sum_i d_i d~_i / (s^2 + d_i d~_i u) = 1;
/// u = 1 at s = 0 and u = 0 for s >= sqrt(rho).
inline SeparableSolution solve_u(const SeparableProfile& sep, double s, double tol = 1e-14) {
  if (!(s >= 0.0)) throw Error(Errc::BadParameter, "s must be >= 0");
  if (s == 0.0) return {s, 1.0, true};
  const double s2 = s * s;
  if (s2 >= sep.spectral_radius()) return {s, 0.0, true};
  const Vector prod = sep.d.cwiseProduct(sep.d_tilde);
  const double n = sep.n();
  auto g = [&](double u) { return (prod.array() / (s2 + prod.array() * u)).sum() / n - 1.0; };
  return {s, detail::bisect_unit(g, tol), true};
}

/// f(z) = (1/pi) [sum d d~ / (|z|^2 + d d~ u)^2] / [sum d^2 d~^2 / (|z|^2 + d d~ u)^2].
inline double separable_density(const SeparableProfile& sep, double z, double tol = 1e-14) {
  const double edge = std::sqrt(sep.spectral_radius());
  if (!(z >= 0.0) || !(z < edge))
    throw Error(Errc::OutsideSupport, "|z| = " + format_double(z) + " outside [0, " + format_double(edge) + ")");
  const double u = solve_u(sep, z, tol).u;
  const Eigen::ArrayXd prod = sep.d.cwiseProduct(sep.d_tilde).array();
  const Eigen::ArrayXd den = (z * z + prod * u).square();
  return ((prod / den).sum() / (prod.square() / den).sum()) / std::numbers::pi;
}

/// f(0) = (1 / (n pi)) sum_i 1 / (d_i d~_i).
inline double separable_density_zero(const SeparableProfile& sep) {
  return sep.d.cwiseProduct(sep.d_tilde).cwiseInverse().sum() / (sep.n() * std::numbers::pi);
}

/// Lower-bound ratio (sum Psi^-1 q q~) / (sum Psi q^2 q~^2) evaluated through
/// the collapse q_i q~_i = d_i d~_i u Psi_i^2, Psi_i = 1 / (s^2 + d_i d~_i u).
inline double separable_lower_bound(const SeparableProfile& sep, double s, double u) {
  if (!(u > 0.0)) throw Error(Errc::BadParameter, "lower bound requires u > 0");
  const Eigen::ArrayXd prod = sep.d.cwiseProduct(sep.d_tilde).array();
  const Eigen::ArrayXd ps = (s * s + prod * u).inverse();
  return (prod * ps).sum() / (u * (prod.square() * ps.pow(5)).sum());
}

using ScalarFunction = std::function<double(double)>;

struct SampledSeparableSolution {
  double s = 0.0;
  double u = 0.0;
  bool converged = false;
  double rho = 0.0;  // int_0^1 d d~ by the same quadrature
};

namespace detail {

struct TrapezoidRule {
  Eigen::ArrayXd x;
  Eigen::ArrayXd w;

  explicit TrapezoidRule(int points) {
    if (points < 3) throw Error(Errc::BadParameter, "need at least 3 quadrature points");
    x = Eigen::ArrayXd::LinSpaced(points, 0.0, 1.0);
    w = Eigen::ArrayXd::Constant(points, 1.0 / (points - 1));
    w[0] *= 0.5;
    w[points - 1] *= 0.5;
  }
};

inline Eigen::ArrayXd sample_product(const ScalarFunction& d, const ScalarFunction& dt, const Eigen::ArrayXd& x) {
  Eigen::ArrayXd p(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double a = d(x[k]), b = dt(x[k]);
    if (!(a >= 0.0) || !(b >= 0.0)) throw Error(Errc::NegativeFunctionValue, "d or d~ negative at x=" + format_double(x[k]));
    p[k] = a * b;
  }
  return p;
}

// Same integrand on every other node (step 2h); odd counts keep both ends.
inline double coarse_trapezoid(const Eigen::ArrayXd& values) {
  const Eigen::Index m = values.size();
  const Eigen::Index last = (m - 1) % 2 == 0 ? m - 1 : m - 2;
  const double h = 2.0 / static_cast<double>(m - 1);
  double acc = 0.5 * (values[0] + values[last]);
  for (Eigen::Index k = 2; k < last; k += 2) acc += values[k];
  const double tail = last == m - 1 ? 0.0 : 0.5 * (values[last] + values[m - 1]) / static_cast<double>(m - 1);
  return acc * h + tail;
}

}  // namespace detail

/// Unique u with int_0^1 d d~ / (s^2 + d d~ u) dx = 1, composite trapezoid on
/// quad_points nodes. Fails with QuadratureUnstable when halving the node
/// count moves the integral at the root by more than 1e-3 (relative).
inline SampledSeparableSolution sampled_separable_u(const ScalarFunction& d, const ScalarFunction& dt, double s,
                                                    int quad_points, double tol = 1e-14) {
  if (!(s >= 0.0)) throw Error(Errc::BadParameter, "s must be >= 0");
  const detail::TrapezoidRule rule(quad_points);
  const Eigen::ArrayXd prod = detail::sample_product(d, dt, rule.x);
  SampledSeparableSolution out;
  out.s = s;
  out.rho = (rule.w * prod).sum();
  out.converged = true;
  if (s == 0.0) {
    out.u = 1.0;
    return out;
  }
  const double s2 = s * s;
  if (s2 >= out.rho) return out;
  auto integrand = [&](double u) { return Eigen::ArrayXd(prod / (s2 + prod * u)); };
  out.u = detail::bisect_unit([&](double u) { return (rule.w * integrand(u)).sum() - 1.0; }, tol);
  const Eigen::ArrayXd at_root = integrand(out.u);
  const double fine = (rule.w * at_root).sum();
  const double coarse = detail::coarse_trapezoid(at_root);
  if (!(std::abs(fine - coarse) <= 1e-3 * std::abs(fine)))
    throw Error(Errc::QuadratureUnstable, "trapezoid integral changes by " + format_double(std::abs(fine - coarse)) +
                                              " when halving the nodes at s=" + format_double(s));
  return out;
}

/// Sampled-separable density
/// (1/pi) [int d d~ / (|z|^2 + d d~ u)^2] / [int d^2 d~^2 / (|z|^2 + d d~ u)^2].
inline double sampled_separable_density(const ScalarFunction& d, const ScalarFunction& dt, double z,
                                        int quad_points, double tol = 1e-14) {
  const auto sol = sampled_separable_u(d, dt, z, quad_points, tol);
  if (!(z > 0.0) || !(z * z < sol.rho))
    throw Error(Errc::OutsideSupport, "|z| = " + format_double(z) + " outside (0, sqrt(rho))");
  const detail::TrapezoidRule rule(quad_points);
  const Eigen::ArrayXd prod = detail::sample_product(d, dt, rule.x);
  const Eigen::ArrayXd den = (z * z + prod * sol.u).square();
  return ((rule.w * prod / den).sum() / (rule.w * prod.square() / den).sum()) / std::numbers::pi;
}

/// Two-level separable closed form (a fraction alpha of rows with variance a,
/// the rest b); 0 outside the disk of radius sqrt(alpha a + (1 - alpha) b).
inline double sombrero_density(double a, double b, double alpha, double z) {
  if (!(a > 0.0) || !(b > 0.0) || !(alpha > 0.0 && alpha < 1.0))
    throw Error(Errc::BadParameter, "need a, b > 0 and alpha in (0,1)");
  const double beta = 1.0 - alpha;
  const double rho = alpha * a + beta * b;
  const double z2 = z * z;
  if (z2 >= rho) return 0.0;
  const double ab = a * b;
  const double c = ab * (2.0 * rho - (a + b));
  const double diff2 = (a - b) * (a - b);
  const double root = std::sqrt(z2 * z2 * diff2 + 2.0 * z2 * c + ab * ab);
  return ((a + b) - (z2 * diff2 + c) / root) / (2.0 * std::numbers::pi * ab);
}

/// Named function specs on [0, 1]: "constant:c", "power:a" (x^a) and
/// "two-level:a,b,alpha" (a for x <= alpha, b otherwise).
inline ScalarFunction parse_function_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw Error(Errc::Parse, "function spec needs 'name:args', got '" + spec + "'");
  const std::string name = spec.substr(0, colon);
  const auto args = split(spec.substr(colon + 1), ',');
  auto arg = [&](std::size_t i) { return parse_double(args.at(i)); };
  if (name == "constant" && args.size() == 1) {
    const double c = arg(0);
    return [c](double) { return c; };
  }
  if (name == "power" && args.size() == 1) {
    const double a = arg(0);
    return [a](double x) { return std::pow(x, a); };
  }
  if (name == "two-level" && args.size() == 3) {
    const double a = arg(0), b = arg(1), alpha = arg(2);
    // Slack so that x = i/n lands on the intended side when alpha n is an integer.
    return [a, b, alpha](double x) { return x <= alpha + 1e-12 ? a : b; };
  }
  throw Error(Errc::Parse, "unknown function spec '" + spec + "'");
}

inline Vector sample_function(const ScalarFunction& f, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = f(static_cast<double>(i + 1) / n);
  return v;
}

}  // namespace vps
