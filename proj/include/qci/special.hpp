// special.hpp: sine integral Si(x) = int_0^x sin(u)/u du

#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace qci {

namespace detail {

inline constexpr double kSiSeriesLimit = 4.0;

/// sum_{n >= n0} (-1)^n x^{2n+1} / ((2n+1)(2n+1)!) (1 - w (2n+1)), w in {0, 1}
inline double si_series(double x, bool minus_sin) {
  const double x2 = x * x;
  double term = x;  // x^{2n+1} / (2n+1)! with sign
  double sum = 0.0;
  for (int n = 0; n < 60; ++n) {
    const double k = 2.0 * n + 1.0;
    const double c = minus_sin ? (1.0 / k - 1.0) : 1.0 / k;
    const double add = term * c;
    sum += add;
    if (n > 0 && std::abs(add) <= std::numeric_limits<double>::epsilon() * std::abs(sum) * 0.25) break;
    term *= -x2 / ((k + 1.0) * (k + 2.0));
  }
  return sum;
}

/// Si for x > 2 from the continued fraction of E1(ix) (modified Lentz).
inline double si_continued_fraction(double x) {
  using C = std::complex<double>;
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  C b(1.0, x);
  C c(1.0 / tiny, 0.0);
  C d = 1.0 / b;
  C h = d;
  for (int i = 2; i < 100000; ++i) {
    const double a = -static_cast<double>((i - 1) * (i - 1));
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const C del = c * d;
    h *= del;
    if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < eps) break;
  }
  h *= C(std::cos(x), -std::sin(x));
  return std::numbers::pi / 2.0 + h.imag();
}

}  // namespace detail

inline double sine_integral(double x) {
  if (std::isnan(x)) return x;
  if (std::isinf(x)) return std::copysign(std::numbers::pi / 2.0, x);
  const double ax = std::abs(x);
  const double v = ax <= detail::kSiSeriesLimit ? detail::si_series(ax, false) : detail::si_continued_fraction(ax);
  return std::copysign(v, x);
}

/// Si(x) - sin(x), without the leading-order cancellation at small |x|.
inline double sine_integral_minus_sin(double x) {
  const double ax = std::abs(x);
  const double v = ax <= detail::kSiSeriesLimit ? detail::si_series(ax, true)
                                                : detail::si_continued_fraction(ax) - std::sin(ax);
  return std::copysign(v, x);
}

}  // namespace qci
