#pragma once

// Test-side reference values. Nothing here calls into the library.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

// Ascending series for J_nu(z), nu >= 0, summed in long double until the
// terms stop changing the sum. Good to ~1e-16 relative for z <= 12.
inline long double bessel_series(long double nu, long double z) {
    const long double h = z / 2.0L;
    long double term = std::pow(h, nu) / std::tgamma(nu + 1.0L);
    long double sum = term;
    for (int k = 1; k < 500; ++k) {
        term *= -(h * h) / (static_cast<long double>(k) * (static_cast<long double>(k) + nu));
        const long double next = sum + term;
        if (next == sum) {
            break;
        }
        sum = next;
    }
    return sum;
}

inline double j_half(double z) { return std::sqrt(2.0 / (std::numbers::pi * z)) * std::sin(z); }

// Plain bisection; f(a) and f(b) must differ in sign.
inline double bisect(const std::function<double(double)>& f, double a, double b) {
    double fa = f(a);
    for (int i = 0; i < 200 && b - a > 1e-16 * std::fabs(b); ++i) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

// For R = J0(lambda e^{-u/2}), u = x + k t: R''/R = -z^2/4 with z the
// argument, so -(hbar^2/2m) R''/R = (hbar^2/2m) z^2/4 = C e^{-u}.
inline double qpot_j0_envelope(double hbar, double mass, double lambda, double u) {
    const double z = lambda * std::exp(-u / 2.0);
    return hbar * hbar / (2.0 * mass) * z * z / 4.0;
}

}  // namespace oracle
