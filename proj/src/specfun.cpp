#include "wavepacket/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "wavepacket/errors.hpp"

namespace wavepacket::specfun {

namespace {

bool is_integer(double v) { return v == std::floor(v); }

// sin(pi x) with the argument reduced first so that sin_pi(n) == 0 exactly.
double sin_pi(double x) {
    const double r = std::remainder(x, 2.0);  // in [-1, 1]
    if (r == 0.0 || std::fabs(r) == 1.0) {
        return 0.0;
    }
    return std::sin(std::numbers::pi * r);
}

// Lanczos approximation, g = 7, nine coefficients.
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7,
};

double lanczos_gamma(double x) {
    // x >= 0.5
    const double xm = x - 1.0;
    double acc = kLanczos[0];
    for (std::size_t i = 1; i < kLanczos.size(); ++i) {
        acc += kLanczos[i] / (xm + static_cast<double>(i));
    }
    const double t = xm + 7.5;
    // t^(xm+0.5) e^-t split in two to delay overflow
    const double half_power = std::pow(t, 0.5 * (xm + 0.5));
    return std::sqrt(2.0 * std::numbers::pi) * half_power * (half_power * std::exp(-t)) * acc;
}

// Ascending series sum_k (-1)^k (z/2)^(2k+nu) / (k! Gamma(k+nu+1)), nu not a
// negative integer, in extended precision.
double series_j(double nu, double z) {
    using ld = long double;
    const ld half = static_cast<ld>(z) / 2.0L;
    const ld minus_half_sq = -half * half;
    ld term = std::pow(half, static_cast<ld>(nu)) / static_cast<ld>(gamma_fn(nu + 1.0));
    ld sum = term;
    const double k_min = std::max(0.0, -nu);
    for (int k = 0; k < 500; ++k) {
        const ld kk = static_cast<ld>(k + 1);
        term *= minus_half_sq / (kk * (kk + static_cast<ld>(nu)));
        sum += term;
        if (static_cast<double>(k) > k_min &&
            std::fabs(term) <= std::numeric_limits<ld>::epsilon() * std::fabs(sum)) {
            break;
        }
        if (term == 0.0L) {
            break;
        }
    }
    return static_cast<double>(sum);
}

// Miller backward recurrence. Returns {J_{mu+n}(z), J_{mu+n+1}(z)} for
// mu in [0, 1), n >= 0, z > 0.
std::pair<double, double> miller_j(double mu, int n, double z) {
    const double reach = std::max(static_cast<double>(n + 1), std::ceil(z));
    int start = static_cast<int>(reach) + 32 + 2 * static_cast<int>(std::ceil(std::sqrt(reach)));
    start += start % 2;

    std::vector<double> f(static_cast<std::size_t>(start) + 2, 0.0);
    f[static_cast<std::size_t>(start)] = 1.0e-30;
    constexpr double kRescaleAt = 1.0e250;
    for (int k = start; k >= 1; --k) {
        const auto ku = static_cast<std::size_t>(k);
        f[ku - 1] = 2.0 * (mu + k) / z * f[ku] - f[ku + 1];
        if (std::fabs(f[ku - 1]) > kRescaleAt) {
            for (std::size_t j = ku - 1; j < f.size(); ++j) {
                f[j] /= kRescaleAt;
            }
        }
    }

    // Normalisation (z/2)^mu = Gamma(mu+1) J_mu + sum_{j>=1} (mu+2j) Gamma(mu+j)/j! J_{mu+2j}
    const double gamma_mu1 = gamma_fn(mu + 1.0);
    double norm = gamma_mu1 * f[0];
    double g = gamma_mu1;  // Gamma(mu + j) / j! at j = 1
    for (int j = 1; 2 * j <= start; ++j) {
        norm += (mu + 2.0 * j) * g * f[static_cast<std::size_t>(2 * j)];
        g *= (mu + j) / (j + 1.0);
    }
    const double scale = std::pow(0.5 * z, mu) / norm;
    const auto nu = static_cast<std::size_t>(n);
    return {f[nu] * scale, f[nu + 1] * scale};
}

}  // namespace

BesselOrder::BesselOrder(double nu) : nu_(nu) {
    if (!std::isfinite(nu)) {
        throw ParameterError("Bessel order must be finite");
    }
    if (std::fabs(nu) > kMaxOrder) {
        throw ParameterError("Bessel order |nu| = " + std::to_string(std::fabs(nu)) + " exceeds the cap of " +
                             std::to_string(kMaxOrder));
    }
}

double bessel_j(BesselOrder order, double z) {
    const double nu = order.value();
    if (!std::isfinite(z)) {
        throw ParameterError("Bessel argument must be finite");
    }
    if (z < 0.0) {
        throw ParameterError("Bessel argument must be non-negative, got " + std::to_string(z));
    }
    if (z > kMaxArgument) {
        throw DomainError("Bessel argument " + std::to_string(z) + " exceeds the supported range");
    }

    if (nu < 0.0 && is_integer(nu)) {
        const double jn = bessel_j(BesselOrder(-nu), z);
        return std::fmod(-nu, 2.0) == 0.0 ? jn : -jn;
    }

    if (z == 0.0) {
        if (nu == 0.0) {
            return 1.0;
        }
        if (nu > 0.0) {
            return 0.0;
        }
        // J_nu(z) ~ (z/2)^nu / Gamma(nu+1) diverges for negative non-integer nu
        return std::copysign(std::numeric_limits<double>::infinity(), gamma_fn(nu + 1.0));
    }

    if (z <= kSeriesCrossover) {
        return series_j(nu, z);
    }

    const double fl = std::floor(nu);
    const double mu = nu - fl;
    if (nu >= 0.0) {
        return miller_j(mu, static_cast<int>(fl), z).first;
    }

    // Downward from J_mu, J_{mu+1}: J_{o-1} = (2 o / z) J_o - J_{o+1}.
    auto [j_cur, j_next] = miller_j(mu, 0, z);
    double o = mu;
    for (int step = 0; step < static_cast<int>(-fl); ++step) {
        const double j_prev = 2.0 * o / z * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        o -= 1.0;
    }
    return j_cur;
}

double bessel_j(double nu, double z) { return bessel_j(BesselOrder(nu), z); }

double bessel_j0_prime(double z) { return -bessel_j(BesselOrder(1.0), z); }

double gamma_fn(double x) {
    if (!std::isfinite(x)) {
        throw ParameterError("gamma argument must be finite");
    }
    if (x <= 0.0 && is_integer(x)) {
        throw DomainError("gamma function pole at " + std::to_string(x));
    }
    if (x > 0.0 && x <= 21.0 && is_integer(x)) {
        double fact = 1.0;
        for (int i = 2; i < static_cast<int>(x); ++i) {
            fact *= i;
        }
        return fact;
    }
    if (x < 0.5) {
        return std::numbers::pi / (sin_pi(x) * lanczos_gamma(1.0 - x));
    }
    return lanczos_gamma(x);
}

QuadratureRule gauss_legendre(int n) {
    if (n < 1) {
        throw ParameterError("quadrature order must be positive");
    }
    QuadratureRule rule;
    rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
    rule.weights.assign(static_cast<std::size_t>(n), 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            dp = n * (z * p1 - p2) / (z * z - 1.0);
            const double z_old = z;
            z = z_old - p1 / dp;
            if (std::fabs(z - z_old) <= 1e-15) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        rule.nodes[lo] = -z;
        rule.nodes[hi] = z;
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    if (n % 2 == 1) {
        rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    }
    return rule;
}

double bessel_j0_integral(double w) {
    if (!std::isfinite(w) || std::fabs(w) > 1.0e6) {
        throw ParameterError("integral representation needs |w| <= 1e6");
    }
    static const QuadratureRule rule = gauss_legendre(kJ0QuadratureOrder);
    // theta = (pi/2)(1 + s), d theta = (pi/2) ds; the 1/pi prefactor leaves 1/2.
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double theta = 0.5 * std::numbers::pi * (1.0 + rule.nodes[i]);
        sum += rule.weights[i] * std::cos(w * std::sin(theta));
    }
    return 0.5 * sum;
}

}  // namespace wavepacket::specfun
