#pragma once

// Bessel functions of the first kind, the gamma function, and the
// trigonometric integral representation of J0 used as an independent
// cross-check of the series/recurrence evaluator.

#include <span>
#include <vector>

namespace wavepacket::specfun {

/// First positive zero of J0.
inline constexpr double kJ0FirstZero = 2.404825557695773;

/// Largest supported |order|.
inline constexpr double kMaxOrder = 50.0;

/// Largest supported argument; the recurrence depth grows linearly with z.
inline constexpr double kMaxArgument = 1.0e4;

/// Arguments at or below this use the ascending series; above it the
/// normalised backward recurrence.
inline constexpr double kSeriesCrossover = 4.0;

/// Gauss-Legendre order used for the J0 integral representation. Chosen so
/// that it agrees with bessel_j(0, |w|) to 1e-12 for |w| <= 50.
inline constexpr int kJ0QuadratureOrder = 80;

class BesselOrder {
public:
    explicit BesselOrder(double nu);
    double value() const { return nu_; }

private:
    double nu_;
};

/// J_nu(z) for real order and z >= 0.
///
/// Small arguments use the ascending series in extended precision. Larger
/// arguments use Miller's backward recurrence for orders mu + n with
/// mu = nu - floor(nu), normalised by
///     (z/2)^mu = sum_j (mu + 2j) Gamma(mu + j) / j! J_{mu+2j}(z),
/// and negative non-integer orders continue downward from J_mu, J_{mu+1}.
/// Negative integer orders use J_{-n} = (-1)^n J_n. At z = 0 a negative
/// non-integer order returns a signed infinity.
double bessel_j(BesselOrder nu, double z);
double bessel_j(double nu, double z);

/// dJ0/dz = -J1(z).
double bessel_j0_prime(double z);

/// Gamma(x); throws DomainError at non-positive integers.
double gamma_fn(double x);

/// (1/pi) * integral_0^pi cos(w sin(theta)) d theta by fixed-order Gauss-Legendre.
double bessel_j0_integral(double w);

struct QuadratureRule {
    std::vector<double> nodes;    ///< on [-1, 1], ascending
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
QuadratureRule gauss_legendre(int n);

}  // namespace wavepacket::specfun
