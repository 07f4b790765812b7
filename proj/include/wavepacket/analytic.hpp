#pragma once

// Closed-form branch solutions
//   Psi_1 = c J0(lambda e^{-(x-2t)/2}) e^{2 i m (x-t)/hbar}   (k = -2)
//   Psi_2 = c J0(lambda e^{-(x+2t)/2}) e^{i S_2/hbar}          (k = +2)
// their general-order envelope, and the Madelung quantities derived from them.

#include <optional>
#include <span>
#include <vector>

#include "wavepacket/model.hpp"

namespace wavepacket {

/// Default relative zero guard for R in R''/R.
inline constexpr double kAmplitudeMask = 1e-10;

/// lambda exp(-(x + k t)/2); throws DomainError when it overflows or leaves
/// the range the Bessel kernel supports.
double envelope_argument(const ModelParams& params, double x, double t);

/// J0(lambda e^{-(x + k t)/2}) for a branch.
double envelope_q0(const ModelParams& params, double x, double t);

/// c1 J_{-q}(z) Gamma(1-q) + c2 J_q(z) Gamma(1+q), z = lambda e^{-(x+kt)/2}.
/// A term with a zero coefficient is skipped, so c1 = 0 tolerates the
/// Gamma(1-q) poles at positive integer q.
double envelope_general(const ModelParams& params, const PhaseParams& phase, double x, double t,
                        double c1, double c2);

/// Phase S (action units) of a branch solution.
/// Plus: 2m(x - t). Minus: -2m(x - t) (Printed) or -2m(x + t) (Derived).
double phase_S(const ModelParams& params, double x, double t, PhaseVariant variant = PhaseVariant::Derived);

/// Psi at one point.
cplx psi_value(const ModelParams& params, double x, double t, double amplitude = 1.0,
               PhaseVariant variant = PhaseVariant::Derived);

ComplexField eval_psi(const ModelParams& params, const GridSpec& grid, double t, double amplitude = 1.0,
                      PhaseVariant variant = PhaseVariant::Derived);

/// -(hbar^2/2m) R''/R by central differences. Boundary points and points with
/// |R| < mask * max|R| are undefined (nullopt).
std::vector<std::optional<double>> quantum_potential(std::span<const double> amplitude, const GridSpec& grid,
                                                     double hbar, double mass, double mask = kAmplitudeMask);

/// (dS/dx)/m; constant alpha/m for the branch phases.
std::vector<double> velocity_field(const ModelParams& params, const GridSpec& grid, double t,
                                   PhaseVariant variant = PhaseVariant::Derived);

/// Amplitude and phase samples at one time.
struct PolarSamples {
    std::vector<double> amplitude;  ///< R (signed: J0 changes sign)
    std::vector<double> phase;      ///< S
};

struct MadelungFields {
    GridSpec grid;
    double time;
    std::vector<double> amplitude;
    std::vector<double> phase;
    std::vector<double> density;  ///< R^2
    std::vector<double> current;  ///< R^2 (dS/dx) / m
    std::vector<std::optional<double>> qpot;
};

PolarSamples polar_samples(const ModelParams& params, const GridSpec& grid, double t, double amplitude = 1.0,
                           PhaseVariant variant = PhaseVariant::Derived);

MadelungFields madelung_fields(const ModelParams& params, const GridSpec& grid, double t,
                               double amplitude = 1.0, PhaseVariant variant = PhaseVariant::Derived,
                               double mask = kAmplitudeMask);

}  // namespace wavepacket
