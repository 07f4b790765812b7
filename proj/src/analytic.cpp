#include "wavepacket/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wavepacket/specfun.hpp"

namespace wavepacket {

double envelope_argument(const ModelParams& params, double x, double t) {
    const double scale = params.envelope_scale();
    if (scale == 0.0) {
        return 0.0;
    }
    const double z = scale * std::exp(-0.5 * (x + params.k() * t));
    if (!std::isfinite(z) || z > specfun::kMaxArgument) {
        throw DomainError("envelope argument overflows at x = " + std::to_string(x) + ", t = " +
                          std::to_string(t) + "; clip the domain on the left");
    }
    return z;
}

double envelope_q0(const ModelParams& params, double x, double t) {
    params.require_branch();
    return specfun::bessel_j(0.0, envelope_argument(params, x, t));
}

double envelope_general(const ModelParams& params, const PhaseParams& phase, double x, double t, double c1,
                        double c2) {
    const double q = phase.q();
    const double z = envelope_argument(params, x, t);
    double value = 0.0;
    if (c1 != 0.0) {
        value += c1 * specfun::bessel_j(-q, z) * specfun::gamma_fn(1.0 - q);
    }
    if (c2 != 0.0) {
        value += c2 * specfun::bessel_j(q, z) * specfun::gamma_fn(1.0 + q);
    }
    return value;
}

double phase_S(const ModelParams& params, double x, double t, PhaseVariant variant) {
    const double m = params.mass();
    if (params.require_branch() == Branch::Plus) {
        return 2.0 * m * (x - t);
    }
    return variant == PhaseVariant::Printed ? -2.0 * m * (x - t) : -2.0 * m * (x + t);
}

cplx psi_value(const ModelParams& params, double x, double t, double amplitude, PhaseVariant variant) {
    if (amplitude == 0.0) {
        return {0.0, 0.0};
    }
    const double r = amplitude * envelope_q0(params, x, t);
    return std::polar(1.0, phase_S(params, x, t, variant) / params.hbar()) * r;
}

ComplexField eval_psi(const ModelParams& params, const GridSpec& grid, double t, double amplitude,
                      PhaseVariant variant) {
    params.require_branch();
    std::vector<cplx> values(grid.nx());
    for (std::size_t i = 0; i < grid.nx(); ++i) {
        values[i] = psi_value(params, grid.x(i), t, amplitude, variant);
    }
    return ComplexField(grid, t, std::move(values));
}

std::vector<std::optional<double>> quantum_potential(std::span<const double> amplitude, const GridSpec& grid,
                                                     double hbar, double mass, double mask) {
    const std::size_t n = grid.nx();
    if (amplitude.size() != n) {
        throw ParameterError("amplitude samples do not match the grid");
    }
    if (n < 5) {
        throw ParameterError("quantum potential needs at least 5 samples");
    }
    double r_max = 0.0;
    for (double r : amplitude) {
        r_max = std::max(r_max, std::fabs(r));
    }
    const double threshold = mask * r_max;
    const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    const double prefactor = -hbar * hbar / (2.0 * mass);

    std::vector<std::optional<double>> qpot(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double r = amplitude[i];
        if (r_max == 0.0 || std::fabs(r) < threshold) {
            continue;
        }
        const double r_xx = (amplitude[i + 1] - 2.0 * r + amplitude[i - 1]) * inv_dx2;
        qpot[i] = prefactor * r_xx / r;
    }
    return qpot;
}

std::vector<double> velocity_field(const ModelParams& params, const GridSpec& grid, double /*t*/,
                                   PhaseVariant variant) {
    const PhaseParams phase = PhaseParams::for_branch(params, variant);
    return std::vector<double>(grid.nx(), phase.alpha() / params.mass());
}

PolarSamples polar_samples(const ModelParams& params, const GridSpec& grid, double t, double amplitude,
                           PhaseVariant variant) {
    PolarSamples out;
    out.amplitude.resize(grid.nx());
    out.phase.resize(grid.nx());
    for (std::size_t i = 0; i < grid.nx(); ++i) {
        const double x = grid.x(i);
        out.amplitude[i] = amplitude * envelope_q0(params, x, t);
        out.phase[i] = phase_S(params, x, t, variant);
    }
    return out;
}

MadelungFields madelung_fields(const ModelParams& params, const GridSpec& grid, double t, double amplitude,
                               PhaseVariant variant, double mask) {
    PolarSamples polar = polar_samples(params, grid, t, amplitude, variant);
    const double slope = PhaseParams::for_branch(params, variant).alpha();

    MadelungFields f{grid, t, std::move(polar.amplitude), std::move(polar.phase), {}, {}, {}};
    f.density.resize(grid.nx());
    f.current.resize(grid.nx());
    for (std::size_t i = 0; i < grid.nx(); ++i) {
        f.density[i] = f.amplitude[i] * f.amplitude[i];
        f.current[i] = f.density[i] * slope / params.mass();
    }
    f.qpot = quantum_potential(f.amplitude, grid, params.hbar(), params.mass(), mask);
    return f;
}

}  // namespace wavepacket
