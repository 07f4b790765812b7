#include "wavepacket/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wavepacket/analytic.hpp"

namespace wavepacket {

std::string_view to_string(BoundaryMode mode) {
    return mode == BoundaryMode::AnalyticDirichlet ? "analytic-dirichlet" : "frozen-dirichlet";
}

double PropagationConfig::cfl_diagnostic(const ModelParams& params) const {
    return params.hbar() * time.dt() / (2.0 * params.mass() * grid.dx() * grid.dx());
}

void validate_config(const ModelParams& params, const PropagationConfig& config) {
    if (config.bc_mode == BoundaryMode::AnalyticDirichlet) {
        params.require_branch();
    }
    if (!(config.potential_cap > 0.0)) {
        throw ParameterError("potential cap must be positive");
    }
    if (params.coupling() != 0.0) {
        // e^{-x_min - k t} is monotone in t, so the endpoints bound it
        const double worst = std::max(std::exp(-config.grid.x_min() - params.k() * config.time.t0()),
                                      std::exp(-config.grid.x_min() - params.k() * config.time.t1()));
        if (!(worst <= config.potential_cap)) {
            throw DomainError("potential at x_min reaches " + std::to_string(worst) + " |C|, above the cap of " +
                              std::to_string(config.potential_cap) + " |C|; move x_min to the right");
        }
    }
}

std::vector<cplx> solve_tridiagonal(std::span<const cplx> sub, std::span<const cplx> diag,
                                    std::span<const cplx> super, std::span<const cplx> rhs) {
    const std::size_t n = diag.size();
    if (sub.size() != n || super.size() != n || rhs.size() != n || n == 0) {
        throw ParameterError("tridiagonal system has inconsistent sizes");
    }
    constexpr double kTinyPivot = 1e-300;
    std::vector<cplx> c_prime(n);
    std::vector<cplx> x(n);
    cplx pivot = diag[0];
    if (std::abs(pivot) < kTinyPivot) {
        throw NumericalError("singular tridiagonal system at row 0");
    }
    c_prime[0] = super[0] / pivot;
    x[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - sub[i] * c_prime[i - 1];
        if (std::abs(pivot) < kTinyPivot) {
            throw NumericalError("singular tridiagonal system at row " + std::to_string(i));
        }
        c_prime[i] = super[i] / pivot;
        x[i] = (rhs[i] - sub[i] * x[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] -= c_prime[i] * x[i + 1];
    }
    return x;
}

ComplexField step_crank_nicolson(const ComplexField& field, const ModelParams& params,
                                 const PropagationConfig& config) {
    const GridSpec& grid = config.grid;
    if (!(field.grid() == grid)) {
        throw ParameterError("field is not on the propagation grid");
    }
    const std::size_t n = grid.nx();
    const double dt = config.time.dt();
    const double t_old = field.time();
    const double t_new = t_old + dt;
    const double t_half = t_old + 0.5 * dt;
    const double hbar = params.hbar();
    const double off = -hbar * hbar / (2.0 * params.mass() * grid.dx() * grid.dx());
    const double s = sign_of(config.convention);
    const cplx half_step{0.0, dt / (2.0 * hbar)};  // i dt / 2 hbar

    std::vector<cplx> next(n);
    if (config.bc_mode == BoundaryMode::AnalyticDirichlet) {
        next.front() = psi_value(params, grid.x_min(), t_new, config.amplitude, config.variant);
        next.back() = psi_value(params, grid.x_max(), t_new, config.amplitude, config.variant);
    } else {
        next.front() = field[0];
        next.back() = field[n - 1];
    }

    const std::size_t m = n - 2;  // interior unknowns
    std::vector<cplx> sub(m, half_step * off);
    std::vector<cplx> super(m, half_step * off);
    std::vector<cplx> diag(m);
    std::vector<cplx> rhs(m);
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t i = j + 1;
        const double h_diag = -2.0 * off - s * potential(params, grid.x(i), t_half);
        diag[j] = 1.0 + half_step * h_diag;
        const cplx h_psi = off * (field[i - 1] + field[i + 1]) + h_diag * field[i];
        rhs[j] = field[i] - half_step * h_psi;
    }
    rhs.front() -= half_step * off * next.front();
    rhs.back() -= half_step * off * next.back();

    const std::vector<cplx> interior = solve_tridiagonal(sub, diag, super, rhs);
    std::copy(interior.begin(), interior.end(), next.begin() + 1);
    return ComplexField(grid, t_new, std::move(next));
}

Propagation propagate(const ModelParams& params, const PropagationConfig& config, const ComplexField& initial) {
    validate_config(params, config);
    if (!(initial.grid() == config.grid)) {
        throw ParameterError("initial field is not on the propagation grid");
    }
    Propagation out;
    out.snapshots.push_back(initial);
    ComplexField current = initial;
    const std::size_t steps = config.time.nt();
    for (std::size_t step = 1; step <= steps; ++step) {
        current = step_crank_nicolson(current, params, config);
        // pin the clock to t0 + n dt so snapshots do not drift
        current = ComplexField(config.grid, config.time.t(step), {current.values().begin(), current.values().end()});
        const bool on_stride = config.snapshot_stride > 0 && step % config.snapshot_stride == 0;
        if (on_stride || step == steps) {
            out.snapshots.push_back(current);
        }
    }
    return out;
}

AnalyticError error_vs_analytic(const ComplexField& field, const ModelParams& params, double amplitude,
                                PhaseVariant variant) {
    const GridSpec& grid = field.grid();
    AnalyticError err{0.0, 0.0};
    for (std::size_t i = 1; i + 1 < grid.nx(); ++i) {
        const cplx exact = psi_value(params, grid.x(i), field.time(), amplitude, variant);
        err.psi_linf = std::max(err.psi_linf, std::abs(field[i] - exact));
        err.density_linf = std::max(err.density_linf, std::fabs(std::norm(field[i]) - std::norm(exact)));
    }
    return err;
}

}  // namespace wavepacket
