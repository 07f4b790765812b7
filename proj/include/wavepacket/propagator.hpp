#pragma once

// Crank-Nicolson propagation of
//   i hbar Psi_t = -(hbar^2/2m) Psi_xx - s C e^{-x-kt} Psi
// on a truncated domain. With analytic Dirichlet data this is a
// manufactured-solution check of the closed forms: the interior is evolved
// numerically and compared against the analytic field.

#include <cstddef>
#include <span>
#include <vector>

#include "wavepacket/model.hpp"

namespace wavepacket {

enum class BoundaryMode { AnalyticDirichlet, FrozenDirichlet };

std::string_view to_string(BoundaryMode mode);

struct PropagationConfig {
    GridSpec grid;
    TimeSpec time;
    SignConvention convention = SignConvention::AsPrinted;
    BoundaryMode bc_mode = BoundaryMode::AnalyticDirichlet;
    double tol_linf = 5e-4;
    std::size_t snapshot_stride = 0;  ///< 0: initial and final only
    double potential_cap = 1e6;       ///< max e^{-x_min - k t} over the run
    PhaseVariant variant = PhaseVariant::Derived;
    double amplitude = 1.0;  ///< c, used for analytic boundary values

    /// hbar dt / (2 m dx^2). Informational: the scheme is unconditionally stable.
    double cfl_diagnostic(const ModelParams& params) const;
};

/// Throws DomainError when the potential at x_min exceeds the cap at any time
/// of the run, ParameterError for inconsistent settings.
void validate_config(const ModelParams& params, const PropagationConfig& config);

/// Solves a x_{i-1} + b x_i + c x_{i+1} = d (Thomas algorithm). The first
/// sub-diagonal and last super-diagonal entries are ignored. Throws
/// NumericalError on a vanishing pivot.
std::vector<cplx> solve_tridiagonal(std::span<const cplx> sub, std::span<const cplx> diag,
                                    std::span<const cplx> super, std::span<const cplx> rhs);

/// One step from field.time() to field.time() + config.time.dt(). The
/// potential is evaluated at the half step.
ComplexField step_crank_nicolson(const ComplexField& field, const ModelParams& params,
                                 const PropagationConfig& config);

struct Propagation {
    std::vector<ComplexField> snapshots;  ///< initial, every stride steps, final
};

Propagation propagate(const ModelParams& params, const PropagationConfig& config, const ComplexField& initial);

/// Interior L-infinity of |field - analytic| and of the density difference.
struct AnalyticError {
    double psi_linf;
    double density_linf;
};

AnalyticError error_vs_analytic(const ComplexField& field, const ModelParams& params, double amplitude = 1.0,
                                PhaseVariant variant = PhaseVariant::Derived);

}  // namespace wavepacket
