#pragma once

// Finite-difference residuals of the Schroedinger equation, its
// Hamilton-Jacobi and continuity parts, and the envelope equation. All
// derivatives are second-order central differences; boundary points are
// excluded rather than treated with one-sided stencils.

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "wavepacket/analytic.hpp"
#include "wavepacket/model.hpp"

namespace wavepacket {

using FieldSource = std::function<ComplexField(double t)>;
using PolarSource = std::function<PolarSamples(double t)>;

FieldSource analytic_field_source(const ModelParams& params, const GridSpec& grid, double amplitude = 1.0,
                                  PhaseVariant variant = PhaseVariant::Derived);

/// Sum of the two branch solutions; both share hbar, mass and coupling of `plus`.
FieldSource superposed_field_source(const ModelParams& plus, const ModelParams& minus, const GridSpec& grid,
                                    double amplitude = 1.0);

PolarSource analytic_polar_source(const ModelParams& params, const GridSpec& grid, double amplitude = 1.0,
                                  PhaseVariant variant = PhaseVariant::Derived);

/// R from envelope_general (decay rate taken from params), S = alpha (x - beta t).
PolarSource general_polar_source(const ModelParams& params, const PhaseParams& phase, const GridSpec& grid,
                                 double c1 = 0.0, double c2 = 1.0);

struct ResidualReport {
    double l2_norm = 0.0;      ///< sqrt(sum |r|^2 dx) over interior points
    double linf_norm = 0.0;
    double field_scale = 0.0;  ///< L-infinity of the field (|Psi| or |R|) over the same points
    GridSpec grid;
    double dt_used = 0.0;
    SignConvention sign_convention = SignConvention::AsPrinted;
    std::optional<double> convergence_order;
    std::size_t points = 0;  ///< interior points that entered the norms

    double linf_relative() const { return field_scale > 0.0 ? linf_norm / field_scale : linf_norm; }
    double l2_relative() const { return field_scale > 0.0 ? l2_norm / field_scale : l2_norm; }
};

/// r = -(hbar^2/2m) D2 Psi - i hbar Dt Psi - s C e^{-x-kt} Psi, s = sign_of(convention).
ResidualReport tdse_residual(const FieldSource& source, const ModelParams& params, const GridSpec& grid,
                             double t, double dt, SignConvention convention);

/// Zero guard for the R''/R division in the Hamilton-Jacobi residual. Near a
/// simple zero of R the truncation error of D2 R is divided by |R|, so the
/// guard bounds the residual by O(dx^2) / guard.
inline constexpr double kHamiltonJacobiZeroGuard = 1e-2;

/// Real part of the equation under `convention`:
///   r = Dt S + (Dx S)^2/2m - s C e^{-x-kt} - (hbar^2/2m) D2 R / R.
/// The Hamilton-Jacobi equation with +C e^{-x-kt} corresponds to Flipped.
/// Points where |R| < mask * max|R| are excluded; throws DomainError if every
/// interior point is masked.
ResidualReport qhj_residual(const PolarSource& source, const ModelParams& params, const GridSpec& grid,
                            double t, double dt, SignConvention convention,
                            double mask = kHamiltonJacobiZeroGuard);

/// r = Dt R + (1/m) Dx R Dx S + (1/2m) R D2 S.
ResidualReport continuity_residual(const PolarSource& source, const ModelParams& params, const GridSpec& grid,
                                   double t, double dt);

/// Envelope equation implied by `convention` for S = alpha (x - beta t):
///   r = D2 R - (2m/hbar^2)(a - s C e^{-x-kt}) R,  R = envelope_general(c1, c2).
/// R'' = (2m/hbar^2)(C e^{-x-kt} + a) R is the Flipped form.
ResidualReport envelope_ode_residual(const PhaseParams& phase, const ModelParams& params, double t,
                                     const GridSpec& grid, SignConvention convention, double c1 = 0.0,
                                     double c2 = 1.0);

/// log2(coarse / fine) for a halving refinement.
double observed_order(double coarse_error, double fine_error, double refinement = 2.0);

struct ConvergenceStudy {
    std::vector<double> spacings;
    std::vector<double> errors;
    std::vector<double> orders;  ///< orders[i] compares levels i and i+1
};

/// Runs `run` on `levels` grids, halving dx and dt at every level.
ConvergenceStudy convergence_study(const std::function<double(const GridSpec&, double dt)>& run,
                                   const GridSpec& coarse, double dt_coarse, int levels);

struct ProbeCandidate {
    SignConvention convention;
    std::optional<PhaseVariant> variant;
    double linf_relative;
};

struct SignProbeVerdict {
    Branch branch;
    SignConvention winning_convention;
    std::optional<PhaseVariant> winning_phase_variant;  ///< Minus branch only
    /// Best residual under the other convention divided by the winner's.
    double residual_ratio;
    /// Minus branch: best residual with the other phase variant over the winner's.
    std::optional<double> variant_ratio;
    bool decisive;
    std::vector<ProbeCandidate> candidates;
};

inline constexpr double kDecisiveRatio = 10.0;

/// Evaluates the TDSE residual of the branch solution under both sign
/// conventions (and both phase variants for Minus) and picks the minimiser.
SignProbeVerdict sign_probe(const ModelParams& params, const GridSpec& grid, double t, double dt,
                            double amplitude = 1.0);

struct SuperpositionReport {
    double plus_branch;           ///< residual of Psi_1 alone (k = -2)
    double minus_branch;          ///< residual of Psi_2 alone (k = +2)
    double sum_with_plus_decay;   ///< residual of Psi_1 + Psi_2 against the k = -2 potential
    double sum_with_minus_decay;  ///< ... against the k = +2 potential

    /// Smallest residual the sum achieves over both potentials.
    double sum_floor() const { return std::min(sum_with_plus_decay, sum_with_minus_decay); }
};

/// Relative L-infinity TDSE residuals for the single branches and their sum.
/// t should be nonzero: at t = 0 both potentials coincide.
SuperpositionReport superposition_residual(double hbar, double mass, double coupling, const GridSpec& grid,
                                           double t, double dt,
                                           SignConvention convention = SignConvention::AsPrinted);

struct ScanAxis {
    double min;
    double max;
    std::size_t n;
    double value(std::size_t i) const;
    double step() const { return n > 1 ? (max - min) / static_cast<double>(n - 1) : 0.0; }
};

struct ConstraintScan {
    std::vector<double> alphas;
    std::vector<double> ks;
    std::vector<double> residual;  ///< continuity L-infinity, index ik * alphas.size() + ia

    double at(std::size_t ia, std::size_t ik) const { return residual[ik * alphas.size() + ia]; }
    double global_minimum() const;
    /// Alpha minimising the residual on the k row closest to k_value.
    double row_minimiser(double k_value) const;
    /// Residual at the grid node closest to (alpha, k).
    double nearest(double alpha, double k) const;
};

/// Continuity residual over an (alpha, k) grid for the q = 0 envelope
/// J0(lambda e^{-(x+kt)/2}) and phase alpha (x - beta t), beta = alpha/2m.
/// Only hbar, mass and coupling are read from params.
ConstraintScan constraint_scan(const ModelParams& params, const ScanAxis& alpha_axis, const ScanAxis& k_axis,
                               const GridSpec& grid, double t, double dt);

struct OrderRuleProbe {
    struct Entry {
        OrderRule rule;
        SignConvention convention;
        std::optional<double> linf_relative;  ///< nullopt when q is imaginary
    };
    std::vector<Entry> entries;
    std::optional<Entry> best;
    /// Rules whose residual under the best convention is within 10x of the
    /// best and below the tolerance; empty when no reading solves the equation.
    std::vector<OrderRule> consistent_rules;
};

/// Evaluates the envelope equation residual of c2 J_q Gamma(1+q) for every
/// reading of the a -> q map and both conventions.
OrderRuleProbe order_rule_probe(const ModelParams& params, double alpha, double beta, const GridSpec& grid,
                                double t, double tolerance = 1e-3);

}  // namespace wavepacket
