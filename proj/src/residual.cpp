#include "wavepacket/residual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wavepacket/parallel.hpp"
#include "wavepacket/specfun.hpp"

namespace wavepacket {

namespace {

// Accumulates interior residual norms.
class NormAccumulator {
public:
    void add(double residual_magnitude, double field_magnitude) {
        sum_sq_ += residual_magnitude * residual_magnitude;
        linf_ = std::max(linf_, residual_magnitude);
        scale_ = std::max(scale_, field_magnitude);
        ++points_;
    }

    ResidualReport report(const GridSpec& grid, double dt, SignConvention convention) const {
        ResidualReport r{0.0, 0.0, 0.0, grid, dt, convention, std::nullopt, points_};
        r.l2_norm = std::sqrt(sum_sq_ * grid.dx());
        r.linf_norm = linf_;
        r.field_scale = scale_;
        return r;
    }

    std::size_t points() const { return points_; }

private:
    double sum_sq_ = 0.0;
    double linf_ = 0.0;
    double scale_ = 0.0;
    std::size_t points_ = 0;
};

void check_stencil(const GridSpec& grid, double dt) {
    if (grid.nx() < 7) {
        throw ParameterError("residuals need at least 5 interior points");
    }
    if (!(dt > 0.0)) {
        throw ParameterError("time step must be positive");
    }
}

void check_polar(const PolarSamples& p, const GridSpec& grid) {
    if (p.amplitude.size() != grid.nx() || p.phase.size() != grid.nx()) {
        throw ParameterError("polar samples do not match the grid");
    }
}

}  // namespace

FieldSource analytic_field_source(const ModelParams& params, const GridSpec& grid, double amplitude,
                                  PhaseVariant variant) {
    return [params, grid, amplitude, variant](double t) { return eval_psi(params, grid, t, amplitude, variant); };
}

FieldSource superposed_field_source(const ModelParams& plus, const ModelParams& minus, const GridSpec& grid,
                                    double amplitude) {
    return [plus, minus, grid, amplitude](double t) {
        return eval_psi(plus, grid, t, amplitude) + eval_psi(minus, grid, t, amplitude);
    };
}

PolarSource analytic_polar_source(const ModelParams& params, const GridSpec& grid, double amplitude,
                                  PhaseVariant variant) {
    return [params, grid, amplitude, variant](double t) {
        return polar_samples(params, grid, t, amplitude, variant);
    };
}

PolarSource general_polar_source(const ModelParams& params, const PhaseParams& phase, const GridSpec& grid,
                                 double c1, double c2) {
    return [params, phase, grid, c1, c2](double t) {
        PolarSamples p;
        p.amplitude.resize(grid.nx());
        p.phase.resize(grid.nx());
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            const double x = grid.x(i);
            p.amplitude[i] = envelope_general(params, phase, x, t, c1, c2);
            p.phase[i] = phase.alpha() * (x - phase.beta() * t);
        }
        return p;
    };
}

ResidualReport tdse_residual(const FieldSource& source, const ModelParams& params, const GridSpec& grid,
                             double t, double dt, SignConvention convention) {
    check_stencil(grid, dt);
    const ComplexField before = source(t - dt);
    const ComplexField now = source(t);
    const ComplexField after = source(t + dt);
    for (const ComplexField* f : {&before, &now, &after}) {
        if (!(f->grid() == grid)) {
            throw ParameterError("field source returned samples on a different grid");
        }
    }

    const double hbar = params.hbar();
    const double kinetic = -hbar * hbar / (2.0 * params.mass() * grid.dx() * grid.dx());
    const cplx time_factor{0.0, -hbar / (2.0 * dt)};
    const double s = sign_of(convention);

    NormAccumulator acc;
    for (std::size_t i = 1; i + 1 < grid.nx(); ++i) {
        const cplx lap = now[i + 1] - 2.0 * now[i] + now[i - 1];
        const cplx r = kinetic * lap + time_factor * (after[i] - before[i]) -
                       s * potential(params, grid.x(i), t) * now[i];
        if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) {
            throw DomainError("non-finite residual at x = " + std::to_string(grid.x(i)));
        }
        acc.add(std::abs(r), std::abs(now[i]));
    }
    return acc.report(grid, dt, convention);
}

ResidualReport qhj_residual(const PolarSource& source, const ModelParams& params, const GridSpec& grid,
                            double t, double dt, SignConvention convention, double mask) {
    check_stencil(grid, dt);
    const PolarSamples before = source(t - dt);
    const PolarSamples now = source(t);
    const PolarSamples after = source(t + dt);
    check_polar(before, grid);
    check_polar(now, grid);
    check_polar(after, grid);

    const double m = params.mass();
    const double hbar = params.hbar();
    const double dx = grid.dx();
    const double s = sign_of(convention);
    double r_max = 0.0;
    for (double r : now.amplitude) {
        r_max = std::max(r_max, std::fabs(r));
    }

    NormAccumulator acc;
    for (std::size_t i = 1; i + 1 < grid.nx(); ++i) {
        const double r = now.amplitude[i];
        if (r_max == 0.0 || std::fabs(r) < mask * r_max) {
            continue;
        }
        const double s_t = (after.phase[i] - before.phase[i]) / (2.0 * dt);
        const double s_x = (now.phase[i + 1] - now.phase[i - 1]) / (2.0 * dx);
        const double r_xx = (now.amplitude[i + 1] - 2.0 * r + now.amplitude[i - 1]) / (dx * dx);
        const double residual =
            s_t + s_x * s_x / (2.0 * m) - s * potential(params, grid.x(i), t) - hbar * hbar / (2.0 * m) * r_xx / r;
        // scale: the kinetic term, which is O(alpha^2/m) for these solutions
        acc.add(std::fabs(residual), std::fabs(s_x * s_x / (2.0 * m)));
    }
    if (acc.points() == 0) {
        throw DomainError("quantum potential is masked on every interior point");
    }
    return acc.report(grid, dt, convention);
}

ResidualReport continuity_residual(const PolarSource& source, const ModelParams& params, const GridSpec& grid,
                                   double t, double dt) {
    check_stencil(grid, dt);
    const PolarSamples before = source(t - dt);
    const PolarSamples now = source(t);
    const PolarSamples after = source(t + dt);
    check_polar(before, grid);
    check_polar(now, grid);
    check_polar(after, grid);

    const double m = params.mass();
    const double dx = grid.dx();
    NormAccumulator acc;
    for (std::size_t i = 1; i + 1 < grid.nx(); ++i) {
        const double r_t = (after.amplitude[i] - before.amplitude[i]) / (2.0 * dt);
        const double r_x = (now.amplitude[i + 1] - now.amplitude[i - 1]) / (2.0 * dx);
        const double s_x = (now.phase[i + 1] - now.phase[i - 1]) / (2.0 * dx);
        const double s_xx = (now.phase[i + 1] - 2.0 * now.phase[i] + now.phase[i - 1]) / (dx * dx);
        const double residual = r_t + r_x * s_x / m + now.amplitude[i] * s_xx / (2.0 * m);
        acc.add(std::fabs(residual), std::fabs(now.amplitude[i]));
    }
    return acc.report(grid, dt, SignConvention::AsPrinted);
}

ResidualReport envelope_ode_residual(const PhaseParams& phase, const ModelParams& params, double t,
                                     const GridSpec& grid, SignConvention convention, double c1, double c2) {
    if (grid.nx() < 7) {
        throw ParameterError("residuals need at least 5 interior points");
    }
    std::vector<double> r(grid.nx());
    for (std::size_t i = 0; i < grid.nx(); ++i) {
        r[i] = envelope_general(params, phase, grid.x(i), t, c1, c2);
    }
    const double factor = 2.0 * params.mass() / (params.hbar() * params.hbar());
    const double s = sign_of(convention);
    const double dx = grid.dx();
    NormAccumulator acc;
    for (std::size_t i = 1; i + 1 < grid.nx(); ++i) {
        const double r_xx = (r[i + 1] - 2.0 * r[i] + r[i - 1]) / (dx * dx);
        const double residual = r_xx - factor * (phase.a() - s * potential(params, grid.x(i), t)) * r[i];
        if (!std::isfinite(residual)) {
            throw DomainError("non-finite envelope residual at x = " + std::to_string(grid.x(i)));
        }
        acc.add(std::fabs(residual), std::fabs(r[i]));
    }
    return acc.report(grid, 0.0, convention);
}

double observed_order(double coarse_error, double fine_error, double refinement) {
    return std::log(coarse_error / fine_error) / std::log(refinement);
}

ConvergenceStudy convergence_study(const std::function<double(const GridSpec&, double dt)>& run,
                                   const GridSpec& coarse, double dt_coarse, int levels) {
    if (levels < 2) {
        throw ParameterError("a convergence study needs at least two grids");
    }
    ConvergenceStudy study;
    GridSpec grid = coarse;
    double dt = dt_coarse;
    for (int level = 0; level < levels; ++level) {
        study.spacings.push_back(grid.dx());
        study.errors.push_back(run(grid, dt));
        if (level > 0) {
            const auto n = study.errors.size();
            study.orders.push_back(observed_order(study.errors[n - 2], study.errors[n - 1]));
        }
        grid = grid.refined();
        dt *= 0.5;
    }
    return study;
}

SignProbeVerdict sign_probe(const ModelParams& params, const GridSpec& grid, double t, double dt,
                            double amplitude) {
    const Branch branch = params.require_branch();
    std::vector<ProbeCandidate> candidates;
    std::vector<std::optional<PhaseVariant>> variants;
    if (branch == Branch::Minus) {
        variants = {PhaseVariant::Printed, PhaseVariant::Derived};
    } else {
        variants = {std::nullopt};
    }
    for (SignConvention convention : {SignConvention::AsPrinted, SignConvention::Flipped}) {
        for (const auto& variant : variants) {
            const auto source = analytic_field_source(params, grid, amplitude, variant.value_or(PhaseVariant::Derived));
            const ResidualReport rep = tdse_residual(source, params, grid, t, dt, convention);
            candidates.push_back({convention, variant, rep.linf_relative()});
        }
    }

    const auto best = std::min_element(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        return a.linf_relative < b.linf_relative;
    });
    const ProbeCandidate winner = *best;

    auto ratio_against = [&](auto&& excluded) {
        double other = std::numeric_limits<double>::infinity();
        for (const auto& c : candidates) {
            if (excluded(c)) {
                other = std::min(other, c.linf_relative);
            }
        }
        return winner.linf_relative > 0.0 ? other / winner.linf_relative : std::numeric_limits<double>::infinity();
    };

    SignProbeVerdict verdict{branch, winner.convention, winner.variant, 0.0, std::nullopt, false, candidates};
    verdict.residual_ratio = ratio_against([&](const ProbeCandidate& c) { return c.convention != winner.convention; });
    verdict.decisive = verdict.residual_ratio >= kDecisiveRatio;
    if (branch == Branch::Minus) {
        verdict.variant_ratio = ratio_against([&](const ProbeCandidate& c) { return c.variant != winner.variant; });
        verdict.decisive = verdict.decisive && *verdict.variant_ratio >= kDecisiveRatio;
    }
    return verdict;
}

SuperpositionReport superposition_residual(double hbar, double mass, double coupling, const GridSpec& grid,
                                           double t, double dt, SignConvention convention) {
    const ModelParams plus = ModelParams::make(hbar, mass, coupling, Branch::Plus);
    const ModelParams minus = ModelParams::make(hbar, mass, coupling, Branch::Minus);
    const FieldSource sum = superposed_field_source(plus, minus, grid);

    SuperpositionReport rep{};
    rep.plus_branch = tdse_residual(analytic_field_source(plus, grid), plus, grid, t, dt, convention).linf_relative();
    rep.minus_branch =
        tdse_residual(analytic_field_source(minus, grid), minus, grid, t, dt, convention).linf_relative();
    rep.sum_with_plus_decay = tdse_residual(sum, plus, grid, t, dt, convention).linf_relative();
    rep.sum_with_minus_decay = tdse_residual(sum, minus, grid, t, dt, convention).linf_relative();
    return rep;
}

double ScanAxis::value(std::size_t i) const {
    if (n <= 1) {
        return min;
    }
    return i + 1 == n ? max : min + static_cast<double>(i) * step();
}

double ConstraintScan::global_minimum() const { return *std::min_element(residual.begin(), residual.end()); }

double ConstraintScan::row_minimiser(double k_value) const {
    std::size_t ik = 0;
    for (std::size_t j = 1; j < ks.size(); ++j) {
        if (std::fabs(ks[j] - k_value) < std::fabs(ks[ik] - k_value)) {
            ik = j;
        }
    }
    std::size_t best = 0;
    for (std::size_t ia = 1; ia < alphas.size(); ++ia) {
        if (at(ia, ik) < at(best, ik)) {
            best = ia;
        }
    }
    return alphas[best];
}

double ConstraintScan::nearest(double alpha, double k) const {
    auto closest = [](const std::vector<double>& axis, double v) {
        std::size_t idx = 0;
        for (std::size_t j = 1; j < axis.size(); ++j) {
            if (std::fabs(axis[j] - v) < std::fabs(axis[idx] - v)) {
                idx = j;
            }
        }
        return idx;
    };
    return at(closest(alphas, alpha), closest(ks, k));
}

ConstraintScan constraint_scan(const ModelParams& params, const ScanAxis& alpha_axis, const ScanAxis& k_axis,
                               const GridSpec& grid, double t, double dt) {
    if (alpha_axis.n == 0 || k_axis.n == 0) {
        throw ParameterError("scan axes must be non-empty");
    }
    ConstraintScan scan;
    for (std::size_t i = 0; i < alpha_axis.n; ++i) {
        scan.alphas.push_back(alpha_axis.value(i));
    }
    for (std::size_t i = 0; i < k_axis.n; ++i) {
        scan.ks.push_back(k_axis.value(i));
    }
    scan.residual.assign(alpha_axis.n * k_axis.n, 0.0);

    const double m = params.mass();
    parallel_for(scan.residual.size(), [&](std::size_t idx) {
        const double alpha = scan.alphas[idx % alpha_axis.n];
        const double k = scan.ks[idx / alpha_axis.n];
        const ModelParams local = ModelParams::with_decay_rate(params.hbar(), m, params.coupling(), k);
        // beta = alpha/2m makes a = 0, hence q = 0
        const PhaseParams phase = PhaseParams::make(local, alpha, alpha / (2.0 * m));
        scan.residual[idx] = continuity_residual(general_polar_source(local, phase, grid), local, grid, t, dt).linf_norm;
    });
    return scan;
}

OrderRuleProbe order_rule_probe(const ModelParams& params, double alpha, double beta, const GridSpec& grid,
                                double t, double tolerance) {
    OrderRuleProbe probe;
    for (OrderRule rule : {OrderRule::PrintedRoot, OrderRule::DimensionalRoot, OrderRule::BesselMatched}) {
        std::optional<PhaseParams> phase;
        try {
            phase = PhaseParams::make(params, alpha, beta, rule);
        } catch (const ParameterError&) {
            phase.reset();
        }
        for (SignConvention convention : {SignConvention::AsPrinted, SignConvention::Flipped}) {
            OrderRuleProbe::Entry entry{rule, convention, std::nullopt};
            if (phase) {
                entry.linf_relative = envelope_ode_residual(*phase, params, t, grid, convention).linf_relative();
            }
            probe.entries.push_back(entry);
            if (entry.linf_relative && (!probe.best || *entry.linf_relative < *probe.best->linf_relative)) {
                probe.best = entry;
            }
        }
    }
    if (probe.best && *probe.best->linf_relative <= tolerance) {
        for (const auto& e : probe.entries) {
            if (e.convention == probe.best->convention && e.linf_relative &&
                *e.linf_relative <= kDecisiveRatio * *probe.best->linf_relative && *e.linf_relative <= tolerance) {
                probe.consistent_rules.push_back(e.rule);
            }
        }
    }
    return probe;
}

}  // namespace wavepacket
