#include "wavepacket/model.hpp"

#include <cmath>
#include <string>

namespace wavepacket {

std::string_view to_string(Branch b) { return b == Branch::Plus ? "plus" : "minus"; }

std::string_view to_string(SignConvention c) {
    return c == SignConvention::AsPrinted ? "as-printed" : "flipped";
}

std::string_view to_string(PhaseVariant v) { return v == PhaseVariant::Printed ? "printed" : "derived"; }

std::string_view to_string(OrderRule r) {
    switch (r) {
        case OrderRule::PrintedRoot: return "printed-root";
        case OrderRule::DimensionalRoot: return "dimensional-root";
        case OrderRule::BesselMatched: return "bessel-matched";
    }
    return "unknown";
}

double sign_of(SignConvention c) { return c == SignConvention::AsPrinted ? 1.0 : -1.0; }

double branch_decay_rate(Branch b) { return b == Branch::Plus ? -2.0 : 2.0; }

namespace {

void check_scales(double hbar, double mass) {
    if (!(std::isfinite(hbar) && hbar > 0.0)) {
        throw ParameterError("hbar must be finite and positive, got " + std::to_string(hbar));
    }
    if (!(std::isfinite(mass) && mass > 0.0)) {
        throw ParameterError("mass must be finite and positive, got " + std::to_string(mass));
    }
}

}  // namespace

ModelParams ModelParams::make(double hbar, double mass, double coupling, Branch branch) {
    check_scales(hbar, mass);
    if (!(std::isfinite(coupling) && coupling > 0.0)) {
        throw ParameterError("branch solutions need a positive coupling C (envelope argument "
                             "would be imaginary), got " + std::to_string(coupling));
    }
    return ModelParams(hbar, mass, coupling, branch_decay_rate(branch), branch);
}

ModelParams ModelParams::with_decay_rate(double hbar, double mass, double coupling, double k) {
    check_scales(hbar, mass);
    if (!std::isfinite(coupling) || !std::isfinite(k)) {
        throw ParameterError("coupling and decay rate must be finite");
    }
    if (coupling < 0.0) {
        throw ParameterError("negative coupling gives an imaginary envelope argument");
    }
    return ModelParams(hbar, mass, coupling, k, std::nullopt);
}

std::optional<double> ModelParams::lambda() const {
    if (coupling_ > 0.0) {
        return std::sqrt(8.0 * mass_ * coupling_) / hbar_;
    }
    return std::nullopt;
}

double ModelParams::envelope_scale() const {
    if (coupling_ < 0.0) {
        throw ParameterError("negative coupling gives an imaginary envelope argument");
    }
    return lambda().value_or(0.0);
}

Branch ModelParams::require_branch() const {
    if (!branch_) {
        throw ParameterError("operation needs branch parameters (Plus or Minus)");
    }
    return *branch_;
}

ModelParams make_params(double hbar, double mass, double coupling, Branch branch) {
    return ModelParams::make(hbar, mass, coupling, branch);
}

double coupling_for_lambda(double lambda, double hbar, double mass) {
    return lambda * lambda * hbar * hbar / (8.0 * mass);
}

double potential(const ModelParams& params, double x, double t) {
    return params.coupling() * std::exp(-x - params.k() * t);
}

double order_from_reduced_constant(double a, double mass, double hbar, OrderRule rule) {
    if (a == 0.0) {
        return 0.0;
    }
    double radicand = 0.0;
    switch (rule) {
        case OrderRule::PrintedRoot: radicand = -2.0 * a * mass / hbar; break;
        case OrderRule::DimensionalRoot: radicand = -2.0 * a * mass; break;
        case OrderRule::BesselMatched: radicand = 8.0 * a * mass; break;
    }
    if (radicand < 0.0) {
        throw ParameterError("Bessel order is imaginary for a = " + std::to_string(a) + " under rule " +
                             std::string(to_string(rule)));
    }
    const double root = std::sqrt(radicand);
    return rule == OrderRule::PrintedRoot ? root : root / hbar;
}

PhaseParams PhaseParams::make(const ModelParams& params, double alpha, double beta, OrderRule rule) {
    if (!std::isfinite(alpha) || !std::isfinite(beta)) {
        throw ParameterError("phase constants must be finite");
    }
    const double a = alpha * alpha / (2.0 * params.mass()) - alpha * beta;
    const double q = order_from_reduced_constant(a, params.mass(), params.hbar(), rule);
    return PhaseParams(alpha, beta, a, q, rule);
}

PhaseParams PhaseParams::for_branch(const ModelParams& params, PhaseVariant variant) {
    const double m = params.mass();
    if (params.require_branch() == Branch::Plus) {
        return make(params, 2.0 * m, 1.0);
    }
    return make(params, -2.0 * m, variant == PhaseVariant::Derived ? -1.0 : 1.0);
}

GridSpec GridSpec::make(double x_min, double x_max, std::size_t nx) {
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max)) {
        throw ParameterError("grid bounds must be finite with x_min < x_max");
    }
    if (nx < 8) {
        throw ParameterError("grid needs at least 8 samples, got " + std::to_string(nx));
    }
    return GridSpec(x_min, x_max, nx);
}

GridSpec GridSpec::with_spacing(double x_min, double x_max, double dx) {
    if (!(dx > 0.0) || !std::isfinite(dx)) {
        throw ParameterError("grid spacing must be positive");
    }
    const auto cells = static_cast<std::size_t>(std::llround((x_max - x_min) / dx));
    return make(x_min, x_min + static_cast<double>(cells) * dx, cells + 1);
}

double GridSpec::x(std::size_t i) const {
    if (i + 1 == nx_) {
        return x_max_;
    }
    return x_min_ + static_cast<double>(i) * (x_max_ - x_min_) / static_cast<double>(nx_ - 1);
}

std::vector<double> GridSpec::points() const {
    std::vector<double> xs(nx_);
    for (std::size_t i = 0; i < nx_; ++i) {
        xs[i] = x(i);
    }
    return xs;
}

TimeSpec TimeSpec::make(double t0, double t1, std::size_t nt) {
    if (nt < 1) {
        throw ParameterError("time specification needs at least one step");
    }
    if (!std::isfinite(t0) || !std::isfinite(t1) || !(t1 > t0)) {
        throw ParameterError("time bounds must be finite with t1 > t0");
    }
    return TimeSpec(t0, t1, nt);
}

ComplexField::ComplexField(GridSpec grid, double time, std::vector<cplx> values)
    : grid_(grid), time_(time), values_(std::move(values)) {
    if (values_.size() != grid_.nx()) {
        throw ParameterError("field length " + std::to_string(values_.size()) + " does not match grid size " +
                             std::to_string(grid_.nx()));
    }
    for (const auto& v : values_) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw DomainError("field contains non-finite samples");
        }
    }
}

ComplexField ComplexField::zeros(GridSpec grid, double time) {
    return ComplexField(grid, time, std::vector<cplx>(grid.nx()));
}

std::vector<double> ComplexField::density() const {
    std::vector<double> rho(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) {
        rho[i] = std::norm(values_[i]);
    }
    return rho;
}

ComplexField operator+(const ComplexField& lhs, const ComplexField& rhs) {
    if (!(lhs.grid() == rhs.grid()) || lhs.time() != rhs.time()) {
        throw ParameterError("cannot add fields on different grids or times");
    }
    std::vector<cplx> sum(lhs.values_.size());
    for (std::size_t i = 0; i < sum.size(); ++i) {
        sum[i] = lhs.values_[i] + rhs.values_[i];
    }
    return ComplexField(lhs.grid_, lhs.time_, std::move(sum));
}

}  // namespace wavepacket
