#pragma once

// Domain types shared by every module.
//
// Unit convention: x and t are dimensionless (the potential exponent is
// -x - k t), while hbar, mass and the coupling C stay explicit. The defaults
// hbar = m = 1, C = 1/8 give 8 m C / hbar^2 = 1.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "wavepacket/errors.hpp"

namespace wavepacket {

using cplx = std::complex<double>;

/// Plus is the k = -2 solution, Minus the k = +2 solution.
enum class Branch { Plus, Minus };

/// Placement of the potential term in the Schroedinger equation.
/// AsPrinted:  -(hbar^2/2m) Psi_xx = i hbar Psi_t + C e^{-x-kt} Psi
/// Flipped:    -(hbar^2/2m) Psi_xx = i hbar Psi_t - C e^{-x-kt} Psi
enum class SignConvention { AsPrinted, Flipped };

/// Phase of the Minus branch. Printed: S = -2m(x - t). Derived: S = -2m(x + t),
/// which is what S = alpha (x - beta t) gives for alpha = -2m, beta = alpha/2m.
enum class PhaseVariant { Printed, Derived };

/// Map from the reduced constant a to the Bessel order q.
///   PrintedRoot:     q = sqrt(-2 a m / hbar)
///   DimensionalRoot: q = sqrt(-2 a m) / hbar
///   BesselMatched:   q = sqrt(8 a m) / hbar  (the order for which J_q solves
///                    the envelope equation with the potential sign flipped)
enum class OrderRule { PrintedRoot, DimensionalRoot, BesselMatched };

std::string_view to_string(Branch b);
std::string_view to_string(SignConvention c);
std::string_view to_string(PhaseVariant v);
std::string_view to_string(OrderRule r);

/// +1 for AsPrinted, -1 for Flipped.
double sign_of(SignConvention c);

/// Decay rate tied to a branch: Plus -> -2, Minus -> +2.
double branch_decay_rate(Branch b);

class ModelParams {
public:
    /// Branch solution parameters. Requires hbar > 0, mass > 0, coupling > 0.
    static ModelParams make(double hbar, double mass, double coupling, Branch branch);

    /// Scan-mode parameters: no branch, free decay rate k, coupling >= 0.
    static ModelParams with_decay_rate(double hbar, double mass, double coupling, double k);

    double hbar() const { return hbar_; }
    double mass() const { return mass_; }
    double coupling() const { return coupling_; }
    double k() const { return k_; }
    std::optional<Branch> branch() const { return branch_; }

    /// sqrt(8 m C / hbar^2); defined only for C > 0.
    std::optional<double> lambda() const;

    /// lambda, or 0 when C == 0 (constant envelope).
    double envelope_scale() const;

    /// Branch accessor for operations that need one; throws ParameterError otherwise.
    Branch require_branch() const;

private:
    ModelParams(double hbar, double mass, double coupling, double k, std::optional<Branch> branch)
        : hbar_(hbar), mass_(mass), coupling_(coupling), k_(k), branch_(branch) {}

    double hbar_;
    double mass_;
    double coupling_;
    double k_;
    std::optional<Branch> branch_;
};

ModelParams make_params(double hbar, double mass, double coupling, Branch branch);

/// Coupling that yields the requested lambda: C = lambda^2 hbar^2 / (8 m).
double coupling_for_lambda(double lambda, double hbar, double mass);

/// C exp(-x - k t). Overflow is reported as +/-infinity.
double potential(const ModelParams& params, double x, double t);

/// Travelling-wave phase S = alpha (x - beta t) and the derived envelope constants.
class PhaseParams {
public:
    static PhaseParams make(const ModelParams& params, double alpha, double beta,
                            OrderRule rule = OrderRule::BesselMatched);

    /// The phase carried by a branch solution.
    static PhaseParams for_branch(const ModelParams& params, PhaseVariant variant = PhaseVariant::Derived);

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double a() const { return a_; }
    double q() const { return q_; }
    OrderRule rule() const { return rule_; }

private:
    PhaseParams(double alpha, double beta, double a, double q, OrderRule rule)
        : alpha_(alpha), beta_(beta), a_(a), q_(q), rule_(rule) {}

    double alpha_;
    double beta_;
    double a_;
    double q_;
    OrderRule rule_;
};

/// Bessel order from the reduced constant a under the given reading.
/// Throws ParameterError when the radicand is negative (imaginary order).
double order_from_reduced_constant(double a, double mass, double hbar, OrderRule rule);

class GridSpec {
public:
    static GridSpec make(double x_min, double x_max, std::size_t nx);

    /// Uniform grid with approximately the requested spacing; x_max is adjusted
    /// so that the spacing is exactly (x_max - x_min)/(nx - 1).
    static GridSpec with_spacing(double x_min, double x_max, double dx);

    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    std::size_t nx() const { return nx_; }
    double dx() const { return (x_max_ - x_min_) / static_cast<double>(nx_ - 1); }
    double x(std::size_t i) const;
    std::vector<double> points() const;

    /// Grid with every spacing halved (2 nx - 1 points, same bounds).
    GridSpec refined() const { return make(x_min_, x_max_, 2 * nx_ - 1); }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    GridSpec(double x_min, double x_max, std::size_t nx) : x_min_(x_min), x_max_(x_max), nx_(nx) {}

    double x_min_;
    double x_max_;
    std::size_t nx_;
};

class TimeSpec {
public:
    static TimeSpec make(double t0, double t1, std::size_t nt);

    double t0() const { return t0_; }
    double t1() const { return t1_; }
    std::size_t nt() const { return nt_; }
    double dt() const { return (t1_ - t0_) / static_cast<double>(nt_); }
    double t(std::size_t n) const { return n == nt_ ? t1_ : t0_ + static_cast<double>(n) * dt(); }

private:
    TimeSpec(double t0, double t1, std::size_t nt) : t0_(t0), t1_(t1), nt_(nt) {}

    double t0_;
    double t1_;
    std::size_t nt_;
};

/// Samples of Psi on a grid at one time. All entries finite.
class ComplexField {
public:
    ComplexField(GridSpec grid, double time, std::vector<cplx> values);

    static ComplexField zeros(GridSpec grid, double time);

    const GridSpec& grid() const { return grid_; }
    double time() const { return time_; }
    std::span<const cplx> values() const { return values_; }
    const cplx& operator[](std::size_t i) const { return values_[i]; }

    std::vector<double> density() const;

    /// Pointwise sum; both fields must share grid and time.
    friend ComplexField operator+(const ComplexField& lhs, const ComplexField& rhs);

private:
    GridSpec grid_;
    double time_;
    std::vector<cplx> values_;
};

}  // namespace wavepacket
