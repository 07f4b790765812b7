#pragma once

// Kinematic checks on densities: front tracking, rigid-translation
// (nonspreading) deviation, and the direction of motion per branch.

#include <span>
#include <string>
#include <vector>

#include "wavepacket/model.hpp"

namespace wavepacket {

struct DensitySnapshot {
    double time;
    std::vector<double> density;
};

struct FrontTrack {
    std::vector<double> times;
    std::vector<double> positions;
    double fitted_velocity = 0.0;
    double intercept = 0.0;
    double fit_residual = 0.0;  ///< RMS of position - (intercept + v t)
};

/// Position of the density null produced by the first J0 zero: the rightmost
/// near-zero local minimum (the plateau lies at large x for both branches),
/// refined by bracketed root finding on a cubic interpolant of the signed
/// amplitude. Throws DomainError if no such null is inside the grid.
double locate_front(std::span<const double> density, const GridSpec& grid);

/// Where the first J0 zero sits for a branch or scan parameter set:
/// x_f(t) = -k t + 2 ln(lambda / j01).
double predicted_front(const ModelParams& params, double t);

/// Tracks the front through the snapshots and fits x_f = x_0 + v t by least
/// squares. Needs at least 3 snapshots. When params carry a coupling, the
/// predicted front must lie inside the grid at every time.
FrontTrack track_front(std::span<const DensitySnapshot> snapshots, const GridSpec& grid, const ModelParams& params);

struct ShapeDeviation {
    double linf;                 ///< max |rho(x, t) - rho(x - v (t - t0), t0)| over the overlap
    double interpolation_bound;  ///< cubic interpolation error bound plus a rounding floor
    std::size_t points;
};

/// Compares rho_t against rho_t0 translated by v (t - t0), using 4-point
/// cubic interpolation for off-grid shifts. Throws DomainError if the shifted
/// window leaves no overlap.
ShapeDeviation shape_deviation(std::span<const double> rho_t, std::span<const double> rho_t0, const GridSpec& grid,
                               double t, double t0, double velocity);

enum class Direction { Negative, Positive, Static };

std::string_view to_string(Direction d);

struct BranchDirection {
    Branch branch;
    double measured_velocity;
    Direction measured;
    Direction caption;  ///< direction stated in the figure caption for this branch
    bool matches_caption;
};

struct DirectionReport {
    BranchDirection plus;
    BranchDirection minus;
    bool opposite_signs;
    double velocity_sum;  ///< v_plus + v_minus
    bool equal_magnitude;  ///< |velocity_sum| <= 1e-6
};

/// Builds the report from two tracks (Plus first).
DirectionReport direction_report(const FrontTrack& plus, const FrontTrack& minus);

/// Tracks both analytic branch densities on the grid at the given times.
DirectionReport direction_report(double hbar, double mass, double coupling, const GridSpec& grid,
                                 std::span<const double> times);

}  // namespace wavepacket
