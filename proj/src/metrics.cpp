#include "wavepacket/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "wavepacket/analytic.hpp"
#include "wavepacket/specfun.hpp"

namespace wavepacket {

namespace {

constexpr double kNullThreshold = 1e-2;  // relative to max density

// Cubic Lagrange interpolation through f[j-1..j+2] at x_j + u dx.
double cubic_at(std::span<const double> f, std::size_t j, double u) {
    const double wm1 = -u * (u - 1.0) * (u - 2.0) / 6.0;
    const double w0 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
    const double w1 = -(u + 1.0) * u * (u - 2.0) / 2.0;
    const double w2 = (u + 1.0) * u * (u - 1.0) / 6.0;
    return wm1 * f[j - 1] + w0 * f[j] + w1 * f[j + 1] + w2 * f[j + 2];
}

double fourth_difference(std::span<const double> f, std::size_t i) {
    return f[i] - 4.0 * f[i + 1] + 6.0 * f[i + 2] - 4.0 * f[i + 3] + f[i + 4];
}

}  // namespace

double locate_front(std::span<const double> density, const GridSpec& grid) {
    const std::size_t n = grid.nx();
    if (density.size() != n) {
        throw ParameterError("density samples do not match the grid");
    }
    const double rho_max = *std::max_element(density.begin(), density.end());
    if (!(rho_max > 0.0)) {
        throw DomainError("density vanishes identically; no front to track");
    }

    std::size_t null_index = 0;
    for (std::size_t i = n - 5; i >= 4; --i) {
        if (density[i] <= density[i - 1] && density[i] <= density[i + 1] && density[i] < kNullThreshold * rho_max) {
            null_index = i;
            break;
        }
    }
    if (null_index == 0) {
        throw DomainError("no density null inside the grid; the front is out of the window");
    }

    // Signed amplitude under the two placements of the zero relative to the
    // minimum sample; the wrong placement leaves a kink that shows up in the
    // fourth differences.
    const std::size_t lo = null_index - 3;
    struct Hypothesis {
        std::size_t first_positive;  // samples from here on get a + sign
        std::array<double, 7> signed_amp;
        double roughness;
    };
    std::array<Hypothesis, 2> hyp{{{null_index + 1, {}, 0.0}, {null_index, {}, 0.0}}};
    for (auto& h : hyp) {
        for (std::size_t j = 0; j < 7; ++j) {
            const double a = std::sqrt(std::max(0.0, density[lo + j]));
            h.signed_amp[j] = lo + j >= h.first_positive ? a : -a;
        }
        for (std::size_t w = 0; w < 3; ++w) {
            h.roughness = std::max(h.roughness, std::fabs(fourth_difference(h.signed_amp, w)));
        }
    }
    const Hypothesis& h = hyp[0].roughness <= hyp[1].roughness ? hyp[0] : hyp[1];

    // bracket [first_positive - 1, first_positive] in local indexing
    const std::size_t a = h.first_positive - 1 - lo;
    double u_lo = 0.0;
    double u_hi = 1.0;
    double f_lo = cubic_at(h.signed_amp, a, u_lo);
    if (f_lo == 0.0) {
        return grid.x(lo + a);
    }
    for (int iter = 0; iter < 200 && (u_hi - u_lo) > 1e-15; ++iter) {
        const double mid = 0.5 * (u_lo + u_hi);
        const double f_mid = cubic_at(h.signed_amp, a, mid);
        if (f_mid == 0.0) {
            u_lo = u_hi = mid;
            break;
        }
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            u_lo = mid;
            f_lo = f_mid;
        } else {
            u_hi = mid;
        }
    }
    return grid.x(lo + a) + 0.5 * (u_lo + u_hi) * grid.dx();
}

double predicted_front(const ModelParams& params, double t) {
    const auto lambda = params.lambda();
    if (!lambda) {
        throw DomainError("no envelope zero without a positive coupling");
    }
    return -params.k() * t + 2.0 * std::log(*lambda / specfun::kJ0FirstZero);
}

FrontTrack track_front(std::span<const DensitySnapshot> snapshots, const GridSpec& grid, const ModelParams& params) {
    if (snapshots.size() < 3) {
        throw ParameterError("front tracking needs at least 3 snapshots");
    }
    FrontTrack track;
    const double margin = 4.0 * grid.dx();
    for (const auto& snap : snapshots) {
        if (params.lambda()) {
            const double expected = predicted_front(params, snap.time);
            if (expected < grid.x_min() + margin || expected > grid.x_max() - margin) {
                throw DomainError("front at t = " + std::to_string(snap.time) + " lies outside the grid");
            }
        }
        track.times.push_back(snap.time);
        track.positions.push_back(locate_front(snap.density, grid));
    }

    const double n = static_cast<double>(track.times.size());
    double t_mean = 0.0;
    double x_mean = 0.0;
    for (std::size_t i = 0; i < track.times.size(); ++i) {
        t_mean += track.times[i];
        x_mean += track.positions[i];
    }
    t_mean /= n;
    x_mean /= n;
    double s_tt = 0.0;
    double s_tx = 0.0;
    for (std::size_t i = 0; i < track.times.size(); ++i) {
        s_tt += (track.times[i] - t_mean) * (track.times[i] - t_mean);
        s_tx += (track.times[i] - t_mean) * (track.positions[i] - x_mean);
    }
    if (!(s_tt > 0.0)) {
        throw ParameterError("front tracking needs distinct snapshot times");
    }
    track.fitted_velocity = s_tx / s_tt;
    track.intercept = x_mean - track.fitted_velocity * t_mean;
    double ss = 0.0;
    for (std::size_t i = 0; i < track.times.size(); ++i) {
        const double r = track.positions[i] - (track.intercept + track.fitted_velocity * track.times[i]);
        ss += r * r;
    }
    track.fit_residual = std::sqrt(ss / n);
    return track;
}

ShapeDeviation shape_deviation(std::span<const double> rho_t, std::span<const double> rho_t0, const GridSpec& grid,
                               double t, double t0, double velocity) {
    const std::size_t n = grid.nx();
    if (rho_t.size() != n || rho_t0.size() != n) {
        throw ParameterError("densities do not match the grid");
    }
    const double shift = velocity * (t - t0);
    const double dx = grid.dx();

    ShapeDeviation out{0.0, 0.0, 0};
    std::size_t j_lo = n;
    std::size_t j_hi = 0;
    double rho_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pos = (grid.x(i) - shift - grid.x_min()) / dx;
        double j_real = std::floor(pos);
        double u = pos - j_real;
        // snap shifts that are grid multiples up to rounding
        if (u > 1.0 - 1e-9) {
            j_real += 1.0;
            u = 0.0;
        } else if (u < 1e-9) {
            u = 0.0;
        }
        if (j_real < 1.0 || j_real > static_cast<double>(n) - 3.0) {
            continue;
        }
        const auto j = static_cast<std::size_t>(j_real);
        const double value = u == 0.0 ? rho_t0[j] : cubic_at(rho_t0, j, u);
        out.linf = std::max(out.linf, std::fabs(rho_t[i] - value));
        rho_max = std::max({rho_max, std::fabs(rho_t[i]), std::fabs(value)});
        j_lo = std::min(j_lo, j);
        j_hi = std::max(j_hi, j);
        ++out.points;
    }
    if (out.points == 0) {
        throw DomainError("translated window does not overlap the grid");
    }

    // |error| <= (9/16) h^4 max|f''''| / 4! = (3/128) max|Delta^4 f|
    double max_d4 = 0.0;
    const std::size_t from = j_lo >= 1 ? j_lo - 1 : 0;
    const std::size_t to = std::min(j_hi + 2, n - 1);
    for (std::size_t i = from; i + 4 <= to; ++i) {
        max_d4 = std::max(max_d4, std::fabs(fourth_difference(rho_t0, i)));
    }
    out.interpolation_bound = 3.0 / 128.0 * max_d4 + 16.0 * std::numeric_limits<double>::epsilon() * rho_max;
    return out;
}

std::string_view to_string(Direction d) {
    switch (d) {
        case Direction::Negative: return "negative";
        case Direction::Positive: return "positive";
        case Direction::Static: return "static";
    }
    return "unknown";
}

namespace {

Direction direction_of(double v) {
    constexpr double kStatic = 1e-9;
    if (v > kStatic) {
        return Direction::Positive;
    }
    if (v < -kStatic) {
        return Direction::Negative;
    }
    return Direction::Static;
}

BranchDirection describe(Branch branch, const FrontTrack& track) {
    // Figure captions: Psi_1 "negative x-direction", Psi_2 "positive x-direction".
    const Direction caption = branch == Branch::Plus ? Direction::Negative : Direction::Positive;
    const Direction measured = direction_of(track.fitted_velocity);
    return {branch, track.fitted_velocity, measured, caption, measured == caption};
}

}  // namespace

DirectionReport direction_report(const FrontTrack& plus, const FrontTrack& minus) {
    DirectionReport r{describe(Branch::Plus, plus), describe(Branch::Minus, minus), false, 0.0, false};
    r.velocity_sum = plus.fitted_velocity + minus.fitted_velocity;
    r.opposite_signs = plus.fitted_velocity * minus.fitted_velocity < 0.0;
    r.equal_magnitude = std::fabs(r.velocity_sum) <= 1e-6;
    return r;
}

DirectionReport direction_report(double hbar, double mass, double coupling, const GridSpec& grid,
                                 std::span<const double> times) {
    auto track_branch = [&](Branch b) {
        const ModelParams params = ModelParams::make(hbar, mass, coupling, b);
        std::vector<DensitySnapshot> snaps;
        for (double t : times) {
            snaps.push_back({t, eval_psi(params, grid, t).density()});
        }
        return track_front(snaps, grid, params);
    };
    return direction_report(track_branch(Branch::Plus), track_branch(Branch::Minus));
}

}  // namespace wavepacket
