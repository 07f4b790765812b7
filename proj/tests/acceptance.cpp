// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Reference values come from oracles.hpp or from the
// closed forms written out here, not from the library under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "json.hpp"
#include "oracles.hpp"
#include "wavepacket/analytic.hpp"
#include "wavepacket/cli.hpp"
#include "wavepacket/metrics.hpp"
#include "wavepacket/propagator.hpp"
#include "wavepacket/residual.hpp"
#include "wavepacket/specfun.hpp"

using namespace wavepacket;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check, double budget_s) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > budget_s) {
        o.pass = false;
        o.detail += "; over the time budget";
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s [%d] %s: %s (%.2f s, budget %.0f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
                o.detail.c_str(), elapsed, budget_s);
    std::fflush(stdout);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

const ModelParams kPlus = make_params(1.0, 1.0, 0.125, Branch::Plus);
const ModelParams kMinus = make_params(1.0, 1.0, 0.125, Branch::Minus);
const GridSpec kCoarse = GridSpec::make(-2.0, 10.0, 3001);  // dx = dt = 4e-3 at level 0
constexpr double kDtCoarse = 4e-3;
constexpr int kLevels = 3;

// ------------------------------------------------------------------ 1

Outcome special_functions() {
    double worst = 0.0;
    double worst_oracle = 0.0;
    for (int i = 0; i < 500; ++i) {
        const double z = 50.0 * i / 499.0;
        const double series = specfun::bessel_j(0.0, z);
        worst = std::max(worst, std::fabs(series - specfun::bessel_j0_integral(z)));
        worst_oracle = std::max(worst_oracle, std::fabs(series - std::cyl_bessel_j(0.0, z)));
    }
    return {worst <= 1e-12 && worst_oracle <= 1e-12,
            "max |J0 - integral| = " + fmt(worst) + ", max |J0 - std::cyl_bessel_j| = " + fmt(worst_oracle)};
}

// ------------------------------------------------------------------ 2

std::vector<double> tdse_levels(const ModelParams& p, SignConvention c, PhaseVariant v) {
    std::vector<double> e;
    GridSpec g = kCoarse;
    double dt = kDtCoarse;
    for (int l = 0; l < kLevels; ++l) {
        e.push_back(tdse_residual(analytic_field_source(p, g, 1.0, v), p, g, 0.5, dt, c).linf_relative());
        g = g.refined();
        dt /= 2.0;
    }
    return e;
}

bool shrinks_by_four(const std::vector<double>& e) {
    for (std::size_t i = 1; i < e.size(); ++i) {
        const double r = e[i - 1] / e[i];
        if (!(r >= 4.0 * 0.85 && r <= 4.0 * 1.15)) {
            return false;
        }
    }
    return true;
}

Outcome sign_probe_decisiveness() {
    bool ok = true;
    std::string detail;
    for (const ModelParams& p : {kPlus, kMinus}) {
        const bool minus = p.branch() == Branch::Minus;
        std::vector<PhaseVariant> variants{PhaseVariant::Derived};
        if (minus) {
            variants.push_back(PhaseVariant::Printed);
        }
        int converging = 0;
        std::vector<double> best_win;
        std::vector<double> best_lose;
        std::string winner;
        for (SignConvention c : {SignConvention::AsPrinted, SignConvention::Flipped}) {
            std::vector<std::vector<double>> converged;
            std::vector<double> lowest(kLevels, INFINITY);
            for (PhaseVariant v : variants) {
                const auto e = tdse_levels(p, c, v);
                if (shrinks_by_four(e)) {
                    converged.push_back(e);
                }
                for (int l = 0; l < kLevels; ++l) {
                    lowest[l] = std::min(lowest[l], e[l]);
                }
            }
            if (!converged.empty()) {
                ++converging;
                best_win = converged.front();
                winner = std::string(to_string(c));
            } else {
                best_lose = lowest;
            }
        }
        double ratio = 0.0;
        if (converging == 1) {
            ratio = INFINITY;
            for (std::size_t i = 0; i < best_win.size(); ++i) {
                ratio = std::min(ratio, best_lose[i] / best_win[i]);
            }
        }
        const bool branch_ok = converging == 1 && ratio >= 10.0;
        ok = ok && branch_ok;
        detail += std::string(to_string(*p.branch())) + ": " + std::to_string(converging) + " converging convention(s)" +
                  (converging == 1 ? " (" + winner + ", shrink " + fmt(best_win[0] / best_win[1]) + "/" +
                                         fmt(best_win[1] / best_win[2]) + ", min ratio " + fmt(ratio) + ")"
                                   : "") +
                  (minus ? "" : "; ");
    }
    return {ok, detail};
}

// ------------------------------------------------------------------ 3

Outcome constraint_recovery() {
    const double m = 1.0;
    const GridSpec g = GridSpec::make(-2.0, 10.0, 1201);
    const ScanAxis alphas{-4.0 * m, 4.0 * m, 33};
    const ScanAxis ks{-4.0, 4.0, 33};
    const ConstraintScan s = constraint_scan(kPlus, alphas, ks, g, 0.5, 0.01);
    const double cell = alphas.step();
    const double a_plus = s.row_minimiser(-2.0);
    const double a_minus = s.row_minimiser(2.0);
    const double r_plus = s.nearest(2.0 * m, -2.0);
    const double r_minus = s.nearest(-2.0 * m, 2.0);
    // residual along the valley k = -alpha/m versus its neighbours one cell off
    double valley = 0.0;
    for (std::size_t ik = 0; ik < ks.n; ++ik) {
        valley = std::max(valley, s.nearest(-ks.value(ik) * m, ks.value(ik)));
    }
    const bool ok = std::fabs(a_plus - 2.0 * m) <= cell && std::fabs(a_minus + 2.0 * m) <= cell && r_plus <= 1e-3 &&
                    r_minus <= 1e-3;
    return {ok, "row minimiser at k=-2: alpha=" + fmt(a_plus) + ", at k=+2: alpha=" + fmt(a_minus) +
                    ", node residuals " + fmt(r_plus) + " / " + fmt(r_minus) + "; the surface is a valley along " +
                    "k = -alpha/m (max on valley " + fmt(valley) + ", global min " + fmt(s.global_minimum()) +
                    " at alpha=k=0), so the two sites are row minima rather than isolated minima"};
}

// ------------------------------------------------------------------ 4 and 5

struct PropagationLevel {
    double dx;
    double psi_linf;
    double density_linf;
};

std::vector<PropagationLevel> propagation_study(const ModelParams& p) {
    std::vector<PropagationLevel> out;
    GridSpec g = kCoarse;
    std::size_t nt = 250;
    for (int l = 0; l < kLevels; ++l) {
        PropagationConfig cfg{g, TimeSpec::make(0.0, 1.0, nt)};
        const Propagation run = propagate(p, cfg, eval_psi(p, g, 0.0));
        // closed form written out independently of the library's evaluator
        double psi_err = 0.0;
        double rho_err = 0.0;
        const ComplexField& f = run.snapshots.back();
        for (std::size_t i = 1; i + 1 < g.nx(); ++i) {
            const double x = g.x(i);
            const double k = p.k();
            const double r = static_cast<double>(oracle::bessel_series(0, std::exp(-(x + k * 1.0) / 2.0)));
            const double s = k < 0 ? 2.0 * (x - 1.0) : -2.0 * (x + 1.0);
            psi_err = std::max(psi_err, std::abs(f[i] - std::polar(r, s)));
            rho_err = std::max(rho_err, std::fabs(std::norm(f[i]) - r * r));
        }
        out.push_back({g.dx(), psi_err, rho_err});
        g = g.refined();
        nt *= 2;
    }
    return out;
}

Outcome manufactured_propagation() {
    bool ok = true;
    std::string detail;
    for (const ModelParams& p : {kPlus, kMinus}) {
        const auto levels = propagation_study(p);
        const double o1 = std::log2(levels[0].psi_linf / levels[1].psi_linf);
        const double o2 = std::log2(levels[1].psi_linf / levels[2].psi_linf);
        const bool branch_ok =
            levels[2].psi_linf <= 5e-4 && o1 >= 1.7 && o1 <= 2.3 && o2 >= 1.7 && o2 <= 2.3;
        ok = ok && branch_ok;
        detail += std::string(to_string(*p.branch())) + ": L_inf " + fmt(levels[0].psi_linf) + " -> " +
                  fmt(levels[2].psi_linf) + " at dx=dt=" + fmt(levels[2].dx) + ", orders " + fmt(o1) + ", " + fmt(o2) +
                  (p.branch() == Branch::Plus ? "; " : "");
    }
    return {ok, detail};
}

Outcome nonspreading() {
    // analytic: fitted velocity from the front track, then the translation identity
    const GridSpec g = GridSpec::make(-8.0, 12.0, 2001);
    std::vector<DensitySnapshot> snaps;
    for (int i = 0; i <= 20; ++i) {
        snaps.push_back({0.1 * i, eval_psi(kPlus, g, 0.1 * i).density()});
    }
    const double v = track_front(snaps, g, kPlus).fitted_velocity;
    double worst_ratio = 0.0;
    for (double t = 0.0; t <= 2.0 + 1e-12; t += 0.0625 + 0.00123) {
        const std::vector<double> rho = eval_psi(kPlus, g, t).density();
        const ShapeDeviation d = shape_deviation(rho, snaps.front().density, g, t, 0.0, v);
        worst_ratio = std::max(worst_ratio, d.linf / d.interpolation_bound);
    }

    // propagated: compare every snapshot against the translated initial density
    const GridSpec pg = GridSpec::make(-2.0, 10.0, 6001);
    PropagationConfig cfg{pg, TimeSpec::make(0.0, 1.0, 500)};
    cfg.snapshot_stride = 50;
    const Propagation run = propagate(kPlus, cfg, eval_psi(kPlus, pg, 0.0));
    const std::vector<double> rho0 = run.snapshots.front().density();
    double worst_dynamic = 0.0;
    for (const ComplexField& f : run.snapshots) {
        const double prop_err = error_vs_analytic(f, kPlus).density_linf;
        const ShapeDeviation d = shape_deviation(f.density(), rho0, pg, f.time(), 0.0, v);
        const double allowed = 10.0 * prop_err + d.interpolation_bound;
        worst_dynamic = std::max(worst_dynamic, d.linf / allowed);
    }
    return {worst_ratio <= 100.0 && worst_dynamic <= 1.0,
            "fitted v=" + fmt(v) + "; analytic deviation / interpolation bound <= " + fmt(worst_ratio) +
                "; propagated deviation / (10 x propagation error + bound) <= " + fmt(worst_dynamic)};
}

// ------------------------------------------------------------------ 6

Outcome counterpropagation() {
    const GridSpec g = GridSpec::make(-8.0, 12.0, 4001);
    const std::vector<double> times{0.0, 0.5, 1.0, 1.5, 2.0};
    const DirectionReport r = direction_report(1.0, 1.0, 0.125, g, times);
    const bool ok = std::fabs(r.plus.measured_velocity - 2.0) <= 1e-6 &&
                    std::fabs(r.minus.measured_velocity + 2.0) <= 1e-6 && std::fabs(r.velocity_sum) <= 1e-6;
    auto caption = [](const BranchDirection& b) {
        return std::string(to_string(b.measured)) + " vs caption " + std::string(to_string(b.caption)) +
               (b.matches_caption ? " (agrees)" : " (contradicts caption)");
    };
    return {ok, "v_plus=" + fmt(r.plus.measured_velocity) + ", v_minus=" + fmt(r.minus.measured_velocity) +
                    ", |sum|=" + fmt(std::fabs(r.velocity_sum)) + "; plus " + caption(r.plus) + ", minus " +
                    caption(r.minus)};
}

// ------------------------------------------------------------------ 7

Outcome superposition() {
    std::vector<SuperpositionReport> levels;
    GridSpec g = kCoarse;
    double dt = kDtCoarse;
    for (int l = 0; l < kLevels; ++l) {
        levels.push_back(superposition_residual(1.0, 1.0, 0.125, g, 0.5, dt));
        g = g.refined();
        dt /= 2.0;
    }
    bool ok = true;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        ok = ok && levels[i].sum_floor() >= 1e-2;
        if (i > 0) {
            ok = ok && levels[i].sum_floor() >= 0.9 * levels[i - 1].sum_floor();
            ok = ok && levels[i].plus_branch < levels[i - 1].plus_branch / 3.0;
            ok = ok && levels[i].minus_branch < levels[i - 1].minus_branch / 3.0;
        }
    }
    return {ok, "sum floor " + fmt(levels[0].sum_floor()) + " -> " + fmt(levels.back().sum_floor()) +
                    " while branches go " + fmt(levels[0].plus_branch) + " -> " + fmt(levels.back().plus_branch) +
                    " and " + fmt(levels[0].minus_branch) + " -> " + fmt(levels.back().minus_branch)};
}

// ------------------------------------------------------------------ 8

Outcome free_particle() {
    const ModelParams weak = make_params(1.0, 1.0, 1e-12, Branch::Plus);
    // the field itself must approach the plane wave e^{2i(x - t)}
    double field_gap = 0.0;
    const ComplexField psi = eval_psi(weak, kCoarse, 0.5);
    for (std::size_t i = 0; i < kCoarse.nx(); ++i) {
        field_gap = std::max(field_gap, std::abs(psi[i] - std::polar(1.0, 2.0 * (kCoarse.x(i) - 0.5))));
    }
    std::vector<double> e;
    GridSpec g = kCoarse;
    double dt = kDtCoarse;
    for (int l = 0; l < kLevels; ++l) {
        e.push_back(
            tdse_residual(analytic_field_source(weak, g), weak, g, 0.5, dt, SignConvention::AsPrinted).linf_relative());
        g = g.refined();
        dt /= 2.0;
    }
    const double o1 = std::log2(e[0] / e[1]);
    const double o2 = std::log2(e[1] / e[2]);
    // leading truncation terms for p = 2, E = 2 (hbar = m = 1): the Laplacian
    // contributes -(hbar^2/2m) p^4 dx^2/12, the time difference +E^3 dt^2/6
    const double predicted = std::fabs(8.0 * kDtCoarse * kDtCoarse / 6.0 - 8.0 * kDtCoarse * kDtCoarse / 12.0);
    const bool ok = field_gap <= 1e-10 && o1 >= 1.7 && o1 <= 2.3 && o2 >= 1.7 && o2 <= 2.3 &&
                    std::fabs(e[0] / predicted - 1.0) <= 0.05;
    return {ok, "|Psi - plane wave| <= " + fmt(field_gap) + ", residual " + fmt(e[0]) + " (predicted " + fmt(predicted) +
                    "), orders " + fmt(o1) + ", " + fmt(o2)};
}

// ------------------------------------------------------------------ 9

std::vector<std::vector<double>> read_csv(const fs::path& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            row.push_back(std::stod(cell));
        }
        rows.push_back(row);
    }
    return rows;
}

// blocks of "x t rho" separated by blank lines
std::vector<std::vector<std::array<double, 3>>> read_surface(const fs::path& path) {
    std::ifstream in(path);
    std::string line;
    std::vector<std::vector<std::array<double, 3>>> blocks(1);
    while (std::getline(in, line)) {
        if (line.empty()) {
            if (!blocks.back().empty()) {
                blocks.emplace_back();
            }
            continue;
        }
        if (line[0] == '#') {
            continue;
        }
        std::array<double, 3> v{};
        std::stringstream ss(line);
        ss >> v[0] >> v[1] >> v[2];
        blocks.back().push_back(v);
    }
    if (blocks.back().empty()) {
        blocks.pop_back();
    }
    return blocks;
}

Outcome figure_data() {
    const fs::path dir = fs::temp_directory_path() / ("wavepacket_acceptance_" + std::to_string(::getpid()));
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run({"figures", "--out-dir", dir.string()}, out, err);
    if (code != 0) {
        return {false, "figures exited with " + std::to_string(code) + ": " + err.str()};
    }
    const auto manifest = nlohmann::json::parse(std::ifstream(dir / "manifest.json"));
    const double lambda = manifest["parameters"]["lambda"].get<double>();
    const double c2 = 1.0;  // amplitude c = 1
    bool ok = std::fabs(8.0 * manifest["parameters"]["mass"].get<double>() *
                            manifest["parameters"]["coupling_C"].get<double>() /
                            std::pow(manifest["parameters"]["hbar"].get<double>(), 2) -
                        1.0) <= 1e-15 &&
              lambda == 1.0;
    double max_rho = 0.0;
    double worst_translation = 0.0;

    for (int fig : {1, 2}) {
        const double v = fig == 1 ? 2.0 : -2.0;
        const auto rows = read_csv(dir / ("fig" + std::to_string(fig) + ".csv"));
        const GridSpec g = GridSpec::make(rows.front()[0], rows.back()[0], rows.size());
        const std::vector<double> times{0.0, 1.0, 2.0, 3.0};
        std::vector<std::vector<double>> cols(times.size(), std::vector<double>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = 0; j < times.size(); ++j) {
                cols[j][i] = rows[i][j + 1];
                max_rho = std::max(max_rho, cols[j][i]);
            }
        }
        for (std::size_t j = 1; j < times.size(); ++j) {
            const ShapeDeviation d = shape_deviation(cols[j], cols[j - 1], g, times[j], times[j - 1], v);
            worst_translation = std::max(worst_translation, d.linf / d.interpolation_bound);
        }
    }
    for (int fig : {3, 4}) {
        const double v = fig == 3 ? 2.0 : -2.0;
        const auto blocks = read_surface(dir / ("fig" + std::to_string(fig) + ".dat"));
        ok = ok && blocks.size() >= 2;
        const GridSpec g = GridSpec::make(blocks[0].front()[0], blocks[0].back()[0], blocks[0].size());
        std::vector<double> prev;
        double t_prev = 0.0;
        for (const auto& b : blocks) {
            std::vector<double> rho;
            for (const auto& p : b) {
                rho.push_back(p[2]);
                max_rho = std::max(max_rho, p[2]);
            }
            if (!prev.empty()) {
                const ShapeDeviation d = shape_deviation(rho, prev, g, b[0][1], t_prev, v);
                worst_translation = std::max(worst_translation, d.linf / d.interpolation_bound);
            }
            prev = rho;
            t_prev = b[0][1];
        }
    }
    fs::remove_all(dir);
    ok = ok && max_rho <= c2 * (1.0 + 1e-15) && worst_translation <= 100.0;
    return {ok, "max density " + fmt(max_rho) + " <= c^2 = 1, successive curves translate with deviation <= " +
                    fmt(worst_translation) + " x interpolation bound"};
}

}  // namespace

int main() {
    report(1, "special-function agreement", special_functions, 1.0);
    report(2, "sign-probe decisiveness", sign_probe_decisiveness, 30.0);
    report(3, "constraint recovery", constraint_recovery, 60.0);
    report(4, "manufactured-solution propagation", manufactured_propagation, 300.0);
    report(5, "nonspreading", nonspreading, 300.0);
    report(6, "counterpropagation", counterpropagation, 60.0);
    report(7, "superposition non-closure", superposition, 60.0);
    report(8, "free-particle limit", free_particle, 60.0);
    report(9, "figure-data reproduction", figure_data, 60.0);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
