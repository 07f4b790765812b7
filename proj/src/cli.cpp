#include "wavepacket/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wavepacket/analytic.hpp"
#include "wavepacket/io.hpp"
#include "wavepacket/metrics.hpp"
#include "wavepacket/model.hpp"
#include "wavepacket/propagator.hpp"
#include "wavepacket/residual.hpp"

namespace wavepacket::cli {

using nlohmann::json;

namespace {

constexpr double kOrderLow = 1.7;
constexpr double kOrderHigh = 2.3;
constexpr double kScanNodeTolerance = 1e-3;
constexpr double kSuperpositionFloor = 1e-2;

struct ModelOptions {
    double hbar = 1.0;
    double mass = 1.0;
    std::optional<double> coupling;
    std::optional<double> lambda;
    double amplitude = 1.0;
    std::string branch = "plus";
    std::string variant = "derived";

    void attach(CLI::App* app, bool with_branch = true) {
        app->add_option("--hbar", hbar, "reduced Planck constant")->capture_default_str();
        app->add_option("--mass", mass, "particle mass")->capture_default_str();
        app->add_option("--c,--coupling", coupling, "potential strength C (default 1/8)");
        app->add_option("--lambda", lambda, "sqrt(8 m C)/hbar; sets C");
        app->add_option("--amplitude", amplitude, "normalisation constant c")->capture_default_str();
        if (with_branch) {
            app->add_option("--branch", branch, "plus (k = -2) or minus (k = +2)")
                ->check(CLI::IsMember({"plus", "minus"}))
                ->capture_default_str();
        }
        app->add_option("--variant", variant, "phase of the minus branch: derived or printed")
            ->check(CLI::IsMember({"derived", "printed"}))
            ->capture_default_str();
    }

    double resolved_coupling() const {
        if (coupling && lambda) {
            throw ParameterError("give either --c or --lambda, not both");
        }
        if (lambda) {
            if (!(*lambda > 0.0)) {
                throw ParameterError("lambda must be positive");
            }
            return coupling_for_lambda(*lambda, hbar, mass);
        }
        return coupling.value_or(0.125);
    }

    Branch branch_value() const { return branch == "plus" ? Branch::Plus : Branch::Minus; }
    PhaseVariant variant_value() const { return variant == "printed" ? PhaseVariant::Printed : PhaseVariant::Derived; }
    ModelParams params() const { return ModelParams::make(hbar, mass, resolved_coupling(), branch_value()); }
};

SignConvention parse_convention(const std::string& s) {
    return s == "flipped" ? SignConvention::Flipped : SignConvention::AsPrinted;
}

void write_manifest(const std::filesystem::path& path, const std::string& command, const json& parameters) {
    io::RunManifest manifest{command, parameters, io::utc_timestamp()};
    io::write_atomic(path, manifest.to_json().dump(2) + "\n");
}

std::filesystem::path manifest_path_for(const std::string& out) { return out + ".manifest.json"; }

json study_json(const ConvergenceStudy& s) {
    return {{"spacings", s.spacings}, {"errors", s.errors}, {"orders", s.orders}};
}

bool orders_within(const ConvergenceStudy& s, double lo, double hi) {
    for (double o : s.orders) {
        if (!(o >= lo && o <= hi)) {
            return false;
        }
    }
    return !s.orders.empty();
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
    ModelOptions model;
    std::string x = "-2:10:2048";
    std::string t = "0";
    std::string out = "eval.csv";
};

int cmd_eval(const EvalOptions& o, std::ostream& out) {
    const ModelParams params = o.model.params();
    const GridSpec grid = io::parse_grid(o.x);
    const std::vector<double> times = io::parse_list(o.t);

    io::CsvWriter csv({"t", "x", "re", "im", "density", "phase", "current", "qpot"});
    for (double t : times) {
        const ComplexField psi = eval_psi(params, grid, t, o.model.amplitude, o.model.variant_value());
        const MadelungFields mf = madelung_fields(params, grid, t, o.model.amplitude, o.model.variant_value());
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            const double qpot = mf.qpot[i] ? *mf.qpot[i] : std::nan("");
            csv.row({t, grid.x(i), psi[i].real(), psi[i].imag(), mf.density[i], mf.phase[i] / params.hbar(),
                     mf.current[i], qpot});
        }
    }
    io::write_atomic(o.out, csv.str());

    json p = {{"model", io::to_json(params)},
              {"grid", io::to_json(grid)},
              {"times", times},
              {"amplitude", o.model.amplitude},
              {"phase_variant", std::string(to_string(o.model.variant_value()))},
              {"qpot_mask", kAmplitudeMask},
              {"output", o.out}};
    write_manifest(manifest_path_for(o.out), "eval", p);
    out << "wrote " << o.out << " (" << times.size() * grid.nx() << " rows)\n";
    return kExitOk;
}

// ---------------------------------------------------------------- propagate

struct PropagateOptions {
    ModelOptions model;
    std::string x = "-2:10:12001";
    double t0 = 0.0;
    double t1 = 1.0;
    std::size_t nt = 1000;
    std::string bc = "analytic";
    std::string initial = "analytic";
    std::string convention = "as-printed";
    std::size_t stride = 0;
    int refine = 0;
    double cap = 1e6;
    std::string out = "propagate";
};

PropagationConfig make_config(const PropagateOptions& o, const GridSpec& grid, std::size_t nt) {
    PropagationConfig cfg{grid, TimeSpec::make(o.t0, o.t1, nt)};
    cfg.convention = parse_convention(o.convention);
    cfg.bc_mode = o.bc == "frozen" ? BoundaryMode::FrozenDirichlet : BoundaryMode::AnalyticDirichlet;
    cfg.snapshot_stride = o.stride;
    cfg.potential_cap = o.cap;
    cfg.variant = o.model.variant_value();
    cfg.amplitude = o.model.amplitude;
    return cfg;
}

ComplexField initial_field(const PropagateOptions& o, const ModelParams& params, const GridSpec& grid) {
    if (o.initial == "zero") {
        return ComplexField::zeros(grid, o.t0);
    }
    return eval_psi(params, grid, o.t0, o.model.amplitude, o.model.variant_value());
}

int cmd_propagate(const PropagateOptions& o, std::ostream& out) {
    const ModelParams params = o.model.params();
    const GridSpec grid = io::parse_grid(o.x);
    const PropagationConfig cfg = make_config(o, grid, o.nt);
    validate_config(params, cfg);

    const Propagation run = propagate(params, cfg, initial_field(o, params, grid));

    io::CsvWriter snaps({"t", "x", "re", "im", "density"});
    io::CsvWriter errors({"t", "psi_linf", "density_linf"});
    for (const ComplexField& f : run.snapshots) {
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            snaps.row({f.time(), grid.x(i), f[i].real(), f[i].imag(), std::norm(f[i])});
        }
        const AnalyticError e = error_vs_analytic(f, params, o.model.amplitude, o.model.variant_value());
        errors.row({f.time(), e.psi_linf, e.density_linf});
    }
    io::write_atomic(o.out + ".snapshots.csv", snaps.str());
    io::write_atomic(o.out + ".errors.csv", errors.str());

    const AnalyticError final_error =
        error_vs_analytic(run.snapshots.back(), params, o.model.amplitude, o.model.variant_value());

    json orders = json::array();
    if (o.refine >= 2) {
        io::CsvWriter table({"level", "dx", "dt", "psi_linf", "density_linf", "order"});
        GridSpec g = grid;
        std::size_t nt = o.nt;
        double previous = 0.0;
        for (int level = 0; level < o.refine; ++level) {
            const PropagationConfig c = make_config(o, g, nt);
            validate_config(params, c);
            const Propagation r = propagate(params, c, initial_field(o, params, g));
            const AnalyticError e = error_vs_analytic(r.snapshots.back(), params, o.model.amplitude,
                                                      o.model.variant_value());
            const double order = level > 0 ? observed_order(previous, e.psi_linf) : std::nan("");
            table.row({static_cast<double>(level), g.dx(), c.time.dt(), e.psi_linf, e.density_linf, order});
            orders.push_back({{"dx", g.dx()}, {"dt", c.time.dt()}, {"psi_linf", e.psi_linf}, {"order", order}});
            out << "level " << level << ": dx=" << io::format_double(g.dx()) << " L_inf="
                << io::format_double(e.psi_linf) << (level > 0 ? " order=" + io::format_double(order) : "") << "\n";
            previous = e.psi_linf;
            g = g.refined();
            nt *= 2;
        }
        io::write_atomic(o.out + ".orders.csv", table.str());
    }

    json p = {{"model", io::to_json(params)},
              {"grid", io::to_json(grid)},
              {"time", {{"t0", o.t0}, {"t1", o.t1}, {"nt", o.nt}, {"dt", cfg.time.dt()}}},
              {"scheme", "crank-nicolson"},
              {"boundary", std::string(to_string(cfg.bc_mode))},
              {"initial", o.initial},
              {"sign_convention", std::string(to_string(cfg.convention))},
              {"phase_variant", std::string(to_string(cfg.variant))},
              {"amplitude", o.model.amplitude},
              {"snapshot_stride", o.stride},
              {"potential_cap", o.cap},
              {"cfl_diagnostic", cfg.cfl_diagnostic(params)},
              {"tol_linf", cfg.tol_linf},
              {"refine_levels", o.refine},
              {"output_prefix", o.out}};
    p["final_psi_linf"] = final_error.psi_linf;
    p["orders"] = orders;
    write_manifest(manifest_path_for(o.out), "propagate", p);
    out << "final interior L_inf error vs closed form: " << io::format_double(final_error.psi_linf) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- figures

struct FigureOptions {
    double hbar = 1.0;
    double mass = 1.0;
    double amplitude = 1.0;
    int fig = 0;
    std::string out_dir = "figures";
    std::string x = "-8:12:2001";
    std::string times = "0,1,2,3";
    std::string surface_x = "-8:12:201";
    std::string surface_t = "0:3:31";
};

ModelParams figure_params(const FigureOptions& o, Branch b) {
    return ModelParams::make(o.hbar, o.mass, coupling_for_lambda(1.0, o.hbar, o.mass), b);
}

json write_curves(const FigureOptions& o, int fig, Branch b) {
    const ModelParams params = figure_params(o, b);
    const GridSpec grid = io::parse_grid(o.x);
    const std::vector<double> times = io::parse_list(o.times);
    std::vector<std::string> header{"x"};
    std::vector<std::vector<double>> rho;
    for (double t : times) {
        header.push_back("rho(t=" + io::format_double(t) + ")");
        rho.push_back(eval_psi(params, grid, t, o.amplitude).density());
    }
    io::CsvWriter csv(header);
    std::vector<double> row(header.size());
    for (std::size_t i = 0; i < grid.nx(); ++i) {
        row[0] = grid.x(i);
        for (std::size_t j = 0; j < times.size(); ++j) {
            row[j + 1] = rho[j][i];
        }
        csv.row(row);
    }
    const std::string stem = "fig" + std::to_string(fig);
    const std::filesystem::path dir(o.out_dir);
    io::write_atomic(dir / (stem + ".csv"), csv.str());
    std::ostringstream gp;
    gp << "set datafile separator ','\n"
       << "set key autotitle columnhead\n"
       << "set xlabel 'x'\n"
       << "set ylabel 'probability density'\n"
       << "set title 'Psi_" << (b == Branch::Plus ? 1 : 2) << ", 8mC/hbar^2 = 1'\n"
       << "plot for [i=2:" << header.size() << "] '" << stem << ".csv' using 1:i with lines\n";
    io::write_atomic(dir / (stem + ".gp"), gp.str());
    return {{"figure", fig}, {"branch", std::string(to_string(b))}, {"kind", "curves"},
            {"grid", io::to_json(grid)}, {"times", times}, {"data", stem + ".csv"}, {"script", stem + ".gp"}};
}

json write_surface(const FigureOptions& o, int fig, Branch b) {
    const ModelParams params = figure_params(o, b);
    const GridSpec grid = io::parse_grid(o.surface_x);
    const io::Range tr = io::parse_range(o.surface_t);
    const GridSpec tgrid = tr.n > 1 ? GridSpec::make(tr.min, tr.max, tr.n) : GridSpec::make(tr.min, tr.min + 1, 8);
    const std::size_t nt = tr.n > 1 ? tr.n : 1;

    std::string data = "# x t density\n";
    for (std::size_t n = 0; n < nt; ++n) {
        const double t = nt > 1 ? tgrid.x(n) : tr.min;
        const std::vector<double> rho = eval_psi(params, grid, t, o.amplitude).density();
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            data += io::format_double(grid.x(i)) + ' ' + io::format_double(t) + ' ' + io::format_double(rho[i]) + '\n';
        }
        data += '\n';
    }
    const std::string stem = "fig" + std::to_string(fig);
    const std::filesystem::path dir(o.out_dir);
    io::write_atomic(dir / (stem + ".dat"), data);
    std::ostringstream gp;
    gp << "set xlabel 'x'\n"
       << "set ylabel 't'\n"
       << "set zlabel 'probability density'\n"
       << "set title 'Psi_" << (b == Branch::Plus ? 1 : 2) << ", 8mC/hbar^2 = 1'\n"
       << "set hidden3d\n"
       << "splot '" << stem << ".dat' using 1:2:3 with lines notitle\n";
    io::write_atomic(dir / (stem + ".gp"), gp.str());
    return {{"figure", fig}, {"branch", std::string(to_string(b))}, {"kind", "surface"},
            {"grid", io::to_json(grid)}, {"t_range", {tr.min, tr.max, tr.n}}, {"data", stem + ".dat"},
            {"script", stem + ".gp"}};
}

int cmd_figures(const FigureOptions& o, std::ostream& out) {
    json figures = json::array();
    for (int fig = 1; fig <= 4; ++fig) {
        if (o.fig != 0 && o.fig != fig) {
            continue;
        }
        const Branch b = fig % 2 == 1 ? Branch::Plus : Branch::Minus;
        figures.push_back(fig <= 2 ? write_curves(o, fig, b) : write_surface(o, fig, b));
        out << "figure " << fig << " written to " << o.out_dir << "\n";
    }
    json p = {{"hbar", o.hbar},
              {"mass", o.mass},
              {"lambda", 1.0},
              {"coupling_C", coupling_for_lambda(1.0, o.hbar, o.mass)},
              {"amplitude", o.amplitude},
              {"phase_variant", "derived"},
              {"figures", figures}};
    write_manifest(std::filesystem::path(o.out_dir) / "manifest.json", "figures", p);
    return kExitOk;
}

// ---------------------------------------------------------------- scan

struct ScanOptions {
    double hbar = 1.0;
    double mass = 1.0;
    std::optional<double> coupling;
    std::optional<double> lambda;
    std::string alpha = "-4:4:33";
    std::string k = "-4:4:33";
    std::string x = "-2:10:1201";
    double t = 0.5;
    double dt = 0.01;
    std::string out = "scan.csv";
};

ScanAxis axis_from(const std::string& text) {
    const io::Range r = io::parse_range(text);
    return {r.min, r.max, r.n};
}

ModelParams scan_params(double hbar, double mass, std::optional<double> coupling, std::optional<double> lambda) {
    ModelOptions m;
    m.hbar = hbar;
    m.mass = mass;
    m.coupling = coupling;
    m.lambda = lambda;
    return ModelParams::with_decay_rate(hbar, mass, m.resolved_coupling(), 0.0);
}

json scan_summary(const ConstraintScan& scan, double mass) {
    const double cell_alpha = scan.alphas.size() > 1 ? scan.alphas[1] - scan.alphas[0] : 0.0;
    const double cell_k = scan.ks.size() > 1 ? scan.ks[1] - scan.ks[0] : 0.0;
    auto site = [&](double alpha, double k) {
        const double found = scan.row_minimiser(k);
        return json{{"expected_alpha", alpha},
                    {"k", k},
                    {"row_minimiser_alpha", found},
                    {"within_one_cell", std::fabs(found - alpha) <= cell_alpha * (1.0 + 1e-9)},
                    {"node_residual", scan.nearest(alpha, k)}};
    };
    std::size_t best = 0;
    for (std::size_t i = 1; i < scan.residual.size(); ++i) {
        if (scan.residual[i] < scan.residual[best]) {
            best = i;
        }
    }
    return {{"cell", {{"alpha", cell_alpha}, {"k", cell_k}}},
            {"plus_site", site(2.0 * mass, -2.0)},
            {"minus_site", site(-2.0 * mass, 2.0)},
            {"global_minimum",
             {{"residual", scan.residual[best]},
              {"alpha", scan.alphas[best % scan.alphas.size()]},
              {"k", scan.ks[best / scan.alphas.size()]}}},
            {"note", "the residual vanishes along the line k = -alpha/m; the two sites are row minima on that valley"}};
}

int cmd_scan(const ScanOptions& o, std::ostream& out) {
    const ModelParams params = scan_params(o.hbar, o.mass, o.coupling, o.lambda);
    const GridSpec grid = io::parse_grid(o.x);
    const ConstraintScan scan = constraint_scan(params, axis_from(o.alpha), axis_from(o.k), grid, o.t, o.dt);

    io::CsvWriter csv({"alpha", "k", "continuity_linf"});
    for (std::size_t ik = 0; ik < scan.ks.size(); ++ik) {
        for (std::size_t ia = 0; ia < scan.alphas.size(); ++ia) {
            csv.row({scan.alphas[ia], scan.ks[ik], scan.at(ia, ik)});
        }
    }
    io::write_atomic(o.out, csv.str());
    const json summary = scan_summary(scan, o.mass);
    json p = {{"model", io::to_json(params)},
              {"grid", io::to_json(grid)},
              {"alpha_axis", o.alpha},
              {"k_axis", o.k},
              {"t", o.t},
              {"dt", o.dt},
              {"output", o.out},
              {"summary", summary}};
    write_manifest(manifest_path_for(o.out), "scan", p);
    out << "row minimiser at k=-2: alpha=" << io::format_double(scan.row_minimiser(-2.0))
        << "; at k=+2: alpha=" << io::format_double(scan.row_minimiser(2.0)) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- verify

struct VerifyOptions {
    double hbar = 1.0;
    double mass = 1.0;
    std::optional<double> coupling;
    std::optional<double> lambda;
    double x_min = -2.0;
    double x_max = 10.0;
    double dx = 4e-3;
    double t = 0.5;
    int grids = 3;
    bool superposition = false;
    std::size_t scan_n = 33;
    std::string out = "verify.json";
};

json probe_json(const SignProbeVerdict& v) {
    json candidates = json::array();
    for (const auto& c : v.candidates) {
        candidates.push_back({{"convention", std::string(to_string(c.convention))},
                              {"phase_variant", c.variant ? json(std::string(to_string(*c.variant))) : json()},
                              {"linf_relative", c.linf_relative}});
    }
    json j = {{"winning_convention", std::string(to_string(v.winning_convention))},
              {"residual_ratio", v.residual_ratio},
              {"decisive", v.decisive},
              {"candidates", candidates}};
    j["winning_phase_variant"] = v.winning_phase_variant ? json(std::string(to_string(*v.winning_phase_variant))) : json();
    j["variant_ratio"] = v.variant_ratio ? json(*v.variant_ratio) : json();
    return j;
}

// Free-particle limit: C = 0, plane wave with the plus-branch phase.
FieldSource plane_wave_source(const GridSpec& grid, double hbar, double mass) {
    return [grid, hbar, mass](double t) {
        std::vector<cplx> v(grid.nx());
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            v[i] = std::polar(1.0, 2.0 * mass * (grid.x(i) - t) / hbar);
        }
        return ComplexField(grid, t, std::move(v));
    };
}

int cmd_verify(const VerifyOptions& o, std::ostream& out) {
    ModelOptions mo;
    mo.hbar = o.hbar;
    mo.mass = o.mass;
    mo.coupling = o.coupling;
    mo.lambda = o.lambda;
    const double coupling = mo.resolved_coupling();
    if (o.grids < 2) {
        throw ParameterError("--grids needs at least 2 levels");
    }
    const GridSpec coarse = GridSpec::with_spacing(o.x_min, o.x_max, o.dx);
    const double dt = coarse.dx();

    json report = {{"schema_version", io::kSchemaVersion}, {"tool_version", std::string(io::kToolVersion)}};
    json pass;

    json probes;
    json convergence;
    for (Branch b : {Branch::Plus, Branch::Minus}) {
        const ModelParams params = ModelParams::make(o.hbar, o.mass, coupling, b);
        const std::string name(to_string(b));
        const SignProbeVerdict verdict = sign_probe(params, coarse, o.t, dt);
        probes[name] = probe_json(verdict);
        pass["sign_probe_" + name] = verdict.decisive;

        const PhaseVariant variant = verdict.winning_phase_variant.value_or(PhaseVariant::Derived);
        json tdse;
        ConvergenceStudy winner_study;
        ConvergenceStudy loser_study;
        for (SignConvention c : {SignConvention::AsPrinted, SignConvention::Flipped}) {
            const ConvergenceStudy s = convergence_study(
                [&](const GridSpec& g, double step) {
                    return tdse_residual(analytic_field_source(params, g, 1.0, variant), params, g, o.t, step, c)
                        .linf_relative();
                },
                coarse, dt, o.grids);
            tdse[std::string(to_string(c))] = study_json(s);
            (c == verdict.winning_convention ? winner_study : loser_study) = s;
        }
        bool floor_held = true;
        for (std::size_t i = 0; i < winner_study.errors.size(); ++i) {
            floor_held = floor_held && loser_study.errors[i] >= kDecisiveRatio * winner_study.errors[i];
        }
        const SignConvention win = verdict.winning_convention;
        const ConvergenceStudy qhj = convergence_study(
            [&](const GridSpec& g, double step) {
                return qhj_residual(analytic_polar_source(params, g, 1.0, variant), params, g, o.t, step, win)
                    .linf_relative();
            },
            coarse, dt, o.grids);
        const ConvergenceStudy cont = convergence_study(
            [&](const GridSpec& g, double step) {
                return continuity_residual(analytic_polar_source(params, g, 1.0, variant), params, g, o.t, step)
                    .linf_relative();
            },
            coarse, dt, o.grids);
        convergence[name] = {{"tdse", tdse},
                             {"qhj", study_json(qhj)},
                             {"qhj_zero_guard", kHamiltonJacobiZeroGuard},
                             {"continuity", study_json(cont)},
                             {"phase_variant", std::string(to_string(variant))}};
        pass["tdse_order_" + name] = orders_within(winner_study, kOrderLow, kOrderHigh);
        pass["losing_convention_floor_" + name] = floor_held;
        pass["qhj_order_" + name] = orders_within(qhj, kOrderLow, kOrderHigh);
        pass["continuity_order_" + name] = orders_within(cont, kOrderLow, kOrderHigh);
    }
    report["sign_probe"] = probes;
    report["convergence"] = convergence;

    // constraint scan on a coarser grid; the valley structure does not need the fine one
    {
        const ModelParams scan_base = ModelParams::with_decay_rate(o.hbar, o.mass, coupling, 0.0);
        const GridSpec scan_grid = GridSpec::make(o.x_min, o.x_max, 1201);
        const double span = 4.0 * o.mass;
        const ConstraintScan scan = constraint_scan(scan_base, {-span, span, o.scan_n}, {-4.0, 4.0, o.scan_n},
                                                    scan_grid, o.t, 0.01);
        json summary = scan_summary(scan, o.mass);
        summary["grid"] = io::to_json(scan_grid);
        summary["node_tolerance"] = kScanNodeTolerance;
        const bool ok = summary["plus_site"]["within_one_cell"].get<bool>() &&
                        summary["minus_site"]["within_one_cell"].get<bool>() &&
                        summary["plus_site"]["node_residual"].get<double>() <= kScanNodeTolerance &&
                        summary["minus_site"]["node_residual"].get<double>() <= kScanNodeTolerance;
        report["constraint_scan"] = summary;
        pass["constraint_scan"] = ok;
    }

    if (o.superposition) {
        json levels = json::array();
        bool ok = true;
        GridSpec g = coarse;
        double step = dt;
        for (int level = 0; level < o.grids; ++level) {
            const SuperpositionReport s = superposition_residual(o.hbar, o.mass, coupling, g, o.t, step);
            levels.push_back({{"dx", g.dx()},
                              {"plus_branch", s.plus_branch},
                              {"minus_branch", s.minus_branch},
                              {"sum_with_plus_decay", s.sum_with_plus_decay},
                              {"sum_with_minus_decay", s.sum_with_minus_decay},
                              {"sum_floor", s.sum_floor()}});
            ok = ok && s.sum_floor() >= kSuperpositionFloor && s.plus_branch < kSuperpositionFloor * 1e-2 &&
                 s.minus_branch < kSuperpositionFloor * 1e-2;
            g = g.refined();
            step *= 0.5;
        }
        report["superposition"] = {{"t", o.t}, {"floor_threshold", kSuperpositionFloor}, {"levels", levels}};
        pass["superposition_non_closure"] = ok;
    }

    {
        const ModelParams free = ModelParams::with_decay_rate(o.hbar, o.mass, 0.0, -2.0);
        const ConvergenceStudy s = convergence_study(
            [&](const GridSpec& g, double step) {
                return tdse_residual(plane_wave_source(g, o.hbar, o.mass), free, g, o.t, step,
                                     SignConvention::AsPrinted)
                    .linf_relative();
            },
            coarse, dt, o.grids);
        report["free_particle"] = study_json(s);
        pass["free_particle_order"] = orders_within(s, kOrderLow, kOrderHigh);
    }

    {
        const GridSpec g = GridSpec::make(-8.0, 12.0, 4001);
        const std::vector<double> times{0.0, 0.5, 1.0, 1.5, 2.0};
        const DirectionReport d = direction_report(o.hbar, o.mass, coupling, g, times);
        auto branch_json = [](const BranchDirection& bd) {
            return json{{"measured_velocity", bd.measured_velocity},
                        {"measured", std::string(to_string(bd.measured))},
                        {"caption", std::string(to_string(bd.caption))},
                        {"matches_caption", bd.matches_caption}};
        };
        report["direction"] = {{"plus", branch_json(d.plus)},
                               {"minus", branch_json(d.minus)},
                               {"opposite_signs", d.opposite_signs},
                               {"velocity_sum", d.velocity_sum},
                               {"equal_magnitude", d.equal_magnitude}};
        pass["counterpropagation"] = d.opposite_signs && d.equal_magnitude &&
                                     std::fabs(std::fabs(d.plus.measured_velocity) - 2.0) <= 1e-6;
    }

    bool all = true;
    for (const auto& [key, value] : pass.items()) {
        all = all && value.get<bool>();
    }
    report["pass"] = pass;
    report["all_pass"] = all;
    io::write_atomic(o.out, report.dump(2) + "\n");

    json p = {{"hbar", o.hbar},
              {"mass", o.mass},
              {"coupling_C", coupling},
              {"grid", io::to_json(coarse)},
              {"dt", dt},
              {"t", o.t},
              {"grids", o.grids},
              {"superposition", o.superposition},
              {"scan_n", o.scan_n},
              {"order_window", {kOrderLow, kOrderHigh}},
              {"decisive_ratio", kDecisiveRatio},
              {"sign_convention", {{"plus", probes["plus"]["winning_convention"]},
                                   {"minus", probes["minus"]["winning_convention"]}}},
              {"output", o.out}};
    write_manifest(manifest_path_for(o.out), "verify", p);

    for (const auto& [key, value] : pass.items()) {
        out << (value.get<bool>() ? "PASS " : "FAIL ") << key << "\n";
    }
    return all ? kExitOk : kExitVerifyFailed;
}

// ---------------------------------------------------------------- dispatch

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> rest;
    std::vector<std::string> injected;
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::optional<std::string> path;
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) {
                throw ParameterError("--config needs a file");
            }
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        }
        if (!path) {
            rest.push_back(args[i]);
            continue;
        }
        std::ifstream in(*path);
        if (!in) {
            throw ParameterError("cannot read config file " + *path);
        }
        std::stringstream buf;
        buf << in.rdbuf();
        const auto expanded = config_to_args(buf.str());
        injected.insert(injected.end(), expanded.begin(), expanded.end());
    }
    if (injected.empty() || rest.empty()) {
        return rest;
    }
    // subcommand first, then config flags, then explicit flags
    std::vector<std::string> merged{rest.front()};
    merged.insert(merged.end(), injected.begin(), injected.end());
    merged.insert(merged.end(), rest.begin() + 1, rest.end());
    return merged;
}

std::string scalar_text(const json& v) {
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_number_integer()) {
        return std::to_string(v.get<long long>());
    }
    if (v.is_number()) {
        return io::format_double(v.get<double>());
    }
    throw ParameterError("unsupported config value " + v.dump());
}

}  // namespace

std::vector<std::string> config_to_args(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParameterError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ParameterError("config must be a JSON object");
    }
    std::vector<std::string> args;
    for (const auto& [key, value] : j.items()) {
        const std::string flag = "--" + key;
        if (value.is_boolean()) {
            if (value.get<bool>()) {
                args.push_back(flag);
            }
        } else if (value.is_array()) {
            std::string joined;
            for (const auto& e : value) {
                joined += (joined.empty() ? "" : ",") + scalar_text(e);
            }
            args.push_back(flag);
            args.push_back(joined);
        } else {
            args.push_back(flag);
            args.push_back(scalar_text(value));
        }
    }
    return args;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exponential-potential Bessel wavepackets: evaluation, verification, propagation"};
    app.name("wavepacket");
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(io::kToolVersion));

    EvalOptions eval;
    CLI::App* eval_cmd = app.add_subcommand("eval", "closed-form field and Madelung quantities as CSV");
    eval.model.attach(eval_cmd);
    eval_cmd->add_option("--x", eval.x, "grid a:b:n")->capture_default_str();
    eval_cmd->add_option("--t", eval.t, "comma-separated times")->capture_default_str();
    eval_cmd->add_option("--out", eval.out, "CSV path")->capture_default_str();

    VerifyOptions verify;
    CLI::App* verify_cmd = app.add_subcommand("verify", "sign probe, convergence, scan; JSON report");
    verify_cmd->add_option("--hbar", verify.hbar)->capture_default_str();
    verify_cmd->add_option("--mass", verify.mass)->capture_default_str();
    verify_cmd->add_option("--c,--coupling", verify.coupling, "potential strength C (default 1/8)");
    verify_cmd->add_option("--lambda", verify.lambda);
    verify_cmd->add_option("--x-min", verify.x_min)->capture_default_str();
    verify_cmd->add_option("--x-max", verify.x_max)->capture_default_str();
    verify_cmd->add_option("--dx", verify.dx, "coarsest spacing; dt = dx")->capture_default_str();
    verify_cmd->add_option("--t", verify.t, "evaluation time")->capture_default_str();
    verify_cmd->add_option("--grids", verify.grids, "refinement levels")->capture_default_str();
    verify_cmd->add_flag("--superposition", verify.superposition, "also check that Psi_1 + Psi_2 fails");
    verify_cmd->add_option("--scan-n", verify.scan_n, "scan points per axis")->capture_default_str();
    verify_cmd->add_option("--out", verify.out, "JSON report path")->capture_default_str();

    PropagateOptions prop;
    CLI::App* prop_cmd = app.add_subcommand("propagate", "Crank-Nicolson run against the closed form");
    prop.model.attach(prop_cmd);
    prop_cmd->add_option("--x", prop.x, "grid a:b:n")->capture_default_str();
    prop_cmd->add_option("--t0", prop.t0)->capture_default_str();
    prop_cmd->add_option("--t1", prop.t1)->capture_default_str();
    prop_cmd->add_option("--nt", prop.nt, "time steps")->capture_default_str();
    prop_cmd->add_option("--bc", prop.bc)->check(CLI::IsMember({"analytic", "frozen"}))->capture_default_str();
    prop_cmd->add_option("--initial", prop.initial)->check(CLI::IsMember({"analytic", "zero"}))->capture_default_str();
    prop_cmd->add_option("--convention", prop.convention)
        ->check(CLI::IsMember({"as-printed", "flipped"}))
        ->capture_default_str();
    prop_cmd->add_option("--stride", prop.stride, "snapshot every n steps (0: first and last)")->capture_default_str();
    prop_cmd->add_option("--refine", prop.refine, "levels of a halving study (0: off)")->capture_default_str();
    prop_cmd->add_option("--cap", prop.cap, "largest allowed e^{-x_min-kt}")->capture_default_str();
    prop_cmd->add_option("--out", prop.out, "output prefix")->capture_default_str();

    FigureOptions figs;
    CLI::App* fig_cmd = app.add_subcommand("figures", "density data and gnuplot scripts for figures 1-4");
    fig_cmd->add_option("--hbar", figs.hbar)->capture_default_str();
    fig_cmd->add_option("--mass", figs.mass)->capture_default_str();
    fig_cmd->add_option("--amplitude", figs.amplitude)->capture_default_str();
    fig_cmd->add_option("--fig", figs.fig, "1-4 (0: all)")->check(CLI::Range(0, 4))->capture_default_str();
    fig_cmd->add_option("--out-dir", figs.out_dir)->capture_default_str();
    fig_cmd->add_option("--x", figs.x, "grid for figures 1-2")->capture_default_str();
    fig_cmd->add_option("--times", figs.times, "times for figures 1-2")->capture_default_str();
    fig_cmd->add_option("--surface-x", figs.surface_x, "x grid for figures 3-4")->capture_default_str();
    fig_cmd->add_option("--surface-t", figs.surface_t, "t grid for figures 3-4")->capture_default_str();

    ScanOptions scan;
    CLI::App* scan_cmd = app.add_subcommand("scan", "continuity residual over (alpha, k)");
    scan_cmd->add_option("--hbar", scan.hbar)->capture_default_str();
    scan_cmd->add_option("--mass", scan.mass)->capture_default_str();
    scan_cmd->add_option("--c,--coupling", scan.coupling, "potential strength C (default 1/8)");
    scan_cmd->add_option("--lambda", scan.lambda);
    scan_cmd->add_option("--alpha", scan.alpha, "alpha axis a:b:n")->capture_default_str();
    scan_cmd->add_option("--k", scan.k, "k axis a:b:n")->capture_default_str();
    scan_cmd->add_option("--x", scan.x, "grid a:b:n")->capture_default_str();
    scan_cmd->add_option("--t", scan.t)->capture_default_str();
    scan_cmd->add_option("--dt", scan.dt)->capture_default_str();
    scan_cmd->add_option("--out", scan.out)->capture_default_str();

    try {
        std::vector<std::string> args = expand_config(raw_args);
        std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion& e) {
        out << io::kToolVersion << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (eval_cmd->parsed()) {
            return cmd_eval(eval, out);
        }
        if (verify_cmd->parsed()) {
            return cmd_verify(verify, out);
        }
        if (prop_cmd->parsed()) {
            return cmd_propagate(prop, out);
        }
        if (fig_cmd->parsed()) {
            return cmd_figures(figs, out);
        }
        if (scan_cmd->parsed()) {
            return cmd_scan(scan, out);
        }
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    err << "error: no subcommand\n";
    return kExitUsage;
}

}  // namespace wavepacket::cli
