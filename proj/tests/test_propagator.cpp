#include <cmath>

#include "doctest.h"
#include "wavepacket/analytic.hpp"
#include "wavepacket/metrics.hpp"
#include "wavepacket/propagator.hpp"
#include "wavepacket/residual.hpp"

using namespace wavepacket;

namespace {

const ModelParams kPlus = make_params(1.0, 1.0, 0.125, Branch::Plus);
const ModelParams kMinus = make_params(1.0, 1.0, 0.125, Branch::Minus);

double final_error(const ModelParams& p, const GridSpec& g, std::size_t nt,
                   SignConvention c = SignConvention::AsPrinted, double t1 = 1.0) {
    PropagationConfig cfg{g, TimeSpec::make(0.0, t1, nt)};
    cfg.convention = c;
    const Propagation run = propagate(p, cfg, eval_psi(p, g, 0.0));
    return error_vs_analytic(run.snapshots.back(), p).psi_linf;
}

double norm_sq(const ComplexField& f) {
    double s = 0.0;
    for (const cplx& v : f.values()) {
        s += std::norm(v);
    }
    return s * f.grid().dx();
}

}  // namespace

TEST_CASE("tridiagonal solve") {
    const std::vector<cplx> sub{0.0, {1.0, 0.5}, -2.0, {0.0, 1.0}};
    const std::vector<cplx> diag{{4.0, 1.0}, 5.0, {6.0, -1.0}, 3.0};
    const std::vector<cplx> super{{1.0, -1.0}, 0.5, {0.0, 2.0}, 0.0};
    const std::vector<cplx> x_true{{1.0, 2.0}, -1.0, {0.5, 0.5}, {0.0, -3.0}};
    std::vector<cplx> rhs(4);
    for (std::size_t i = 0; i < 4; ++i) {
        rhs[i] = diag[i] * x_true[i];
        if (i > 0) {
            rhs[i] += sub[i] * x_true[i - 1];
        }
        if (i + 1 < 4) {
            rhs[i] += super[i] * x_true[i + 1];
        }
    }
    const std::vector<cplx> x = solve_tridiagonal(sub, diag, super, rhs);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(x[i] - x_true[i]) < 1e-14);
    }
    const std::vector<cplx> zero(4, 0.0);
    CHECK_THROWS_AS(solve_tridiagonal(zero, zero, zero, rhs), NumericalError);
}

TEST_CASE("free Gaussian keeps its norm") {
    const ModelParams free = ModelParams::with_decay_rate(1.0, 1.0, 0.0, 0.0);
    const GridSpec g = GridSpec::make(-40.0, 40.0, 4001);
    std::vector<cplx> v(g.nx());
    for (std::size_t i = 0; i < g.nx(); ++i) {
        v[i] = std::exp(-g.x(i) * g.x(i) / 2.0) * std::polar(1.0, 1.5 * g.x(i));
    }
    PropagationConfig cfg{g, TimeSpec::make(0.0, 0.2, 20)};
    cfg.bc_mode = BoundaryMode::FrozenDirichlet;
    ComplexField f(g, 0.0, v);
    const double n0 = norm_sq(f);
    for (int step = 0; step < 20; ++step) {
        const ComplexField next = step_crank_nicolson(f, free, cfg);
        CHECK(std::fabs(norm_sq(next) - norm_sq(f)) <= 1e-10 * n0);
        f = next;
    }
}

TEST_CASE("zero data with frozen boundaries stays zero") {
    const GridSpec g = GridSpec::make(-2.0, 10.0, 201);
    PropagationConfig cfg{g, TimeSpec::make(0.0, 1.0, 10)};
    cfg.bc_mode = BoundaryMode::FrozenDirichlet;
    const Propagation run = propagate(kPlus, cfg, ComplexField::zeros(g, 0.0));
    for (const cplx& v : run.snapshots.back().values()) {
        CHECK(v == cplx(0.0, 0.0));
    }
}

TEST_CASE("manufactured solution at dx = dt = 1e-3") {
    const GridSpec g = GridSpec::make(-2.0, 10.0, 12001);
    CHECK(final_error(kPlus, g, 1000) <= 5e-4);
    CHECK(final_error(kMinus, g, 1000) <= 5e-4);
}

TEST_CASE("second-order convergence") {
    const GridSpec g = GridSpec::make(-2.0, 10.0, 3001);
    const double e1 = final_error(kPlus, g, 250);
    const double e2 = final_error(kPlus, g.refined(), 500);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("interior is evolved, not imposed by the boundaries") {
    const double wide = final_error(kPlus, GridSpec::make(-2.0, 10.0, 3001), 250);
    const double narrow = final_error(kPlus, GridSpec::make(-2.0, 8.0, 2501), 250);
    CHECK(narrow == doctest::Approx(wide).epsilon(0.1));
}

TEST_CASE("losing convention does not converge to the closed form") {
    const GridSpec g = GridSpec::make(-2.0, 10.0, 1501);
    const double e1 = final_error(kPlus, g, 125, SignConvention::Flipped);
    const double e2 = final_error(kPlus, g.refined(), 250, SignConvention::Flipped);
    CHECK(e1 > 0.1);
    CHECK(e2 > 0.5 * e1);
}

TEST_CASE("propagated density translates at +2") {
    const GridSpec g = GridSpec::make(-2.0, 10.0, 6001);
    PropagationConfig cfg{g, TimeSpec::make(0.0, 0.5, 500)};
    const Propagation run = propagate(kPlus, cfg, eval_psi(kPlus, g, 0.0));
    const ComplexField& last = run.snapshots.back();
    const AnalyticError err = error_vs_analytic(last, kPlus);
    const ShapeDeviation d = shape_deviation(last.density(), run.snapshots.front().density(), g, 0.5, 0.0, 2.0);
    CHECK(d.linf <= 10.0 * err.density_linf + d.interpolation_bound);
}

TEST_CASE("snapshot stride and clock") {
    const GridSpec g = GridSpec::make(-2.0, 10.0, 301);
    PropagationConfig cfg{g, TimeSpec::make(0.0, 1.0, 10)};
    cfg.snapshot_stride = 3;
    const Propagation run = propagate(kMinus, cfg, eval_psi(kMinus, g, 0.0));
    REQUIRE(run.snapshots.size() == 5);  // 0, 3, 6, 9, 10
    CHECK(run.snapshots[1].time() == doctest::Approx(0.3));
    CHECK(run.snapshots.back().time() == 1.0);
}

TEST_CASE("configuration checks") {
    PropagationConfig far_left{GridSpec::make(-20.0, 10.0, 301), TimeSpec::make(0.0, 1.0, 10)};
    CHECK_THROWS_AS(validate_config(kPlus, far_left), DomainError);
    PropagationConfig ok{GridSpec::make(-2.0, 10.0, 301), TimeSpec::make(0.0, 1.0, 10)};
    CHECK_THROWS_AS(validate_config(ModelParams::with_decay_rate(1.0, 1.0, 0.125, 0.0), ok), ParameterError);
    CHECK(ok.cfl_diagnostic(kPlus) == doctest::Approx(0.1 / (2.0 * 0.04 * 0.04)));
    CHECK_THROWS_AS(propagate(kPlus, ok, ComplexField::zeros(GridSpec::make(-2.0, 10.0, 300), 0.0)), ParameterError);
}
