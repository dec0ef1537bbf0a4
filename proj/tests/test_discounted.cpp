#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "shuttle/discounted.hpp"
#include "shuttle/errors.hpp"

using namespace shuttle;

namespace {

CoefficientField unit_variance(const Grid& g) { return CoefficientField::constant(g, 1.0, FieldRole::variance); }
CoefficientField rate(const Grid& g, double a) { return CoefficientField::constant(g, a, FieldRole::rate); }

double sq(double x) { return x * x; }

// s0' = sqrt(2a) exp(2(y - x)): the drift-1 scale normalized to the unconstrained optimum at y.
ScaleDensity drift1_reference(const Grid& g, double y, double a) {
    std::vector<double> v(g.n_cells());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = std::sqrt(2.0 * a) * std::exp(2.0 * (y - g.midpoint(i)));
    }
    return ScaleDensity(g, v);
}

double drift1_density(double y, double a) {
    const double k = std::sqrt(1.0 + 2.0 * a);
    const double c = std::cosh(k * y), s = std::sinh(k * y) / k;
    return std::sqrt(2.0 * a) * std::sqrt((c + s) / (c - s));
}

// int over [x0, x1] of the quadratic through (x_{j}, f_j), three-point rules on a uniform mesh
double partial_simpson(const std::vector<double>& f, std::size_t i, double h) {
    if (i + 2 < f.size()) {
        return h / 12.0 * (5.0 * f[i] + 8.0 * f[i + 1] - f[i + 2]);
    }
    return h / 12.0 * (-f[i - 1] + 8.0 * f[i] + 5.0 * f[i + 1]);
}

}  // namespace

TEST_CASE("no discounting gives unit series") {
    const Grid g(50);
    Gen gen(21);
    const ScaleDensity s(g, gen.cells(50, 0.3, 3.0));
    const auto t = SeriesTable::build(s, unit_variance(g), rate(g, 0.0));
    for (std::size_t i = 0; i <= 50; ++i) {
        CHECK(t.g.value(i) == 1.0);
        CHECK(t.g_tilde.value(i) == 1.0);
        CHECK(t.h.value(i) == 1.0);
        CHECK(t.g_star.value(i) == 1.0);
    }
    CHECK(psi_hitting(0.2, 0.9, t) == 1.0);
    CHECK(discounted_shuttle_payoff(s, unit_variance(g), rate(g, 0.0)).value == 1.0);
}

TEST_CASE("constant coefficients match cosh") {
    const Grid g(2000);
    const auto s = ScaleDensity::constant(g, 1.0);
    const auto t = SeriesTable::build(s, unit_variance(g), rate(g, 0.5));
    double err_g = 0.0, err_h = 0.0, err_gt = 0.0;
    for (std::size_t i = 0; i <= 2000; ++i) {
        const double x = g.node(i);
        err_g = std::max(err_g, std::abs(t.g.value(i) - std::cosh(x)));
        err_h = std::max(err_h, std::abs(t.h.value(i) - std::cosh(x)));
        err_gt = std::max(err_gt, std::abs(t.g_tilde.value(i) - std::cosh(1.0 - x)));
    }
    CHECK(err_g < 1e-8);
    CHECK(err_h < 1e-8);
    CHECK(err_gt < 1e-8);
    CHECK(t.g.tail_bound() < 1e-10);

    CHECK(psi_hitting(0.3, 0.3, t) == 1.0);
    CHECK(psi_hitting(0.0, 1.0, t) == doctest::Approx(1.0 / std::cosh(1.0)).epsilon(1e-9));
    CHECK(psi_hitting(0.37, 0.61, t) == doctest::Approx(std::cosh(0.37) / std::cosh(0.61)).epsilon(1e-9));
    CHECK(psi_hitting(0.9, 0.2, t) == doctest::Approx(std::cosh(0.1) / std::cosh(0.8)).epsilon(1e-9));

    for (double a : {0.5, 2.0}) {
        const auto p = discounted_shuttle_payoff(s, unit_variance(g), rate(g, a));
        CHECK(p.value == doctest::Approx(1.0 / sq(std::cosh(std::sqrt(2.0 * a)))).epsilon(1e-8));
        CHECK(p.identity_gap < 1e-10);
    }
}

TEST_CASE("truncation bound on random instances") {
    Gen gen(22);
    for (int trial = 0; trial < 30; ++trial) {
        const Grid g(gen.index(2, 200));
        const ScaleDensity s(g, gen.cells(g.n_cells(), 0.2, 4.0));
        const CoefficientField s2(g, gen.cells(g.n_cells(), 0.3, 3.0), FieldRole::variance);
        const CoefficientField a(g, gen.cells(g.n_cells(), 0.0, 4.0), FieldRole::rate);
        SeriesOptions opts;
        opts.tol = 1e-14;
        for (SeriesFlavor fl : {SeriesFlavor::G, SeriesFlavor::G_tilde, SeriesFlavor::H, SeriesFlavor::G_star}) {
            const SeriesColumn col = series_column(s, s2, a, fl, opts);
            for (std::size_t n = 0; n <= 10; ++n) {
                for (std::size_t node = 0; node <= g.n_cells(); ++node) {
                    const double in = col.order_value(n, node);
                    CHECK(in >= 0.0);
                    CHECK(in <= col.order_bound(n, node) * (1.0 + 1e-12) + 1e-300);
                }
            }
        }
    }
}

TEST_CASE("monotonicity and ranges") {
    Gen gen(23);
    for (int trial = 0; trial < 30; ++trial) {
        const Grid g(60);
        const ScaleDensity s(g, gen.cells(60, 0.2, 4.0));
        const CoefficientField s2(g, gen.cells(60, 0.3, 3.0), FieldRole::variance);
        const CoefficientField a(g, gen.cells(60, 0.0, 3.0), FieldRole::rate);
        const auto t = SeriesTable::build(s, s2, a);
        for (std::size_t i = 0; i <= 60; ++i) {
            CHECK(t.g.value(i) >= 1.0);
            CHECK(t.g_tilde.value(i) >= 1.0);
            CHECK(t.h.value(i) >= 1.0);
            CHECK(t.g_star.value(i) >= 1.0);
            if (i > 0) {
                CHECK(t.g.value(i) >= t.g.value(i - 1));
                CHECK(t.g_tilde.value(i) <= t.g_tilde.value(i - 1));
            }
        }
        for (int k = 0; k < 20; ++k) {
            const double x = gen.uniform(0, 1), y = gen.uniform(0, 1);
            const double v = psi_hitting(x, y, t);
            CHECK(v > 0.0);
            CHECK(v <= 1.0);
        }
        const auto p = discounted_shuttle_payoff(s, s2, a);
        CHECK(p.value > 0.0);
        CHECK(p.value <= 1.0);
        CHECK(p.value == doctest::Approx(p.psi_up * p.psi_down).epsilon(1e-14));
        CHECK(p.identity_gap < 1e-8);
    }
}

TEST_CASE("G is a fixed point of its integral equation") {
    // G(x) = 1 + int_0^x s'(v) int_0^v alpha G dm dv, re-integrated by a fine three-point rule.
    Gen gen(24);
    for (int trial = 0; trial < 5; ++trial) {
        const Grid g(100);
        const ScaleDensity s(g, gen.smooth(g, 1.0));
        const CoefficientField s2(g, gen.cells(100, 0.5, 2.0), FieldRole::variance);
        const CoefficientField a(g, gen.cells(100, 0.0, 3.0), FieldRole::rate);
        const auto t = SeriesTable::build(s, s2, a);
        const std::size_t K = 16;
        const double h = g.cell_width() / K;
        double inner = 0.0, outer = 1.0, worst = 0.0;
        for (std::size_t i = 0; i < g.n_cells(); ++i) {
            const double am = a[i] * 2.0 / (s2[i] * s[i]);
            std::vector<double> gv(K + 1), d(K + 1);
            for (std::size_t k = 0; k <= K; ++k) {
                gv[k] = am * t.g.value_at(g.node(i) + k * h);
            }
            d[0] = inner;
            for (std::size_t k = 0; k < K; ++k) {
                d[k + 1] = d[k] + partial_simpson(gv, k, h);
            }
            for (std::size_t k = 0; k < K; ++k) {
                outer += s[i] * partial_simpson(d, k, h);
            }
            inner = d[K];
            worst = std::max(worst, std::abs(outer - t.g.value(i + 1)) / t.g.value(i + 1));
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("unconstrained optimum") {
    const Grid g(2000);
    SUBCASE("constant rate") {
        const auto sol = optimal_discounted({unit_variance(g), rate(g, 0.5), ScaleDensity::constant(g, 1.0), 0.0});
        CHECK(sol.value == doctest::Approx(1.0 / sq(std::cosh(1.0))).epsilon(1e-10));
        for (std::size_t i = 1; i < g.n_cells(); ++i) {
            CHECK(sol.s_opt[i] == sol.s_opt[0]);
        }
    }
    SUBCASE("alpha(u) = u") {
        const auto a = CoefficientField::sampled(g, [](double u) { return u; }, FieldRole::rate);
        const auto sol = optimal_discounted({unit_variance(g), a, ScaleDensity::constant(g, 1.0), 0.0});
        CHECK(sol.value == doctest::Approx(1.0 / sq(std::cosh(2.0 * std::sqrt(2.0) / 3.0))).epsilon(1e-6));
        const auto p = discounted_shuttle_payoff(sol.s_opt, unit_variance(g), a);
        CHECK(p.value == doctest::Approx(sol.value).epsilon(1e-8));
    }
}

TEST_CASE("constrained optimum: first-order condition and dominance") {
    Gen gen(25);
    for (int trial = 0; trial < 10; ++trial) {
        const Grid g(80);
        const ScaleDensity s0(g, gen.cells(80, 0.3, 3.0));
        const CoefficientField s2(g, gen.cells(80, 0.3, 3.0), FieldRole::variance);
        const CoefficientField a(g, gen.cells(80, 0.1, 3.0), FieldRole::rate);
        const std::size_t yi = gen.index(1, 70);
        const double y = g.node(yi);
        const auto sol = optimal_discounted({s2, a, s0, y});
        for (std::size_t i = 0; i < yi; ++i) {
            CHECK(sol.s_opt[i] == s0[i]);
        }
        const auto pay = discounted_shuttle_payoff(sol.s_opt, s2, a);
        CHECK(pay.value == doctest::Approx(sol.value).epsilon(1e-8));

        // Wronskian G' H - G H' with right-hand cell densities vanishes at y and above
        const auto t = SeriesTable::build(sol.s_opt, s2, a);
        for (std::size_t node = yi; node < g.n_cells(); ++node) {
            const double am = a[node] * 2.0 / (s2[node] * sol.s_opt[node]);
            const double w = t.g.derivative(node) * sol.s_opt[node] * t.h.value(node) -
                             t.g.value(node) * t.h.derivative(node) * am;
            const double scale = t.g.value(node) * t.h.value(node) * (sol.s_opt[node] + am);
            CHECK(std::abs(w) / scale < 1e-9);
        }

        for (int k = 0; k < 30; ++k) {
            std::vector<double> v(sol.s_opt.sprime().begin(), sol.s_opt.sprime().end());
            for (std::size_t i = yi; i < 80; ++i) v[i] *= gen.log_uniform(0.3, 3.0);
            CHECK(discounted_shuttle_payoff(ScaleDensity(g, v), s2, a).value <= sol.value * (1.0 + 1e-10));
        }
    }
}

TEST_CASE("example with drift 1 below y") {
    for (auto [y, a] : {std::pair{0.25, 1.0}, std::pair{0.5, 2.0}}) {
        const Grid g(4000);
        const auto sol = optimal_discounted({unit_variance(g), rate(g, a), drift1_reference(g, y, a), y});
        const double expect = drift1_density(y, a);
        const std::size_t yi = g.node_index(y);
        for (std::size_t i = yi; i < g.n_cells(); ++i) {
            CHECK(sol.s_opt[i] == doctest::Approx(expect).epsilon(1e-6));
        }
    }
}

TEST_CASE("A(y) conventions") {
    const Grid g(100);
    const double with = a_integral(unit_variance(g), rate(g, 2.0), 0.25);
    const double without = a_integral(unit_variance(g), rate(g, 2.0), 0.25, AConvention::no_sqrt2);
    CHECK(with == doctest::Approx(0.75 * 2.0).epsilon(1e-14));
    CHECK(with == doctest::Approx(std::sqrt(2.0) * without).epsilon(1e-14));
}

TEST_CASE("degenerate discounted instances") {
    const Grid g(10);
    std::vector<double> a(10, 1.0);
    a[8] = 0.0;
    CHECK_THROWS_AS(optimal_discounted({unit_variance(g), CoefficientField(g, a, FieldRole::rate),
                                        ScaleDensity::constant(g, 1.0), 0.2}),
                    DegenerateInstance);
    CHECK_THROWS_AS(optimal_discounted({unit_variance(g), rate(g, 1.0), ScaleDensity::constant(g, 1.0), 0.25}),
                    ConfigError);
}
