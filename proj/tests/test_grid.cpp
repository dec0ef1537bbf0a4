#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "shuttle/errors.hpp"
#include "shuttle/grid.hpp"

using namespace shuttle;

TEST_CASE("grid geometry") {
    CHECK_THROWS_AS(Grid(1), ConfigError);
    const Grid g(7);
    CHECK(g.cell_width() * 7 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g.node(0) == 0.0);
    CHECK(g.node(7) == 1.0);
    for (std::size_t i = 1; i < 7; ++i) {
        CHECK(g.midpoint(i) > g.midpoint(i - 1));
    }
    CHECK(g.cell_of(0.0) == 0);
    CHECK(g.cell_of(g.node(3)) == 3);
    CHECK(g.cell_of(1.0) == 6);
    CHECK(g.node_index(g.node(4)) == 4);
    CHECK(g.node_index(0.5 * (g.node(4) + g.node(5))) == Grid::npos);
}

TEST_CASE("coefficient fields check their role") {
    const Grid g(4);
    CHECK_THROWS_AS(CoefficientField(g, {1, 1, 0, 1}, FieldRole::variance), ConfigError);
    CHECK_THROWS_AS(CoefficientField(g, {1, 1, -1, 1}, FieldRole::rate), ConfigError);
    CHECK_THROWS_AS(CoefficientField(g, {1, NAN, 1, 1}, FieldRole::rate), ConfigError);
    CHECK_THROWS_AS(CoefficientField(g, {1, 1, 1}, FieldRole::rate), ConfigError);
    CHECK_NOTHROW(CoefficientField(g, {0, 0, 0, 0}, FieldRole::rate));
}

TEST_CASE("scale density cumulative and inverse") {
    const Grid g(50);
    Gen gen(1);
    const ScaleDensity s(g, gen.cells(50, 0.2, 3.0));
    CHECK(s.cumulative()[0] == 0.0);
    for (std::size_t i = 1; i <= 50; ++i) {
        CHECK(s.cumulative()[i] > s.cumulative()[i - 1]);
    }
    for (int k = 0; k < 100; ++k) {
        const double x = gen.uniform(0.0, 1.0);
        CHECK(s.inverse(s.at(x)) == doctest::Approx(x).epsilon(1e-12));
    }
    CHECK_THROWS_AS(ScaleDensity(g, std::vector<double>(50, 0.0)), ConfigError);
}

TEST_CASE("drift to scale") {
    SUBCASE("zero drift gives unit density") {
        const Grid g(13);
        const auto s = drift_to_scale(DriftField(g, std::vector<double>(13, 0.0)),
                                      CoefficientField::constant(g, 1.0, FieldRole::variance));
        for (double v : s.sprime()) {
            CHECK(v == 1.0);
        }
    }
    SUBCASE("unit drift against exp(-2x)") {
        const Grid g(1000);
        const auto s = drift_to_scale(DriftField(g, std::vector<double>(1000, 1.0)),
                                      CoefficientField::constant(g, 1.0, FieldRole::variance));
        double err = 0.0;
        for (std::size_t i = 0; i < 1000; ++i) {
            err = std::max(err, std::abs(s[i] - std::exp(-2.0 * g.midpoint(i))));
        }
        CHECK(err < 1e-2);
    }
    SUBCASE("optimal drift for f = 1 + x is proportional to sqrt(1 + x)") {
        const Grid g(2000);
        std::vector<double> mu(2000);
        for (std::size_t i = 0; i < 2000; ++i) {
            mu[i] = -0.25 / (1.0 + g.midpoint(i));  // -1/2 d/dx ln sqrt(1 + x)
        }
        const auto s = drift_to_scale(DriftField(g, mu), CoefficientField::constant(g, 1.0, FieldRole::variance));
        const double c = s[0] / std::sqrt(1.0 + g.midpoint(0));
        for (std::size_t i = 0; i < 2000; i += 97) {
            CHECK(s[i] / std::sqrt(1.0 + g.midpoint(i)) == doctest::Approx(c).epsilon(1e-3));
        }
    }
    SUBCASE("overflow names the cell") {
        const Grid g(10);
        try {
            drift_to_scale(DriftField(g, std::vector<double>(10, -5000.0)),
                           CoefficientField::constant(g, 1.0, FieldRole::variance));
            FAIL("expected overflow");
        } catch (const NumericalError& e) {
            CHECK(std::string(e.what()).find("cell") != std::string::npos);
        }
    }
}

TEST_CASE("scale to drift") {
    const Grid g(1000);
    const auto one = CoefficientField::constant(g, 1.0, FieldRole::variance);
    SUBCASE("constant density has no drift") {
        const auto mu = scale_to_drift(ScaleDensity::constant(g, 3.7), one);
        for (double v : mu.mu()) {
            CHECK(v == doctest::Approx(0.0));
        }
    }
    SUBCASE("exp(-2x) gives unit drift") {
        const auto s = ScaleDensity(g, [&] {
            std::vector<double> v(1000);
            for (std::size_t i = 0; i < 1000; ++i) v[i] = std::exp(-2.0 * g.midpoint(i));
            return v;
        }());
        const auto mu = scale_to_drift(s, one);
        for (std::size_t i = 1; i + 1 < 1000; ++i) {
            CHECK(mu[i] == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
    SUBCASE("sqrt(2 e^x) gives drift -1/4") {
        const auto s = ScaleDensity(g, [&] {
            std::vector<double> v(1000);
            for (std::size_t i = 0; i < 1000; ++i) v[i] = std::sqrt(2.0 * std::exp(g.midpoint(i)));
            return v;
        }());
        const auto mu = scale_to_drift(s, one);
        for (std::size_t i = 0; i < 1000; ++i) {
            CHECK(mu[i] == doctest::Approx(-0.25).epsilon(1e-6));
        }
    }
}

TEST_CASE("speed density") {
    const Grid g(3);
    auto m = speed_from_scale(ScaleDensity::constant(g, 1.0), CoefficientField::constant(g, 1.0, FieldRole::variance));
    CHECK(m[0] == 2.0);
    m = speed_from_scale(ScaleDensity::constant(g, 2.0), CoefficientField::constant(g, 1.0, FieldRole::variance));
    CHECK(m[1] == 1.0);
    m = speed_from_scale(ScaleDensity::constant(g, std::sqrt(2.0)),
                         CoefficientField::constant(g, 2.0, FieldRole::variance));
    CHECK(m[2] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

    Gen gen(2);
    for (int trial = 0; trial < 50; ++trial) {
        const Grid h(gen.index(2, 40));
        const ScaleDensity s(h, gen.cells(h.n_cells(), 0.01, 100.0));
        const CoefficientField s2(h, gen.cells(h.n_cells(), 0.01, 100.0), FieldRole::variance);
        const auto mm = speed_from_scale(s, s2);
        for (std::size_t i = 0; i < h.n_cells(); ++i) {
            CHECK(mm[i] * s2[i] * s[i] == doctest::Approx(2.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("scale -> drift -> scale round trip converges with refinement") {
    Gen gen(3);
    for (int trial = 0; trial < 5; ++trial) {
        const double a = gen.uniform(-1.0, 1.0), b = gen.uniform(0.5, 3.0);
        double previous = 0.0;
        for (std::size_t n : {200, 400, 800}) {
            const Grid g(n);
            std::vector<double> v(n);
            for (std::size_t i = 0; i < n; ++i) {
                v[i] = std::exp(a * std::sin(b * g.midpoint(i)));
            }
            const ScaleDensity s(g, v);
            const auto one = CoefficientField::constant(g, 1.0, FieldRole::variance);
            const ScaleDensity back = drift_to_scale(scale_to_drift(s, one), one);
            const double c = s[0] / back[0];
            double err = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                err = std::max(err, std::abs(back[i] * c / s[i] - 1.0));
            }
            if (previous > 0.0) {
                CHECK(err < 0.75 * previous);
            }
            previous = err;
        }
        CHECK(previous < 1e-3);
    }
}

TEST_CASE("constraint sets are cell aligned") {
    const Grid g(10);
    const auto c = ConstraintSet::interval(g, 0.2, 0.5);
    CHECK(c.count() == 3);
    CHECK(c.contains(2));
    CHECK(!c.contains(5));
    CHECK_THROWS_AS(ConstraintSet::interval(g, 0.0, 0.25), ConfigError);
    CHECK(ConstraintSet::empty(g).is_empty());
}
