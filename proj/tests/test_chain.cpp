#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "shuttle/chain.hpp"
#include "shuttle/errors.hpp"

using namespace shuttle;

namespace {

// Gauss-Seidel on v = f + P v (additive) or v = rho P v (discounted), target y absorbing.
double iterate_to(const BDChain& c, std::span<const double> vals, std::size_t x, std::size_t y, bool discounted) {
    const std::size_t N = c.N();
    std::vector<double> v(N + 1, discounted ? 1.0 : 0.0);
    for (int sweep = 0; sweep < 200000; ++sweep) {
        double change = 0.0;
        for (std::size_t k = 0; k <= N; ++k) {
            if (k == y) continue;
            const double up = k < N ? c.p(k) * v[k + 1] : 0.0;
            const double dn = k > 0 ? c.q(k) * v[k - 1] : 0.0;
            const double stay = c.eps(k) * v[k];
            const double nv = discounted ? vals[k] * (up + dn + stay) : vals[k] + up + dn + stay;
            change = std::max(change, std::abs(nv - v[k]));
            v[k] = nv;
        }
        if (change < 1e-15 * (1.0 + v[x])) break;
    }
    return v[x];
}

BDChain random_chain(Gen& gen, std::size_t N, bool waiting) {
    std::vector<double> p(N + 1), q(N + 1), eps(N + 1, 0.0);
    for (std::size_t k = 0; k <= N; ++k) {
        const double e = waiting ? gen.uniform(0.0, 0.6) : 0.0;
        const double split = k == 0 ? 1.0 : k == N ? 0.0 : gen.uniform(0.15, 0.85);
        p[k] = (1.0 - e) * split;
        q[k] = (1.0 - e) - p[k];
        eps[k] = e;
    }
    return BDChain(p, q, eps);
}

}  // namespace

TEST_CASE("chain construction") {
    CHECK_THROWS_AS(BDChain({1.0}, {0.0}, {0.0}), ConfigError);
    CHECK_THROWS_AS(BDChain({1.0, 0.0}, {0.0, 0.9}, {0.0, 0.0}), ConfigError);
    CHECK_THROWS_AS(BDChain({1.0, 0.1}, {0.0, 0.9}, {0.0, 0.0}), ConfigError);
    CHECK_THROWS_AS(DiscreteScale({2.0, 1.0}), ConfigError);
    CHECK_THROWS_AS(DiscreteConstraint(3, {1}), ConfigError);

    Gen gen(31);
    for (int trial = 0; trial < 50; ++trial) {
        const DiscreteScale w = gen.scale(gen.index(1, 12));
        const BDChain c = BDChain::from_scale(w);
        // s(X) is a martingale away from the boundary: p_n W_n = q_n W_{n-1}
        for (std::size_t n = 1; n < w.N(); ++n) {
            CHECK(c.p(n) * w[n] == doctest::Approx(c.q(n) * w[n - 1]).epsilon(1e-14));
        }
        const DiscreteScale back = c.scale();
        for (std::size_t e = 0; e < w.N(); ++e) {
            CHECK(back[e] == doctest::Approx(w[e]).epsilon(1e-12));
        }
    }
}

TEST_CASE("additive oracle on small chains") {
    SUBCASE("N = 1") {
        const BDChain c = BDChain::from_scale(DiscreteScale::uniform(1));
        CHECK(exact_additive_oracle(c, DiscreteCost::constant(1, 1.0)).shuttle == doctest::Approx(2.0));
    }
    SUBCASE("N = 2 symmetric") {
        const BDChain c = BDChain::from_scale(DiscreteScale::uniform(2));
        const auto costs = exact_additive_oracle(c, DiscreteCost::constant(2, 1.0));
        CHECK(costs.up[0] == doctest::Approx(4.0));
        CHECK(costs.down[2] == doctest::Approx(4.0));
        CHECK(costs.shuttle == doctest::Approx(8.0));
    }
    SUBCASE("N = 2 with p1 = 2/3") {
        // E_0[T_2] = 1 + E_1[T_2], E_1[T_2] = 1 + (1/3) E_0[T_2]  =>  E_0[T_2] = 3
        // E_2[T_0] = 1 + E_1[T_0], E_1[T_0] = 1 + (2/3) E_2[T_0]  =>  E_2[T_0] = 6
        const BDChain c({1.0, 2.0 / 3.0, 0.0}, {0.0, 1.0 / 3.0, 1.0}, {0.0, 0.0, 0.0});
        const auto f = DiscreteCost::constant(2, 1.0);
        const auto costs = exact_additive_oracle(c, f);
        CHECK(costs.up[0] == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(costs.down[2] == doctest::Approx(6.0).epsilon(1e-12));
        CHECK(shuttle_cost_discrete(c.scale(), f) == doctest::Approx(9.0).epsilon(1e-12));
        CHECK(phi_discrete(0, 2, c.scale(), f) == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(phi_discrete(2, 0, c.scale(), f) == doctest::Approx(6.0).epsilon(1e-12));
    }
}

TEST_CASE("formulas against oracles on random chains") {
    Gen gen(32);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t N = gen.index(1, 8);
        const BDChain chain = random_chain(gen, N, trial % 2 == 1);
        const DiscreteCost f(gen.cells(N + 1, 0.0, 3.0));
        const DiscountVector rho(gen.cells(N + 1, 0.3, 1.0));

        const auto wc = convert_waiting_cost(chain, f);
        const DiscreteCost fstar(wc.values);
        const DiscreteScale w = wc.chain.scale();
        const double exact = exact_additive_oracle(chain, f).shuttle;
        worst = std::max(worst, std::abs(shuttle_cost_discrete(w, fstar) - exact) / exact);
        const std::size_t x = gen.index(0, N), y = gen.index(0, N);
        const double hc = exact_hitting_cost(chain, f, x, y);
        worst = std::max(worst, std::abs(phi_discrete(x, y, w, fstar) - hc) / std::max(hc, 1e-300));

        const auto wd = convert_waiting_discount(chain, rho);
        const DiscountVector rstar(wd.values);
        const auto prods = exact_discounted_oracle(chain, rho);
        worst = std::max(worst, std::abs(discounted_payoff_discrete(w, rstar) - prods.shuttle) / prods.shuttle);
        const auto series = series_G_discrete(w, rstar);
        const double hp = exact_hitting_product(prods, x, y);
        worst = std::max(worst, std::abs(series_hitting_product(series, rstar, x, y) - hp) / hp);
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("oracles agree with iteration") {
    Gen gen(33);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t N = gen.index(1, 4);
        const BDChain chain = random_chain(gen, N, true);
        const std::vector<double> f = gen.cells(N + 1, 0.1, 3.0);
        const std::vector<double> rho = gen.cells(N + 1, 0.3, 0.95);
        const std::size_t x = gen.index(0, N), y = gen.index(0, N);
        CHECK(exact_hitting_cost(chain, DiscreteCost(f), x, y) ==
              doctest::Approx(iterate_to(chain, f, x, y, false)).epsilon(1e-9));
        const auto prods = exact_discounted_oracle(chain, DiscountVector(rho));
        CHECK(exact_hitting_product(prods, x, y) == doctest::Approx(iterate_to(chain, rho, x, y, true)).epsilon(1e-9));
    }
}

TEST_CASE("static optimum") {
    SUBCASE("unit cost gives 2N^2 at W = 1") {
        for (std::size_t N : {1, 2, 5, 9}) {
            const auto sol = static_opt_discrete(DiscreteScale::uniform(N), DiscreteCost::constant(N, 1.0),
                                                 DiscreteConstraint(N, {0}));
            CHECK(sol.value == doctest::Approx(2.0 * N * N).epsilon(1e-14));
            for (std::size_t e = 0; e < N; ++e) {
                CHECK(sol.w_opt[e] == doctest::Approx(1.0).epsilon(1e-14));
            }
        }
    }
    SUBCASE("f = (1, 1, 9)") {
        const DiscreteCost f({1.0, 1.0, 9.0});
        const auto sol = static_opt_discrete(DiscreteScale::uniform(2), f, DiscreteConstraint(2, {0}));
        const double expect = std::pow(std::sqrt(2.0) + std::sqrt(10.0), 2);
        CHECK(sol.value == doctest::Approx(expect).epsilon(1e-13));
        CHECK(shuttle_cost_discrete(sol.w_opt, f) == doctest::Approx(expect).epsilon(1e-13));
        CHECK(sol.w_opt[1] == doctest::Approx(std::sqrt(5.0)).epsilon(1e-13));
    }
    SUBCASE("two fixed edges") {
        const auto sol = static_opt_discrete(DiscreteScale({1.0, 2.0, 1.0}), DiscreteCost::constant(3, 1.0),
                                             DiscreteConstraint(3, {0, 1}));
        CHECK(sol.value == doctest::Approx(std::pow(3.0 + std::sqrt(2.0), 2)).epsilon(1e-13));
        CHECK(sol.w_opt[1] == 2.0);
    }
    SUBCASE("vanishing cost on a free edge is an infimum") {
        const auto sol = static_opt_discrete(DiscreteScale::uniform(2), DiscreteCost({1.0, 0.0, 0.0}),
                                             DiscreteConstraint(2, {0}));
        CHECK(!sol.attained);
        CHECK(sol.value == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("brute force brackets the static optimum") {
    Gen gen(34);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t N = gen.index(2, 4);
        const DiscreteScale w0 = gen.scale(N);
        const DiscreteCost f(gen.cells(N + 1, 0.2, 3.0));
        const DiscreteConstraint c(N, {0});
        const auto sol = static_opt_discrete(w0, f, c);
        BruteForceSpec coarse;
        coarse.points = 9;
        coarse.lo = 0.05;
        coarse.hi = 20.0;
        BruteForceSpec fine = coarse;
        fine.points = 33;  // contains the coarse axis
        const auto bc = brute_force_opt(w0, c, &f, nullptr, coarse);
        const auto bf = brute_force_opt(w0, c, &f, nullptr, fine);
        CHECK(bf.value <= bc.value * (1.0 + 1e-14));
        CHECK(sol.value <= bf.value * (1.0 + 1e-12));
        CHECK(bf.value <= sol.value * 1.02);

        BruteForceSpec one;
        one.points = 1;
        const auto b1 = brute_force_opt(w0, c, &f, nullptr, one);
        CHECK(b1.evaluations == 1);
        CHECK(b1.value == doctest::Approx(exact_additive_oracle(BDChain::from_scale(b1.w), f).shuttle));
    }
}

TEST_CASE("discounted chains") {
    SUBCASE("N = 1") {
        for (double r : {0.3, 0.9, 1.0}) {
            const auto rho = DiscountVector::constant(1, r);
            CHECK(discounted_payoff_discrete(DiscreteScale::uniform(1), rho) == doctest::Approx(r * r).epsilon(1e-14));
        }
    }
    SUBCASE("N = 2 against path enumeration") {
        Gen gen(35);
        for (int trial = 0; trial < 20; ++trial) {
            const double p = gen.uniform(0.1, 0.9);
            const std::vector<double> r = gen.cells(3, 0.4, 1.0);
            // up: 0 -> 1, then either 2 or back to 0; down mirrored
            double up = 0.0, down = 0.0, loop_up = 1.0, loop_down = 1.0;
            for (int k = 0; k < 4000; ++k) {
                up += loop_up * r[0] * r[1] * p;
                down += loop_down * r[2] * r[1] * (1.0 - p);
                loop_up *= r[0] * r[1] * (1.0 - p);
                loop_down *= r[2] * r[1] * p;
            }
            const BDChain c({1.0, p, 0.0}, {0.0, 1.0 - p, 1.0}, {0.0, 0.0, 0.0});
            const DiscountVector rho(r);
            CHECK(exact_discounted_oracle(c, rho).shuttle == doctest::Approx(up * down).epsilon(1e-8));
            CHECK(discounted_payoff_discrete(c.scale(), rho) == doctest::Approx(up * down).epsilon(1e-8));
        }
    }
    SUBCASE("pair weight readings") {
        const DiscountVector rho({0.9, 0.5, 0.7});
        const DiscreteScale w({1.0, 1.7});
        const double exact = exact_discounted_oracle(BDChain::from_scale(w), rho).shuttle;
        CHECK(discounted_payoff_discrete(w, rho, PairWeight::edge) == doctest::Approx(exact).epsilon(1e-12));
        CHECK(std::abs(discounted_payoff_discrete(w, rho, PairWeight::state_sigma) - exact) > 1e-3);
        CHECK(std::abs(discounted_payoff_discrete(w, rho, PairWeight::state_sigma_squared) - exact) > 1e-3);
    }
    SUBCASE("no discounting") {
        Gen gen(36);
        const DiscreteScale w = gen.scale(5);
        const auto one = DiscountVector::constant(5, 1.0);
        CHECK(discounted_payoff_discrete(w, one) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(discounted_opt_discrete(w, one, 2).value == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("discounted optimum dominates and matches brute force") {
    Gen gen(37);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t N = gen.index(2, 4);
        const DiscreteScale w0 = gen.scale(N);
        const DiscountVector rho(gen.cells(N + 1, 0.5, 0.98));
        const std::size_t y = gen.index(1, N - 1);
        const auto sol = discounted_opt_discrete(w0, rho, y);
        CHECK(discounted_payoff_discrete(sol.w_opt, rho) == doctest::Approx(sol.value).epsilon(1e-10));
        CHECK(exact_discounted_oracle(BDChain::from_scale(sol.w_opt), rho).shuttle ==
              doctest::Approx(sol.value).epsilon(1e-10));
        for (std::size_t e = 0; e < y; ++e) {
            CHECK(sol.w_opt[e] == w0[e]);
        }
        BruteForceSpec spec;
        spec.points = 25;
        spec.lo = 0.05;
        spec.hi = 20.0;
        spec.center.assign(sol.w_opt.weights().begin() + y, sol.w_opt.weights().end());
        const auto bf = brute_force_opt(w0, DiscreteConstraint::prefix(N, y), nullptr, &rho, spec);
        CHECK(bf.value <= sol.value * (1.0 + 1e-12));
        CHECK(bf.value >= sol.value * (1.0 - 1e-12));  // the axis contains 1, i.e. the optimum itself
    }
}

TEST_CASE("conversions") {
    SUBCASE("holding") {
        const BDChain c({0.5, 0.25, 0.0}, {0.0, 0.25, 0.5}, {0.5, 0.5, 0.5});
        const auto wc = convert_waiting_cost(c, DiscreteCost::constant(2, 3.0));
        CHECK(wc.values[1] == doctest::Approx(6.0));
        CHECK(!wc.chain.has_waiting());
        CHECK(wc.chain.p(1) == doctest::Approx(0.5));
        const auto wd = convert_waiting_discount(c, DiscountVector::constant(2, 1.0));
        CHECK(wd.values[0] == doctest::Approx(1.0));
        const auto wd2 = convert_waiting_discount(c, DiscountVector::constant(2, 0.8));
        CHECK(wd2.values[2] == doctest::Approx(0.5 * 0.8 / (1.0 - 0.4)));
    }
    SUBCASE("ctmc") {
        const CtmcRates rates{{2.0, 2.0, 0.0}, {0.0, 1.0, 1.0}};
        const std::vector<double> alpha{3.0, 3.0, 3.0};
        const auto cd = convert_ctmc_discount(rates, alpha);
        CHECK(cd.values[0] == doctest::Approx(0.4));
        CHECK(cd.values[1] == doctest::Approx(0.5));
        const auto cc = convert_ctmc_cost(rates, DiscreteCost::constant(2, 1.0));
        CHECK(cc.values[1] == doctest::Approx(1.0 / 3.0));
        CHECK(cc.chain.p(1) == doctest::Approx(2.0 / 3.0));
        CHECK_THROWS_AS((CtmcRates{{1.0, 1.0}, {0.5, 1.0}}.validate()), ConfigError);
    }
}
