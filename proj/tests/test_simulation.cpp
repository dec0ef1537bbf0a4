#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "generators.hpp"
#include "shuttle/errors.hpp"
#include "shuttle/simulation.hpp"

using namespace shuttle;

namespace {

SimConfig quick(std::size_t replicas, std::uint64_t seed = 5) {
    SimConfig c;
    c.replicas = replicas;
    c.seed = seed;
    return c;
}

bool within(const EstimateWithCI& e, double target, double k = 3.0) { return std::abs(e.mean - target) <= k * e.se; }

}  // namespace

TEST_CASE("replica streams and sums") {
    auto a = replica_engine(9, 3), b = replica_engine(9, 3), c = replica_engine(9, 4);
    CHECK(a() == b());
    CHECK(a() != c());

    Gen gen(51);
    const std::vector<double> v = gen.cells(10001, -1.0, 1.0);
    long double ref = 0.0L;
    for (double x : v) ref += x;
    CHECK(pairwise_sum(v) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-13));
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("summaries and CSV rows") {
    const std::vector<ReplicaSample> s{{1.0, 2.0, false}, {3.0, 4.0, false}, {100.0, 9.0, true}};
    std::ostringstream csv;
    const auto est = summarize(s, &csv);
    CHECK(est.mean == doctest::Approx(2.0));
    CHECK(est.se == doctest::Approx(1.0));  // sd sqrt(2) over sqrt(2)
    CHECK(est.replicas == 2);
    CHECK(est.censored == 1);

    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "replica,value,shuttle_steps_or_time,censored");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        CHECK(std::count(line.begin(), line.end(), ',') == 3);
        ++rows;
    }
    CHECK(rows == 3);
    CHECK(csv.str().find("2,100,9,1") != std::string::npos);
}

TEST_CASE("results do not depend on the thread count") {
    const BDChain chain = BDChain::from_scale(DiscreteScale({1.0, 0.7, 1.6}));
    const std::vector<double> f{1.0, 2.0, 0.5, 1.0};
    SimConfig one = quick(3000), three = quick(3000);
    three.threads = 3;
    std::ostringstream a, b;
    const auto e1 = simulate_chain_shuttle(chain, f, Functional::additive, one, &a);
    const auto e3 = simulate_chain_shuttle(chain, f, Functional::additive, three, &b);
    CHECK(e1.mean == e3.mean);
    CHECK(e1.se == e3.se);
    CHECK(a.str() == b.str());

    const Grid g(20);
    SimConfig d1 = quick(200), d3 = quick(200);
    d1.h = d3.h = 1e-3;
    d3.threads = 3;
    const auto s = ScaleDensity::constant(g, 1.0);
    const auto s2 = CoefficientField::constant(g, 1.0, FieldRole::variance);
    const auto rate = CoefficientField::constant(g, 1.0, FieldRole::rate);
    CHECK(simulate_diffusion_shuttle(s, s2, rate, Functional::additive, d1).mean ==
          simulate_diffusion_shuttle(s, s2, rate, Functional::additive, d3).mean);
}

TEST_CASE("chain simulations match their oracles") {
    SUBCASE("N = 1 discounted is deterministic") {
        const BDChain c = BDChain::from_scale(DiscreteScale::uniform(1));
        const auto e = simulate_chain_shuttle(c, std::vector<double>{0.9, 0.9}, Functional::discounted, quick(100));
        CHECK(e.mean == doctest::Approx(0.81).epsilon(1e-14));
        CHECK(e.se == doctest::Approx(0.0));
    }
    SUBCASE("N = 2 symmetric") {
        const BDChain c = BDChain::from_scale(DiscreteScale::uniform(2));
        const auto e = simulate_chain_shuttle(c, std::vector<double>{1.0, 1.0, 1.0}, Functional::additive, quick(20000));
        CHECK(within(e, 8.0));
    }
    SUBCASE("holding and discounting") {
        const BDChain c({0.5, 0.3, 0.2, 0.0}, {0.0, 0.4, 0.5, 0.6}, {0.5, 0.3, 0.3, 0.4});
        const std::vector<double> rho{0.95, 0.9, 0.97, 0.85};
        const std::vector<double> f{1.0, 0.5, 2.0, 1.0};
        const auto ed = simulate_chain_shuttle(c, rho, Functional::discounted, quick(20000));
        CHECK(within(ed, exact_discounted_oracle(c, DiscountVector(rho)).shuttle));
        const auto ea = simulate_chain_shuttle(c, f, Functional::additive, quick(20000));
        CHECK(within(ea, exact_additive_oracle(c, DiscreteCost(f)).shuttle));
    }
    SUBCASE("continuous time") {
        const CtmcRates r{{1.0, 1.0, 0.0}, {0.0, 1.0, 1.0}};
        const auto e = simulate_ctmc_shuttle(r, std::vector<double>{1.0, 1.0, 1.0}, Functional::additive, quick(20000));
        CHECK(within(e, 6.0));
        const auto conv = convert_ctmc_cost(r, DiscreteCost::constant(2, 1.0));
        CHECK(exact_additive_oracle(conv.chain, DiscreteCost(conv.values)).shuttle == doctest::Approx(6.0));
    }
}

TEST_CASE("censoring") {
    const BDChain c = BDChain::from_scale(DiscreteScale::uniform(6));
    SimConfig cfg = quick(500);
    cfg.max_steps = 3;
    const auto e = simulate_chain_shuttle(c, std::vector<double>(7, 1.0), Functional::additive, cfg);
    CHECK(e.censored == 500);
    CHECK(e.replicas == 0);

    const Grid g(10);
    SimConfig d = quick(300);
    d.h = 1e-3;
    d.max_time = 0.05;
    const auto ed = simulate_diffusion_shuttle(ScaleDensity::constant(g, 1.0),
                                               CoefficientField::constant(g, 1.0, FieldRole::variance),
                                               CoefficientField::constant(g, 1.0, FieldRole::rate),
                                               Functional::additive, d);
    CHECK(ed.censored == 300);

    SimConfig bad;
    bad.h = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("diffusion estimate and step bias") {
    // Brownian motion reflected at 0: shuttle time has mean 2, the Euler bias shrinks like sqrt(h)
    const Grid g(50);
    const auto s = ScaleDensity::constant(g, 1.0);
    const auto s2 = CoefficientField::constant(g, 1.0, FieldRole::variance);
    const auto f = CoefficientField::constant(g, 1.0, FieldRole::rate);
    SimConfig coarse = quick(20000, 11), fine = quick(20000, 11);
    coarse.h = 4e-3;
    fine.h = 1e-3;
    const auto ec = simulate_diffusion_shuttle(s, s2, f, Functional::additive, coarse);
    const auto ef = simulate_diffusion_shuttle(s, s2, f, Functional::additive, fine);
    const double bc = ec.mean - 2.0, bf = ef.mean - 2.0;
    MESSAGE("bias at h: " << bc << " +- " << ec.se << ", at h/4: " << bf << " +- " << ef.se);
    CHECK(bc > 3.0 * ec.se);
    CHECK(bf < 0.75 * bc);
    CHECK(std::abs(bf) < 3.0 * ef.se + 2.5 * std::sqrt(fine.h) * 2.0);

    SimConfig dc = quick(20000, 12);
    dc.h = 1e-3;
    const auto a = CoefficientField::constant(g, 0.5, FieldRole::rate);
    const auto ed = simulate_diffusion_shuttle(s, s2, a, Functional::discounted, dc);
    const double exact = 1.0 / std::pow(std::cosh(1.0), 2);
    CHECK(std::abs(ed.mean - exact) < 3.0 * ed.se + 2.5 * std::sqrt(dc.h) * exact);

    CHECK(step_exceeds_grid(s, s2, 1e-3));
    CHECK(!step_exceeds_grid(s, s2, 1e-5));
}

TEST_CASE("recorded paths") {
    const Grid g(20);
    const auto s = ScaleDensity::constant(g, 1.0);
    SimConfig cfg = quick(1);
    cfg.h = 1e-3;
    const auto p = sample_diffusion_path(s, CoefficientField::constant(g, 1.0, FieldRole::variance),
                                         CoefficientField::constant(g, 1.0, FieldRole::rate), cfg, 0, 10);
    CHECK_NOTHROW(p.validate());
    CHECK(p.control_fingerprint == s.fingerprint());
    CHECK(p.after_top.back());
    CHECK(p.positions.back() == doctest::Approx(0.0).epsilon(1e-12));

    const auto w = DiscreteScale::uniform(3);
    const auto cp = sample_chain_path(BDChain::from_scale(w), std::vector<double>(4, 1.0), Functional::additive,
                                      quick(1), 0);
    CHECK_NOTHROW(cp.validate(3));
    CHECK(cp.states.back() == 0);
    CHECK(cp.control_fingerprint == scale_fingerprint(w));
    CHECK(cp.accrued.back() == static_cast<double>(cp.states.size() - 1));
}

TEST_CASE("martingale verdicts") {
    std::vector<double> sym(2000);
    for (std::size_t i = 0; i < sym.size(); ++i) sym[i] = (i % 2 == 0) ? 1.0 : -1.0;
    CHECK(martingale_test(0.0, sym, 0, Expectation::martingale).verdict == Verdict::pass);

    std::vector<double> up = sym;
    for (double& v : up) v += 0.5;
    CHECK(martingale_test(0.0, up, 0, Expectation::martingale).verdict == Verdict::fail);
    CHECK(martingale_test(0.0, up, 0, Expectation::submartingale).verdict == Verdict::pass);
    CHECK(martingale_test(0.0, up, 0, Expectation::supermartingale).verdict == Verdict::fail);
    CHECK(martingale_test(1.0, up, 0, Expectation::supermartingale).verdict == Verdict::pass);
    CHECK(martingale_test(0.0, sym, 0, Expectation::submartingale).verdict == Verdict::inconclusive);

    const std::vector<double> few(10, 1.0);
    CHECK(martingale_test(0.0, few, 0, Expectation::martingale).verdict == Verdict::inconclusive);
    CHECK(std::string(verdict_name(Verdict::pass)) == "PASS");
}

TEST_CASE("chain Bellman processes under the optimal and a worse control") {
    const DiscreteCost f({1.0, 2.0, 1.0, 3.0});
    const auto opt = static_opt_discrete(DiscreteScale::uniform(3), f, DiscreteConstraint(3, {0}));
    SimConfig cfg = quick(20000, 13);
    const auto run = [&](const DiscreteScale& w) {
        const DiscreteAdditiveBellman v(w, f);
        return chain_martingale_test(BDChain::from_scale(w), f.values(), Functional::additive,
                                     [&](const PathState& st) {
                                         return v(st.accrued, static_cast<std::size_t>(st.x),
                                                  static_cast<std::size_t>(st.max), st.after_top);
                                     },
                                     9, Expectation::martingale, cfg);
    };
    CHECK(run(opt.w_opt).verdict == Verdict::pass);

    std::vector<double> worse(opt.w_opt.weights().begin(), opt.w_opt.weights().end());
    worse[2] *= 3.0;
    const auto rep = run(DiscreteScale(worse));
    CHECK(rep.z > 3.0);  // value process of a suboptimal control drifts up
}
