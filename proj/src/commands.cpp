#include "shuttle/commands.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "shuttle/additive.hpp"
#include "shuttle/dynamic.hpp"

namespace shuttle {

using nlohmann::json;

int exit_code_for(ErrorCategory category) {
    switch (category) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::degenerate: return 3;
    case ErrorCategory::numerical: return 4;
    case ErrorCategory::domain: return 2;
    case ErrorCategory::contract: return 1;
    }
    return 1;
}

namespace {

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

class Table {
public:
    void row(const std::string& key, const std::string& value) { rows_.emplace_back(key, value); }
    void row(const std::string& key, double value) { row(key, num(value)); }
    std::string str() const {
        std::size_t w = 0;
        for (const auto& r : rows_) {
            w = std::max(w, r.first.size());
        }
        std::ostringstream os;
        for (const auto& r : rows_) {
            os << std::left << std::setw(static_cast<int>(w) + 2) << r.first << r.second << '\n';
        }
        return os.str();
    }

private:
    std::vector<std::pair<std::string, std::string>> rows_;
};

json header(const char* command, const ProblemConfig& cfg) {
    return json{{"schema_version", kSchemaVersion}, {"command", command}, {"kind", kind_name(cfg.kind)}};
}

Functional functional_of(const ProblemConfig& cfg) {
    return is_discounted(cfg.kind) ? Functional::discounted : Functional::additive;
}

// ---- continuous solvers ----

struct ContinuousOptimum {
    double value;
    ScaleDensity s;
    json components;
};

ContinuousOptimum solve_additive(const ContinuousInstance& in) {
    const AdditiveProblem p{in.sigma2, in.rate, in.s0, in.constraint};
    bool zero_free = false;
    for (std::size_t i = 0; i < in.grid.n_cells(); ++i) {
        zero_free = zero_free || (!in.constraint.contains(i) && in.rate[i] == 0.0);
    }
    if (!zero_free) {
        const StaticSolution sol = optimal_static(p);
        return {sol.value, sol.s_opt,
                json{{"s0_C", sol.s0_on_c},
                     {"I_C", sol.cost_on_c},
                     {"J_free", sol.j_off_c},
                     {"attained", true},
                     {"quadrature", shuttle_cost(sol.s_opt, in.rate, in.sigma2)}}};
    }
    const VanishingReduction red = vanishing_f_reduction(p);
    if (red.trivial) {
        return {0.0, in.s0, json{{"attained", false}, {"collapsed_cells", in.grid.n_cells()}}};
    }
    const StaticSolution sol = optimal_static(red.problem());
    const ScaleDensity s = red.extend(sol.s_opt, p);
    return {red.value(), s,
            json{{"s0_C", sol.s0_on_c},
                 {"I_C", sol.cost_on_c},
                 {"J_free", sol.j_off_c},
                 {"attained", false},
                 {"collapsed_cells", red.collapsed_cells.size()},
                 {"quadrature", shuttle_cost(s, in.rate, in.sigma2)}}};
}

ContinuousOptimum solve_discounted(const ContinuousInstance& in, const ProblemConfig& cfg) {
    const DiscountedSolution sol =
        optimal_discounted(DiscountedProblem{in.sigma2, in.rate, in.s0, in.y}, cfg.series, cfg.convention);
    return {sol.value, sol.s_opt,
            json{{"G_y", sol.g},
                 {"H_y", sol.h},
                 {"dG_ds_y", sol.g_s},
                 {"dH_dmu_y", sol.h_mu},
                 {"A_y", sol.a_y},
                 {"c", sol.level},
                 {"orders", sol.orders},
                 {"tail_bound", sol.tail_bound}}};
}

ContinuousOptimum solve_continuous(const ContinuousInstance& in, const ProblemConfig& cfg) {
    return is_discounted(cfg.kind) ? solve_discounted(in, cfg) : solve_additive(in);
}

double continuous_value(const ScaleDensity& s, const ContinuousInstance& in, const ProblemConfig& cfg) {
    if (is_discounted(cfg.kind)) {
        return discounted_shuttle_payoff(s, in.sigma2, in.rate, cfg.series).value;
    }
    return shuttle_cost(s, in.rate, in.sigma2);
}

// ---- discrete solvers ----

struct DiscreteOptimum {
    double value;
    DiscreteScale w;
    json components;
};

double chain_oracle(const BDChain& chain, std::span<const double> values, bool discounted) {
    const std::vector<double> v(values.begin(), values.end());
    return discounted ? exact_discounted_oracle(chain, DiscountVector(v)).shuttle
                      : exact_additive_oracle(chain, DiscreteCost(v)).shuttle;
}

DiscreteOptimum solve_discrete(const DiscreteInstance& in, const ProblemConfig& cfg) {
    if (is_discounted(cfg.kind)) {
        const auto sol = discounted_opt_discrete(in.w0, DiscountVector(in.values), in.y);
        return {sol.value, sol.w_opt,
                json{{"level", sol.level},
                     {"even_sum", sol.even_sum},
                     {"odd_sum", sol.odd_sum},
                     {"oracle", chain_oracle(BDChain::from_scale(sol.w_opt), in.values, true)}}};
    }
    const auto sol = static_opt_discrete(in.w0, DiscreteCost(in.values), in.constraint);
    return {sol.value, sol.w_opt,
            json{{"s0_C", sol.s0_on_c},
                 {"I_C", sol.cost_on_c},
                 {"J_free", sol.j_off_c},
                 {"attained", sol.attained},
                 {"oracle", chain_oracle(BDChain::from_scale(sol.w_opt), in.values, false)}}};
}

// Scale w with the holding probabilities of `like`.
BDChain with_holding(const DiscreteScale& w, const BDChain& like) {
    const BDChain jump = BDChain::from_scale(w);
    const std::size_t N = w.N();
    std::vector<double> p(N + 1), q(N + 1), eps(N + 1);
    for (std::size_t n = 0; n <= N; ++n) {
        eps[n] = like.eps(n);
        p[n] = jump.p(n) * (1.0 - eps[n]);
        q[n] = jump.q(n) * (1.0 - eps[n]);
    }
    return BDChain(p, q, eps);
}

// Same total rates, jump probabilities from w.
CtmcRates ctmc_with_scale(const CtmcRates& rates, const DiscreteScale& w) {
    const BDChain jump = BDChain::from_scale(w);
    CtmcRates out = rates;
    for (std::size_t n = 0; n <= rates.N(); ++n) {
        const double total = rates.lambda[n] + rates.mu[n];
        out.lambda[n] = total * jump.p(n);
        out.mu[n] = total * jump.q(n);
    }
    out.lambda[rates.N()] = 0.0;
    out.mu[0] = 0.0;
    return out;
}

double ctmc_oracle(const CtmcRates& rates, std::span<const double> raw, bool discounted) {
    const WaitingConversion conv = discounted
                                       ? convert_ctmc_discount(rates, raw)
                                       : convert_ctmc_cost(rates, DiscreteCost({raw.begin(), raw.end()}));
    return chain_oracle(conv.chain, conv.values, discounted);
}

json estimate_json(const EstimateWithCI& est) {
    return json{{"mean", est.mean}, {"se", est.se}, {"replicas", est.replicas}, {"censored", est.censored}};
}

// Simulated shuttle functional of the process driven by scale w (chains) in its original form.
EstimateWithCI simulate_discrete(const DiscreteInstance& in, const DiscreteScale& w, Functional fn,
                                 const SimConfig& sim, std::ostream* csv, double* reference) {
    const bool discounted = fn == Functional::discounted;
    if (in.ctmc) {
        const CtmcRates rates = ctmc_with_scale(*in.ctmc, w);
        if (reference) {
            *reference = ctmc_oracle(rates, in.original_values, discounted);
        }
        return simulate_ctmc_shuttle(rates, in.original_values, fn, sim, csv);
    }
    const BDChain chain = with_holding(w, in.original);
    if (reference) {
        *reference = chain_oracle(chain, in.original_values, discounted);
    }
    return simulate_chain_shuttle(chain, in.original_values, fn, sim, csv);
}

void warn_step(const ScaleDensity& s, const ContinuousInstance& in, const SimConfig& sim, std::ostream* warnings) {
    if (warnings && step_exceeds_grid(s, in.sigma2, sim.h)) {
        *warnings << "warning: step h = " << sim.h
                  << " spans several grid cells; the estimate is biased toward coarser dynamics\n";
    }
}

// ---- verification ----

struct Check {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

double rel_gap(double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::abs(b));
}

Check closeness(const std::string& name, double value, double target, double tol, std::string detail = {}) {
    return Check{name, rel_gap(value, target) <= tol, value, target, tol, std::move(detail)};
}

Check mc_check(const EstimateWithCI& est, double target, double bias) {
    const double allowance = 3.0 * est.se + bias;
    Check c{"Monte Carlo estimate", false, est.mean, target, allowance, ""};
    const double censored_frac =
        static_cast<double>(est.censored) / static_cast<double>(std::max<std::size_t>(1, est.replicas + est.censored));
    c.pass = std::isfinite(est.mean) && std::abs(est.mean - target) <= allowance && censored_frac <= 0.01;
    c.detail = "se " + num(est.se) + ", replicas " + std::to_string(est.replicas) + ", censored " +
               std::to_string(est.censored) + ", allowance 3 se + " + num(bias);
    return c;
}

Check martingale_check(const std::string& name, const MartingaleReport& rep, bool must_pass) {
    Check c{name, false, rep.z, 0.0, 3.0, ""};
    c.pass = must_pass ? rep.verdict == Verdict::pass : rep.verdict != Verdict::fail;
    c.detail = std::string("expected ") + expectation_name(rep.expected) + ", verdict " + verdict_name(rep.verdict) +
               ", mean increment " + num(rep.mean_increment) + " (se " + num(rep.se) + "), replicas " +
               std::to_string(rep.replicas) + ", censored " + std::to_string(rep.censored);
    return c;
}

// s' times exp(A sin(2 pi k x + phase)) on free cells.
std::vector<double> smooth_perturbation(std::span<const double> base, const std::vector<bool>& fixed,
                                        std::mt19937_64& rng) {
    std::uniform_real_distribution<double> amp(0.1, 1.0), phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_int_distribution<int> freq(1, 4);
    const double a = amp(rng), ph = phase(rng);
    const int k = freq(rng);
    const std::size_t n = base.size();
    std::vector<double> out(base.begin(), base.end());
    for (std::size_t i = 0; i < n; ++i) {
        if (!fixed[i]) {
            const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
            out[i] *= std::exp(a * std::sin(2.0 * std::numbers::pi * k * x + ph));
        }
    }
    return out;
}

std::vector<bool> fixed_cells(const ContinuousInstance& in, const ProblemConfig& cfg) {
    std::vector<bool> fixed(in.grid.n_cells());
    for (std::size_t i = 0; i < fixed.size(); ++i) {
        fixed[i] = is_discounted(cfg.kind) ? in.grid.node(i + 1) <= in.y + 1e-12 : in.constraint.contains(i);
    }
    return fixed;
}

bool agrees_on(std::span<const double> a, std::span<const double> b, const std::vector<bool>& fixed) {
    for (std::size_t i = 0; i < fixed.size(); ++i) {
        if (fixed[i] && rel_gap(a[i], b[i]) > 1e-12) {
            return false;
        }
    }
    return true;
}

std::vector<Check> verify_continuous(const ProblemConfig& cfg, std::ostream* warnings) {
    const ContinuousInstance in = build_continuous(cfg);
    const bool discounted = is_discounted(cfg.kind);
    const ContinuousOptimum opt = solve_continuous(in, cfg);
    std::vector<Check> checks;

    const double achieved = continuous_value(opt.s, in, cfg);
    checks.push_back(closeness(discounted ? "closed form vs series payoff" : "closed form vs quadrature",
                               achieved, opt.value, discounted ? 1e-8 : 1e-9,
                               "value of the returned control against the optimal value"));

    if (discounted) {
        const DiscountedPayoff pay = discounted_shuttle_payoff(in.s0, in.sigma2, in.rate, cfg.series);
        checks.push_back(Check{"product identity", pay.identity_gap <= 1e-8, pay.identity_gap, 0.0, 1e-8,
                               "reference control, " + std::to_string(pay.orders) + " orders, tail bound " +
                                   num(pay.tail_bound)});
    } else {
        const double sep = phi_up(0.0, 1.0, in.s0, in.rate, in.sigma2) + phi_down(1.0, 0.0, in.s0, in.rate, in.sigma2);
        checks.push_back(closeness("separability", sep, shuttle_cost(in.s0, in.rate, in.sigma2), 1e-10,
                                   "up plus down hitting cost against s(1) I(1) on the reference control"));
    }

    const std::vector<bool> fixed = fixed_cells(in, cfg);
    std::mt19937_64 rng(cfg.verify.perturbation_seed);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cfg.verify.perturbations; ++k) {
        const ScaleDensity s(in.grid, smooth_perturbation(opt.s.sprime(), fixed, rng));
        const double v = continuous_value(s, in, cfg);
        worst = std::min(worst, (discounted ? opt.value - v : v - opt.value) / std::max(1.0, std::abs(opt.value)));
    }
    if (cfg.verify.perturbations > 0) {
        checks.push_back(Check{"dominance over random perturbations", worst >= -1e-10, worst, 0.0, 1e-10,
                               std::to_string(cfg.verify.perturbations) +
                                   " smooth perturbations; value is the smallest relative margin"});
    }

    if (in.control) {
        const double v = continuous_value(*in.control, in, cfg);
        const double gap = discounted ? opt.value - v : v - opt.value;
        Check c{"dominance over supplied control", gap >= -1e-10 * std::max(1.0, std::abs(opt.value)), gap, 0.0,
                1e-10, "control value " + num(v) + ", optimum " + num(opt.value)};
        if (!agrees_on(in.control->sprime(), in.s0.sprime(), fixed)) {
            c.pass = false;
            c.detail += "; control differs from the reference on the constraint set";
        }
        checks.push_back(c);
    }

    if (cfg.verify.simulate) {
        warn_step(opt.s, in, cfg.sim, warnings);
        const EstimateWithCI est =
            simulate_diffusion_shuttle(opt.s, in.sigma2, in.rate, functional_of(cfg), cfg.sim);
        checks.push_back(mc_check(est, opt.value, 2.5 * std::sqrt(cfg.sim.h) * std::abs(opt.value)));
    }

    if (cfg.verify.martingale) {
        auto run = [&](const ScaleDensity& s, Expectation e) {
            if (discounted) {
                const DiscountedBellman psi(s, in.sigma2, in.rate, cfg.series);
                return diffusion_martingale_test(
                    s, in.sigma2, in.rate,
                    [&](const PathState& st) { return psi(st.accrued, st.x, st.max, st.after_top); },
                    cfg.verify.window, e, cfg.sim);
            }
            const AdditiveBellman v(s, in.rate, in.sigma2);
            return diffusion_martingale_test(
                s, in.sigma2, in.rate,
                [&](const PathState& st) { return v(st.accrued, st.x, st.max, st.after_top); },
                cfg.verify.window, e, cfg.sim);
        };
        checks.push_back(martingale_check("Bellman martingale (optimal control)",
                                          run(opt.s, Expectation::martingale), true));
        if (in.control) {
            const Expectation e = discounted ? Expectation::supermartingale : Expectation::submartingale;
            checks.push_back(martingale_check("Bellman process (supplied control)", run(*in.control, e), false));
        }
    }
    return checks;
}

std::vector<Check> verify_discrete(const ProblemConfig& cfg, std::ostream*) {
    const DiscreteInstance in = build_discrete(cfg);
    const bool discounted = is_discounted(cfg.kind);
    const DiscreteOptimum opt = solve_discrete(in, cfg);
    const std::size_t N = in.w0.N();
    std::vector<Check> checks;

    checks.push_back(closeness("closed form vs oracle", opt.components["oracle"].get<double>(), opt.value, 1e-10,
                               "exact first-step oracle on the optimal chain"));

    // random chains of the same size
    std::mt19937_64 rng(cfg.verify.perturbation_seed);
    std::uniform_real_distribution<double> logw(-1.5, 1.5), fval(0.0, 2.0), rval(0.3, 1.0);
    std::uniform_int_distribution<std::size_t> state(0, N);
    double worst = 0.0;
    for (std::size_t k = 0; k < cfg.verify.oracle_instances; ++k) {
        std::vector<double> w(N, 1.0);
        for (std::size_t e = 1; e < N; ++e) {
            w[e] = std::exp(logw(rng));
        }
        const DiscreteScale ws(w);
        const BDChain chain = BDChain::from_scale(ws);
        std::vector<double> v(N + 1);
        for (double& x : v) {
            x = discounted ? rval(rng) : fval(rng);
        }
        const std::size_t x = state(rng), y = state(rng);
        if (discounted) {
            const DiscountVector rho(v);
            const auto prods = exact_discounted_oracle(chain, rho);
            worst = std::max(worst, rel_gap(discounted_payoff_discrete(ws, rho), prods.shuttle));
            const DiscreteSeries series = series_G_discrete(ws, rho);
            worst = std::max(worst, rel_gap(series_hitting_product(series, rho, x, y),
                                            exact_hitting_product(prods, x, y)));
        } else {
            const DiscreteCost f(v);
            worst = std::max(worst, rel_gap(shuttle_cost_discrete(ws, f), exact_additive_oracle(chain, f).shuttle));
            worst = std::max(worst, rel_gap(phi_discrete(x, y, ws, f), exact_hitting_cost(chain, f, x, y)));
        }
    }
    if (cfg.verify.oracle_instances > 0) {
        checks.push_back(Check{"formulas vs oracle on random chains", worst <= 1e-10, worst, 0.0, 1e-10,
                               std::to_string(cfg.verify.oracle_instances) + " chains with N = " +
                                   std::to_string(N) + "; value is the largest relative error"});
    }

    // brute force over the free edges
    std::vector<double> center;
    for (std::size_t e = 0; e < N; ++e) {
        if (!in.constraint.contains(e)) {
            center.push_back(opt.w[e]);
        }
    }
    const double grid_size = std::pow(static_cast<double>(cfg.verify.brute_force_points),
                                      static_cast<double>(center.size()));
    if (!center.empty() && grid_size <= 2e6) {
        BruteForceSpec spec;
        spec.points = cfg.verify.brute_force_points;
        spec.center = center;
        spec.threads = cfg.sim.threads;
        const DiscreteCost f(in.values);
        const DiscountVector rho(discounted ? in.values : std::vector<double>(N + 1, 1.0));
        const BruteForceResult bf =
            brute_force_opt(in.w0, in.constraint, discounted ? nullptr : &f, discounted ? &rho : nullptr, spec);
        const double margin = (discounted ? opt.value - bf.value : bf.value - opt.value) /
                              std::max(1.0, std::abs(opt.value));
        checks.push_back(Check{"dominance over brute-force grid", margin >= -1e-10, margin, 0.0, 1e-10,
                               std::to_string(bf.evaluations) + " grid points; grid optimum " + num(bf.value)});
    }

    if (in.control) {
        const double v = chain_oracle(BDChain::from_scale(*in.control), in.values, discounted);
        const double gap = discounted ? opt.value - v : v - opt.value;
        Check c{"dominance over supplied control", gap >= -1e-10 * std::max(1.0, std::abs(opt.value)), gap, 0.0,
                1e-10, "control value " + num(v) + ", optimum " + num(opt.value)};
        for (std::size_t e = 0; e < N; ++e) {
            if (in.constraint.contains(e) && rel_gap((*in.control)[e], in.w0[e]) > 1e-12) {
                c.pass = false;
                c.detail += "; control differs from the reference on constrained edge " + std::to_string(e);
                break;
            }
        }
        checks.push_back(c);
    }

    if (cfg.verify.simulate) {
        double reference = 0.0;
        const EstimateWithCI est = simulate_discrete(in, opt.w, functional_of(cfg), cfg.sim, nullptr, &reference);
        checks.push_back(mc_check(est, opt.value, 0.0));
    }

    if (cfg.verify.martingale) {
        const std::size_t window = std::max<std::size_t>(1, N * N);
        auto run = [&](const DiscreteScale& w, Expectation e) {
            const BDChain chain = BDChain::from_scale(w);
            if (discounted) {
                const DiscreteDiscountedBellman psi(w, DiscountVector(in.values));
                return chain_martingale_test(
                    chain, in.values, Functional::discounted,
                    [&](const PathState& st) {
                        return psi(st.accrued, static_cast<std::size_t>(st.x), static_cast<std::size_t>(st.max),
                                   st.after_top);
                    },
                    window, e, cfg.sim);
            }
            const DiscreteAdditiveBellman v(w, DiscreteCost(in.values));
            return chain_martingale_test(
                chain, in.values, Functional::additive,
                [&](const PathState& st) {
                    return v(st.accrued, static_cast<std::size_t>(st.x), static_cast<std::size_t>(st.max),
                             st.after_top);
                },
                window, e, cfg.sim);
        };
        checks.push_back(martingale_check("Bellman martingale (optimal control)",
                                          run(opt.w, Expectation::martingale), true));
        if (in.control) {
            const Expectation e = discounted ? Expectation::supermartingale : Expectation::submartingale;
            checks.push_back(martingale_check("Bellman process (supplied control)", run(*in.control, e), false));
        }
    }
    return checks;
}

}  // namespace

CommandOutput cmd_solve(const ProblemConfig& cfg) {
    CommandOutput out;
    out.document = header("solve", cfg);
    out.document["status"] = "ok";
    Table t;
    t.row("kind", kind_name(cfg.kind));
    if (!is_discrete(cfg.kind)) {
        const ContinuousInstance in = build_continuous(cfg);
        const ContinuousOptimum opt = solve_continuous(in, cfg);
        const DriftField drift = scale_to_drift(opt.s, in.sigma2);
        out.document["value"] = opt.value;
        out.document["control"] = json{{"scale_density", opt.s.sprime()}, {"drift", drift.mu()}};
        out.document["components"] = opt.components;
        t.row("optimal value", opt.value);
        for (const auto& item : opt.components.items()) {
            t.row(item.key(), item.value().dump());
        }
        std::ostringstream samples;
        samples << "\n" << std::left << std::setw(10) << "x" << std::setw(18) << "s'" << "drift\n";
        const std::size_t n = in.grid.n_cells();
        for (std::size_t k = 0; k <= 10; ++k) {
            const std::size_t i = std::min(n - 1, k * n / 10);
            samples << std::setw(10) << num(in.grid.midpoint(i)) << std::setw(18) << num(opt.s[i]) << num(drift[i])
                    << '\n';
        }
        out.text = t.str() + samples.str();
    } else {
        const DiscreteInstance in = build_discrete(cfg);
        const DiscreteOptimum opt = solve_discrete(in, cfg);
        out.document["value"] = opt.value;
        out.document["control"] = json{{"W", opt.w.weights()}};
        if (in.ctmc) {
            const CtmcRates r = ctmc_with_scale(*in.ctmc, opt.w);
            out.document["control"]["lambda"] = r.lambda;
            out.document["control"]["mu"] = r.mu;
        }
        out.document["components"] = opt.components;
        t.row("optimal value", opt.value);
        for (const auto& item : opt.components.items()) {
            t.row(item.key(), item.value().dump());
        }
        std::ostringstream w;
        for (std::size_t e = 0; e < opt.w.N(); ++e) {
            w << (e ? " " : "") << num(opt.w[e]);
        }
        t.row("W", w.str());
        out.text = t.str();
    }
    validate_result_document(out.document);
    return out;
}

CommandOutput cmd_simulate(const ProblemConfig& cfg, std::ostream* csv, std::ostream* warnings) {
    CommandOutput out;
    out.document = header("simulate", cfg);
    out.document["status"] = "ok";
    const Functional fn = functional_of(cfg);
    EstimateWithCI est;
    double reference = 0.0;
    if (!is_discrete(cfg.kind)) {
        const ContinuousInstance in = build_continuous(cfg);
        const ScaleDensity& s = in.control ? *in.control : in.s0;
        warn_step(s, in, cfg.sim, warnings);
        est = simulate_diffusion_shuttle(s, in.sigma2, in.rate, fn, cfg.sim, csv);
        reference = continuous_value(s, in, cfg);
    } else {
        const DiscreteInstance in = build_discrete(cfg);
        est = simulate_discrete(in, in.control ? *in.control : in.w0, fn, cfg.sim, csv, &reference);
    }
    out.document["functional"] = fn == Functional::additive ? "additive" : "discounted";
    out.document["estimate"] = estimate_json(est);
    out.document["reference_value"] = reference;
    out.document["seed"] = cfg.sim.seed;

    Table t;
    t.row("kind", kind_name(cfg.kind));
    t.row("estimate", est.mean);
    t.row("standard error", est.se);
    t.row("replicas", std::to_string(est.replicas));
    t.row("censored", std::to_string(est.censored));
    t.row("exact value", reference);
    t.row("z", est.se > 0.0 ? (est.mean - reference) / est.se : 0.0);
    out.text = t.str();
    validate_result_document(out.document);
    return out;
}

CommandOutput cmd_verify(const ProblemConfig& cfg, std::ostream* warnings) {
    const std::vector<Check> checks =
        is_discrete(cfg.kind) ? verify_discrete(cfg, warnings) : verify_continuous(cfg, warnings);
    CommandOutput out;
    out.document = header("verify", cfg);
    bool all = true;
    json arr = json::array();
    std::ostringstream text;
    for (const Check& c : checks) {
        all = all && c.pass;
        arr.push_back(json{{"name", c.name},
                           {"verdict", c.pass ? "PASS" : "FAIL"},
                           {"value", c.value},
                           {"target", c.target},
                           {"tolerance", c.tolerance},
                           {"detail", c.detail}});
        text << (c.pass ? "PASS  " : "FAIL  ") << std::left << std::setw(40) << c.name << " value " << num(c.value)
             << "  target " << num(c.target) << "  tol " << num(c.tolerance) << "\n      " << c.detail << '\n';
    }
    out.document["checks"] = arr;
    out.document["status"] = all ? "pass" : "fail";
    text << (all ? "overall PASS\n" : "overall FAIL\n");
    out.text = text.str();
    out.exit_code = all ? 0 : 5;
    validate_result_document(out.document);
    return out;
}

}  // namespace shuttle
