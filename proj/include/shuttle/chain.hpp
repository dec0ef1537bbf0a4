#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace shuttle {

/**
 * Scale weights W_0..W_{N-1} of a birth-death chain on {0..N}; W_0 = 1.
 * W_n = W_{n-1} q_n / p_n, so edge e (between states e and e+1) carries W_e.
 */
class DiscreteScale {
public:
    explicit DiscreteScale(std::vector<double> w);
    static DiscreteScale uniform(std::size_t n_states_minus_one);

    std::size_t N() const { return w_.size(); }
    double operator[](std::size_t e) const { return w_[e]; }
    std::span<const double> weights() const { return w_; }

    // s(n) = sum_{k<n} W_k
    double s(std::size_t n) const;
    double total() const { return s(N()); }
    // w_n = W_n / W_{n-1} = q_n / p_n for 1 <= n <= N-1
    double ratio(std::size_t n) const { return w_[n] / w_[n - 1]; }

private:
    std::vector<double> w_;
};

/// Nearest-neighbour chain on {0..N} with holding probabilities eps.
class BDChain {
public:
    BDChain(std::vector<double> p, std::vector<double> q, std::vector<double> eps);
    // Chain without waiting whose scale weights are W.
    static BDChain from_scale(const DiscreteScale& w);

    std::size_t N() const { return p_.size() - 1; }
    double p(std::size_t n) const { return p_[n]; }
    double q(std::size_t n) const { return q_[n]; }
    double eps(std::size_t n) const { return eps_[n]; }
    bool has_waiting() const;

    // Scale of the chain (ignores eps, which does not change W).
    DiscreteScale scale() const;

private:
    std::vector<double> p_;
    std::vector<double> q_;
    std::vector<double> eps_;
};

/// Per-state running cost f(0..N).
class DiscreteCost {
public:
    explicit DiscreteCost(std::vector<double> f);
    static DiscreteCost constant(std::size_t N, double value);

    std::size_t N() const { return f_.size() - 1; }
    double operator[](std::size_t n) const { return f_[n]; }
    std::span<const double> values() const { return f_; }
    // f~(e) = (f(e) + f(e+1)) / 2
    double edge(std::size_t e) const { return 0.5 * (f_[e] + f_[e + 1]); }

private:
    std::vector<double> f_;
};

/// Per-state discount factors rho(0..N) in (0, 1].
class DiscountVector {
public:
    explicit DiscountVector(std::vector<double> rho);
    static DiscountVector constant(std::size_t N, double value);

    std::size_t N() const { return rho_.size() - 1; }
    double operator[](std::size_t n) const { return rho_[n]; }
    std::span<const double> values() const { return rho_; }
    // 1 - rho_e rho_{e+1}: the weight opening a pair on edge e
    double kappa(std::size_t e) const { return 1.0 - rho_[e] * rho_[e + 1]; }
    // prod_{k=from}^{to-1} rho_k
    double product(std::size_t from, std::size_t to) const;

private:
    std::vector<double> rho_;
};

/// Set of edges whose weights are fixed to the reference; always contains edge 0.
class DiscreteConstraint {
public:
    DiscreteConstraint(std::size_t N, std::vector<std::size_t> edges);
    // Edges 0..y-1 (y >= 1).
    static DiscreteConstraint prefix(std::size_t N, std::size_t y);

    std::size_t N() const { return member_.size(); }
    bool contains(std::size_t e) const { return member_[e]; }
    std::vector<std::size_t> edges() const;

private:
    std::vector<bool> member_;
};

// --- additive ---

struct ChainCosts {
    std::vector<double> up;    // E_x[sum_{t<T_N} f(X_t)], x = 0..N
    std::vector<double> down;  // E_x[sum_{t<T_0} f(X_t)]
    double shuttle = 0.0;      // up[0] + down[N]
};

// Tridiagonal first-step solve for the hitting costs to N and to 0.
ChainCosts exact_additive_oracle(const BDChain& chain, const DiscreteCost& f);
// E_x[sum_{t<T_y} f(X_t)] by the tridiagonal solve.
double exact_hitting_cost(const BDChain& chain, const DiscreteCost& f, std::size_t x, std::size_t y);

// Closed-form hitting cost under scale W (no waiting); either direction.
double phi_discrete(std::size_t x, std::size_t y, const DiscreteScale& w, const DiscreteCost& f);
// s(N) * sum_e 2 f~(e) / W_e
double shuttle_cost_discrete(const DiscreteScale& w, const DiscreteCost& f);

struct DiscreteStaticSolution {
    double value = 0.0;
    DiscreteScale w_opt{std::vector<double>{1.0}};
    double s0_on_c = 0.0;
    double cost_on_c = 0.0;
    double j_off_c = 0.0;
    bool attained = true;  // false when free edges with f~ = 0 were collapsed
};

/**
 * Constrained static optimum: W = sqrt(s0(C)/I(C)) sqrt(2 f~) on free edges.
 * Free edges with f~ = 0 get weight * W0_e and the value is the infimum.
 */
DiscreteStaticSolution static_opt_discrete(const DiscreteScale& w0, const DiscreteCost& f,
                                           const DiscreteConstraint& c, double collapse_weight = 1e-9);

// --- discounted ---

struct ChainProducts {
    std::vector<double> d;  // d_x = E_x[prod_{t<T_{x+1}} rho], x = 0..N-1
    std::vector<double> e;  // e_x = E_x[prod_{t<T_{x-1}} rho], x = 1..N (e[0] unused)
    double shuttle = 0.0;
};

ChainProducts exact_discounted_oracle(const BDChain& chain, const DiscountVector& rho);
// E_x[prod_{t<T_y} rho(X_t)] from the d/e factors.
double exact_hitting_product(const ChainProducts& prods, std::size_t x, std::size_t y);

/**
 * Pair weight used by the discrete series. edge: (1 - rho_u rho_{u+1}) W_v / W_u;
 * the two literal readings index the factor by state u (rho_{u-1} rho_u, with
 * rho_{-1} = 1) and use it either as 1/sigma or 1/sigma^2.
 */
enum class PairWeight { edge, state_sigma, state_sigma_squared };

/**
 * Series columns at every split point y = 0..N. Forward sums over edges below y:
 * g, dg (open pair) and g_tilde_star, dg_tilde_star; backward sums over edges
 * at or above y: g_star, dg_star and g_tilde, dg_tilde.
 */
struct DiscreteSeries {
    std::vector<double> g, dg;
    std::vector<double> g_tilde_star, dg_tilde_star;
    std::vector<double> g_star, dg_star;
    std::vector<double> g_tilde, dg_tilde;
};

DiscreteSeries series_G_discrete(const DiscreteScale& w, const DiscountVector& rho,
                                 PairWeight convention = PairWeight::edge);

// Hitting products: rho_x..rho_{y-1} G(x)/G(y) upward, rho_{y+1}..rho_x G~(x)/G~(y) downward.
double series_hitting_product(const DiscreteSeries& series, const DiscountVector& rho, std::size_t x,
                              std::size_t y);
// (rho_0..rho_{N-1})(rho_1..rho_N) / (G(N) G~(0))
double discounted_payoff_discrete(const DiscreteScale& w, const DiscountVector& rho,
                                  PairWeight convention = PairWeight::edge);

struct DiscreteDiscountedSolution {
    double value = 0.0;
    DiscreteScale w_opt{std::vector<double>{1.0}};
    double level = 1.0;  // c with W_e = c sqrt(1 - rho_e rho_{e+1}) on free edges
    double even_sum = 1.0;
    double odd_sum = 0.0;
};

// Optimum with edges 0..y-1 fixed to w0 (1 <= y <= N).
DiscreteDiscountedSolution discounted_opt_discrete(const DiscreteScale& w0, const DiscountVector& rho,
                                                   std::size_t y);

// --- conversions ---

struct WaitingConversion {
    BDChain chain;
    std::vector<double> values;  // f* or r*
};

// Removes holding: p* = p/(1-eps), f* = f/(1-eps).
WaitingConversion convert_waiting_cost(const BDChain& chain, const DiscreteCost& f);
// r* = (1-eps) r / (1 - eps r)
WaitingConversion convert_waiting_discount(const BDChain& chain, const DiscountVector& rho);

struct CtmcRates {
    std::vector<double> lambda;  // up rates, lambda_N = 0
    std::vector<double> mu;      // down rates, mu_0 = 0
    void validate() const;
    std::size_t N() const { return lambda.size() - 1; }
};

// Jump chain p = lambda/(lambda+mu); f* = f/(lambda+mu).
WaitingConversion convert_ctmc_cost(const CtmcRates& rates, const DiscreteCost& f);
// r* = (lambda+mu)/(alpha+lambda+mu)
WaitingConversion convert_ctmc_discount(const CtmcRates& rates, std::span<const double> alpha);

// --- brute force ---

enum class Objective { minimize_cost, maximize_payoff };

struct BruteForceSpec {
    std::size_t points = 200;  // per free edge
    double lo = 0.1;
    double hi = 10.0;          // W_e ranges over center_e * [lo, hi], log spaced
    std::vector<double> center;  // per free edge; empty means 1
    std::size_t max_evaluations = 20'000'000;
    unsigned threads = 1;
};

struct BruteForceResult {
    double value = 0.0;
    DiscreteScale w{std::vector<double>{1.0}};
    std::size_t evaluations = 0;
};

/**
 * Exhaustive search over the free edges of w0 (those not in c), evaluating
 * the exact oracle. Ties go to the lowest grid index.
 */
BruteForceResult brute_force_opt(const DiscreteScale& w0, const DiscreteConstraint& c,
                                 const DiscreteCost* f, const DiscountVector* rho,
                                 const BruteForceSpec& spec);

}  // namespace shuttle
