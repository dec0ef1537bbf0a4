#include "shuttle/chain.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "shuttle/errors.hpp"

namespace shuttle {

DiscreteScale::DiscreteScale(std::vector<double> w) : w_(std::move(w)) {
    if (w_.empty()) {
        throw ConfigError("discrete scale needs at least one weight (N >= 1)");
    }
    for (std::size_t e = 0; e < w_.size(); ++e) {
        if (!(w_[e] > 0.0) || !std::isfinite(w_[e])) {
            throw ConfigError("scale weight W_" + std::to_string(e) + " must be positive and finite");
        }
    }
    if (w_[0] != 1.0) {
        throw ConfigError("W_0 is not controllable and must equal 1");
    }
}

DiscreteScale DiscreteScale::uniform(std::size_t N) { return DiscreteScale(std::vector<double>(N, 1.0)); }

double DiscreteScale::s(std::size_t n) const {
    double total = 0.0;
    for (std::size_t k = 0; k < n && k < w_.size(); ++k) {
        total += w_[k];
    }
    return total;
}

BDChain::BDChain(std::vector<double> p, std::vector<double> q, std::vector<double> eps)
    : p_(std::move(p)), q_(std::move(q)), eps_(std::move(eps)) {
    const std::size_t n = p_.size();
    if (n < 2) {
        throw ConfigError("chain needs N >= 1 (at least two states)");
    }
    if (q_.size() != n || eps_.size() != n) {
        throw ConfigError("chain: p, q and eps must all have N+1 entries");
    }
    const std::size_t N = n - 1;
    if (p_[N] != 0.0 || q_[0] != 0.0) {
        throw ConfigError("chain: p_N and q_0 must be 0");
    }
    for (std::size_t k = 0; k <= N; ++k) {
        const std::string at = " at state " + std::to_string(k);
        if (p_[k] < 0.0 || q_[k] < 0.0 || eps_[k] < 0.0) {
            throw ConfigError("chain: negative probability" + at);
        }
        if (k < N && !(p_[k] > 0.0)) {
            throw ConfigError("chain: p must be > 0 below N (irreducibility)" + at);
        }
        if (k > 0 && !(q_[k] > 0.0)) {
            throw ConfigError("chain: q must be > 0 above 0 (irreducibility)" + at);
        }
        if (std::abs(p_[k] + q_[k] + eps_[k] - 1.0) > 1e-12) {
            throw ConfigError("chain: p + q + eps != 1" + at);
        }
        if (!(eps_[k] < 1.0)) {
            throw ConfigError("chain: eps = 1 makes the state absorbing" + at);
        }
    }
}

BDChain BDChain::from_scale(const DiscreteScale& w) {
    const std::size_t N = w.N();
    std::vector<double> p(N + 1, 0.0), q(N + 1, 0.0), eps(N + 1, 0.0);
    p[0] = 1.0;
    for (std::size_t n = 1; n < N; ++n) {
        const double r = w.ratio(n);
        p[n] = 1.0 / (1.0 + r);
        q[n] = r / (1.0 + r);
    }
    q[N] = 1.0;
    return BDChain(std::move(p), std::move(q), std::move(eps));
}

bool BDChain::has_waiting() const {
    return std::any_of(eps_.begin(), eps_.end(), [](double e) { return e != 0.0; });
}

DiscreteScale BDChain::scale() const {
    const std::size_t N = this->N();
    std::vector<double> w(N, 1.0);
    for (std::size_t n = 1; n < N; ++n) {
        w[n] = w[n - 1] * q_[n] / p_[n];
    }
    return DiscreteScale(std::move(w));
}

DiscreteCost::DiscreteCost(std::vector<double> f) : f_(std::move(f)) {
    if (f_.size() < 2) {
        throw ConfigError("cost vector needs N+1 >= 2 entries");
    }
    for (std::size_t n = 0; n < f_.size(); ++n) {
        if (!(f_[n] >= 0.0) || !std::isfinite(f_[n])) {
            throw ConfigError("f(" + std::to_string(n) + ") must be finite and >= 0");
        }
    }
}

DiscreteCost DiscreteCost::constant(std::size_t N, double value) {
    return DiscreteCost(std::vector<double>(N + 1, value));
}

DiscountVector::DiscountVector(std::vector<double> rho) : rho_(std::move(rho)) {
    if (rho_.size() < 2) {
        throw ConfigError("discount vector needs N+1 >= 2 entries");
    }
    for (std::size_t n = 0; n < rho_.size(); ++n) {
        if (!(rho_[n] > 0.0 && rho_[n] <= 1.0)) {
            throw ConfigError("rho(" + std::to_string(n) + ") must lie in (0, 1]");
        }
    }
}

DiscountVector DiscountVector::constant(std::size_t N, double value) {
    return DiscountVector(std::vector<double>(N + 1, value));
}

double DiscountVector::product(std::size_t from, std::size_t to) const {
    double out = 1.0;
    for (std::size_t k = from; k < to; ++k) {
        out *= rho_[k];
    }
    return out;
}

DiscreteConstraint::DiscreteConstraint(std::size_t N, std::vector<std::size_t> edges)
    : member_(N, false) {
    for (std::size_t e : edges) {
        if (e >= N) {
            throw ConfigError("constraint edge " + std::to_string(e) + " out of range 0.." +
                              std::to_string(N - 1));
        }
        member_[e] = true;
    }
    if (N == 0 || !member_[0]) {
        throw ConfigError("constraint must contain edge 0 (W_0 is not controllable)");
    }
}

DiscreteConstraint DiscreteConstraint::prefix(std::size_t N, std::size_t y) {
    if (y < 1 || y > N) {
        throw ConfigError("prefix constraint needs 1 <= y <= N");
    }
    std::vector<std::size_t> edges(y);
    for (std::size_t e = 0; e < y; ++e) {
        edges[e] = e;
    }
    return DiscreteConstraint(N, std::move(edges));
}

std::vector<std::size_t> DiscreteConstraint::edges() const {
    std::vector<std::size_t> out;
    for (std::size_t e = 0; e < member_.size(); ++e) {
        if (member_[e]) {
            out.push_back(e);
        }
    }
    return out;
}

namespace {

// Thomas algorithm; a = sub-diagonal (a[0] unused), c = super-diagonal (c[n-1] unused).
std::vector<double> solve_tridiagonal(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                                      std::vector<double> d) {
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (b[i - 1] == 0.0) {
            throw NumericalError("tridiagonal solve: zero pivot");
        }
        const double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        d[i] -= m * d[i - 1];
    }
    std::vector<double> x(n);
    if (b[n - 1] == 0.0) {
        throw NumericalError("tridiagonal solve: zero pivot");
    }
    x[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
    }
    return x;
}

void check_sizes(const BDChain& chain, std::size_t other, const char* what) {
    if (other != chain.N()) {
        throw ConfigError(std::string(what) + " has N = " + std::to_string(other) + ", chain has N = " +
                          std::to_string(chain.N()));
    }
}

// phi(k) on states lo..hi with phi = 0 at the target just outside the range.
std::vector<double> hitting_costs(const BDChain& chain, const DiscreteCost& f, std::size_t lo,
                                  std::size_t hi) {
    const std::size_t m = hi - lo + 1;
    std::vector<double> a(m, 0.0), b(m), c(m, 0.0), d(m);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t k = lo + i;
        b[i] = 1.0 - chain.eps(k);
        if (i > 0) {
            a[i] = -chain.q(k);
        }
        if (i + 1 < m) {
            c[i] = -chain.p(k);
        }
        d[i] = f[k];
    }
    return solve_tridiagonal(std::move(a), std::move(b), std::move(c), std::move(d));
}

}  // namespace

ChainCosts exact_additive_oracle(const BDChain& chain, const DiscreteCost& f) {
    check_sizes(chain, f.N(), "cost vector");
    const std::size_t N = chain.N();
    ChainCosts out;
    out.up = hitting_costs(chain, f, 0, N - 1);
    out.up.push_back(0.0);
    const std::vector<double> down = hitting_costs(chain, f, 1, N);
    out.down.assign(1, 0.0);
    out.down.insert(out.down.end(), down.begin(), down.end());
    out.shuttle = out.up[0] + out.down[N];
    return out;
}

double exact_hitting_cost(const BDChain& chain, const DiscreteCost& f, std::size_t x, std::size_t y) {
    check_sizes(chain, f.N(), "cost vector");
    if (x > chain.N() || y > chain.N()) {
        throw DomainError("state out of range");
    }
    if (x == y) {
        return 0.0;
    }
    if (x < y) {
        return hitting_costs(chain, f, 0, y - 1)[x];
    }
    return hitting_costs(chain, f, y + 1, chain.N())[x - y - 1];
}

double phi_discrete(std::size_t x, std::size_t y, const DiscreteScale& w, const DiscreteCost& f) {
    const std::size_t N = w.N();
    if (f.N() != N) {
        throw ConfigError("cost vector and scale disagree on N");
    }
    if (x > N || y > N) {
        throw DomainError("state out of range");
    }
    double total = 0.0;
    if (x <= y) {
        for (std::size_t k = x; k < y; ++k) {
            total += f[k];
        }
        // prefix sums of 2 f~(u) / W_u
        double inner = 0.0;
        for (std::size_t v = 0; v < y; ++v) {
            if (v >= x) {
                total += inner * w[v];
            }
            inner += 2.0 * f.edge(v) / w[v];
        }
    } else {
        for (std::size_t k = y + 1; k <= x; ++k) {
            total += f[k];
        }
        double inner = 0.0;  // sum_{u > v} 2 f~(u) / W_u
        for (std::size_t v = N; v-- > y;) {
            if (v < x) {
                total += inner * w[v];
            }
            inner += 2.0 * f.edge(v) / w[v];
        }
    }
    return total;
}

double shuttle_cost_discrete(const DiscreteScale& w, const DiscreteCost& f) {
    if (f.N() != w.N()) {
        throw ConfigError("cost vector and scale disagree on N");
    }
    double i_total = 0.0;
    for (std::size_t e = 0; e < w.N(); ++e) {
        i_total += 2.0 * f.edge(e) / w[e];
    }
    return w.total() * i_total;
}

DiscreteStaticSolution static_opt_discrete(const DiscreteScale& w0, const DiscreteCost& f,
                                           const DiscreteConstraint& c, double collapse_weight) {
    const std::size_t N = w0.N();
    if (f.N() != N || c.N() != N) {
        throw ConfigError("static_opt_discrete: scale, cost and constraint disagree on N");
    }
    double s_c = 0.0;
    double i_c = 0.0;
    double j_free = 0.0;
    bool positive_free = false;
    bool collapsed = false;
    for (std::size_t e = 0; e < N; ++e) {
        if (c.contains(e)) {
            s_c += w0[e];
            i_c += 2.0 * f.edge(e) / w0[e];
        } else {
            j_free += std::sqrt(2.0 * f.edge(e));
            if (f.edge(e) > 0.0) {
                positive_free = true;
            } else {
                collapsed = true;
            }
        }
    }
    double factor = 1.0;
    if (positive_free) {
        if (i_c == 0.0) {
            throw DegenerateInstance("I(C) = 0: f vanishes on every constrained edge, the ratio "
                                     "s0(C)/I(C) is undefined");
        }
        factor = std::sqrt(s_c / i_c);
    }
    std::vector<double> w(N);
    for (std::size_t e = 0; e < N; ++e) {
        if (c.contains(e)) {
            w[e] = w0[e];
        } else if (f.edge(e) > 0.0) {
            w[e] = factor * std::sqrt(2.0 * f.edge(e));
        } else {
            w[e] = collapse_weight * w0[e];
        }
    }
    const double root = std::sqrt(s_c * i_c) + j_free;
    DiscreteStaticSolution sol;
    sol.value = root * root;
    sol.w_opt = DiscreteScale(std::move(w));
    sol.s0_on_c = s_c;
    sol.cost_on_c = i_c;
    sol.j_off_c = j_free;
    sol.attained = !collapsed;
    return sol;
}

ChainProducts exact_discounted_oracle(const BDChain& chain, const DiscountVector& rho) {
    check_sizes(chain, rho.N(), "discount vector");
    const std::size_t N = chain.N();
    ChainProducts out;
    out.d.assign(N, 0.0);
    out.e.assign(N + 1, 0.0);
    for (std::size_t x = 0; x < N; ++x) {
        const double back = x > 0 ? chain.q(x) * out.d[x - 1] : 0.0;
        const double denom = 1.0 - rho[x] * chain.eps(x) - rho[x] * back;
        if (!(denom > 0.0)) {
            throw NumericalError("discounted oracle: non-positive denominator at state " + std::to_string(x));
        }
        out.d[x] = rho[x] * chain.p(x) / denom;
    }
    for (std::size_t x = N; x >= 1; --x) {
        const double fwd = x < N ? chain.p(x) * out.e[x + 1] : 0.0;
        const double denom = 1.0 - rho[x] * chain.eps(x) - rho[x] * fwd;
        if (!(denom > 0.0)) {
            throw NumericalError("discounted oracle: non-positive denominator at state " + std::to_string(x));
        }
        out.e[x] = rho[x] * chain.q(x) / denom;
    }
    out.shuttle = exact_hitting_product(out, 0, N) * exact_hitting_product(out, N, 0);
    return out;
}

double exact_hitting_product(const ChainProducts& prods, std::size_t x, std::size_t y) {
    double out = 1.0;
    if (x < y) {
        for (std::size_t k = x; k < y; ++k) {
            out *= prods.d[k];
        }
    } else {
        for (std::size_t k = y + 1; k <= x; ++k) {
            out *= prods.e[k];
        }
    }
    return out;
}

namespace {

double pair_factor(const DiscountVector& rho, std::size_t e, PairWeight convention) {
    switch (convention) {
    case PairWeight::edge:
        return rho.kappa(e);
    case PairWeight::state_sigma: {
        const double prev = e == 0 ? 1.0 : rho[e - 1];
        return 1.0 - prev * rho[e];
    }
    case PairWeight::state_sigma_squared: {
        const double prev = e == 0 ? 1.0 : rho[e - 1];
        const double k = 1.0 - prev * rho[e];
        return k * k;
    }
    }
    return 0.0;
}

}  // namespace

DiscreteSeries series_G_discrete(const DiscreteScale& w, const DiscountVector& rho, PairWeight convention) {
    const std::size_t N = w.N();
    if (rho.N() != N) {
        throw ConfigError("discount vector and scale disagree on N");
    }
    std::vector<double> mu(N);
    for (std::size_t e = 0; e < N; ++e) {
        mu[e] = pair_factor(rho, e, convention) / w[e];
    }
    DiscreteSeries s;
    s.g.assign(N + 1, 0.0);
    s.dg.assign(N + 1, 0.0);
    s.g_tilde_star.assign(N + 1, 0.0);
    s.dg_tilde_star.assign(N + 1, 0.0);
    s.g_star.assign(N + 1, 0.0);
    s.dg_star.assign(N + 1, 0.0);
    s.g_tilde.assign(N + 1, 0.0);
    s.dg_tilde.assign(N + 1, 0.0);

    s.g[0] = 1.0;
    s.g_tilde_star[0] = 1.0;
    for (std::size_t e = 0; e < N; ++e) {
        // pairs open with mu, close with W
        s.g[e + 1] = s.g[e] + s.dg[e] * w[e];
        s.dg[e + 1] = s.dg[e] + s.g[e] * mu[e];
        // pairs open with W, close with mu
        s.g_tilde_star[e + 1] = s.g_tilde_star[e] + s.dg_tilde_star[e] * mu[e];
        s.dg_tilde_star[e + 1] = s.dg_tilde_star[e] + s.g_tilde_star[e] * w[e];
    }
    s.g_star[N] = 1.0;
    s.g_tilde[N] = 1.0;
    for (std::size_t e = N; e-- > 0;) {
        s.g_star[e] = s.g_star[e + 1] + s.dg_star[e + 1] * mu[e];
        s.dg_star[e] = s.dg_star[e + 1] + s.g_star[e + 1] * w[e];
        s.g_tilde[e] = s.g_tilde[e + 1] + s.dg_tilde[e + 1] * w[e];
        s.dg_tilde[e] = s.dg_tilde[e + 1] + s.g_tilde[e + 1] * mu[e];
    }
    return s;
}

double series_hitting_product(const DiscreteSeries& series, const DiscountVector& rho, std::size_t x,
                              std::size_t y) {
    if (x <= y) {
        return rho.product(x, y) * series.g[x] / series.g[y];
    }
    return rho.product(y + 1, x + 1) * series.g_tilde[x] / series.g_tilde[y];
}

double discounted_payoff_discrete(const DiscreteScale& w, const DiscountVector& rho, PairWeight convention) {
    const DiscreteSeries s = series_G_discrete(w, rho, convention);
    const std::size_t N = w.N();
    return rho.product(0, N) * rho.product(1, N + 1) / (s.g[N] * s.g_tilde[0]);
}

DiscreteDiscountedSolution discounted_opt_discrete(const DiscreteScale& w0, const DiscountVector& rho,
                                                   std::size_t y) {
    const std::size_t N = w0.N();
    if (rho.N() != N) {
        throw ConfigError("discount vector and scale disagree on N");
    }
    if (y < 1 || y > N) {
        throw ConfigError("discrete discounted constraint needs 1 <= y <= N");
    }
    const DiscreteSeries s = series_G_discrete(w0, rho);
    const double g = s.g[y];
    const double dg = s.dg[y];
    const double gts = s.g_tilde_star[y];
    const double dgts = s.dg_tilde_star[y];
    const double prefactor = rho.product(0, N) * rho.product(1, N + 1);

    std::size_t zero_free = 0;
    for (std::size_t e = y; e < N; ++e) {
        if (rho.kappa(e) == 0.0) {
            ++zero_free;
        }
    }
    DiscreteDiscountedSolution sol;
    if (zero_free > 0) {
        if (zero_free == N - y && dg == 0.0) {
            // nothing discounted on any pair: the payoff does not depend on the free weights
            sol.w_opt = w0;
            sol.value = discounted_payoff_discrete(w0, rho);
            return sol;
        }
        throw DegenerateInstance("rho_e rho_{e+1} = 1 on a free edge; the optimal weight there is 0 "
                                 "and the optimum is not attained");
    }
    if (y < N && dg == 0.0) {
        throw DegenerateInstance("Delta G(y) = 0: no discounted pair below y, the optimal level is infinite");
    }

    double even = 1.0;
    double odd = 0.0;
    for (std::size_t e = y; e < N; ++e) {
        const double z = std::sqrt(rho.kappa(e));
        const double ne = even + odd * z;
        const double no = odd + even * z;
        even = ne;
        odd = no;
    }
    const double c = y < N ? std::sqrt(g * dgts / (dg * gts)) : 1.0;
    std::vector<double> w(w0.weights().begin(), w0.weights().end());
    for (std::size_t e = y; e < N; ++e) {
        w[e] = c * std::sqrt(rho.kappa(e));
    }
    const double root = std::sqrt(g * gts) * even + std::sqrt(dg * dgts) * odd;
    sol.value = prefactor / (root * root);
    sol.w_opt = DiscreteScale(std::move(w));
    sol.level = c;
    sol.even_sum = even;
    sol.odd_sum = odd;
    return sol;
}

WaitingConversion convert_waiting_cost(const BDChain& chain, const DiscreteCost& f) {
    check_sizes(chain, f.N(), "cost vector");
    const std::size_t N = chain.N();
    std::vector<double> p(N + 1), q(N + 1), eps(N + 1, 0.0), fs(N + 1);
    for (std::size_t n = 0; n <= N; ++n) {
        const double stay = chain.eps(n);
        p[n] = chain.p(n) / (1.0 - stay);
        q[n] = chain.q(n) / (1.0 - stay);
        fs[n] = f[n] / (1.0 - stay);
    }
    return {BDChain(std::move(p), std::move(q), std::move(eps)), std::move(fs)};
}

WaitingConversion convert_waiting_discount(const BDChain& chain, const DiscountVector& rho) {
    check_sizes(chain, rho.N(), "discount vector");
    const std::size_t N = chain.N();
    std::vector<double> p(N + 1), q(N + 1), eps(N + 1, 0.0), r(N + 1);
    for (std::size_t n = 0; n <= N; ++n) {
        const double stay = chain.eps(n);
        p[n] = chain.p(n) / (1.0 - stay);
        q[n] = chain.q(n) / (1.0 - stay);
        r[n] = (1.0 - stay) * rho[n] / (1.0 - stay * rho[n]);
    }
    return {BDChain(std::move(p), std::move(q), std::move(eps)), std::move(r)};
}

void CtmcRates::validate() const {
    if (lambda.size() < 2 || mu.size() != lambda.size()) {
        throw ConfigError("ctmc: lambda and mu need N+1 >= 2 entries each");
    }
    const std::size_t N = lambda.size() - 1;
    if (lambda[N] != 0.0 || mu[0] != 0.0) {
        throw ConfigError("ctmc: lambda_N and mu_0 must be 0");
    }
    for (std::size_t n = 0; n <= N; ++n) {
        if (!std::isfinite(lambda[n]) || !std::isfinite(mu[n]) || lambda[n] < 0.0 || mu[n] < 0.0) {
            throw ConfigError("ctmc: rates must be finite and >= 0 at state " + std::to_string(n));
        }
        if ((n < N && !(lambda[n] > 0.0)) || (n > 0 && !(mu[n] > 0.0))) {
            throw ConfigError("ctmc: zero rate breaks irreducibility at state " + std::to_string(n));
        }
    }
}

namespace {

BDChain jump_chain(const CtmcRates& rates) {
    rates.validate();
    const std::size_t N = rates.N();
    std::vector<double> p(N + 1), q(N + 1), eps(N + 1, 0.0);
    for (std::size_t n = 0; n <= N; ++n) {
        const double total = rates.lambda[n] + rates.mu[n];
        p[n] = rates.lambda[n] / total;
        q[n] = rates.mu[n] / total;
    }
    return BDChain(std::move(p), std::move(q), std::move(eps));
}

}  // namespace

WaitingConversion convert_ctmc_cost(const CtmcRates& rates, const DiscreteCost& f) {
    BDChain chain = jump_chain(rates);
    check_sizes(chain, f.N(), "cost vector");
    std::vector<double> fs(f.N() + 1);
    for (std::size_t n = 0; n <= f.N(); ++n) {
        fs[n] = f[n] / (rates.lambda[n] + rates.mu[n]);
    }
    return {std::move(chain), std::move(fs)};
}

WaitingConversion convert_ctmc_discount(const CtmcRates& rates, std::span<const double> alpha) {
    BDChain chain = jump_chain(rates);
    check_sizes(chain, alpha.size() - 1, "alpha vector");
    std::vector<double> r(alpha.size());
    for (std::size_t n = 0; n < alpha.size(); ++n) {
        if (!(alpha[n] >= 0.0)) {
            throw ConfigError("ctmc: alpha must be >= 0");
        }
        const double total = rates.lambda[n] + rates.mu[n];
        r[n] = total / (alpha[n] + total);
    }
    return {std::move(chain), std::move(r)};
}

BruteForceResult brute_force_opt(const DiscreteScale& w0, const DiscreteConstraint& c,
                                 const DiscreteCost* f, const DiscountVector* rho,
                                 const BruteForceSpec& spec) {
    const std::size_t N = w0.N();
    if ((f == nullptr) == (rho == nullptr)) {
        throw ConfigError("brute force needs exactly one of a cost or a discount vector");
    }
    if (c.N() != N) {
        throw ConfigError("brute force: constraint and scale disagree on N");
    }
    if (spec.points == 0 || !(spec.lo > 0.0) || !(spec.hi >= spec.lo)) {
        throw ConfigError("brute force: need points >= 1 and 0 < lo <= hi");
    }
    std::vector<std::size_t> free;
    for (std::size_t e = 0; e < N; ++e) {
        if (!c.contains(e)) {
            free.push_back(e);
        }
    }
    if (!spec.center.empty() && spec.center.size() != free.size()) {
        throw ConfigError("brute force: center needs one entry per free edge");
    }
    double total = 1.0;
    for (std::size_t k = 0; k < free.size(); ++k) {
        total *= static_cast<double>(spec.points);
    }
    if (total > static_cast<double>(spec.max_evaluations)) {
        throw ConfigError("brute force: " + std::to_string(total) + " grid points exceed the cap of " +
                          std::to_string(spec.max_evaluations) + "; raise max_evaluations or coarsen");
    }
    const auto count = static_cast<std::size_t>(total);

    std::vector<double> axis(spec.points);
    for (std::size_t i = 0; i < spec.points; ++i) {
        if (spec.points == 1) {
            axis[i] = 1.0;
        } else {
            const double t = static_cast<double>(i) / static_cast<double>(spec.points - 1);
            axis[i] = std::exp(std::log(spec.lo) + t * (std::log(spec.hi) - std::log(spec.lo)));
        }
    }
    const bool minimize = f != nullptr;

    auto weights_at = [&](std::size_t index) {
        std::vector<double> w(w0.weights().begin(), w0.weights().end());
        for (std::size_t k = free.size(); k-- > 0;) {
            const std::size_t i = index % spec.points;
            index /= spec.points;
            const double centre = spec.center.empty() ? 1.0 : spec.center[k];
            w[free[k]] = centre * axis[i];
        }
        return w;
    };
    auto evaluate = [&](std::size_t index) {
        const DiscreteScale w(weights_at(index));
        const BDChain chain = BDChain::from_scale(w);
        return minimize ? exact_additive_oracle(chain, *f).shuttle
                        : exact_discounted_oracle(chain, *rho).shuttle;
    };
    auto better = [&](double a, double b) { return minimize ? a < b : a > b; };

    struct Best {
        double value;
        std::size_t index;
        bool set;
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(count)));
    std::vector<Best> best(threads, Best{0.0, 0, false});
    auto work = [&](unsigned t) {
        const std::size_t lo = count * t / threads;
        const std::size_t hi = count * (t + 1) / threads;
        Best b{0.0, 0, false};
        for (std::size_t i = lo; i < hi; ++i) {
            const double v = evaluate(i);
            if (!b.set || better(v, b.value)) {
                b = {v, i, true};
            }
        }
        best[t] = b;
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(work, t);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    Best winner{0.0, 0, false};
    for (const Best& b : best) {
        if (b.set && (!winner.set || better(b.value, winner.value))) {
            winner = b;
        }
    }
    BruteForceResult out;
    out.value = winner.value;
    out.w = DiscreteScale(weights_at(winner.index));
    out.evaluations = count;
    return out;
}

}  // namespace shuttle
