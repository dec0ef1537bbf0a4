#include "shuttle/discounted.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shuttle/errors.hpp"

namespace shuttle {

const char* flavor_name(SeriesFlavor flavor) {
    switch (flavor) {
    case SeriesFlavor::G: return "G";
    case SeriesFlavor::G_tilde: return "G~";
    case SeriesFlavor::H: return "H";
    case SeriesFlavor::G_star: return "G*";
    }
    return "?";
}

namespace {

double log_bound(double product, std::size_t n) {
    if (n == 0) {
        return 0.0;
    }
    return static_cast<double>(n) * std::log(product) - 2.0 * std::lgamma(static_cast<double>(n) + 1.0);
}

// sinh(k t) / k, continuous at k = 0
double sinhc(double k, double t) {
    const double kt = k * t;
    if (std::abs(kt) < 1e-8) {
        return t * (1.0 + kt * kt / 6.0);
    }
    return std::sinh(kt) / k;
}

}  // namespace

SeriesColumn series_column(const ScaleDensity& s, const CoefficientField& sigma2,
                           const CoefficientField& alpha, SeriesFlavor flavor,
                           const SeriesOptions& options) {
    const Grid& grid = s.grid();
    if (!(sigma2.grid() == grid) || !(alpha.grid() == grid)) {
        throw ConfigError("series: fields live on different grids");
    }
    const std::size_t n = grid.n_cells();
    const double h = grid.cell_width();

    SeriesColumn col(grid);
    col.flavor_ = flavor;
    col.forward_ = flavor == SeriesFlavor::G || flavor == SeriesFlavor::H;
    const bool value_is_scale = flavor == SeriesFlavor::G || flavor == SeriesFlavor::G_tilde;

    col.a_.resize(n);
    col.b_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ds = s[i];
        const double dmu = alpha[i] * 2.0 / (sigma2[i] * s[i]);
        col.a_[i] = value_is_scale ? ds : dmu;
        col.b_[i] = value_is_scale ? dmu : ds;
    }

    // Running measure totals from the start node, used by the order bound.
    col.a_total_.assign(n + 1, 0.0);
    col.b_total_.assign(n + 1, 0.0);
    if (col.forward_) {
        for (std::size_t i = 0; i < n; ++i) {
            col.a_total_[i + 1] = col.a_total_[i] + col.a_[i] * h;
            col.b_total_[i + 1] = col.b_total_[i] + col.b_[i] * h;
        }
    } else {
        for (std::size_t i = n; i-- > 0;) {
            col.a_total_[i] = col.a_total_[i + 1] + col.a_[i] * h;
            col.b_total_[i] = col.b_total_[i + 1] + col.b_[i] * h;
        }
    }
    const std::size_t far = col.forward_ ? n : 0;
    const double product = col.a_total_[far] * col.b_total_[far];
    if (!std::isfinite(product)) {
        throw NumericalError(std::string("series ") + flavor_name(flavor) +
                             ": measure totals are not finite");
    }

    std::size_t orders = 1;
    if (product > 0.0) {
        const double log_tol = std::log(options.tol);
        while (log_bound(product, orders) >= log_tol) {
            ++orders;
            if (orders > options.max_orders) {
                throw NumericalError(std::string("series ") + flavor_name(flavor) + ": more than " +
                                     std::to_string(options.max_orders) +
                                     " orders needed for tolerance " + std::to_string(options.tol) +
                                     " (s B = " + std::to_string(product) + ")");
            }
        }
        double tail = 0.0;
        for (std::size_t k = orders; k < orders + 200; ++k) {
            const double term = std::exp(log_bound(product, k));
            tail += term;
            if (term < 1e-300 || term < tail * 1e-17) {
                break;
            }
        }
        col.tail_bound_ = tail;
    }
    col.orders_ = orders;

    std::vector<double> v(orders, 0.0), d(orders, 0.0), nv(orders), nd(orders);
    v[0] = 1.0;
    col.value_.assign(n + 1, 0.0);
    col.deriv_.assign(n + 1, 0.0);
    if (options.keep_orders) {
        col.per_order_.assign(orders, std::vector<double>(n + 1, 0.0));
    }
    auto store = [&](std::size_t node) {
        double sv = 0.0;
        double sd = 0.0;
        // smallest orders last keeps the sum accurate when terms decay
        for (std::size_t k = orders; k-- > 0;) {
            sv += v[k];
            sd += d[k];
        }
        col.value_[node] = sv;
        col.deriv_[node] = sd;
        if (options.keep_orders) {
            for (std::size_t k = 0; k < orders; ++k) {
                col.per_order_[k][node] = v[k];
            }
        }
    };

    std::vector<double> even, odd;  // z^j/(2j)!, z^j/(2j+1)!
    auto step = [&](std::size_t cell) {
        const double a = col.a_[cell];
        const double b = col.b_[cell];
        const double z = a * b * h * h;
        even.assign(1, 1.0);
        odd.assign(1, 1.0);
        while (even.size() < orders) {
            const double j = static_cast<double>(even.size());
            const double e = even.back() * z / ((2.0 * j - 1.0) * (2.0 * j));
            const double o = odd.back() * z / ((2.0 * j) * (2.0 * j + 1.0));
            if (e < 1e-22 && o < 1e-22) {
                break;
            }
            even.push_back(e);
            odd.push_back(o);
        }
        const std::size_t jmax = even.size();
        for (std::size_t k = 0; k < orders; ++k) {
            double vv = 0.0;
            double vd = 0.0;
            double dv = 0.0;
            double dd = 0.0;
            const std::size_t top = std::min(k + 1, jmax);
            for (std::size_t j = 0; j < top; ++j) {
                vv += even[j] * v[k - j];
                vd += odd[j] * d[k - j];
                dd += even[j] * d[k - j];
                if (j + 1 <= k) {
                    dv += odd[j] * v[k - 1 - j];
                }
            }
            nv[k] = vv + a * h * vd;
            nd[k] = b * h * dv + dd;
        }
        v.swap(nv);
        d.swap(nd);
    };

    if (col.forward_) {
        store(0);
        for (std::size_t i = 0; i < n; ++i) {
            step(i);
            store(i + 1);
        }
    } else {
        store(n);
        for (std::size_t i = n; i-- > 0;) {
            step(i);
            store(i);
        }
    }
    const double end_value = col.value_[col.forward_ ? n : 0];
    if (!std::isfinite(end_value)) {
        throw NumericalError(std::string("series ") + flavor_name(flavor) + " overflowed");
    }
    return col;
}

void SeriesColumn::transfer(double x, double& v, double& d) const {
    if (x <= 0.0) {
        v = value_.front();
        d = deriv_.front();
        return;
    }
    // beyond the top the last cell's transfer is continued
    const std::size_t i = x >= grid_.length() ? grid_.n_cells() - 1 : grid_.cell_of(x);
    const std::size_t start = forward_ ? i : i + 1;
    const double t = forward_ ? x - grid_.node(i) : grid_.node(i + 1) - x;
    const double a = a_[i];
    const double b = b_[i];
    const double k = std::sqrt(a * b);
    const double c = std::cosh(k * t);
    const double sk = sinhc(k, t);
    const double v0 = value_[start];
    const double d0 = deriv_[start];
    v = v0 * c + d0 * a * sk;
    d = v0 * b * sk + d0 * c;
}

double SeriesColumn::value_at(double x) const {
    double v = 0.0;
    double d = 0.0;
    transfer(x, v, d);
    return v;
}

double SeriesColumn::derivative_at(double x) const {
    double v = 0.0;
    double d = 0.0;
    transfer(x, v, d);
    return d;
}

double SeriesColumn::order_value(std::size_t n, std::size_t node) const {
    if (per_order_.empty()) {
        throw ContractViolation("series column was built without keep_orders");
    }
    if (n >= orders_) {
        return 0.0;
    }
    return per_order_[n][node];
}

double SeriesColumn::order_bound(std::size_t n, std::size_t node) const {
    const double product = a_total_[node] * b_total_[node];
    if (n == 0) {
        return 1.0;
    }
    if (product == 0.0) {
        return 0.0;
    }
    return std::exp(log_bound(product, n));
}

SeriesTable SeriesTable::build(const ScaleDensity& s, const CoefficientField& sigma2,
                               const CoefficientField& alpha, const SeriesOptions& options) {
    return SeriesTable{series_column(s, sigma2, alpha, SeriesFlavor::G, options),
                       series_column(s, sigma2, alpha, SeriesFlavor::G_tilde, options),
                       series_column(s, sigma2, alpha, SeriesFlavor::H, options),
                       series_column(s, sigma2, alpha, SeriesFlavor::G_star, options)};
}

double psi_hitting(double x, double y, const SeriesTable& table) {
    const double len = table.g.grid().length();
    if (!(x >= 0.0 && x <= len && y >= 0.0 && y <= len)) {
        throw DomainError("psi_hitting: positions must lie in the interval");
    }
    if (x == y) {
        return 1.0;
    }
    if (x < y) {
        return table.g.value_at(x) / table.g.value_at(y);
    }
    return table.g_tilde.value_at(x) / table.g_tilde.value_at(y);
}

DiscountedPayoff discounted_shuttle_payoff(const ScaleDensity& s, const CoefficientField& sigma2,
                                           const CoefficientField& alpha,
                                           const SeriesOptions& options) {
    SeriesOptions opts = options;
    opts.keep_orders = false;
    const SeriesTable t = SeriesTable::build(s, sigma2, alpha, opts);
    const std::size_t n = s.grid().n_cells();
    const double g1 = t.g.value(n);
    const double gt0 = t.g_tilde.value(0);

    DiscountedPayoff out;
    out.psi_up = 1.0 / g1;
    out.psi_down = 1.0 / gt0;
    out.value = out.psi_up * out.psi_down;
    out.orders = std::max({t.g.orders(), t.g_tilde.orders(), t.h.orders(), t.g_star.orders()});
    out.tail_bound = std::max({t.g.tail_bound(), t.g_tilde.tail_bound(), t.h.tail_bound(),
                               t.g_star.tail_bound()});

    const std::size_t probes[3] = {std::max<std::size_t>(1, n / 4), n / 2, (3 * n) / 4};
    for (std::size_t y : probes) {
        const double up = t.g.value(y) * t.g_star.value(y) + t.g.derivative(y) * t.g_star.derivative(y);
        const double down =
            t.g_tilde.value(y) * t.h.value(y) + t.g_tilde.derivative(y) * t.h.derivative(y);
        const double split = 1.0 / (up * down);
        out.identity_gap = std::max(out.identity_gap, std::abs(split - out.value) / out.value);
    }
    if (!(out.identity_gap <= 1e-8)) {
        throw NumericalError("discounted payoff: product decomposition disagrees with the direct "
                             "product by " + std::to_string(out.identity_gap));
    }
    return out;
}

void DiscountedProblem::validate() const {
    const Grid& g = s0.grid();
    if (!(sigma2.grid() == g) || !(alpha.grid() == g)) {
        throw ConfigError("discounted problem: fields live on different grids");
    }
    if (sigma2.role() != FieldRole::variance || alpha.role() != FieldRole::rate) {
        throw ConfigError("discounted problem: sigma2 must be a variance field and alpha a rate field");
    }
    if (!(y >= 0.0 && y <= g.length())) {
        throw ConfigError("discounted problem: y must lie in [0, 1]");
    }
    if (g.node_index(y) == Grid::npos) {
        throw ConfigError("discounted problem: y = " + std::to_string(y) + " is not a grid node");
    }
}

double a_integral(const CoefficientField& sigma2, const CoefficientField& alpha, double y,
                  AConvention convention) {
    const Grid& grid = alpha.grid();
    const double k = convention == AConvention::sqrt2 ? 2.0 : 1.0;
    double total = 0.0;
    for (std::size_t i = 0; i < grid.n_cells(); ++i) {
        const double lo = std::max(grid.node(i), y);
        const double hi = grid.node(i + 1);
        if (hi > lo) {
            total += std::sqrt(k * alpha[i] / sigma2[i]) * (hi - lo);
        }
    }
    return total;
}

namespace {

double psi_hat(double g, double g_s, double h, double h_mu, double a) {
    const double root = std::sqrt(g * h) * std::cosh(a) + std::sqrt(g_s * h_mu) * std::sinh(a);
    return 1.0 / (root * root);
}

}  // namespace

double constrained_discounted_value(const SeriesTable& table, const CoefficientField& sigma2,
                                    const CoefficientField& alpha, double y,
                                    AConvention convention) {
    return psi_hat(table.g.value_at(y), table.g.derivative_at(y), table.h.value_at(y),
                   table.h.derivative_at(y), a_integral(sigma2, alpha, y, convention));
}

DiscountedSolution optimal_discounted(const DiscountedProblem& problem, const SeriesOptions& options,
                                      AConvention convention) {
    problem.validate();
    const Grid& grid = problem.grid();
    const std::size_t n = grid.n_cells();
    const std::size_t k = grid.node_index(problem.y);

    for (std::size_t i = k; i < n; ++i) {
        if (!(problem.alpha[i] > 0.0)) {
            throw DegenerateInstance("alpha vanishes on free cell " + std::to_string(i) +
                                     "; the optimal density sqrt(2 alpha/sigma^2) is zero there");
        }
    }

    SeriesOptions opts = options;
    opts.keep_orders = false;
    const SeriesColumn g = series_column(problem.s0, problem.sigma2, problem.alpha, SeriesFlavor::G, opts);
    const SeriesColumn h = series_column(problem.s0, problem.sigma2, problem.alpha, SeriesFlavor::H, opts);

    const double gv = g.value(k);
    const double gs = g.derivative(k);
    const double hv = h.value(k);
    const double hm = h.derivative(k);
    const double a_y = a_integral(problem.sigma2, problem.alpha, problem.y, convention);

    // With nothing discounted below y any constant will do; take 1.
    double c = 1.0;
    if (k > 0 && !(gs == 0.0 && hm == 0.0)) {
        if (gs == 0.0 || hm == 0.0) {
            throw DegenerateInstance("optimal discounted control: one of dG/ds, dH/dmu vanishes at y, "
                                     "the constant sqrt(G H'/(G' H)) is 0 or infinite");
        }
        c = std::sqrt(gv * hm / (gs * hv));
    }

    std::vector<double> sprime(n);
    for (std::size_t i = 0; i < n; ++i) {
        sprime[i] = i < k ? problem.s0[i] : c * std::sqrt(2.0 * problem.alpha[i] / problem.sigma2[i]);
    }
    const double value = psi_hat(gv, gs, hv, hm, a_y);
    if (!std::isfinite(value)) {
        throw NumericalError("optimal discounted value is not finite");
    }
    DiscountedSolution sol{value, ScaleDensity(grid, std::move(sprime)), gv, hv, gs, hm, a_y, c,
                           std::max(g.orders(), h.orders()), std::max(g.tail_bound(), h.tail_bound())};
    return sol;
}

}  // namespace shuttle
