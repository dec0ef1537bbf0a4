#pragma once

#include <cstddef>
#include <vector>

#include "shuttle/grid.hpp"

namespace shuttle {

/**
 * The four series solutions of the discounted problem. With dmu = alpha dm:
 *   G       forward from 0, value measure s, derivative measure mu
 *   G_tilde backward from 1, value measure s, derivative measure mu
 *   H       forward from 0, value measure mu, derivative measure s
 *   G_star  backward from 1, value measure mu, derivative measure s
 * Each starts at 1 with zero derivative.
 */
enum class SeriesFlavor { G, G_tilde, H, G_star };

const char* flavor_name(SeriesFlavor flavor);

struct SeriesOptions {
    double tol = 1e-10;           // stop once (value total * derivative total)^n / (n!)^2 < tol
    std::size_t max_orders = 1000;
    bool keep_orders = true;      // keep per-order node columns (I_n)
};

/**
 * One flavor evaluated on the grid nodes: the partial sum of the series and
 * its derivative with respect to the flavor's value measure, taken in the
 * direction of the recursion (so both are >= 0).
 */
class SeriesColumn {
public:
    SeriesFlavor flavor() const { return flavor_; }
    const Grid& grid() const { return grid_; }

    double value(std::size_t node) const { return value_[node]; }
    double derivative(std::size_t node) const { return deriv_[node]; }
    std::span<const double> values() const { return value_; }

    // Off-node evaluation by the exact in-cell transfer.
    double value_at(double x) const;
    double derivative_at(double x) const;

    std::size_t orders() const { return orders_; }
    // I_n at a node; only when keep_orders was set.
    double order_value(std::size_t n, std::size_t node) const;
    // Order bound (S B)^n / (n!)^2 using the running totals at the node.
    double order_bound(std::size_t n, std::size_t node) const;
    // Sum of the omitted order bounds at the far end.
    double tail_bound() const { return tail_bound_; }

private:
    friend SeriesColumn series_column(const ScaleDensity&, const CoefficientField&,
                                      const CoefficientField&, SeriesFlavor, const SeriesOptions&);
    SeriesColumn(const Grid& grid) : grid_(grid) {}

    void transfer(double x, double& v, double& d) const;

    SeriesFlavor flavor_ = SeriesFlavor::G;
    Grid grid_;
    bool forward_ = true;
    std::vector<double> a_;  // value-measure density per cell
    std::vector<double> b_;  // derivative-measure density per cell
    std::vector<double> value_;
    std::vector<double> deriv_;
    std::vector<double> a_total_;  // value measure from the start node to each node
    std::vector<double> b_total_;
    std::vector<std::vector<double>> per_order_;
    std::size_t orders_ = 0;
    double tail_bound_ = 0.0;
};

SeriesColumn series_column(const ScaleDensity& s, const CoefficientField& sigma2,
                           const CoefficientField& alpha, SeriesFlavor flavor,
                           const SeriesOptions& options = {});

struct SeriesTable {
    SeriesColumn g;
    SeriesColumn g_tilde;
    SeriesColumn h;
    SeriesColumn g_star;

    static SeriesTable build(const ScaleDensity& s, const CoefficientField& sigma2,
                             const CoefficientField& alpha, const SeriesOptions& options = {});
};

// psi_y(x) = G(x)/G(y) for x <= y and G~(x)/G~(y) for x >= y.
double psi_hitting(double x, double y, const SeriesTable& table);

struct DiscountedPayoff {
    double value = 1.0;        // psi_1(0) * psi_0(1)
    double psi_up = 1.0;       // 1 / G(1)
    double psi_down = 1.0;     // 1 / G~(0)
    double identity_gap = 0.0; // largest relative gap of the product identity at interior nodes
    std::size_t orders = 0;
    double tail_bound = 0.0;
};

/**
 * E_0[exp(-int_0^S alpha(X_t) dt)] for the control s. Cross-checks the
 * product decomposition through G* and H at three interior nodes and throws
 * NumericalError if it disagrees with the direct product beyond 1e-8.
 */
DiscountedPayoff discounted_shuttle_payoff(const ScaleDensity& s, const CoefficientField& sigma2,
                                           const CoefficientField& alpha,
                                           const SeriesOptions& options = {});

// Convention for A(y) = int_y^1 sqrt(k alpha / sigma^2): k = 2 (default) or k = 1.
enum class AConvention { sqrt2, no_sqrt2 };

struct DiscountedProblem {
    CoefficientField sigma2;
    CoefficientField alpha;
    ScaleDensity s0;
    double y = 0.0;  // constraint region [0, y], a grid node

    const Grid& grid() const { return s0.grid(); }
    void validate() const;
};

struct DiscountedSolution {
    double value = 0.0;  // psi-hat(y)
    ScaleDensity s_opt;
    double g = 1.0;      // G(y)
    double h = 1.0;      // H(y)
    double g_s = 0.0;    // dG/ds at y
    double h_mu = 0.0;   // dH/dmu at y
    double a_y = 0.0;    // A(y)
    double level = 1.0;  // constant c with s_opt' = c sqrt(2 alpha / sigma^2) on [y, 1]
    std::size_t orders = 0;
    double tail_bound = 0.0;
};

// psi-hat at any level y from the columns of one table; the constraint is [0, y].
double constrained_discounted_value(const SeriesTable& table, const CoefficientField& sigma2,
                                    const CoefficientField& alpha, double y,
                                    AConvention convention = AConvention::sqrt2);

// int_y^1 sqrt(k alpha / sigma^2), exact for cell-constant data.
double a_integral(const CoefficientField& sigma2, const CoefficientField& alpha, double y,
                  AConvention convention = AConvention::sqrt2);

/**
 * Optimal payoff and control with s fixed to s0 on [0, y).
 * Throws DegenerateInstance when alpha vanishes on a free cell or the
 * constant c is 0 or infinite.
 */
DiscountedSolution optimal_discounted(const DiscountedProblem& problem,
                                      const SeriesOptions& options = {},
                                      AConvention convention = AConvention::sqrt2);

}  // namespace shuttle
