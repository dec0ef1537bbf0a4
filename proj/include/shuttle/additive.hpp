#pragma once

#include <cstddef>
#include <vector>

#include "shuttle/grid.hpp"

namespace shuttle {

/**
 * Problem data for minimising E_0[ int_0^S f(X_t) dt ] over scale densities
 * that agree with a reference s0 on the constraint set C.
 */
struct AdditiveProblem {
    CoefficientField sigma2;
    CoefficientField f;
    ScaleDensity s0;
    ConstraintSet constraint;

    const Grid& grid() const { return s0.grid(); }
    // Throws ConfigError when the fields live on different grids.
    void validate() const;
};

struct StaticSolution {
    double value = 0.0;
    ScaleDensity s_opt;
    double s0_on_c = 0.0;    // s0(C)
    double cost_on_c = 0.0;  // I^{s0}(C) = int_C f dm0
    double j_off_c = 0.0;    // J(C^c) = int_{C^c} sqrt(2 f / sigma^2)
};

/// Result of inf_{x>0} [a x + b / x].
struct AmGm {
    double value;
    double argmin;  // NaN when a == 0 or b == 0 (infimum not attained)
};

// inf_{x>0} [a x + b/x] = 2 sqrt(ab), attained at sqrt(b/a) when a, b > 0.
AmGm am_gm_min(double a, double b);

/**
 * Cumulative integrals for one control s: the scale s(x), the upward cost
 * F(x) = int_0^x f dm and its mirror, and the nested integrals giving the
 * upward/downward hitting costs. All piecewise quantities are integrated
 * exactly for cell-constant data, so any position (not only nodes) can be
 * queried in O(1).
 */
class AdditiveProfile {
public:
    AdditiveProfile(const ScaleDensity& s, const CoefficientField& f, const CoefficientField& sigma2);

    const Grid& grid() const { return grid_; }

    double scale_at(double x) const;          // s(x)
    double cost_below(double x) const;        // int_0^x f dm
    double cost_above(double x) const;        // int_x^1 f dm
    double up_cost_from_zero(double x) const; // phi_x(0) = int_0^x s'(v) int_0^v f dm dv
    double down_cost_to_zero(double x) const; // phi_0(x) = int_0^x s'(v) int_v^1 f dm dv
    double j_below(double x) const;           // int_0^x sqrt(2 f / sigma^2)

    double scale_total() const { return s_.back(); }
    double cost_total() const { return f_up_.back(); }
    double j_total() const { return j_.back(); }

    // Constrained optimal value with C = [0, level): (sqrt(s(level) I(level)) + J([level,1]))^2.
    double prefix_constrained_value(double level) const;

private:
    struct Loc {
        std::size_t cell;
        double offset;
    };
    Loc locate(double x) const;

    Grid grid_;
    std::vector<double> sprime_;
    std::vector<double> fm_;  // f m' per cell
    std::vector<double> s_;
    std::vector<double> f_up_;
    std::vector<double> f_down_;  // int_{node i}^1 f dm
    std::vector<double> phi_up_;
    std::vector<double> phi_down_;  // int_0^{node i} s' * (int_v^1 f dm) dv
    std::vector<double> j_;
    std::vector<double> jdens_;
};

// Expected cost E_x[int_0^{T_y} f] for x <= y. Throws DomainError if x > y.
double phi_up(double x, double y, const ScaleDensity& s, const CoefficientField& f,
              const CoefficientField& sigma2);

// Expected cost E_x[int_0^{T_y} f] for y <= x. Throws DomainError if x < y.
double phi_down(double x, double y, const ScaleDensity& s, const CoefficientField& f,
                const CoefficientField& sigma2);

// E_0[int_0^S f] = s(1) * int_0^1 f dm.
double shuttle_cost(const ScaleDensity& s, const CoefficientField& f, const CoefficientField& sigma2);

/**
 * Constrained static optimum. On C^c the optimal density is
 * sqrt(s0(C)/I(C)) * sqrt(2 f / sigma^2); with C empty the constant factor
 * is fixed to 1.
 *
 * Throws DegenerateInstance if f vanishes on a free cell (use
 * vanishing_f_reduction) or if I(C) = 0 while s0(C) > 0.
 */
StaticSolution optimal_static(const AdditiveProblem& problem);

// The constrained infimum alone; defined even when it is not attained.
double constrained_infimum(const AdditiveProblem& problem);

/**
 * Zero-cost free cells N = {f = 0} minus C collapsed out of the problem.
 * The reduced problem lives on [0, 1 - |N|]; extend() maps a reduced control
 * back, putting weight * s0' on the collapsed cells.
 */
struct VanishingReduction {
    bool trivial = false;  // every cell has f = 0 and is free: value 0
    std::vector<std::size_t> kept_cells;
    std::vector<std::size_t> collapsed_cells;
    std::vector<AdditiveProblem> reduced;  // empty when trivial

    const AdditiveProblem& problem() const { return reduced.front(); }

    // The infimum over the original constrained set; equals the reduced optimum.
    double value() const;

    ScaleDensity extend(const ScaleDensity& reduced_scale, const AdditiveProblem& original,
                        double weight = 1e-9) const;
};

VanishingReduction vanishing_f_reduction(const AdditiveProblem& problem);

}  // namespace shuttle
