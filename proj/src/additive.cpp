#include "shuttle/additive.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "shuttle/errors.hpp"

namespace shuttle {

void AdditiveProblem::validate() const {
    const Grid& g = s0.grid();
    if (!(sigma2.grid() == g) || !(f.grid() == g) || !(constraint.grid() == g)) {
        throw ConfigError("additive problem: fields live on different grids");
    }
    if (sigma2.role() != FieldRole::variance || f.role() != FieldRole::rate) {
        throw ConfigError("additive problem: sigma2 must be a variance field and f a rate field");
    }
}

AmGm am_gm_min(double a, double b) {
    if (a < 0.0 || b < 0.0) {
        throw DomainError("am_gm_min needs a, b >= 0");
    }
    if (a == 0.0 || b == 0.0) {
        return {0.0, std::numeric_limits<double>::quiet_NaN()};
    }
    return {2.0 * std::sqrt(a * b), std::sqrt(b / a)};
}

AdditiveProfile::AdditiveProfile(const ScaleDensity& s, const CoefficientField& f,
                                 const CoefficientField& sigma2)
    : grid_(s.grid()) {
    if (!(f.grid() == grid_) || !(sigma2.grid() == grid_)) {
        throw ConfigError("additive profile: fields live on different grids");
    }
    const std::size_t n = grid_.n_cells();
    const double h = grid_.cell_width();
    sprime_.assign(s.sprime().begin(), s.sprime().end());
    fm_.resize(n);
    jdens_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        fm_[i] = f[i] * 2.0 / (sigma2[i] * sprime_[i]);
        jdens_[i] = std::sqrt(2.0 * f[i] / sigma2[i]);
    }
    s_.assign(n + 1, 0.0);
    f_up_.assign(n + 1, 0.0);
    phi_up_.assign(n + 1, 0.0);
    j_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        s_[i + 1] = s_[i] + sprime_[i] * h;
        f_up_[i + 1] = f_up_[i] + fm_[i] * h;
        // int over the cell of s' * F(v), F linear in the cell
        phi_up_[i + 1] = phi_up_[i] + sprime_[i] * h * 0.5 * (f_up_[i] + f_up_[i + 1]);
        j_[i + 1] = j_[i] + jdens_[i] * h;
    }
    f_down_.assign(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        f_down_[i] = f_down_[i + 1] + fm_[i] * h;
    }
    phi_down_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        phi_down_[i + 1] = phi_down_[i] + sprime_[i] * h * 0.5 * (f_down_[i] + f_down_[i + 1]);
    }
}

AdditiveProfile::Loc AdditiveProfile::locate(double x) const {
    if (x <= 0.0) {
        return {0, 0.0};
    }
    if (x >= grid_.length()) {
        // beyond the top the last cell's formulas are continued
        return {grid_.n_cells() - 1, x - grid_.node(grid_.n_cells() - 1)};
    }
    const std::size_t i = grid_.cell_of(x);
    return {i, x - grid_.node(i)};
}

double AdditiveProfile::scale_at(double x) const {
    const Loc l = locate(x);
    return s_[l.cell] + sprime_[l.cell] * l.offset;
}

double AdditiveProfile::cost_below(double x) const {
    const Loc l = locate(x);
    return f_up_[l.cell] + fm_[l.cell] * l.offset;
}

double AdditiveProfile::cost_above(double x) const {
    const Loc l = locate(x);
    return f_down_[l.cell] - fm_[l.cell] * l.offset;
}

double AdditiveProfile::up_cost_from_zero(double x) const {
    const Loc l = locate(x);
    const double t = l.offset;
    return phi_up_[l.cell] +
           sprime_[l.cell] * (f_up_[l.cell] * t + 0.5 * fm_[l.cell] * t * t);
}

double AdditiveProfile::down_cost_to_zero(double x) const {
    const Loc l = locate(x);
    const double t = l.offset;
    return phi_down_[l.cell] +
           sprime_[l.cell] * (f_down_[l.cell] * t - 0.5 * fm_[l.cell] * t * t);
}

double AdditiveProfile::j_below(double x) const {
    const Loc l = locate(x);
    return j_[l.cell] + jdens_[l.cell] * l.offset;
}

double AdditiveProfile::prefix_constrained_value(double level) const {
    const double root = std::sqrt(scale_at(level) * cost_below(level)) + (j_total() - j_below(level));
    return root * root;
}

namespace {

void check_positions(double x, double y, const Grid& grid) {
    const double len = grid.length();
    if (!(x >= 0.0 && x <= len && y >= 0.0 && y <= len)) {
        throw DomainError("positions must lie in [0, " + std::to_string(len) + "]");
    }
}

}  // namespace

double phi_up(double x, double y, const ScaleDensity& s, const CoefficientField& f,
              const CoefficientField& sigma2) {
    check_positions(x, y, s.grid());
    if (x > y) {
        throw DomainError("phi_up requires x <= y; use phi_down for downward hitting");
    }
    const AdditiveProfile p(s, f, sigma2);
    return p.up_cost_from_zero(y) - p.up_cost_from_zero(x);
}

double phi_down(double x, double y, const ScaleDensity& s, const CoefficientField& f,
                const CoefficientField& sigma2) {
    check_positions(x, y, s.grid());
    if (x < y) {
        throw DomainError("phi_down requires y <= x; use phi_up for upward hitting");
    }
    const AdditiveProfile p(s, f, sigma2);
    return p.down_cost_to_zero(x) - p.down_cost_to_zero(y);
}

double shuttle_cost(const ScaleDensity& s, const CoefficientField& f, const CoefficientField& sigma2) {
    const AdditiveProfile p(s, f, sigma2);
    return p.scale_total() * p.cost_total();
}

namespace {

struct ConstraintSums {
    double s_c = 0.0;
    double i_c = 0.0;
    double j_free = 0.0;
    std::size_t first_zero_free = Grid::npos;
};

ConstraintSums constraint_sums(const AdditiveProblem& problem) {
    const std::size_t n = problem.grid().n_cells();
    const double h = problem.grid().cell_width();
    ConstraintSums out;
    for (std::size_t i = 0; i < n; ++i) {
        if (problem.constraint.contains(i)) {
            out.s_c += problem.s0[i] * h;
            out.i_c += problem.f[i] * 2.0 / (problem.sigma2[i] * problem.s0[i]) * h;
        } else {
            if (!(problem.f[i] > 0.0) && out.first_zero_free == Grid::npos) {
                out.first_zero_free = i;
            }
            out.j_free += std::sqrt(2.0 * problem.f[i] / problem.sigma2[i]) * h;
        }
    }
    return out;
}

}  // namespace

double constrained_infimum(const AdditiveProblem& problem) {
    problem.validate();
    const ConstraintSums sums = constraint_sums(problem);
    const double root = std::sqrt(sums.s_c * sums.i_c) + sums.j_free;
    return root * root;
}

StaticSolution optimal_static(const AdditiveProblem& problem) {
    problem.validate();
    const Grid& grid = problem.grid();
    const std::size_t n = grid.n_cells();
    const auto& s0 = problem.s0;
    const auto& f = problem.f;
    const auto& sigma2 = problem.sigma2;
    const auto& c = problem.constraint;

    const ConstraintSums sums = constraint_sums(problem);
    if (sums.first_zero_free != Grid::npos) {
        throw DegenerateInstance("f vanishes on free cell " + std::to_string(sums.first_zero_free) +
                                 "; the optimum is not attained, use vanishing_f_reduction");
    }
    const double s_c = sums.s_c;
    const double i_c = sums.i_c;
    const double j_free = sums.j_free;

    const bool any_free = c.count() < n;
    double factor = 1.0;
    if (!c.is_empty() && any_free) {
        if (i_c == 0.0) {
            throw DegenerateInstance(
                "I^{s0}(C) = 0 with s0(C) > 0: f vanishes on all of C, the ratio s0(C)/I(C) is "
                "undefined; use vanishing_f_reduction");
        }
        factor = std::sqrt(s_c / i_c);
    }

    std::vector<double> sprime(n);
    for (std::size_t i = 0; i < n; ++i) {
        sprime[i] = c.contains(i) ? s0[i] : factor * std::sqrt(2.0 * f[i] / sigma2[i]);
    }

    const double root = std::sqrt(s_c * i_c) + j_free;
    StaticSolution sol{root * root, ScaleDensity(grid, std::move(sprime)), s_c, i_c, j_free};
    return sol;
}

double VanishingReduction::value() const {
    if (trivial) {
        return 0.0;
    }
    return constrained_infimum(problem());
}

ScaleDensity VanishingReduction::extend(const ScaleDensity& reduced_scale,
                                        const AdditiveProblem& original, double weight) const {
    if (!(weight > 0.0)) {
        throw DomainError("extension weight must be positive");
    }
    const Grid& grid = original.grid();
    std::vector<double> sprime(grid.n_cells());
    for (std::size_t k = 0; k < kept_cells.size(); ++k) {
        sprime[kept_cells[k]] = reduced_scale[k];
    }
    for (std::size_t i : collapsed_cells) {
        sprime[i] = weight * original.s0[i];
    }
    return ScaleDensity(grid, std::move(sprime));
}

VanishingReduction vanishing_f_reduction(const AdditiveProblem& problem) {
    problem.validate();
    const Grid& grid = problem.grid();
    VanishingReduction r;
    for (std::size_t i = 0; i < grid.n_cells(); ++i) {
        if (problem.f[i] == 0.0 && !problem.constraint.contains(i)) {
            r.collapsed_cells.push_back(i);
        } else {
            r.kept_cells.push_back(i);
        }
    }
    if (r.kept_cells.empty()) {
        r.trivial = true;
        return r;
    }
    // A problem whose only kept cells are constrained with f = 0 everywhere also has value 0.
    const std::size_t m = r.kept_cells.size();
    const Grid reduced = Grid::with_length(m, grid.cell_width() * static_cast<double>(m));
    std::vector<double> s2(m), fv(m), sp(m);
    std::vector<bool> ind(m);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t i = r.kept_cells[k];
        s2[k] = problem.sigma2[i];
        fv[k] = problem.f[i];
        sp[k] = problem.s0[i];
        ind[k] = problem.constraint.contains(i);
    }
    r.reduced.push_back(AdditiveProblem{CoefficientField(reduced, std::move(s2), FieldRole::variance),
                                        CoefficientField(reduced, std::move(fv), FieldRole::rate),
                                        ScaleDensity(reduced, std::move(sp)),
                                        ConstraintSet(reduced, std::move(ind))});
    return r;
}

}  // namespace shuttle
