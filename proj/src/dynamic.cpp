#include "shuttle/dynamic.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>

#include "shuttle/errors.hpp"

namespace shuttle {

void ControlledPath::validate() const {
    const std::size_t n = times.size();
    if (positions.size() != n || running_max.size() != n || accrued.size() != n || after_top.size() != n) {
        throw ContractViolation("controlled path: columns have different lengths");
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (running_max[k] + 1e-12 < positions[k]) {
            throw ContractViolation("controlled path: running max below position at sample " +
                                    std::to_string(k));
        }
        if (k == 0) {
            continue;
        }
        if (times[k] < times[k - 1] || running_max[k] < running_max[k - 1] || accrued[k] < accrued[k - 1]) {
            throw ContractViolation("controlled path: time, running max or accrued cost decreases at sample " +
                                    std::to_string(k));
        }
        if (after_top[k - 1] && !after_top[k]) {
            throw ContractViolation("controlled path: phase flag reverts at sample " + std::to_string(k));
        }
    }
}

void ChainPath::validate(std::size_t N) const {
    const std::size_t n = states.size();
    if (running_max.size() != n || accrued.size() != n || after_top.size() != n) {
        throw ContractViolation("chain path: columns have different lengths");
    }
    std::size_t m = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (states[k] > N) {
            throw ContractViolation("chain path: state out of range at step " + std::to_string(k));
        }
        m = std::max(m, states[k]);
        if (running_max[k] != m) {
            throw ContractViolation("chain path: running max inconsistent at step " + std::to_string(k));
        }
        if (after_top[k] != (m == N)) {
            throw ContractViolation("chain path: phase flag inconsistent at step " + std::to_string(k));
        }
    }
}

AdditiveBellman::AdditiveBellman(const ScaleDensity& s, const CoefficientField& f,
                                 const CoefficientField& sigma2, PrefactorReading reading)
    : profile_(s, f, sigma2),
      factor_(reading == PrefactorReading::doubled ? 2.0 : 1.0),
      fingerprint_(s.fingerprint()) {}

double AdditiveBellman::level_value(double max) const {
    return factor_ * profile_.prefix_constrained_value(max);
}

double AdditiveBellman::operator()(double accrued, double x, double max, bool after_top) const {
    if (after_top) {
        return accrued + profile_.down_cost_to_zero(x);
    }
    return accrued + level_value(max) - profile_.up_cost_from_zero(x);
}

DiscountedBellman::DiscountedBellman(const ScaleDensity& s, const CoefficientField& sigma2,
                                     const CoefficientField& alpha, const SeriesOptions& options)
    : sigma2_(sigma2),
      alpha_(alpha),
      table_(SeriesTable::build(s, sigma2, alpha, [&] {
          SeriesOptions o = options;
          o.keep_orders = false;
          return o;
      }())),
      fingerprint_(s.fingerprint()) {}

double DiscountedBellman::level_value(double max) const {
    return constrained_discounted_value(table_, sigma2_, alpha_, max);
}

double DiscountedBellman::operator()(double accrued, double x, double max, bool after_top) const {
    const double discount = std::exp(-accrued);
    if (after_top) {
        return discount * table_.g_tilde.value_at(x) / table_.g_tilde.value(0);
    }
    return discount * table_.g.value_at(x) * level_value(max);
}

namespace {

void check_fingerprint(std::size_t path_fp, std::size_t control_fp) {
    if (path_fp != control_fp) {
        throw ContractViolation("path was not generated under the supplied control");
    }
}

}  // namespace

BellmanEvaluation bellman_additive(const ControlledPath& path, const ScaleDensity& s,
                                   const CoefficientField& f, const CoefficientField& sigma2,
                                   PrefactorReading reading) {
    path.validate();
    check_fingerprint(path.control_fingerprint, s.fingerprint());
    const AdditiveBellman v(s, f, sigma2, reading);
    BellmanEvaluation out;
    out.values.reserve(path.size());
    for (std::size_t k = 0; k < path.size(); ++k) {
        out.values.push_back(v(path.accrued[k], path.positions[k], path.running_max[k], path.after_top[k]));
    }
    return out;
}

BellmanEvaluation bellman_discounted(const ControlledPath& path, const ScaleDensity& s,
                                     const CoefficientField& alpha, const CoefficientField& sigma2,
                                     const SeriesOptions& options) {
    path.validate();
    check_fingerprint(path.control_fingerprint, s.fingerprint());
    const DiscountedBellman psi(s, sigma2, alpha, options);
    BellmanEvaluation out;
    out.values.reserve(path.size());
    for (std::size_t k = 0; k < path.size(); ++k) {
        out.values.push_back(psi(path.accrued[k], path.positions[k], path.running_max[k], path.after_top[k]));
    }
    return out;
}

ScaleDensity dynamic_extension_additive(const ScaleDensity& s0, const CoefficientField& f,
                                        const CoefficientField& sigma2, double y) {
    const Grid& grid = s0.grid();
    const ConstraintSet c = y <= 0.0 ? ConstraintSet::empty(grid) : ConstraintSet::interval(grid, 0.0, y);
    return optimal_static(AdditiveProblem{sigma2, f, s0, c}).s_opt;
}

std::size_t scale_fingerprint(const DiscreteScale& w) {
    std::size_t h = std::hash<std::size_t>{}(w.N());
    for (double v : w.weights()) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        h ^= std::hash<std::uint64_t>{}(bits) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

DiscreteAdditiveBellman::DiscreteAdditiveBellman(const DiscreteScale& w, const DiscreteCost& f)
    : fingerprint_(scale_fingerprint(w)) {
    const std::size_t N = w.N();
    level_.resize(N + 1);
    up_.resize(N + 1);
    down_.resize(N + 1);
    for (std::size_t m = 0; m <= N; ++m) {
        level_[m] = static_opt_discrete(w, f, DiscreteConstraint::prefix(N, std::max<std::size_t>(m, 1))).value;
        up_[m] = phi_discrete(0, m, w, f);
        down_[m] = phi_discrete(m, 0, w, f);
    }
}

double DiscreteAdditiveBellman::operator()(double accrued, std::size_t x, std::size_t max,
                                           bool after_top) const {
    if (after_top) {
        return accrued + down_[x];
    }
    return accrued + level_[max] - up_[x];
}

DiscreteDiscountedBellman::DiscreteDiscountedBellman(const DiscreteScale& w, const DiscountVector& rho)
    : fingerprint_(scale_fingerprint(w)) {
    const std::size_t N = w.N();
    const DiscreteSeries s = series_G_discrete(w, rho);
    level_.resize(N + 1);
    before_.resize(N + 1);
    after_.resize(N + 1);
    for (std::size_t m = 0; m <= N; ++m) {
        level_[m] = discounted_opt_discrete(w, rho, std::max<std::size_t>(m, 1)).value;
        before_[m] = s.g[m] / rho.product(0, m);
        after_[m] = rho.product(1, m + 1) * s.g_tilde[m] / s.g_tilde[0];
    }
}

double DiscreteDiscountedBellman::operator()(double accrued, std::size_t x, std::size_t max,
                                             bool after_top) const {
    if (after_top) {
        return accrued * after_[x];
    }
    return accrued * before_[x] * level_[max];
}

BellmanEvaluation bellman_discrete(const ChainPath& path, const DiscreteScale& w, const DiscreteCost& f) {
    path.validate(w.N());
    check_fingerprint(path.control_fingerprint, scale_fingerprint(w));
    const DiscreteAdditiveBellman v(w, f);
    BellmanEvaluation out;
    for (std::size_t k = 0; k < path.size(); ++k) {
        out.values.push_back(v(path.accrued[k], path.states[k], path.running_max[k], path.after_top[k]));
    }
    return out;
}

BellmanEvaluation bellman_discrete(const ChainPath& path, const DiscreteScale& w, const DiscountVector& rho) {
    path.validate(w.N());
    check_fingerprint(path.control_fingerprint, scale_fingerprint(w));
    const DiscreteDiscountedBellman v(w, rho);
    BellmanEvaluation out;
    for (std::size_t k = 0; k < path.size(); ++k) {
        out.values.push_back(v(path.accrued[k], path.states[k], path.running_max[k], path.after_top[k]));
    }
    return out;
}

ScaleDensity materialize(const Grid& grid, const LevelControl& control) {
    const std::size_t n = grid.n_cells();
    std::vector<double> realized(n);
    for (std::size_t level = 0; level < n; ++level) {
        const std::vector<double> cont = control(level, std::span<const double>(realized.data(), level));
        if (cont.empty()) {
            throw ContractViolation("level control returned an empty continuation at level " +
                                    std::to_string(level));
        }
        realized[level] = cont.front();
    }
    return ScaleDensity(grid, std::move(realized));
}

DiscreteScale materialize(std::size_t N, const DiscreteLevelControl& control) {
    std::vector<double> w(N, 1.0);
    for (std::size_t level = 1; level < N; ++level) {
        const std::vector<double> cont = control(level, std::span<const double>(w.data(), level));
        if (cont.empty()) {
            throw ContractViolation("level control returned an empty continuation at state " +
                                    std::to_string(level));
        }
        w[level] = cont.front();
    }
    return DiscreteScale(std::move(w));
}

namespace {

std::vector<double> padded(std::span<const double> below, std::size_t n) {
    std::vector<double> out(n, 1.0);
    std::copy(below.begin(), below.end(), out.begin());
    return out;
}

std::vector<double> tail(std::span<const double> values, std::size_t from) {
    return std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(from), values.end());
}

}  // namespace

LevelControl additive_optimal_continuation(const CoefficientField& f, const CoefficientField& sigma2) {
    return [f, sigma2](std::size_t level, std::span<const double> below) {
        const Grid& grid = f.grid();
        const ScaleDensity s0(grid, padded(below, grid.n_cells()));
        const ScaleDensity ext = dynamic_extension_additive(s0, f, sigma2, grid.node(level));
        return tail(ext.sprime(), level);
    };
}

LevelControl discounted_optimal_continuation(const CoefficientField& alpha, const CoefficientField& sigma2,
                                             const SeriesOptions& options) {
    return [alpha, sigma2, options](std::size_t level, std::span<const double> below) {
        const Grid& grid = alpha.grid();
        const DiscountedProblem p{sigma2, alpha, ScaleDensity(grid, padded(below, grid.n_cells())),
                                  grid.node(level)};
        const DiscountedSolution sol = optimal_discounted(p, options);
        return tail(sol.s_opt.sprime(), level);
    };
}

DiscreteLevelControl discrete_additive_optimal_continuation(const DiscreteCost& f) {
    return [f](std::size_t level, std::span<const double> below) {
        const std::size_t N = f.N();
        const DiscreteScale w0(padded(below, N));
        const auto sol = static_opt_discrete(w0, f, DiscreteConstraint::prefix(N, level));
        return tail(sol.w_opt.weights(), level);
    };
}

DiscreteLevelControl discrete_discounted_optimal_continuation(const DiscountVector& rho) {
    return [rho](std::size_t level, std::span<const double> below) {
        const std::size_t N = rho.N();
        const DiscreteScale w0(padded(below, N));
        const auto sol = discounted_opt_discrete(w0, rho, level);
        return tail(sol.w_opt.weights(), level);
    };
}

LevelControl fixed_continuation(const ScaleDensity& s) {
    std::vector<double> values(s.sprime().begin(), s.sprime().end());
    return [values](std::size_t level, std::span<const double>) { return tail(values, level); };
}

DiscreteLevelControl fixed_continuation(const DiscreteScale& w) {
    std::vector<double> values(w.weights().begin(), w.weights().end());
    return [values](std::size_t level, std::span<const double>) { return tail(values, level); };
}

}  // namespace shuttle
