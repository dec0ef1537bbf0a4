#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "shuttle/additive.hpp"
#include "shuttle/chain.hpp"
#include "shuttle/discounted.hpp"
#include "shuttle/grid.hpp"

namespace shuttle {

/**
 * Sampled path of a controlled diffusion. accrued is int_0^t rate(X_u) du
 * (running cost f, or alpha for the discounted problem). after_top is set
 * from the first sample at which the top has been reached.
 */
struct ControlledPath {
    std::vector<double> times;
    std::vector<double> positions;
    std::vector<double> running_max;
    std::vector<double> accrued;
    std::vector<bool> after_top;
    std::size_t control_fingerprint = 0;

    std::size_t size() const { return times.size(); }
    // Throws ContractViolation if the columns are inconsistent.
    void validate() const;
};

/// Chain path; accrued is sum_{u<t} f(X_u) or prod_{u<t} rho(X_u).
struct ChainPath {
    std::vector<std::size_t> states;
    std::vector<std::size_t> running_max;
    std::vector<double> accrued;
    std::vector<bool> after_top;
    std::size_t control_fingerprint = 0;

    std::size_t size() const { return states.size(); }
    void validate(std::size_t N) const;
};

struct BellmanEvaluation {
    std::vector<double> values;
};

// Prefactor of the pre-top value term: unit matches the static optimum, doubled is the factor-2 reading.
enum class PrefactorReading { unit, doubled };

/// v_t = accrued + V(M) - phi_X(0) before the top, accrued + phi_0(X) after.
class AdditiveBellman {
public:
    AdditiveBellman(const ScaleDensity& s, const CoefficientField& f, const CoefficientField& sigma2,
                    PrefactorReading reading = PrefactorReading::unit);

    double operator()(double accrued, double x, double max, bool after_top) const;
    // V(M): optimal total cost given the control below M.
    double level_value(double max) const;
    const AdditiveProfile& profile() const { return profile_; }
    std::size_t fingerprint() const { return fingerprint_; }

private:
    AdditiveProfile profile_;
    double factor_;
    std::size_t fingerprint_;
};

/// Psi_t = exp(-accrued) G(X) psi-hat(M) before the top, exp(-accrued) G~(X)/G~(0) after.
class DiscountedBellman {
public:
    DiscountedBellman(const ScaleDensity& s, const CoefficientField& sigma2, const CoefficientField& alpha,
                      const SeriesOptions& options = {});

    double operator()(double accrued, double x, double max, bool after_top) const;
    double level_value(double max) const;  // psi-hat(M)
    const SeriesTable& table() const { return table_; }
    std::size_t fingerprint() const { return fingerprint_; }

private:
    CoefficientField sigma2_;
    CoefficientField alpha_;
    SeriesTable table_;
    std::size_t fingerprint_;
};

BellmanEvaluation bellman_additive(const ControlledPath& path, const ScaleDensity& s,
                                   const CoefficientField& f, const CoefficientField& sigma2,
                                   PrefactorReading reading = PrefactorReading::unit);

BellmanEvaluation bellman_discounted(const ControlledPath& path, const ScaleDensity& s,
                                     const CoefficientField& alpha, const CoefficientField& sigma2,
                                     const SeriesOptions& options = {});

/**
 * Constrained static optimum for C = [0, y) computed through optimal_static; the
 * returned density equals s0 below y.
 */
ScaleDensity dynamic_extension_additive(const ScaleDensity& s0, const CoefficientField& f,
                                        const CoefficientField& sigma2, double y);

// Fingerprint of a discrete scale, used to tie chain paths to their control.
std::size_t scale_fingerprint(const DiscreteScale& w);

class DiscreteAdditiveBellman {
public:
    DiscreteAdditiveBellman(const DiscreteScale& w, const DiscreteCost& f);
    double operator()(double accrued, std::size_t x, std::size_t max, bool after_top) const;
    double level_value(std::size_t max) const { return level_[max]; }
    std::size_t fingerprint() const { return fingerprint_; }

private:
    std::vector<double> level_;  // V(M), C = edges 0..max(M,1)-1
    std::vector<double> up_;     // phi_x(0)
    std::vector<double> down_;   // phi_0(x)
    std::size_t fingerprint_;
};

class DiscreteDiscountedBellman {
public:
    DiscreteDiscountedBellman(const DiscreteScale& w, const DiscountVector& rho);
    double operator()(double accrued, std::size_t x, std::size_t max, bool after_top) const;
    double level_value(std::size_t max) const { return level_[max]; }
    std::size_t fingerprint() const { return fingerprint_; }

private:
    std::vector<double> level_;   // psi-hat(max(M,1))
    std::vector<double> before_;  // G(x) / (rho_0..rho_{x-1})
    std::vector<double> after_;   // rho_1..rho_x G~(x) / G~(0)
    std::size_t fingerprint_;
};

BellmanEvaluation bellman_discrete(const ChainPath& path, const DiscreteScale& w, const DiscreteCost& f);
BellmanEvaluation bellman_discrete(const ChainPath& path, const DiscreteScale& w, const DiscountVector& rho);

/**
 * Level-based control: when the running maximum first reaches grid node
 * `level`, the callback receives the realized densities of the cells below
 * and returns the continuation for cells level..n-1. Only its first entry is
 * ever used, since the next cell is decided at the next level.
 */
using LevelControl = std::function<std::vector<double>(std::size_t level, std::span<const double> below)>;
ScaleDensity materialize(const Grid& grid, const LevelControl& control);

// Edge analogue: at new maximum state M >= 1 returns weights for edges M..N-1.
using DiscreteLevelControl =
    std::function<std::vector<double>(std::size_t level, std::span<const double> below)>;
DiscreteScale materialize(std::size_t N, const DiscreteLevelControl& control);

LevelControl additive_optimal_continuation(const CoefficientField& f, const CoefficientField& sigma2);
LevelControl discounted_optimal_continuation(const CoefficientField& alpha, const CoefficientField& sigma2,
                                             const SeriesOptions& options = {});
DiscreteLevelControl discrete_additive_optimal_continuation(const DiscreteCost& f);
DiscreteLevelControl discrete_discounted_optimal_continuation(const DiscountVector& rho);

// Continuation that ignores the past and follows a fixed density above the level.
LevelControl fixed_continuation(const ScaleDensity& s);
DiscreteLevelControl fixed_continuation(const DiscreteScale& w);

}  // namespace shuttle
