#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shuttle/chain.hpp"
#include "shuttle/discounted.hpp"
#include "shuttle/grid.hpp"
#include "shuttle/simulation.hpp"

namespace shuttle {

inline constexpr int kSchemaVersion = 1;

enum class ProblemKind { additive_continuous, discounted_continuous, additive_discrete, discounted_discrete };

const char* kind_name(ProblemKind kind);
bool is_discrete(ProblemKind kind);
bool is_discounted(ProblemKind kind);

/**
 * A coefficient given as "const:c", "poly:a0,a1,...", "cells:[v0,...]", a
 * bare number or a bare array. Polynomials are evaluated at cell midpoints
 * for continuous problems and at the state index for chains.
 */
struct CoefficientSpec {
    enum class Form { constant, poly, cells };
    Form form = Form::constant;
    std::vector<double> data;  // constant: one value; poly: coefficients; cells: values
    std::string where;         // JSON pointer of the field, for messages

    std::vector<double> on_cells(const Grid& grid) const;
    std::vector<double> on_states(std::size_t count) const;
};

CoefficientSpec parse_coefficient(const nlohmann::json& node, const std::string& where);

struct VerifyOptions {
    bool simulate = true;
    bool martingale = true;
    std::size_t perturbations = 50;      // random perturbations for the dominance check
    std::size_t oracle_instances = 1000; // random chains for formula-vs-oracle
    std::size_t brute_force_points = 40;
    double window = 0.5;                 // martingale window (diffusions)
    std::uint64_t perturbation_seed = 7;
};

struct ProblemConfig {
    int schema_version = kSchemaVersion;
    ProblemKind kind = ProblemKind::additive_continuous;

    // continuous
    std::size_t grid_cells = 2000;
    std::optional<CoefficientSpec> sigma2;
    std::optional<CoefficientSpec> rate;  // f or alpha
    std::optional<CoefficientSpec> drift;
    std::optional<CoefficientSpec> scale;
    double scale_factor = 1.0;
    std::optional<double> constraint_from;
    std::optional<double> constraint_to;
    AConvention convention = AConvention::sqrt2;

    // discrete
    std::size_t N = 0;
    std::optional<std::vector<double>> weights;
    std::optional<CoefficientSpec> eps;
    std::vector<std::size_t> constraint_edges{0};
    std::optional<CtmcRates> ctmc;

    // both: discounted constraint level (node for diffusions, state for chains)
    double y = 0.0;

    // explicit control for simulate / verify; otherwise the optimum is used
    std::optional<CoefficientSpec> control_scale;
    std::optional<std::vector<double>> control_weights;

    SeriesOptions series;
    SimConfig sim;
    VerifyOptions verify;
};

// Throws ConfigError naming the offending field.
ProblemConfig parse_config(const nlohmann::json& doc);
ProblemConfig load_config(const std::string& path);

struct ContinuousInstance {
    Grid grid;
    CoefficientField sigma2;
    CoefficientField rate;
    ScaleDensity s0;
    ConstraintSet constraint;
    double y;
    std::optional<ScaleDensity> control;
};

ContinuousInstance build_continuous(const ProblemConfig& config);

/**
 * A chain problem as seen by the solver: holding and continuous time are
 * converted away, so values are f* or r* of the jump chain. The original
 * chain and per-state values are kept for simulation.
 */
struct DiscreteInstance {
    DiscreteScale w0;
    std::vector<double> values;  // f* or r* per state
    DiscreteConstraint constraint;
    std::size_t y;
    BDChain original;
    std::vector<double> original_values;  // f, rho, or alpha for a CTMC
    std::optional<CtmcRates> ctmc;
    std::optional<DiscreteScale> control;
};

DiscreteInstance build_discrete(const ProblemConfig& config);

/**
 * Checks an emitted result document against the result schema; throws
 * ConfigError with the offending field.
 */
void validate_result_document(const nlohmann::json& doc);

}  // namespace shuttle
