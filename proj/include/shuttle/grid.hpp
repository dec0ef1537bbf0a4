#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace shuttle {

/**
 * Uniform cell partition of [0, length]. The unit interval is the usual
 * case; shorter lengths appear only for reduced problems.
 */
class Grid {
public:
    // Unit interval, n_cells >= 2.
    explicit Grid(std::size_t n_cells);

    // Interval [0, length]; used by reductions that drop cells. n_cells >= 1.
    static Grid with_length(std::size_t n_cells, double length);

    std::size_t n_cells() const { return n_cells_; }
    std::size_t n_nodes() const { return n_cells_ + 1; }
    double cell_width() const { return width_; }
    double length() const { return length_; }

    double node(std::size_t i) const;
    double midpoint(std::size_t i) const;

    // Cell containing x; points on an interior node belong to the cell on
    // their right, x == length belongs to the last cell.
    std::size_t cell_of(double x) const;

    // Index of the node at x if x lies on a node (within rounding), else npos.
    std::size_t node_index(double x) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    bool operator==(const Grid& other) const {
        return n_cells_ == other.n_cells_ && length_ == other.length_;
    }

private:
    Grid(std::size_t n_cells, double length, bool);

    std::size_t n_cells_;
    double length_;
    double width_;
};

/// Role of a coefficient field; decides the sign constraint checked on construction.
enum class FieldRole { variance, rate };

/**
 * Piecewise-constant per-cell field. A variance field (sigma^2) must be
 * strictly positive; rate fields (running cost f, discount alpha) must be
 * non-negative.
 */
class CoefficientField {
public:
    CoefficientField(const Grid& grid, std::vector<double> values, FieldRole role);

    static CoefficientField constant(const Grid& grid, double value, FieldRole role);
    // Samples fn at cell midpoints.
    static CoefficientField sampled(const Grid& grid, const std::function<double(double)>& fn,
                                    FieldRole role);

    const Grid& grid() const { return grid_; }
    FieldRole role() const { return role_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }

private:
    Grid grid_;
    std::vector<double> values_;
    FieldRole role_;
};

/**
 * Scale density s' on the grid together with the cumulative scale s at the
 * nodes (s(0) = 0). Every cell value is strictly positive.
 */
class ScaleDensity {
public:
    ScaleDensity(const Grid& grid, std::vector<double> sprime);

    static ScaleDensity constant(const Grid& grid, double value);

    const Grid& grid() const { return grid_; }
    double operator[](std::size_t i) const { return sprime_[i]; }
    std::span<const double> sprime() const { return sprime_; }
    std::span<const double> cumulative() const { return cumulative_; }

    double total() const { return cumulative_.back(); }
    // s(x) with linear interpolation inside a cell.
    double at(double x) const;
    // Inverse of s on [0, total()].
    double inverse(double y) const;

    // Stable identity of the density values; used to tie paths to a control.
    std::size_t fingerprint() const;

private:
    Grid grid_;
    std::vector<double> sprime_;
    std::vector<double> cumulative_;
};

class SpeedDensity {
public:
    SpeedDensity(const Grid& grid, std::vector<double> mprime);

    const Grid& grid() const { return grid_; }
    double operator[](std::size_t i) const { return mprime_[i]; }
    std::span<const double> mprime() const { return mprime_; }

private:
    Grid grid_;
    std::vector<double> mprime_;
};

class DriftField {
public:
    DriftField(const Grid& grid, std::vector<double> mu);

    const Grid& grid() const { return grid_; }
    double operator[](std::size_t i) const { return mu_[i]; }
    std::span<const double> mu() const { return mu_; }

private:
    Grid grid_;
    std::vector<double> mu_;
};

/// Cell-aligned subset C of the grid.
class ConstraintSet {
public:
    ConstraintSet(const Grid& grid, std::vector<bool> indicator);

    static ConstraintSet empty(const Grid& grid);
    // Cells inside [from, to); both endpoints must be grid nodes.
    static ConstraintSet interval(const Grid& grid, double from, double to);

    const Grid& grid() const { return grid_; }
    bool contains(std::size_t cell) const { return indicator_[cell]; }
    std::size_t count() const;
    bool is_empty() const { return count() == 0; }

private:
    Grid grid_;
    std::vector<bool> indicator_;
};

// s'(cell i) = exp(-2 * int_0^{midpoint i} mu / sigma^2), midpoint accumulation.
ScaleDensity drift_to_scale(const DriftField& mu, const CoefficientField& sigma2);

// mu = -1/2 sigma^2 (ln s')', central differences between cell midpoints and
// one-sided differences in the end cells.
DriftField scale_to_drift(const ScaleDensity& s, const CoefficientField& sigma2);

// m' = 2 / (sigma^2 s'), cell by cell.
SpeedDensity speed_from_scale(const ScaleDensity& s, const CoefficientField& sigma2);

}  // namespace shuttle
