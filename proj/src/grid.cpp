#include "shuttle/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "shuttle/errors.hpp"

namespace shuttle {

namespace {

void require_grid_size(const Grid& grid, std::size_t size, const char* what) {
    if (size != grid.n_cells()) {
        throw ConfigError(std::string(what) + ": expected " + std::to_string(grid.n_cells()) +
                          " cell values, got " + std::to_string(size));
    }
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) {
        throw ConfigError(std::string(what) + ": fields live on different grids");
    }
}

}  // namespace

Grid::Grid(std::size_t n_cells) : Grid(n_cells, 1.0, true) {
    if (n_cells < 2) {
        throw ConfigError("grid needs at least 2 cells");
    }
}

Grid::Grid(std::size_t n_cells, double length, bool)
    : n_cells_(n_cells), length_(length), width_(length / static_cast<double>(n_cells)) {
    if (n_cells == 0) {
        throw ConfigError("grid needs at least 1 cell");
    }
    if (!(length > 0.0) || !std::isfinite(length)) {
        throw ConfigError("grid length must be positive and finite");
    }
}

Grid Grid::with_length(std::size_t n_cells, double length) { return Grid(n_cells, length, true); }

double Grid::node(std::size_t i) const {
    if (i >= n_cells_) {
        return length_;
    }
    return length_ * static_cast<double>(i) / static_cast<double>(n_cells_);
}

double Grid::midpoint(std::size_t i) const {
    return length_ * (static_cast<double>(i) + 0.5) / static_cast<double>(n_cells_);
}

std::size_t Grid::cell_of(double x) const {
    if (x <= 0.0) {
        return 0;
    }
    auto i = static_cast<std::size_t>(x / width_);
    if (i >= n_cells_) {
        return n_cells_ - 1;
    }
    // Guard against x / width_ rounding across a node.
    if (node(i) > x) {
        --i;
    } else if (i + 1 < n_cells_ && node(i + 1) <= x) {
        ++i;
    }
    return i;
}

std::size_t Grid::node_index(double x) const {
    const double scaled = x / width_;
    const double nearest = std::round(scaled);
    if (nearest < 0.0 || nearest > static_cast<double>(n_cells_)) {
        return npos;
    }
    if (std::abs(scaled - nearest) > 1e-9) {
        return npos;
    }
    return static_cast<std::size_t>(nearest);
}

CoefficientField::CoefficientField(const Grid& grid, std::vector<double> values, FieldRole role)
    : grid_(grid), values_(std::move(values)), role_(role) {
    require_grid_size(grid_, values_.size(), "coefficient field");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double v = values_[i];
        if (!std::isfinite(v)) {
            throw ConfigError("coefficient field: non-finite value in cell " + std::to_string(i));
        }
        if (role_ == FieldRole::variance && !(v > 0.0)) {
            throw ConfigError("sigma^2 must be > 0; cell " + std::to_string(i) + " has " +
                              std::to_string(v));
        }
        if (role_ == FieldRole::rate && v < 0.0) {
            throw ConfigError("rate field must be >= 0; cell " + std::to_string(i) + " has " +
                              std::to_string(v));
        }
    }
}

CoefficientField CoefficientField::constant(const Grid& grid, double value, FieldRole role) {
    return CoefficientField(grid, std::vector<double>(grid.n_cells(), value), role);
}

CoefficientField CoefficientField::sampled(const Grid& grid,
                                           const std::function<double(double)>& fn,
                                           FieldRole role) {
    std::vector<double> values(grid.n_cells());
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = fn(grid.midpoint(i));
    }
    return CoefficientField(grid, std::move(values), role);
}

ScaleDensity::ScaleDensity(const Grid& grid, std::vector<double> sprime)
    : grid_(grid), sprime_(std::move(sprime)) {
    require_grid_size(grid_, sprime_.size(), "scale density");
    cumulative_.resize(sprime_.size() + 1);
    cumulative_[0] = 0.0;
    const double h = grid_.cell_width();
    for (std::size_t i = 0; i < sprime_.size(); ++i) {
        const double v = sprime_[i];
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError("scale density must be positive and finite; cell " +
                              std::to_string(i) + " has " + std::to_string(v));
        }
        cumulative_[i + 1] = cumulative_[i] + v * h;
    }
    if (!std::isfinite(cumulative_.back())) {
        throw NumericalError("scale function s(1) is not finite");
    }
}

ScaleDensity ScaleDensity::constant(const Grid& grid, double value) {
    return ScaleDensity(grid, std::vector<double>(grid.n_cells(), value));
}

double ScaleDensity::at(double x) const {
    if (x <= 0.0) {
        return 0.0;
    }
    if (x >= grid_.length()) {
        return total();
    }
    const std::size_t i = grid_.cell_of(x);
    return cumulative_[i] + sprime_[i] * (x - grid_.node(i));
}

double ScaleDensity::inverse(double y) const {
    if (y <= 0.0) {
        return 0.0;
    }
    if (y >= total()) {
        return grid_.length();
    }
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), y);
    const auto i = static_cast<std::size_t>(std::distance(cumulative_.begin(), it)) - 1;
    return grid_.node(i) + (y - cumulative_[i]) / sprime_[i];
}

std::size_t ScaleDensity::fingerprint() const {
    std::size_t h = std::hash<std::size_t>{}(sprime_.size());
    for (double v : sprime_) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        h ^= std::hash<std::uint64_t>{}(bits) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

SpeedDensity::SpeedDensity(const Grid& grid, std::vector<double> mprime)
    : grid_(grid), mprime_(std::move(mprime)) {
    require_grid_size(grid_, mprime_.size(), "speed density");
}

DriftField::DriftField(const Grid& grid, std::vector<double> mu) : grid_(grid), mu_(std::move(mu)) {
    require_grid_size(grid_, mu_.size(), "drift field");
    for (std::size_t i = 0; i < mu_.size(); ++i) {
        if (!std::isfinite(mu_[i])) {
            throw ConfigError("drift must be finite; cell " + std::to_string(i));
        }
    }
}

ConstraintSet::ConstraintSet(const Grid& grid, std::vector<bool> indicator)
    : grid_(grid), indicator_(std::move(indicator)) {
    require_grid_size(grid_, indicator_.size(), "constraint set");
}

ConstraintSet ConstraintSet::empty(const Grid& grid) {
    return ConstraintSet(grid, std::vector<bool>(grid.n_cells(), false));
}

ConstraintSet ConstraintSet::interval(const Grid& grid, double from, double to) {
    const std::size_t a = grid.node_index(from);
    const std::size_t b = grid.node_index(to);
    if (a == Grid::npos || b == Grid::npos) {
        throw ConfigError("constraint interval [" + std::to_string(from) + ", " +
                          std::to_string(to) + ") is not aligned with the grid cells");
    }
    if (a > b) {
        throw ConfigError("constraint interval has from > to");
    }
    std::vector<bool> ind(grid.n_cells(), false);
    for (std::size_t i = a; i < b; ++i) {
        ind[i] = true;
    }
    return ConstraintSet(grid, std::move(ind));
}

std::size_t ConstraintSet::count() const {
    return static_cast<std::size_t>(std::count(indicator_.begin(), indicator_.end(), true));
}

ScaleDensity drift_to_scale(const DriftField& mu, const CoefficientField& sigma2) {
    const Grid& grid = mu.grid();
    require_same_grid(grid, sigma2.grid(), "drift_to_scale");
    const double h = grid.cell_width();
    std::vector<double> sprime(grid.n_cells());
    double integral = 0.0;  // int_0^{node i} mu / sigma^2
    for (std::size_t i = 0; i < grid.n_cells(); ++i) {
        const double ratio = mu[i] / sigma2[i];
        const double exponent = -2.0 * (integral + 0.5 * ratio * h);
        const double value = std::exp(exponent);
        if (!std::isfinite(value) || value == 0.0) {
            throw NumericalError("drift_to_scale: exp(" + std::to_string(exponent) +
                                 ") over/underflows in cell " + std::to_string(i));
        }
        sprime[i] = value;
        integral += ratio * h;
    }
    return ScaleDensity(grid, std::move(sprime));
}

DriftField scale_to_drift(const ScaleDensity& s, const CoefficientField& sigma2) {
    const Grid& grid = s.grid();
    require_same_grid(grid, sigma2.grid(), "scale_to_drift");
    const std::size_t n = grid.n_cells();
    const double h = grid.cell_width();
    std::vector<double> log_s(n);
    for (std::size_t i = 0; i < n; ++i) {
        log_s[i] = std::log(s[i]);
    }
    std::vector<double> mu(n);
    for (std::size_t i = 0; i < n; ++i) {
        double slope = 0.0;
        if (n == 1) {
            slope = 0.0;
        } else if (i == 0) {
            slope = (log_s[1] - log_s[0]) / h;
        } else if (i == n - 1) {
            slope = (log_s[n - 1] - log_s[n - 2]) / h;
        } else {
            slope = (log_s[i + 1] - log_s[i - 1]) / (2.0 * h);
        }
        mu[i] = -0.5 * sigma2[i] * slope;
    }
    return DriftField(grid, std::move(mu));
}

SpeedDensity speed_from_scale(const ScaleDensity& s, const CoefficientField& sigma2) {
    require_same_grid(s.grid(), sigma2.grid(), "speed_from_scale");
    std::vector<double> m(s.grid().n_cells());
    for (std::size_t i = 0; i < m.size(); ++i) {
        m[i] = 2.0 / (sigma2[i] * s[i]);
    }
    return SpeedDensity(s.grid(), std::move(m));
}

}  // namespace shuttle
