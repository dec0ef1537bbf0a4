#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "shuttle/chain.hpp"
#include "shuttle/grid.hpp"

// Small hand-rolled generators for property tests.
struct Gen {
    explicit Gen(std::uint64_t seed) : rng(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    std::size_t index(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }

    std::vector<double> cells(std::size_t n, double lo, double hi) {
        std::vector<double> v(n);
        for (double& x : v) {
            x = uniform(lo, hi);
        }
        return v;
    }

    // Smooth positive profile exp(a sin(2 pi k x + phase)) sampled at cell midpoints.
    std::vector<double> smooth(const shuttle::Grid& g, double amplitude) {
        const double a = uniform(-amplitude, amplitude);
        const double ph = uniform(0.0, 6.283185307179586);
        const double k = static_cast<double>(index(1, 3));
        std::vector<double> v(g.n_cells());
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = std::exp(a * std::sin(6.283185307179586 * k * g.midpoint(i) + ph));
        }
        return v;
    }

    shuttle::DiscreteScale scale(std::size_t N, double spread = 1.5) {
        std::vector<double> w(N, 1.0);
        for (std::size_t e = 1; e < N; ++e) {
            w[e] = std::exp(uniform(-spread, spread));
        }
        return shuttle::DiscreteScale(w);
    }

    std::mt19937_64 rng;
};
