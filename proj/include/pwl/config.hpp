#pragma once

#include <cstddef>

namespace pwl {

// Global numeric tolerances and resource caps. The defaults are suitable for
// double precision; CLI flags may override them per run.
struct Tolerances {
    // Geometry tolerance: planarity checks, degenerate-area cutoff,
    // containment slack, duplicate-vertex merging.
    double geo = 1e-7;
    // Sign-test tolerance for splits, relative to the largest |value| on the
    // polygon being split.
    double split = 1e-10;
    // Margin added when encoding strict inequalities as non-strict ones.
    double strict_margin = 0.0;
};

struct Caps {
    std::size_t max_partitions = 2'000'000;
    std::size_t max_frontier = 100'000;
};

Tolerances& tolerances();
Caps& caps();

}  // namespace pwl
