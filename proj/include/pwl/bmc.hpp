#pragma once

#include <optional>
#include <vector>

#include "pwl/analysis.hpp"
#include "pwl/dnn.hpp"
#include "pwl/geom2d.hpp"

namespace pwl {

// Closed-loop step x' = A x + B f(x) + c for a 2D state.
struct AffineDynamics {
    Mat A;  // 2 x 2
    Mat B;  // 2 x m, m = controller output dim
    Vec c;  // 2
};

struct Box2 {
    Vec2 lo, hi;

    bool contains(const Vec2& p, double tol = 0.0) const {
        return p.x() >= lo.x() - tol && p.x() <= hi.x() + tol && p.y() >= lo.y() - tol &&
               p.y() <= hi.y() + tol;
    }
    PlanePolytope polygon() const;
};

struct BMCProblem {
    Network controller;     // 2 inputs
    AffineDynamics dynamics;
    Box2 initial;           // S_I
    Box2 safe;              // S_S
    int steps = 1;          // K

    void validate() const;
};

struct BMCStepStats {
    int step = 0;
    std::size_t frontier_size = 0;
    double seconds = 0.0;
};

struct BMCResult {
    enum class Status { Verified, Violated } status = Status::Verified;
    int steps_completed = 0;
    // Set when the frontier emptied out: the reachable set re-entered S_I,
    // so safety holds for every horizon.
    bool inductive = false;
    std::optional<Vec2> witness;   // state outside S_S, when Violated
    int violation_step = -1;
    std::vector<BMCStepStats> stats;
    // Frontier polygons after each completed step (for reports/plots).
    std::vector<std::vector<PlanePolytope>> frontiers;
};

// One exact image Post*(T, .) of the frontier under the closed-loop step.
std::vector<PostPolytope> post_step(const BMCProblem& problem,
                                    const std::vector<PlanePolytope>& frontier);

BMCResult run_bmc(const BMCProblem& problem);

}  // namespace pwl
