#include "pwl/bmc.hpp"

#include <chrono>
#include <cmath>

#include "pwl/symbolic.hpp"

namespace pwl {

PlanePolytope Box2::polygon() const {
    return make_polygon_2d({Vec2(lo.x(), lo.y()), Vec2(hi.x(), lo.y()), Vec2(hi.x(), hi.y()),
                            Vec2(lo.x(), hi.y())});
}

void BMCProblem::validate() const {
    controller.validate();
    if (controller.input_dim() != 2) throw InputError("controller must take a 2D state");
    if (dynamics.A.rows() != 2 || dynamics.A.cols() != 2 || dynamics.c.size() != 2 ||
        dynamics.B.rows() != 2 || dynamics.B.cols() != controller.output_dim())
        throw DimMismatch("dynamics shapes do not match the controller");
    if (!dynamics.A.allFinite() || !dynamics.B.allFinite() || !dynamics.c.allFinite())
        throw InputError("non-finite dynamics");
    if (initial.hi.x() <= initial.lo.x() || initial.hi.y() <= initial.lo.y() ||
        safe.hi.x() <= safe.lo.x() || safe.hi.y() <= safe.lo.y())
        throw InputError("state boxes must have positive area");
    if (steps < 0) throw InputError("negative step budget");
}

std::vector<PostPolytope> post_step(const BMCProblem& problem,
                                    const std::vector<PlanePolytope>& frontier) {
    std::vector<PostPolytope> result;
    for (const auto& poly : frontier) {
        SymbolicRep rep = fhat(problem.controller, poly);
        for (const auto& part : rep.partitions) {
            PostPolytope pp;
            pp.vertices.reserve(part.poly.vertices.size());
            for (std::size_t i = 0; i < part.poly.vertices.size(); ++i) {
                Vec state = part.poly.embedding.embed(part.poly.vertices[i]);
                Vec next = problem.dynamics.A * state + problem.dynamics.B * part.post[i] +
                           problem.dynamics.c;
                pp.vertices.push_back(std::move(next));
            }
            std::vector<Vec2> pts;
            pts.reserve(pp.vertices.size());
            for (const auto& v : pp.vertices) pts.emplace_back(v[0], v[1]);
            Hull2D hull = convex_hull_2d(pts);
            if (hull.degenerate)
                pp.degenerate = true;
            else
                pp.hull_2d = PlanePolytope{Embedding::identity2d(), hull.vertices};
            result.push_back(std::move(pp));
        }
    }
    return result;
}

BMCResult run_bmc(const BMCProblem& problem) {
    problem.validate();
    const double tol = tolerances().geo;
    BMCResult result;

    // Step 0: the initial set itself must be safe.
    for (const Vec2& corner :
         {problem.initial.lo, Vec2(problem.initial.hi.x(), problem.initial.lo.y()),
          problem.initial.hi, Vec2(problem.initial.lo.x(), problem.initial.hi.y())}) {
        if (!problem.safe.contains(corner, tol)) {
            result.status = BMCResult::Status::Violated;
            result.violation_step = 0;
            result.witness = corner;
            return result;
        }
    }

    std::vector<PlanePolytope> frontier{problem.initial.polygon()};
    for (int step = 1; step <= problem.steps && !frontier.empty(); ++step) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<PostPolytope> posts = post_step(problem, frontier);

        // Report the deepest violation of the step (ties broken toward the
        // lexicographically larger state) so the witness is reproducible.
        auto violation_depth = [&](const Vec2& p) {
            double d = 0.0;
            d = std::max(d, problem.safe.lo.x() - p.x());
            d = std::max(d, p.x() - problem.safe.hi.x());
            d = std::max(d, problem.safe.lo.y() - p.y());
            d = std::max(d, p.y() - problem.safe.hi.y());
            return d;
        };
        std::optional<Vec2> worst;
        double worst_depth = tol;
        std::vector<PlanePolytope> next;
        for (const auto& pp : posts) {
            bool subsumed = true;
            for (const auto& v : pp.vertices) {
                Vec2 state(v[0], v[1]);
                const double depth = violation_depth(state);
                if (depth > worst_depth ||
                    (worst && depth == worst_depth &&
                     (state.x() > worst->x() ||
                      (state.x() == worst->x() && state.y() > worst->y())))) {
                    worst = state;
                    worst_depth = depth;
                }
                if (!problem.initial.contains(state, tol)) subsumed = false;
            }
            // Anything mapped back into S_I is already covered by step 0.
            if (subsumed) continue;
            // Measure-zero images carry no area to propagate; their vertices
            // are still checked against S_S above.
            if (pp.hull_2d) next.push_back(*pp.hull_2d);
        }
        if (worst) {
            result.status = BMCResult::Status::Violated;
            result.violation_step = step;
            result.witness = worst;
            result.steps_completed = step;
            return result;
        }
        if (next.size() > caps().max_frontier)
            throw FrontierCapExceeded("frontier cap exceeded during bounded model checking");

        const auto t1 = std::chrono::steady_clock::now();
        result.stats.push_back(
            {step, next.size(), std::chrono::duration<double>(t1 - t0).count()});
        result.steps_completed = step;
        result.frontiers.push_back(next);
        frontier = std::move(next);
    }

    result.status = BMCResult::Status::Verified;
    result.inductive = frontier.empty();
    return result;
}

}  // namespace pwl
