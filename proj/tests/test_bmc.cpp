#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "pwl/bmc.hpp"

using namespace pwl;
using namespace pwl::testutil;

namespace {

Network zero_controller() {
    Network net;
    DenseLayer d;
    d.weights = Mat::Zero(1, 2);
    d.bias = Vec::Zero(1);
    net.layers.emplace_back(d);
    return net;
}

BMCProblem problem_with(Network controller, const Mat& A, const Mat& B, const Vec& c,
                        Box2 init, Box2 safe, int steps) {
    BMCProblem p;
    p.controller = std::move(controller);
    p.dynamics = {A, B, c};
    p.initial = init;
    p.safe = safe;
    p.steps = steps;
    p.validate();
    return p;
}

// The hand-built controller of the step-3 system: u = 0.15 * relu(x1).
Network step3_controller() {
    Network net;
    DenseLayer d1;
    d1.weights = Mat(1, 2);
    d1.weights << 1, 0;
    d1.bias = Vec::Zero(1);
    DenseLayer d2;
    d2.weights = Mat(1, 1);
    d2.weights << 0.15;
    d2.bias = Vec::Zero(1);
    net.layers.emplace_back(d1);
    net.layers.emplace_back(ReluLayer{1});
    net.layers.emplace_back(d2);
    net.validate();
    return net;
}

Vec2 simulate(const BMCProblem& p, Vec2 x, int steps) {
    for (int s = 0; s < steps; ++s) {
        Vec xs(2);
        xs << x.x(), x.y();
        const Vec next = p.dynamics.A * xs + p.dynamics.B * eval(p.controller, xs) + p.dynamics.c;
        x = Vec2(next(0), next(1));
    }
    return x;
}

}  // namespace

TEST_CASE("contractive system proves safety via the inductive shortcut") {
    BMCProblem p = problem_with(zero_controller(), 0.5 * Mat::Identity(2, 2), Mat::Zero(2, 1),
                                Vec::Zero(2), Box2{Vec2(-0.5, -0.5), Vec2(0.5, 0.5)},
                                Box2{Vec2(-0.5, -0.5), Vec2(0.5, 0.5)}, 50);
    BMCResult r = run_bmc(p);
    CHECK(r.status == BMCResult::Status::Verified);
    CHECK(r.inductive);
    CHECK(r.steps_completed <= 2);
    CHECK_FALSE(r.witness.has_value());
}

TEST_CASE("expanding system is violated at step 1 with the deepest witness") {
    BMCProblem p = problem_with(zero_controller(), 2.0 * Mat::Identity(2, 2), Mat::Zero(2, 1),
                                Vec::Zero(2), Box2{Vec2(-0.35, -0.35), Vec2(0.35, 0.35)},
                                Box2{Vec2(-0.5, -0.5), Vec2(0.5, 0.5)}, 5);
    BMCResult r = run_bmc(p);
    REQUIRE(r.status == BMCResult::Status::Violated);
    CHECK(r.violation_step == 1);
    REQUIRE(r.witness.has_value());
    CHECK(r.witness->x() == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(r.witness->y() == doctest::Approx(0.7).epsilon(1e-9));
    CHECK_FALSE(p.safe.contains(*r.witness));
}

TEST_CASE("PWL controller violating at step 3 is caught exactly then") {
    // x1' = x1 + 0.15 * relu(x1), x2' = x2: slow drift past the safe box.
    Mat B = Mat::Zero(2, 1);
    B(0, 0) = 1.0;
    BMCProblem p = problem_with(step3_controller(), Mat::Identity(2, 2), B, Vec::Zero(2),
                                Box2{Vec2(-0.35, -0.35), Vec2(0.35, 0.35)},
                                Box2{Vec2(-0.5, -0.5), Vec2(0.5, 0.5)}, 10);
    BMCResult r = run_bmc(p);
    REQUIRE(r.status == BMCResult::Status::Violated);
    CHECK(r.violation_step == 3);
    REQUIRE(r.witness.has_value());
    CHECK_FALSE(p.safe.contains(*r.witness));

    // Simulation oracle: the worst trajectory over a 200 x 200 seed grid.
    Vec2 worst(0, 0);
    double worst_excess = -1.0;
    for (int i = 0; i < 200; ++i) {
        for (int j = 0; j < 200; ++j) {
            const Vec2 seed(-0.35 + 0.7 * i / 199.0, -0.35 + 0.7 * j / 199.0);
            const Vec2 end = simulate(p, seed, 3);
            const double excess =
                std::max({end.x() - 0.5, -0.5 - end.x(), end.y() - 0.5, -0.5 - end.y()});
            const bool deeper = excess > worst_excess + 1e-12;
            const bool tie = std::abs(excess - worst_excess) <= 1e-12 &&
                             (end.x() > worst.x() + 1e-12 ||
                              (std::abs(end.x() - worst.x()) <= 1e-12 && end.y() > worst.y()));
            if (deeper || tie) {
                worst_excess = excess;
                worst = end;
            }
        }
    }
    CHECK(worst_excess > 0.0);
    CHECK(r.witness->x() == doctest::Approx(worst.x()).epsilon(1e-6));
    CHECK(r.witness->y() == doctest::Approx(worst.y()).epsilon(1e-6));

    // Steps 1 and 2 are safe: no short-horizon counterexample.
    p.steps = 2;
    BMCResult safe2 = run_bmc(p);
    CHECK(safe2.status == BMCResult::Status::Verified);
    CHECK(safe2.steps_completed == 2);
}

TEST_CASE("unsafe initial corner is reported before any step") {
    BMCProblem p = problem_with(zero_controller(), Mat::Identity(2, 2), Mat::Zero(2, 1),
                                Vec::Zero(2), Box2{Vec2(-1, -1), Vec2(1, 1)},
                                Box2{Vec2(-0.5, -0.5), Vec2(0.5, 0.5)}, 3);
    BMCResult r = run_bmc(p);
    REQUIRE(r.status == BMCResult::Status::Violated);
    CHECK(r.violation_step == 0);
    REQUIRE(r.witness.has_value());
    CHECK_FALSE(p.safe.contains(*r.witness));
}

TEST_CASE("post_step computes the exact one-step image") {
    BMCProblem p = problem_with(step3_controller(), Mat::Identity(2, 2),
                                (Mat(2, 1) << 1, 0).finished(), Vec::Zero(2),
                                Box2{Vec2(-0.35, -0.35), Vec2(0.35, 0.35)},
                                Box2{Vec2(-0.5, -0.5), Vec2(0.5, 0.5)}, 1);
    std::vector<PostPolytope> post = post_step(p, {p.initial.polygon()});
    Rng rng(41);
    for (int s = 0; s < 500; ++s) {
        const Vec2 x(uniform(rng, -0.35, 0.35), uniform(rng, -0.35, 0.35));
        const Vec2 y = simulate(p, x, 1);
        bool covered = false;
        for (const auto& pp : post) {
            if (pp.degenerate || !pp.hull_2d) continue;
            if (contains(*pp.hull_2d, pp.hull_2d->embedding.project(
                                          (Vec(2) << y.x(), y.y()).finished()))) {
                covered = true;
                break;
            }
        }
        CHECK(covered);
    }
}

TEST_CASE("frontier cap raises CapError") {
    auto& cap = caps().max_frontier;
    const std::size_t saved = cap;
    cap = 0;
    // Slow safe drift: the frontier stays non-empty, so the cap must fire.
    BMCProblem p = problem_with(zero_controller(), Mat::Identity(2, 2), Mat::Zero(2, 1),
                                (Vec(2) << 0.05, 0.0).finished(),
                                Box2{Vec2(-0.1, -0.1), Vec2(0.1, 0.1)},
                                Box2{Vec2(-0.5, -0.5), Vec2(0.5, 0.5)}, 2);
    CHECK_THROWS_AS(run_bmc(p), FrontierCapExceeded);
    cap = saved;
}

TEST_CASE("problem validation rejects bad shapes") {
    BMCProblem p;
    p.controller = zero_controller();
    p.dynamics = {Mat::Identity(2, 2), Mat::Zero(2, 2), Vec::Zero(2)};  // B: wrong cols
    p.initial = Box2{Vec2(-1, -1), Vec2(1, 1)};
    p.safe = Box2{Vec2(-1, -1), Vec2(1, 1)};
    p.steps = 1;
    CHECK_THROWS_AS(p.validate(), InputError);
}
