#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "helpers.hpp"
#include "pwl/symbolic.hpp"

using namespace pwl;
using namespace pwl::testutil;

namespace {

double total_area(const SymbolicRep& rep) {
    double s = 0.0;
    for (const auto& p : rep.partitions) s += area(p.poly);
    return s;
}

// Exactness check by sampling: interpolated post image vs direct eval.
void check_exact(const Network& net, const PlanePolytope& domain, const SymbolicRep& rep,
                 Rng& rng, int samples = 300) {
    for (int s = 0; s < samples; ++s) {
        const Vec2 u = sample_in_polygon(rng, domain);
        const std::size_t i = locate(rep, u);
        const Vec direct = eval(net, rep.embedding.embed(u));
        const Vec interp = interp_post(rep, i, u);
        const double scale = direct.lpNorm<Eigen::Infinity>();
        CHECK((interp - direct).lpNorm<Eigen::Infinity>() <= 1e-6 * (1.0 + scale));
    }
}

}  // namespace

TEST_CASE("single ReLU unit: two partitions split along its hyperplane") {
    Network net;
    DenseLayer d;
    d.weights = Mat(1, 2);
    d.weights << 1, 0;
    d.bias = Vec::Zero(1);
    net.layers.emplace_back(d);
    net.layers.emplace_back(ReluLayer{1});
    net.validate();

    SymbolicRep rep = fhat(net, square(-1, 1));
    REQUIRE(rep.partitions.size() == 2);
    CHECK(total_area(rep) == doctest::Approx(4.0).epsilon(1e-9));
    for (const auto& part : rep.partitions) {
        const Vec2 c = centroid(part.poly);
        REQUIRE(part.post.size() == part.poly.vertices.size());
        for (std::size_t i = 0; i < part.post.size(); ++i) {
            const double expect = std::max(0.0, part.poly.vertices[i].x());
            CHECK(part.post[i](0) == doctest::Approx(expect).epsilon(1e-12));
        }
        // Each side is sign-pure in the first coordinate.
        for (const auto& v : part.poly.vertices)
            CHECK((c.x() < 0 ? v.x() <= 1e-9 : v.x() >= -1e-9));
    }
}

TEST_CASE("hard-tanh on a thin strip: three partitions") {
    Network net;
    DenseLayer d;
    d.weights = Mat(1, 2);
    d.weights << 1, 0;
    d.bias = Vec::Zero(1);
    net.layers.emplace_back(d);
    net.layers.emplace_back(HardTanhLayer{1});
    net.validate();

    SymbolicRep rep = fhat(net, rect(-2, 0, 2, 0.1));
    REQUIRE(rep.partitions.size() == 3);
    CHECK(total_area(rep) == doctest::Approx(0.4).epsilon(1e-9));
    Rng rng(3);
    check_exact(net, rect(-2, 0, 2, 0.1), rep, rng);
    // Saturated pieces are constant at -1 / +1.
    int saturated_lo = 0, saturated_hi = 0;
    for (const auto& part : rep.partitions) {
        const double cx = centroid(part.poly).x();
        if (cx < -1.0) {
            ++saturated_lo;
            for (const auto& p : part.post) CHECK(p(0) == -1.0);
        } else if (cx > 1.0) {
            ++saturated_hi;
            for (const auto& p : part.post) CHECK(p(0) == 1.0);
        }
    }
    CHECK(saturated_lo == 1);
    CHECK(saturated_hi == 1);
}

TEST_CASE("maxpool of the two coordinates splits along the diagonal") {
    Network net;
    DenseLayer d;
    d.weights = Mat::Identity(2, 2);
    d.bias = Vec::Zero(2);
    net.layers.emplace_back(d);
    net.layers.emplace_back(MaxPoolLayer{{{0, 1}}});
    net.validate();

    SymbolicRep rep = fhat(net, square(-1, 1));
    REQUIRE(rep.partitions.size() == 2);
    CHECK(total_area(rep) == doctest::Approx(4.0).epsilon(1e-9));
    Rng rng(5);
    check_exact(net, square(-1, 1), rep, rng);
    for (const auto& part : rep.partitions) {
        const Vec2 c = centroid(part.poly);
        for (std::size_t i = 0; i < part.post.size(); ++i) {
            const Vec2 v = part.poly.vertices[i];
            const double expect = (c.x() > c.y()) ? v.x() : v.y();
            CHECK(part.post[i](0) == doctest::Approx(expect).epsilon(1e-9));
        }
    }
}

TEST_CASE("golden network over [0,4]^2: one interior hyperplane, two pieces") {
    Network net = golden_network();
    const PlanePolytope domain = square(0, 4);
    SymbolicRep rep = fhat(net, domain);
    // Units 2 and 3 are sign-fixed on the domain (x >= 0, y >= 0); only
    // -x + y - 0.5 changes sign, along y = x + 0.5.
    REQUIRE(rep.partitions.size() == 2);
    CHECK(total_area(rep) == doctest::Approx(16.0).epsilon(1e-9));
    Rng rng(7);
    check_exact(net, domain, rep, rng, 1000);

    // The affine maps of the two pieces match the hand calculation:
    // below the line: y1 = x + y, y2 = 1 - x - y;
    // above the line: y1 = 2y - 0.5, y2 = 1 - x - y.
    for (std::size_t i = 0; i < rep.partitions.size(); ++i) {
        AffineMap2 m = partition_map(rep, i);
        const Vec2 c = centroid(rep.partitions[i].poly);
        if (c.y() < c.x() + 0.5) {
            CHECK(m.J(0, 0) == doctest::Approx(1.0));
            CHECK(m.J(0, 1) == doctest::Approx(1.0));
            CHECK(m.c(0) == doctest::Approx(0.0));
        } else {
            CHECK(m.J(0, 0) == doctest::Approx(0.0));
            CHECK(m.J(0, 1) == doctest::Approx(2.0));
            CHECK(m.c(0) == doctest::Approx(-0.5));
        }
        CHECK(m.J(1, 0) == doctest::Approx(-1.0));
        CHECK(m.J(1, 1) == doctest::Approx(-1.0));
        CHECK(m.c(1) == doctest::Approx(1.0));
    }
}

TEST_CASE("coverage and exactness on random networks") {
    Rng rng(97);
    for (int t = 0; t < 12; ++t) {
        const int in = uniform_int(rng, 2, 8);
        Network net = random_network(rng, in, uniform_int(rng, 1, 4), 3, 8);
        PlanePolytope domain = random_polytope(rng, in);
        const double domain_area = area(domain);

        // Fold manually to check coverage after every extend step.
        SymbolicRep rep = init_rep(domain);
        for (const auto& layer : net.layers) {
            if (const auto* d = std::get_if<DenseLayer>(&layer))
                rep = extend_affine(rep, d->weights, d->bias);
            else if (std::holds_alternative<ReluLayer>(layer))
                rep = extend_relu(rep);
            else if (std::holds_alternative<HardTanhLayer>(layer))
                rep = extend_hardtanh(rep);
            CHECK(std::abs(total_area(rep) - domain_area) <= 1e-6 * domain_area);
        }
        check_exact(net, domain, rep, rng, 200);
    }
}

TEST_CASE("extend steps only refine: partition count is non-decreasing") {
    Rng rng(131);
    Network net = random_network(rng, 2, 2, 3, 6);
    SymbolicRep rep = init_rep(square(-2, 2));
    std::size_t prev = rep.partitions.size();
    for (const auto& layer : net.layers) {
        if (const auto* d = std::get_if<DenseLayer>(&layer))
            rep = extend_affine(rep, d->weights, d->bias);
        else if (std::holds_alternative<ReluLayer>(layer))
            rep = extend_relu(rep);
        else if (std::holds_alternative<HardTanhLayer>(layer))
            rep = extend_hardtanh(rep);
        CHECK(rep.partitions.size() >= prev);
        prev = rep.partitions.size();
    }
}

TEST_CASE("locate: closed containment, lowest index, outside throws") {
    Network net = golden_network();
    SymbolicRep rep = fhat(net, square(0, 4));
    // A point on the shared boundary y = x + 0.5 belongs to both pieces; the
    // lowest-index partition wins and interpolation there is consistent.
    const Vec2 on_line(1.0, 1.5);
    const std::size_t i = locate(rep, on_line);
    for (std::size_t j = 0; j < i; ++j) CHECK_FALSE(contains(rep.partitions[j].poly, on_line));
    CHECK((interp_post(rep, i, on_line) - eval(net, rep.embedding.embed(on_line)))
              .lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK_THROWS_AS(locate(rep, Vec2(5.0, 5.0)), OutsideDomain);
}

TEST_CASE("partition_map flags degenerate partitions and fits exactly") {
    Network net = golden_network();
    SymbolicRep rep = fhat(net, square(0, 4));
    Rng rng(11);
    for (std::size_t i = 0; i < rep.partitions.size(); ++i) {
        AffineMap2 m = partition_map(rep, i);
        for (int s = 0; s < 50; ++s) {
            const Vec2 u = sample_in_polygon(rng, rep.partitions[i].poly);
            CHECK((m.apply(u) - eval(net, rep.embedding.embed(u))).lpNorm<Eigen::Infinity>() <
                  1e-8);
        }
    }
}

TEST_CASE("masking symbolic rep follows activations, reports values") {
    Network net = golden_network();
    MaskingNetwork mnet = to_masking(net);
    // Perturb a value weight: partitions must stay those of the activation
    // network while post images follow the patched values.
    mnet.apply_value_delta({0, WeightId::Kind::Weight, 1, 1}, -6.0);
    const PlanePolytope domain = square(0, 4);
    SymbolicRep rep = fhat_masking(mnet, domain);
    SymbolicRep act_rep = fhat(net, domain);
    REQUIRE(rep.partitions.size() == act_rep.partitions.size());
    Rng rng(13);
    for (int s = 0; s < 500; ++s) {
        const Vec2 u = sample_in_polygon(rng, domain);
        const Vec direct = eval_masking(mnet, rep.embedding.embed(u)).values;
        CHECK((interp_post(rep, locate(rep, u), u) - direct).lpNorm<Eigen::Infinity>() <
              1e-6 * (1.0 + direct.lpNorm<Eigen::Infinity>()));
    }
}

TEST_CASE("partition cap raises CapError") {
    auto& cap = caps().max_partitions;
    const std::size_t saved = cap;
    cap = 1;
    Network net;
    DenseLayer d;
    d.weights = Mat(2, 2);
    d.weights << 1, 0, 0, 1;
    d.bias = Vec(2);
    d.bias << -0.5, -0.5;
    net.layers.emplace_back(d);
    net.layers.emplace_back(ReluLayer{2});
    CHECK_THROWS_AS(fhat(net, square(0, 1)), PartitionCapExceeded);
    cap = saved;
}

TEST_CASE("dump_json is stable across identical runs") {
    Network net = golden_network();
    const std::string a = dump_json(fhat(net, square(0, 4)));
    const std::string b = dump_json(fhat(net, square(0, 4)));
    CHECK(a == b);
    CHECK(a.find("vertices_2d") != std::string::npos);
    CHECK(a.find("post_vertices") != std::string::npos);
}
