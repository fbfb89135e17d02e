#pragma once

// Shared fixtures for the test suites: deterministic RNG, random convex
// polygons/planes, random PWL networks, and the expository two-layer network
// used as the golden instance across suites.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "pwl/dnn.hpp"
#include "pwl/geom2d.hpp"

namespace pwl::testutil {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Convex polygon with 3..max_k vertices: sorted angles on a jittered circle.
inline std::vector<Vec2> random_convex_vertices(Rng& rng, int max_k = 8, double radius = 2.0) {
    const int k = uniform_int(rng, 3, max_k);
    std::vector<double> angles(k);
    for (auto& a : angles) a = uniform(rng, 0.0, 2.0 * M_PI);
    std::sort(angles.begin(), angles.end());
    // Reject near-duplicate angles that would produce slivers.
    for (int i = 1; i < k; ++i)
        if (angles[i] - angles[i - 1] < 0.15) angles[i] = angles[i - 1] + 0.15;
    std::vector<Vec2> verts;
    const Vec2 center(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0));
    for (double a : angles) {
        const double r = radius * uniform(rng, 0.6, 1.0);
        verts.emplace_back(center + Vec2(r * std::cos(a), r * std::sin(a)));
    }
    return verts;
}

inline PlanePolytope random_polygon_2d(Rng& rng, int max_k = 8, double radius = 2.0) {
    return make_polygon_2d(random_convex_vertices(rng, max_k, radius));
}

// Random 2D plane polytope embedded in R^n.
inline PlanePolytope random_polytope(Rng& rng, int ambient_dim, int max_k = 8,
                                     double radius = 2.0) {
    Mat m(ambient_dim, 2);
    for (int i = 0; i < ambient_dim; ++i)
        for (int j = 0; j < 2; ++j) m(i, j) = uniform(rng, -1.0, 1.0);
    const Mat q = Eigen::HouseholderQR<Mat>(m).householderQ() * Mat::Identity(ambient_dim, 2);
    Vec origin(ambient_dim);
    for (int i = 0; i < ambient_dim; ++i) origin(i) = uniform(rng, -1.0, 1.0);
    std::vector<Vec> ambient;
    for (const auto& u : random_convex_vertices(rng, max_k, radius))
        ambient.push_back(origin + q * u);
    return make_plane_polytope(ambient);
}

inline DenseLayer random_dense(Rng& rng, int out, int in, double scale = 1.0) {
    DenseLayer d;
    d.weights = Mat(out, in);
    d.bias = Vec(out);
    for (int r = 0; r < out; ++r) {
        for (int c = 0; c < in; ++c) d.weights(r, c) = uniform(rng, -scale, scale);
        d.bias(r) = uniform(rng, -scale, scale);
    }
    return d;
}

// Dense layers interleaved with ReLU / hard-tanh nonlinearities.
inline Network random_network(Rng& rng, int input_dim, int output_dim, int num_dense,
                              int max_width = 16) {
    Network net;
    int in = input_dim;
    for (int i = 0; i < num_dense; ++i) {
        const bool last = (i == num_dense - 1);
        const int out = last ? output_dim : uniform_int(rng, 2, max_width);
        net.layers.emplace_back(random_dense(rng, out, in));
        if (!last) {
            if (uniform_int(rng, 0, 1) == 0)
                net.layers.emplace_back(ReluLayer{out});
            else
                net.layers.emplace_back(HardTanhLayer{out});
        }
        in = out;
    }
    net.validate();
    return net;
}

// Expository repair network: two inputs, three ReLU units, two outputs.
//   hidden pre-activations: (-x1 + x2 - 0.5, x1, x2)
//   output: (h1 + h2 + h3, 1 - h2 - h3)
inline Network golden_network() {
    Network net;
    DenseLayer d1;
    d1.weights = Mat(3, 2);
    d1.weights << -1, 1, 1, 0, 0, 1;
    d1.bias = Vec(3);
    d1.bias << -0.5, 0, 0;
    DenseLayer d2;
    d2.weights = Mat(2, 3);
    d2.weights << 1, 1, 1, 0, -1, -1;
    d2.bias = Vec(2);
    d2.bias << 0, 1;
    net.layers.emplace_back(d1);
    net.layers.emplace_back(ReluLayer{3});
    net.layers.emplace_back(d2);
    net.validate();
    return net;
}

inline PlanePolytope square(double lo, double hi) {
    return make_polygon_2d({Vec2(lo, lo), Vec2(hi, lo), Vec2(hi, hi), Vec2(lo, hi)});
}

inline PlanePolytope rect(double x0, double y0, double x1, double y1) {
    return make_polygon_2d({Vec2(x0, y0), Vec2(x1, y0), Vec2(x1, y1), Vec2(x0, y1)});
}

inline Vec2 sample_in_polygon(Rng& rng, const PlanePolytope& poly) {
    // Fan decomposition from vertex 0, triangle picked by area.
    std::vector<double> cum;
    double total = 0.0;
    const auto& v = poly.vertices;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        const Vec2 a = v[i] - v[0], b = v[i + 1] - v[0];
        total += 0.5 * std::abs(a.x() * b.y() - a.y() * b.x());
        cum.push_back(total);
    }
    const double pick = uniform(rng, 0.0, total);
    std::size_t tri = std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin();
    double r1 = uniform(rng, 0.0, 1.0), r2 = uniform(rng, 0.0, 1.0);
    if (r1 + r2 > 1.0) {
        r1 = 1.0 - r1;
        r2 = 1.0 - r2;
    }
    return v[0] + r1 * (v[tri + 1] - v[0]) + r2 * (v[tri + 2] - v[0]);
}

}  // namespace pwl::testutil
