#include "pwl/geom2d.hpp"

#include <algorithm>
#include <cmath>

namespace pwl {

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double coord_scale(const std::vector<Vec2>& pts) {
    double s = 1.0;
    for (const auto& p : pts) s = std::max(s, p.lpNorm<Eigen::Infinity>());
    return s;
}

// Signed shoelace area of an arbitrary vertex loop.
double loop_area(const std::vector<Vec2>& v) {
    double a = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2& p = v[i];
        const Vec2& q = v[(i + 1) % v.size()];
        a += cross2(p, q);
    }
    return 0.5 * a;
}

std::vector<Vec2> drop_duplicate_consecutive(std::vector<Vec2> v) {
    const double tol = tolerances().geo * coord_scale(v);
    std::vector<Vec2> out;
    for (const auto& p : v) {
        if (out.empty() || (p - out.back()).norm() > tol) out.push_back(p);
    }
    while (out.size() > 1 && (out.front() - out.back()).norm() <= tol) out.pop_back();
    return out;
}

}  // namespace

Embedding Embedding::identity2d() {
    Embedding e;
    e.origin = Vec::Zero(2);
    e.basis = Mat::Identity(2, 2);
    return e;
}

PlanePolytope make_plane_polytope(const std::vector<Vec>& ambient_vertices) {
    if (ambient_vertices.size() < 3) throw TooFewVertices("polygon needs at least 3 vertices");
    const auto& tol = tolerances();
    const int n = static_cast<int>(ambient_vertices.front().size());
    double scale = 1.0;
    for (const auto& v : ambient_vertices) {
        if (v.size() != n) throw DimMismatch("inconsistent ambient vertex dimensions");
        scale = std::max(scale, v.lpNorm<Eigen::Infinity>());
    }

    // Gram-Schmidt on the first two independent edge vectors.
    const Vec& origin = ambient_vertices.front();
    Vec b1;
    std::size_t first_edge = 0;
    for (std::size_t i = 1; i < ambient_vertices.size(); ++i) {
        Vec e = ambient_vertices[i] - origin;
        if (e.norm() > tol.geo * scale) {
            b1 = e.normalized();
            first_edge = i;
            break;
        }
    }
    if (first_edge == 0) throw Degenerate("all vertices coincide");
    Vec b2;
    bool found = false;
    for (std::size_t i = first_edge + 1; i < ambient_vertices.size(); ++i) {
        Vec e = ambient_vertices[i] - origin;
        Vec r = e - b1 * b1.dot(e);
        if (r.norm() > tol.geo * scale) {
            b2 = r.normalized();
            found = true;
            break;
        }
    }
    if (!found) throw Degenerate("vertices are collinear");

    Embedding emb;
    emb.origin = origin;
    emb.basis.resize(n, 2);
    emb.basis.col(0) = b1;
    emb.basis.col(1) = b2;

    std::vector<Vec2> plane;
    plane.reserve(ambient_vertices.size());
    for (const auto& v : ambient_vertices) {
        Vec2 u = emb.project(v);
        if ((emb.embed(u) - v).norm() > tol.geo * scale * 10.0)
            throw NonPlanar("vertices do not lie in a common plane");
        plane.push_back(u);
    }

    Hull2D hull = convex_hull_2d(plane);
    if (hull.degenerate) throw Degenerate("polygon has no area");
    PlanePolytope poly{emb, hull.vertices};
    if (area(poly) <= tol.geo) throw Degenerate("polygon area below tolerance");
    return poly;
}

PlanePolytope make_polygon_2d(const std::vector<Vec2>& vertices) {
    std::vector<Vec> ambient;
    ambient.reserve(vertices.size());
    for (const auto& v : vertices) ambient.push_back(Vec(v));
    PlanePolytope poly = make_plane_polytope(ambient);
    // Snap to the trivial embedding so plane coordinates equal input coordinates.
    PlanePolytope out{Embedding::identity2d(), {}};
    out.vertices.reserve(poly.vertices.size());
    for (const auto& u : poly.vertices) {
        Vec x = poly.embedding.embed(u);
        out.vertices.emplace_back(x[0], x[1]);
    }
    if (loop_area(out.vertices) < 0.0)
        std::reverse(out.vertices.begin(), out.vertices.end());
    return out;
}

void validate(const PlanePolytope& poly) {
    const auto& tol = tolerances();
    const Mat& b = poly.embedding.basis;
    if (b.cols() != 2 || b.rows() != poly.embedding.origin.size())
        throw DimMismatch("embedding basis shape mismatch");
    if (std::abs(b.col(0).norm() - 1.0) > tol.geo || std::abs(b.col(1).norm() - 1.0) > tol.geo ||
        std::abs(b.col(0).dot(b.col(1))) > tol.geo)
        throw InputError("embedding basis is not orthonormal");
    if (poly.vertices.size() < 3) throw TooFewVertices("polygon needs at least 3 vertices");
    if (area(poly) <= tol.geo) throw Degenerate("polygon area below tolerance");
    const std::size_t n = poly.vertices.size();
    double scale = 1.0;
    for (const auto& v : poly.vertices) scale = std::max(scale, v.lpNorm<Eigen::Infinity>());
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = poly.vertices[i];
        const Vec2& m = poly.vertices[(i + 1) % n];
        const Vec2& c = poly.vertices[(i + 2) % n];
        if ((m - a).norm() <= tol.geo * scale)
            throw InputError("duplicate consecutive vertices");
        if (cross2(m - a, c - m) < -tol.geo * scale * scale)
            throw InputError("polygon is not convex counterclockwise");
    }
}

double area(const PlanePolytope& poly) { return loop_area(poly.vertices); }

Vec2 centroid(const PlanePolytope& poly) {
    Vec2 c = Vec2::Zero();
    for (const auto& v : poly.vertices) c += v;
    return c / static_cast<double>(poly.vertices.size());
}

bool contains(const PlanePolytope& poly, const Vec2& u) {
    const double tol = tolerances().geo * (1.0 + u.norm());
    const auto& v = poly.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2& a = v[i];
        const Vec2& b = v[(i + 1) % v.size()];
        const Vec2 e = b - a;
        const double len = e.norm();
        if (len <= 0.0) continue;
        if (cross2(e, u - a) / len < -tol) return false;
    }
    return true;
}

PayloadSplitResult split_with_payload(const PlanePolytope& poly,
                                      const std::vector<double>& values,
                                      const std::vector<Vec>& payload) {
    const std::size_t n = poly.vertices.size();
    if (values.size() != n) throw LengthMismatch("one value per polygon vertex required");
    const bool has_payload = !payload.empty();
    if (has_payload && payload.size() != n)
        throw LengthMismatch("one payload vector per polygon vertex required");

    double vmax = 0.0;
    for (double v : values) vmax = std::max(vmax, std::abs(v));
    const double tol = tolerances().split * std::max(1.0, vmax);

    std::vector<Vec2> neg_v, pos_v;
    std::vector<Vec> neg_p, pos_p;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        const double vi = values[i];
        const double vj = values[j];
        if (vi <= tol) {
            neg_v.push_back(poly.vertices[i]);
            if (has_payload) neg_p.push_back(payload[i]);
        }
        if (vi >= -tol) {
            pos_v.push_back(poly.vertices[i]);
            if (has_payload) pos_p.push_back(payload[i]);
        }
        const bool crossing = (vi < -tol && vj > tol) || (vi > tol && vj < -tol);
        if (crossing) {
            const double t = vi / (vi - vj);
            const Vec2 p = poly.vertices[i] + t * (poly.vertices[j] - poly.vertices[i]);
            neg_v.push_back(p);
            pos_v.push_back(p);
            if (has_payload) {
                Vec q = payload[i] + t * (payload[j] - payload[i]);
                neg_p.push_back(q);
                pos_p.push_back(q);
            }
        }
    }

    // Slivers far below the split's own conservation tolerance are dropped;
    // anything larger is kept so that area(neg) + area(pos) = area(input).
    const double sliver = 1e-12 * std::max(1.0, area(poly));
    auto finish = [&](std::vector<Vec2>& verts, std::vector<Vec>& pays) -> std::optional<SplitPart> {
        const double dup_tol = tolerances().geo * coord_scale(poly.vertices);
        std::vector<Vec2> vs;
        std::vector<Vec> ps;
        for (std::size_t i = 0; i < verts.size(); ++i) {
            if (!vs.empty() && (verts[i] - vs.back()).norm() <= dup_tol) continue;
            vs.push_back(verts[i]);
            if (has_payload) ps.push_back(pays[i]);
        }
        while (vs.size() > 1 && (vs.front() - vs.back()).norm() <= dup_tol) {
            vs.pop_back();
            if (has_payload) ps.pop_back();
        }
        if (vs.size() < 3) return std::nullopt;
        PlanePolytope part{poly.embedding, vs};
        if (area(part) <= sliver) return std::nullopt;
        return SplitPart{std::move(part), std::move(ps)};
    };

    PayloadSplitResult out;
    out.neg = finish(neg_v, neg_p);
    out.pos = finish(pos_v, pos_p);
    return out;
}

SplitResult split_by_values(const PlanePolytope& poly, const std::vector<double>& values) {
    PayloadSplitResult r = split_with_payload(poly, values, {});
    SplitResult out;
    if (r.neg) out.neg = std::move(r.neg->poly);
    if (r.pos) out.pos = std::move(r.pos->poly);
    return out;
}

Hull2D convex_hull_2d(std::vector<Vec2> points) {
    if (points.empty()) throw TooFewVertices("hull of empty point set");
    const double scale = coord_scale(points);
    const double tol = tolerances().geo * scale;

    std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    points.erase(std::unique(points.begin(), points.end(),
                             [&](const Vec2& a, const Vec2& b) { return (a - b).norm() <= tol; }),
                 points.end());

    Hull2D out;
    if (points.size() == 1) {
        out.vertices = points;
        out.degenerate = true;
        return out;
    }

    // Andrew's monotone chain; collinear points are removed.
    const double turn_tol = tolerances().geo * scale * scale;
    auto build = [&](auto begin, auto end) {
        std::vector<Vec2> chain;
        for (auto it = begin; it != end; ++it) {
            while (chain.size() >= 2 &&
                   cross2(chain[chain.size() - 1] - chain[chain.size() - 2],
                          *it - chain[chain.size() - 2]) <= turn_tol)
                chain.pop_back();
            chain.push_back(*it);
        }
        return chain;
    };
    std::vector<Vec2> lower = build(points.begin(), points.end());
    std::vector<Vec2> upper = build(points.rbegin(), points.rend());

    std::vector<Vec2> hull(lower.begin(), lower.end() - 1);
    hull.insert(hull.end(), upper.begin(), upper.end() - 1);
    hull = drop_duplicate_consecutive(std::move(hull));

    out.vertices = std::move(hull);
    out.degenerate = out.vertices.size() < 3;
    if (out.degenerate && out.vertices.empty()) {
        out.vertices = {points.front()};
    }
    return out;
}

}  // namespace pwl
