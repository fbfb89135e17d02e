#pragma once

#include <string>
#include <vector>

#include "pwl/dnn.hpp"
#include "pwl/geom2d.hpp"

namespace pwl {

// One polygon of the domain partition together with the post-images of its
// vertices under the network prefix analyzed so far. The affine map on the
// polygon is stored extensionally through these vertex images.
struct LinearPartition {
    PlanePolytope poly;
    std::vector<Vec> post;  // index-aligned with poly.vertices
};

// Exact piecewise-affine representation of a network restricted to a 2D
// input polytope.
struct SymbolicRep {
    Embedding embedding;
    std::vector<LinearPartition> partitions;
    int layer_cursor = 0;

    double domain_area() const;
};

SymbolicRep init_rep(const PlanePolytope& domain);
SymbolicRep extend_affine(const SymbolicRep& rep, const Mat& weights, const Vec& bias);
SymbolicRep extend_relu(const SymbolicRep& rep);
SymbolicRep extend_hardtanh(const SymbolicRep& rep);
SymbolicRep extend_maxpool(const SymbolicRep& rep, const std::vector<std::vector<int>>& groups);

// Folds init_rep through the per-layer extend operations.
SymbolicRep fhat(const Network& net, const PlanePolytope& domain);

// Symbolic representation of a masking network: the partitioning follows the
// activation path; the stored post images are the value-path outputs.
SymbolicRep fhat_masking(const MaskingNetwork& mnet, const PlanePolytope& domain);

// Index of some partition containing u (closed containment, lowest index
// wins). Throws OutsideDomain.
std::size_t locate(const SymbolicRep& rep, const Vec2& u);

// Reconstructs the affine map of partition i in plane coordinates:
// post(u) = J * u + c.
struct AffineMap2 {
    Mat J;  // out x 2
    Vec c;  // out
    Vec apply(const Vec2& u) const { return J * u + c; }
};
AffineMap2 partition_map(const SymbolicRep& rep, std::size_t i);

// Interpolated post image of u within partition i.
Vec interp_post(const SymbolicRep& rep, std::size_t i, const Vec2& u);

// JSON array of {vertices_2d, post_vertices} per partition.
std::string dump_json(const SymbolicRep& rep);

}  // namespace pwl
