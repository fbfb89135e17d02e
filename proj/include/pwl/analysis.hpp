#pragma once

#include <optional>
#include <vector>

#include "pwl/geom2d.hpp"
#include "pwl/symbolic.hpp"

namespace pwl {

struct LabeledRegion {
    PlanePolytope poly;
    int label = 0;
};

// Image of one partition: vertex images in output space, plus their planar
// hull when the output is two-dimensional.
struct PostPolytope {
    std::vector<Vec> vertices;
    std::optional<PlanePolytope> hull_2d;
    bool degenerate = false;
};

// All input polygons mapped into the halfspace conjunction Y; their union is
// exactly {x in X | f(x) in Y}.
std::vector<PlanePolytope> weakest_pre(const SymbolicRep& rep, const HalfspaceSet& y);

// Argmax classification regions; ties resolve to the lowest class index.
std::vector<LabeledRegion> classify(const SymbolicRep& rep, int num_classes);

// Exact image {f(x) | x in X} as a union of per-partition polytopes.
std::vector<PostPolytope> strongest_post(const SymbolicRep& rep);

}  // namespace pwl
