#pragma once

#include <limits>
#include <vector>

#include "pwl/dnn.hpp"
#include "pwl/geom2d.hpp"

namespace pwl {

// One (input polytope, output halfspace-conjunction) requirement.
struct PatchSpecPair {
    PlanePolytope input;
    HalfspaceSet output;
};
using PatchSpec = std::vector<PatchSpecPair>;

// Vertex of a linear partition of the network over some spec polytope,
// embedded back into input space. The mask pattern of the originating
// partition is kept so the partition's affine map can be reproduced even on
// shared boundaries, where a pointwise forward pass sees only one side.
struct KeyPoint {
    Vec x;
    int spec_index = 0;
    std::vector<std::vector<int>> masks;
};

// Feasible set of a single-weight perturbation for one key point.
struct DeltaInterval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool empty = false;

    bool contains(double x) const { return !empty && x >= lo && x <= hi; }
    static DeltaInterval none() { return {0.0, 0.0, true}; }
};

struct SweepResult {
    DeltaInterval best;
    std::size_t count = 0;
};

struct PatchHistoryEntry {
    int iteration = 0;
    WeightId weight;
    double delta = 0.0;
    std::size_t satisfied = 0;
    std::size_t total = 0;
};

struct PatchResult {
    std::vector<std::pair<WeightId, double>> applied;
    std::vector<PatchHistoryEntry> history;  // entry 0 is the unpatched state
    MaskingNetwork network;
};

struct VerifyPairReport {
    std::size_t satisfied_vertices = 0;
    std::size_t total_vertices = 0;
    bool satisfied = false;
};
struct VerifyReport {
    std::vector<VerifyPairReport> pairs;
    std::size_t satisfied_pairs = 0;
    bool all_satisfied = false;
};

// Partition vertices of the network over every spec polytope, deduplicated
// per pair.
std::vector<KeyPoint> build_key_points(const MaskingNetwork& mnet, const PatchSpec& spec);

// Per key point, the interval of single-weight perturbations delta for which
// the key point's output constraints all hold.
std::vector<DeltaInterval> weight_intervals(const MaskingNetwork& mnet,
                                            const std::vector<KeyPoint>& key_points,
                                            const PatchSpec& spec, const WeightId& w);

// Maximal-coverage stabbing interval over a set of delta intervals.
SweepResult sweep_max(const std::vector<DeltaInterval>& intervals);

// Minimum-|delta| point of a nonempty interval. Throws EmptyInterval.
double choose_delta(const DeltaInterval& best);

// Weight-wise greedy repair: per iteration, the single-weight change with
// the highest post-patch key-point satisfaction count is applied.
PatchResult greedy_patch(const MaskingNetwork& mnet, const PatchSpec& spec,
                         const std::vector<WeightId>& candidates, int iterations);

// Exact spec check of a values-patched network via the key-point theorem.
// Throws ActivationChanged when the activation parameters differ from the
// reference network's.
VerifyReport verify_patch(const MaskingNetwork& patched, const MaskingNetwork& reference,
                          const PatchSpec& spec);

// All value-parameter entries (matrix + bias) of one dense layer, in
// row-major order.
std::vector<WeightId> layer_candidates(const MaskingNetwork& mnet, int layer_index);

// Expands an argmax-class requirement into num_classes - 1 halfspaces
// y_j - y_k <= -margin for all j != k.
HalfspaceSet argmax_halfspaces(int cls, int num_classes, double margin = 0.0);

}  // namespace pwl
