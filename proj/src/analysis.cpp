#include "pwl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace pwl {

namespace {

std::vector<double> halfspace_values(const std::vector<Vec>& post, const Halfspace& h) {
    std::vector<double> v(post.size());
    for (std::size_t i = 0; i < post.size(); ++i) v[i] = h.normal.dot(post[i]) - h.offset;
    return v;
}

}  // namespace

std::vector<PlanePolytope> weakest_pre(const SymbolicRep& rep, const HalfspaceSet& y) {
    if (rep.partitions.empty()) return {};
    const int out = static_cast<int>(rep.partitions.front().post.front().size());
    for (const auto& h : y) {
        if (h.normal.size() != out) throw DimMismatch("halfspace dimension mismatch");
        if (!h.normal.allFinite() || !std::isfinite(h.offset))
            throw InputError("non-finite halfspace");
    }
    std::vector<PlanePolytope> result;
    for (const auto& part : rep.partitions) {
        std::optional<SplitPart> current = SplitPart{part.poly, part.post};
        for (const auto& h : y) {
            if (!current) break;
            std::vector<double> values = halfspace_values(current->payload, h);
            // Infeasible rows (zero normal, positive residual) kill the region.
            if (h.normal.lpNorm<Eigen::Infinity>() == 0.0) {
                if (-h.offset > 0.0) current.reset();
                continue;
            }
            PayloadSplitResult split = split_with_payload(current->poly, values, current->payload);
            current = std::move(split.neg);
        }
        if (current) result.push_back(std::move(current->poly));
    }
    return result;
}

std::vector<LabeledRegion> classify(const SymbolicRep& rep, int num_classes) {
    if (rep.partitions.empty()) return {};
    const int out = static_cast<int>(rep.partitions.front().post.front().size());
    if (num_classes != out) throw DimMismatch("num_classes must equal the output dimension");

    struct Item {
        PlanePolytope poly;
        std::vector<Vec> post;
    };
    std::deque<Item> work;
    for (const auto& p : rep.partitions) work.push_back({p.poly, p.post});

    std::vector<LabeledRegion> regions;
    while (!work.empty()) {
        Item item = std::move(work.front());
        work.pop_front();

        // Find a strictly mixed-sign pairwise difference, if any.
        int split_i = -1, split_j = -1;
        double best_score = -1.0;
        for (int i = 0; i < out && split_i < 0; ++i) {
            for (int j = i + 1; j < out; ++j) {
                std::vector<double> diff(item.post.size());
                double scale = 1.0;
                for (std::size_t v = 0; v < item.post.size(); ++v) {
                    diff[v] = item.post[v][i] - item.post[v][j];
                    scale = std::max(scale, std::abs(diff[v]));
                }
                const double tol = tolerances().split * scale;
                double max_pos = 0.0, max_neg = 0.0;
                for (double d : diff) {
                    max_pos = std::max(max_pos, d);
                    max_neg = std::max(max_neg, -d);
                }
                if (max_pos > tol && max_neg > tol && std::min(max_pos, max_neg) > best_score) {
                    best_score = std::min(max_pos, max_neg);
                    split_i = i;
                    split_j = j;
                }
            }
        }
        if (split_i >= 0) {
            std::vector<double> diff(item.post.size());
            for (std::size_t v = 0; v < item.post.size(); ++v)
                diff[v] = item.post[v][split_i] - item.post[v][split_j];
            PayloadSplitResult split = split_with_payload(item.poly, diff, item.post);
            if (split.neg) work.push_back({std::move(split.neg->poly), std::move(split.neg->payload)});
            if (split.pos) work.push_back({std::move(split.pos->poly), std::move(split.pos->payload)});
            if (work.size() + regions.size() > caps().max_partitions)
                throw PartitionCapExceeded("partition cap exceeded during classification");
            continue;
        }

        // Argmax is constant; evaluate it at the centroid (the vertex mean of
        // a partition maps to the mean of its post images under affine maps).
        Vec mean = Vec::Zero(out);
        for (const auto& p : item.post) mean += p;
        mean /= static_cast<double>(item.post.size());
        int label = 0;
        for (int k = 1; k < out; ++k)
            if (mean[k] > mean[label]) label = k;
        regions.push_back({std::move(item.poly), label});
    }

    std::sort(regions.begin(), regions.end(), [](const LabeledRegion& a, const LabeledRegion& b) {
        const auto& va = a.poly.vertices;
        const auto& vb = b.poly.vertices;
        for (std::size_t i = 0; i < std::min(va.size(), vb.size()); ++i) {
            if (va[i].x() != vb[i].x()) return va[i].x() < vb[i].x();
            if (va[i].y() != vb[i].y()) return va[i].y() < vb[i].y();
        }
        return va.size() < vb.size();
    });
    return regions;
}

std::vector<PostPolytope> strongest_post(const SymbolicRep& rep) {
    std::vector<PostPolytope> result;
    result.reserve(rep.partitions.size());
    for (const auto& part : rep.partitions) {
        PostPolytope pp;
        pp.vertices = part.post;
        const int out = static_cast<int>(part.post.front().size());
        if (out == 2) {
            std::vector<Vec2> pts;
            pts.reserve(part.post.size());
            for (const auto& p : part.post) pts.emplace_back(p[0], p[1]);
            Hull2D hull = convex_hull_2d(pts);
            if (hull.degenerate) {
                pp.degenerate = true;
            } else {
                pp.hull_2d = PlanePolytope{Embedding::identity2d(), hull.vertices};
            }
        }
        result.push_back(std::move(pp));
    }
    return result;
}

}  // namespace pwl
