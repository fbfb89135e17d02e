#include "pwl/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include <json.hpp>

namespace pwl {

namespace {

struct Item {
    PlanePolytope poly;
    std::vector<Vec> post;
};

// Rotate the vertex loop so the lexicographically smallest vertex comes
// first; keeps results independent of split order.
void canonicalize(Item& item) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < item.poly.vertices.size(); ++i) {
        const Vec2& a = item.poly.vertices[i];
        const Vec2& b = item.poly.vertices[best];
        if (a.x() < b.x() || (a.x() == b.x() && a.y() < b.y())) best = i;
    }
    std::rotate(item.poly.vertices.begin(), item.poly.vertices.begin() + best,
                item.poly.vertices.end());
    std::rotate(item.post.begin(), item.post.begin() + best, item.post.end());
}

bool vertex_list_less(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i].x() != b[i].x()) return a[i].x() < b[i].x();
        if (a[i].y() != b[i].y()) return a[i].y() < b[i].y();
    }
    return a.size() < b.size();
}

std::vector<Item> to_items(const SymbolicRep& rep) {
    std::vector<Item> items;
    items.reserve(rep.partitions.size());
    for (const auto& p : rep.partitions) items.push_back({p.poly, p.post});
    return items;
}

SymbolicRep from_items(const SymbolicRep& base, std::vector<Item> items, int cursor_advance) {
    for (auto& item : items) canonicalize(item);
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        return vertex_list_less(a.poly.vertices, b.poly.vertices);
    });
    SymbolicRep out;
    out.embedding = base.embedding;
    out.layer_cursor = base.layer_cursor + cursor_advance;
    out.partitions.reserve(items.size());
    for (auto& item : items)
        out.partitions.push_back({std::move(item.poly), std::move(item.post)});
    return out;
}

std::vector<double> dim_values(const Item& item, int k, double shift) {
    std::vector<double> v(item.post.size());
    for (std::size_t i = 0; i < item.post.size(); ++i) v[i] = item.post[i][k] + shift;
    return v;
}

double sign_tol(const std::vector<double>& v) {
    double m = 1.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return tolerances().split * m;
}

// Strictly-mixed-sign test plus a robustness score: the smaller of the two
// extreme magnitudes. Larger scores give numerically safer split lines.
struct MixedSign {
    bool mixed = false;
    double score = 0.0;
};
MixedSign mixed_sign(const std::vector<double>& v) {
    const double tol = sign_tol(v);
    double max_pos = 0.0, max_neg = 0.0;
    for (double x : v) {
        max_pos = std::max(max_pos, x);
        max_neg = std::max(max_neg, -x);
    }
    MixedSign m;
    m.mixed = max_pos > tol && max_neg > tol;
    m.score = std::min(max_pos, max_neg);
    return m;
}

void check_cap(std::size_t pending) {
    if (pending > caps().max_partitions)
        throw PartitionCapExceeded("partition cap exceeded during extend");
}

// Generic sign-refinement worklist: split_of picks the next split values for
// an item (or none when the item is sign-pure), finalize rewrites the post
// vectors of a pure item.
template <typename SplitOf, typename Finalize>
std::vector<Item> refine(std::vector<Item> in, SplitOf&& split_of, Finalize&& finalize) {
    std::deque<Item> work(std::make_move_iterator(in.begin()), std::make_move_iterator(in.end()));
    std::vector<Item> done;
    while (!work.empty()) {
        Item item = std::move(work.front());
        work.pop_front();
        std::optional<std::vector<double>> values = split_of(item);
        if (!values) {
            finalize(item);
            done.push_back(std::move(item));
            continue;
        }
        PayloadSplitResult parts = split_with_payload(item.poly, *values, item.post);
        if (parts.neg) work.push_back({std::move(parts.neg->poly), std::move(parts.neg->payload)});
        if (parts.pos) work.push_back({std::move(parts.pos->poly), std::move(parts.pos->payload)});
        check_cap(work.size() + done.size());
    }
    return done;
}

// ReLU refinement over post dimensions [0, width). With `masking` set, the
// post vectors are (activation, value) stacks of size 2*width and the mask
// derived from the activation half is applied to both halves.
std::vector<Item> refine_relu(std::vector<Item> items, int width, bool masking) {
    auto split_of = [&](const Item& item) -> std::optional<std::vector<double>> {
        int best_k = -1;
        double best_score = -1.0;
        for (int k = 0; k < width; ++k) {
            std::vector<double> v = dim_values(item, k, 0.0);
            MixedSign m = mixed_sign(v);
            if (m.mixed && m.score > best_score) {
                best_score = m.score;
                best_k = k;
            }
        }
        if (best_k < 0) return std::nullopt;
        return dim_values(item, best_k, 0.0);
    };
    auto finalize = [&](Item& item) {
        for (int k = 0; k < width; ++k) {
            std::vector<double> v = dim_values(item, k, 0.0);
            const double tol = sign_tol(v);
            const bool keep = std::any_of(v.begin(), v.end(), [&](double x) { return x > tol; });
            if (keep) continue;
            for (auto& post : item.post) {
                post[k] = 0.0;
                if (masking) post[k + width] = 0.0;
            }
        }
    };
    return refine(std::move(items), split_of, finalize);
}

std::vector<Item> refine_hardtanh(std::vector<Item> items, int width, bool masking) {
    auto split_of = [&](const Item& item) -> std::optional<std::vector<double>> {
        int best_k = -1;
        double best_shift = 0.0, best_score = -1.0;
        for (int k = 0; k < width; ++k) {
            for (double shift : {-1.0, 1.0}) {
                std::vector<double> v = dim_values(item, k, shift);
                MixedSign m = mixed_sign(v);
                if (m.mixed && m.score > best_score) {
                    best_score = m.score;
                    best_k = k;
                    best_shift = shift;
                }
            }
        }
        if (best_k < 0) return std::nullopt;
        return dim_values(item, best_k, best_shift);
    };
    auto finalize = [&](Item& item) {
        for (int k = 0; k < width; ++k) {
            std::vector<double> above = dim_values(item, k, -1.0);  // v - 1
            std::vector<double> below = dim_values(item, k, 1.0);   // v + 1
            const double tol_hi = sign_tol(above);
            const double tol_lo = sign_tol(below);
            const bool clamp_hi =
                std::all_of(above.begin(), above.end(), [&](double x) { return x >= -tol_hi; });
            const bool clamp_lo =
                std::all_of(below.begin(), below.end(), [&](double x) { return x <= tol_lo; });
            for (auto& post : item.post) {
                double& a = post[k];
                if (clamp_hi)
                    a = 1.0;
                else if (clamp_lo)
                    a = -1.0;
                else
                    a = std::clamp(a, -1.0, 1.0);
                if (masking) {
                    double& v = post[k + width];
                    if (clamp_hi)
                        v = 1.0;
                    else if (clamp_lo)
                        v = -1.0;
                }
            }
        }
    };
    return refine(std::move(items), split_of, finalize);
}

std::vector<Item> refine_maxpool(std::vector<Item> items,
                                 const std::vector<std::vector<int>>& groups) {
    // Index of a group member dominating every other member at all vertices
    // (ties to the lowest index), or -1 when the argmax is not yet constant.
    auto dominant = [](const Item& item, const std::vector<int>& group) -> int {
        for (int i : group) {
            bool dominates = true;
            for (int j : group) {
                if (j == i) continue;
                std::vector<double> diff(item.post.size());
                for (std::size_t v = 0; v < item.post.size(); ++v)
                    diff[v] = item.post[v][i] - item.post[v][j];
                const double tol = sign_tol(diff);
                for (double d : diff) {
                    if (d < -tol) {
                        dominates = false;
                        break;
                    }
                }
                if (!dominates) break;
            }
            if (dominates) return i;
        }
        return -1;
    };
    auto split_of = [&](const Item& item) -> std::optional<std::vector<double>> {
        int best_i = -1, best_j = -1;
        double best_score = -1.0;
        for (const auto& group : groups) {
            if (group.size() < 2) continue;
            if (dominant(item, group) >= 0) continue;
            for (std::size_t a = 0; a < group.size(); ++a) {
                for (std::size_t b = a + 1; b < group.size(); ++b) {
                    std::vector<double> diff(item.post.size());
                    for (std::size_t v = 0; v < item.post.size(); ++v)
                        diff[v] = item.post[v][group[a]] - item.post[v][group[b]];
                    MixedSign m = mixed_sign(diff);
                    if (m.mixed && m.score > best_score) {
                        best_score = m.score;
                        best_i = group[a];
                        best_j = group[b];
                    }
                }
            }
        }
        if (best_i < 0) return std::nullopt;
        std::vector<double> diff(item.post.size());
        for (std::size_t v = 0; v < item.post.size(); ++v)
            diff[v] = item.post[v][best_i] - item.post[v][best_j];
        return diff;
    };
    auto finalize = [&](Item& item) {
        std::vector<int> winners(groups.size());
        for (std::size_t g = 0; g < groups.size(); ++g) {
            winners[g] = dominant(item, groups[g]);
            if (winners[g] < 0) throw InternalError("maxpool refinement left a mixed argmax");
        }
        for (auto& post : item.post) {
            Vec out(groups.size());
            for (std::size_t g = 0; g < groups.size(); ++g)
                out[static_cast<int>(g)] = post[winners[g]];
            post = std::move(out);
        }
    };
    return refine(std::move(items), split_of, finalize);
}

}  // namespace

double SymbolicRep::domain_area() const {
    double a = 0.0;
    for (const auto& p : partitions) a += area(p.poly);
    return a;
}

SymbolicRep init_rep(const PlanePolytope& domain) {
    SymbolicRep rep;
    rep.embedding = domain.embedding;
    LinearPartition part;
    part.poly = domain;
    part.post.reserve(domain.vertices.size());
    for (const auto& u : domain.vertices) part.post.push_back(domain.embedding.embed(u));
    rep.partitions.push_back(std::move(part));
    return rep;
}

SymbolicRep extend_affine(const SymbolicRep& rep, const Mat& weights, const Vec& bias) {
    if (rep.partitions.empty()) throw InputError("empty symbolic representation");
    if (weights.cols() != rep.partitions.front().post.front().size())
        throw DimMismatch("affine layer input dimension mismatch");
    if (bias.size() != weights.rows()) throw DimMismatch("bias length mismatch");
    std::vector<Item> items = to_items(rep);
    for (auto& item : items)
        for (auto& post : item.post) post = weights * post + bias;
    return from_items(rep, std::move(items), 1);
}

SymbolicRep extend_relu(const SymbolicRep& rep) {
    const int width = static_cast<int>(rep.partitions.front().post.front().size());
    return from_items(rep, refine_relu(to_items(rep), width, false), 1);
}

SymbolicRep extend_hardtanh(const SymbolicRep& rep) {
    const int width = static_cast<int>(rep.partitions.front().post.front().size());
    return from_items(rep, refine_hardtanh(to_items(rep), width, false), 1);
}

SymbolicRep extend_maxpool(const SymbolicRep& rep, const std::vector<std::vector<int>>& groups) {
    return from_items(rep, refine_maxpool(to_items(rep), groups), 1);
}

SymbolicRep fhat(const Network& net, const PlanePolytope& domain) {
    net.validate();
    if (net.input_dim() != domain.embedding.ambient_dim())
        throw DimMismatch("network input dimension does not match the domain embedding");
    SymbolicRep rep = init_rep(domain);
    for (const auto& layer : net.layers) {
        if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            rep = extend_affine(rep, d->weights, d->bias);
        } else if (std::get_if<ReluLayer>(&layer)) {
            rep = extend_relu(rep);
        } else if (std::get_if<HardTanhLayer>(&layer)) {
            rep = extend_hardtanh(rep);
        } else {
            rep = extend_maxpool(rep, std::get<MaxPoolLayer>(layer).groups);
        }
    }
    return rep;
}

SymbolicRep fhat_masking(const MaskingNetwork& mnet, const PlanePolytope& domain) {
    if (mnet.input_dim() != domain.embedding.ambient_dim())
        throw DimMismatch("network input dimension does not match the domain embedding");
    SymbolicRep rep = init_rep(domain);
    // Stack (activation, value) per vertex; refine on the activation half.
    std::vector<Item> items = to_items(rep);
    for (auto& item : items) {
        for (auto& post : item.post) {
            Vec stacked(2 * post.size());
            stacked << post, post;
            post = std::move(stacked);
        }
    }
    int cursor = 0;
    for (const auto& layer : mnet.layers) {
        if (const auto* d = std::get_if<MaskingNetwork::MaskedDense>(&layer)) {
            const int in = d->theta_a.in_dim();
            const int out = d->theta_a.out_dim();
            for (auto& item : items) {
                for (auto& post : item.post) {
                    if (post.size() != 2 * in) throw DimMismatch("masking layer dim mismatch");
                    Vec next(2 * out);
                    next.head(out) = d->theta_a.weights * post.head(in) + d->theta_a.bias;
                    next.tail(out) = d->theta_v.weights * post.tail(in) + d->theta_v.bias;
                    post = std::move(next);
                }
            }
        } else if (const auto* r = std::get_if<MaskingNetwork::MRelu>(&layer)) {
            items = refine_relu(std::move(items), r->width, true);
        } else {
            const auto& h = std::get<MaskingNetwork::MHardTanh>(layer);
            items = refine_hardtanh(std::move(items), h.width, true);
        }
        ++cursor;
    }
    const int out = mnet.output_dim();
    for (auto& item : items)
        for (auto& post : item.post) post = Vec(post.tail(out));
    SymbolicRep result = from_items(rep, std::move(items), 0);
    result.layer_cursor = cursor;
    return result;
}

std::size_t locate(const SymbolicRep& rep, const Vec2& u) {
    for (std::size_t i = 0; i < rep.partitions.size(); ++i)
        if (contains(rep.partitions[i].poly, u)) return i;
    throw OutsideDomain("point lies outside the restriction domain");
}

AffineMap2 partition_map(const SymbolicRep& rep, std::size_t i) {
    const LinearPartition& part = rep.partitions.at(i);
    if (area(part.poly) <= tolerances().geo)
        throw DegeneratePartition("partition polygon has no usable area");
    const int m = static_cast<int>(part.poly.vertices.size());
    const int out = static_cast<int>(part.post.front().size());
    Mat design(m, 3);
    Mat target(m, out);
    for (int r = 0; r < m; ++r) {
        design(r, 0) = part.poly.vertices[r].x();
        design(r, 1) = part.poly.vertices[r].y();
        design(r, 2) = 1.0;
        target.row(r) = part.post[r].transpose();
    }
    Mat theta = design.colPivHouseholderQr().solve(target);  // 3 x out
    double scale = std::max(1.0, target.lpNorm<Eigen::Infinity>());
    if (((design * theta - target).lpNorm<Eigen::Infinity>()) > 1e-6 * scale)
        throw InternalError("partition post images are not affine-consistent");
    AffineMap2 map;
    map.J = theta.topRows(2).transpose();
    map.c = theta.row(2).transpose();
    return map;
}

Vec interp_post(const SymbolicRep& rep, std::size_t i, const Vec2& u) {
    return partition_map(rep, i).apply(u);
}

std::string dump_json(const SymbolicRep& rep) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& part : rep.partitions) {
        nlohmann::json jp;
        jp["vertices_2d"] = nlohmann::json::array();
        for (const auto& v : part.poly.vertices)
            jp["vertices_2d"].push_back({v.x(), v.y()});
        jp["post_vertices"] = nlohmann::json::array();
        for (const auto& p : part.post) {
            nlohmann::json row = nlohmann::json::array();
            for (int k = 0; k < p.size(); ++k) row.push_back(p[k]);
            jp["post_vertices"].push_back(std::move(row));
        }
        arr.push_back(std::move(jp));
    }
    return arr.dump(2) + "\n";
}

}  // namespace pwl
