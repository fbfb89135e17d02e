#include "pwl/patch.hpp"

#include <algorithm>
#include <cmath>

#include "pwl/symbolic.hpp"

namespace pwl {

namespace {

// Value-path forward pass with the nonlinearity masks forced, plus the
// affine delta response for an optional addressed weight.
DeltaResponse masked_response(const MaskingNetwork& mnet, const Vec& x,
                              const std::vector<std::vector<int>>& masks,
                              const WeightId* w) {
    Vec v = x;
    Vec g = Vec::Zero(x.size());
    std::size_t mi = 0;
    for (int li = 0; li < static_cast<int>(mnet.layers.size()); ++li) {
        const auto& layer = mnet.layers[li];
        if (const auto* d = std::get_if<MaskingNetwork::MaskedDense>(&layer)) {
            Vec gn = d->theta_v.weights * g;
            if (w && li == w->layer)
                gn[w->row] += w->kind == WeightId::Kind::Bias ? 1.0 : v[w->col];
            v = d->theta_v.weights * v + d->theta_v.bias;
            g = std::move(gn);
        } else if (const auto* r = std::get_if<MaskingNetwork::MRelu>(&layer)) {
            const auto& mask = masks.at(mi++);
            for (int i = 0; i < r->width; ++i) {
                if (!mask[i]) {
                    v[i] = 0.0;
                    g[i] = 0.0;
                }
            }
        } else {
            const auto& h = std::get<MaskingNetwork::MHardTanh>(layer);
            const auto& mask = masks.at(mi++);
            for (int i = 0; i < h.width; ++i) {
                if (mask[i] != 0) {
                    v[i] = static_cast<double>(mask[i]);
                    g[i] = 0.0;
                }
            }
        }
    }
    return {std::move(v), std::move(g)};
}

double residual_tol(const Halfspace& h, const Vec& y) {
    return tolerances().split *
           (1.0 + std::abs(h.offset) + h.normal.cwiseAbs().dot(y.cwiseAbs()));
}

bool point_satisfies(const Vec& y, const HalfspaceSet& set) {
    for (const auto& h : set) {
        if (h.normal.dot(y) - h.offset > residual_tol(h, y)) return false;
    }
    return true;
}

}  // namespace

std::vector<KeyPoint> build_key_points(const MaskingNetwork& mnet, const PatchSpec& spec) {
    std::vector<KeyPoint> out;
    for (std::size_t si = 0; si < spec.size(); ++si) {
        if (spec[si].output.empty()) throw InputError("patch spec pair has no output constraint");
        SymbolicRep rep = fhat_masking(mnet, spec[si].input);
        std::vector<KeyPoint> pair_points;
        for (const auto& part : rep.partitions) {
            // The centroid is interior, so its pointwise masks are the
            // partition's masks.
            Vec center = part.poly.embedding.embed(centroid(part.poly));
            std::vector<std::vector<int>> masks = eval_masking(mnet, center).masks;
            for (const auto& u : part.poly.vertices) {
                Vec x = part.poly.embedding.embed(u);
                const double tol = tolerances().geo * (1.0 + x.norm());
                bool dup = false;
                for (const auto& existing : pair_points) {
                    if (existing.masks == masks && (existing.x - x).norm() <= tol) {
                        dup = true;
                        break;
                    }
                }
                if (!dup)
                    pair_points.push_back({std::move(x), static_cast<int>(si), masks});
            }
        }
        for (auto& kp : pair_points) out.push_back(std::move(kp));
    }
    return out;
}

std::vector<DeltaInterval> weight_intervals(const MaskingNetwork& mnet,
                                            const std::vector<KeyPoint>& key_points,
                                            const PatchSpec& spec, const WeightId& w) {
    mnet.value_entry(w);  // validates w
    std::vector<DeltaInterval> intervals;
    intervals.reserve(key_points.size());
    for (std::size_t i = 0; i < key_points.size(); ++i) {
        const KeyPoint& kp = key_points[i];
        DeltaResponse resp = masked_response(mnet, kp.x, kp.masks, &w);
        DeltaInterval iv;
        for (const auto& h : spec.at(kp.spec_index).output) {
            const double coef = h.normal.dot(resp.g);
            const double resid = h.normal.dot(resp.y0) - h.offset;
            const double coef_tol =
                tolerances().split * (1.0 + h.normal.norm() * resp.g.norm());
            if (std::abs(coef) <= coef_tol) {
                // Constraint does not depend on delta.
                if (resid > residual_tol(h, resp.y0)) {
                    iv = DeltaInterval::none();
                    break;
                }
                continue;
            }
            const double bound = -resid / coef;
            if (coef > 0.0)
                iv.hi = std::min(iv.hi, bound);
            else
                iv.lo = std::max(iv.lo, bound);
            if (iv.lo > iv.hi) {
                iv = DeltaInterval::none();
                break;
            }
        }
        intervals.push_back(iv);
    }
    return intervals;
}

SweepResult sweep_max(const std::vector<DeltaInterval>& intervals) {
    std::vector<double> candidates;
    for (const auto& iv : intervals) {
        if (iv.empty) continue;
        if (std::isfinite(iv.lo)) candidates.push_back(iv.lo);
        if (std::isfinite(iv.hi)) candidates.push_back(iv.hi);
    }
    SweepResult result;
    if (candidates.empty()) {
        // Only full lines (and empties): every point is optimal.
        for (const auto& iv : intervals)
            if (!iv.empty) ++result.count;
        return result;
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    double best_point = candidates.front();
    std::size_t best_count = 0;
    for (double x : candidates) {
        std::size_t count = 0;
        for (const auto& iv : intervals)
            if (iv.contains(x)) ++count;
        if (count > best_count) {
            best_count = count;
            best_point = x;
        }
    }
    // The optimal stabbing interval is the intersection of the stabbed set.
    DeltaInterval best;
    for (const auto& iv : intervals) {
        if (!iv.contains(best_point)) continue;
        best.lo = std::max(best.lo, iv.lo);
        best.hi = std::min(best.hi, iv.hi);
    }
    result.best = best;
    result.count = best_count;
    return result;
}

double choose_delta(const DeltaInterval& best) {
    if (best.empty) throw EmptyInterval("cannot pick a delta from an empty interval");
    if (best.lo <= 0.0 && best.hi >= 0.0) return 0.0;
    if (best.lo > 0.0) return best.lo;
    return best.hi;
}

PatchResult greedy_patch(const MaskingNetwork& mnet, const PatchSpec& spec,
                         const std::vector<WeightId>& candidates, int iterations) {
    if (candidates.empty()) throw InputError("no candidate weights to patch");
    for (const auto& w : candidates) mnet.value_entry(w);

    PatchResult result;
    result.network = mnet;
    std::vector<KeyPoint> kps = build_key_points(mnet, spec);
    const std::size_t total = kps.size();

    auto satisfied_count = [&](const MaskingNetwork& net) {
        std::size_t n = 0;
        for (const KeyPoint& kp : kps) {
            Vec y = masked_response(net, kp.x, kp.masks, nullptr).y0;
            if (point_satisfies(y, spec.at(kp.spec_index).output)) ++n;
        }
        return n;
    };

    std::size_t current = satisfied_count(result.network);
    result.history.push_back({0, WeightId{}, 0.0, current, total});

    for (int iter = 1; iter <= iterations && current < total; ++iter) {
        bool have_best = false;
        WeightId best_w;
        double best_delta = 0.0;
        std::size_t best_count = current;
        for (const auto& w : candidates) {
            SweepResult sweep =
                sweep_max(weight_intervals(result.network, kps, spec, w));
            if (sweep.count == 0) continue;
            const double delta = choose_delta(sweep.best);
            const bool better =
                sweep.count > best_count ||
                (have_best && sweep.count == best_count &&
                 (std::abs(delta) < std::abs(best_delta) ||
                  (std::abs(delta) == std::abs(best_delta) && w < best_w)));
            if (better) {
                have_best = true;
                best_w = w;
                best_delta = delta;
                best_count = sweep.count;
            }
        }
        if (!have_best || best_count <= current) break;  // no strict improvement
        result.network.apply_value_delta(best_w, best_delta);
        result.applied.emplace_back(best_w, best_delta);
        current = satisfied_count(result.network);
        result.history.push_back({iter, best_w, best_delta, current, total});
    }
    return result;
}

VerifyReport verify_patch(const MaskingNetwork& patched, const MaskingNetwork& reference,
                          const PatchSpec& spec) {
    if (!MaskingNetwork::same_activation(patched, reference))
        throw ActivationChanged("activation parameters differ; key-point check is not valid");
    VerifyReport report;
    for (const auto& pair : spec) {
        SymbolicRep rep = fhat_masking(patched, pair.input);
        VerifyPairReport pr;
        for (const auto& part : rep.partitions) {
            for (const auto& post : part.post) {
                ++pr.total_vertices;
                if (point_satisfies(post, pair.output)) ++pr.satisfied_vertices;
            }
        }
        pr.satisfied = pr.satisfied_vertices == pr.total_vertices;
        if (pr.satisfied) ++report.satisfied_pairs;
        report.pairs.push_back(pr);
    }
    report.all_satisfied = report.satisfied_pairs == report.pairs.size();
    return report;
}

std::vector<WeightId> layer_candidates(const MaskingNetwork& mnet, int layer_index) {
    const DenseLayer& d = mnet.value_layer(layer_index);
    std::vector<WeightId> out;
    for (int r = 0; r < d.out_dim(); ++r)
        for (int c = 0; c < d.in_dim(); ++c)
            out.push_back({layer_index, WeightId::Kind::Weight, r, c});
    for (int r = 0; r < d.out_dim(); ++r)
        out.push_back({layer_index, WeightId::Kind::Bias, r, 0});
    return out;
}

HalfspaceSet argmax_halfspaces(int cls, int num_classes, double margin) {
    if (cls < 0 || cls >= num_classes) throw InputError("argmax class out of range");
    HalfspaceSet set;
    for (int j = 0; j < num_classes; ++j) {
        if (j == cls) continue;
        Halfspace h;
        h.normal = Vec::Zero(num_classes);
        h.normal[j] = 1.0;
        h.normal[cls] = -1.0;
        h.offset = -margin;
        set.push_back(std::move(h));
    }
    return set;
}

}  // namespace pwl
