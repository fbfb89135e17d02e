#include "pwl/dnn.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pwl {

namespace {

using nlohmann::json;

bool finite_vec(const Vec& v) { return v.allFinite(); }
bool finite_mat(const Mat& m) { return m.allFinite(); }

}  // namespace

int MaxPoolLayer::in_dim() const {
    int n = 0;
    for (const auto& g : groups) n += static_cast<int>(g.size());
    return n;
}

int layer_in_dim(const Layer& layer) {
    return std::visit(
        [](const auto& l) -> int {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, DenseLayer>)
                return l.in_dim();
            else if constexpr (std::is_same_v<T, MaxPoolLayer>)
                return l.in_dim();
            else
                return l.width;
        },
        layer);
}

int layer_out_dim(const Layer& layer) {
    return std::visit(
        [](const auto& l) -> int {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, DenseLayer>)
                return l.out_dim();
            else if constexpr (std::is_same_v<T, MaxPoolLayer>)
                return l.out_dim();
            else
                return l.width;
        },
        layer);
}

void Network::validate() const {
    if (layers.empty()) throw InputError("network has no layers");
    int dim = layer_in_dim(layers.front());
    for (const auto& layer : layers) {
        if (layer_in_dim(layer) != dim) throw DimMismatch("layer dimensions do not chain");
        if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            if (!finite_mat(d->weights) || !finite_vec(d->bias))
                throw InputError("non-finite layer parameters");
            if (d->bias.size() != d->weights.rows())
                throw DimMismatch("bias length does not match weight rows");
        }
        if (const auto* p = std::get_if<MaxPoolLayer>(&layer)) {
            std::vector<bool> seen(p->in_dim(), false);
            for (const auto& g : p->groups) {
                if (g.empty()) throw InputError("empty maxpool group");
                for (int i : g) {
                    if (i < 0 || i >= p->in_dim() || seen[i])
                        throw InputError("maxpool groups must partition the input indices");
                    seen[i] = true;
                }
            }
        }
        dim = layer_out_dim(layer);
    }
}

Vec eval(const Network& net, const Vec& x) {
    if (x.size() != net.input_dim()) throw DimMismatch("input dimension mismatch");
    Vec v = x;
    for (const auto& layer : net.layers) {
        if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            v = d->weights * v + d->bias;
        } else if (std::get_if<ReluLayer>(&layer)) {
            v = v.cwiseMax(0.0);
        } else if (std::get_if<HardTanhLayer>(&layer)) {
            v = v.cwiseMax(-1.0).cwiseMin(1.0);
        } else {
            const auto& p = std::get<MaxPoolLayer>(layer);
            Vec out(p.out_dim());
            for (std::size_t g = 0; g < p.groups.size(); ++g) {
                double m = v[p.groups[g][0]];
                for (int i : p.groups[g]) m = std::max(m, v[i]);
                out[static_cast<int>(g)] = m;
            }
            v = out;
        }
    }
    return v;
}

std::string to_string(const WeightId& w) {
    std::ostringstream os;
    os << "L" << w.layer << (w.kind == WeightId::Kind::Bias ? ":b[" : ":w[") << w.row;
    if (w.kind == WeightId::Kind::Weight) os << "," << w.col;
    os << "]";
    return os.str();
}

int MaskingNetwork::input_dim() const {
    return std::visit(
        [](const auto& l) -> int {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, MaskedDense>)
                return l.theta_a.in_dim();
            else
                return l.width;
        },
        layers.front());
}

int MaskingNetwork::output_dim() const {
    return std::visit(
        [](const auto& l) -> int {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, MaskedDense>)
                return l.theta_a.out_dim();
            else
                return l.width;
        },
        layers.back());
}

const DenseLayer& MaskingNetwork::value_layer(int layer_index) const {
    if (layer_index < 0 || layer_index >= static_cast<int>(layers.size()))
        throw InvalidWeightId("layer index out of range");
    const auto* d = std::get_if<MaskedDense>(&layers[layer_index]);
    if (!d) throw InvalidWeightId("addressed layer is not a dense layer");
    return d->theta_v;
}

double MaskingNetwork::value_entry(const WeightId& w) const {
    const DenseLayer& d = value_layer(w.layer);
    if (w.row < 0 || w.row >= d.out_dim()) throw InvalidWeightId("row out of range");
    if (w.kind == WeightId::Kind::Bias) return d.bias[w.row];
    if (w.col < 0 || w.col >= d.in_dim()) throw InvalidWeightId("column out of range");
    return d.weights(w.row, w.col);
}

void MaskingNetwork::apply_value_delta(const WeightId& w, double delta) {
    value_entry(w);  // bounds check
    auto& d = std::get<MaskedDense>(layers[w.layer]).theta_v;
    if (w.kind == WeightId::Kind::Bias)
        d.bias[w.row] += delta;
    else
        d.weights(w.row, w.col) += delta;
}

bool MaskingNetwork::same_activation(const MaskingNetwork& a, const MaskingNetwork& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        const auto* da = std::get_if<MaskedDense>(&a.layers[i]);
        const auto* db = std::get_if<MaskedDense>(&b.layers[i]);
        if ((da == nullptr) != (db == nullptr)) return false;
        if (!da) continue;
        if (da->theta_a.weights != db->theta_a.weights) return false;
        if (da->theta_a.bias != db->theta_a.bias) return false;
    }
    return true;
}

MaskingNetwork to_masking(const Network& net) {
    net.validate();
    MaskingNetwork m;
    for (const auto& layer : net.layers) {
        if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            m.layers.push_back(MaskingNetwork::MaskedDense{*d, *d});
        } else if (const auto* r = std::get_if<ReluLayer>(&layer)) {
            m.layers.push_back(MaskingNetwork::MRelu{r->width});
        } else if (const auto* h = std::get_if<HardTanhLayer>(&layer)) {
            m.layers.push_back(MaskingNetwork::MHardTanh{h->width});
        } else {
            throw UnsupportedLayer("maxpool is not supported in masking networks");
        }
    }
    return m;
}

MaskingEval eval_masking(const MaskingNetwork& mnet, const Vec& x) {
    if (x.size() != mnet.input_dim()) throw DimMismatch("input dimension mismatch");
    Vec a = x, v = x;
    MaskingEval out;
    for (const auto& layer : mnet.layers) {
        if (const auto* d = std::get_if<MaskingNetwork::MaskedDense>(&layer)) {
            a = d->theta_a.weights * a + d->theta_a.bias;
            v = d->theta_v.weights * v + d->theta_v.bias;
        } else if (const auto* r = std::get_if<MaskingNetwork::MRelu>(&layer)) {
            std::vector<int> mask(r->width);
            for (int i = 0; i < r->width; ++i) {
                mask[i] = a[i] > 0.0 ? 1 : 0;
                if (!mask[i]) {
                    a[i] = 0.0;
                    v[i] = 0.0;
                }
            }
            out.masks.push_back(std::move(mask));
        } else {
            const auto& h = std::get<MaskingNetwork::MHardTanh>(layer);
            std::vector<int> mask(h.width);
            for (int i = 0; i < h.width; ++i) {
                if (a[i] <= -1.0) {
                    mask[i] = -1;
                    a[i] = -1.0;
                    v[i] = -1.0;
                } else if (a[i] >= 1.0) {
                    mask[i] = 1;
                    a[i] = 1.0;
                    v[i] = 1.0;
                } else {
                    mask[i] = 0;
                }
            }
            out.masks.push_back(std::move(mask));
        }
    }
    out.values = std::move(v);
    return out;
}

DeltaResponse delta_response(const MaskingNetwork& mnet, const Vec& x, const WeightId& w) {
    mnet.value_entry(w);  // validates w
    if (x.size() != mnet.input_dim()) throw DimMismatch("input dimension mismatch");
    Vec a = x, v = x;
    Vec g = Vec::Zero(x.size());
    for (int li = 0; li < static_cast<int>(mnet.layers.size()); ++li) {
        const auto& layer = mnet.layers[li];
        if (const auto* d = std::get_if<MaskingNetwork::MaskedDense>(&layer)) {
            Vec gn = d->theta_v.weights * g;
            if (li == w.layer) {
                // Unit perturbation of the addressed entry, seeded with the
                // value-path input coefficient (1 for bias entries).
                gn[w.row] += w.kind == WeightId::Kind::Bias ? 1.0 : v[w.col];
            }
            a = d->theta_a.weights * a + d->theta_a.bias;
            v = d->theta_v.weights * v + d->theta_v.bias;
            g = std::move(gn);
        } else if (const auto* r = std::get_if<MaskingNetwork::MRelu>(&layer)) {
            for (int i = 0; i < r->width; ++i) {
                if (a[i] <= 0.0) {
                    a[i] = 0.0;
                    v[i] = 0.0;
                    g[i] = 0.0;
                }
            }
        } else {
            const auto& h = std::get<MaskingNetwork::MHardTanh>(layer);
            for (int i = 0; i < h.width; ++i) {
                if (a[i] <= -1.0) {
                    a[i] = -1.0;
                    v[i] = -1.0;
                    g[i] = 0.0;
                } else if (a[i] >= 1.0) {
                    a[i] = 1.0;
                    v[i] = 1.0;
                    g[i] = 0.0;
                }
            }
        }
    }
    return {std::move(v), std::move(g)};
}

namespace {

Vec json_to_vec(const json& j) {
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
    if (!finite_vec(v)) throw InputError("non-finite value in network file");
    return v;
}

Mat json_to_mat(const json& j) {
    if (j.empty()) throw InputError("empty weight matrix");
    Mat m(j.size(), j[0].size());
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (j[r].size() != static_cast<std::size_t>(m.cols()))
            throw InputError("ragged weight matrix");
        for (std::size_t c = 0; c < j[r].size(); ++c)
            m(static_cast<int>(r), static_cast<int>(c)) = j[r][c].get<double>();
    }
    if (!finite_mat(m)) throw InputError("non-finite value in network file");
    return m;
}

json vec_to_json(const Vec& v) {
    json j = json::array();
    for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j;
}

json mat_to_json(const Mat& m) {
    json j = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        j.push_back(row);
    }
    return j;
}

// Lowers a batch-norm layer to an equivalent dense layer.
DenseLayer lower_batch_norm(const json& j) {
    Vec mean = json_to_vec(j.at("mean"));
    Vec var = json_to_vec(j.at("variance"));
    Vec gamma = j.contains("gamma") ? json_to_vec(j.at("gamma")) : Vec::Ones(mean.size());
    Vec beta = j.contains("beta") ? json_to_vec(j.at("beta")) : Vec::Zero(mean.size());
    const double eps = j.value("epsilon", 1e-5);
    const int n = static_cast<int>(mean.size());
    if (var.size() != n || gamma.size() != n || beta.size() != n)
        throw InputError("batch_norm parameter lengths disagree");
    DenseLayer d;
    d.weights = Mat::Zero(n, n);
    d.bias = Vec(n);
    for (int i = 0; i < n; ++i) {
        const double s = gamma[i] / std::sqrt(var[i] + eps);
        d.weights(i, i) = s;
        d.bias[i] = beta[i] - s * mean[i];
    }
    return d;
}

// Lowers a 2D convolution (NCHW, zero padding) to a dense layer over the
// flattened input.
DenseLayer lower_conv2d(const json& j) {
    const int ic = j.at("in_channels").get<int>();
    const int ih = j.at("in_height").get<int>();
    const int iw = j.at("in_width").get<int>();
    const int sh = j.value("stride_h", 1);
    const int sw = j.value("stride_w", 1);
    const int ph = j.value("pad_h", 0);
    const int pw = j.value("pad_w", 0);
    const json& kernel = j.at("kernel");  // [oc][ic][kh][kw]
    const int oc = static_cast<int>(kernel.size());
    if (oc == 0) throw InputError("conv2d kernel is empty");
    const int kh = static_cast<int>(kernel[0][0].size());
    const int kw = static_cast<int>(kernel[0][0][0].size());
    const int oh = (ih + 2 * ph - kh) / sh + 1;
    const int ow = (iw + 2 * pw - kw) / sw + 1;
    if (oh <= 0 || ow <= 0) throw InputError("conv2d output is empty");
    Vec bias = j.contains("bias") ? json_to_vec(j.at("bias")) : Vec::Zero(oc);
    if (bias.size() != oc) throw InputError("conv2d bias length disagrees");

    DenseLayer d;
    d.weights = Mat::Zero(oc * oh * ow, ic * ih * iw);
    d.bias = Vec(oc * oh * ow);
    for (int o = 0; o < oc; ++o) {
        for (int y = 0; y < oh; ++y) {
            for (int x = 0; x < ow; ++x) {
                const int row = (o * oh + y) * ow + x;
                d.bias[row] = bias[o];
                for (int c = 0; c < ic; ++c) {
                    for (int ky = 0; ky < kh; ++ky) {
                        for (int kx = 0; kx < kw; ++kx) {
                            const int sy = y * sh + ky - ph;
                            const int sx = x * sw + kx - pw;
                            if (sy < 0 || sy >= ih || sx < 0 || sx >= iw) continue;
                            const int col = (c * ih + sy) * iw + sx;
                            const double wv = kernel[o][c][ky][kx].get<double>();
                            if (!std::isfinite(wv)) throw InputError("non-finite conv2d kernel");
                            d.weights(row, col) += wv;
                        }
                    }
                }
            }
        }
    }
    return d;
}

}  // namespace

Network load_network_json(const std::string& text) {
    json doc;
    Network net;
    int dim = -1;
    try {
        doc = json::parse(text);
        for (const json& jl : doc.at("layers")) {
            const std::string type = jl.at("type").get<std::string>();
            if (type == "dense") {
                DenseLayer d{json_to_mat(jl.at("weights")), json_to_vec(jl.at("bias"))};
                dim = d.out_dim();
                net.layers.emplace_back(std::move(d));
            } else if (type == "batch_norm") {
                DenseLayer d = lower_batch_norm(jl);
                dim = d.out_dim();
                net.layers.emplace_back(std::move(d));
            } else if (type == "conv2d") {
                DenseLayer d = lower_conv2d(jl);
                dim = d.out_dim();
                net.layers.emplace_back(std::move(d));
            } else if (type == "relu" || type == "hard_tanh") {
                int width = jl.value("width", dim);
                if (width <= 0)
                    throw InputError("cannot infer width of leading nonlinearity layer");
                if (type == "relu")
                    net.layers.emplace_back(ReluLayer{width});
                else
                    net.layers.emplace_back(HardTanhLayer{width});
                dim = width;
            } else if (type == "maxpool") {
                MaxPoolLayer p;
                for (const json& g : jl.at("groups"))
                    p.groups.push_back(g.get<std::vector<int>>());
                dim = p.out_dim();
                net.layers.emplace_back(std::move(p));
            } else {
                // Smooth nonlinearities have no exact piecewise-linear
                // representation; reject them at the door.
                throw UnsupportedLayer("unsupported layer type: " + type);
            }
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("bad network JSON: ") + e.what());
    }
    net.validate();
    return net;
}

Network load_network_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open network file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_network_json(ss.str());
}

std::string save_network_json(const Network& net) {
    json doc;
    doc["layers"] = json::array();
    for (const auto& layer : net.layers) {
        json jl;
        if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            jl["type"] = "dense";
            jl["weights"] = mat_to_json(d->weights);
            jl["bias"] = vec_to_json(d->bias);
        } else if (const auto* r = std::get_if<ReluLayer>(&layer)) {
            jl["type"] = "relu";
            jl["width"] = r->width;
        } else if (const auto* h = std::get_if<HardTanhLayer>(&layer)) {
            jl["type"] = "hard_tanh";
            jl["width"] = h->width;
        } else {
            const auto& p = std::get<MaxPoolLayer>(layer);
            jl["type"] = "maxpool";
            jl["groups"] = p.groups;
        }
        doc["layers"].push_back(std::move(jl));
    }
    return doc.dump(2) + "\n";
}

}  // namespace pwl
