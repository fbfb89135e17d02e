#include "pwl/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pwl/dnn.hpp"

namespace pwl {

namespace {

using nlohmann::json;

json parse(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string("bad ") + what + " JSON: " + e.what());
    }
}

Vec json_to_vec(const json& j) {
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
    if (!v.allFinite()) throw InputError("non-finite vector entry");
    return v;
}

Mat json_to_mat(const json& j) {
    if (j.empty()) throw InputError("empty matrix");
    Mat m(j.size(), j[0].size());
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (j[r].size() != static_cast<std::size_t>(m.cols()))
            throw InputError("ragged matrix");
        for (std::size_t c = 0; c < j[r].size(); ++c)
            m(static_cast<int>(r), static_cast<int>(c)) = j[r][c].get<double>();
    }
    if (!m.allFinite()) throw InputError("non-finite matrix entry");
    return m;
}

json vec_to_json(const Vec& v) {
    json j = json::array();
    for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j;
}

HalfspaceSet halfspaces_from_json(const json& j, double strict_margin) {
    if (j.contains("argmax_class"))
        return argmax_halfspaces(j.at("argmax_class").get<int>(),
                                 j.at("num_classes").get<int>(), strict_margin);
    HalfspaceSet set;
    for (const json& jh : j.at("halfspaces")) {
        Halfspace h;
        h.normal = json_to_vec(jh.at("a"));
        h.offset = jh.at("b").get<double>();
        if (!std::isfinite(h.offset)) throw InputError("non-finite halfspace offset");
        set.push_back(std::move(h));
    }
    return set;
}

}  // namespace

PlanePolytope load_polytope_json(const std::string& text) {
    json doc = parse(text, "polytope");
    if (doc.contains("ambient_vertices")) {
        std::vector<Vec> verts;
        for (const json& jv : doc.at("ambient_vertices")) verts.push_back(json_to_vec(jv));
        return make_plane_polytope(verts);
    }
    PlanePolytope poly;
    poly.embedding.origin = json_to_vec(doc.at("origin"));
    const json& jb = doc.at("basis");
    if (jb.size() != 2) throw InputError("embedding basis must have two direction vectors");
    const int n = static_cast<int>(poly.embedding.origin.size());
    poly.embedding.basis.resize(n, 2);
    poly.embedding.basis.col(0) = json_to_vec(jb[0]);
    poly.embedding.basis.col(1) = json_to_vec(jb[1]);
    for (const json& jv : doc.at("vertices_2d")) {
        Vec v = json_to_vec(jv);
        if (v.size() != 2) throw InputError("vertices_2d entries must be pairs");
        poly.vertices.emplace_back(v[0], v[1]);
    }
    validate(poly);
    return poly;
}

PlanePolytope load_polytope_file(const std::string& path) {
    return load_polytope_json(read_file(path));
}

std::string save_polytope_json(const PlanePolytope& poly) {
    json doc;
    doc["ambient_dim"] = poly.embedding.ambient_dim();
    doc["origin"] = vec_to_json(poly.embedding.origin);
    doc["basis"] = {vec_to_json(poly.embedding.basis.col(0)),
                    vec_to_json(poly.embedding.basis.col(1))};
    doc["vertices_2d"] = json::array();
    for (const auto& u : poly.vertices) doc["vertices_2d"].push_back({u.x(), u.y()});
    return doc.dump(2) + "\n";
}

PatchSpec load_patch_spec_json(const std::string& text, double strict_margin) {
    json doc = parse(text, "patch spec");
    PatchSpec spec;
    for (const json& jp : doc) {
        PatchSpecPair pair;
        std::vector<Vec> verts;
        for (const json& jv : jp.at("input_polytope")) verts.push_back(json_to_vec(jv));
        pair.input = make_plane_polytope(verts);
        pair.output = halfspaces_from_json(
            jp.contains("output_halfspaces") ? json{{"halfspaces", jp.at("output_halfspaces")}}
                                             : jp,
            strict_margin);
        spec.push_back(std::move(pair));
    }
    return spec;
}

PatchSpec load_patch_spec_file(const std::string& path, double strict_margin) {
    return load_patch_spec_json(read_file(path), strict_margin);
}

HalfspaceSet load_halfspaces_json(const std::string& text, double strict_margin) {
    return halfspaces_from_json(parse(text, "halfspace set"), strict_margin);
}

HalfspaceSet load_halfspaces_file(const std::string& path, double strict_margin) {
    return load_halfspaces_json(read_file(path), strict_margin);
}

BMCProblem load_bmc_config_file(const std::string& path) {
    json doc = parse(read_file(path), "bmc config");
    BMCProblem p;
    std::filesystem::path base = std::filesystem::path(path).parent_path();
    std::string controller = doc.at("controller").get<std::string>();
    std::filesystem::path cpath(controller);
    if (cpath.is_relative()) cpath = base / cpath;
    p.controller = load_network_file(cpath.string());
    p.dynamics.A = json_to_mat(doc.at("A"));
    p.dynamics.B = json_to_mat(doc.at("B"));
    p.dynamics.c = json_to_vec(doc.at("c"));
    auto box = [&](const char* key) {
        Box2 b;
        Vec lo = json_to_vec(doc.at(key).at("lo"));
        Vec hi = json_to_vec(doc.at(key).at("hi"));
        if (lo.size() != 2 || hi.size() != 2) throw InputError("state boxes must be 2D");
        b.lo = Vec2(lo[0], lo[1]);
        b.hi = Vec2(hi[0], hi[1]);
        return b;
    };
    p.initial = box("s_i");
    p.safe = box("s_s");
    p.steps = doc.at("steps").get<int>();
    if (doc.contains("max_partitions"))
        caps().max_partitions = doc.at("max_partitions").get<std::size_t>();
    if (doc.contains("max_frontier"))
        caps().max_frontier = doc.at("max_frontier").get<std::size_t>();
    p.validate();
    return p;
}

std::string bmc_result_json(const BMCResult& result) {
    json doc;
    doc["status"] = result.status == BMCResult::Status::Verified ? "verified" : "violated";
    doc["steps_completed"] = result.steps_completed;
    doc["inductive"] = result.inductive;
    if (result.witness) {
        doc["violation_step"] = result.violation_step;
        doc["witness"] = {result.witness->x(), result.witness->y()};
    }
    doc["steps"] = json::array();
    for (const auto& s : result.stats) {
        // Wall-clock timings are deliberately not serialized: emitted files
        // must be byte-identical across runs.
        doc["steps"].push_back({{"step", s.step}, {"frontier_size", s.frontier_size}});
    }
    return doc.dump(2) + "\n";
}

std::string masking_network_json(const MaskingNetwork& mnet) {
    json doc;
    doc["layers"] = json::array();
    for (const auto& layer : mnet.layers) {
        json jl;
        if (const auto* d = std::get_if<MaskingNetwork::MaskedDense>(&layer)) {
            jl["type"] = "masked_dense";
            auto dense = [](const DenseLayer& l) {
                json j;
                j["weights"] = json::array();
                for (int r = 0; r < l.weights.rows(); ++r) {
                    json row = json::array();
                    for (int c = 0; c < l.weights.cols(); ++c) row.push_back(l.weights(r, c));
                    j["weights"].push_back(std::move(row));
                }
                j["bias"] = json::array();
                for (int i = 0; i < l.bias.size(); ++i) j["bias"].push_back(l.bias[i]);
                return j;
            };
            jl["theta_a"] = dense(d->theta_a);
            jl["theta_v"] = dense(d->theta_v);
        } else if (const auto* r = std::get_if<MaskingNetwork::MRelu>(&layer)) {
            jl["type"] = "mrelu";
            jl["width"] = r->width;
        } else {
            jl["type"] = "mhard_tanh";
            jl["width"] = std::get<MaskingNetwork::MHardTanh>(layer).width;
        }
        doc["layers"].push_back(std::move(jl));
    }
    return doc.dump(2) + "\n";
}

MaskingNetwork load_masking_network_json(const std::string& text) {
    json doc = parse(text, "masking network");
    MaskingNetwork m;
    for (const json& jl : doc.at("layers")) {
        const std::string type = jl.at("type").get<std::string>();
        if (type == "masked_dense") {
            auto dense = [](const json& j) {
                return DenseLayer{json_to_mat(j.at("weights")), json_to_vec(j.at("bias"))};
            };
            MaskingNetwork::MaskedDense d{dense(jl.at("theta_a")), dense(jl.at("theta_v"))};
            if (d.theta_a.weights.rows() != d.theta_v.weights.rows() ||
                d.theta_a.weights.cols() != d.theta_v.weights.cols())
                throw InputError("theta_a and theta_v shapes differ");
            m.layers.push_back(std::move(d));
        } else if (type == "mrelu") {
            m.layers.push_back(MaskingNetwork::MRelu{jl.at("width").get<int>()});
        } else if (type == "mhard_tanh") {
            m.layers.push_back(MaskingNetwork::MHardTanh{jl.at("width").get<int>()});
        } else {
            throw InputError("unsupported masking layer type: " + type);
        }
    }
    return m;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path);
    out << content;
}

}  // namespace pwl
