#pragma once

#include <Eigen/Dense>
#include <string>
#include <variant>
#include <vector>

#include "pwl/errors.hpp"
#include "pwl/geom2d.hpp"

namespace pwl {

struct DenseLayer {
    Mat weights;  // out x in
    Vec bias;     // out

    int in_dim() const { return static_cast<int>(weights.cols()); }
    int out_dim() const { return static_cast<int>(weights.rows()); }
};

struct ReluLayer {
    int width = 0;
};

struct HardTanhLayer {
    int width = 0;
};

struct MaxPoolLayer {
    // Disjoint index groups covering {0..in_dim-1}; output has one
    // coordinate per group.
    std::vector<std::vector<int>> groups;

    int in_dim() const;
    int out_dim() const { return static_cast<int>(groups.size()); }
};

using Layer = std::variant<DenseLayer, ReluLayer, HardTanhLayer, MaxPoolLayer>;

int layer_in_dim(const Layer& layer);
int layer_out_dim(const Layer& layer);

struct Network {
    std::vector<Layer> layers;

    int input_dim() const { return layer_in_dim(layers.front()); }
    int output_dim() const { return layer_out_dim(layers.back()); }

    // Validates dimension chaining and finiteness; throws on violation.
    void validate() const;
};

Vec eval(const Network& net, const Vec& x);

// Identifies a single value-parameter entry of a masking network.
struct WeightId {
    int layer = 0;  // index into MaskingNetwork::layers; must be a dense layer
    enum class Kind { Weight, Bias } kind = Kind::Weight;
    int row = 0;
    int col = 0;  // ignored for Bias

    friend auto operator<=>(const WeightId&, const WeightId&) = default;
};
std::string to_string(const WeightId& w);

// Feed-forward network carrying paired activation/value parameters. Dense
// layers hold (theta_a, theta_v); nonlinearities gate the value path by the
// activation path's region.
struct MaskingNetwork {
    struct MaskedDense {
        DenseLayer theta_a;
        DenseLayer theta_v;
    };
    struct MRelu {
        int width = 0;
    };
    struct MHardTanh {
        int width = 0;
    };
    using MLayer = std::variant<MaskedDense, MRelu, MHardTanh>;

    std::vector<MLayer> layers;

    int input_dim() const;
    int output_dim() const;

    const DenseLayer& value_layer(int layer_index) const;
    double value_entry(const WeightId& w) const;
    void apply_value_delta(const WeightId& w, double delta);

    // True when the activation parameters of both networks coincide exactly.
    static bool same_activation(const MaskingNetwork& a, const MaskingNetwork& b);
};

MaskingNetwork to_masking(const Network& net);

// Result of a masking-network forward pass. Masks are recorded per
// nonlinearity layer: ReLU masks are 0/1, hard-tanh masks are -1/0/+1
// (clamped low / pass-through / clamped high).
struct MaskingEval {
    Vec values;
    std::vector<std::vector<int>> masks;
};
MaskingEval eval_masking(const MaskingNetwork& mnet, const Vec& x);

// Affine response of the network output at fixed input x to a unit
// perturbation of the value parameter addressed by w: output(delta) =
// y0 + delta * g, with the masks held at their activation-path values.
struct DeltaResponse {
    Vec y0;
    Vec g;
};
DeltaResponse delta_response(const MaskingNetwork& mnet, const Vec& x, const WeightId& w);

// JSON (de)serialization. The loader rejects NaN/Inf entries and lowers
// batch-norm and 2D-convolution layers to dense layers.
Network load_network_json(const std::string& text);
Network load_network_file(const std::string& path);
std::string save_network_json(const Network& net);

}  // namespace pwl
