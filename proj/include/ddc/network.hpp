#pragma once

#include "ddc/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ddc {

enum class Activation { relu, linear };

std::string to_string(Activation activation);
Activation activation_from_string(const std::string& name);

struct LayerSpec {
    int input_dim = 0;
    int output_dim = 0;
    Activation activation = Activation::linear;
};

/// MLP layer chain `input_dim -> hidden... -> k`: ReLU on hidden layers,
/// linear on the last one (it feeds the constraint layer).
std::vector<LayerSpec> mlp_specs(int input_dim, const std::vector<int>& hidden, int k);

struct DenseLayer {
    Activation activation = Activation::linear;
    Matrix weights;      // output_dim x input_dim
    Vector bias;         // output_dim
    Matrix weights_acc;  // RMSProp running mean of squared gradients
    Vector bias_acc;

    int input_dim() const { return static_cast<int>(weights.cols()); }
    int output_dim() const { return static_cast<int>(weights.rows()); }
};

struct NetworkParams {
    std::vector<DenseLayer> layers;

    int input_dim() const { return layers.front().input_dim(); }
    int indicator_dim() const { return layers.back().output_dim(); }
    std::vector<LayerSpec> specs() const;
};

struct LayerGradient {
    Matrix weights;
    Vector bias;
};

using Gradients = std::vector<LayerGradient>;

/// Everything forward() computed that backward() needs.
struct ForwardTrace {
    std::vector<Matrix> inputs;          // inputs[l] is the input to layer l
    std::vector<Matrix> pre_activations; // pre_activations[l] = inputs[l] * W^T + b
    Matrix shifted_exp;                  // exp(z - max z), per row
    Matrix indicators;                   // shifted_exp with unit rows
};

/// He-style initialisation: weights ~ N(0, 2 / fan_in), zero biases and
/// accumulators. The last layer's draws are multiplied by `output_scale`.
/// Throws InvalidArgument for k < 2 or a broken spec chain.
NetworkParams init_network(const std::vector<LayerSpec>& specs, int indicator_dim, std::uint64_t seed,
                           double output_scale = 1.0);

/// Maps a raw score vector onto the non-negative unit sphere:
/// exp(z - max z) followed by L2 normalisation.
Vector constraint_layer(const Vector& z);

/// Row-wise constraint layer on a batch of scores.
Matrix constraint_layer_rows(const Matrix& z, Matrix* shifted_exp = nullptr);

/// Backpropagates dL/dI through the constraint layer for one batch.
/// With o the output row and g its upstream gradient: dL/dz = o .* (g - (o.g) o).
Matrix constraint_layer_backward(const Matrix& indicators, const Matrix& upstream);

struct ForwardResult {
    Matrix indicators; // one unit-norm non-negative row per pattern
    ForwardTrace trace;
};

ForwardResult forward(const NetworkParams& params, const Matrix& batch);

/// Indicators only, without keeping the trace. Works in chunks so large
/// datasets do not hold every hidden activation at once.
Matrix predict(const NetworkParams& params, const Matrix& data);

Gradients backward(const NetworkParams& params, const ForwardTrace& trace, const Matrix& grad_indicators);

struct RmsPropOptions {
    double learning_rate = 1e-3;
    double decay = 0.9;
    double epsilon = 1e-8; // added to sqrt(acc)
};

/// acc <- decay*acc + (1-decay)*g^2; w <- w - lr*g/(sqrt(acc)+eps).
/// Throws TrainingDivergence (epoch 0) on a non-finite gradient; the trainer
/// rethrows with the real epoch.
void rmsprop_step(NetworkParams& params, const Gradients& gradients, const RmsPropOptions& options);

/// Checkpoint container, JSON:
///   {"format": "ddc-checkpoint", "version": 1,
///    "layers": [{"input_dim", "output_dim", "activation",
///                "weights", "bias", "weights_acc", "bias_acc"}, ...]}
/// Matrices are flattened row-major. Doubles are written in shortest
/// round-trip form, so save/load is lossless.
void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path);
NetworkParams load_checkpoint(const std::filesystem::path& path);

} // namespace ddc
