#include "ddc/network.hpp"

#include "ddc/errors.hpp"

#include <json.hpp>

#include <cassert>
#include <cmath>
#include <fstream>
#include <random>
#include <string>

namespace ddc {

std::string to_string(Activation activation) {
    switch (activation) {
    case Activation::relu: return "relu";
    case Activation::linear: return "linear";
    }
    return "linear";
}

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "linear") return Activation::linear;
    throw InvalidArgument("unknown activation '" + name + "'");
}

std::vector<LayerSpec> mlp_specs(int input_dim, const std::vector<int>& hidden, int k) {
    std::vector<LayerSpec> specs;
    int previous = input_dim;
    for (int width : hidden) {
        specs.push_back({previous, width, Activation::relu});
        previous = width;
    }
    specs.push_back({previous, k, Activation::linear});
    return specs;
}

std::vector<LayerSpec> NetworkParams::specs() const {
    std::vector<LayerSpec> out;
    out.reserve(layers.size());
    for (const auto& layer : layers) out.push_back({layer.input_dim(), layer.output_dim(), layer.activation});
    return out;
}

NetworkParams init_network(const std::vector<LayerSpec>& specs, int indicator_dim, std::uint64_t seed,
                           double output_scale) {
    if (indicator_dim < 2) throw InvalidArgument("init_network: indicator dimension must be >= 2");
    if (specs.empty()) throw InvalidArgument("init_network: no layers");
    if (!(output_scale > 0.0)) throw InvalidArgument("init_network: output scale must be > 0");
    for (std::size_t l = 0; l < specs.size(); ++l) {
        if (specs[l].input_dim < 1 || specs[l].output_dim < 1) {
            throw InvalidArgument("init_network: layer " + std::to_string(l) + " has a zero dimension");
        }
        if (l > 0 && specs[l].input_dim != specs[l - 1].output_dim) {
            throw InvalidArgument("init_network: layer " + std::to_string(l) + " input does not match previous output");
        }
    }
    if (specs.back().output_dim != indicator_dim) {
        throw InvalidArgument("init_network: last layer outputs " + std::to_string(specs.back().output_dim) +
                              ", indicator dimension is " + std::to_string(indicator_dim));
    }

    std::mt19937_64 rng(seed);
    NetworkParams params;
    for (const auto& spec : specs) {
        DenseLayer layer;
        layer.activation = spec.activation;
        layer.weights.resize(spec.output_dim, spec.input_dim);
        std::normal_distribution<double> gauss(0.0, std::sqrt(2.0 / spec.input_dim));
        for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = gauss(rng);
        if (params.layers.size() + 1 == specs.size()) layer.weights *= output_scale;
        layer.bias = Vector::Zero(spec.output_dim);
        layer.weights_acc = Matrix::Zero(spec.output_dim, spec.input_dim);
        layer.bias_acc = Vector::Zero(spec.output_dim);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

Vector constraint_layer(const Vector& z) {
    Vector shifted = (z.array() - z.maxCoeff()).exp();
    const double norm = shifted.norm();
    assert(norm >= 1.0); // the max entry is exactly exp(0)
    return shifted / norm;
}

Matrix constraint_layer_rows(const Matrix& z, Matrix* shifted_exp) {
    Matrix shifted = (z.colwise() - z.rowwise().maxCoeff()).array().exp().matrix();
    Matrix out = shifted;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double norm = shifted.row(i).norm();
        assert(norm >= 1.0);
        out.row(i) /= norm;
    }
    if (shifted_exp != nullptr) *shifted_exp = std::move(shifted);
    return out;
}

Matrix constraint_layer_backward(const Matrix& indicators, const Matrix& upstream) {
    if (indicators.rows() != upstream.rows() || indicators.cols() != upstream.cols()) {
        throw InvalidArgument("constraint_layer_backward: shape mismatch");
    }
    // d(o)/d(z) = (I - o o^T) diag(o) for o = normalize(exp(z - max z)).
    const Vector along = (indicators.array() * upstream.array()).rowwise().sum();
    Matrix tangent = upstream - (indicators.array().colwise() * along.array()).matrix();
    return (indicators.array() * tangent.array()).matrix();
}

ForwardResult forward(const NetworkParams& params, const Matrix& batch) {
    if (params.layers.empty()) throw InvalidArgument("forward: empty network");
    if (batch.cols() != params.input_dim()) {
        throw InvalidArgument("forward: batch has " + std::to_string(batch.cols()) + " features, network expects " +
                              std::to_string(params.input_dim()));
    }

    ForwardResult result;
    auto& trace = result.trace;
    Matrix activation = batch;
    for (const auto& layer : params.layers) {
        Matrix z = activation * layer.weights.transpose();
        z.rowwise() += layer.bias.transpose();
        trace.inputs.push_back(std::move(activation));
        activation = layer.activation == Activation::relu ? Matrix(z.cwiseMax(0.0)) : z;
        trace.pre_activations.push_back(std::move(z));
    }
    trace.indicators = constraint_layer_rows(activation, &trace.shifted_exp);
    result.indicators = trace.indicators;
    return result;
}

Matrix predict(const NetworkParams& params, const Matrix& data) {
    constexpr Eigen::Index chunk = 2048;
    Matrix out(data.rows(), params.indicator_dim());
    for (Eigen::Index start = 0; start < data.rows(); start += chunk) {
        const Eigen::Index rows = std::min(chunk, data.rows() - start);
        out.middleRows(start, rows) = forward(params, data.middleRows(start, rows)).indicators;
    }
    return out;
}

Gradients backward(const NetworkParams& params, const ForwardTrace& trace, const Matrix& grad_indicators) {
    if (trace.pre_activations.size() != params.layers.size()) {
        throw InvalidArgument("backward: trace does not match network depth");
    }
    if (grad_indicators.rows() != trace.indicators.rows() || grad_indicators.cols() != trace.indicators.cols()) {
        throw InvalidArgument("backward: upstream gradient shape does not match indicators");
    }

    Gradients grads(params.layers.size());
    Matrix delta = constraint_layer_backward(trace.indicators, grad_indicators);
    for (std::size_t l = params.layers.size(); l-- > 0;) {
        const auto& layer = params.layers[l];
        if (layer.activation == Activation::relu) {
            delta = (trace.pre_activations[l].array() > 0.0).select(delta, 0.0);
        }
        grads[l].weights = delta.transpose() * trace.inputs[l];
        grads[l].bias = delta.colwise().sum().transpose();
        if (l > 0) delta = delta * layer.weights;
    }
    return grads;
}

namespace {

template <typename Param, typename Grad>
void rmsprop_update(Param& param, Param& acc, const Grad& grad, const RmsPropOptions& options) {
    acc.array() = options.decay * acc.array() + (1.0 - options.decay) * grad.array().square();
    param.array() -= options.learning_rate * grad.array() / (acc.array().sqrt() + options.epsilon);
}

} // namespace

void rmsprop_step(NetworkParams& params, const Gradients& gradients, const RmsPropOptions& options) {
    if (gradients.size() != params.layers.size()) throw InvalidArgument("rmsprop_step: gradient count mismatch");
    for (std::size_t l = 0; l < gradients.size(); ++l) {
        const auto& layer = params.layers[l];
        const auto& grad = gradients[l];
        if (grad.weights.rows() != layer.weights.rows() || grad.weights.cols() != layer.weights.cols() ||
            grad.bias.size() != layer.bias.size()) {
            throw InvalidArgument("rmsprop_step: gradient shape mismatch at layer " + std::to_string(l));
        }
        if (!grad.weights.allFinite() || !grad.bias.allFinite()) {
            throw TrainingDivergence("rmsprop_step: non-finite gradient at layer " + std::to_string(l), 0);
        }
    }
    for (std::size_t l = 0; l < gradients.size(); ++l) {
        auto& layer = params.layers[l];
        rmsprop_update(layer.weights, layer.weights_acc, gradients[l].weights, options);
        rmsprop_update(layer.bias, layer.bias_acc, gradients[l].bias, options);
    }
}

namespace {

using nlohmann::json;

template <typename Dense>
json flat(const Dense& m) {
    return json(std::vector<double>(m.data(), m.data() + m.size()));
}

template <typename Dense>
void unflat(const json& array, Dense& m, const std::string& what) {
    const auto values = array.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(values.size()) != m.size()) {
        throw FormatError("checkpoint: " + what + " has " + std::to_string(values.size()) + " values, expected " +
                          std::to_string(m.size()));
    }
    std::copy(values.begin(), values.end(), m.data());
}

} // namespace

void save_checkpoint(const NetworkParams& params, const std::filesystem::path& path) {
    json doc;
    doc["format"] = "ddc-checkpoint";
    doc["version"] = 1;
    doc["layers"] = json::array();
    for (const auto& layer : params.layers) {
        doc["layers"].push_back({
            {"input_dim", layer.input_dim()},
            {"output_dim", layer.output_dim()},
            {"activation", to_string(layer.activation)},
            {"weights", flat(layer.weights)},
            {"bias", flat(layer.bias)},
            {"weights_acc", flat(layer.weights_acc)},
            {"bias_acc", flat(layer.bias_acc)},
        });
    }
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write checkpoint " + path.string());
    out << doc.dump() << '\n';
}

NetworkParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open checkpoint " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw FormatError("checkpoint " + path.string() + ": " + e.what());
    }
    if (doc.value("format", "") != "ddc-checkpoint") throw FormatError("checkpoint: missing format tag");
    if (doc.value("version", 0) != 1) throw FormatError("checkpoint: unsupported version");

    NetworkParams params;
    try {
        for (const auto& entry : doc.at("layers")) {
            const int in_dim = entry.at("input_dim").get<int>();
            const int out_dim = entry.at("output_dim").get<int>();
            if (in_dim < 1 || out_dim < 1) throw FormatError("checkpoint: non-positive layer dimension");
            DenseLayer layer;
            layer.activation = activation_from_string(entry.at("activation").get<std::string>());
            layer.weights.resize(out_dim, in_dim);
            layer.bias.resize(out_dim);
            layer.weights_acc.resize(out_dim, in_dim);
            layer.bias_acc.resize(out_dim);
            unflat(entry.at("weights"), layer.weights, "weights");
            unflat(entry.at("bias"), layer.bias, "bias");
            unflat(entry.at("weights_acc"), layer.weights_acc, "weights_acc");
            unflat(entry.at("bias_acc"), layer.bias_acc, "bias_acc");
            if (!params.layers.empty() && params.layers.back().output_dim() != in_dim) {
                throw FormatError("checkpoint: layer chain is inconsistent");
            }
            params.layers.push_back(std::move(layer));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }
    if (params.layers.empty()) throw FormatError("checkpoint: no layers");
    return params;
}

} // namespace ddc
