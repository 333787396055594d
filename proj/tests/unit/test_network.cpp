#include "ddc/errors.hpp"
#include "ddc/network.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace ddc;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, scale);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = gauss(rng);
    return m;
}

bool params_equal(const NetworkParams& a, const NetworkParams& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        const auto& x = a.layers[l];
        const auto& y = b.layers[l];
        if (x.activation != y.activation || x.weights != y.weights || x.bias != y.bias ||
            x.weights_acc != y.weights_acc || x.bias_acc != y.bias_acc) {
            return false;
        }
    }
    return true;
}

// Scalar test objective: sum(G .* I).
double probe_loss(const NetworkParams& p, const Matrix& x, const Matrix& g) {
    return (forward(p, x).indicators.array() * g.array()).sum();
}

} // namespace

TEST_SUITE("network") {

TEST_CASE("init: deterministic, zero biases and accumulators") {
    const auto specs = mlp_specs(12, {8, 6}, 4);
    const NetworkParams a = init_network(specs, 4, 42);
    const NetworkParams b = init_network(specs, 4, 42);
    CHECK(params_equal(a, b));
    CHECK_FALSE(params_equal(a, init_network(specs, 4, 43)));
    for (const auto& layer : a.layers) {
        CHECK(layer.bias.isZero(0.0));
        CHECK(layer.weights_acc.isZero(0.0));
        CHECK(layer.bias_acc.isZero(0.0));
    }
    CHECK(a.layers[0].activation == Activation::relu);
    CHECK(a.layers[2].activation == Activation::linear);
}

TEST_CASE("init: 100->50 weight variance is 2/fan_in") {
    const NetworkParams p = init_network({{100, 50, Activation::linear}}, 50, 5);
    const auto& w = p.layers[0].weights;
    const double mean = w.mean();
    const double var = (w.array() - mean).square().sum() / static_cast<double>(w.size() - 1);
    CHECK(std::abs(var - 0.02) < 0.2 * 0.02);
}

TEST_CASE("init: output scale multiplies only the last layer") {
    const auto specs = mlp_specs(10, {7}, 3);
    const NetworkParams a = init_network(specs, 3, 9);
    const NetworkParams b = init_network(specs, 3, 9, 0.01);
    CHECK(a.layers[0].weights == b.layers[0].weights);
    CHECK((b.layers[1].weights - 0.01 * a.layers[1].weights).cwiseAbs().maxCoeff() < 1e-18);
}

TEST_CASE("init: rejects bad specs") {
    CHECK_THROWS_AS(init_network(mlp_specs(4, {}, 1), 1, 0), InvalidArgument);
    CHECK_THROWS_AS(init_network(mlp_specs(4, {}, 3), 2, 0), InvalidArgument);
    CHECK_THROWS_AS(init_network({{4, 5, Activation::relu}, {6, 2, Activation::linear}}, 2, 0), InvalidArgument);
    CHECK_THROWS_AS(init_network({}, 2, 0), InvalidArgument);
}

TEST_CASE("constraint layer: worked examples") {
    const Vector uniform = constraint_layer(Vector::Zero(4));
    for (int h = 0; h < 4; ++h) CHECK(uniform[h] == doctest::Approx(0.5));

    Vector z(2);
    z << std::log(2.0), 0.0;
    const Vector o = constraint_layer(z);
    CHECK(o[0] == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-12));
    CHECK(o[1] == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));
    CHECK(o[0] == doctest::Approx(0.894427).epsilon(1e-6));
    CHECK(o[1] == doctest::Approx(0.447214).epsilon(1e-6));

    z << 1000.0, 0.0;
    const Vector big = constraint_layer(z);
    CHECK(big.allFinite());
    CHECK(big[0] == doctest::Approx(1.0));
    CHECK(big[1] < 1e-300);
}

TEST_CASE("constraint layer: unit norm, non-negative, argmax preserved on random input") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> mag(-3.0, 3.0);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 1000; ++trial) {
        const double scale = std::pow(10.0, mag(rng));
        Vector z(6);
        for (int h = 0; h < 6; ++h) z[h] = scale * gauss(rng);
        const Vector o = constraint_layer(z);
        CHECK(o.allFinite());
        CHECK((o.array() >= 0.0).all());
        CHECK(std::abs(o.norm() - 1.0) < 1e-6);
        Eigen::Index zi = 0;
        Eigen::Index oi = 0;
        z.maxCoeff(&zi);
        o.maxCoeff(&oi);
        CHECK(zi == oi);
        CHECK(o.dot(o) == doctest::Approx(1.0).epsilon(1e-6)); // g(x, x) = 1
    }
}

TEST_CASE("constraint layer: Jacobian images are tangent to the sphere") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> gauss;
    const double h = 1e-6;
    for (int trial = 0; trial < 50; ++trial) {
        Vector z(5), v(5);
        for (int i = 0; i < 5; ++i) {
            z[i] = gauss(rng);
            v[i] = gauss(rng);
        }
        const Vector o = constraint_layer(z);
        const Vector jv = (constraint_layer(z + h * v) - constraint_layer(z - h * v)) / (2 * h);
        CHECK(std::abs(o.dot(jv)) < 1e-8);

        // Analytic J^T g against the finite-difference J.
        Vector g(5);
        for (int i = 0; i < 5; ++i) g[i] = gauss(rng);
        Matrix om(1, 5), gm(1, 5);
        om.row(0) = o.transpose();
        gm.row(0) = g.transpose();
        const Matrix jtg = constraint_layer_backward(om, gm);
        CHECK(jtg.row(0).dot(v) == doctest::Approx(g.dot(jv)).epsilon(1e-6));
    }
}

TEST_CASE("forward: zero network gives uniform indicators") {
    NetworkParams p = init_network(mlp_specs(3, {5}, 4), 4, 1);
    for (auto& layer : p.layers) {
        layer.weights.setZero();
        layer.bias.setZero();
    }
    const Matrix out = forward(p, random_matrix(7, 3, 2)).indicators;
    CHECK((out.array() - 0.5).abs().maxCoeff() < 1e-15);
}

TEST_CASE("forward: duplicated pattern, determinism and invariants") {
    const NetworkParams p = init_network(mlp_specs(8, {16, 8}, 5), 5, 3);
    Matrix x = random_matrix(100, 8, 4, 3.0);
    x.row(1) = x.row(0);
    const Matrix a = forward(p, x).indicators;
    const Matrix b = forward(p, x).indicators;
    CHECK(a == b);
    CHECK(a.row(0) == a.row(1));
    CHECK((a.array() >= 0.0).all());
    for (Eigen::Index i = 0; i < a.rows(); ++i) CHECK(std::abs(a.row(i).norm() - 1.0) < 1e-6);
    CHECK(predict(p, x) == a);
}

TEST_CASE("forward: dimension mismatch throws") {
    const NetworkParams p = init_network(mlp_specs(8, {4}, 2), 2, 3);
    CHECK_THROWS_AS(forward(p, Matrix::Zero(3, 7)), InvalidArgument);
}

TEST_CASE("backward: zero upstream gives zero gradients") {
    const NetworkParams p = init_network(mlp_specs(6, {5, 4}, 3), 3, 8);
    const ForwardResult f = forward(p, random_matrix(9, 6, 1));
    const Gradients g = backward(p, f.trace, Matrix::Zero(9, 3));
    for (const auto& layer : g) {
        CHECK(layer.weights.isZero(0.0));
        CHECK(layer.bias.isZero(0.0));
    }
    CHECK_THROWS_AS(backward(p, f.trace, Matrix::Zero(9, 2)), InvalidArgument);
}

TEST_CASE("backward: every parameter matches central differences") {
    NetworkParams p = init_network(mlp_specs(5, {7, 6}, 4), 4, 21);
    const Matrix x = random_matrix(8, 5, 22);
    const Matrix g = random_matrix(8, 4, 23);
    const Gradients grads = backward(p, forward(p, x).trace, g);

    const double h = 1e-5;
    double worst = 0.0;
    auto check = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + h;
        const double up = probe_loss(p, x, g);
        param = saved - h;
        const double down = probe_loss(p, x, g);
        param = saved;
        const double numeric = (up - down) / (2 * h);
        const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
        worst = std::max(worst, std::abs(numeric - analytic) / scale);
    };
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        auto& layer = p.layers[l];
        for (Eigen::Index i = 0; i < layer.weights.size(); ++i) check(layer.weights.data()[i], grads[l].weights.data()[i]);
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) check(layer.bias.data()[i], grads[l].bias.data()[i]);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("rmsprop: scalar step, zero gradient, determinism") {
    NetworkParams p;
    DenseLayer layer;
    layer.weights = Matrix::Zero(1, 1);
    layer.bias = Vector::Zero(1);
    layer.weights_acc = Matrix::Zero(1, 1);
    layer.bias_acc = Vector::Zero(1);
    p.layers.push_back(layer);

    Gradients g(1);
    g[0].weights = Matrix::Constant(1, 1, 1.0);
    g[0].bias = Vector::Zero(1);
    NetworkParams q = p;
    rmsprop_step(p, g, RmsPropOptions{0.001, 0.9, 1e-8});
    CHECK(p.layers[0].weights(0, 0) == doctest::Approx(-0.0031623).epsilon(1e-4));
    CHECK(p.layers[0].weights(0, 0) == doctest::Approx(-0.001 / (std::sqrt(0.1) + 1e-8)).epsilon(1e-12));
    CHECK(p.layers[0].weights_acc(0, 0) == doctest::Approx(0.1));
    CHECK(p.layers[0].bias[0] == 0.0);

    rmsprop_step(q, g, RmsPropOptions{0.001, 0.9, 1e-8});
    CHECK(params_equal(p, q));

    NetworkParams fresh = init_network(mlp_specs(1, {}, 2), 2, 0);
    const NetworkParams before = fresh;
    Gradients zeros(1);
    zeros[0].weights = Matrix::Zero(2, 1);
    zeros[0].bias = Vector::Zero(2);
    rmsprop_step(fresh, zeros, {});
    CHECK(fresh.layers[0].weights == before.layers[0].weights);
    CHECK(fresh.layers[0].bias == before.layers[0].bias);
}

TEST_CASE("rmsprop: non-finite gradient is a divergence and leaves params alone") {
    NetworkParams p = init_network(mlp_specs(3, {2}, 2), 2, 1);
    const NetworkParams before = p;
    Gradients g(2);
    g[0].weights = Matrix::Zero(2, 3);
    g[0].bias = Vector::Zero(2);
    g[1].weights = Matrix::Zero(2, 2);
    g[1].bias = Vector::Zero(2);
    g[1].weights(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(rmsprop_step(p, g, {}), TrainingDivergence);
    CHECK(params_equal(p, before));
}

TEST_CASE("checkpoint: lossless round trip, corrupt files rejected") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::path(DDC_TEST_TMP) / "network";
    fs::create_directories(dir);
    NetworkParams p = init_network(mlp_specs(6, {5}, 3), 3, 77);
    p.layers[0].weights_acc.setConstant(1.0 / 3.0);
    p.layers[1].bias[0] = -1e-300;
    save_checkpoint(p, dir / "ck.json");
    CHECK(params_equal(p, load_checkpoint(dir / "ck.json")));

    std::ofstream(dir / "bad.json") << R"({"format":"ddc-checkpoint","version":1,"layers":[{"input_dim":2,"output_dim":2,"activation":"relu","weights":[1,2,3],"bias":[0,0],"weights_acc":[0,0,0,0],"bias_acc":[0,0]}]})";
    CHECK_THROWS_AS(load_checkpoint(dir / "bad.json"), FormatError);
    std::ofstream(dir / "junk.json") << "not json";
    CHECK_THROWS_AS(load_checkpoint(dir / "junk.json"), FormatError);
}

} // TEST_SUITE
