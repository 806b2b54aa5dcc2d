#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <limits>

#include "oracles.hpp"
#include "triclust/net.hpp"
#include "triclust/rng.hpp"

using namespace triclust;

TEST_CASE("forward with all-zero weights maps anything to zero") {
    EmbeddingNet net({3, 4, 2}, 7);
    for (auto& w : net.weights()) w.setZero();
    const Vec y = net.forward(Vec::Constant(3, 1.7));
    CHECK(y.size() == 2);
    CHECK(y.isZero(0.0));
}

TEST_CASE("single linear layer with identity weights is the identity") {
    EmbeddingNet net({2, 2}, 0);
    net.weights()[0] = Mat::Identity(2, 2);
    net.biases()[0].setZero();
    Vec x(2);
    x << 1.0, 2.0;
    const Vec y = net.forward(x);
    CHECK(y(0) == 1.0);
    CHECK(y(1) == 2.0);
}

TEST_CASE("two-layer forward matches the hand-scripted affine+rectifier chain") {
    // expected values computed with an independent matrix-arithmetic script
    EmbeddingNet net({2, 3, 2}, 0);
    net.weights()[0] << 0.5, -0.25, 0.75, 0.1, -0.3, 0.2;
    net.biases()[0] << 0.1, -0.2, 0.05;
    net.weights()[1] << 1.0, -0.5, 0.25, 0.3, 0.6, -0.1;
    net.biases()[1] << -0.05, 0.15;
    Vec x(2);
    x << 0.4, -0.7;
    const Vec y = net.forward(x);
    CHECK(y(0) == doctest::Approx(0.41).epsilon(1e-12));
    CHECK(y(1) == doctest::Approx(0.3105).epsilon(1e-12));
}

TEST_CASE("forward is pure and forward_batch agrees with forward") {
    EmbeddingNet net({4, 8, 3}, 21);
    Rng rng(5);
    Mat inputs(5, 4);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 4; ++j) inputs(i, j) = rng.uniform(-2.0, 2.0);

    const Mat batch = net.forward_batch(inputs);
    for (int i = 0; i < 5; ++i) {
        const Vec one = net.forward(inputs.row(i).transpose());
        const Vec again = net.forward(inputs.row(i).transpose());
        CHECK(std::memcmp(one.data(), again.data(), sizeof(double) * one.size()) == 0);
        CHECK((one - batch.row(i).transpose()).norm() < 1e-12);
    }
}

TEST_CASE("dimension mismatches are rejected") {
    EmbeddingNet net({3, 2}, 1);
    CHECK_THROWS_AS(net.forward(Vec::Zero(4)), std::invalid_argument);
    auto grads = net.zero_gradients();
    CHECK_THROWS_AS(net.backward(Vec::Zero(3), Vec::Zero(3), grads), std::invalid_argument);
}

TEST_CASE("zero upstream gradient yields zero parameter gradients") {
    EmbeddingNet net({3, 5, 2}, 3);
    auto grads = net.zero_gradients();
    net.backward(Vec::Constant(3, 0.3), Vec::Zero(2), grads);
    for (const auto& w : grads.weights) CHECK(w.isZero(0.0));
    for (const auto& b : grads.biases) CHECK(b.isZero(0.0));
}

TEST_CASE("linear layer weight gradient is the outer product of e1 and x") {
    EmbeddingNet net({3, 2}, 11);
    Vec x(3);
    x << 0.5, -1.0, 2.0;
    Vec e1 = Vec::Zero(2);
    e1(0) = 1.0;
    auto grads = net.zero_gradients();
    net.backward(x, e1, grads);
    CHECK((grads.weights[0] - e1 * x.transpose()).norm() == 0.0);
    CHECK((grads.biases[0] - e1).norm() == 0.0);
}

TEST_CASE("parameter and input gradients match central finite differences") {
    EmbeddingNet net({3, 4, 2}, 42);
    Rng rng(9);
    Vec x(3), upstream(2);
    for (int i = 0; i < 3; ++i) x(i) = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < 2; ++i) upstream(i) = rng.uniform(-1.0, 1.0);

    auto grads = net.zero_gradients();
    net.backward(x, upstream, grads);

    // scalar objective L(theta) = upstream . f(x)
    for (int layer = 0; layer < net.layer_count(); ++layer) {
        Mat& w = net.weights()[layer];
        for (int r = 0; r < w.rows(); ++r)
            for (int c = 0; c < w.cols(); ++c) {
                const double keep = w(r, c);
                const double h = 1e-5;
                w(r, c) = keep + h;
                const double up = upstream.dot(net.forward(x));
                w(r, c) = keep - h;
                const double down = upstream.dot(net.forward(x));
                w(r, c) = keep;
                const double fd = (up - down) / (2.0 * h);
                CHECK(grads.weights[layer](r, c) == doctest::Approx(fd).epsilon(1e-4));
            }
    }
    const Vec fd_x = oracles::fd_gradient([&](const Vec& p) { return upstream.dot(net.forward(p)); }, x);
    CHECK(oracles::rel_error(grads.input, fd_x) < 1e-4);
}

TEST_CASE("adam leaves parameters alone under zero gradients and counts steps") {
    EmbeddingNet net({2, 3, 2}, 5);
    const auto weights_before = net.weights();
    AdamState adam(net);
    auto grads = net.zero_gradients();
    adam.step(net, grads);
    CHECK(adam.step_count() == 1);
    for (int l = 0; l < net.layer_count(); ++l) CHECK((net.weights()[l] - weights_before[l]).norm() == 0.0);
}

TEST_CASE("adam steps on a scalar parameter match the reference formulas") {
    // frozen from an independent evaluation of the Adam update rules:
    // w0=0, g=1, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8
    EmbeddingNet net({1, 1}, 0);
    net.weights()[0](0, 0) = 0.0;
    AdamState adam(net);
    auto grads = net.zero_gradients();
    grads.weights[0](0, 0) = 1.0;

    adam.step(net, grads);
    CHECK(net.weights()[0](0, 0) == doctest::Approx(-0.0009999999900000003).epsilon(1e-12));
    adam.step(net, grads);
    CHECK(net.weights()[0](0, 0) == doctest::Approx(-0.001999999979999993).epsilon(1e-12));
    CHECK(adam.step_count() == 2);
    // bias stays put: its gradient is identically zero
    CHECK(net.biases()[0](0) == 0.0);
}

TEST_CASE("adam rejects non-finite gradients") {
    EmbeddingNet net({2, 2}, 1);
    AdamState adam(net);
    auto grads = net.zero_gradients();
    grads.weights[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(adam.step(net, grads), std::runtime_error);
}

TEST_CASE("same seed builds the same net, different seeds do not") {
    EmbeddingNet a({4, 6, 3}, 123), b({4, 6, 3}, 123), c({4, 6, 3}, 124);
    for (int l = 0; l < a.layer_count(); ++l) {
        CHECK(std::memcmp(a.weights()[l].data(), b.weights()[l].data(),
                          sizeof(double) * a.weights()[l].size()) == 0);
    }
    CHECK((a.weights()[0] - c.weights()[0]).norm() > 0.0);
}

TEST_CASE("checkpoints round-trip losslessly") {
    EmbeddingNet net({5, 7, 3}, 99);
    const std::string path = (std::filesystem::temp_directory_path() / "triclust_net_test.json").string();
    net.save(path);
    const EmbeddingNet back = EmbeddingNet::load(path);
    CHECK(back.layer_dims() == net.layer_dims());
    CHECK(back.init_seed() == net.init_seed());
    for (int l = 0; l < net.layer_count(); ++l) {
        CHECK(std::memcmp(back.weights()[l].data(), net.weights()[l].data(),
                          sizeof(double) * net.weights()[l].size()) == 0);
        CHECK(std::memcmp(back.biases()[l].data(), net.biases()[l].data(),
                          sizeof(double) * net.biases()[l].size()) == 0);
    }
    std::remove(path.c_str());
}
