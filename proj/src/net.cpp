#include "triclust/net.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "triclust/rng.hpp"

namespace triclust {

void EmbeddingNet::Gradients::set_zero() {
    for (auto& w : weights) w.setZero();
    for (auto& b : biases) b.setZero();
    input.setZero();
}

void EmbeddingNet::Gradients::add_scaled(const Gradients& other, double factor) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] += factor * other.weights[l];
        biases[l] += factor * other.biases[l];
    }
}

void EmbeddingNet::Gradients::scale(double factor) {
    for (auto& w : weights) w *= factor;
    for (auto& b : biases) b *= factor;
    input *= factor;
}

bool EmbeddingNet::Gradients::all_finite() const {
    for (const auto& w : weights)
        if (!w.allFinite()) return false;
    for (const auto& b : biases)
        if (!b.allFinite()) return false;
    return true;
}

EmbeddingNet::EmbeddingNet(std::vector<int> layer_dims, std::uint64_t seed)
    : dims_(std::move(layer_dims)), init_seed_(seed) {
    if (dims_.size() < 2) throw std::invalid_argument("EmbeddingNet: need at least input and output dims");
    for (int d : dims_)
        if (d <= 0) throw std::invalid_argument("EmbeddingNet: layer dims must be positive");

    Rng rng(seed_mix(seed, 0x4e4554ULL));
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        const int fan_in = dims_[l];
        const int fan_out = dims_[l + 1];
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        Mat w(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-bound, bound);
        weights_.push_back(std::move(w));
        biases_.push_back(Vec::Zero(fan_out));
    }
}

Vec EmbeddingNet::forward(const Vec& x) const {
    Trace trace;
    return forward(x, trace);
}

Vec EmbeddingNet::forward(const Vec& x, Trace& trace) const {
    if (x.size() != input_dim())
        throw std::invalid_argument("forward: input has length " + std::to_string(x.size()) +
                                    ", expected " + std::to_string(input_dim()));
    trace.post.clear();
    trace.post.reserve(weights_.size() + 1);
    trace.post.push_back(x);
    Vec a = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Vec z = weights_[l] * a + biases_[l];
        if (l + 1 < weights_.size()) z = z.cwiseMax(0.0);
        trace.post.push_back(z);
        a = std::move(z);
    }
    return a;
}

Mat EmbeddingNet::forward_batch(const Mat& inputs) const {
    if (inputs.cols() != input_dim())
        throw std::invalid_argument("forward_batch: inputs have " + std::to_string(inputs.cols()) +
                                    " columns, expected " + std::to_string(input_dim()));
    Mat a = inputs.transpose();  // dims x n
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Mat z = (weights_[l] * a).colwise() + biases_[l];
        if (l + 1 < weights_.size()) z = z.cwiseMax(0.0);
        a = std::move(z);
    }
    return a.transpose();
}

EmbeddingNet::Gradients EmbeddingNet::zero_gradients() const {
    Gradients g;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        g.weights.push_back(Mat::Zero(weights_[l].rows(), weights_[l].cols()));
        g.biases.push_back(Vec::Zero(biases_[l].size()));
    }
    g.input = Vec::Zero(input_dim());
    return g;
}

Vec EmbeddingNet::backward(const Trace& trace, const Vec& grad_out, Gradients& grads) const {
    if (grad_out.size() != output_dim())
        throw std::invalid_argument("backward: upstream gradient has length " +
                                    std::to_string(grad_out.size()) + ", expected " +
                                    std::to_string(output_dim()));
    if (trace.post.size() != weights_.size() + 1)
        throw std::invalid_argument("backward: trace does not match this net");

    Vec delta = grad_out;
    for (int l = layer_count() - 1; l >= 0; --l) {
        grads.weights[l].noalias() += delta * trace.post[l].transpose();
        grads.biases[l] += delta;
        Vec upstream = weights_[l].transpose() * delta;
        if (l > 0) {
            // ReLU subgradient: 0 at the kink (post == 0 implies pre <= 0)
            upstream = (trace.post[l].array() > 0.0).select(upstream, 0.0);
        }
        delta = std::move(upstream);
    }
    grads.input += delta;
    return delta;
}

Vec EmbeddingNet::backward(const Vec& x, const Vec& grad_out, Gradients& grads) const {
    Trace trace;
    forward(x, trace);
    return backward(trace, grad_out, grads);
}

void EmbeddingNet::save(const std::string& path) const {
    nlohmann::json j;
    j["format"] = "triclust-net";
    j["version"] = 1;
    j["layer_dims"] = dims_;
    j["seed"] = init_seed_;
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        std::vector<double> flat;  // row-major
        flat.reserve(static_cast<std::size_t>(weights_[l].size()));
        for (int r = 0; r < weights_[l].rows(); ++r)
            for (int c = 0; c < weights_[l].cols(); ++c) flat.push_back(weights_[l](r, c));
        std::vector<double> bias(biases_[l].data(), biases_[l].data() + biases_[l].size());
        layers.push_back({{"weights", flat}, {"biases", bias}});
    }
    j["layers"] = std::move(layers);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save: cannot open " + path);
    out << j.dump(2) << '\n';
}

EmbeddingNet EmbeddingNet::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load: cannot open " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("format", "") != "triclust-net")
        throw std::runtime_error("load: " + path + " is not a model checkpoint");

    EmbeddingNet net;
    net.dims_ = j.at("layer_dims").get<std::vector<int>>();
    net.init_seed_ = j.at("seed").get<std::uint64_t>();
    if (net.dims_.size() < 2) throw std::runtime_error("load: bad layer_dims");
    const auto& layers = j.at("layers");
    if (layers.size() != net.dims_.size() - 1) throw std::runtime_error("load: layer count mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const int rows = net.dims_[l + 1];
        const int cols = net.dims_[l];
        const auto flat = layers[l].at("weights").get<std::vector<double>>();
        const auto bias = layers[l].at("biases").get<std::vector<double>>();
        if (flat.size() != static_cast<std::size_t>(rows) * cols || bias.size() != static_cast<std::size_t>(rows))
            throw std::runtime_error("load: layer " + std::to_string(l) + " shape mismatch");
        Mat w(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) w(r, c) = flat[static_cast<std::size_t>(r) * cols + c];
        net.weights_.push_back(std::move(w));
        net.biases_.push_back(Eigen::Map<const Vec>(bias.data(), rows));
    }
    return net;
}

AdamState::AdamState(const EmbeddingNet& net, AdamConfig config) : config_(config) {
    if (config_.learning_rate <= 0 || config_.beta1 <= 0 || config_.beta1 >= 1 ||
        config_.beta2 <= 0 || config_.beta2 >= 1 || config_.epsilon <= 0)
        throw std::invalid_argument("AdamState: hyperparameters out of range");
    for (const auto& w : net.weights()) {
        m_weights_.push_back(Mat::Zero(w.rows(), w.cols()));
        v_weights_.push_back(Mat::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : net.biases()) {
        m_biases_.push_back(Vec::Zero(b.size()));
        v_biases_.push_back(Vec::Zero(b.size()));
    }
}

void AdamState::step(EmbeddingNet& net, const EmbeddingNet::Gradients& grads) {
    if (grads.weights.size() != m_weights_.size())
        throw std::invalid_argument("adam step: gradient layer count mismatch");
    if (!grads.all_finite()) throw std::runtime_error("adam step: non-finite gradient");

    ++step_count_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));

    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
        if (g.rows() != param.rows() || g.cols() != param.cols())
            throw std::invalid_argument("adam step: gradient shape mismatch");
        m = config_.beta1 * m + (1.0 - config_.beta1) * g;
        v = config_.beta2 * v.array().matrix() + (1.0 - config_.beta2) * g.array().square().matrix();
        const auto m_hat = m.array() / bc1;
        const auto v_hat = v.array() / bc2;
        param.array() -= config_.learning_rate * m_hat / (v_hat.sqrt() + config_.epsilon);
    };

    for (std::size_t l = 0; l < m_weights_.size(); ++l) {
        update(net.weights()[l], m_weights_[l], v_weights_[l], grads.weights[l]);
        update(net.biases()[l], m_biases_[l], v_biases_[l], grads.biases[l]);
    }
}

}  // namespace triclust
