#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace triclust {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Fully-connected embedding net f: R^D -> R^d, ReLU on all layers except
// the last (identity on the output). Weights are Glorot-uniform, biases zero.
class EmbeddingNet {
public:
    struct Gradients {
        std::vector<Mat> weights;
        std::vector<Vec> biases;
        Vec input;  // d loss / d x

        void set_zero();
        void add_scaled(const Gradients& other, double factor);
        void scale(double factor);
        bool all_finite() const;
    };

    // Activations recorded by a forward pass; post[0] is the input,
    // post[l+1] the output of layer l.
    struct Trace {
        std::vector<Vec> post;
    };

    EmbeddingNet() = default;
    EmbeddingNet(std::vector<int> layer_dims, std::uint64_t seed);

    int input_dim() const { return dims_.front(); }
    int output_dim() const { return dims_.back(); }
    int layer_count() const { return static_cast<int>(weights_.size()); }
    const std::vector<int>& layer_dims() const { return dims_; }
    std::uint64_t init_seed() const { return init_seed_; }

    const std::vector<Mat>& weights() const { return weights_; }
    const std::vector<Vec>& biases() const { return biases_; }
    std::vector<Mat>& weights() { return weights_; }
    std::vector<Vec>& biases() { return biases_; }

    Vec forward(const Vec& x) const;
    Vec forward(const Vec& x, Trace& trace) const;
    // rows of `inputs` are samples; returns one embedding per row
    Mat forward_batch(const Mat& inputs) const;

    Gradients zero_gradients() const;

    // Backpropagates grad_out (= dL/df(x)) through the recorded trace,
    // accumulating parameter gradients into `grads`; returns dL/dx.
    Vec backward(const Trace& trace, const Vec& grad_out, Gradients& grads) const;
    // convenience: forward + backward in one call
    Vec backward(const Vec& x, const Vec& grad_out, Gradients& grads) const;

    void save(const std::string& path) const;
    static EmbeddingNet load(const std::string& path);

private:
    std::vector<int> dims_;
    std::vector<Mat> weights_;  // weights_[l] is dims_[l+1] x dims_[l]
    std::vector<Vec> biases_;
    std::uint64_t init_seed_ = 0;
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

class AdamState {
public:
    explicit AdamState(const EmbeddingNet& net, AdamConfig config = {});

    void step(EmbeddingNet& net, const EmbeddingNet::Gradients& grads);

    long step_count() const { return step_count_; }
    const AdamConfig& config() const { return config_; }

private:
    AdamConfig config_;
    long step_count_ = 0;
    std::vector<Mat> m_weights_, v_weights_;
    std::vector<Vec> m_biases_, v_biases_;
};

}  // namespace triclust
