#include "triclust/calibration.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace triclust {

double pairwise_distance(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("pairwise_distance: vector lengths differ");
    return (a - b).norm();
}

Mat pairwise_distances(const Mat& embeddings) {
    const Eigen::Index n = embeddings.rows();
    const Vec sq = embeddings.rowwise().squaredNorm();
    Mat d2 = (-2.0 * embeddings * embeddings.transpose()).colwise() + sq;
    d2.rowwise() += sq.transpose();
    Mat d = d2.cwiseMax(0.0).cwiseSqrt();
    d.diagonal().setZero();
    // exact symmetry regardless of rounding
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) d(j, i) = d(i, j);
    return d;
}

double analytic_threshold(const TripletMargins& m) { return std::sqrt((m.alpha + m.beta) / 2.0); }

double analytic_threshold(double alpha, double beta) {
    if (!(alpha > 0.0)) throw std::invalid_argument("analytic_threshold: alpha must be positive");
    if (beta < 0.0) throw std::invalid_argument("analytic_threshold: beta must be non-negative");
    return std::sqrt((alpha + beta) / 2.0);
}

double LogisticModel::decision_threshold() const {
    if (weight == 0.0) throw std::runtime_error("LogisticModel: weight is zero, threshold undefined");
    return -bias / weight;
}

ThresholdModel make_threshold_model(const TripletMargins& m, double scale) {
    const double tau = analytic_threshold(m);
    if (std::abs(m.beta - m.alpha / 2.0) > 1e-12 * m.alpha)
        std::cerr << "warning: beta = " << m.beta << " differs from alpha/2 = " << m.alpha / 2.0
                  << "; the analytic threshold assumes beta = alpha/2\n";
    return {tau, scale > 0.0 ? scale : tau / 8.0};
}

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

LogisticModel fit_logistic(std::span<const double> distances, std::span<const int> labels,
                           const LogisticFitConfig& config) {
    if (distances.size() != labels.size()) throw std::invalid_argument("fit_logistic: list lengths differ");
    if (distances.empty()) throw std::invalid_argument("fit_logistic: empty input");
    bool has_zero = false, has_one = false;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 0)
            has_zero = true;
        else if (labels[i] == 1)
            has_one = true;
        else
            throw std::invalid_argument("fit_logistic: labels must be 0 or 1");
        if (!std::isfinite(distances[i])) throw std::invalid_argument("fit_logistic: non-finite distance");
    }
    if (!has_zero || !has_one)
        throw std::runtime_error("fit_logistic: degenerate fit, both classes must be present");

    const double inv_n = 1.0 / static_cast<double>(distances.size());
    double w = 0.0, b = 0.0;
    for (int iter = 0; iter < config.max_iterations; ++iter) {
        double gw = 0.0, gb = 0.0;
        for (std::size_t i = 0; i < distances.size(); ++i) {
            const double r = static_cast<double>(labels[i]) - sigmoid(w * distances[i] + b);
            gw += r * distances[i];
            gb += r;
        }
        gw = gw * inv_n - config.l2 * w;
        gb = gb * inv_n - config.l2 * b;
        if (std::sqrt(gw * gw + gb * gb) < config.grad_tolerance) break;
        w += config.step * gw;
        b += config.step * gb;
    }
    return {w, b};
}

double cut_probability(const LogisticModel& model, double distance) {
    return sigmoid(model.weight * distance + model.bias);
}

double cut_probability(const ThresholdModel& model, double distance) {
    return sigmoid((distance - model.tau) / model.scale);
}

double edge_cost(double p_cut, double clamp_eps) {
    const double p = std::min(std::max(p_cut, clamp_eps), 1.0 - clamp_eps);
    return std::log((1.0 - p) / p);
}

CalibrationMode calibration_mode_from_string(const std::string& token) {
    if (token == "regression") return CalibrationMode::regression;
    if (token == "analytic") return CalibrationMode::analytic;
    throw std::invalid_argument("unknown calibration mode '" + token + "' (expected regression|analytic)");
}

std::string to_string(CalibrationMode mode) {
    return mode == CalibrationMode::regression ? "regression" : "analytic";
}

}  // namespace triclust
