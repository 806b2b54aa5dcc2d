#pragma once

#include <span>
#include <string>

#include "triclust/losses.hpp"
#include "triclust/net.hpp"

namespace triclust {

// plain Euclidean distance |a - b| (not squared)
double pairwise_distance(const Vec& a, const Vec& b);

// symmetric n x n distance matrix over the rows of `embeddings`
Mat pairwise_distances(const Mat& embeddings);

// tau = sqrt((alpha + beta) / 2)
double analytic_threshold(const TripletMargins& m);
// override path that also admits beta = 0; requires alpha > 0, beta >= 0
double analytic_threshold(double alpha, double beta);

// 1-D logistic regression on distance: P(cut) = sigma(weight * d + bias)
struct LogisticModel {
    double weight = 0.0;
    double bias = 0.0;

    double decision_threshold() const;  // -bias / weight
};

// Analytic ramp around tau: P(cut) = sigma((d - tau) / scale).
struct ThresholdModel {
    double tau;
    double scale;
};

// scale <= 0 selects the default tau / 8; warns on stderr when beta != alpha/2
ThresholdModel make_threshold_model(const TripletMargins& m, double scale = 0.0);

struct LogisticFitConfig {
    double step = 0.1;
    double l2 = 1e-4;
    double grad_tolerance = 1e-8;
    int max_iterations = 10000;
};

// Regularized maximum likelihood of sigma(w*d + b) against labels
// (0 = same class / join, 1 = different class / cut) by gradient ascent.
LogisticModel fit_logistic(std::span<const double> distances, std::span<const int> labels,
                           const LogisticFitConfig& config = {});

double cut_probability(const LogisticModel& model, double distance);
double cut_probability(const ThresholdModel& model, double distance);

// logit of the join probability: log((1 - p_cut) / p_cut), with p_cut
// clamped to [eps, 1-eps]. Negative exactly when cutting is the likely call.
double edge_cost(double p_cut, double clamp_eps = 1e-6);

enum class CalibrationMode { regression, analytic };

CalibrationMode calibration_mode_from_string(const std::string& token);
std::string to_string(CalibrationMode mode);

}  // namespace triclust
