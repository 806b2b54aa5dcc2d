#pragma once

#include <string>

#include "triclust/net.hpp"

namespace triclust {

// Margins of the triplet losses: alpha bounds the negative side, beta the
// positive side (losses 2 and 3 only). Requires 0 < beta < alpha.
struct TripletMargins {
    double alpha;
    double beta;

    TripletMargins(double alpha_ = 0.8, double beta_ = 0.4);
};

enum class LossKind { triplet1, triplet2, triplet3 };

LossKind loss_kind_from_string(const std::string& token);
std::string to_string(LossKind kind);

struct TripletLossResult {
    double value = 0.0;
    Vec grad_anchor, grad_positive, grad_negative;
};

// [ |fa-fp|^2 - |fa-fn|^2 + alpha ]+
TripletLossResult triplet_loss1(const Vec& fa, const Vec& fp, const Vec& fn, const TripletMargins& m);
// loss1 + [ |fa-fp|^2 - beta ]+
TripletLossResult triplet_loss2(const Vec& fa, const Vec& fp, const Vec& fn, const TripletMargins& m);
// [ alpha - |fa-fn|^2 ]+ + [ |fa-fp|^2 - beta ]+
TripletLossResult triplet_loss3(const Vec& fa, const Vec& fp, const Vec& fn, const TripletMargins& m);

TripletLossResult triplet_loss(LossKind kind, const Vec& fa, const Vec& fp, const Vec& fn,
                               const TripletMargins& m);

}  // namespace triclust
