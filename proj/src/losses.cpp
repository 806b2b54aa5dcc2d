#include "triclust/losses.hpp"

#include <stdexcept>

namespace triclust {

TripletMargins::TripletMargins(double alpha_, double beta_) : alpha(alpha_), beta(beta_) {
    if (!(alpha > 0.0)) throw std::invalid_argument("TripletMargins: alpha must be positive");
    if (!(beta > 0.0)) throw std::invalid_argument("TripletMargins: beta must be positive");
    if (!(beta < alpha)) throw std::invalid_argument("TripletMargins: beta must be below alpha");
}

LossKind loss_kind_from_string(const std::string& token) {
    if (token == "triplet1") return LossKind::triplet1;
    if (token == "triplet2") return LossKind::triplet2;
    if (token == "triplet3") return LossKind::triplet3;
    throw std::invalid_argument("unknown loss '" + token + "' (expected triplet1|triplet2|triplet3)");
}

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::triplet1: return "triplet1";
        case LossKind::triplet2: return "triplet2";
        case LossKind::triplet3: return "triplet3";
    }
    throw std::logic_error("bad LossKind");
}

namespace {

void check_inputs(const Vec& fa, const Vec& fp, const Vec& fn) {
    if (fa.size() != fp.size() || fa.size() != fn.size())
        throw std::invalid_argument("triplet loss: embedding lengths differ");
    if (!fa.allFinite() || !fp.allFinite() || !fn.allFinite())
        throw std::runtime_error("triplet loss: non-finite embedding");
}

TripletLossResult zero_result(Eigen::Index d) {
    TripletLossResult r;
    r.grad_anchor = Vec::Zero(d);
    r.grad_positive = Vec::Zero(d);
    r.grad_negative = Vec::Zero(d);
    return r;
}

}  // namespace

// Hinge subgradient convention: derivative 0 when the argument sits at the
// kink, so a hinge contributes only when strictly active.

TripletLossResult triplet_loss1(const Vec& fa, const Vec& fp, const Vec& fn, const TripletMargins& m) {
    check_inputs(fa, fp, fn);
    TripletLossResult r = zero_result(fa.size());
    const Vec dap = fa - fp;
    const Vec dan = fa - fn;
    const double z = dap.squaredNorm() - dan.squaredNorm() + m.alpha;
    if (z > 0.0) {
        r.value = z;
        r.grad_anchor = 2.0 * (dap - dan);
        r.grad_positive = -2.0 * dap;
        r.grad_negative = 2.0 * dan;
    }
    return r;
}

TripletLossResult triplet_loss2(const Vec& fa, const Vec& fp, const Vec& fn, const TripletMargins& m) {
    TripletLossResult r = triplet_loss1(fa, fp, fn, m);
    const Vec dap = fa - fp;
    const double z = dap.squaredNorm() - m.beta;
    if (z > 0.0) {
        r.value += z;
        r.grad_anchor += 2.0 * dap;
        r.grad_positive += -2.0 * dap;
    }
    return r;
}

TripletLossResult triplet_loss3(const Vec& fa, const Vec& fp, const Vec& fn, const TripletMargins& m) {
    check_inputs(fa, fp, fn);
    TripletLossResult r = zero_result(fa.size());
    const Vec dap = fa - fp;
    const Vec dan = fa - fn;
    const double zn = m.alpha - dan.squaredNorm();
    if (zn > 0.0) {
        r.value += zn;
        r.grad_anchor += -2.0 * dan;
        r.grad_negative += 2.0 * dan;
    }
    const double zp = dap.squaredNorm() - m.beta;
    if (zp > 0.0) {
        r.value += zp;
        r.grad_anchor += 2.0 * dap;
        r.grad_positive += -2.0 * dap;
    }
    return r;
}

TripletLossResult triplet_loss(LossKind kind, const Vec& fa, const Vec& fp, const Vec& fn,
                               const TripletMargins& m) {
    switch (kind) {
        case LossKind::triplet1: return triplet_loss1(fa, fp, fn, m);
        case LossKind::triplet2: return triplet_loss2(fa, fp, fn, m);
        case LossKind::triplet3: return triplet_loss3(fa, fp, fn, m);
    }
    throw std::logic_error("bad LossKind");
}

}  // namespace triclust
