#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "triclust/losses.hpp"
#include "triclust/rng.hpp"

using namespace triclust;

namespace {

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

// hinge arguments of all three losses, used to keep FD probes off the kinks
bool near_kink(const Vec& fa, const Vec& fp, const Vec& fn, const TripletMargins& m) {
    const double ap = (fa - fp).squaredNorm();
    const double an = (fa - fn).squaredNorm();
    const double margin = 1e-2;
    return std::abs(ap - an + m.alpha) < margin || std::abs(ap - m.beta) < margin ||
           std::abs(m.alpha - an) < margin;
}

}  // namespace

TEST_CASE("margins enforce 0 < beta < alpha") {
    CHECK_NOTHROW(TripletMargins(0.8, 0.4));
    CHECK_THROWS_AS(TripletMargins(0.8, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(TripletMargins(0.4, 0.8), std::invalid_argument);
    CHECK_THROWS_AS(TripletMargins(-1.0, 0.4), std::invalid_argument);
}

TEST_CASE("loss1 hand-evaluated examples") {
    const TripletMargins m(0.5, 0.25);

    // fa == fp, negative far away: hinge inactive
    Vec fa = v2(1.0, 1.0);
    Vec fn = v2(1.0 + std::sqrt(10.0), 1.0);
    auto r = triplet_loss1(fa, fa, fn, m);
    CHECK(r.value == 0.0);
    CHECK(r.grad_anchor.isZero(0.0));
    CHECK(r.grad_positive.isZero(0.0));
    CHECK(r.grad_negative.isZero(0.0));

    // [4 - 1 + 0.5]+ = 3.5
    r = triplet_loss1(v2(0, 0), v2(2, 0), v2(1, 0), m);
    CHECK(r.value == doctest::Approx(3.5).epsilon(1e-15));
    // active hinge: d loss / d fp = -2 (fa - fp) = 2 (fp - fa) = (4, 0)
    CHECK(r.grad_positive(0) == doctest::Approx(-2.0 * (0.0 - 2.0)).epsilon(1e-15));
    CHECK(r.grad_positive(1) == 0.0);
}

TEST_CASE("loss2 hand-evaluated examples") {
    // fa == fp reduces loss2 to loss1
    const TripletMargins m(0.5, 0.4);
    Vec fa = v2(0.3, -0.2), fn = v2(5.0, 5.0);
    CHECK(triplet_loss2(fa, fa, fn, m).value == triplet_loss1(fa, fa, fn, m).value);

    // 3.5 + [4 - 0.4]+ = 7.1
    auto r = triplet_loss2(v2(0, 0), v2(2, 0), v2(1, 0), m);
    CHECK(r.value == doctest::Approx(7.1).epsilon(1e-15));

    // |fa-fp|^2 == beta exactly: the hinge is inactive at the kink
    Vec fp = v2(std::sqrt(0.4), 0.0);
    const TripletMargins wide(10.0, 0.4);
    const auto at_kink = triplet_loss2(v2(0, 0), fp, v2(0.1, 0), wide);
    const auto base = triplet_loss1(v2(0, 0), fp, v2(0.1, 0), wide);
    CHECK(at_kink.value == base.value);
    CHECK((at_kink.grad_negative - base.grad_negative).norm() == 0.0);
}

TEST_CASE("loss3 hand-evaluated examples") {
    const TripletMargins m(0.5, 0.4);

    // both hinges inactive
    auto r = triplet_loss3(v2(0, 0), v2(0.1, 0), v2(3, 0), m);
    CHECK(r.value == 0.0);

    // [0.5 - 1]+ + [4 - 0.4]+ = 3.6
    r = triplet_loss3(v2(0, 0), v2(2, 0), v2(1, 0), m);
    CHECK(r.value == doctest::Approx(3.6).epsilon(1e-15));

    // all three vectors coincident: [0.8 - 0]+ + [0 - 0.4]+ = 0.8
    const TripletMargins paper(0.8, 0.4);
    r = triplet_loss3(v2(0, 0), v2(0, 0), v2(0, 0), paper);
    CHECK(r.value == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("non-finite embeddings raise a numeric error") {
    const TripletMargins m(0.8, 0.4);
    Vec bad = v2(std::numeric_limits<double>::infinity(), 0.0);
    CHECK_THROWS_AS(triplet_loss1(bad, v2(0, 0), v2(1, 1), m), std::runtime_error);
    CHECK_THROWS_AS(triplet_loss3(v2(0, 0), bad, v2(1, 1), m), std::runtime_error);
}

TEST_CASE("mismatched embedding lengths are rejected") {
    const TripletMargins m(0.8, 0.4);
    CHECK_THROWS_AS(triplet_loss1(Vec::Zero(2), Vec::Zero(3), Vec::Zero(2), m), std::invalid_argument);
}

TEST_CASE("losses are non-negative and loss2 dominates loss1") {
    const TripletMargins m(0.8, 0.4);
    Rng rng(31);
    for (int trial = 0; trial < 500; ++trial) {
        Vec fa(3), fp(3), fn(3);
        for (int i = 0; i < 3; ++i) {
            fa(i) = rng.uniform(-2, 2);
            fp(i) = rng.uniform(-2, 2);
            fn(i) = rng.uniform(-2, 2);
        }
        const double l1 = triplet_loss1(fa, fp, fn, m).value;
        const double l2 = triplet_loss2(fa, fp, fn, m).value;
        const double l3 = triplet_loss3(fa, fp, fn, m).value;
        CHECK(l1 >= 0.0);
        CHECK(l2 >= 0.0);
        CHECK(l3 >= 0.0);
        CHECK(l2 >= l1);
    }
}

TEST_CASE("loss3 decomposes: the fp gradient ignores fn entirely") {
    const TripletMargins m(0.8, 0.4);
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        Vec fa(4), fp(4), fn(4), fn2(4);
        for (int i = 0; i < 4; ++i) {
            fa(i) = rng.uniform(-2, 2);
            fp(i) = rng.uniform(-2, 2);
            fn(i) = rng.uniform(-2, 2);
            fn2(i) = rng.uniform(-2, 2);
        }
        const auto a = triplet_loss3(fa, fp, fn, m);
        const auto b = triplet_loss3(fa, fp, fn2, m);
        CHECK((a.grad_positive - b.grad_positive).norm() == 0.0);
    }
}

TEST_CASE("simultaneous translation leaves all three losses unchanged") {
    const TripletMargins m(0.8, 0.4);
    Rng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        Vec fa(3), fp(3), fn(3), t(3);
        for (int i = 0; i < 3; ++i) {
            fa(i) = rng.uniform(-2, 2);
            fp(i) = rng.uniform(-2, 2);
            fn(i) = rng.uniform(-2, 2);
            t(i) = rng.uniform(-5, 5);
        }
        CHECK(triplet_loss1(fa, fp, fn, m).value ==
              doctest::Approx(triplet_loss1(fa + t, fp + t, fn + t, m).value).epsilon(1e-9));
        CHECK(triplet_loss2(fa, fp, fn, m).value ==
              doctest::Approx(triplet_loss2(fa + t, fp + t, fn + t, m).value).epsilon(1e-9));
        CHECK(triplet_loss3(fa, fp, fn, m).value ==
              doctest::Approx(triplet_loss3(fa + t, fp + t, fn + t, m).value).epsilon(1e-9));
    }
}

TEST_CASE("gradients match finite differences away from the kinks") {
    const TripletMargins m(0.8, 0.4);
    Rng rng(2024);
    for (LossKind kind : {LossKind::triplet1, LossKind::triplet2, LossKind::triplet3}) {
        int checked = 0;
        while (checked < 30) {
            Vec fa(3), fp(3), fn(3);
            for (int i = 0; i < 3; ++i) {
                fa(i) = rng.uniform(-1.5, 1.5);
                fp(i) = rng.uniform(-1.5, 1.5);
                fn(i) = rng.uniform(-1.5, 1.5);
            }
            if (near_kink(fa, fp, fn, m)) continue;
            ++checked;
            const auto r = triplet_loss(kind, fa, fp, fn, m);
            const Vec fd_a = oracles::fd_gradient(
                [&](const Vec& p) { return triplet_loss(kind, p, fp, fn, m).value; }, fa);
            const Vec fd_p = oracles::fd_gradient(
                [&](const Vec& p) { return triplet_loss(kind, fa, p, fn, m).value; }, fp);
            const Vec fd_n = oracles::fd_gradient(
                [&](const Vec& p) { return triplet_loss(kind, fa, fp, p, m).value; }, fn);
            CHECK(oracles::rel_error(r.grad_anchor, fd_a) < 1e-4);
            CHECK(oracles::rel_error(r.grad_positive, fd_p) < 1e-4);
            CHECK(oracles::rel_error(r.grad_negative, fd_n) < 1e-4);
        }
    }
}

TEST_CASE("loss token parsing round-trips") {
    for (LossKind k : {LossKind::triplet1, LossKind::triplet2, LossKind::triplet3})
        CHECK(loss_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(loss_kind_from_string("triplet4"), std::invalid_argument);
}
