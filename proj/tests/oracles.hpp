// Test-only oracles, independent of the library implementations they check:
// central finite differences, recursive partition enumeration and brute-force
// injective-map maximization.
#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "triclust/net.hpp"

namespace oracles {

using triclust::Mat;
using triclust::Vec;

// central finite differences of a scalar function of a vector
template <class F>
Vec fd_gradient(F&& f, const Vec& x, double h = 1e-5) {
    Vec g(x.size());
    Vec probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        probe(i) = x(i) + h;
        const double up = f(probe);
        probe(i) = x(i) - h;
        const double down = f(probe);
        probe(i) = x(i);
        g(i) = (up - down) / (2.0 * h);
    }
    return g;
}

inline double rel_error(const Vec& a, const Vec& b) {
    const double denom = std::max({a.norm(), b.norm(), 1e-12});
    return (a - b).norm() / denom;
}

// enumerates all partitions of {0..n-1} with at most max_blocks blocks,
// invoking visit(labels) for each (recursive, unlike the library enumerator)
inline void enumerate_partitions(int n, int max_blocks, const std::function<void(const std::vector<int>&)>& visit) {
    std::vector<int> labels(n, 0);
    std::function<void(int, int)> recurse = [&](int i, int used) {
        if (i == n) {
            visit(labels);
            return;
        }
        for (int b = 0; b < used; ++b) {
            labels[i] = b;
            recurse(i + 1, used);
        }
        if (used < max_blocks) {
            labels[i] = used;
            recurse(i + 1, used + 1);
        }
    };
    recurse(0, 0);
}

// k-means inertia of a fixed labeling (centroid = block mean)
inline double partition_inertia(const Mat& points, const std::vector<int>& labels, int k) {
    Mat sums = Mat::Zero(k, points.cols());
    std::vector<int> counts(k, 0);
    for (int i = 0; i < points.rows(); ++i) {
        sums.row(labels[i]) += points.row(i);
        ++counts[labels[i]];
    }
    double inertia = 0.0;
    for (int i = 0; i < points.rows(); ++i) {
        const Vec mean = sums.row(labels[i]).transpose() / counts[labels[i]];
        inertia += (points.row(i).transpose() - mean).squaredNorm();
    }
    return inertia;
}

// exhaustive k-means optimum over all partitions with at most k blocks
inline double best_inertia_exhaustive(const Mat& points, int k) {
    double best = std::numeric_limits<double>::infinity();
    enumerate_partitions(static_cast<int>(points.rows()), k, [&](const std::vector<int>& labels) {
        best = std::min(best, partition_inertia(points, labels, k));
    });
    return best;
}

// maximum matched count over all injective maps between cluster ids and
// labels (the smaller side is mapped into the larger one)
inline long long best_injective_match(const std::vector<std::vector<long long>>& counts) {
    const int rows = static_cast<int>(counts.size());
    const int cols = rows == 0 ? 0 : static_cast<int>(counts[0].size());
    const bool rows_small = rows <= cols;
    const int small = rows_small ? rows : cols;
    const int large = rows_small ? cols : rows;

    long long best = 0;
    std::vector<int> chosen(small, -1);
    std::vector<char> used(large, 0);
    std::function<void(int, long long)> recurse = [&](int i, long long acc) {
        if (i == small) {
            best = std::max(best, acc);
            return;
        }
        for (int j = 0; j < large; ++j) {
            if (used[j]) continue;
            used[j] = 1;
            recurse(i + 1, acc + (rows_small ? counts[i][j] : counts[j][i]));
            used[j] = 0;
        }
    };
    recurse(0, 0);
    return best;
}

}  // namespace oracles
