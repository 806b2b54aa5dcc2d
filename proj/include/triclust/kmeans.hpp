#pragma once

#include <vector>

#include "triclust/net.hpp"
#include "triclust/rng.hpp"

namespace triclust {

struct KMeansResult {
    Mat centroids;  // k x d
    std::vector<int> assignment;
    double inertia = 0.0;
    int iterations = 0;
    // inertia after each assignment step of the winning restart (non-increasing)
    std::vector<double> inertia_history;
};

// Lloyd's algorithm with k-means++ seeding, best of `restarts` independent
// runs. Each run stops at an assignment fixpoint or after 300 iterations.
// Ties in nearest-centroid assignment break toward the lowest index.
KMeansResult kmeans(const Mat& points, int k, int restarts, Rng& rng);

}  // namespace triclust
