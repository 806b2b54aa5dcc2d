#include "triclust/kmeans.hpp"

#include <limits>
#include <stdexcept>

namespace triclust {

namespace {

constexpr int kMaxIterations = 300;

// squared distance of every point to its nearest centroid, tie -> lowest index
void assign_nearest(const Mat& points, const Mat& centroids, std::vector<int>& assignment,
                    std::vector<double>& dist2) {
    const int n = static_cast<int>(points.rows());
    const int k = static_cast<int>(centroids.rows());
    for (int i = 0; i < n; ++i) {
        int best = 0;
        double best_d2 = (points.row(i) - centroids.row(0)).squaredNorm();
        for (int c = 1; c < k; ++c) {
            const double d2 = (points.row(i) - centroids.row(c)).squaredNorm();
            if (d2 < best_d2) {
                best_d2 = d2;
                best = c;
            }
        }
        assignment[i] = best;
        dist2[i] = best_d2;
    }
}

Mat seed_kmeanspp(const Mat& points, int k, Rng& rng) {
    const int n = static_cast<int>(points.rows());
    Mat centroids(k, points.cols());
    std::vector<char> chosen(n, 0);

    const int first = rng.index(n);
    centroids.row(0) = points.row(first);
    chosen[first] = 1;

    std::vector<double> d2(n);
    for (int i = 0; i < n; ++i) d2[i] = (points.row(i) - centroids.row(0)).squaredNorm();

    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += d2[i];
        int pick = -1;
        if (total > 0.0) {
            const double r = rng.uniform() * total;
            double cum = 0.0;
            for (int i = 0; i < n; ++i) {
                cum += d2[i];
                if (cum > r) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) {  // r landed on the accumulated rounding tail
                for (int i = n - 1; i >= 0; --i)
                    if (d2[i] > 0.0) {
                        pick = i;
                        break;
                    }
            }
        }
        if (pick < 0) {  // all remaining weights zero: take the lowest unchosen index
            for (int i = 0; i < n; ++i)
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
        }
        centroids.row(c) = points.row(pick);
        chosen[pick] = 1;
        for (int i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], (points.row(i) - centroids.row(c)).squaredNorm());
    }
    return centroids;
}

KMeansResult lloyd_run(const Mat& points, int k, Rng rng) {
    const int n = static_cast<int>(points.rows());
    Mat centroids = seed_kmeanspp(points, k, rng);

    KMeansResult result;
    std::vector<int> assignment(n, -1), prev_assignment;
    std::vector<double> dist2(n, 0.0);

    int iter = 0;
    for (;;) {
        ++iter;
        assign_nearest(points, centroids, assignment, dist2);
        double inertia = 0.0;
        for (double d : dist2) inertia += d;
        result.inertia_history.push_back(inertia);
        // the loop always ends right after an assignment, so the returned
        // labeling is nearest-centroid w.r.t. the returned centroids
        if (assignment == prev_assignment || iter >= kMaxIterations) break;
        prev_assignment = assignment;

        // means update on a working copy; empty clusters steal the point
        // farthest from its centroid and become that point
        std::vector<int> working = assignment;
        std::vector<int> counts(k, 0);
        for (int a : working) ++counts[a];
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            int far = -1;
            double far_d2 = -1.0;
            for (int i = 0; i < n; ++i) {
                if (counts[working[i]] < 2) continue;
                if (dist2[i] > far_d2) {
                    far_d2 = dist2[i];
                    far = i;
                }
            }
            if (far < 0) break;  // nothing stealable
            --counts[working[far]];
            working[far] = c;
            counts[c] = 1;
            centroids.row(c) = points.row(far);
            dist2[far] = 0.0;
        }
        Mat sums = Mat::Zero(k, points.cols());
        for (int i = 0; i < n; ++i) sums.row(working[i]) += points.row(i);
        for (int c = 0; c < k; ++c)
            if (counts[c] > 0) centroids.row(c) = sums.row(c) / counts[c];
    }

    result.centroids = std::move(centroids);
    result.assignment = std::move(assignment);
    result.inertia = result.inertia_history.back();
    result.iterations = iter;
    return result;
}

}  // namespace

KMeansResult kmeans(const Mat& points, int k, int restarts, Rng& rng) {
    const int n = static_cast<int>(points.rows());
    if (n == 0) throw std::invalid_argument("kmeans: no points");
    if (k <= 0) throw std::invalid_argument("kmeans: k must be positive");
    if (k > n) throw std::invalid_argument("kmeans: k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
    if (restarts <= 0) throw std::invalid_argument("kmeans: restarts must be positive");

    std::vector<std::uint64_t> run_seeds(restarts);
    for (auto& s : run_seeds) s = rng.next();

    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        KMeansResult run = lloyd_run(points, k, Rng(run_seeds[r]));
        if (run.inertia < best.inertia) best = std::move(run);
    }
    return best;
}

}  // namespace triclust
