#pragma once

#include <string>
#include <utility>
#include <vector>

#include "triclust/net.hpp"

namespace triclust {

// Clustering accuracy under the best one-to-one map from predicted clusters
// to true labels. Surplus predicted clusters stay unmatched and count as
// errors.
struct ClusterEval {
    double acc = 0.0;
    int n_pred_clusters = 0;
    // matched (predicted cluster id, true label) pairs, original id space
    std::vector<std::pair<int, int>> mapping;
    // contingency counts, rows follow pred_ids, columns label_ids
    std::vector<std::vector<long long>> confusion;
    std::vector<int> pred_ids;
    std::vector<int> label_ids;
};

ClusterEval accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

struct ClassDistanceStats {
    int cls;
    double intra_mean, intra_std;  // pairwise distances within the class
    double inter_mean, inter_std;  // cross distances to the nearest other class
    int nearest_class;
};

// Per-class mean/std of intra-class pairwise distances and of the cross
// distances to the class with the smallest mean cross distance. Standard
// deviations use the population convention.
std::vector<ClassDistanceStats> distance_stats(const Mat& embeddings, const std::vector<int>& labels);

// CSV schema: class, intra_mean, intra_std, inter_mean, inter_std, nearest_class
void write_distance_stats_csv(const std::vector<ClassDistanceStats>& stats, const std::string& path);

}  // namespace triclust
