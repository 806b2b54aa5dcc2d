#include "triclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "triclust/util.hpp"

namespace triclust {

namespace {

// ids compacted to 0..K-1 in order of first appearance; returns the id list
std::vector<int> compact_ids(const std::vector<int>& values, std::vector<int>& compacted) {
    std::unordered_map<int, int> remap;
    std::vector<int> ids;
    compacted.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto [it, inserted] = remap.emplace(values[i], static_cast<int>(ids.size()));
        if (inserted) ids.push_back(values[i]);
        compacted[i] = it->second;
    }
    return ids;
}

// Assignment problem by the augmenting-path potentials method: minimizes the
// total cost of matching every row to a distinct column; rows <= cols.
std::vector<int> assignment_min(const std::vector<std::vector<long long>>& cost, int rows, int cols) {
    const long long kInf = std::numeric_limits<long long>::max() / 4;
    std::vector<long long> u(rows + 1, 0), v(cols + 1, 0);
    std::vector<int> match(cols + 1, 0), way(cols + 1, 0);
    for (int i = 1; i <= rows; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<long long> minv(cols + 1, kInf);
        std::vector<char> used(cols + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            long long delta = kInf;
            int j1 = -1;
            for (int j = 1; j <= cols; ++j) {
                if (used[j]) continue;
                const long long cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= cols; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(rows, -1);
    for (int j = 1; j <= cols; ++j)
        if (match[j] > 0) row_to_col[match[j] - 1] = j - 1;
    return row_to_col;
}

}  // namespace

ClusterEval accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.size() != truth.size()) throw std::invalid_argument("accuracy: length mismatch");
    if (pred.empty()) throw std::invalid_argument("accuracy: empty input");
    const long long n = static_cast<long long>(pred.size());

    ClusterEval eval;
    std::vector<int> p, t;
    eval.pred_ids = compact_ids(pred, p);
    eval.label_ids = compact_ids(truth, t);
    const int rows = static_cast<int>(eval.pred_ids.size());
    const int cols = static_cast<int>(eval.label_ids.size());
    eval.n_pred_clusters = rows;

    eval.confusion.assign(rows, std::vector<long long>(cols, 0));
    for (std::size_t i = 0; i < p.size(); ++i) ++eval.confusion[p[i]][t[i]];

    // one-to-one map maximizing matched counts; when predicted clusters
    // outnumber labels only |labels| of them can match, the rest score zero
    long long matched = 0;
    if (rows <= cols) {
        std::vector<std::vector<long long>> cost(rows, std::vector<long long>(cols));
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) cost[i][j] = -eval.confusion[i][j];
        const auto sel = assignment_min(cost, rows, cols);
        for (int i = 0; i < rows; ++i) {
            matched += eval.confusion[i][sel[i]];
            eval.mapping.emplace_back(eval.pred_ids[i], eval.label_ids[sel[i]]);
        }
    } else {
        std::vector<std::vector<long long>> cost(cols, std::vector<long long>(rows));
        for (int j = 0; j < cols; ++j)
            for (int i = 0; i < rows; ++i) cost[j][i] = -eval.confusion[i][j];
        const auto sel = assignment_min(cost, cols, rows);
        for (int j = 0; j < cols; ++j) {
            matched += eval.confusion[sel[j]][j];
            eval.mapping.emplace_back(eval.pred_ids[sel[j]], eval.label_ids[j]);
        }
        std::sort(eval.mapping.begin(), eval.mapping.end());
    }
    eval.acc = static_cast<double>(matched) / static_cast<double>(n);
    return eval;
}

std::vector<ClassDistanceStats> distance_stats(const Mat& embeddings, const std::vector<int>& labels) {
    if (static_cast<std::size_t>(embeddings.rows()) != labels.size())
        throw std::invalid_argument("distance_stats: embeddings and labels differ in length");
    std::vector<int> compact;
    const std::vector<int> class_ids = compact_ids(labels, compact);
    const int k = static_cast<int>(class_ids.size());
    if (k < 2) throw std::invalid_argument("distance_stats: need at least two classes");

    std::vector<std::vector<int>> members(k);
    for (std::size_t i = 0; i < compact.size(); ++i) members[compact[i]].push_back(static_cast<int>(i));
    for (int c = 0; c < k; ++c)
        if (members[c].size() < 2)
            throw std::invalid_argument("distance_stats: class " + std::to_string(class_ids[c]) +
                                        " has fewer than 2 members");

    auto mean_std = [](double sum, double sum_sq, double count) {
        const double mean = sum / count;
        const double var = std::max(0.0, sum_sq / count - mean * mean);  // population
        return std::pair<double, double>(mean, std::sqrt(var));
    };

    // mean/std of cross distances for every ordered class pair
    std::vector<std::vector<double>> cross_sum(k, std::vector<double>(k, 0.0));
    std::vector<std::vector<double>> cross_sq(k, std::vector<double>(k, 0.0));
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b) {
            for (int i : members[a])
                for (int j : members[b]) {
                    const double d = (embeddings.row(i) - embeddings.row(j)).norm();
                    cross_sum[a][b] += d;
                    cross_sq[a][b] += d * d;
                }
            cross_sum[b][a] = cross_sum[a][b];
            cross_sq[b][a] = cross_sq[a][b];
        }

    std::vector<ClassDistanceStats> out;
    for (int c = 0; c < k; ++c) {
        ClassDistanceStats s;
        s.cls = class_ids[c];
        double sum = 0.0, sum_sq = 0.0;
        const auto& m = members[c];
        for (std::size_t i = 0; i < m.size(); ++i)
            for (std::size_t j = i + 1; j < m.size(); ++j) {
                const double d = (embeddings.row(m[i]) - embeddings.row(m[j])).norm();
                sum += d;
                sum_sq += d * d;
            }
        const double pairs = static_cast<double>(m.size()) * (m.size() - 1) / 2.0;
        std::tie(s.intra_mean, s.intra_std) = mean_std(sum, sum_sq, pairs);

        int nearest = -1;
        double nearest_mean = std::numeric_limits<double>::infinity();
        for (int o = 0; o < k; ++o) {
            if (o == c) continue;
            const double count = static_cast<double>(m.size()) * members[o].size();
            const double mean = cross_sum[c][o] / count;
            if (mean < nearest_mean) {
                nearest_mean = mean;
                nearest = o;
            }
        }
        const double count = static_cast<double>(m.size()) * members[nearest].size();
        std::tie(s.inter_mean, s.inter_std) = mean_std(cross_sum[c][nearest], cross_sq[c][nearest], count);
        s.nearest_class = class_ids[nearest];
        out.push_back(s);
    }
    return out;
}

void write_distance_stats_csv(const std::vector<ClassDistanceStats>& stats, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_distance_stats_csv: cannot open " + path);
    out << "class,intra_mean,intra_std,inter_mean,inter_std,nearest_class\n";
    for (const auto& s : stats)
        out << s.cls << ',' << format_double(s.intra_mean) << ',' << format_double(s.intra_std) << ','
            << format_double(s.inter_mean) << ',' << format_double(s.inter_std) << ',' << s.nearest_class
            << '\n';
}

}  // namespace triclust
