#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace triclust {

// Weighted undirected graph with real edge costs. Complete graphs use flat
// upper-triangular storage; sparse graphs an ordered adjacency per node.
// Absent edges cost 0 (cutting them is free).
class CostGraph {
public:
    explicit CostGraph(int n);  // sparse, no edges
    static CostGraph complete(int n, double initial_cost = 0.0);

    void set_cost(int u, int v, double cost);
    double cost(int u, int v) const;
    bool has_edge(int u, int v) const;
    bool is_complete() const { return complete_; }

    int node_count() const { return n_; }
    std::int64_t edge_count() const;

    template <class Fn>  // fn(u, v, cost) with u < v
    void for_each_edge(Fn&& fn) const {
        if (complete_) {
            std::size_t idx = 0;
            for (int u = 0; u < n_; ++u)
                for (int v = u + 1; v < n_; ++v) fn(u, v, dense_[idx++]);
        } else {
            for (int u = 0; u < n_; ++u)
                for (const auto& [v, c] : adj_[u])
                    if (v > u) fn(u, v, c);
        }
    }

    template <class Fn>  // fn(v, cost) over neighbors of u
    void for_each_neighbor(int u, Fn&& fn) const {
        if (complete_) {
            for (int v = 0; v < n_; ++v)
                if (v != u) fn(v, cost(u, v));
        } else {
            for (const auto& [v, c] : adj_[u]) fn(v, c);
        }
    }

private:
    void check_pair(int u, int v) const;

    int n_;
    bool complete_;
    std::vector<double> dense_;               // upper triangle, complete graphs
    std::vector<std::map<int, double>> adj_;  // sparse graphs
    std::int64_t m_ = 0;
};

// Node-to-component labeling. The induced edge labeling (cut iff endpoints
// differ) satisfies all cycle inequalities by construction.
struct Partition {
    std::vector<int> labels;

    Partition() = default;
    explicit Partition(std::vector<int> l) : labels(std::move(l)) {}

    static Partition singletons(int n);
    static Partition all_in_one(int n);

    int size() const { return static_cast<int>(labels.size()); }
    int component_count() const;
    // relabel components 0..K-1 in order of first appearance
    void normalize();
};

// total cost of edges cut by the partition
double multicut_objective(const CostGraph& g, const Partition& p);

struct MulticutSolution {
    Partition partition;
    double objective;
};

// Exhaustive optimum over all set partitions (restricted growth strings).
// Limited to n <= 12.
MulticutSolution brute_force_multicut(const CostGraph& g);

// Greedy additive edge contraction: repeatedly joins the cluster pair with
// the largest positive aggregated cost.
Partition gaec(const CostGraph& g);

// Kernighan-Lin style local search: single-node relocations (including moves
// to a fresh singleton) and component merges, first improvement, ascending
// order, until a full pass changes nothing. Never increases the objective.
Partition kl_refine(const CostGraph& g, Partition start);

// Checks the cycle inequality on every triangle for an arbitrary 0/1 edge
// labeling (1 = cut). For complete graphs the triangles are exactly the
// chordless cycles.
template <class EdgeLabelFn>
bool validate_cycles_labeling(const CostGraph& g, EdgeLabelFn&& y);

// partition-induced labeling; true for every valid partition
bool validate_cycles(const CostGraph& g, const Partition& p);

// Plain-text exchange format: header "n m", then one "u v cost" line per
// edge; doubles round-trip bit-exactly.
void write_cost_graph(const CostGraph& g, const std::string& path);
CostGraph read_cost_graph(const std::string& path);

// one "node component" line per node
void write_partition(const Partition& p, const std::string& path);
Partition read_partition(const std::string& path);

namespace detail {
std::vector<std::array<int, 3>> list_triangles(const CostGraph& g);
}

template <class EdgeLabelFn>
bool validate_cycles_labeling(const CostGraph& g, EdgeLabelFn&& y) {
    for (const auto& [a, b, c] : detail::list_triangles(g)) {
        const int yab = y(a, b) ? 1 : 0;
        const int yac = y(a, c) ? 1 : 0;
        const int ybc = y(b, c) ? 1 : 0;
        if (yab > yac + ybc) return false;
        if (yac > yab + ybc) return false;
        if (ybc > yab + yac) return false;
    }
    return true;
}

}  // namespace triclust
