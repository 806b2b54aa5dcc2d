#include "triclust/multicut.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "triclust/util.hpp"

namespace triclust {

namespace {

inline std::size_t tri_index(int n, int u, int v) {
    // u < v required
    return static_cast<std::size_t>(u) * n - static_cast<std::size_t>(u) * (u + 1) / 2 + (v - u - 1);
}

}  // namespace

CostGraph::CostGraph(int n) : n_(n), complete_(false), adj_(n) {
    if (n <= 0) throw std::invalid_argument("CostGraph: node count must be positive");
}

CostGraph CostGraph::complete(int n, double initial_cost) {
    if (n <= 0) throw std::invalid_argument("CostGraph: node count must be positive");
    CostGraph g(n);
    g.complete_ = true;
    g.adj_.clear();
    g.dense_.assign(static_cast<std::size_t>(n) * (n - 1) / 2, initial_cost);
    g.m_ = static_cast<std::int64_t>(n) * (n - 1) / 2;
    return g;
}

void CostGraph::check_pair(int u, int v) const {
    if (u < 0 || u >= n_ || v < 0 || v >= n_) throw std::invalid_argument("CostGraph: node out of range");
    if (u == v) throw std::invalid_argument("CostGraph: self loops are not allowed");
}

void CostGraph::set_cost(int u, int v, double cost) {
    check_pair(u, v);
    if (!std::isfinite(cost)) throw std::invalid_argument("CostGraph: cost must be finite");
    if (u > v) std::swap(u, v);
    if (complete_) {
        dense_[tri_index(n_, u, v)] = cost;
    } else {
        auto [it, inserted] = adj_[u].insert_or_assign(v, cost);
        (void)it;
        adj_[v].insert_or_assign(u, cost);
        if (inserted) ++m_;
    }
}

double CostGraph::cost(int u, int v) const {
    check_pair(u, v);
    if (u > v) std::swap(u, v);
    if (complete_) return dense_[tri_index(n_, u, v)];
    const auto it = adj_[u].find(v);
    return it == adj_[u].end() ? 0.0 : it->second;
}

bool CostGraph::has_edge(int u, int v) const {
    check_pair(u, v);
    if (complete_) return true;
    return adj_[u].count(v) > 0;
}

std::int64_t CostGraph::edge_count() const { return m_; }

Partition Partition::singletons(int n) {
    Partition p;
    p.labels.resize(n);
    std::iota(p.labels.begin(), p.labels.end(), 0);
    return p;
}

Partition Partition::all_in_one(int n) {
    Partition p;
    p.labels.assign(n, 0);
    return p;
}

int Partition::component_count() const {
    std::unordered_map<int, int> seen;
    for (int l : labels) seen.emplace(l, 1);
    return static_cast<int>(seen.size());
}

void Partition::normalize() {
    std::unordered_map<int, int> remap;
    int next = 0;
    for (int& l : labels) {
        auto [it, inserted] = remap.emplace(l, next);
        if (inserted) ++next;
        l = it->second;
    }
}

double multicut_objective(const CostGraph& g, const Partition& p) {
    if (static_cast<int>(p.labels.size()) != g.node_count())
        throw std::invalid_argument("multicut_objective: label array does not cover the graph");
    double total = 0.0;
    g.for_each_edge([&](int u, int v, double c) {
        if (p.labels[u] != p.labels[v]) total += c;
    });
    return total;
}

MulticutSolution brute_force_multicut(const CostGraph& g) {
    const int n = g.node_count();
    if (n > 12) throw std::invalid_argument("brute_force_multicut: limited to n <= 12, got n = " + std::to_string(n));

    // enumerate restricted growth strings: a[0] = 0, a[i] <= 1 + max(a[0..i-1])
    std::vector<int> a(n, 0), prefix_max(n, 0);
    Partition best(a);
    double best_obj = multicut_objective(g, best);
    for (;;) {
        int i = n - 1;
        while (i > 0 && a[i] > prefix_max[i - 1]) --i;  // a[i] == prefix_max[i-1] + 1 cannot grow
        if (i == 0) break;
        ++a[i];
        prefix_max[i] = std::max(prefix_max[i - 1], a[i]);
        for (int j = i + 1; j < n; ++j) {
            a[j] = 0;
            prefix_max[j] = prefix_max[j - 1];
        }
        Partition cand(a);
        const double obj = multicut_objective(g, cand);
        if (obj < best_obj) {
            best_obj = obj;
            best = cand;
        }
    }
    best.normalize();
    return {best, best_obj};
}

namespace {

struct PqEntry {
    double cost;
    int a, b;  // cluster ids, a < b
};

struct PqOrder {
    bool operator()(const PqEntry& lhs, const PqEntry& rhs) const {
        if (lhs.cost != rhs.cost) return lhs.cost < rhs.cost;  // max-heap on cost
        if (lhs.a != rhs.a) return lhs.a > rhs.a;              // then lowest pair first
        return lhs.b > rhs.b;
    }
};

}  // namespace

Partition gaec(const CostGraph& g) {
    const int n = g.node_count();
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };

    std::vector<std::unordered_map<int, double>> adj(n);
    std::priority_queue<PqEntry, std::vector<PqEntry>, PqOrder> pq;
    g.for_each_edge([&](int u, int v, double c) {
        adj[u].emplace(v, c);
        adj[v].emplace(u, c);
        if (c > 0.0) pq.push({c, u, v});
    });

    while (!pq.empty()) {
        const PqEntry top = pq.top();
        pq.pop();
        if (find(top.a) != top.a || find(top.b) != top.b) continue;  // stale: cluster was absorbed
        const auto it = adj[top.a].find(top.b);
        if (it == adj[top.a].end() || it->second != top.cost) continue;  // stale: aggregate changed

        // contract b into a (a < b, so the surviving id is the lower one)
        const int u = top.a, v = top.b;
        parent[v] = u;
        adj[u].erase(v);
        adj[v].erase(u);
        for (const auto& [w, c] : adj[v]) {
            double merged = c;
            if (const auto uw = adj[u].find(w); uw != adj[u].end()) merged += uw->second;
            adj[u][w] = merged;
            adj[w].erase(v);
            adj[w][u] = merged;
            if (merged > 0.0) pq.push({merged, std::min(u, w), std::max(u, w)});
        }
        adj[v].clear();
    }

    Partition p;
    p.labels.resize(n);
    for (int i = 0; i < n; ++i) p.labels[i] = find(i);
    p.normalize();
    return p;
}

Partition kl_refine(const CostGraph& g, Partition start) {
    const int n = g.node_count();
    if (static_cast<int>(start.labels.size()) != n)
        throw std::invalid_argument("kl_refine: partition does not cover the graph");
    start.normalize();
    std::vector<int>& labels = start.labels;

    constexpr int kMaxPasses = 10000;
    bool changed = true;
    for (int pass = 0; changed && pass < kMaxPasses; ++pass) {
        changed = false;

        // single-node relocations, ascending node order, first improvement
        int k = 1 + *std::max_element(labels.begin(), labels.end());
        int next_fresh = k;
        std::vector<double> comp_cost(n + k, 0.0);
        std::vector<int> touched;
        for (int i = 0; i < n; ++i) {
            touched.clear();
            g.for_each_neighbor(i, [&](int j, double c) {
                const int cj = labels[j];
                if (comp_cost[cj] == 0.0) touched.push_back(cj);
                comp_cost[cj] += c;
            });
            const int cur = labels[i];
            const double leave_cost = comp_cost[cur];
            int move_to = -1;
            for (int c = 0; c < next_fresh; ++c) {
                if (c == cur) continue;
                if (leave_cost - comp_cost[c] < 0.0) {
                    move_to = c;
                    break;
                }
            }
            if (move_to < 0 && leave_cost < 0.0) move_to = next_fresh++;  // split off as a singleton
            if (move_to >= 0) {
                labels[i] = move_to;
                changed = true;
            }
            for (int c : touched) comp_cost[c] = 0.0;
            comp_cost[cur] = 0.0;
        }

        // component merges, ascending pair order, first improvement
        start.normalize();
        k = 1 + *std::max_element(labels.begin(), labels.end());
        if (k > 1) {
            std::vector<std::vector<double>> between(k, std::vector<double>(k, 0.0));
            g.for_each_edge([&](int u, int v, double c) {
                const int a = labels[u], b = labels[v];
                if (a != b) between[std::min(a, b)][std::max(a, b)] += c;
            });
            std::vector<bool> dead(k, false);
            bool merged_any = true;
            while (merged_any) {
                merged_any = false;
                for (int a = 0; a < k && !merged_any; ++a) {
                    if (dead[a]) continue;
                    for (int b = a + 1; b < k; ++b) {
                        if (dead[b]) continue;
                        if (between[a][b] > 0.0) {
                            for (int i = 0; i < n; ++i)
                                if (labels[i] == b) labels[i] = a;
                            for (int c = 0; c < k; ++c) {
                                if (dead[c] || c == a || c == b) continue;
                                const double bc = c < b ? between[std::min(c, b)][std::max(c, b)] : between[b][c];
                                between[std::min(a, c)][std::max(a, c)] += bc;
                            }
                            dead[b] = true;
                            changed = true;
                            merged_any = true;
                            break;
                        }
                    }
                }
            }
        }
        start.normalize();
    }
    return start;
}

namespace detail {

std::vector<std::array<int, 3>> list_triangles(const CostGraph& g) {
    const int n = g.node_count();
    std::vector<std::array<int, 3>> triangles;
    if (g.is_complete()) {
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                for (int c = b + 1; c < n; ++c) triangles.push_back({a, b, c});
        return triangles;
    }
    for (int a = 0; a < n; ++a) {
        std::vector<int> nbrs;
        g.for_each_neighbor(a, [&](int v, double) {
            if (v > a) nbrs.push_back(v);
        });
        for (std::size_t i = 0; i < nbrs.size(); ++i)
            for (std::size_t j = i + 1; j < nbrs.size(); ++j)
                if (g.has_edge(nbrs[i], nbrs[j])) triangles.push_back({a, nbrs[i], nbrs[j]});
    }
    return triangles;
}

}  // namespace detail

bool validate_cycles(const CostGraph& g, const Partition& p) {
    if (static_cast<int>(p.labels.size()) != g.node_count())
        throw std::invalid_argument("validate_cycles: partition does not cover the graph");
    return validate_cycles_labeling(g, [&](int u, int v) { return p.labels[u] != p.labels[v]; });
}

void write_cost_graph(const CostGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_cost_graph: cannot open " + path);
    out << g.node_count() << ' ' << g.edge_count() << '\n';
    g.for_each_edge([&](int u, int v, double c) { out << u << ' ' << v << ' ' << format_double(c) << '\n'; });
}

CostGraph read_cost_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_cost_graph: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_cost_graph: missing header");
    std::istringstream header(line);
    int n = 0;
    std::int64_t m = 0;
    if (!(header >> n >> m)) throw std::runtime_error("read_cost_graph: bad header '" + line + "'");
    CostGraph g(n);
    std::int64_t count = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::istringstream row(line);
        int u = 0, v = 0;
        std::string cost_text;
        if (!(row >> u >> v >> cost_text)) throw std::runtime_error("read_cost_graph: bad edge line '" + line + "'");
        g.set_cost(u, v, parse_double(cost_text));
        ++count;
    }
    if (count != m) throw std::runtime_error("read_cost_graph: header announced " + std::to_string(m) +
                                             " edges, file has " + std::to_string(count));
    return g;
}

void write_partition(const Partition& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_partition: cannot open " + path);
    for (std::size_t i = 0; i < p.labels.size(); ++i) out << i << ' ' << p.labels[i] << '\n';
}

Partition read_partition(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_partition: cannot open " + path);
    std::vector<std::pair<int, int>> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::istringstream row(line);
        int node = 0, comp = 0;
        if (!(row >> node >> comp)) throw std::runtime_error("read_partition: bad line '" + line + "'");
        entries.emplace_back(node, comp);
    }
    Partition p;
    p.labels.assign(entries.size(), 0);
    for (const auto& [node, comp] : entries) {
        if (node < 0 || node >= static_cast<int>(entries.size()))
            throw std::runtime_error("read_partition: node index out of range");
        p.labels[node] = comp;
    }
    return p;
}

}  // namespace triclust
