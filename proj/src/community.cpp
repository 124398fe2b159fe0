#include "mechsynth/community.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

namespace mechsynth {

namespace {

// Undirected binary view: unordered node pairs with an edge either way.
std::set<std::pair<NodeId, NodeId>> symmetrized_edges(const ConceptGraph& graph) {
    std::set<std::pair<NodeId, NodeId>> pairs;
    for (const auto& [_, e] : graph.edges()) {
        if (e.source == e.target) continue;
        pairs.insert({std::min(e.source, e.target), std::max(e.source, e.target)});
    }
    return pairs;
}

void require_coverage(const ConceptGraph& graph, const Partition& partition) {
    for (const auto& [id, _] : graph.nodes()) {
        if (!partition.assignment.count(id))
            throw std::invalid_argument("partition does not cover node " + id);
    }
}

// Weighted multigraph used by the aggregation phase. Nodes are dense
// indices; self_weight[i] holds the internal weight of a condensed
// community.
struct WeightedGraph {
    std::vector<std::map<std::size_t, double>> adj;  // neighbor -> weight, no self
    std::vector<double> self_weight;
    double total_weight = 0.0;  // W: every undirected edge once, plus self weights

    std::size_t size() const { return adj.size(); }

    std::vector<double> strengths() const {
        std::vector<double> s(size(), 0.0);
        for (std::size_t i = 0; i < size(); ++i) {
            for (const auto& [j, w] : adj[i]) s[i] += w;
            s[i] += 2.0 * self_weight[i];
        }
        return s;
    }
};

struct LocalResult {
    std::vector<int> community;  // dense in [0, count)
    int count = 0;
    bool moved_any = false;
};

std::vector<std::size_t> shuffled_indices(std::size_t n, std::mt19937_64& rng) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    // Fisher-Yates with a rejection-sampled bound for cross-platform
    // reproducibility.
    for (std::size_t i = n; i > 1; --i) {
        const std::uint64_t span = i;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % span;
        std::uint64_t x;
        do {
            x = rng();
        } while (x >= limit);
        std::swap(order[i - 1], order[x % span]);
    }
    return order;
}

// One Louvain level: greedy single-node moves in shuffled order until a
// full sweep makes no improving move. Adjacent communities are scanned in
// ascending id order, so equal gains resolve to the smallest id.
LocalResult local_moving(const WeightedGraph& g, double resolution, std::mt19937_64& rng) {
    const std::size_t n = g.size();
    const double W = g.total_weight;
    const std::vector<double> s = g.strengths();

    std::vector<int> community(n);
    for (std::size_t i = 0; i < n; ++i) community[i] = static_cast<int>(i);
    std::vector<double> community_strength = s;

    LocalResult result;
    if (W <= 0.0) {
        result.community = community;
        result.count = static_cast<int>(n);
        return result;
    }

    const std::vector<std::size_t> order = shuffled_indices(n, rng);
    bool sweep_moved = true;
    while (sweep_moved) {
        sweep_moved = false;
        for (const std::size_t i : order) {
            const int from = community[i];
            // Weight from i into each adjacent community.
            std::map<int, double> weight_to;
            for (const auto& [j, w] : g.adj[i]) weight_to[community[j]] += w;

            community_strength[from] -= s[i];
            const double w_from = weight_to.count(from) ? weight_to.at(from) : 0.0;

            int best = from;
            double best_gain = 0.0;
            for (const auto& [c, w_c] : weight_to) {
                if (c == from) continue;
                const double gain =
                    (w_c - w_from) / W -
                    resolution * s[i] * (community_strength[c] - community_strength[from]) /
                        (2.0 * W * W);
                if (gain > best_gain + 1e-12) {
                    best = c;
                    best_gain = gain;
                }
            }
            community_strength[best] += s[i];
            if (best != from) {
                community[i] = best;
                sweep_moved = true;
                result.moved_any = true;
            }
        }
    }

    // Compact community labels to a dense range.
    std::map<int, int> relabel;
    for (std::size_t i = 0; i < n; ++i) {
        auto it = relabel.emplace(community[i], static_cast<int>(relabel.size())).first;
        community[i] = it->second;
    }
    result.community = std::move(community);
    result.count = static_cast<int>(relabel.size());
    return result;
}

WeightedGraph aggregate(const WeightedGraph& g, const std::vector<int>& community,
                        int count) {
    WeightedGraph out;
    out.adj.resize(count);
    out.self_weight.resize(count, 0.0);
    out.total_weight = g.total_weight;
    for (std::size_t i = 0; i < g.size(); ++i) {
        out.self_weight[community[i]] += g.self_weight[i];
        for (const auto& [j, w] : g.adj[i]) {
            if (j < i) continue;  // each undirected pair once
            const int ci = community[i], cj = community[j];
            if (ci == cj) {
                out.self_weight[ci] += w;
            } else {
                out.adj[ci][cj] += w;
                out.adj[cj][ci] += w;
            }
        }
    }
    return out;
}

double weighted_modularity(const WeightedGraph& g, const std::vector<int>& community,
                           double resolution) {
    const double W = g.total_weight;
    if (W <= 0.0) return 0.0;
    std::map<int, double> internal, strength;
    const std::vector<double> s = g.strengths();
    for (std::size_t i = 0; i < g.size(); ++i) {
        strength[community[i]] += s[i];
        internal[community[i]] += g.self_weight[i];
        for (const auto& [j, w] : g.adj[i]) {
            if (j > i && community[j] == community[i]) internal[community[i]] += w;
        }
    }
    double q = 0.0;
    for (const auto& [c, in_w] : internal) {
        const double frac = strength[c] / (2.0 * W);
        q += in_w / W - resolution * frac * frac;
    }
    return q;
}

}  // namespace

double modularity(const ConceptGraph& graph, const Partition& partition,
                  double resolution) {
    require_coverage(graph, partition);
    const auto pairs = symmetrized_edges(graph);
    const double m = static_cast<double>(pairs.size());
    if (m == 0.0) return 0.0;

    std::map<int, double> internal, degree_sum;
    for (const auto& [a, b] : pairs) {
        const int ca = partition.assignment.at(a);
        const int cb = partition.assignment.at(b);
        degree_sum[ca] += 1.0;
        degree_sum[cb] += 1.0;
        if (ca == cb) internal[ca] += 1.0;
    }
    double q = 0.0;
    std::set<int> seen;
    for (const auto& [_, c] : partition.assignment) seen.insert(c);
    for (const int c : seen) {
        const double in_c = internal.count(c) ? internal.at(c) : 0.0;
        const double k_c = degree_sum.count(c) ? degree_sum.at(c) : 0.0;
        const double frac = k_c / (2.0 * m);
        q += in_c / m - resolution * frac * frac;
    }
    return q;
}

Partition louvain(const ConceptGraph& graph, double resolution, std::uint64_t seed) {
    if (graph.nodes().empty()) throw std::invalid_argument("louvain on empty graph");
    if (resolution <= 0.0) throw std::invalid_argument("resolution must be positive");

    std::vector<NodeId> ids;
    std::map<NodeId, std::size_t> index_of;
    for (const auto& [id, _] : graph.nodes()) {
        index_of[id] = ids.size();
        ids.push_back(id);
    }

    WeightedGraph base;
    base.adj.resize(ids.size());
    base.self_weight.resize(ids.size(), 0.0);
    for (const auto& [a, b] : symmetrized_edges(graph)) {
        const std::size_t i = index_of.at(a), j = index_of.at(b);
        base.adj[i][j] += 1.0;
        base.adj[j][i] += 1.0;
        base.total_weight += 1.0;
    }

    std::vector<int> best_assignment;
    double best_q = -2.0;
    for (std::uint64_t start = 0; start < 4; ++start) {
        std::mt19937_64 rng(seed + start * 0x9E3779B97F4A7C15ull);
        WeightedGraph level = base;
        // membership[i] = community of original node i in the current level.
        std::vector<int> membership(ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) membership[i] = static_cast<int>(i);

        while (true) {
            const LocalResult moved = local_moving(level, resolution, rng);
            for (auto& m : membership) m = moved.community[m];
            if (!moved.moved_any) break;
            level = aggregate(level, moved.community, moved.count);
        }

        const double q = weighted_modularity(base, membership, resolution);
        if (q > best_q + 1e-12) {
            best_q = q;
            best_assignment = membership;
        }
    }

    // Dense relabel by smallest member node id, which is the iteration
    // order of ids.
    Partition out;
    std::map<int, int> relabel;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto it = relabel.emplace(best_assignment[i], static_cast<int>(relabel.size())).first;
        out.assignment[ids[i]] = it->second;
    }
    out.community_count = static_cast<int>(relabel.size());
    return out;
}

std::vector<StructuralHole> structural_holes(const ConceptGraph& graph,
                                            const Partition& partition,
                                            std::size_t max_inter_edges,
                                            std::size_t top_pairs) {
    require_coverage(graph, partition);
    const auto pairs = symmetrized_edges(graph);

    std::map<std::pair<int, int>, std::size_t> inter;
    std::map<NodeId, std::size_t> within_degree;
    for (const auto& [id, _] : graph.nodes()) within_degree[id] = 0;
    for (const auto& [a, b] : pairs) {
        const int ca = partition.assignment.at(a);
        const int cb = partition.assignment.at(b);
        if (ca == cb) {
            ++within_degree[a];
            ++within_degree[b];
        } else {
            ++inter[{std::min(ca, cb), std::max(ca, cb)}];
        }
    }

    std::map<int, std::vector<NodeId>> members;
    for (const auto& [id, c] : partition.assignment) {
        if (graph.has_node(id)) members[c].push_back(id);
    }

    std::vector<StructuralHole> holes;
    for (auto a = members.begin(); a != members.end(); ++a) {
        for (auto b = std::next(a); b != members.end(); ++b) {
            const auto key = std::make_pair(a->first, b->first);
            const std::size_t count = inter.count(key) ? inter.at(key) : 0;
            if (count > max_inter_edges) continue;

            StructuralHole hole;
            hole.community_a = a->first;
            hole.community_b = b->first;
            hole.inter_edge_count = count;

            std::vector<std::pair<NodeId, NodeId>> candidates;
            for (const NodeId& u : a->second) {
                for (const NodeId& v : b->second) candidates.push_back({u, v});
            }
            std::stable_sort(candidates.begin(), candidates.end(),
                             [&](const auto& x, const auto& y) {
                                 const std::size_t px =
                                     within_degree.at(x.first) * within_degree.at(x.second);
                                 const std::size_t py =
                                     within_degree.at(y.first) * within_degree.at(y.second);
                                 if (px != py) return px > py;
                                 return x < y;
                             });
            if (candidates.size() > top_pairs) candidates.resize(top_pairs);
            hole.candidate_pairs = std::move(candidates);
            holes.push_back(std::move(hole));
        }
    }
    return holes;
}

}  // namespace mechsynth
