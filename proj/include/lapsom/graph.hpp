#ifndef LAPSOM_GRAPH_HPP
#define LAPSOM_GRAPH_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lapsom/error.hpp"

namespace lapsom {

using VertexId = std::size_t;

struct Neighbor
{
    VertexId vertex;
    double weight;
};

struct Edge
{
    VertexId u; // u < v
    VertexId v;
    double weight;
};

/**
 * Undirected graph with strictly positive symmetric weights and stable vertex
 * labels. Vertex positions follow insertion order and never change after
 * construction; adjacency lists are sorted by neighbor position.
 *
 * Instances are immutable. Use GraphBuilder to create one.
 */
class WeightedGraph
{
public:
    WeightedGraph() = default;

    std::size_t vertex_count() const { return labels_.size(); }
    std::size_t edge_count() const { return edge_count_; }
    bool empty() const { return labels_.empty(); }

    const std::string& label(VertexId v) const { return labels_.at(v); }
    const std::vector<std::string>& labels() const { return labels_; }

    std::optional<VertexId> find(const std::string& label) const
    {
        auto it = index_.find(label);
        if (it == index_.end())
            return std::nullopt;
        return it->second;
    }

    VertexId index_of(const std::string& label) const
    {
        auto v = find(label);
        if (!v)
            throw AnalysisError("unknown vertex label '" + label + "'");
        return *v;
    }

    std::span<const Neighbor> neighbors(VertexId v) const { return adjacency_.at(v); }

    /// Unweighted degree.
    std::size_t degree(VertexId v) const { return adjacency_.at(v).size(); }

    /// d_i = sum_j w_ij
    double weighted_degree(VertexId v) const
    {
        double d = 0.0;
        for (const auto& nb : adjacency_.at(v))
            d += nb.weight;
        return d;
    }

    /// Zero when the pair is not an edge.
    double weight(VertexId u, VertexId v) const
    {
        const auto& adj = adjacency_.at(u);
        auto it = std::lower_bound(adj.begin(), adj.end(), v,
                                   [](const Neighbor& nb, VertexId x) { return nb.vertex < x; });
        return (it != adj.end() && it->vertex == v) ? it->weight : 0.0;
    }

    bool has_edge(VertexId u, VertexId v) const { return weight(u, v) > 0.0; }

    double total_weight() const
    {
        double total = 0.0;
        for (const auto& e : edges())
            total += e.weight;
        return total;
    }

    /// Every edge once, ordered by (u, v) with u < v.
    std::vector<Edge> edges() const
    {
        std::vector<Edge> out;
        out.reserve(edge_count_);
        for (VertexId u = 0; u < adjacency_.size(); ++u)
            for (const auto& nb : adjacency_[u])
                if (u < nb.vertex)
                    out.push_back({u, nb.vertex, nb.weight});
        return out;
    }

    /// Symmetry, positivity and loop-freeness of the adjacency structure.
    bool check_invariants() const
    {
        for (VertexId u = 0; u < adjacency_.size(); ++u) {
            for (const auto& nb : adjacency_[u]) {
                if (nb.vertex == u || !(nb.weight > 0.0) || nb.vertex >= adjacency_.size())
                    return false;
                if (weight(nb.vertex, u) != nb.weight)
                    return false;
            }
        }
        return true;
    }

private:
    friend class GraphBuilder;

    std::vector<std::string> labels_;
    std::unordered_map<std::string, VertexId> index_;
    std::vector<std::vector<Neighbor>> adjacency_;
    std::size_t edge_count_ = 0;
};

/// Accumulates vertices and edges; duplicate edges sum their weights.
class GraphBuilder
{
public:
    VertexId add_vertex(const std::string& label)
    {
        auto [it, inserted] = index_.try_emplace(label, labels_.size());
        if (inserted)
            labels_.push_back(label);
        return it->second;
    }

    void add_edge(VertexId u, VertexId v, double w)
    {
        if (u >= labels_.size() || v >= labels_.size())
            throw AnalysisError("edge endpoint out of range");
        if (u == v)
            throw AnalysisError("self-loop on vertex '" + labels_[u] + "'");
        if (!(w > 0.0))
            throw AnalysisError("non-positive weight on edge '" + labels_[u] + "'-'" + labels_[v] + "'");
        if (u > v)
            std::swap(u, v);
        weights_[{u, v}] += w;
    }

    void add_edge(const std::string& a, const std::string& b, double w)
    {
        if (a == b)
            throw AnalysisError("self-loop on vertex '" + a + "'");
        const VertexId u = add_vertex(a);
        const VertexId v = add_vertex(b);
        add_edge(u, v, w);
    }

    std::size_t vertex_count() const { return labels_.size(); }

    WeightedGraph build() const
    {
        WeightedGraph g;
        g.labels_ = labels_;
        g.index_ = index_;
        g.adjacency_.assign(labels_.size(), {});
        for (const auto& [key, w] : weights_) {
            g.adjacency_[key.first].push_back({key.second, w});
            g.adjacency_[key.second].push_back({key.first, w});
        }
        for (auto& adj : g.adjacency_)
            std::sort(adj.begin(), adj.end(),
                      [](const Neighbor& a, const Neighbor& b) { return a.vertex < b.vertex; });
        g.edge_count_ = weights_.size();
        return g;
    }

private:
    std::vector<std::string> labels_;
    std::unordered_map<std::string, VertexId> index_;
    std::map<std::pair<VertexId, VertexId>, double> weights_;
};

/// Same vertices and edges with every weight set to 1.
inline WeightedGraph induced_unweighted(const WeightedGraph& g)
{
    GraphBuilder b;
    for (const auto& l : g.labels())
        b.add_vertex(l);
    for (const auto& e : g.edges())
        b.add_edge(e.u, e.v, 1.0);
    return b.build();
}

/// Subgraph induced by `vertices` (positions); relative order is preserved.
inline WeightedGraph induced_subgraph(const WeightedGraph& g, std::span<const VertexId> vertices)
{
    std::vector<VertexId> sorted(vertices.begin(), vertices.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::vector<std::optional<VertexId>> remap(g.vertex_count());
    GraphBuilder b;
    for (VertexId v : sorted) {
        if (v >= g.vertex_count())
            throw AnalysisError("vertex position out of range");
        remap[v] = b.add_vertex(g.label(v));
    }
    for (VertexId v : sorted)
        for (const auto& nb : g.neighbors(v))
            if (v < nb.vertex && remap[nb.vertex])
                b.add_edge(*remap[v], *remap[nb.vertex], nb.weight);
    return b.build();
}

inline WeightedGraph induced_subgraph(const WeightedGraph& g, const std::vector<std::string>& labels)
{
    std::vector<VertexId> ids;
    ids.reserve(labels.size());
    for (const auto& l : labels)
        ids.push_back(g.index_of(l));
    return induced_subgraph(g, std::span<const VertexId>(ids));
}

/// Component id per vertex. Components are numbered in order of their
/// smallest vertex position.
inline std::vector<std::size_t> component_ids(const WeightedGraph& g, std::size_t* count = nullptr)
{
    constexpr auto unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> comp(g.vertex_count(), unset);
    std::size_t next = 0;
    std::queue<VertexId> q;
    for (VertexId s = 0; s < g.vertex_count(); ++s) {
        if (comp[s] != unset)
            continue;
        comp[s] = next;
        q.push(s);
        while (!q.empty()) {
            const VertexId u = q.front();
            q.pop();
            for (const auto& nb : g.neighbors(u)) {
                if (comp[nb.vertex] == unset) {
                    comp[nb.vertex] = next;
                    q.push(nb.vertex);
                }
            }
        }
        ++next;
    }
    if (count)
        *count = next;
    return comp;
}

inline std::size_t component_count(const WeightedGraph& g)
{
    std::size_t count = 0;
    component_ids(g, &count);
    return count;
}

/// Vertex positions of the largest component; ties go to the component with
/// the smallest minimum vertex position.
inline std::vector<VertexId> largest_component_vertices(const WeightedGraph& g)
{
    if (g.empty())
        throw AnalysisError("largest connected component of an empty graph");
    std::size_t count = 0;
    const auto comp = component_ids(g, &count);
    std::vector<std::size_t> sizes(count, 0);
    for (auto c : comp)
        ++sizes[c];
    const auto best = static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    std::vector<VertexId> out;
    for (VertexId v = 0; v < g.vertex_count(); ++v)
        if (comp[v] == best)
            out.push_back(v);
    return out;
}

inline WeightedGraph largest_connected_component(const WeightedGraph& g)
{
    const auto vs = largest_component_vertices(g);
    if (vs.size() == g.vertex_count())
        return g;
    return induced_subgraph(g, std::span<const VertexId>(vs));
}

/// Order-insensitive fingerprint of the vertex label set (FNV-1a over the
/// sorted labels), rendered as 16 hex digits.
inline std::string vertex_set_hash(const std::vector<std::string>& labels)
{
    std::vector<std::string> sorted = labels;
    std::sort(sorted.begin(), sorted.end());
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](unsigned char c) {
        h ^= c;
        h *= 1099511628211ULL;
    };
    for (const auto& s : sorted) {
        for (unsigned char c : s)
            mix(c);
        mix(0);
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

inline std::string vertex_set_hash(const WeightedGraph& g) { return vertex_set_hash(g.labels()); }

} // namespace lapsom

#endif // LAPSOM_GRAPH_HPP
