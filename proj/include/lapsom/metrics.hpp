#ifndef LAPSOM_METRICS_HPP
#define LAPSOM_METRICS_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "lapsom/graph.hpp"
#include "lapsom/parallel.hpp"

namespace lapsom {

struct GraphStats
{
    std::size_t vertex_count = 0;
    std::size_t edge_count = 0;
    double total_weight = 0.0;
    double density = 0.0;
    std::size_t diameter = 0;       // hops
    double mean_shortest_path = 0.0; // hops, over unordered pairs
    double local_connectivity = 0.0;
    std::size_t component_count = 0;
    // Diameter and mean path were measured on the largest component only.
    bool paths_on_largest_component = false;
};

namespace detail {

constexpr std::size_t unreachable = std::numeric_limits<std::size_t>::max();

/// Hop distances from `source`.
inline void bfs_hops(const WeightedGraph& g, VertexId source, std::vector<std::size_t>& dist,
                     std::vector<VertexId>& queue)
{
    dist.assign(g.vertex_count(), unreachable);
    queue.clear();
    dist[source] = 0;
    queue.push_back(source);
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const VertexId u = queue[head];
        for (const auto& nb : g.neighbors(u)) {
            if (dist[nb.vertex] == unreachable) {
                dist[nb.vertex] = dist[u] + 1;
                queue.push_back(nb.vertex);
            }
        }
    }
}

} // namespace detail

/// Density of the neighbor-induced subgraph of `v`; requires degree >= 2.
inline double neighborhood_density(const WeightedGraph& g, VertexId v, std::vector<char>& mark)
{
    const auto nbrs = g.neighbors(v);
    for (const auto& nb : nbrs)
        mark[nb.vertex] = 1;
    std::size_t twice_links = 0;
    for (const auto& nb : nbrs)
        for (const auto& nb2 : g.neighbors(nb.vertex))
            twice_links += mark[nb2.vertex];
    for (const auto& nb : nbrs)
        mark[nb.vertex] = 0;
    const double k = static_cast<double>(nbrs.size());
    return (static_cast<double>(twice_links) / 2.0) / (k * (k - 1.0) / 2.0);
}

/// Metrology of a graph. Path statistics use hop counts and are taken on the
/// largest component when the graph is disconnected. Local connectivity
/// averages neighborhood density over vertices of degree >= 2.
inline GraphStats graph_stats(const WeightedGraph& g)
{
    GraphStats s;
    s.vertex_count = g.vertex_count();
    s.edge_count = g.edge_count();
    s.total_weight = g.total_weight();
    const double n = static_cast<double>(s.vertex_count);
    s.density = s.vertex_count >= 2 ? static_cast<double>(s.edge_count) / (n * (n - 1.0) / 2.0) : 0.0;
    if (g.empty())
        return s;

    s.component_count = component_count(g);
    s.paths_on_largest_component = s.component_count > 1;
    const WeightedGraph core = s.paths_on_largest_component ? largest_connected_component(g) : g;

    constexpr std::size_t block = 32;
    const std::size_t cn = core.vertex_count();
    const std::size_t blocks = (cn + block - 1) / block;
    std::vector<std::size_t> block_max(blocks, 0);
    std::vector<std::uint64_t> block_sum(blocks, 0);
    parallel_blocks(blocks, [&](std::size_t b) {
        std::vector<std::size_t> dist;
        std::vector<VertexId> queue;
        for (VertexId src = b * block; src < std::min(cn, (b + 1) * block); ++src) {
            detail::bfs_hops(core, src, dist, queue);
            for (VertexId t = src + 1; t < cn; ++t) {
                block_max[b] = std::max(block_max[b], dist[t]);
                block_sum[b] += dist[t];
            }
        }
    });
    std::uint64_t total = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        s.diameter = std::max(s.diameter, block_max[b]);
        total += block_sum[b];
    }
    const double pairs = static_cast<double>(cn) * static_cast<double>(cn - 1) / 2.0;
    s.mean_shortest_path = cn >= 2 ? static_cast<double>(total) / pairs : 0.0;

    std::vector<char> mark(g.vertex_count(), 0);
    double sum = 0.0;
    std::size_t counted = 0;
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        if (g.degree(v) < 2)
            continue;
        sum += neighborhood_density(g, v, mark);
        ++counted;
    }
    s.local_connectivity = counted ? sum / static_cast<double>(counted) : 0.0;
    return s;
}

/// Hop-count diameter; nullopt when disconnected. Used by the rich-club scan.
inline std::optional<std::size_t> hop_diameter(const WeightedGraph& g)
{
    std::vector<std::size_t> dist;
    std::vector<VertexId> queue;
    std::size_t diam = 0;
    for (VertexId s = 0; s < g.vertex_count(); ++s) {
        detail::bfs_hops(g, s, dist, queue);
        if (queue.size() != g.vertex_count())
            return std::nullopt;
        diam = std::max(diam, dist[queue.back()]);
    }
    return diam;
}

/**
 * Unnormalized shortest-path betweenness on the unweighted graph (Brandes
 * accumulation). Each unordered pair {s,t} contributes the fraction of its
 * shortest paths passing through v; endpoints are excluded.
 */
inline std::vector<double> betweenness(const WeightedGraph& g)
{
    const std::size_t n = g.vertex_count();
    constexpr std::size_t block = 16;
    const std::size_t blocks = (n + block - 1) / block;
    std::vector<std::vector<double>> partial(blocks);

    parallel_blocks(blocks, [&](std::size_t b) {
        std::vector<double> acc(n, 0.0), sigma(n), delta(n);
        std::vector<std::size_t> dist;
        std::vector<VertexId> order;
        for (VertexId s = b * block; s < std::min(n, (b + 1) * block); ++s) {
            std::fill(sigma.begin(), sigma.end(), 0.0);
            std::fill(delta.begin(), delta.end(), 0.0);
            dist.assign(n, detail::unreachable);
            order.clear();
            sigma[s] = 1.0;
            dist[s] = 0;
            order.push_back(s);
            for (std::size_t head = 0; head < order.size(); ++head) {
                const VertexId u = order[head];
                for (const auto& nb : g.neighbors(u)) {
                    const VertexId w = nb.vertex;
                    if (dist[w] == detail::unreachable) {
                        dist[w] = dist[u] + 1;
                        order.push_back(w);
                    }
                    if (dist[w] == dist[u] + 1)
                        sigma[w] += sigma[u];
                }
            }
            for (auto it = order.rbegin(); it != order.rend(); ++it) {
                const VertexId w = *it;
                for (const auto& nb : g.neighbors(w)) {
                    const VertexId u = nb.vertex;
                    if (dist[u] != detail::unreachable && dist[u] + 1 == dist[w])
                        delta[u] += sigma[u] / sigma[w] * (1.0 + delta[w]);
                }
                if (w != s)
                    acc[w] += delta[w];
            }
        }
        partial[b] = std::move(acc);
    });

    std::vector<double> bc(n, 0.0);
    for (const auto& p : partial)
        for (std::size_t v = 0; v < n; ++v)
            bc[v] += p[v];
    for (auto& x : bc)
        x /= 2.0; // every unordered pair was counted from both ends
    return bc;
}

struct DegreePoint
{
    double degree;
    double fraction; // share of vertices with degree >= `degree`
};

/// Empirical complementary cumulative degree distribution over the distinct
/// degree values, ascending. `weighted` uses d_i = sum_j w_ij.
inline std::vector<DegreePoint> cumulative_degree_distribution(const WeightedGraph& g, bool weighted)
{
    std::map<double, std::size_t> counts;
    for (VertexId v = 0; v < g.vertex_count(); ++v)
        ++counts[weighted ? g.weighted_degree(v) : static_cast<double>(g.degree(v))];
    std::vector<DegreePoint> out;
    std::size_t remaining = g.vertex_count();
    const double n = static_cast<double>(g.vertex_count());
    for (const auto& [k, c] : counts) {
        out.push_back({k, static_cast<double>(remaining) / n});
        remaining -= c;
    }
    return out;
}

} // namespace lapsom

#endif // LAPSOM_METRICS_HPP
