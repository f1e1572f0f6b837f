// Independent reference implementations used as test oracles. They favour
// obviousness over speed and share no code with the library algorithms.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lapsom/graph.hpp"

namespace oracle {

using lapsom::GraphBuilder;
using lapsom::VertexId;
using lapsom::WeightedGraph;
using EdgeList = std::vector<std::pair<int, int>>;

inline std::string name(int i) { return std::to_string(i + 1); }

/// Graph on vertices "1".."n" (all of them present, in order).
inline WeightedGraph make_graph(int n, const EdgeList& edges, const std::vector<double>& weights = {})
{
    GraphBuilder b;
    for (int i = 0; i < n; ++i)
        b.add_vertex(name(i));
    for (std::size_t e = 0; e < edges.size(); ++e)
        b.add_edge(static_cast<VertexId>(edges[e].first), static_cast<VertexId>(edges[e].second),
                   weights.empty() ? 1.0 : weights[e]);
    return b.build();
}

inline WeightedGraph complete_graph(int n)
{
    EdgeList e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            e.emplace_back(i, j);
    return make_graph(n, e);
}

inline WeightedGraph path_graph(int n)
{
    EdgeList e;
    for (int i = 0; i + 1 < n; ++i)
        e.emplace_back(i, i + 1);
    return make_graph(n, e);
}

/// Erdos-Renyi G(n, p); weights uniform in [1, 5] when `weighted`.
inline WeightedGraph random_graph(int n, double p, std::mt19937_64& rng, bool weighted = false)
{
    std::bernoulli_distribution coin(p);
    std::uniform_int_distribution<int> w(1, 5);
    EdgeList e;
    std::vector<double> ws;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (coin(rng)) {
                e.emplace_back(i, j);
                ws.push_back(weighted ? w(rng) : 1.0);
            }
    return make_graph(n, e, ws);
}

/// G(n, p) plus a random spanning tree, so the result is connected.
inline WeightedGraph random_connected_graph(int n, double p, std::mt19937_64& rng, bool weighted = false)
{
    std::bernoulli_distribution coin(p);
    std::uniform_int_distribution<int> w(1, 5);
    std::set<std::pair<int, int>> seen;
    EdgeList e;
    std::vector<double> ws;
    auto add = [&](int a, int b) {
        if (a > b)
            std::swap(a, b);
        if (seen.insert({a, b}).second) {
            e.emplace_back(a, b);
            ws.push_back(weighted ? w(rng) : 1.0);
        }
    };
    for (int i = 1; i < n; ++i)
        add(i, std::uniform_int_distribution<int>(0, i - 1)(rng));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (coin(rng))
                add(i, j);
    return make_graph(n, e, ws);
}

inline std::vector<std::vector<bool>> adjacency(const WeightedGraph& g)
{
    const auto n = g.vertex_count();
    std::vector<std::vector<bool>> a(n, std::vector<bool>(n, false));
    for (const auto& e : g.edges())
        a[e.u][e.v] = a[e.v][e.u] = true;
    return a;
}

// ---------------------------------------------------------------------------
// Shortest paths by explicit enumeration

/// Unnormalized betweenness by listing every shortest path of every unordered
/// pair and counting interior visits.
inline std::vector<double> betweenness_by_enumeration(const WeightedGraph& g)
{
    const int n = static_cast<int>(g.vertex_count());
    const auto adj = adjacency(g);
    // Floyd-Warshall hop distances.
    const int inf = 1 << 20;
    std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
    for (int i = 0; i < n; ++i) {
        d[i][i] = 0;
        for (int j = 0; j < n; ++j)
            if (adj[i][j])
                d[i][j] = 1;
    }
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);

    std::vector<double> bc(n, 0.0);
    for (int s = 0; s < n; ++s) {
        for (int t = s + 1; t < n; ++t) {
            if (d[s][t] >= inf)
                continue;
            std::vector<std::vector<int>> paths;
            std::vector<int> cur{s};
            std::function<void(int)> walk = [&](int u) {
                if (u == t) {
                    paths.push_back(cur);
                    return;
                }
                for (int v = 0; v < n; ++v)
                    if (adj[u][v] && d[s][v] == d[s][u] + 1 && d[v][t] == d[u][t] - 1) {
                        cur.push_back(v);
                        walk(v);
                        cur.pop_back();
                    }
            };
            walk(s);
            for (const auto& p : paths)
                for (std::size_t k = 1; k + 1 < p.size(); ++k)
                    bc[p[k]] += 1.0 / static_cast<double>(paths.size());
        }
    }
    return bc;
}

// ---------------------------------------------------------------------------
// Perfect communities straight from the definition

/// All maximal vertex sets of size >= 2 that are cliques whose members share
/// exactly the same neighbors outside the set. Members ascending; list sorted.
inline std::vector<std::vector<VertexId>> perfect_communities_by_enumeration(const WeightedGraph& g)
{
    const int n = static_cast<int>(g.vertex_count());
    const auto adj = adjacency(g);
    std::vector<unsigned> valid;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) < 2)
            continue;
        bool ok = true;
        std::vector<int> members;
        for (int i = 0; i < n; ++i)
            if (mask >> i & 1)
                members.push_back(i);
        for (std::size_t a = 0; a < members.size() && ok; ++a)
            for (std::size_t b = a + 1; b < members.size() && ok; ++b)
                ok = adj[members[a]][members[b]];
        for (int out = 0; out < n && ok; ++out) {
            if (mask >> out & 1)
                continue;
            const bool first = adj[members[0]][out];
            for (int m : members)
                ok = ok && adj[m][out] == first;
        }
        if (ok)
            valid.push_back(mask);
    }
    std::vector<std::vector<VertexId>> out;
    for (unsigned m : valid) {
        bool maximal = true;
        for (unsigned other : valid)
            if (other != m && (other & m) == m)
                maximal = false;
        if (!maximal)
            continue;
        std::vector<VertexId> members;
        for (int i = 0; i < n; ++i)
            if (m >> i & 1)
                members.push_back(static_cast<VertexId>(i));
        out.push_back(members);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Planted twin classes

struct Blowup
{
    WeightedGraph graph;
    std::vector<std::vector<VertexId>> planted; // classes of size >= 2
};

/// True when two distinct vertices of `g` have identical closed neighborhoods.
inline bool has_true_twins(const WeightedGraph& g)
{
    const auto adj = adjacency(g);
    const auto n = g.vertex_count();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!adj[i][j])
                continue;
            bool same = true;
            for (std::size_t k = 0; k < n && same; ++k)
                if (k != i && k != j)
                    same = adj[i][k] == adj[j][k];
            if (same)
                return true;
        }
    return false;
}

/// Replaces every vertex v of `base` by a clique of sizes[v] vertices that
/// all inherit v's adjacencies.
inline Blowup blow_up(const WeightedGraph& base, const std::vector<int>& sizes)
{
    std::vector<std::vector<int>> copies(base.vertex_count());
    int next = 0;
    for (std::size_t v = 0; v < base.vertex_count(); ++v)
        for (int c = 0; c < sizes[v]; ++c)
            copies[v].push_back(next++);
    EdgeList e;
    for (std::size_t v = 0; v < base.vertex_count(); ++v)
        for (std::size_t a = 0; a < copies[v].size(); ++a)
            for (std::size_t b = a + 1; b < copies[v].size(); ++b)
                e.emplace_back(copies[v][a], copies[v][b]);
    for (const auto& be : base.edges())
        for (int a : copies[be.u])
            for (int b : copies[be.v])
                e.emplace_back(a, b);
    Blowup out{make_graph(next, e), {}};
    for (const auto& c : copies)
        if (c.size() >= 2)
            out.planted.push_back(std::vector<VertexId>(c.begin(), c.end()));
    return out;
}

// ---------------------------------------------------------------------------
// Cyclic Jacobi eigensolver

struct Eig
{
    Eigen::VectorXd values; // ascending
    Eigen::MatrixXd vectors;
};

inline Eig jacobi(Eigen::MatrixXd a, double tol = 1e-14)
{
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q)
                off += a(p, q) * a(p, q);
        if (std::sqrt(off) < tol * std::max(1.0, a.norm()))
            break;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300)
                    continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) < a(y, y); });
    Eig out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values[i] = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
        out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
    }
    return out;
}

/// Dense Laplacian written out from the definition.
inline Eigen::MatrixXd laplacian(const WeightedGraph& g, bool weighted = true)
{
    const auto n = static_cast<Eigen::Index>(g.vertex_count());
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : g.edges()) {
        const double w = weighted ? e.weight : 1.0;
        const auto u = static_cast<Eigen::Index>(e.u), v = static_cast<Eigen::Index>(e.v);
        l(u, v) -= w;
        l(v, u) -= w;
        l(u, u) += w;
        l(v, v) += w;
    }
    return l;
}

/// exp(-beta L) by Taylor series with scaling and squaring; no eigenvectors.
inline Eigen::MatrixXd heat_kernel_series(const Eigen::MatrixXd& l, double beta)
{
    const Eigen::Index n = l.rows();
    Eigen::MatrixXd a = -beta * l;
    int squarings = 0;
    double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    while (norm > 0.5) {
        a /= 2.0;
        norm /= 2.0;
        ++squarings;
    }
    Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n), term = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k < 30; ++k) {
        term = term * a / static_cast<double>(k);
        sum += term;
    }
    for (int i = 0; i < squarings; ++i)
        sum = sum * sum;
    return sum;
}

// ---------------------------------------------------------------------------
// Exhaustive partition searches

/// Sum of squared distances to cluster means for a labelling of rows.
inline double kmeans_objective(const Eigen::MatrixXd& pts, const std::vector<std::size_t>& label, std::size_t k)
{
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(pts.cols());
        std::size_t count = 0;
        for (Eigen::Index i = 0; i < pts.rows(); ++i)
            if (label[static_cast<std::size_t>(i)] == c) {
                mean += pts.row(i).transpose();
                ++count;
            }
        if (!count)
            continue;
        mean /= static_cast<double>(count);
        for (Eigen::Index i = 0; i < pts.rows(); ++i)
            if (label[static_cast<std::size_t>(i)] == c)
                total += (pts.row(i).transpose() - mean).squaredNorm();
    }
    return total;
}

/// Kernel k-means objective: sum_i ||phi(x_i) - mean of its cluster||^2.
inline double kernel_kmeans_objective(const Eigen::MatrixXd& k, const std::vector<std::size_t>& label)
{
    std::map<std::size_t, std::vector<Eigen::Index>> groups;
    for (std::size_t i = 0; i < label.size(); ++i)
        groups[label[i]].push_back(static_cast<Eigen::Index>(i));
    double total = 0.0;
    for (const auto& [c, members] : groups) {
        double inner = 0.0;
        for (auto a : members)
            for (auto b : members)
                inner += k(a, b);
        const double m = static_cast<double>(members.size());
        for (auto a : members) {
            double cross = 0.0;
            for (auto b : members)
                cross += k(a, b);
            total += k(a, a) - 2.0 * cross / m + inner / (m * m);
        }
    }
    return total;
}

/// Best two-block partition (both blocks nonempty) under `objective`;
/// labels are canonical with vertex 0 in block 0.
inline std::vector<std::size_t> best_two_partition(std::size_t n,
                                                   const std::function<double(const std::vector<std::size_t>&)>& objective)
{
    std::vector<std::size_t> best;
    double best_value = INFINITY;
    for (unsigned mask = 1; mask < (1u << (n - 1)); ++mask) {
        std::vector<std::size_t> label(n, 0);
        for (std::size_t i = 1; i < n; ++i)
            label[i] = (mask >> (i - 1)) & 1;
        const double v = objective(label);
        if (v < best_value - 1e-12) {
            best_value = v;
            best = label;
        }
    }
    return best;
}

/// Labels relabelled by first appearance, so partitions compare directly.
inline std::vector<std::size_t> canonical(const std::vector<std::size_t>& label)
{
    std::map<std::size_t, std::size_t> remap;
    std::vector<std::size_t> out;
    for (auto l : label)
        out.push_back(remap.emplace(l, remap.size()).first->second);
    return out;
}

// ---------------------------------------------------------------------------
// Grid paths

/// Shortest simple path between two units of a rows x cols rook grid by
/// enumerating every simple path.
inline double grid_path_by_enumeration(int rows, int cols, int from, int to, const Eigen::MatrixXd& len)
{
    const int m = rows * cols;
    std::vector<bool> used(static_cast<std::size_t>(m), false);
    double best = INFINITY;
    std::function<void(int, double)> go = [&](int u, double acc) {
        if (u == to) {
            best = std::min(best, acc);
            return;
        }
        const int r = u / cols, c = u % cols;
        const int nbrs[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
        for (const auto& nb : nbrs) {
            if (nb[0] < 0 || nb[0] >= rows || nb[1] < 0 || nb[1] >= cols)
                continue;
            const int v = nb[0] * cols + nb[1];
            if (used[static_cast<std::size_t>(v)])
                continue;
            used[static_cast<std::size_t>(v)] = true;
            go(v, acc + len(u, v));
            used[static_cast<std::size_t>(v)] = false;
        }
    };
    used[static_cast<std::size_t>(from)] = true;
    go(from, 0.0);
    return best;
}

// ---------------------------------------------------------------------------
// Small-world synthetic

/// Watts-Strogatz ring lattice: n vertices, each linked to its `half` nearest
/// neighbors on either side, each edge rewired with probability p. When
/// `target_edges` is set, random edges are then dropped down to that count.
inline WeightedGraph small_world(int n, int half, double p, std::mt19937_64& rng, std::size_t target_edges = 0)
{
    std::set<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int k = 1; k <= half; ++k)
            edges.insert(std::minmax(i, (i + k) % n));
    std::vector<std::pair<int, int>> list(edges.begin(), edges.end());
    std::bernoulli_distribution coin(p);
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::uniform_int_distribution<int> weight(1, 4);
    for (auto& e : list) {
        if (!coin(rng))
            continue;
        for (int attempt = 0; attempt < 20; ++attempt) {
            const int t = pick(rng);
            const auto cand = std::minmax(e.first, t);
            if (t == e.first || edges.count(cand))
                continue;
            edges.erase(std::minmax(e.first, e.second));
            edges.insert(cand);
            e = cand;
            break;
        }
    }
    EdgeList out(edges.begin(), edges.end());
    while (target_edges && out.size() > target_edges) {
        std::uniform_int_distribution<std::size_t> victim(0, out.size() - 1);
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(victim(rng)));
    }
    std::vector<double> w;
    for (std::size_t i = 0; i < out.size(); ++i)
        w.push_back(weight(rng));
    return make_graph(n, out, w);
}

/// Small-world graph on n - twins vertices plus `twins` planted true twins:
/// each copies the closed neighborhood of a distinct source vertex. Edges away
/// from the planted pairs are then dropped at random down to `target_edges`.
inline WeightedGraph small_world_with_twins(int n, int half, double p, int twins, std::size_t target_edges,
                                            std::mt19937_64& rng)
{
    const int base_n = n - twins;
    const auto base = small_world(base_n, half, p, rng);
    std::vector<std::set<int>> adj(static_cast<std::size_t>(n));
    for (const auto& e : base.edges()) {
        adj[e.u].insert(static_cast<int>(e.v));
        adj[e.v].insert(static_cast<int>(e.u));
    }
    std::vector<int> order(static_cast<std::size_t>(base_n));
    for (int i = 0; i < base_n; ++i)
        order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<char> planted(static_cast<std::size_t>(n), 0);
    for (int t = 0; t < twins; ++t) {
        const int src = order[static_cast<std::size_t>(t)], twin = base_n + t;
        for (int nb : std::set<int>(adj[src])) {
            adj[twin].insert(nb);
            adj[nb].insert(twin);
        }
        adj[twin].insert(src);
        adj[src].insert(twin);
        planted[src] = planted[twin] = 1;
    }
    EdgeList edges;
    std::vector<EdgeList::value_type> removable;
    for (int u = 0; u < n; ++u)
        for (int v : adj[u])
            if (u < v)
                (planted[u] || planted[v] ? edges : removable).emplace_back(u, v);
    const std::size_t keep = target_edges > edges.size() ? target_edges - edges.size() : 0;
    std::shuffle(removable.begin(), removable.end(), rng);
    if (removable.size() > keep)
        removable.resize(keep);
    edges.insert(edges.end(), removable.begin(), removable.end());
    std::sort(edges.begin(), edges.end());
    std::uniform_int_distribution<int> weight(1, 4);
    std::vector<double> w;
    for (std::size_t i = 0; i < edges.size(); ++i)
        w.push_back(weight(rng));
    return make_graph(n, edges, w);
}

} // namespace oracle
