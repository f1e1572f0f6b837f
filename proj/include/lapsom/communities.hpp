#ifndef LAPSOM_COMMUNITIES_HPP
#define LAPSOM_COMMUNITIES_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "lapsom/error.hpp"
#include "lapsom/graph.hpp"
#include "lapsom/ingest.hpp"
#include "lapsom/metrics.hpp"
#include "lapsom/spectral.hpp"

namespace lapsom {

/// A clique of >= 2 vertices sharing the same neighbors outside it.
struct PerfectCommunity
{
    std::vector<VertexId> members;           // ascending positions
    std::vector<VertexId> outside_neighbors; // ascending positions
    std::size_t inside_degree = 0;           // unweighted degree of any member

    std::size_t size() const { return members.size(); }
    double expected_eigenvalue() const { return static_cast<double>(inside_degree) + 1.0; }
};

/**
 * All maximal perfect communities of the induced non-weighted graph.
 *
 * Two vertices belong to a common perfect community exactly when their closed
 * neighborhoods N[i] = N(i) + {i} coincide, so the maximal communities are the
 * closed-neighborhood classes of size >= 2. Output is ordered by smallest
 * member position.
 */
inline std::vector<PerfectCommunity> find_perfect_communities(const WeightedGraph& g)
{
    std::map<std::vector<VertexId>, std::vector<VertexId>> classes;
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
        if (g.degree(v) == 0)
            continue;
        std::vector<VertexId> closed;
        closed.reserve(g.degree(v) + 1);
        bool inserted = false;
        for (const auto& nb : g.neighbors(v)) {
            if (!inserted && v < nb.vertex) {
                closed.push_back(v);
                inserted = true;
            }
            closed.push_back(nb.vertex);
        }
        if (!inserted)
            closed.push_back(v);
        classes[std::move(closed)].push_back(v);
    }

    std::vector<PerfectCommunity> out;
    for (auto& [closed, members] : classes) {
        if (members.size() < 2)
            continue;
        PerfectCommunity c;
        c.members = members;
        std::set_difference(closed.begin(), closed.end(), members.begin(), members.end(),
                            std::back_inserter(c.outside_neighbors));
        c.inside_degree = g.degree(members.front());
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(),
              [](const PerfectCommunity& a, const PerfectCommunity& b) { return a.members.front() < b.members.front(); });
    return out;
}

struct CommunityVerification
{
    double eigenvalue = 0.0; // d + 1
    // ||L~(e_i - e_j) - (d+1)(e_i - e_j)||_2 for j over members[1..]
    std::vector<double> residuals;
    double max_residual = 0.0;
    Eigen::Index multiplicity = 0; // size of the eigenvalue group holding d + 1
    bool multiplicity_ok = false;
    // Largest distance of a normalized difference vector to the eigenspace of d + 1.
    double eigenspace_gap = 0.0;
    // Largest max-min spread over the members among eigenvectors outside the group.
    double constancy_max_deviation = 0.0;
    std::size_t constancy_vectors = 0;
    bool verified = false;
};

/**
 * Checks a community against the spectrum of the unweighted Laplacian: the
 * indicator differences e_i - e_j are eigenvectors for d + 1, that eigenvalue
 * has multiplicity >= k - 1, and every eigenvector outside that eigenspace is
 * constant over the members.
 *
 * Throws when a residual exceeds `tol`; the community then is not perfect.
 */
inline CommunityVerification verify_community_spectral(const WeightedGraph& g, const PerfectCommunity& community,
                                                       const EigenDecomposition& decomp, double tol = 1e-8)
{
    const auto n = static_cast<Eigen::Index>(g.vertex_count());
    if (decomp.size() != n)
        throw AnalysisError("decomposition order does not match the graph");
    if (community.size() < 2)
        throw AnalysisError("a perfect community has at least two members");

    CommunityVerification rep;
    rep.eigenvalue = community.expected_eigenvalue();
    const auto& m = community.members;
    const auto k = static_cast<Eigen::Index>(m.size());

    auto apply_laplacian = [&g, n](VertexId a, VertexId b) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
        for (auto [x, sign] : {std::pair{a, 1.0}, std::pair{b, -1.0}}) {
            r[static_cast<Eigen::Index>(x)] += sign * static_cast<double>(g.degree(x));
            for (const auto& nb : g.neighbors(x))
                r[static_cast<Eigen::Index>(nb.vertex)] -= sign;
        }
        return r;
    };

    for (std::size_t j = 1; j < m.size(); ++j) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        v[static_cast<Eigen::Index>(m[0])] = 1.0;
        v[static_cast<Eigen::Index>(m[j])] = -1.0;
        const double res = (apply_laplacian(m[0], m[j]) - rep.eigenvalue * v).norm();
        rep.residuals.push_back(res);
        rep.max_residual = std::max(rep.max_residual, res);
    }
    if (rep.max_residual > tol)
        throw AnalysisError("community at vertex '" + g.label(m[0]) + "' is not perfect: residual " +
                            std::to_string(rep.max_residual));

    const double group_tol = eigenvalue_tolerance(decomp.values);
    std::optional<EigenGroup> group;
    for (const auto& gr : eigenvalue_groups(decomp.values)) {
        if (decomp.values[gr.begin] - group_tol <= rep.eigenvalue && rep.eigenvalue <= decomp.values[gr.end - 1] + group_tol) {
            group = gr;
            break;
        }
    }

    if (group) {
        rep.multiplicity = group->multiplicity();
        const Eigen::MatrixXd basis = decomp.vectors.middleCols(group->begin, group->multiplicity());
        for (std::size_t j = 1; j < m.size(); ++j) {
            Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
            u[static_cast<Eigen::Index>(m[0])] = M_SQRT1_2;
            u[static_cast<Eigen::Index>(m[j])] = -M_SQRT1_2;
            rep.eigenspace_gap = std::max(rep.eigenspace_gap, (u - basis * (basis.transpose() * u)).norm());
        }
    } else {
        rep.eigenspace_gap = 1.0;
    }
    rep.multiplicity_ok = rep.multiplicity >= k - 1;

    for (Eigen::Index c = 0; c < decomp.size(); ++c) {
        if (group && c >= group->begin && c < group->end)
            continue;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (VertexId v : m) {
            const double x = decomp.vectors(static_cast<Eigen::Index>(v), c);
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        rep.constancy_max_deviation = std::max(rep.constancy_max_deviation, hi - lo);
        ++rep.constancy_vectors;
    }

    rep.verified = rep.multiplicity_ok && rep.eigenspace_gap <= tol && rep.constancy_max_deviation <= tol;
    return rep;
}

// ---------------------------------------------------------------------------
// Rich-club

struct RichClub
{
    std::vector<VertexId> members; // non-increasing degree, ties by position
    // (prefix size, density) for every prefix of the degree order.
    std::vector<std::pair<std::size_t, double>> density_curve;
    std::size_t diameter_limit = 2;
};

/// Vertices sorted by non-increasing unweighted degree, ties by position.
inline std::vector<VertexId> degree_order(const WeightedGraph& g)
{
    std::vector<VertexId> order(g.vertex_count());
    std::iota(order.begin(), order.end(), VertexId{0});
    std::stable_sort(order.begin(), order.end(),
                     [&g](VertexId a, VertexId b) { return g.degree(a) > g.degree(b); });
    return order;
}

/**
 * Greedy rich-club: extends the member list along the degree order while the
 * induced subgraph keeps hop diameter <= diameter_limit. The first candidate
 * that breaks the limit ends the scan. A single vertex has density 1.
 */
inline RichClub rich_club(const WeightedGraph& g, std::size_t diameter_limit = 2)
{
    if (g.empty())
        throw AnalysisError("rich-club of an empty graph");
    RichClub rc;
    rc.diameter_limit = diameter_limit;
    const auto order = degree_order(g);

    std::vector<char> in_prefix(g.vertex_count(), 0);
    std::size_t links = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (const auto& nb : g.neighbors(order[i]))
            links += in_prefix[nb.vertex];
        in_prefix[order[i]] = 1;
        const double size = static_cast<double>(i + 1);
        rc.density_curve.emplace_back(i + 1, i == 0 ? 1.0 : static_cast<double>(links) / (size * (size - 1.0) / 2.0));
    }

    for (VertexId v : order) {
        auto candidate = rc.members;
        candidate.push_back(v);
        const auto diam = hop_diameter(induced_subgraph(g, std::span<const VertexId>(candidate)));
        if (!diam || *diam > diameter_limit)
            break;
        rc.members = std::move(candidate);
    }
    return rc;
}

// ---------------------------------------------------------------------------
// Central vertices

struct AutoK
{
    std::size_t min_drop = 1;
};

using CentralK = std::variant<std::size_t, AutoK>;

struct CentralSelection
{
    std::vector<VertexId> ranked_vertices; // candidates by decreasing betweenness
    std::vector<double> ranked_betweenness;
    // (k, number of components of the subgraph induced by communities,
    //  rich-club and the top-k candidates)
    std::vector<std::pair<std::size_t, std::size_t>> component_curve;
    std::size_t chosen_k = 0;
    std::vector<VertexId> chosen_vertices;
};

namespace detail {

struct DisjointSets
{
    std::vector<std::size_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t x)
    {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a == b)
            return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

} // namespace detail

/**
 * Ranks the vertices outside the communities and the rich-club by betweenness
 * and records how the component count of S_k evolves as the top-k are added.
 * AutoK picks the k right after the largest single-step drop (ties: smaller k);
 * without a drop of at least min_drop, k = 0.
 */
inline CentralSelection central_vertices(const WeightedGraph& g, const std::vector<PerfectCommunity>& communities,
                                         const RichClub& club, CentralK k = AutoK{})
{
    const std::size_t n = g.vertex_count();
    std::vector<char> in_set(n, 0);
    for (const auto& c : communities)
        for (VertexId v : c.members)
            in_set[v] = 1;
    for (VertexId v : club.members)
        in_set[v] = 1;

    const auto bc = betweenness(g);
    CentralSelection sel;
    for (VertexId v = 0; v < n; ++v)
        if (!in_set[v])
            sel.ranked_vertices.push_back(v);
    std::stable_sort(sel.ranked_vertices.begin(), sel.ranked_vertices.end(),
                     [&bc](VertexId a, VertexId b) { return bc[a] > bc[b]; });
    for (VertexId v : sel.ranked_vertices)
        sel.ranked_betweenness.push_back(bc[v]);

    std::size_t limit = sel.ranked_vertices.size();
    if (const auto* explicit_k = std::get_if<std::size_t>(&k)) {
        if (*explicit_k > limit)
            throw AnalysisError("k=" + std::to_string(*explicit_k) + " exceeds the " + std::to_string(limit) +
                                " candidate vertices");
        limit = *explicit_k;
    }

    detail::DisjointSets sets(n);
    std::size_t components = 0;
    auto add = [&](VertexId v) {
        in_set[v] = 1;
        ++components;
        for (const auto& nb : g.neighbors(v))
            if (in_set[nb.vertex] && sets.unite(v, nb.vertex))
                --components;
    };
    std::fill(in_set.begin(), in_set.end(), 0);
    for (const auto& c : communities)
        for (VertexId v : c.members)
            if (!in_set[v])
                add(v);
    for (VertexId v : club.members)
        if (!in_set[v])
            add(v);
    sel.component_curve.emplace_back(0, components);
    for (std::size_t i = 0; i < limit; ++i) {
        add(sel.ranked_vertices[i]);
        sel.component_curve.emplace_back(i + 1, components);
    }

    if (const auto* explicit_k = std::get_if<std::size_t>(&k)) {
        sel.chosen_k = *explicit_k;
    } else {
        const std::size_t min_drop = std::get<AutoK>(k).min_drop;
        std::size_t best_drop = 0;
        for (std::size_t i = 1; i < sel.component_curve.size(); ++i) {
            const auto prev = sel.component_curve[i - 1].second;
            const auto cur = sel.component_curve[i].second;
            if (prev > cur && prev - cur > best_drop && prev - cur >= min_drop) {
                best_drop = prev - cur;
                sel.chosen_k = i;
            }
        }
    }
    sel.chosen_vertices.assign(sel.ranked_vertices.begin(),
                               sel.ranked_vertices.begin() + static_cast<std::ptrdiff_t>(sel.chosen_k));
    return sel;
}

// ---------------------------------------------------------------------------
// Summary graph

enum class GlyphKind { Community, RichClub, Central };

inline const char* to_string(GlyphKind k)
{
    switch (k) {
    case GlyphKind::Community: return "community";
    case GlyphKind::RichClub: return "rich_club";
    case GlyphKind::Central: return "central";
    }
    return "?";
}

struct Glyph
{
    std::string id;
    GlyphKind kind = GlyphKind::Community;
    std::vector<VertexId> members;
    std::optional<std::size_t> community_index; // position in the community list
    std::optional<double> mean_date;
    std::optional<std::string> dominant_location;
    double location_share = 0.0; // share of members at the dominant location
    std::optional<std::string> dominant_family;
    double family_share = 0.0;
    bool isolated = false; // community glyph without any glyph edge

    std::size_t size() const { return members.size(); }
};

struct GlyphEdge
{
    std::size_t a; // glyph indices, a < b
    std::size_t b;
    double weight;          // summed original weight
    std::size_t edge_count; // number of original edges
};

struct SummaryGraph
{
    std::vector<Glyph> glyphs;
    std::vector<GlyphEdge> edges;
};

namespace detail {

inline std::pair<std::optional<std::string>, double> modal(const std::vector<std::string>& values, std::size_t size)
{
    if (values.empty())
        return {std::nullopt, 0.0};
    std::map<std::string, std::size_t> counts;
    for (const auto& v : values)
        ++counts[v];
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it)
        if (it->second > best->second)
            best = it;
    return {best->first, static_cast<double>(best->second) / static_cast<double>(size)};
}

} // namespace detail

/**
 * Glyph-level summary: one glyph per perfect community, one for the rich-club
 * and one per central vertex. Vertices claimed by both a community and the
 * rich-club go to the rich-club. Glyphs are linked when at least one original
 * edge joins their vertex sets.
 */
inline SummaryGraph summary_graph(const WeightedGraph& g, const std::vector<PerfectCommunity>& communities,
                                  const RichClub& club, const std::vector<VertexId>& centrals,
                                  const MetadataTable* metadata = nullptr)
{
    if (metadata)
        for (const auto& [label, meta] : *metadata)
            if (!g.find(label))
                throw AnalysisError("metadata label '" + label + "' is not a vertex of the graph");

    constexpr auto none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> owner(g.vertex_count(), none);
    SummaryGraph s;
    std::vector<char> in_club(g.vertex_count(), 0);
    for (VertexId v : club.members)
        in_club[v] = 1;

    for (std::size_t ci = 0; ci < communities.size(); ++ci) {
        Glyph glyph;
        glyph.id = "c" + std::to_string(ci);
        glyph.kind = GlyphKind::Community;
        glyph.community_index = ci;
        for (VertexId v : communities[ci].members)
            if (!in_club[v] && owner[v] == none)
                glyph.members.push_back(v);
        if (glyph.members.empty())
            continue;
        for (VertexId v : glyph.members)
            owner[v] = s.glyphs.size();
        s.glyphs.push_back(std::move(glyph));
    }
    if (!club.members.empty()) {
        Glyph glyph;
        glyph.id = "rich_club";
        glyph.kind = GlyphKind::RichClub;
        glyph.members = club.members;
        std::sort(glyph.members.begin(), glyph.members.end());
        for (VertexId v : glyph.members)
            owner[v] = s.glyphs.size();
        s.glyphs.push_back(std::move(glyph));
    }
    for (VertexId v : centrals) {
        if (owner[v] != none)
            throw AnalysisError("central vertex '" + g.label(v) + "' already belongs to another glyph");
        Glyph glyph;
        glyph.id = "v" + std::to_string(v);
        glyph.kind = GlyphKind::Central;
        glyph.members = {v};
        owner[v] = s.glyphs.size();
        s.glyphs.push_back(std::move(glyph));
    }

    if (metadata) {
        for (auto& glyph : s.glyphs) {
            double date_sum = 0.0;
            std::size_t dated = 0;
            std::vector<std::string> locations, families;
            for (VertexId v : glyph.members) {
                auto it = metadata->find(g.label(v));
                if (it == metadata->end())
                    continue;
                if (it->second.date) {
                    date_sum += *it->second.date;
                    ++dated;
                }
                if (it->second.location)
                    locations.push_back(*it->second.location);
                if (it->second.family)
                    families.push_back(*it->second.family);
            }
            if (dated)
                glyph.mean_date = date_sum / static_cast<double>(dated);
            std::tie(glyph.dominant_location, glyph.location_share) = detail::modal(locations, glyph.size());
            std::tie(glyph.dominant_family, glyph.family_share) = detail::modal(families, glyph.size());
        }
    }

    std::map<std::pair<std::size_t, std::size_t>, std::pair<double, std::size_t>> links;
    for (const auto& e : g.edges()) {
        const auto a = owner[e.u], b = owner[e.v];
        if (a == none || b == none || a == b)
            continue;
        auto& [w, count] = links[std::minmax(a, b)];
        w += e.weight;
        ++count;
    }
    std::vector<char> linked(s.glyphs.size(), 0);
    for (const auto& [key, wc] : links) {
        s.edges.push_back({key.first, key.second, wc.first, wc.second});
        linked[key.first] = linked[key.second] = 1;
    }
    for (std::size_t i = 0; i < s.glyphs.size(); ++i)
        s.glyphs[i].isolated = s.glyphs[i].kind == GlyphKind::Community && !linked[i];
    return s;
}

} // namespace lapsom

#endif // LAPSOM_COMMUNITIES_HPP
