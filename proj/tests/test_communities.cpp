#include <gtest/gtest.h>

#include <random>
#include <set>

#include "lapsom/communities.hpp"
#include "oracles.hpp"

using namespace lapsom;

namespace {

WeightedGraph paw() { return oracle::make_graph(4, {{0, 1}, {0, 2}, {1, 2}, {2, 3}}); }

std::vector<std::vector<VertexId>> member_lists(const std::vector<PerfectCommunity>& cs)
{
    std::vector<std::vector<VertexId>> out;
    for (const auto& c : cs)
        out.push_back(c.members);
    return out;
}

EigenDecomposition unweighted_decomp(const WeightedGraph& g)
{
    return eig_sym(laplacian(g, LaplacianMode::Unweighted).matrix);
}

} // namespace

TEST(PerfectCommunities, Examples)
{
    const auto k3 = find_perfect_communities(oracle::complete_graph(3));
    ASSERT_EQ(k3.size(), 1u);
    EXPECT_EQ(k3[0].members, (std::vector<VertexId>{0, 1, 2}));
    EXPECT_EQ(k3[0].inside_degree, 2u);

    const auto p = find_perfect_communities(paw());
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p[0].members, (std::vector<VertexId>{0, 1}));
    EXPECT_EQ(p[0].outside_neighbors, (std::vector<VertexId>{2}));
    EXPECT_EQ(p[0].inside_degree, 2u);
    EXPECT_EQ(p[0].expected_eigenvalue(), 3.0);

    EXPECT_TRUE(find_perfect_communities(oracle::make_graph(4, {{0, 1}, {0, 2}, {0, 3}})).empty());
    EXPECT_TRUE(find_perfect_communities(oracle::make_graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}})).empty());
}

TEST(PerfectCommunities, WeightsAreIgnored)
{
    const auto g = oracle::make_graph(4, {{0, 1}, {0, 2}, {1, 2}, {2, 3}}, {9, 1, 2, 5});
    EXPECT_EQ(member_lists(find_perfect_communities(g)), member_lists(find_perfect_communities(paw())));
}

TEST(PerfectCommunities, MatchDefinitionOnRandomGraphs)
{
    std::mt19937_64 rng(1);
    const double probs[] = {0.2, 0.5, 0.8};
    for (int t = 0; t < 200; ++t) {
        const int n = 1 + static_cast<int>(rng() % 10);
        const auto g = oracle::random_graph(n, probs[t % 3], rng);
        const auto got = find_perfect_communities(g);
        EXPECT_EQ(member_lists(got), oracle::perfect_communities_by_enumeration(g)) << "trial " << t;
        std::set<VertexId> seen;
        for (const auto& c : got) {
            for (VertexId v : c.members)
                EXPECT_TRUE(seen.insert(v).second) << "communities overlap";
            for (VertexId v : c.members)
                EXPECT_EQ(g.degree(v), c.inside_degree);
        }
    }
}

TEST(Verification, Paw)
{
    const auto g = paw();
    const auto c = find_perfect_communities(g).at(0);
    const auto r = verify_community_spectral(g, c, unweighted_decomp(g));
    EXPECT_EQ(r.eigenvalue, 3.0);
    ASSERT_EQ(r.residuals.size(), 1u);
    EXPECT_LE(r.residuals[0], 1e-12);
    EXPECT_EQ(r.multiplicity, 1);
    EXPECT_TRUE(r.multiplicity_ok);
    EXPECT_EQ(r.constancy_vectors, 3u); // eigenvalues 0, 1 and 4
    EXPECT_LE(r.constancy_max_deviation, 1e-10);
    EXPECT_TRUE(r.verified);
}

TEST(Verification, CompleteGraph)
{
    const auto g = oracle::complete_graph(3);
    const auto c = find_perfect_communities(g).at(0);
    const auto r = verify_community_spectral(g, c, unweighted_decomp(g));
    EXPECT_EQ(r.multiplicity, 2);
    EXPECT_TRUE(r.verified);
}

TEST(Verification, RejectsNonCommunity)
{
    const auto g = paw();
    PerfectCommunity fake;
    fake.members = {2, 3};
    fake.inside_degree = 3;
    EXPECT_THROW(verify_community_spectral(g, fake, unweighted_decomp(g)), AnalysisError);
}

TEST(Verification, PlantedTwinClasses)
{
    std::mt19937_64 rng(6);
    for (int t = 0; t < 20; ++t) {
        WeightedGraph base;
        do
            base = oracle::random_connected_graph(4 + static_cast<int>(rng() % 12), 0.3, rng);
        while (oracle::has_true_twins(base));
        std::vector<int> sizes;
        for (std::size_t v = 0; v < base.vertex_count(); ++v)
            sizes.push_back(1 + static_cast<int>(rng() % 5));
        const auto blow = oracle::blow_up(base, sizes);
        const auto found = find_perfect_communities(blow.graph);
        EXPECT_EQ(member_lists(found), blow.planted);
        const auto decomp = unweighted_decomp(blow.graph);
        for (const auto& c : found) {
            const auto r = verify_community_spectral(blow.graph, c, decomp);
            EXPECT_TRUE(r.verified);
            EXPECT_LE(r.max_residual, 1e-8);
            EXPECT_LE(r.constancy_max_deviation, 1e-8);
            EXPECT_GE(r.multiplicity, static_cast<Eigen::Index>(c.size() - 1));
        }
    }
}

TEST(RichClub, Examples)
{
    // K4 on 1..4 plus pendant path 1-5-6
    const auto g = oracle::make_graph(6, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}, {0, 4}, {4, 5}});
    const auto rc = rich_club(g);
    EXPECT_EQ(rc.members, (std::vector<VertexId>{0, 1, 2, 3, 4}));
    EXPECT_EQ(rc.density_curve.size(), 6u);

    const auto k5 = rich_club(oracle::complete_graph(5));
    EXPECT_EQ(k5.members.size(), 5u);
    for (const auto& [size, d] : k5.density_curve)
        EXPECT_EQ(d, 1.0);

    EXPECT_EQ(rich_club(oracle::make_graph(4, {{0, 1}, {0, 2}, {0, 3}})).members.size(), 4u);
    EXPECT_THROW(rich_club(GraphBuilder().build()), AnalysisError);
}

TEST(RichClub, PrefixClosedAndDegreeOrdered)
{
    std::mt19937_64 rng(14);
    for (int t = 0; t < 30; ++t) {
        const auto g = oracle::random_connected_graph(25, 0.15, rng);
        const auto rc = rich_club(g);
        for (std::size_t k = 1; k <= rc.members.size(); ++k) {
            std::vector<VertexId> prefix(rc.members.begin(), rc.members.begin() + static_cast<std::ptrdiff_t>(k));
            const auto d = hop_diameter(induced_subgraph(g, std::span<const VertexId>(prefix)));
            ASSERT_TRUE(d);
            EXPECT_LE(*d, rc.diameter_limit);
        }
        for (std::size_t i = 1; i < rc.members.size(); ++i) {
            const auto a = rc.members[i - 1], b = rc.members[i];
            EXPECT_TRUE(g.degree(a) > g.degree(b) || (g.degree(a) == g.degree(b) && a < b));
        }
    }
}

TEST(Centrals, TwoTrianglesJoinedThroughMiddle)
{
    // triangles {a1,a2,a3}, {b1,b2,b3}; path a3 - m - b3
    GraphBuilder b;
    for (auto [x, y] : std::vector<std::pair<std::string, std::string>>{
             {"a1", "a2"}, {"a1", "a3"}, {"a2", "a3"}, {"b1", "b2"}, {"b1", "b3"}, {"b2", "b3"}, {"a3", "m"}, {"m", "b3"}})
        b.add_edge(x, y, 1.0);
    const auto g = b.build();
    const auto comms = find_perfect_communities(g);
    ASSERT_EQ(comms.size(), 2u);
    RichClub empty;
    const auto sel = central_vertices(g, comms, empty, std::size_t{3});
    EXPECT_EQ(sel.component_curve.front(), (std::pair<std::size_t, std::size_t>{0, 2}));
    EXPECT_EQ(sel.component_curve.back().second, 1u);
    std::set<std::string> chosen;
    for (auto v : sel.chosen_vertices)
        chosen.insert(g.label(v));
    EXPECT_EQ(chosen, (std::set<std::string>{"a3", "b3", "m"}));
    EXPECT_EQ(g.label(sel.ranked_vertices.front()), "m");
}

TEST(Centrals, ZeroAndAuto)
{
    const auto g = paw();
    const auto comms = find_perfect_communities(g);
    const auto zero = central_vertices(g, comms, RichClub{}, std::size_t{0});
    EXPECT_TRUE(zero.chosen_vertices.empty());
    EXPECT_EQ(zero.component_curve.size(), 1u);

    // Communities already induce one component: no drop, auto picks 0.
    const auto k4 = oracle::complete_graph(4);
    const auto sel = central_vertices(k4, find_perfect_communities(k4), RichClub{}, AutoK{});
    EXPECT_EQ(sel.chosen_k, 0u);
    EXPECT_THROW(central_vertices(g, comms, RichClub{}, std::size_t{99}), AnalysisError);
}

TEST(Centrals, CurveRisesByAtMostOne)
{
    std::mt19937_64 rng(20);
    for (int t = 0; t < 20; ++t) {
        const auto g = oracle::random_connected_graph(30, 0.08, rng);
        const auto comms = find_perfect_communities(g);
        const auto sel = central_vertices(g, comms, rich_club(g), AutoK{});
        for (std::size_t i = 1; i < sel.component_curve.size(); ++i)
            EXPECT_LE(static_cast<long>(sel.component_curve[i].second) -
                          static_cast<long>(sel.component_curve[i - 1].second),
                      1);
        for (std::size_t i = 1; i < sel.ranked_betweenness.size(); ++i)
            EXPECT_GE(sel.ranked_betweenness[i - 1], sel.ranked_betweenness[i]);
    }
}

TEST(Summary, BridgedTrianglesWithAndWithoutCentrals)
{
    // Triangles {1,2,3} and {4,5,6} whose hubs 3 and 4 both touch 7.
    const auto g = oracle::make_graph(7, {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}, {2, 6}, {3, 6}});
    const auto comms = find_perfect_communities(g);
    ASSERT_EQ(comms.size(), 2u);
    const auto bare = summary_graph(g, comms, RichClub{}, {});
    EXPECT_EQ(bare.glyphs.size(), 2u);
    EXPECT_TRUE(bare.edges.empty());
    EXPECT_TRUE(bare.glyphs[0].isolated);

    const auto sel = central_vertices(g, comms, RichClub{}, std::size_t{3});
    const auto full = summary_graph(g, comms, RichClub{}, sel.chosen_vertices);
    EXPECT_GT(full.glyphs.size(), 2u);
    // connected glyph graph
    lapsom::detail::DisjointSets ds(full.glyphs.size());
    for (const auto& e : full.edges)
        ds.unite(e.a, e.b);
    for (std::size_t i = 1; i < full.glyphs.size(); ++i)
        EXPECT_EQ(ds.find(i), ds.find(0));
}

TEST(Summary, SingleCommunityAndMetadata)
{
    const auto g = paw();
    const auto comms = find_perfect_communities(g);
    MetadataTable meta;
    meta["1"].date = 1300;
    meta["2"].date = 1320;
    meta["1"].location = "A";
    meta["2"].location = "A";
    const auto s = summary_graph(g, comms, RichClub{}, {}, &meta);
    ASSERT_EQ(s.glyphs.size(), 1u);
    EXPECT_TRUE(s.edges.empty());
    EXPECT_EQ(*s.glyphs[0].mean_date, 1310.0);
    EXPECT_EQ(*s.glyphs[0].dominant_location, "A");
    EXPECT_EQ(s.glyphs[0].location_share, 1.0);

    meta["ghost"].date = 1;
    EXPECT_THROW(summary_graph(g, comms, RichClub{}, {}, &meta), AnalysisError);
}

TEST(Summary, RichClubClaimsSharedVertices)
{
    const auto g = paw();
    const auto comms = find_perfect_communities(g);
    RichClub club;
    club.members = {2, 0};
    const auto s = summary_graph(g, comms, club, {});
    std::set<VertexId> seen;
    for (const auto& gl : s.glyphs)
        for (auto v : gl.members)
            EXPECT_TRUE(seen.insert(v).second);
    ASSERT_EQ(s.glyphs.size(), 2u);
    EXPECT_EQ(s.glyphs[0].members, (std::vector<VertexId>{1})); // community shrank
    EXPECT_EQ(s.glyphs[1].kind, GlyphKind::RichClub);
}
