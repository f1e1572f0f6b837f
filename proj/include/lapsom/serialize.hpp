#ifndef LAPSOM_SERIALIZE_HPP
#define LAPSOM_SERIALIZE_HPP

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "lapsom/communities.hpp"
#include "lapsom/error.hpp"
#include "lapsom/graph.hpp"
#include "lapsom/metrics.hpp"
#include "lapsom/som.hpp"

namespace lapsom::io {

using Json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

namespace detail {

inline Json labels_of(const WeightedGraph& g, const std::vector<VertexId>& vs)
{
    Json out = Json::array();
    for (VertexId v : vs)
        out.push_back(g.label(v));
    return out;
}

inline Json optional_number(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

inline Json optional_string(const std::optional<std::string>& x) { return x ? Json(*x) : Json(nullptr); }

inline std::string hex64(std::uint64_t h)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::uint64_t parse_hex64(const std::string& s)
{
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used, 16);
        if (used != s.size())
            throw InputError("bad hex value '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw InputError("bad hex value '" + s + "'");
    }
}

} // namespace detail

inline Json header(const std::string& kind)
{
    return Json{{"schema_version", kSchemaVersion}, {"kind", kind}};
}

inline Json to_json(const GraphStats& s)
{
    auto j = header("stats");
    j["vertex_count"] = s.vertex_count;
    j["edge_count"] = s.edge_count;
    j["total_weight"] = s.total_weight;
    j["density"] = s.density;
    j["diameter"] = s.diameter;
    j["mean_shortest_path"] = s.mean_shortest_path;
    j["local_connectivity"] = s.local_connectivity;
    j["component_count"] = s.component_count;
    j["paths_on_largest_component"] = s.paths_on_largest_component;
    return j;
}

inline Json to_json(const WeightedGraph& g, const SummaryGraph& s)
{
    Json glyphs = Json::array();
    for (const auto& gl : s.glyphs) {
        Json x{{"id", gl.id},
               {"kind", to_string(gl.kind)},
               {"size", gl.size()},
               {"members", detail::labels_of(g, gl.members)},
               {"mean_date", detail::optional_number(gl.mean_date)},
               {"dominant_location", detail::optional_string(gl.dominant_location)},
               {"location_share", gl.location_share},
               {"dominant_family", detail::optional_string(gl.dominant_family)},
               {"family_share", gl.family_share},
               {"isolated", gl.isolated}};
        x["community_index"] = gl.community_index ? Json(*gl.community_index) : Json(nullptr);
        glyphs.push_back(std::move(x));
    }
    Json edges = Json::array();
    for (const auto& e : s.edges)
        edges.push_back(
            {{"a", s.glyphs[e.a].id}, {"b", s.glyphs[e.b].id}, {"weight", e.weight}, {"edge_count", e.edge_count}});
    return Json{{"glyphs", std::move(glyphs)}, {"edges", std::move(edges)}};
}

/// Everything `communities` produces except the spectral verification.
inline Json communities_json(const WeightedGraph& g, const std::vector<PerfectCommunity>& comms, const RichClub& club,
                             const CentralSelection& centrals, const SummaryGraph& summary)
{
    auto j = header("communities");
    j["vertex_set_hash"] = vertex_set_hash(g);
    j["labels"] = g.labels();
    Json list = Json::array();
    for (std::size_t i = 0; i < comms.size(); ++i) {
        const auto& c = comms[i];
        list.push_back({{"id", "c" + std::to_string(i)},
                        {"members", detail::labels_of(g, c.members)},
                        {"outside_neighbors", detail::labels_of(g, c.outside_neighbors)},
                        {"inside_degree", c.inside_degree},
                        {"expected_eigenvalue", c.expected_eigenvalue()}});
    }
    j["communities"] = std::move(list);

    Json curve = Json::array();
    for (const auto& [size, density] : club.density_curve)
        curve.push_back({{"size", size}, {"density", density}});
    j["rich_club"] = {{"members", detail::labels_of(g, club.members)},
                      {"diameter_limit", club.diameter_limit},
                      {"density_curve", std::move(curve)}};

    Json ranked = Json::array();
    for (std::size_t i = 0; i < centrals.ranked_vertices.size(); ++i)
        ranked.push_back({{"label", g.label(centrals.ranked_vertices[i])},
                          {"betweenness", centrals.ranked_betweenness[i]}});
    Json comp = Json::array();
    for (const auto& [k, count] : centrals.component_curve)
        comp.push_back({{"k", k}, {"components", count}});
    j["centrals"] = {{"ranked", std::move(ranked)},
                     {"component_curve", std::move(comp)},
                     {"chosen_k", centrals.chosen_k},
                     {"chosen", detail::labels_of(g, centrals.chosen_vertices)}};
    j["summary"] = to_json(g, summary);
    return j;
}

inline Json verification_json(const WeightedGraph& g, const std::vector<PerfectCommunity>& comms,
                              const std::vector<CommunityVerification>& reports, double tol)
{
    auto j = header("verification");
    j["vertex_set_hash"] = vertex_set_hash(g);
    j["tolerance"] = tol;
    Json list = Json::array();
    bool all = true;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        all = all && r.verified;
        list.push_back({{"id", "c" + std::to_string(i)},
                        {"members", detail::labels_of(g, comms[i].members)},
                        {"eigenvalue", r.eigenvalue},
                        {"residuals", r.residuals},
                        {"max_residual", r.max_residual},
                        {"multiplicity", r.multiplicity},
                        {"required_multiplicity", comms[i].size() - 1},
                        {"multiplicity_ok", r.multiplicity_ok},
                        {"eigenspace_gap", r.eigenspace_gap},
                        {"constancy_vectors", r.constancy_vectors},
                        {"constancy_max_deviation", r.constancy_max_deviation},
                        {"verified", r.verified}});
    }
    j["communities"] = std::move(list);
    j["all_verified"] = all;
    return j;
}

// ---------------------------------------------------------------------------
// SOM model

inline Json to_json(const SomConfig& c, std::size_t n)
{
    Json init = std::holds_alternative<PcaInit>(c.init)
                    ? Json{{"type", "kernel_pca"}}
                    : Json{{"type", "random"}, {"seed", std::get<RandomInit>(c.init).seed}};
    return Json{{"rows", c.grid.rows},
                {"cols", c.grid.cols},
                {"initial_temperature", c.t0()},
                {"anneal_ratio", c.anneal_ratio},
                {"final_epsilon", c.final_epsilon},
                {"iteration_guard", c.iteration_guard(n)},
                {"init", std::move(init)}};
}

inline SomConfig som_config_from_json(const Json& j)
{
    SomConfig c;
    c.grid = {j.at("rows").get<int>(), j.at("cols").get<int>()};
    c.initial_temperature = j.at("initial_temperature").get<double>();
    c.anneal_ratio = j.at("anneal_ratio").get<double>();
    c.final_epsilon = j.at("final_epsilon").get<double>();
    c.max_iterations = j.at("iteration_guard").get<std::size_t>();
    const auto& init = j.at("init");
    const auto type = init.at("type").get<std::string>();
    if (type == "kernel_pca")
        c.init = PcaInit{};
    else if (type == "random")
        c.init = RandomInit{init.at("seed").get<std::uint64_t>()};
    else
        throw InputError("unknown init type '" + type + "'");
    return c;
}

/// Model file. Gamma is written row-major with shortest round-trip decimals,
/// so reloading reproduces every coefficient bit for bit.
inline Json to_json(const SomModel& m, const std::string& vertex_set)
{
    auto j = header("som_model");
    j["vertex_set_hash"] = vertex_set;
    j["labels"] = m.labels;
    j["beta"] = m.beta;
    j["config"] = to_json(m.config, m.assignment.size());
    Json gamma = Json::array();
    for (Eigen::Index r = 0; r < m.gamma.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.gamma.cols(); ++c)
            row.push_back(m.gamma(r, c));
        gamma.push_back(std::move(row));
    }
    j["gamma"] = std::move(gamma);
    j["assignment"] = m.assignment;
    Json log = Json::array();
    for (const auto& it : m.log)
        log.push_back({{"temperature", it.temperature},
                       {"changes", it.changes},
                       {"final_phase", it.final_phase},
                       {"quantization_error", it.quantization_error},
                       {"assignment_hash", detail::hex64(it.assignment_hash)},
                       {"cycle", it.cycle}});
    j["log"] = std::move(log);
    j["cycles_detected"] = m.cycles_detected;
    Json lineage = Json::array();
    for (const auto& step : m.lineage)
        lineage.push_back({{"parent_vertex_set", step.parent_vertex_set}, {"unit", step.unit}});
    j["lineage"] = std::move(lineage);
    return j;
}

inline void require_schema(const Json& j, const std::string& kind)
{
    if (!j.is_object() || j.value("schema_version", "") != kSchemaVersion)
        throw InputError("unsupported or missing schema_version (expected \"" + std::string(kSchemaVersion) + "\")");
    if (j.value("kind", "") != kind)
        throw InputError("expected a '" + kind + "' document, found '" + j.value("kind", "") + "'");
}

inline SomModel som_model_from_json(const Json& j)
{
    require_schema(j, "som_model");
    try {
        SomModel m;
        m.config = som_config_from_json(j.at("config"));
        m.beta = j.at("beta").get<double>();
        m.labels = j.at("labels").get<std::vector<std::string>>();
        m.assignment = j.at("assignment").get<std::vector<UnitId>>();
        const auto& gamma = j.at("gamma");
        const auto rows = static_cast<Eigen::Index>(gamma.size());
        const auto cols = static_cast<Eigen::Index>(m.assignment.size());
        if (rows != static_cast<Eigen::Index>(m.config.grid.units()))
            throw InputError("model gamma has " + std::to_string(rows) + " rows for a grid of " +
                             std::to_string(m.config.grid.units()) + " units");
        m.gamma.resize(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const auto& row = gamma.at(static_cast<std::size_t>(r));
            if (static_cast<Eigen::Index>(row.size()) != cols)
                throw InputError("model gamma row " + std::to_string(r) + " has the wrong length");
            for (Eigen::Index c = 0; c < cols; ++c)
                m.gamma(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
        }
        for (auto u : m.assignment)
            if (u >= m.config.grid.units())
                throw InputError("model assigns a vertex to unit " + std::to_string(u) + " outside the grid");
        if (!m.labels.empty() && m.labels.size() != m.assignment.size())
            throw InputError("model labels and assignment differ in length");
        for (const auto& it : j.at("log"))
            m.log.push_back({it.at("temperature").get<double>(), it.at("changes").get<std::size_t>(),
                             it.at("final_phase").get<bool>(), it.at("quantization_error").get<double>(),
                             detail::parse_hex64(it.at("assignment_hash").get<std::string>()),
                             it.at("cycle").get<bool>()});
        m.cycles_detected = j.at("cycles_detected").get<std::size_t>();
        for (const auto& step : j.at("lineage"))
            m.lineage.push_back({step.at("parent_vertex_set").get<std::string>(), step.at("unit").get<UnitId>()});
        return m;
    } catch (const Json::exception& e) {
        throw InputError(std::string("malformed model file: ") + e.what());
    }
}

inline Json to_json(const QualityReport& q)
{
    auto j = header("quality");
    j["quantization_error"] = q.quantization_error;
    j["kaski_lagus"] = detail::optional_number(q.kaski_lagus);
    if (!q.kaski_lagus)
        j["kaski_lagus_reason"] = q.kaski_lagus_reason;
    j["q_modularity"] = detail::optional_number(q.q_modularity);
    if (!q.q_modularity)
        j["q_modularity_reason"] = q.q_modularity_reason;
    j["nonempty_units"] = q.nonempty_units;
    j["unit_sizes"] = q.unit_sizes;
    return j;
}

inline Json to_json(const std::vector<SelectionRow>& rows)
{
    auto j = header("selection");
    Json list = Json::array();
    for (const auto& r : rows)
        list.push_back({{"beta", r.beta},
                        {"rows", r.grid.rows},
                        {"cols", r.grid.cols},
                        {"quantization_error", r.quantization_error},
                        {"kaski_lagus", detail::optional_number(r.kaski_lagus)},
                        {"q_modularity", detail::optional_number(r.q_modularity)},
                        {"nonempty_units", r.nonempty_units},
                        {"kl_rank", r.kl_rank ? Json(r.kl_rank) : Json(nullptr)},
                        {"q_rank", r.q_rank ? Json(r.q_rank) : Json(nullptr)}});
    j["maps"] = std::move(list);
    return j;
}

} // namespace lapsom::io

#endif // LAPSOM_SERIALIZE_HPP
