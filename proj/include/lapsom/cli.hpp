#ifndef LAPSOM_CLI_HPP
#define LAPSOM_CLI_HPP

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lapsom/communities.hpp"
#include "lapsom/diagnostics.hpp"
#include "lapsom/dot.hpp"
#include "lapsom/error.hpp"
#include "lapsom/ingest.hpp"
#include "lapsom/metrics.hpp"
#include "lapsom/serialize.hpp"
#include "lapsom/som.hpp"

namespace lapsom::cli {

namespace fs = std::filesystem;

enum class Format { Json, Csv, Dot };

struct RunConfig
{
    std::string command;
    fs::path input;
    bool contracts = false;
    std::optional<fs::path> metadata;
    fs::path out;
    std::set<Format> formats = {Format::Json, Format::Csv, Format::Dot};

    // ingestion
    int window_years = 15;
    std::set<std::string> excluded_lords;

    // communities
    std::size_t diameter_limit = 2;
    CentralK k = AutoK{};
    double tolerance = 1e-8;

    // som / drilldown
    std::optional<double> beta; // default 0.05, or the parent's beta when drilling down
    GridTopology grid{7, 7};
    bool random_init = false;
    std::uint64_t seed = 0;
    bool weighted_modularity = true;
    bool select = false;
    std::vector<double> select_betas = {0.01, 0.02, 0.03, 0.04, 0.05};
    std::vector<GridTopology> select_grids = {{5, 5}, {6, 6}, {7, 7}, {8, 8}, {9, 9}, {10, 10}};

    // drilldown / export-overlay
    std::optional<fs::path> model;
    std::optional<UnitId> unit;
    std::optional<fs::path> communities;

    bool wants(Format f) const { return formats.count(f) > 0; }
};

inline constexpr double kDefaultBeta = 0.05;

// ---------------------------------------------------------------------------
// Small helpers

namespace detail {

/// Shortest round-trip decimal; stable across runs.
inline std::string num(double x)
{
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), end);
}

inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::ifstream open_in(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw InputError("cannot open '" + p.string() + "'");
    return in;
}

inline void write_file(const fs::path& p, const std::string& content)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(content.data(), static_cast<std::streamsize>(content.size())))
        throw InputError("cannot write '" + p.string() + "'");
}

inline io::Json read_json(const fs::path& p)
{
    auto in = open_in(p);
    try {
        return io::Json::parse(in);
    } catch (const io::Json::exception& e) {
        throw InputError("'" + p.string() + "' is not valid JSON: " + e.what());
    }
}

inline void prepare_out(const fs::path& out)
{
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out))
        throw InputError("cannot create output directory '" + out.string() + "'");
}

/// Hex color for a date, black at the earliest date and white at the latest.
inline std::string gray(double date, double lo, double hi)
{
    int level = 128;
    if (hi > lo)
        level = static_cast<int>(std::lround(255.0 * std::clamp((date - lo) / (hi - lo), 0.0, 1.0)));
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", level, level, level);
    return buf;
}

/// Node side length so that glyph surfaces are proportional to sizes.
inline std::string side(std::size_t size, std::size_t largest)
{
    const double s = 0.3 + 1.2 * std::sqrt(static_cast<double>(size) / static_cast<double>(std::max<std::size_t>(1, largest)));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", s);
    return buf;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Loading

struct LoadedInput
{
    WeightedGraph graph;
    std::optional<MetadataTable> metadata;
};

inline LoadedInput load_input(const RunConfig& cfg)
{
    LoadedInput li;
    auto in = detail::open_in(cfg.input);
    try {
        if (cfg.contracts) {
            const auto records = load_contracts(in);
            ContractGraphConfig cg;
            cg.window_years = cfg.window_years;
            cg.excluded_lords = cfg.excluded_lords;
            li.graph = build_from_contracts(records, cg);
            if (!cfg.metadata) {
                MetadataTable dates;
                for (const auto& [person, date] : person_mean_dates(records))
                    if (li.graph.find(person))
                        dates[person].date = date;
                li.metadata = std::move(dates);
            }
        } else {
            li.graph = load_edge_list(in);
        }
    } catch (const InputError& e) {
        throw InputError(cfg.input.string() + ": " + e.what());
    }
    if (cfg.metadata) {
        auto min = detail::open_in(*cfg.metadata);
        try {
            li.metadata = load_metadata(min);
        } catch (const InputError& e) {
            throw InputError(cfg.metadata->string() + ": " + e.what());
        }
        for (const auto& [label, meta] : *li.metadata)
            if (!li.graph.find(label))
                throw AnalysisError("metadata label '" + label + "' is not a vertex of the graph");
    }
    return li;
}

/// Restricts the analysis to the largest connected component, with a notice.
inline void restrict_to_largest_component(LoadedInput& li)
{
    if (li.graph.empty())
        throw AnalysisError("input graph has no vertices");
    const auto components = component_count(li.graph);
    if (components <= 1)
        return;
    li.graph = largest_connected_component(li.graph);
    diag::warn("input has " + std::to_string(components) + " components; analysing the largest (" +
               std::to_string(li.graph.vertex_count()) + " vertices)");
    if (li.metadata) {
        MetadataTable kept;
        for (auto& [label, meta] : *li.metadata)
            if (li.graph.find(label))
                kept.emplace(label, meta);
        li.metadata = std::move(kept);
    }
}

// ---------------------------------------------------------------------------
// Renderers

inline dot::Graph graph_dot(const WeightedGraph& g)
{
    dot::Graph d;
    d.name = "graph";
    for (VertexId v = 0; v < g.vertex_count(); ++v)
        d.nodes.push_back({g.label(v), {}});
    for (const auto& e : g.edges())
        d.edges.push_back({g.label(e.u), g.label(e.v), {{"weight", detail::num(e.weight)}}});
    return d;
}

/// Glyph graph: circles for communities, a rectangle for the rich-club,
/// squares for central vertices. `fills` overrides the date-based gray.
inline dot::Graph summary_dot(const io::Json& summary, const std::optional<std::pair<double, double>>& date_range,
                              const std::map<std::string, std::string>& fills = {})
{
    dot::Graph d;
    d.name = "summary";
    d.node_defaults = {{"style", "filled"}, {"fixedsize", "true"}, {"fontsize", "10"}};
    std::size_t largest = 1;
    for (const auto& gl : summary.at("glyphs"))
        largest = std::max(largest, gl.at("size").get<std::size_t>());
    for (const auto& gl : summary.at("glyphs")) {
        const auto id = gl.at("id").get<std::string>();
        const auto kind = gl.at("kind").get<std::string>();
        const auto size = gl.at("size").get<std::size_t>();
        dot::Attributes a;
        a.emplace_back("shape", kind == "community" ? "circle" : kind == "rich_club" ? "box" : "square");
        a.emplace_back("label", std::to_string(size));
        const auto s = detail::side(size, largest);
        a.emplace_back("width", kind == "rich_club" ? detail::side(size * 2, largest) : s);
        a.emplace_back("height", s);
        std::string fill = "#ffffff";
        if (auto it = fills.find(id); it != fills.end())
            fill = it->second;
        else if (date_range && !gl.at("mean_date").is_null())
            fill = detail::gray(gl.at("mean_date").get<double>(), date_range->first, date_range->second);
        a.emplace_back("fillcolor", fill);
        const int level = std::stoi(fill.substr(1, 2), nullptr, 16);
        a.emplace_back("fontcolor", level < 128 ? "#ffffff" : "#000000");
        if (gl.at("isolated").get<bool>())
            a.emplace_back("style", "filled,dashed");
        d.nodes.push_back({id, std::move(a)});
    }
    for (const auto& e : summary.at("edges"))
        d.edges.push_back({e.at("a").get<std::string>(), e.at("b").get<std::string>(),
                           {{"weight", detail::num(e.at("weight").get<double>())},
                            {"penwidth", detail::num(1.0 + std::log1p(e.at("weight").get<double>()))}}});
    return d;
}

/// SOM map: one square per nonempty unit, pinned at its grid position, with
/// surface proportional to the cluster size; edges carry the summed weight of
/// graph edges running between the two clusters.
inline dot::Graph map_dot(const WeightedGraph& g, const SomModel& m)
{
    const auto& grid = m.config.grid;
    const auto sizes = m.unit_sizes();
    const std::size_t largest = std::max<std::size_t>(1, *std::max_element(sizes.begin(), sizes.end()));
    dot::Graph d;
    d.name = "map";
    d.node_defaults = {{"shape", "square"}, {"fixedsize", "true"}, {"fontsize", "10"}};
    for (UnitId j = 0; j < grid.units(); ++j) {
        if (!sizes[j])
            continue;
        const auto s = detail::side(sizes[j], largest);
        d.nodes.push_back({"u" + std::to_string(j),
                           {{"label", std::to_string(sizes[j])},
                            {"width", s},
                            {"height", s},
                            {"pos", std::to_string(grid.col(j) * 2) + "," + std::to_string((grid.rows - 1 - grid.row(j)) * 2) + "!"}}});
    }
    std::map<std::pair<UnitId, UnitId>, double> links;
    for (const auto& e : g.edges()) {
        const auto a = m.assignment[e.u], b = m.assignment[e.v];
        if (a != b)
            links[std::minmax(a, b)] += e.weight;
    }
    for (const auto& [key, w] : links)
        d.edges.push_back({"u" + std::to_string(key.first), "u" + std::to_string(key.second),
                           {{"weight", detail::num(w)}, {"penwidth", detail::num(1.0 + std::log1p(w))}}});
    return d;
}

// ---------------------------------------------------------------------------
// Commands

inline void cmd_stats(const RunConfig& cfg)
{
    auto li = load_input(cfg);
    detail::prepare_out(cfg.out);
    const auto stats = graph_stats(li.graph);
    if (stats.paths_on_largest_component)
        diag::warn("graph is disconnected; diameter and mean path use the largest component");
    if (cfg.wants(Format::Json))
        detail::write_file(cfg.out / "stats.json", io::to_json(stats).dump(2) + "\n");
    if (cfg.wants(Format::Csv)) {
        for (bool weighted : {false, true}) {
            std::ostringstream s;
            s << "k,fraction\n";
            for (const auto& p : cumulative_degree_distribution(li.graph, weighted))
                s << detail::num(p.degree) << ',' << detail::num(p.fraction) << '\n';
            detail::write_file(cfg.out / (weighted ? "weighted_degree_distribution.csv" : "degree_distribution.csv"),
                               s.str());
        }
    }
    if (cfg.wants(Format::Dot))
        detail::write_file(cfg.out / "graph.dot", dot::to_string(graph_dot(li.graph)));
}

inline std::optional<std::pair<double, double>> date_range(const std::optional<MetadataTable>& metadata)
{
    if (!metadata)
        return std::nullopt;
    std::optional<std::pair<double, double>> r;
    for (const auto& [label, meta] : *metadata) {
        if (!meta.date)
            continue;
        if (!r)
            r = std::make_pair(*meta.date, *meta.date);
        r->first = std::min(r->first, *meta.date);
        r->second = std::max(r->second, *meta.date);
    }
    return r;
}

inline void cmd_communities(const RunConfig& cfg)
{
    auto li = load_input(cfg);
    restrict_to_largest_component(li);
    detail::prepare_out(cfg.out);
    const auto& g = li.graph;

    const auto comms = find_perfect_communities(g);
    const auto club = rich_club(g, cfg.diameter_limit);
    const auto centrals = central_vertices(g, comms, club, cfg.k);
    const auto summary =
        summary_graph(g, comms, club, centrals.chosen_vertices, li.metadata ? &*li.metadata : nullptr);

    const auto decomp = eig_sym(laplacian(g, LaplacianMode::Unweighted).matrix);
    std::vector<CommunityVerification> reports(comms.size());
    parallel_for(comms.size(), [&](std::size_t i) {
        reports[i] = verify_community_spectral(g, comms[i], decomp, cfg.tolerance);
    }, 1);

    const auto doc = io::communities_json(g, comms, club, centrals, summary);
    if (cfg.wants(Format::Json)) {
        detail::write_file(cfg.out / "communities.json", doc.dump(2) + "\n");
        detail::write_file(cfg.out / "verification.json",
                           io::verification_json(g, comms, reports, cfg.tolerance).dump(2) + "\n");
    }
    if (cfg.wants(Format::Csv)) {
        std::ostringstream curve;
        curve << "k,components\n";
        for (const auto& [k, c] : centrals.component_curve)
            curve << k << ',' << c << '\n';
        detail::write_file(cfg.out / "component_curve.csv", curve.str());
        std::ostringstream density;
        density << "size,density\n";
        for (const auto& [size, d] : club.density_curve)
            density << size << ',' << detail::num(d) << '\n';
        detail::write_file(cfg.out / "rich_club_density.csv", density.str());
    }
    if (cfg.wants(Format::Dot))
        detail::write_file(cfg.out / "summary.dot", dot::to_string(summary_dot(doc.at("summary"), date_range(li.metadata))));
}

/// Model, assignment, map, U-matrix and quality artifacts of a trained map.
inline void write_som_artifacts(const RunConfig& cfg, const WeightedGraph& g, const DiffusionKernel& kernel,
                                const SomModel& model, const io::Json& extra_quality = {})
{
    const auto& grid = model.config.grid;
    if (cfg.wants(Format::Json)) {
        detail::write_file(cfg.out / "model.json", io::to_json(model, vertex_set_hash(g)).dump(1) + "\n");
        auto q = io::to_json(quality_report(g, kernel, model, cfg.weighted_modularity));
        q["weighted_modularity"] = cfg.weighted_modularity;
        if (extra_quality.is_object())
            q.update(extra_quality);
        detail::write_file(cfg.out / "quality.json", q.dump(2) + "\n");
    }
    if (cfg.wants(Format::Csv)) {
        std::ostringstream a;
        a << "label,unit,row,col\n";
        for (VertexId v = 0; v < g.vertex_count(); ++v) {
            const auto u = model.assignment[v];
            a << detail::csv_field(g.label(v)) << ',' << u << ',' << grid.row(u) << ',' << grid.col(u) << '\n';
        }
        detail::write_file(cfg.out / "assignment.csv", a.str());
        std::ostringstream um;
        um << "unit,row,col,size,mean_neighbor_distance\n";
        const auto values = u_matrix(kernel, model);
        const auto sizes = model.unit_sizes();
        for (UnitId j = 0; j < grid.units(); ++j)
            um << j << ',' << grid.row(j) << ',' << grid.col(j) << ',' << sizes[j] << ',' << detail::num(values[j])
               << '\n';
        detail::write_file(cfg.out / "umatrix.csv", um.str());
    }
    if (cfg.wants(Format::Dot))
        detail::write_file(cfg.out / "map.dot", dot::to_string(map_dot(g, model)));
}

inline SomConfig som_config(const RunConfig& cfg)
{
    SomConfig sc;
    sc.grid = cfg.grid;
    if (cfg.random_init)
        sc.init = RandomInit{cfg.seed};
    else
        sc.init = PcaInit{};
    sc.validate();
    return sc;
}

inline void cmd_som(const RunConfig& cfg)
{
    const auto base = som_config(cfg);
    const double beta = cfg.beta.value_or(kDefaultBeta);
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw AnalysisError("--beta must be a non-negative number");
    auto li = load_input(cfg);
    restrict_to_largest_component(li);
    detail::prepare_out(cfg.out);
    const auto& g = li.graph;
    const auto decomp = eig_sym(laplacian(g).matrix);

    if (cfg.select) {
        const auto rows = select_maps(g, decomp, cfg.select_betas, cfg.select_grids, base, cfg.weighted_modularity);
        if (cfg.wants(Format::Json))
            detail::write_file(cfg.out / "selection.json", io::to_json(rows).dump(2) + "\n");
        if (cfg.wants(Format::Csv)) {
            std::ostringstream s;
            s << "beta,rows,cols,quantization_error,kaski_lagus,q_modularity,nonempty_units,kl_rank,q_rank\n";
            for (const auto& r : rows)
                s << detail::num(r.beta) << ',' << r.grid.rows << ',' << r.grid.cols << ','
                  << detail::num(r.quantization_error) << ',' << (r.kaski_lagus ? detail::num(*r.kaski_lagus) : "")
                  << ',' << (r.q_modularity ? detail::num(*r.q_modularity) : "") << ',' << r.nonempty_units << ','
                  << r.kl_rank << ',' << r.q_rank << '\n';
            detail::write_file(cfg.out / "selection.csv", s.str());
        }
        return;
    }

    const auto kernel = diffusion_kernel(decomp, beta);
    auto model = train(kernel, base);
    model.labels = g.labels();
    write_som_artifacts(cfg, g, kernel, model);
}

inline void cmd_drilldown(const RunConfig& cfg)
{
    if (!cfg.model || !cfg.unit)
        throw AnalysisError("drilldown needs --model and --unit");
    auto li = load_input(cfg);
    restrict_to_largest_component(li);
    const auto doc = detail::read_json(*cfg.model);
    const auto parent = io::som_model_from_json(doc);
    const auto& g = li.graph;
    if (doc.at("vertex_set_hash").get<std::string>() != vertex_set_hash(g) || parent.labels != g.labels())
        throw AnalysisError("model was trained on a different vertex set than --input");
    detail::prepare_out(cfg.out);

    const double beta = cfg.beta.value_or(parent.beta);
    const auto child = hierarchical_som(g, parent, *cfg.unit, som_config(cfg), beta);
    io::Json extra{{"subgraph_components", child.component_count},
                   {"parent_unit", *cfg.unit},
                   {"parent_vertex_set", vertex_set_hash(g)}};
    write_som_artifacts(cfg, child.subgraph, child.kernel, child.model, extra);
}

/// Palette for the overlay; cycles when more units are needed.
inline constexpr std::array<const char*, 16> kPalette = {
    "#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231", "#911eb4", "#46f0f0", "#f032e6",
    "#bcf60c", "#fabebe", "#008080", "#e6beff", "#9a6324", "#fffac8", "#800000", "#aaffc3"};

inline void cmd_export_overlay(const RunConfig& cfg)
{
    if (!cfg.communities || !cfg.model)
        throw AnalysisError("export-overlay needs --communities and --model");
    const auto comms = detail::read_json(*cfg.communities);
    const auto mdoc = detail::read_json(*cfg.model);
    io::require_schema(comms, "communities");
    const auto model = io::som_model_from_json(mdoc);
    if (comms.at("vertex_set_hash") != mdoc.at("vertex_set_hash") ||
        comms.at("labels").get<std::vector<std::string>>() != model.labels)
        throw AnalysisError("communities and model come from different vertex sets");
    detail::prepare_out(cfg.out);

    std::map<std::string, UnitId> unit_of;
    for (std::size_t i = 0; i < model.labels.size(); ++i)
        unit_of[model.labels[i]] = model.assignment[i];

    std::ostringstream cross;
    cross << "community,unit,overlap\n";
    std::map<std::string, std::string> fills;
    std::map<UnitId, std::size_t> palette_slot;
    for (const auto& c : comms.at("communities")) {
        const auto id = c.at("id").get<std::string>();
        std::map<UnitId, std::size_t> overlap;
        for (const auto& label : c.at("members"))
            ++overlap[unit_of.at(label.get<std::string>())];
        UnitId dominant = overlap.begin()->first;
        for (const auto& [u, count] : overlap) {
            cross << detail::csv_field(id) << ',' << u << ',' << count << '\n';
            if (count > overlap[dominant])
                dominant = u;
        }
        const auto slot = palette_slot.emplace(dominant, palette_slot.size()).first->second;
        fills[id] = kPalette[slot % kPalette.size()];
    }
    if (cfg.wants(Format::Csv))
        detail::write_file(cfg.out / "crosstab.csv", cross.str());
    if (cfg.wants(Format::Dot)) {
        auto d = summary_dot(comms.at("summary"), std::nullopt, fills);
        d.name = "overlay";
        detail::write_file(cfg.out / "overlay.dot", dot::to_string(d));
    }
    if (cfg.wants(Format::Json)) {
        auto j = io::header("overlay");
        j["vertex_set_hash"] = mdoc.at("vertex_set_hash");
        io::Json colors = io::Json::object();
        for (const auto& [id, color] : fills)
            colors[id] = color;
        j["community_colors"] = std::move(colors);
        io::Json units = io::Json::object();
        for (const auto& [u, slot] : palette_slot)
            units[std::to_string(u)] = kPalette[slot % kPalette.size()];
        j["unit_colors"] = std::move(units);
        detail::write_file(cfg.out / "overlay.json", j.dump(2) + "\n");
    }
}

inline void run(const RunConfig& cfg)
{
    if (cfg.command == "stats")
        cmd_stats(cfg);
    else if (cfg.command == "communities")
        cmd_communities(cfg);
    else if (cfg.command == "som")
        cmd_som(cfg);
    else if (cfg.command == "drilldown")
        cmd_drilldown(cfg);
    else if (cfg.command == "export-overlay")
        cmd_export_overlay(cfg);
    else
        throw AnalysisError("unknown command '" + cfg.command + "'");
}

// ---------------------------------------------------------------------------
// Argument parsing

inline GridTopology parse_grid(const std::string& s)
{
    const auto x = s.find_first_of("xX");
    if (x == std::string::npos)
        throw CLI::ValidationError("--grid", "expected RxC, got '" + s + "'");
    int r = 0, c = 0;
    const auto* b = s.data();
    auto r1 = std::from_chars(b, b + x, r);
    auto r2 = std::from_chars(b + x + 1, b + s.size(), c);
    if (r1.ec != std::errc{} || r1.ptr != b + x || r2.ec != std::errc{} || r2.ptr != b + s.size() || r < 1 || c < 1)
        throw CLI::ValidationError("--grid", "expected RxC with positive integers, got '" + s + "'");
    return {r, c};
}

inline CentralK parse_k(const std::string& s)
{
    if (s == "auto")
        return AutoK{};
    std::size_t k = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), k);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw CLI::ValidationError("--k", "expected a non-negative integer or 'auto', got '" + s + "'");
    return k;
}

/// Parses arguments and runs the command. Returns the process exit code:
/// 0 success, 1 analysis error, 2 usage, I/O or parse error.
inline int main(int argc, const char* const* argv, std::ostream& err = std::cerr)
{
    CLI::App app{"Perfect communities, rich-clubs and kernel self-organizing maps for weighted graphs", "lapsom"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "lapsom 1.0.0");

    RunConfig cfg;
    std::vector<std::string> formats;
    std::string grid, k;
    std::string init = "pca";
    std::string select_grids;
    std::vector<double> select_betas;

    auto common = [&](CLI::App* sub, bool needs_input) {
        auto* in = sub->add_option("--input", cfg.input, "edge list (source,target[,weight]) or contracts CSV");
        if (needs_input)
            in->required();
        sub->add_flag("--contracts", cfg.contracts, "read --input as contract records");
        sub->add_option("--metadata", cfg.metadata, "vertex metadata CSV (label,date,location,family)");
        sub->add_option("--out", cfg.out, "output directory")->required();
        sub->add_option("--format", formats, "artifact formats to write (json, csv, dot); default all")
            ->check(CLI::IsMember({"json", "csv", "dot"}))
            ->take_all();
        sub->add_option("--window-years", cfg.window_years, "contract co-occurrence window")->check(CLI::NonNegativeNumber);
        sub->add_option("--exclude-lord", cfg.excluded_lords, "lord ignored by the shared-lord rule")->take_all();
    };
    auto som_opts = [&](CLI::App* sub) {
        sub->add_option("--beta", cfg.beta, "diffusion intensity")->check(CLI::NonNegativeNumber);
        sub->add_option("--grid", grid, "map size RxC (default 7x7)");
        sub->add_option("--seed", cfg.seed, "seed for random initialization");
        sub->add_option("--init", init, "prototype initialization")->check(CLI::IsMember({"pca", "random"}));
        sub->add_option("--weighted-modularity", cfg.weighted_modularity, "weight edges in q-modularity");
    };

    auto* stats = app.add_subcommand("stats", "graph statistics and degree distributions");
    common(stats, true);
    auto* comm = app.add_subcommand("communities", "perfect communities, rich-club, central vertices");
    common(comm, true);
    comm->add_option("--diameter-limit", cfg.diameter_limit, "rich-club diameter bound");
    comm->add_option("--k", k, "number of central vertices, or 'auto'");
    comm->add_option("--tolerance", cfg.tolerance, "spectral verification tolerance")->check(CLI::PositiveNumber);
    auto* som = app.add_subcommand("som", "train a kernel self-organizing map");
    common(som, true);
    som_opts(som);
    som->add_flag("--select", cfg.select, "sweep beta x grid and rank the maps instead of training one");
    som->add_option("--select-betas", select_betas, "betas for --select")->take_all();
    som->add_option("--select-grids", select_grids, "comma-separated grids for --select, e.g. 5x5,6x6");
    auto* drill = app.add_subcommand("drilldown", "train a child map on one unit of a model");
    common(drill, true);
    som_opts(drill);
    drill->add_option("--model", cfg.model, "parent model.json")->required();
    drill->add_option("--unit", cfg.unit, "parent unit index")->required();
    auto* overlay = app.add_subcommand("export-overlay", "color communities by their dominant SOM unit");
    common(overlay, false);
    overlay->add_option("--communities", cfg.communities, "communities.json")->required();
    overlay->add_option("--model", cfg.model, "model.json")->required();

    try {
        app.parse(argc, argv);
        cfg.command = app.get_subcommands().front()->get_name();
        if (!formats.empty()) {
            cfg.formats.clear();
            for (const auto& f : formats)
                cfg.formats.insert(f == "json" ? Format::Json : f == "csv" ? Format::Csv : Format::Dot);
        }
        if (!grid.empty())
            cfg.grid = parse_grid(grid);
        if (!k.empty())
            cfg.k = parse_k(k);
        cfg.random_init = init == "random";
        if (!select_betas.empty())
            cfg.select_betas = select_betas;
        if (!select_grids.empty()) {
            cfg.select_grids.clear();
            std::stringstream ss(select_grids);
            for (std::string item; std::getline(ss, item, ',');)
                cfg.select_grids.push_back(parse_grid(item));
        }
    } catch (const CLI::Success& e) {
        return app.exit(e, std::cout, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cout, err);
        return 2;
    }

    diag::ScopedSink sink([&err](const std::string& msg) { err << "lapsom: " << msg << '\n'; });
    try {
        run(cfg);
        return 0;
    } catch (const InputError& e) {
        err << "lapsom: error: " << e.what() << '\n';
        return 2;
    } catch (const AnalysisError& e) {
        err << "lapsom: error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "lapsom: internal error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace lapsom::cli

#endif // LAPSOM_CLI_HPP
