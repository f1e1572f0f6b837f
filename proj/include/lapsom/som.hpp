#ifndef LAPSOM_SOM_HPP
#define LAPSOM_SOM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "lapsom/diagnostics.hpp"
#include "lapsom/error.hpp"
#include "lapsom/graph.hpp"
#include "lapsom/kernel.hpp"
#include "lapsom/parallel.hpp"
#include "lapsom/spectral.hpp"

namespace lapsom {

using UnitId = std::size_t;

/// Regular rows x cols square grid; unit j sits at (j / cols, j % cols).
struct GridTopology
{
    int rows = 1;
    int cols = 1;

    std::size_t units() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
    int row(UnitId j) const { return static_cast<int>(j / static_cast<std::size_t>(cols)); }
    int col(UnitId j) const { return static_cast<int>(j % static_cast<std::size_t>(cols)); }
    UnitId unit(int r, int c) const { return static_cast<UnitId>(r) * static_cast<UnitId>(cols) + static_cast<UnitId>(c); }

    /// Euclidean distance between grid coordinates.
    double distance(UnitId a, UnitId b) const
    {
        const double dr = row(a) - row(b);
        const double dc = col(a) - col(b);
        return std::sqrt(dr * dr + dc * dc);
    }

    double max_distance_sq() const
    {
        const double dr = rows - 1, dc = cols - 1;
        return dr * dr + dc * dc;
    }

    /// Rook (4-neighborhood) adjacency.
    std::vector<UnitId> neighbors(UnitId j) const
    {
        std::vector<UnitId> out;
        const int r = row(j), c = col(j);
        if (r > 0)
            out.push_back(unit(r - 1, c));
        if (c > 0)
            out.push_back(unit(r, c - 1));
        if (c + 1 < cols)
            out.push_back(unit(r, c + 1));
        if (r + 1 < rows)
            out.push_back(unit(r + 1, c));
        return out;
    }
};

struct RandomInit
{
    std::uint64_t seed = 0;
};
struct PcaInit
{
};
using SomInit = std::variant<RandomInit, PcaInit>;

struct SomConfig
{
    GridTopology grid;
    std::optional<double> initial_temperature; // default: max squared grid distance (at least 1)
    double anneal_ratio = 0.9;
    double final_epsilon = 0.01;
    std::optional<std::size_t> max_iterations; // default: 10 * units * vertices
    SomInit init = PcaInit{};

    double t0() const { return initial_temperature.value_or(std::max(1.0, grid.max_distance_sq())); }

    std::size_t iteration_guard(std::size_t n) const
    {
        return max_iterations.value_or(std::max<std::size_t>(100, 10 * grid.units() * n));
    }

    /// Annealing stops once exp(-1/T) < final_epsilon, i.e. below this temperature.
    double final_temperature() const { return 1.0 / std::log(1.0 / final_epsilon); }

    void validate() const
    {
        if (grid.rows < 1 || grid.cols < 1)
            throw AnalysisError("grid dimensions must be at least 1x1");
        if (!(t0() > 0.0) || !std::isfinite(t0()))
            throw AnalysisError("initial temperature must be positive");
        if (!(anneal_ratio > 0.0 && anneal_ratio < 1.0))
            throw AnalysisError("anneal ratio must lie in (0, 1)");
        if (!(final_epsilon > 0.0 && final_epsilon < 1.0))
            throw AnalysisError("final epsilon must lie in (0, 1)");
        if (max_iterations && *max_iterations == 0)
            throw AnalysisError("iteration guard must be positive");
    }
};

struct IterationRecord
{
    double temperature = 0.0; // 0 marks the hard (kernel k-means) final phase
    std::size_t changes = 0;  // vertices whose unit changed
    bool final_phase = false;
    double quantization_error = 0.0;
    std::uint64_t assignment_hash = 0;
    bool cycle = false; // assignment revisited at this temperature
};

struct LineageStep
{
    std::string parent_vertex_set; // vertex_set_hash of the parent graph
    UnitId unit = 0;
};

struct SomModel
{
    SomConfig config;
    double beta = 0.0;
    Eigen::MatrixXd gamma; // units x vertices, row j = coefficients of prototype j
    std::vector<UnitId> assignment;
    std::vector<IterationRecord> log;
    std::size_t cycles_detected = 0;
    std::vector<std::string> labels; // vertex labels, when known
    std::vector<LineageStep> lineage;

    std::vector<std::size_t> unit_sizes() const
    {
        std::vector<std::size_t> sizes(config.grid.units(), 0);
        for (auto u : assignment)
            ++sizes[u];
        return sizes;
    }

    std::size_t nonempty_units() const
    {
        const auto s = unit_sizes();
        return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](std::size_t x) { return x > 0; }));
    }

    std::vector<VertexId> members(UnitId u) const
    {
        std::vector<VertexId> out;
        for (VertexId v = 0; v < assignment.size(); ++v)
            if (assignment[v] == u)
                out.push_back(v);
        return out;
    }
};

// ---------------------------------------------------------------------------
// Initialization

/// Each prototype starts on a distinct randomly chosen mapped vertex (with
/// replacement only once every vertex has been used).
inline Eigen::MatrixXd init_random(const DiffusionKernel& k, const GridTopology& grid, std::uint64_t seed)
{
    const auto n = static_cast<std::size_t>(k.size());
    const std::size_t m = grid.units();
    if (n == 0)
        throw AnalysisError("random initialization of an empty kernel");
    if (m > n)
        diag::warn("map has " + std::to_string(m) + " units for " + std::to_string(n) + " vertices");
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i)
        pool[i] = i;
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < m; ++j) {
        std::size_t pick;
        if (j < n) {
            std::uniform_int_distribution<std::size_t> dist(j, n - 1);
            std::swap(pool[j], pool[dist(rng)]);
            pick = pool[j];
        } else {
            std::uniform_int_distribution<std::size_t> dist(0, n - 1);
            pick = dist(rng);
        }
        gamma(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(pick)) = 1.0;
    }
    return gamma;
}

namespace detail {

inline std::vector<double> lattice(int count, double lo, double hi)
{
    if (count == 1)
        return {0.0}; // the data mean along this component
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
    return out;
}

} // namespace detail

/**
 * Kernel-PCA initialization: a regular lattice laid over the plane of the two
 * leading principal directions, spanning the range of the projected vertices.
 * The longer grid side follows the first component (rows for square grids).
 */
inline Eigen::MatrixXd init_kernel_pca(const DiffusionKernel& k, const GridTopology& grid)
{
    const Eigen::Index n = k.size();
    if (n < 3)
        throw AnalysisError("kernel PCA initialization needs at least three vertices");
    const auto pca = kernel_pca(k, 2);
    if (pca.variances[0] < 1e-12)
        throw AnalysisError("degenerate kernel: leading principal variance below 1e-12");

    const bool first_on_rows = grid.rows >= grid.cols;
    const int first_count = first_on_rows ? grid.rows : grid.cols;
    const int second_count = first_on_rows ? grid.cols : grid.rows;
    const auto first = detail::lattice(first_count, pca.projections.col(0).minCoeff(), pca.projections.col(0).maxCoeff());
    const auto second = detail::lattice(second_count, pca.projections.col(1).minCoeff(), pca.projections.col(1).maxCoeff());

    Eigen::MatrixXd gamma(static_cast<Eigen::Index>(grid.units()), n);
    for (UnitId j = 0; j < grid.units(); ++j) {
        const auto r = static_cast<std::size_t>(grid.row(j));
        const auto c = static_cast<std::size_t>(grid.col(j));
        const double a = first_on_rows ? first[r] : first[c];
        const double b = first_on_rows ? second[c] : second[r];
        gamma.row(static_cast<Eigen::Index>(j)) =
            (Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)) + a * pca.coefficients.col(0) +
             b * pca.coefficients.col(1))
                .transpose();
    }
    return gamma;
}

// ---------------------------------------------------------------------------
// Assignment and representation

/// Cached kernel products for a fixed coefficient matrix: distances from any
/// vertex to any prototype in O(1).
class PrototypeGeometry
{
public:
    PrototypeGeometry(const DiffusionKernel& k, const Eigen::MatrixXd& gamma)
        : diag_(k.matrix.diagonal()), kg_(k.matrix * gamma.transpose()),
          norms_((gamma * kg_).diagonal())
    {
    }

    Eigen::Index units() const { return kg_.cols(); }

    /// sum_uv g_ju g_jv K_uv - 2 sum_u g_ju K_ui (the part that depends on j)
    double score(Eigen::Index i, Eigen::Index j) const { return norms_[j] - 2.0 * kg_(i, j); }

    double distance_sq(Eigen::Index i, Eigen::Index j) const
    {
        return detail::clamp_distance(diag_[i] + score(i, j));
    }

    /// Argmin over units; ties go to the lowest index.
    UnitId best_unit(Eigen::Index i) const
    {
        UnitId best = 0;
        double best_score = score(i, 0);
        for (Eigen::Index j = 1; j < units(); ++j) {
            const double s = score(i, j);
            if (s < best_score) {
                best_score = s;
                best = static_cast<UnitId>(j);
            }
        }
        return best;
    }

private:
    Eigen::VectorXd diag_;
    Eigen::MatrixXd kg_; // n x M
    Eigen::VectorXd norms_;
};

/// Best matching unit of vertex i; ties go to the lowest unit index.
inline UnitId assign(const DiffusionKernel& k, const Eigen::MatrixXd& gamma, Eigen::Index i)
{
    UnitId best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < gamma.rows(); ++j) {
        const Eigen::VectorXd g = gamma.row(j).transpose();
        const Eigen::VectorXd kg = k.matrix * g;
        const double s = g.dot(kg) - 2.0 * kg[i];
        if (s < best_score) {
            best_score = s;
            best = static_cast<UnitId>(j);
        }
    }
    return best;
}

inline std::vector<UnitId> assign_all(const PrototypeGeometry& geom, Eigen::Index n)
{
    std::vector<UnitId> f(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n),
                 [&](std::size_t i) { f[i] = geom.best_unit(static_cast<Eigen::Index>(i)); });
    return f;
}

inline std::vector<UnitId> assign_all(const DiffusionKernel& k, const Eigen::MatrixXd& gamma)
{
    return assign_all(PrototypeGeometry(k, gamma), k.size());
}

/// Neighborhood weight R(h) = exp(-h^2 / T). T = 0 is the hard limit (1 at
/// h = 0, else 0); T = +inf gives 1 everywhere.
inline double neighborhood(double h, double temperature)
{
    if (temperature == 0.0)
        return h == 0.0 ? 1.0 : 0.0;
    return std::exp(-h * h / temperature);
}

/**
 * Representation step: gamma_ji = R(h(f(x_i), j)) / sum_u R(h(f(x_u), j)).
 * A unit whose denominator falls below 1e-300 keeps its row from `previous`
 * (or becomes uniform when none is given).
 */
inline Eigen::MatrixXd represent(const GridTopology& grid, const std::vector<UnitId>& f, double temperature,
                                 const Eigen::MatrixXd* previous = nullptr)
{
    const std::size_t m = grid.units();
    const auto n = static_cast<Eigen::Index>(f.size());
    if (n == 0)
        throw AnalysisError("representation step without vertices");
    std::vector<std::size_t> counts(m, 0);
    for (auto u : f) {
        if (u >= m)
            throw AnalysisError("assignment refers to unit " + std::to_string(u) + " outside the grid");
        ++counts[u];
    }
    Eigen::MatrixXd weight(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (UnitId a = 0; a < m; ++a)
        for (UnitId b = 0; b < m; ++b)
            weight(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                neighborhood(grid.distance(a, b), temperature);

    Eigen::MatrixXd gamma(static_cast<Eigen::Index>(m), n);
    for (UnitId j = 0; j < m; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        double denom = 0.0;
        for (UnitId a = 0; a < m; ++a)
            denom += static_cast<double>(counts[a]) * weight(static_cast<Eigen::Index>(a), jj);
        if (denom < 1e-300) {
            if (previous && previous->rows() == gamma.rows() && previous->cols() == n)
                gamma.row(jj) = previous->row(jj);
            else
                gamma.row(jj).setConstant(1.0 / static_cast<double>(n));
            continue;
        }
        for (Eigen::Index i = 0; i < n; ++i)
            gamma(jj, i) = weight(static_cast<Eigen::Index>(f[static_cast<std::size_t>(i)]), jj) / denom;
    }
    return gamma;
}

namespace detail {

inline std::uint64_t assignment_hash(const std::vector<UnitId>& f)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (auto u : f) {
        for (int b = 0; b < 8; ++b) {
            h ^= (static_cast<std::uint64_t>(u) >> (8 * b)) & 0xFF;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

inline double quantization_error(const PrototypeGeometry& geom, const std::vector<UnitId>& f)
{
    double e = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        e += geom.distance_sq(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f[i]));
    return e;
}

inline std::size_t count_changes(const std::vector<UnitId>& a, const std::vector<UnitId>& b)
{
    if (a.size() != b.size())
        return b.size();
    std::size_t c = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        c += a[i] != b[i];
    return c;
}

} // namespace detail

/**
 * Batch kernel SOM.
 *
 * Alternates assignment and representation steps. The temperature is held
 * until the assignment repeats, then multiplied by the anneal ratio. Once the
 * temperature is below final_temperature() and the assignment is stable
 * again, a hard-neighborhood phase (kernel k-means) runs to convergence.
 *
 * An assignment that reappears non-consecutively at one temperature is a
 * cycle; it is logged, reported through the diagnostics sink, and handled as
 * a stabilization. Throws when the iteration guard is exceeded.
 */
inline SomModel train(const DiffusionKernel& k, const SomConfig& config)
{
    config.validate();
    const Eigen::Index n = k.size();
    if (n == 0 || k.matrix.cols() != n)
        throw AnalysisError("training needs a non-empty square kernel");
    if (!k.matrix.allFinite())
        throw AnalysisError("kernel has non-finite entries");

    SomModel model;
    model.config = config;
    model.beta = k.beta;
    const GridTopology& grid = config.grid;
    const std::size_t guard = config.iteration_guard(static_cast<std::size_t>(n));

    if (grid.units() == 1) {
        model.assignment.assign(static_cast<std::size_t>(n), 0);
        model.gamma = represent(grid, model.assignment, config.t0());
        const PrototypeGeometry geom(k, model.gamma);
        model.log.push_back({config.t0(), static_cast<std::size_t>(n), true,
                             detail::quantization_error(geom, model.assignment),
                             detail::assignment_hash(model.assignment), false});
        return model;
    }

    Eigen::MatrixXd gamma = std::holds_alternative<PcaInit>(config.init)
                                ? init_kernel_pca(k, grid)
                                : init_random(k, grid, std::get<RandomInit>(config.init).seed);

    double temperature = config.t0();
    const double final_temperature = config.final_temperature();
    std::vector<UnitId> f, previous;
    std::unordered_set<std::uint64_t> seen_at_temperature;
    std::size_t iterations = 0;
    auto tick = [&] {
        if (++iterations > guard)
            throw AnalysisError("SOM training exceeded the iteration guard (" + std::to_string(guard) + ")");
    };

    for (;;) {
        tick();
        const PrototypeGeometry geom(k, gamma);
        f = assign_all(geom, n);
        const bool stable = !previous.empty() && f == previous;
        const auto hash = detail::assignment_hash(f);
        const bool cycle = !stable && seen_at_temperature.count(hash) > 0;
        model.log.push_back({temperature, detail::count_changes(previous, f), false,
                             detail::quantization_error(geom, f), hash, cycle});
        if (cycle) {
            ++model.cycles_detected;
            diag::warn("assignment cycle at temperature " + std::to_string(temperature) +
                       "; treating it as stabilized");
        }
        if (stable || cycle) {
            if (temperature < final_temperature)
                break;
            temperature *= config.anneal_ratio;
            seen_at_temperature.clear();
        }
        seen_at_temperature.insert(hash);
        gamma = represent(grid, f, temperature, &gamma);
        previous = f;
    }

    for (;;) {
        tick();
        gamma = represent(grid, f, 0.0, &gamma);
        const PrototypeGeometry geom(k, gamma);
        auto next = assign_all(geom, n);
        const auto hash = detail::assignment_hash(next);
        model.log.push_back({0.0, detail::count_changes(f, next), true, detail::quantization_error(geom, next), hash,
                             false});
        const bool done = next == f;
        f = std::move(next);
        if (done)
            break;
    }

    model.gamma = std::move(gamma);
    model.assignment = std::move(f);
    return model;
}

// ---------------------------------------------------------------------------
// Quality measures

/// Sum over vertices of the squared feature-space distance to the assigned prototype.
inline double quantization_error(const DiffusionKernel& k, const Eigen::MatrixXd& gamma, const std::vector<UnitId>& f)
{
    if (static_cast<Eigen::Index>(f.size()) != k.size())
        throw AnalysisError("assignment size does not match the kernel");
    return detail::quantization_error(PrototypeGeometry(k, gamma), f);
}

inline double quantization_error(const DiffusionKernel& k, const SomModel& model)
{
    return quantization_error(k, model.gamma, model.assignment);
}

/// All-pairs shortest paths over the rook-adjacent grid graph; the edge between
/// adjacent units a and b has length lengths(a, b).
inline std::vector<std::vector<double>> grid_shortest_paths(const GridTopology& grid, const Eigen::MatrixXd& lengths)
{
    const std::size_t m = grid.units();
    std::vector<std::vector<double>> dist(m, std::vector<double>(m, std::numeric_limits<double>::infinity()));
    using Item = std::pair<double, UnitId>;
    for (UnitId s = 0; s < m; ++s) {
        auto& d = dist[s];
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        d[s] = 0.0;
        heap.emplace(0.0, s);
        while (!heap.empty()) {
            auto [du, u] = heap.top();
            heap.pop();
            if (du > d[u])
                continue;
            for (UnitId v : grid.neighbors(u)) {
                const double len = lengths(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
                if (len < 0.0)
                    throw AnalysisError("negative grid edge length");
                if (du + len < d[v]) {
                    d[v] = du + len;
                    heap.emplace(d[v], v);
                }
            }
        }
    }
    return dist;
}

/// Unsquared feature-space distances between every pair of prototypes.
inline Eigen::MatrixXd prototype_distances(const DiffusionKernel& k, const Eigen::MatrixXd& gamma)
{
    const Eigen::MatrixXd gram = gamma * k.matrix * gamma.transpose();
    const Eigen::Index m = gamma.rows();
    Eigen::MatrixXd d(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b)
            d(a, b) = a == b ? 0.0 : std::sqrt(detail::clamp_distance(gram(a, a) + gram(b, b) - 2.0 * gram(a, b)));
    return d;
}

/**
 * Kaski-Lagus measure: mean over vertices of the (unsquared) distance to the
 * best matching unit plus the shortest grid path, measured in prototype
 * distances, from the best to the second-best matching unit.
 */
inline double kaski_lagus(const DiffusionKernel& k, const SomModel& model)
{
    const std::size_t m = model.config.grid.units();
    if (m < 2)
        throw AnalysisError("Kaski-Lagus measure needs at least two units");
    if (static_cast<Eigen::Index>(model.assignment.size()) != k.size())
        throw AnalysisError("assignment size does not match the kernel");
    const PrototypeGeometry geom(k, model.gamma);
    const auto paths = grid_shortest_paths(model.config.grid, prototype_distances(k, model.gamma));

    double total = 0.0;
    for (std::size_t i = 0; i < model.assignment.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const UnitId bmu = model.assignment[i];
        UnitId second = bmu == 0 ? 1 : 0;
        double second_score = geom.score(ii, static_cast<Eigen::Index>(second));
        for (UnitId j = second + 1; j < m; ++j) {
            if (j == bmu)
                continue;
            const double s = geom.score(ii, static_cast<Eigen::Index>(j));
            if (s < second_score) {
                second_score = s;
                second = j;
            }
        }
        total += std::sqrt(geom.distance_sq(ii, static_cast<Eigen::Index>(bmu))) + paths[bmu][second];
    }
    return total / static_cast<double>(model.assignment.size());
}

/**
 * q-modularity sum_j (e_j - a_j^2) / (1 - sum_j a_j^2), where e_j is the share
 * of edge weight inside cluster j and a_j the share of edge ends attached to
 * it. Unweighted mode counts edges instead.
 */
inline double q_modularity(const WeightedGraph& g, const std::vector<std::size_t>& assignment, bool weighted = true)
{
    if (assignment.size() != g.vertex_count())
        throw AnalysisError("assignment size does not match the graph");
    std::size_t clusters = 0;
    for (auto c : assignment)
        clusters = std::max(clusters, c + 1);
    std::vector<double> inside(clusters, 0.0), ends(clusters, 0.0);
    double total = 0.0;
    for (const auto& e : g.edges()) {
        const double w = weighted ? e.weight : 1.0;
        total += w;
        ends[assignment[e.u]] += w;
        ends[assignment[e.v]] += w;
        if (assignment[e.u] == assignment[e.v])
            inside[assignment[e.u]] += w;
    }
    if (total <= 0.0)
        throw AnalysisError("q-modularity is undefined on a graph without edges");
    double numerator = 0.0, a_sq = 0.0;
    for (std::size_t j = 0; j < clusters; ++j) {
        const double e = inside[j] / total;
        const double a = ends[j] / (2.0 * total);
        numerator += e - a * a;
        a_sq += a * a;
    }
    const double denominator = 1.0 - a_sq;
    if (std::abs(denominator) < 1e-12)
        throw AnalysisError("q-modularity is undefined when one cluster holds every edge end");
    return numerator / denominator;
}

/// Mean unsquared prototype distance from each unit to its rook neighbors.
inline std::vector<double> u_matrix(const DiffusionKernel& k, const SomModel& model)
{
    const auto& grid = model.config.grid;
    const auto d = prototype_distances(k, model.gamma);
    std::vector<double> out(grid.units(), 0.0);
    for (UnitId j = 0; j < grid.units(); ++j) {
        const auto nbrs = grid.neighbors(j);
        if (nbrs.empty())
            continue;
        double sum = 0.0;
        for (UnitId u : nbrs)
            sum += d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(u));
        out[j] = sum / static_cast<double>(nbrs.size());
    }
    return out;
}

struct QualityReport
{
    double quantization_error = 0.0;
    std::optional<double> kaski_lagus;
    std::string kaski_lagus_reason; // why it is missing
    std::optional<double> q_modularity;
    std::string q_modularity_reason;
    std::size_t nonempty_units = 0;
    std::vector<std::size_t> unit_sizes;
};

inline QualityReport quality_report(const WeightedGraph& g, const DiffusionKernel& k, const SomModel& model,
                                    bool weighted_modularity = true)
{
    QualityReport q;
    q.quantization_error = quantization_error(k, model);
    try {
        q.kaski_lagus = kaski_lagus(k, model);
    } catch (const AnalysisError& e) {
        q.kaski_lagus_reason = e.what();
    }
    try {
        q.q_modularity = q_modularity(g, model.assignment, weighted_modularity);
    } catch (const AnalysisError& e) {
        q.q_modularity_reason = e.what();
    }
    q.unit_sizes = model.unit_sizes();
    q.nonempty_units = model.nonempty_units();
    return q;
}

// ---------------------------------------------------------------------------
// Hierarchical maps

struct ChildMap
{
    WeightedGraph subgraph;
    std::vector<VertexId> parent_vertices; // positions in the parent graph
    DiffusionKernel kernel;
    SomModel model;
    std::size_t component_count = 0;
};

/// Diffusion kernel of a graph's Laplacian in one call.
inline DiffusionKernel graph_kernel(const WeightedGraph& g, double beta, LaplacianMode mode = LaplacianMode::Weighted)
{
    return diffusion_kernel(eig_sym(laplacian(g, mode).matrix), beta);
}

/**
 * Trains a fresh map on the subgraph induced by one unit of a parent map. The
 * cluster must hold at least max(3, child units) vertices.
 */
inline ChildMap hierarchical_som(const WeightedGraph& g, const SomModel& parent, UnitId unit, const SomConfig& config,
                                 double beta, LaplacianMode mode = LaplacianMode::Weighted)
{
    if (parent.assignment.size() != g.vertex_count())
        throw AnalysisError("parent map does not match the graph");
    if (unit >= parent.config.grid.units())
        throw AnalysisError("unit " + std::to_string(unit) + " is outside the parent grid");
    ChildMap child;
    child.parent_vertices = parent.members(unit);
    const std::size_t needed = std::max<std::size_t>(3, config.grid.units());
    if (child.parent_vertices.empty())
        throw AnalysisError("unit " + std::to_string(unit) + " is empty");
    if (child.parent_vertices.size() < needed)
        throw AnalysisError("unit " + std::to_string(unit) + " holds " + std::to_string(child.parent_vertices.size()) +
                            " vertices; a child map of " + std::to_string(config.grid.units()) + " units needs at least " +
                            std::to_string(needed));
    child.subgraph = induced_subgraph(g, std::span<const VertexId>(child.parent_vertices));
    child.component_count = component_count(child.subgraph);
    child.kernel = graph_kernel(child.subgraph, beta, mode);
    child.model = train(child.kernel, config);
    child.model.labels = child.subgraph.labels();
    child.model.lineage = parent.lineage;
    child.model.lineage.push_back({vertex_set_hash(g), unit});
    return child;
}

// ---------------------------------------------------------------------------
// Model selection

struct SelectionRow
{
    double beta = 0.0;
    GridTopology grid;
    double quantization_error = 0.0;
    std::optional<double> kaski_lagus;
    std::optional<double> q_modularity;
    std::size_t nonempty_units = 0;
    std::size_t kl_rank = 0; // 1 = smallest KL
    std::size_t q_rank = 0;  // 1 = largest q-modularity
};

/// Trains every beta x grid combination and ranks the maps by Kaski-Lagus and
/// by q-modularity. Rows come back in sweep order; no map is chosen.
inline std::vector<SelectionRow> select_maps(const WeightedGraph& g, const EigenDecomposition& decomp,
                                             const std::vector<double>& betas, const std::vector<GridTopology>& grids,
                                             SomConfig base, bool weighted_modularity = true)
{
    std::vector<SelectionRow> rows;
    for (double beta : betas) {
        const auto kernel = diffusion_kernel(decomp, beta);
        for (const auto& grid : grids) {
            base.grid = grid;
            const auto model = train(kernel, base);
            const auto q = quality_report(g, kernel, model, weighted_modularity);
            rows.push_back({beta, grid, q.quantization_error, q.kaski_lagus, q.q_modularity, q.nonempty_units, 0, 0});
        }
    }
    auto rank = [&rows](auto key, bool ascending, std::size_t SelectionRow::*slot) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (key(rows[i]))
                idx.push_back(i);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return ascending ? *key(rows[a]) < *key(rows[b]) : *key(rows[a]) > *key(rows[b]);
        });
        for (std::size_t r = 0; r < idx.size(); ++r)
            rows[idx[r]].*slot = r + 1;
    };
    rank([](const SelectionRow& r) { return r.kaski_lagus; }, true, &SelectionRow::kl_rank);
    rank([](const SelectionRow& r) { return r.q_modularity; }, false, &SelectionRow::q_rank);
    return rows;
}

} // namespace lapsom

#endif // LAPSOM_SOM_HPP
