#ifndef LAPSOM_SPECTRAL_HPP
#define LAPSOM_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <ostream>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "lapsom/error.hpp"
#include "lapsom/graph.hpp"

namespace lapsom {

enum class LaplacianMode { Weighted, Unweighted };

struct LaplacianMatrix
{
    Eigen::MatrixXd matrix;
    LaplacianMode mode = LaplacianMode::Weighted;

    Eigen::Index order() const { return matrix.rows(); }
};

/// L = diag(d) - W. Unweighted mode uses the induced non-weighted graph.
inline LaplacianMatrix laplacian(const WeightedGraph& g, LaplacianMode mode = LaplacianMode::Weighted)
{
    const auto n = static_cast<Eigen::Index>(g.vertex_count());
    LaplacianMatrix out{Eigen::MatrixXd::Zero(n, n), mode};
    for (const auto& e : g.edges()) {
        const double w = mode == LaplacianMode::Weighted ? e.weight : 1.0;
        const auto u = static_cast<Eigen::Index>(e.u);
        const auto v = static_cast<Eigen::Index>(e.v);
        out.matrix(u, v) -= w;
        out.matrix(v, u) -= w;
        out.matrix(u, u) += w;
        out.matrix(v, v) += w;
    }
    return out;
}

/// Ascending eigenvalues with orthonormal eigenvectors as columns.
struct EigenDecomposition
{
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    double residual_bound = 0.0; // max_k ||A h_k - lambda_k h_k||_2
    std::uint64_t id = 0;        // fingerprint of the spectrum

    Eigen::Index size() const { return values.size(); }
};

namespace detail {

inline double inf_norm(const Eigen::MatrixXd& m)
{
    return m.size() ? m.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
}

inline std::uint64_t fingerprint(const Eigen::VectorXd& values)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        std::uint64_t bits = 0;
        const double v = values[i];
        std::memcpy(&bits, &v, sizeof bits);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xFF;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

/// Flips v so that its largest-magnitude coordinate is positive. Magnitudes
/// within 1e-9 (relative) of the maximum count as ties; the lowest index wins.
inline void canonical_sign(Eigen::Ref<Eigen::VectorXd> v)
{
    if (v.size() == 0)
        return;
    const double peak = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) >= peak * (1.0 - 1e-9)) {
            if (v[i] < 0)
                v = -v;
            return;
        }
    }
}

} // namespace detail

/**
 * Full eigendecomposition of a symmetric matrix (Householder tridiagonalization
 * followed by implicit symmetric QR). Eigenvectors follow a deterministic sign
 * convention. Throws when the input is not symmetric within 1e-12 (relative to
 * its largest entry) or when the residual exceeds 1e-10 * ||A||_inf.
 */
inline EigenDecomposition eig_sym(const Eigen::MatrixXd& a)
{
    if (a.rows() != a.cols())
        throw AnalysisError("eigendecomposition of a non-square matrix");
    const double scale = std::max(1.0, a.size() ? a.cwiseAbs().maxCoeff() : 0.0);
    if (a.size() && (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw AnalysisError("eigendecomposition of an asymmetric matrix");

    EigenDecomposition d;
    if (a.rows() == 0)
        return d;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw AnalysisError("symmetric eigensolver failed to converge");
    d.values = solver.eigenvalues();
    d.vectors = solver.eigenvectors();
    for (Eigen::Index k = 0; k < d.vectors.cols(); ++k)
        detail::canonical_sign(d.vectors.col(k));

    const Eigen::MatrixXd residual = a * d.vectors - d.vectors * d.values.asDiagonal();
    d.residual_bound = residual.colwise().norm().maxCoeff();
    const double tolerance = 1e-10 * std::max(detail::inf_norm(a), std::numeric_limits<double>::min());
    if (d.residual_bound > tolerance)
        throw AnalysisError("eigendecomposition residual " + std::to_string(d.residual_bound) +
                            " exceeds tolerance");
    d.id = detail::fingerprint(d.values);
    return d;
}

/// Tolerance under which two eigenvalues are treated as equal.
inline double eigenvalue_tolerance(const Eigen::VectorXd& values)
{
    const double top = values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
    return 1e-8 * std::max(1.0, top);
}

struct EigenGroup
{
    Eigen::Index begin; // first index in the ascending spectrum
    Eigen::Index end;   // one past the last
    double value;       // mean of the grouped eigenvalues

    Eigen::Index multiplicity() const { return end - begin; }
};

/// Clusters the ascending spectrum into runs whose consecutive gaps are within
/// eigenvalue_tolerance.
inline std::vector<EigenGroup> eigenvalue_groups(const Eigen::VectorXd& values)
{
    std::vector<EigenGroup> groups;
    const double tol = eigenvalue_tolerance(values);
    Eigen::Index start = 0;
    for (Eigen::Index i = 1; i <= values.size(); ++i) {
        if (i == values.size() || values[i] - values[i - 1] > tol) {
            groups.push_back({start, i, values.segment(start, i - start).mean()});
            start = i;
        }
    }
    return groups;
}

/// Row i holds (h1_i, ..., hp_i): the relaxed-cut embedding of vertex i.
struct SpectralEmbedding
{
    int p = 0;
    Eigen::MatrixXd coordinates; // n x p
};

inline SpectralEmbedding spectral_embedding(const EigenDecomposition& decomp, int p)
{
    const auto n = decomp.size();
    if (n < 2)
        throw AnalysisError("spectral embedding needs at least two vertices");
    if (decomp.values[1] <= 1e-9)
        throw AnalysisError("spectral embedding requires a connected graph");
    if (p < 1 || p > n - 1)
        throw AnalysisError("embedding dimension " + std::to_string(p) + " outside [1, " +
                            std::to_string(n - 1) + "]");
    return {p, decomp.vectors.middleCols(1, p)};
}

struct KMeansResult
{
    std::vector<std::size_t> assignment;
    Eigen::MatrixXd centers; // k x p
    double objective = 0.0;  // sum of squared distances to assigned centers
    int iterations = 0;
};

namespace detail {

/// One Lloyd run from `k` distinct random points drawn from `rng`. An empty
/// cluster is re-seeded at the point farthest from its current center; ties go
/// to the lowest center index.
inline KMeansResult lloyd(const Eigen::MatrixXd& points, std::size_t k, std::mt19937_64& rng, int max_iter, double tol)
{
    const auto n = static_cast<std::size_t>(points.rows());
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i)
        pool[i] = i;
    KMeansResult r;
    r.centers.resize(static_cast<Eigen::Index>(k), points.cols());
    for (std::size_t c = 0; c < k; ++c) {
        std::uniform_int_distribution<std::size_t> pick(c, n - 1);
        std::swap(pool[c], pool[pick(rng)]);
        r.centers.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(pool[c]));
    }

    r.assignment.assign(n, k);
    std::vector<double> dist(n, 0.0);
    for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d = (points.row(static_cast<Eigen::Index>(i)) -
                                  r.centers.row(static_cast<Eigen::Index>(c)))
                                     .squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            changed |= r.assignment[i] != best;
            r.assignment[i] = best;
            dist[i] = best_d;
        }

        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), points.cols());
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            next.row(static_cast<Eigen::Index>(r.assignment[i])) += points.row(static_cast<Eigen::Index>(i));
            ++sizes[r.assignment[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] > 0) {
                next.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(sizes[c]);
                continue;
            }
            const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
            next.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(far));
            dist[far] = 0.0;
            changed = true;
        }
        const double shift = (next - r.centers).rowwise().norm().maxCoeff();
        r.centers = next;
        if (!changed && shift <= tol)
            break;
    }
    r.iterations = std::min(r.iterations, max_iter);

    r.objective = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        r.objective += (points.row(static_cast<Eigen::Index>(i)) -
                        r.centers.row(static_cast<Eigen::Index>(r.assignment[i])))
                           .squaredNorm();
    return r;
}

} // namespace detail

/**
 * k-means: `restarts` Lloyd runs from seeded random distinct initial centers,
 * keeping the lowest objective (earliest run on ties). Deterministic for a
 * fixed seed.
 */
inline KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed, int max_iter = 100,
                           double tol = 1e-9, int restarts = 10)
{
    const auto n = static_cast<std::size_t>(points.rows());
    if (k == 0 || k > n)
        throw AnalysisError("k-means: k=" + std::to_string(k) + " must lie in [1, " + std::to_string(n) + "]");
    if (restarts < 1)
        throw AnalysisError("k-means needs at least one run");
    std::mt19937_64 rng(seed);
    auto best = detail::lloyd(points, k, rng, max_iter, tol);
    for (int run = 1; run < restarts; ++run) {
        auto next = detail::lloyd(points, k, rng, max_iter, tol);
        if (next.objective < best.objective)
            best = std::move(next);
    }
    return best;
}

/// k-means on the p-dimensional relaxed-cut embedding of a connected graph.
inline KMeansResult spectral_clustering(const WeightedGraph& g, int p, std::size_t k, std::uint64_t seed,
                                        LaplacianMode mode = LaplacianMode::Weighted)
{
    if (g.empty())
        throw AnalysisError("spectral clustering of an empty graph");
    if (component_count(g) != 1)
        throw AnalysisError("spectral clustering requires a connected graph");
    const auto decomp = eig_sym(laplacian(g, mode).matrix);
    const auto embedding = spectral_embedding(decomp, p);
    return kmeans(embedding.coordinates, k, seed);
}

/// cut(S_1..S_p) = sum_i W(S_i, V \ S_i); each crossing edge counts from both sides.
inline double evaluate_cut(const WeightedGraph& g, const std::vector<std::vector<VertexId>>& partition)
{
    constexpr auto unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> block(g.vertex_count(), unset);
    for (std::size_t b = 0; b < partition.size(); ++b) {
        for (VertexId v : partition[b]) {
            if (v >= g.vertex_count())
                throw AnalysisError("partition references an unknown vertex");
            if (block[v] != unset)
                throw AnalysisError("partition blocks overlap on vertex '" + g.label(v) + "'");
            block[v] = b;
        }
    }
    for (VertexId v = 0; v < g.vertex_count(); ++v)
        if (block[v] == unset)
            throw AnalysisError("partition misses vertex '" + g.label(v) + "'");

    std::vector<double> outgoing(partition.size(), 0.0);
    for (const auto& e : g.edges()) {
        if (block[e.u] != block[e.v]) {
            outgoing[block[e.u]] += e.weight;
            outgoing[block[e.v]] += e.weight;
        }
    }
    double total = 0.0;
    for (double w : outgoing)
        total += w;
    return total;
}

/// Row-major CSV dump with 17 significant digits.
inline void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m)
{
    const auto old = out.precision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j)
                out << ',';
            out << m(i, j);
        }
        out << '\n';
    }
    out.precision(old);
}

} // namespace lapsom

#endif // LAPSOM_SPECTRAL_HPP
