#ifndef LAPSOM_KERNEL_HPP
#define LAPSOM_KERNEL_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "lapsom/diagnostics.hpp"
#include "lapsom/error.hpp"
#include "lapsom/spectral.hpp"

namespace lapsom {

/// D^beta = exp(-beta L) together with the beta it was built for.
struct DiffusionKernel
{
    double beta = 0.0;
    Eigen::MatrixXd matrix;
    std::uint64_t source_decomp_id = 0;

    Eigen::Index size() const { return matrix.rows(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return matrix(i, j); }
};

/// Distances this far below zero are roundoff and clamp to 0; anything lower
/// means the kernel is not positive semi-definite.
inline constexpr double kDistanceClampTolerance = 1e-10;

/// Band of beta values that gave usable maps on social graphs.
inline constexpr double kBetaLow = 0.01;
inline constexpr double kBetaHigh = 0.05;

namespace detail {

inline double clamp_distance(double d)
{
    if (d >= 0.0)
        return d;
    if (d >= -kDistanceClampTolerance)
        return 0.0;
    std::ostringstream msg;
    msg << "negative squared feature-space distance " << d << " (kernel is not positive semi-definite)";
    throw AnalysisError(msg.str());
}

} // namespace detail

/**
 * Diffusion kernel assembled from the spectral sum
 *   D^beta = sum_k exp(-beta lambda_k) h_k h_k^T
 * of a Laplacian decomposition. The result is symmetrized by averaging with
 * its transpose. beta = 0 yields the identity.
 */
inline DiffusionKernel diffusion_kernel(const EigenDecomposition& decomp, double beta)
{
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw AnalysisError("diffusion kernel beta must be a non-negative finite number");
    const double top = decomp.size() ? decomp.values.cwiseAbs().maxCoeff() : 0.0;
    if (decomp.residual_bound > 1e-8 * std::max(1.0, top))
        throw AnalysisError("decomposition residual too large to build a kernel");
    if (beta > 0.0 && (beta < kBetaLow || beta > kBetaHigh)) {
        std::ostringstream msg;
        msg << "beta=" << beta << " lies outside the usual [" << kBetaLow << ", " << kBetaHigh << "] band";
        diag::warn(msg.str());
    }

    DiffusionKernel k;
    k.beta = beta;
    k.source_decomp_id = decomp.id;
    const Eigen::VectorXd damping = (-beta * decomp.values.array()).exp();
    const Eigen::MatrixXd d = decomp.vectors * damping.asDiagonal() * decomp.vectors.transpose();
    k.matrix = 0.5 * (d + d.transpose());
    return k;
}

/**
 * Explicit coordinates of the kernel feature map: row i is (h_0_i, ..., h_{n-1}_i)
 * and inner products are weighted by exp(-beta lambda_k). Intended as an
 * independent route for checking kernel-trick computations.
 */
struct ExplicitFeatureMap
{
    Eigen::MatrixXd coordinates; // n x n
    Eigen::VectorXd weights;     // exp(-beta lambda_k)

    double inner(const Eigen::VectorXd& z, const Eigen::VectorXd& zp) const
    {
        return (weights.array() * z.array() * zp.array()).sum();
    }

    Eigen::VectorXd point(Eigen::Index i) const { return coordinates.row(i).transpose(); }

    /// Coordinates of sum_j gamma_j phi(x_j).
    Eigen::VectorXd combination(const Eigen::VectorXd& gamma) const { return coordinates.transpose() * gamma; }

    double distance_sq(const Eigen::VectorXd& z, const Eigen::VectorXd& zp) const
    {
        const Eigen::VectorXd diff = z - zp;
        return inner(diff, diff);
    }
};

inline ExplicitFeatureMap explicit_feature_map(const EigenDecomposition& decomp, double beta)
{
    return {decomp.vectors, (-beta * decomp.values.array()).exp().matrix()};
}

/// ||phi(x_i) - sum_j gamma_j phi(x_j)||^2 via the kernel trick.
inline double kernel_distance_sq(const DiffusionKernel& k, Eigen::Index i, const Eigen::Ref<const Eigen::VectorXd>& gamma)
{
    const Eigen::VectorXd kg = k.matrix * gamma;
    return detail::clamp_distance(k.matrix(i, i) + gamma.dot(kg) - 2.0 * kg[i]);
}

/// Squared feature-space distance between two prototypes given by coefficients.
inline double prototype_distance_sq(const DiffusionKernel& k, const Eigen::Ref<const Eigen::VectorXd>& a,
                                    const Eigen::Ref<const Eigen::VectorXd>& b)
{
    const Eigen::VectorXd diff = a - b;
    return detail::clamp_distance(diff.dot(k.matrix * diff));
}

struct KernelPca
{
    // Column c holds the coefficients of the c-th principal direction in terms
    // of the (uncentered) mapped vertices; each direction has unit norm.
    Eigen::MatrixXd coefficients;
    Eigen::VectorXd variances;   // descending; eigenvalue of the centered kernel / n
    Eigen::MatrixXd projections; // n x c, coordinates relative to the feature-space mean
};

/**
 * Kernel PCA of the mapped vertices. The kernel is double-centered, decomposed,
 * and the top components are scaled to unit feature-space norm so projection
 * coordinates are Euclidean lengths in the feature space.
 */
inline KernelPca kernel_pca(const DiffusionKernel& k, int num_components = 2)
{
    const Eigen::Index n = k.size();
    if (n < 2)
        throw AnalysisError("kernel PCA needs at least two vertices");
    if (num_components < 1 || num_components > n - 1)
        throw AnalysisError("kernel PCA: num_components=" + std::to_string(num_components) + " outside [1, " +
                            std::to_string(n - 1) + "]");

    const Eigen::VectorXd row_mean = k.matrix.rowwise().mean();
    const Eigen::VectorXd col_mean = k.matrix.colwise().mean().transpose();
    const double grand = k.matrix.mean();
    Eigen::MatrixXd centered = k.matrix;
    centered.colwise() -= row_mean;
    centered.rowwise() -= col_mean.transpose();
    centered.array() += grand;
    centered = 0.5 * (centered + centered.transpose()).eval();

    const auto decomp = eig_sym(centered);
    const double floor = 1e-14 * std::max(1.0, decomp.values.cwiseAbs().maxCoeff());

    KernelPca pca;
    pca.coefficients = Eigen::MatrixXd::Zero(n, num_components);
    pca.variances = Eigen::VectorXd::Zero(num_components);
    pca.projections = Eigen::MatrixXd::Zero(n, num_components);
    for (int c = 0; c < num_components; ++c) {
        const Eigen::Index src = n - 1 - c;
        const double mu = decomp.values[src];
        if (mu <= floor)
            continue;
        const Eigen::VectorXd u = decomp.vectors.col(src);
        Eigen::VectorXd alpha = u / std::sqrt(mu);
        alpha.array() -= alpha.sum() / static_cast<double>(n);
        pca.coefficients.col(c) = alpha;
        pca.variances[c] = mu / static_cast<double>(n);
        pca.projections.col(c) = std::sqrt(mu) * u;
    }
    return pca;
}

// ---------------------------------------------------------------------------
// Binary cache: "DKRN", u32 version, u32 n, f64 beta, n*n f64 row-major, all
// little-endian.

inline constexpr std::uint32_t kKernelCacheVersion = 1;

namespace detail {

template <typename T>
void write_le(std::ostream& out, T value)
{
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(std::begin(bytes), std::end(bytes));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in)
{
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
        throw InputError("kernel cache truncated");
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(std::begin(bytes), std::end(bytes));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

} // namespace detail

inline void write_kernel_cache(std::ostream& out, const DiffusionKernel& k)
{
    out.write("DKRN", 4);
    detail::write_le<std::uint32_t>(out, kKernelCacheVersion);
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(k.size()));
    detail::write_le<double>(out, k.beta);
    for (Eigen::Index i = 0; i < k.size(); ++i)
        for (Eigen::Index j = 0; j < k.size(); ++j)
            detail::write_le<double>(out, k.matrix(i, j));
    if (!out)
        throw InputError("failed to write kernel cache");
}

inline DiffusionKernel read_kernel_cache(std::istream& in)
{
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "DKRN", 4) != 0)
        throw InputError("not a kernel cache (bad magic)");
    const auto version = detail::read_le<std::uint32_t>(in);
    if (version != kKernelCacheVersion)
        throw InputError("unsupported kernel cache version " + std::to_string(version));
    const auto n = static_cast<Eigen::Index>(detail::read_le<std::uint32_t>(in));
    DiffusionKernel k;
    k.beta = detail::read_le<double>(in);
    k.matrix.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            k.matrix(i, j) = detail::read_le<double>(in);
    for (Eigen::Index i = 0; i < n; ++i)
        if (std::abs(k.matrix.row(i).sum() - 1.0) > 1e-10)
            throw InputError("kernel cache row " + std::to_string(i) + " does not sum to 1");
    return k;
}

} // namespace lapsom

#endif // LAPSOM_KERNEL_HPP
