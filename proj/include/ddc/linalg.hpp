#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace ddc {

/// Dense row-major matrix of doubles. Rows are patterns throughout the library.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;

struct EigenResult {
    Vector eigenvalues;  // ascending
    Matrix eigenvectors; // column j pairs with eigenvalues[j]
    int sweeps = 0;
};

struct JacobiOptions {
    double tolerance = 1e-12; // on the off-diagonal Frobenius norm, relative to ||a||_F
    int max_sweeps = 100;
};

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Throws InvalidArgument for non-square, asymmetric (beyond 1e-10) or
/// non-finite input and SolverFailure when the sweep cap is reached.
EigenResult sym_eigen(const Matrix& a, const JacobiOptions& options = {});

struct KMeansOptions {
    int restarts = 10;
    int max_iterations = 100;
};

struct KMeansResult {
    Labels labels;
    Matrix centroids;
    double inertia = 0.0;
    int iterations = 0;
    /// Within-cluster sum of squares after every assignment step of the
    /// winning restart.
    std::vector<double> inertia_trace;
};

/// Lloyd's k-means with k-means++ seeding; best of `restarts` by inertia.
///
/// Seeding stops early when every remaining point coincides with a chosen
/// centre, so fewer than k clusters can be non-empty. Deterministic per seed.
KMeansResult kmeans_detailed(const Matrix& points, int k, std::uint64_t seed,
                             const KMeansOptions& options = {});

Labels kmeans(const Matrix& points, int k, std::uint64_t seed,
              const KMeansOptions& options = {});

/// Mixes a base seed with a stream index. Used to derive per-epoch and
/// per-batch seeds from one user seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

} // namespace ddc
