#include "ddc/linalg.hpp"

#include "ddc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace ddc {

namespace {

double off_diagonal_norm(const Matrix& a) {
    double sum = 0.0;
    const Eigen::Index n = a.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j) sum += a(i, j) * a(i, j);
        }
    }
    return std::sqrt(sum);
}

// Zeroes a(p,q) with one rotation and accumulates it into v.
void rotate(Matrix& a, Matrix& v, Eigen::Index p, Eigen::Index q) {
    const double apq = a(p, q);
    if (apq == 0.0) return;

    const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
    const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;

    const Eigen::Index n = a.rows();
    for (Eigen::Index k = 0; k < n; ++k) {
        const double akp = a(k, p);
        const double akq = a(k, q);
        a(k, p) = c * akp - s * akq;
        a(k, q) = s * akp + c * akq;
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        const double apk = a(p, k);
        const double aqk = a(q, k);
        a(p, k) = c * apk - s * aqk;
        a(q, k) = s * apk + c * aqk;
    }
    a(p, q) = 0.0;
    a(q, p) = 0.0;

    for (Eigen::Index k = 0; k < n; ++k) {
        const double vkp = v(k, p);
        const double vkq = v(k, q);
        v(k, p) = c * vkp - s * vkq;
        v(k, q) = s * vkp + c * vkq;
    }
}

double squared_distance(const Matrix& points, Eigen::Index i, const Matrix& centroids, Eigen::Index c) {
    return (points.row(i) - centroids.row(c)).squaredNorm();
}

// k-means++: first centre uniform, the rest proportional to squared distance.
Matrix seed_centroids(const Matrix& points, int k, std::mt19937_64& rng) {
    const Eigen::Index n = points.rows();
    Matrix centroids(k, points.cols());
    std::vector<double> min_dist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());

    std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
    Eigen::Index chosen = first(rng);
    int seeded = 0;
    while (true) {
        centroids.row(seeded) = points.row(chosen);
        ++seeded;
        for (Eigen::Index i = 0; i < n; ++i) {
            min_dist[static_cast<std::size_t>(i)] =
                std::min(min_dist[static_cast<std::size_t>(i)], squared_distance(points, i, centroids, seeded - 1));
        }
        if (seeded == k) break;

        const double total = std::accumulate(min_dist.begin(), min_dist.end(), 0.0);
        if (!(total > 0.0)) break; // every point sits on a centre already

        std::uniform_real_distribution<double> u(0.0, total);
        const double target = u(rng);
        double running = 0.0;
        chosen = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d = min_dist[static_cast<std::size_t>(i)];
            if (d <= 0.0) continue;
            running += d;
            chosen = i;
            if (running >= target) break;
        }
    }
    // Unseeded centres park on the first seed; ties in assignment go to the
    // lowest index, so they stay empty.
    for (int c = seeded; c < k; ++c) centroids.row(c) = centroids.row(0);
    return centroids;
}

struct Assignment {
    double inertia = 0.0;
    bool changed = false;
};

Assignment assign(const Matrix& points, const Matrix& centroids, Labels& labels) {
    Assignment result;
    const Eigen::Index n = points.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        int best = 0;
        double best_dist = squared_distance(points, i, centroids, 0);
        for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
            const double d = squared_distance(points, i, centroids, c);
            if (d < best_dist) {
                best_dist = d;
                best = static_cast<int>(c);
            }
        }
        if (labels[static_cast<std::size_t>(i)] != best) {
            labels[static_cast<std::size_t>(i)] = best;
            result.changed = true;
        }
        result.inertia += best_dist;
    }
    return result;
}

void update_centroids(const Matrix& points, const Labels& labels, Matrix& centroids) {
    Matrix sums = Matrix::Zero(centroids.rows(), centroids.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(centroids.rows()), 0);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const int c = labels[static_cast<std::size_t>(i)];
        sums.row(c) += points.row(i);
        ++counts[static_cast<std::size_t>(c)];
    }
    // Empty clusters keep their previous centre.
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
        const auto count = counts[static_cast<std::size_t>(c)];
        if (count > 0) centroids.row(c) = sums.row(c) / static_cast<double>(count);
    }
}

} // namespace

EigenResult sym_eigen(const Matrix& a, const JacobiOptions& options) {
    if (a.rows() != a.cols()) {
        throw InvalidArgument("sym_eigen: matrix is " + std::to_string(a.rows()) + "x" +
                              std::to_string(a.cols()) + ", expected square");
    }
    if (!a.allFinite()) throw InvalidArgument("sym_eigen: non-finite entry");
    const Eigen::Index n = a.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (std::abs(a(i, j) - a(j, i)) > 1e-10) {
                throw InvalidArgument("sym_eigen: matrix is not symmetric at (" + std::to_string(i) + "," +
                                      std::to_string(j) + ")");
            }
        }
    }

    Matrix work = 0.5 * (a + a.transpose());
    Matrix vectors = Matrix::Identity(n, n);
    const double threshold = options.tolerance * std::max(1.0, work.norm());

    int sweeps = 0;
    while (off_diagonal_norm(work) > threshold) {
        if (sweeps == options.max_sweeps) {
            throw SolverFailure("sym_eigen: no convergence after " + std::to_string(sweeps) + " sweeps");
        }
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) rotate(work, vectors, p, q);
        }
        ++sweeps;
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index l, Eigen::Index r) { return work(l, l) < work(r, r); });

    EigenResult result;
    result.eigenvalues.resize(n);
    result.eigenvectors.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index src = order[static_cast<std::size_t>(j)];
        result.eigenvalues[j] = work(src, src);
        result.eigenvectors.col(j) = vectors.col(src);
    }
    result.sweeps = sweeps;
    return result;
}

KMeansResult kmeans_detailed(const Matrix& points, int k, std::uint64_t seed, const KMeansOptions& options) {
    const Eigen::Index n = points.rows();
    if (k < 1) throw InvalidArgument("kmeans: k must be >= 1");
    if (k > n) {
        throw InvalidArgument("kmeans: k=" + std::to_string(k) + " exceeds number of points " + std::to_string(n));
    }
    if (!points.allFinite()) throw InvalidArgument("kmeans: non-finite point");

    std::mt19937_64 rng(seed);
    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();

    for (int restart = 0; restart < std::max(1, options.restarts); ++restart) {
        KMeansResult run;
        run.centroids = seed_centroids(points, k, rng);
        run.labels.assign(static_cast<std::size_t>(n), -1);

        for (int iter = 0; iter < options.max_iterations; ++iter) {
            const Assignment step = assign(points, run.centroids, run.labels);
            run.inertia = step.inertia;
            run.inertia_trace.push_back(step.inertia);
            run.iterations = iter + 1;
            if (!step.changed) break;
            update_centroids(points, run.labels, run.centroids);
        }
        if (run.inertia < best.inertia) best = std::move(run);
    }
    return best;
}

Labels kmeans(const Matrix& points, int k, std::uint64_t seed, const KMeansOptions& options) {
    return kmeans_detailed(points, k, seed, options).labels;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    // splitmix64 finaliser over the combined words
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace ddc
