#include "ddc/relation.hpp"

#include "ddc/errors.hpp"

#include <cassert>
#include <cmath>
#include <string>
#include <unordered_map>

namespace ddc {

Labels canonical_labels(const Labels& labels) {
    std::unordered_map<int, int> renumber;
    Labels out;
    out.reserve(labels.size());
    for (int label : labels) {
        auto [it, inserted] = renumber.try_emplace(label, static_cast<int>(renumber.size()));
        out.push_back(it->second);
    }
    return out;
}

RelationMatrix::RelationMatrix(Labels labels) : labels_(canonical_labels(labels)) {
    for (int label : labels_) blocks_ = std::max(blocks_, label + 1);
}

Matrix RelationMatrix::dense() const {
    const auto m = static_cast<Eigen::Index>(labels_.size());
    Matrix out(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            out(i, j) = related(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) ? 1.0 : 0.0;
        }
    }
    return out;
}

Matrix coarse_similarity(const Matrix& indicators) {
    return indicators * indicators.transpose();
}

namespace {

void check_affinity(const Matrix& rbar, int k) {
    if (rbar.rows() != rbar.cols()) throw InvalidArgument("estimate_relations: affinity is not square");
    if (k < 2 || k > rbar.rows()) {
        throw InvalidArgument("estimate_relations: k=" + std::to_string(k) + " outside [2, " +
                              std::to_string(rbar.rows()) + "]");
    }
}

Matrix row_normalized(Matrix embedding) {
    for (Eigen::Index i = 0; i < embedding.rows(); ++i) {
        const double norm = embedding.row(i).norm();
        if (norm > 0.0) embedding.row(i) /= norm;
    }
    return embedding;
}

Vector inverse_sqrt_degrees(const Vector& degrees) {
    // R̄ has a unit diagonal, so every degree is at least 1.
    assert((degrees.array() > 0.0).all());
    if (!(degrees.array() > 0.0).all()) throw InvalidArgument("estimate_relations: non-positive degree");
    return degrees.array().rsqrt().matrix();
}

} // namespace

RelationMatrix estimate_relations(const Matrix& rbar, int k, std::uint64_t seed) {
    check_affinity(rbar, k);
    const Vector scale = inverse_sqrt_degrees(rbar.rowwise().sum());
    const Eigen::Index m = rbar.rows();

    Matrix laplacian = Matrix::Identity(m, m) - scale.asDiagonal() * rbar * scale.asDiagonal();
    laplacian = 0.5 * (laplacian + laplacian.transpose());
    const EigenResult eig = sym_eigen(laplacian);

    const Matrix embedding = row_normalized(eig.eigenvectors.leftCols(k));
    return RelationMatrix(kmeans(embedding, k, seed));
}

RelationMatrix estimate_relations_factored(const Matrix& indicators, int k, std::uint64_t seed) {
    const Eigen::Index m = indicators.rows();
    if (k < 2 || k > m) {
        throw InvalidArgument("estimate_relations: k=" + std::to_string(k) + " outside [2, " + std::to_string(m) + "]");
    }
    const Vector column_sum = indicators.colwise().sum().transpose();
    const Vector scale = inverse_sqrt_degrees(indicators * column_sum);
    const Matrix factor = scale.asDiagonal() * indicators; // m x d

    Matrix gram = factor.transpose() * factor;
    gram = 0.5 * (gram + gram.transpose());
    const EigenResult eig = sym_eigen(gram); // ascending

    const Eigen::Index dims = eig.eigenvalues.size();
    const double cutoff = 1e-12 * std::max(1.0, eig.eigenvalues[dims - 1]);
    const Eigen::Index take = std::min<Eigen::Index>(k, dims);

    std::vector<Eigen::Index> columns;
    for (Eigen::Index j = dims - 1; j >= dims - take; --j) {
        if (eig.eigenvalues[j] > cutoff) columns.push_back(j);
    }
    Matrix embedding(m, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const Eigen::Index j = columns[c];
        embedding.col(static_cast<Eigen::Index>(c)) = factor * eig.eigenvectors.col(j) / std::sqrt(eig.eigenvalues[j]);
    }
    // Fewer than k columns survive when R̄ has rank < k; k-means then leaves
    // some blocks empty.
    return RelationMatrix(kmeans(row_normalized(std::move(embedding)), k, seed));
}

ConstraintError global_constraint_error(const RelationMatrix& r, const Matrix& rbar) {
    const auto m = static_cast<Eigen::Index>(r.size());
    if (rbar.rows() != m || rbar.cols() != m) {
        throw InvalidArgument("global_constraint_error: relation is " + std::to_string(m) + "x" + std::to_string(m) +
                              ", similarity is " + std::to_string(rbar.rows()) + "x" + std::to_string(rbar.cols()));
    }
    ConstraintError err;
    const auto& labels = r.labels();
    for (Eigen::Index i = 0; i < m; ++i) {
        const int li = labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m; ++j) {
            const double target = li == labels[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
            err.total += std::abs(target - rbar(i, j));
        }
    }
    err.normalized = m > 0 ? err.total / static_cast<double>(m * m) : 0.0;
    return err;
}

ConstraintError global_constraint_error(const Matrix& r, const Matrix& rbar) {
    if (r.rows() != rbar.rows() || r.cols() != rbar.cols()) {
        throw InvalidArgument("global_constraint_error: dimension mismatch");
    }
    ConstraintError err;
    err.total = (r - rbar).cwiseAbs().sum();
    err.normalized = r.size() > 0 ? err.total / static_cast<double>(r.size()) : 0.0;
    return err;
}

std::string EquivalenceViolation::describe() const {
    switch (rule) {
    case Rule::reflexivity: return "reflexivity violated at (" + std::to_string(i) + "," + std::to_string(i) + ")";
    case Rule::symmetry:
        return "symmetry violated at (" + std::to_string(i) + "," + std::to_string(j) + ")";
    case Rule::transitivity:
        return "transitivity violated: R(" + std::to_string(i) + "," + std::to_string(j) + ")=1, R(" +
               std::to_string(j) + "," + std::to_string(h) + ")=1, R(" + std::to_string(i) + "," +
               std::to_string(h) + ")=0";
    }
    return "unknown violation";
}

EquivalenceCheck validate_equivalence(const Matrix& r) {
    if (r.rows() != r.cols()) throw InvalidArgument("validate_equivalence: matrix is not square");
    const auto m = static_cast<std::size_t>(r.rows());
    auto at = [&](std::size_t i, std::size_t j) { return r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); };

    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double v = at(i, j);
            if (v != 0.0 && v != 1.0) {
                throw InvalidArgument("validate_equivalence: non-binary entry at (" + std::to_string(i) + "," +
                                      std::to_string(j) + ")");
            }
        }
    }

    using Rule = EquivalenceViolation::Rule;
    for (std::size_t i = 0; i < m; ++i) {
        if (at(i, i) != 1.0) return {false, EquivalenceViolation{Rule::reflexivity, i, i, i}};
    }
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            if (at(i, j) != at(j, i)) return {false, EquivalenceViolation{Rule::symmetry, i, j, j}};
        }
    }

    // Reflexive and symmetric R is transitive iff R(i,j) == [rep(i) == rep(j)]
    // with rep(i) the first column set in row i. O(m^2).
    std::vector<std::size_t> rep(m);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t j = 0;
        while (at(i, j) != 1.0) ++j;
        rep[i] = j;
    }
    bool transitive = true;
    for (std::size_t i = 0; i < m && transitive; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if ((at(i, j) == 1.0) != (rep[i] == rep[j])) {
                transitive = false;
                break;
            }
        }
    }
    if (transitive) return {};

    // Report the lexicographically first offending triple.
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (at(i, j) != 1.0) continue;
            for (std::size_t h = 0; h < m; ++h) {
                if (at(j, h) == 1.0 && at(i, h) != 1.0) {
                    return {false, EquivalenceViolation{Rule::transitivity, i, j, h}};
                }
            }
        }
    }
    assert(false && "representative test and triple scan disagree");
    return {false, std::nullopt};
}

EquivalenceCheck validate_equivalence(const RelationMatrix& r) {
    return validate_equivalence(r.dense());
}

} // namespace ddc
