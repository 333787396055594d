#pragma once

#include "ddc/linalg.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace ddc {

/// A binary equivalence relation over a mini-batch, stored in its compressed
/// form: one block label per pattern. R(i,j) = 1 iff labels agree.
/// Labels are canonical (numbered by first appearance).
class RelationMatrix {
public:
    RelationMatrix() = default;
    explicit RelationMatrix(Labels labels);

    std::size_t size() const { return labels_.size(); }
    const Labels& labels() const { return labels_; }
    int block_count() const { return blocks_; }

    bool related(std::size_t i, std::size_t j) const { return labels_[i] == labels_[j]; }
    double operator()(std::size_t i, std::size_t j) const { return related(i, j) ? 1.0 : 0.0; }

    Matrix dense() const;

private:
    Labels labels_;
    int blocks_ = 0;
};

/// Renumbers labels by order of first appearance.
Labels canonical_labels(const Labels& labels);

/// R̄ = I * I^T for a batch of indicator rows.
Matrix coarse_similarity(const Matrix& indicators);

/// Nearest equivalence relation to R̄ by normalised-cut spectral clustering:
/// L = I - D^-1/2 R̄ D^-1/2, eigenvectors of the k smallest eigenvalues,
/// row-normalised, then k-means into k blocks. Uses the dense Jacobi solver.
RelationMatrix estimate_relations(const Matrix& rbar, int k, std::uint64_t seed);

/// Same estimator when R̄ = I * I^T is known in factored form. The affinity
/// D^-1/2 R̄ D^-1/2 = B B^T with B = D^-1/2 I has rank <= k, so its leading
/// eigenvectors come from the k x k Gram matrix B^T B at O(m k^2) cost.
/// Directions with zero eigenvalue are dropped from the embedding.
RelationMatrix estimate_relations_factored(const Matrix& indicators, int k, std::uint64_t seed);

struct ConstraintError {
    double total = 0.0;      // sum_ij |R_ij - R̄_ij|
    double normalized = 0.0; // total / m^2
};

ConstraintError global_constraint_error(const RelationMatrix& r, const Matrix& rbar);
ConstraintError global_constraint_error(const Matrix& r, const Matrix& rbar);

struct EquivalenceViolation {
    enum class Rule { reflexivity, symmetry, transitivity };
    Rule rule;
    std::size_t i = 0;
    std::size_t j = 0;
    std::size_t h = 0; // only meaningful for transitivity

    std::string describe() const;
};

struct EquivalenceCheck {
    bool valid = true;
    std::optional<EquivalenceViolation> violation;
};

/// Checks reflexivity, symmetry and transitivity of a dense 0/1 matrix and
/// reports the first violation found. Throws InvalidArgument for non-square
/// or non-binary input.
EquivalenceCheck validate_equivalence(const Matrix& r);
EquivalenceCheck validate_equivalence(const RelationMatrix& r);

} // namespace ddc
