#pragma once

#include "ddc/linalg.hpp"
#include "ddc/relation.hpp"

#include <cstddef>

namespace ddc {

/// Clamp applied to R̄ inside the logarithms.
inline constexpr double kBceClamp = 1e-7;

/// Binary cross-entropy of a 0/1 target against a similarity clamped to
/// [kBceClamp, 1 - kBceClamp].
double bce(int target, double similarity);

struct PairLossReport {
    double total_loss = 0.0;
    double mean_loss = 0.0; // total / m^2
    std::size_t positive_pair_count = 0;
    std::size_t negative_pair_count = 0;
};

struct PairLoss {
    PairLossReport report;
    Matrix grad; // dE/dI, m x k
};

/// E = sum over all ordered pairs (i, j), diagonal included, of
/// bce(R_ij, I_i . I_j). Positive pairs are scaled by `positive_weight`.
/// A pair saturated on the correct side of the clamp (positive with
/// R̄ >= 1 - clamp, negative with R̄ <= clamp) contributes zero gradient; a
/// pair saturated on the wrong side takes the derivative at the clamp edge,
/// so identical indicators claimed unrelated are still pushed apart.
PairLoss batch_loss_and_grad(const Matrix& indicators, const RelationMatrix& r, double positive_weight = 1.0);

} // namespace ddc
