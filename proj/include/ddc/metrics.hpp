#pragma once

#include "ddc/linalg.hpp"

#include <vector>

namespace ddc {

/// Counts of (predicted cluster, true class) pairs. Labels of either side are
/// renumbered densely in order of first appearance.
struct ContingencyTable {
    Matrix counts; // predicted x true
    Vector row_sums;
    Vector col_sums;
    double total = 0.0;
};

ContingencyTable contingency(const Labels& pred, const Labels& truth);

/// Mutual information over sqrt(H(P) H(T)), natural logs. 1 when both
/// partitions are a single cluster, 0 when exactly one is.
double nmi(const Labels& pred, const Labels& truth);

/// Hubert-Arabie adjusted Rand index. When the denominator vanishes, 1 for
/// identical partitions and 0 otherwise.
double ari(const Labels& pred, const Labels& truth);

/// Fraction of patterns matched under the best one-to-one cluster-to-class
/// assignment (Hungarian algorithm on the zero-padded contingency table).
double acc(const Labels& pred, const Labels& truth);

struct Assignment {
    std::vector<int> row_to_col;
    double cost = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix.
Assignment hungarian(const Matrix& cost);

} // namespace ddc
