#include "ddc/metrics.hpp"

#include "ddc/errors.hpp"
#include "ddc/relation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ddc {

namespace {

void check_lengths(const Labels& pred, const Labels& truth, const char* who) {
    if (pred.size() != truth.size()) {
        throw InvalidArgument(std::string(who) + ": label lengths differ (" + std::to_string(pred.size()) + " vs " +
                              std::to_string(truth.size()) + ")");
    }
    if (pred.empty()) throw InvalidArgument(std::string(who) + ": empty labelling");
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

double entropy(const Vector& sums, double total) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < sums.size(); ++i) {
        if (sums[i] > 0.0) {
            const double p = sums[i] / total;
            h -= p * std::log(p);
        }
    }
    return h;
}

} // namespace

ContingencyTable contingency(const Labels& pred, const Labels& truth) {
    check_lengths(pred, truth, "contingency");
    const Labels p = canonical_labels(pred);
    const Labels t = canonical_labels(truth);
    const int rows = *std::max_element(p.begin(), p.end()) + 1;
    const int cols = *std::max_element(t.begin(), t.end()) + 1;

    ContingencyTable table;
    table.counts = Matrix::Zero(rows, cols);
    for (std::size_t i = 0; i < p.size(); ++i) table.counts(p[i], t[i]) += 1.0;
    table.row_sums = table.counts.rowwise().sum();
    table.col_sums = table.counts.colwise().sum().transpose();
    table.total = static_cast<double>(p.size());
    return table;
}

double nmi(const Labels& pred, const Labels& truth) {
    const ContingencyTable table = contingency(pred, truth);
    const double hp = entropy(table.row_sums, table.total);
    const double ht = entropy(table.col_sums, table.total);
    const bool single_p = table.counts.rows() == 1;
    const bool single_t = table.counts.cols() == 1;
    if (single_p && single_t) return 1.0;
    if (single_p || single_t) return 0.0;

    double mi = 0.0;
    for (Eigen::Index i = 0; i < table.counts.rows(); ++i) {
        for (Eigen::Index j = 0; j < table.counts.cols(); ++j) {
            const double nij = table.counts(i, j);
            if (nij > 0.0) {
                mi += nij / table.total * std::log(table.total * nij / (table.row_sums[i] * table.col_sums[j]));
            }
        }
    }
    return std::clamp(mi / std::sqrt(hp * ht), 0.0, 1.0);
}

double ari(const Labels& pred, const Labels& truth) {
    const ContingencyTable table = contingency(pred, truth);
    double index = 0.0;
    for (Eigen::Index i = 0; i < table.counts.size(); ++i) index += choose2(table.counts.data()[i]);
    double sum_rows = 0.0;
    for (Eigen::Index i = 0; i < table.row_sums.size(); ++i) sum_rows += choose2(table.row_sums[i]);
    double sum_cols = 0.0;
    for (Eigen::Index j = 0; j < table.col_sums.size(); ++j) sum_cols += choose2(table.col_sums[j]);

    const double pairs = choose2(table.total);
    const double expected = pairs > 0.0 ? sum_rows * sum_cols / pairs : 0.0;
    const double max_index = 0.5 * (sum_rows + sum_cols);
    const double denom = max_index - expected;
    if (denom == 0.0) return canonical_labels(pred) == canonical_labels(truth) ? 1.0 : 0.0;
    return (index - expected) / denom;
}

double acc(const Labels& pred, const Labels& truth) {
    const ContingencyTable table = contingency(pred, truth);
    const Eigen::Index size = std::max(table.counts.rows(), table.counts.cols());
    Matrix padded = Matrix::Zero(size, size);
    padded.topLeftCorner(table.counts.rows(), table.counts.cols()) = table.counts;

    const Assignment match = hungarian(-padded);
    return -match.cost / table.total;
}

Assignment hungarian(const Matrix& cost) {
    if (cost.rows() != cost.cols()) throw InvalidArgument("hungarian: cost matrix is not square");
    if (!cost.allFinite()) throw InvalidArgument("hungarian: non-finite cost");
    const int n = static_cast<int>(cost.rows());
    Assignment result;
    if (n == 0) return result;

    // Shortest augmenting paths with row/column potentials; 1-based, column 0
    // is a virtual source.
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match_col(n + 1, 0), way(n + 1, 0);
    for (int row = 1; row <= n; ++row) {
        match_col[0] = row;
        int col0 = 0;
        std::vector<double> min_v(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[col0] = true;
            const int row0 = match_col[col0];
            double delta = inf;
            int col1 = 0;
            for (int col = 1; col <= n; ++col) {
                if (used[col]) continue;
                const double reduced = cost(row0 - 1, col - 1) - u[row0] - v[col];
                if (reduced < min_v[col]) {
                    min_v[col] = reduced;
                    way[col] = col0;
                }
                if (min_v[col] < delta) {
                    delta = min_v[col];
                    col1 = col;
                }
            }
            for (int col = 0; col <= n; ++col) {
                if (used[col]) {
                    u[match_col[col]] += delta;
                    v[col] -= delta;
                } else {
                    min_v[col] -= delta;
                }
            }
            col0 = col1;
        } while (match_col[col0] != 0);
        do {
            const int col1 = way[col0];
            match_col[col0] = match_col[col1];
            col0 = col1;
        } while (col0 != 0);
    }

    result.row_to_col.assign(static_cast<std::size_t>(n), -1);
    for (int col = 1; col <= n; ++col) result.row_to_col[static_cast<std::size_t>(match_col[col] - 1)] = col - 1;
    for (int row = 0; row < n; ++row) result.cost += cost(row, result.row_to_col[static_cast<std::size_t>(row)]);
    return result;
}

} // namespace ddc
