#include "ddc/loss.hpp"

#include "ddc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ddc {

double bce(int target, double similarity) {
    const double c = std::clamp(similarity, kBceClamp, 1.0 - kBceClamp);
    return target != 0 ? -std::log(c) : -std::log(1.0 - c);
}

PairLoss batch_loss_and_grad(const Matrix& indicators, const RelationMatrix& r, double positive_weight) {
    const Eigen::Index m = indicators.rows();
    if (static_cast<Eigen::Index>(r.size()) != m) {
        throw InvalidArgument("batch_loss_and_grad: " + std::to_string(m) + " indicators but relation over " +
                              std::to_string(r.size()) + " patterns");
    }

    const Matrix rbar = coarse_similarity(indicators);
    // dl/dR̄ per ordered pair; the sum is accumulated row by row in a fixed order.
    Matrix pair_grad(m, m);
    PairLoss out;
    const auto& labels = r.labels();
    for (Eigen::Index i = 0; i < m; ++i) {
        double row_loss = 0.0;
        const int li = labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m; ++j) {
            const double s = rbar(i, j);
            const double c = std::clamp(s, kBceClamp, 1.0 - kBceClamp);
            if (li == labels[static_cast<std::size_t>(j)]) {
                row_loss += -positive_weight * std::log(c);
                pair_grad(i, j) = s < 1.0 - kBceClamp ? -positive_weight / c : 0.0;
                ++out.report.positive_pair_count;
            } else {
                row_loss += -std::log(1.0 - c);
                pair_grad(i, j) = s > kBceClamp ? 1.0 / (1.0 - c) : 0.0;
                ++out.report.negative_pair_count;
            }
        }
        out.report.total_loss += row_loss;
    }
    out.report.mean_loss = m > 0 ? out.report.total_loss / static_cast<double>(m * m) : 0.0;

    // I_i appears in both slots of R̄_ij = I_i . I_j.
    out.grad = (pair_grad + pair_grad.transpose()) * indicators;
    return out;
}

} // namespace ddc
