#include "ddc/errors.hpp"
#include "ddc/metrics.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

using namespace ddc;

namespace {

// Oracles computed straight from their definitions.

double entropy(const Labels& a) {
    std::map<int, double> count;
    for (int x : a) count[x] += 1.0;
    double h = 0.0;
    for (const auto& [label, c] : count) {
        const double p = c / static_cast<double>(a.size());
        h -= p * std::log(p);
    }
    return h;
}

double mutual_information(const Labels& a, const Labels& b) {
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> pa, pb;
    const double n = static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1.0 / n;
        pa[a[i]] += 1.0 / n;
        pb[b[i]] += 1.0 / n;
    }
    double mi = 0.0;
    for (const auto& [key, p] : joint) mi += p * std::log(p / (pa[key.first] * pb[key.second]));
    return mi;
}

double oracle_ari(const Labels& a, const Labels& b) {
    // Pair counts by enumeration.
    double both = 0, only_a = 0, only_b = 0, pairs = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const bool sa = a[i] == a[j];
            const bool sb = b[i] == b[j];
            both += sa && sb;
            only_a += sa;
            only_b += sb;
            pairs += 1;
        }
    }
    const double expected = only_a * only_b / pairs;
    const double max = 0.5 * (only_a + only_b);
    return (both - expected) / (max - expected);
}

// Best one-to-one matching by trying every permutation of the padded table.
double oracle_acc(const Labels& pred, const Labels& truth) {
    std::map<int, int> pid, tid;
    for (int x : pred) pid.try_emplace(x, static_cast<int>(pid.size()));
    for (int x : truth) tid.try_emplace(x, static_cast<int>(tid.size()));
    const int s = static_cast<int>(std::max(pid.size(), tid.size()));
    Matrix counts = Matrix::Zero(s, s);
    for (std::size_t i = 0; i < pred.size(); ++i) counts(pid[pred[i]], tid[truth[i]]) += 1.0;
    std::vector<int> perm(static_cast<std::size_t>(s));
    std::iota(perm.begin(), perm.end(), 0);
    double best = 0.0;
    do {
        double hit = 0.0;
        for (int r = 0; r < s; ++r) hit += counts(r, perm[static_cast<std::size_t>(r)]);
        best = std::max(best, hit);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(pred.size());
}

double brute_min_cost(const Matrix& cost) {
    std::vector<int> perm(static_cast<std::size_t>(cost.rows()));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (std::size_t i = 0; i < perm.size(); ++i) c += cost(static_cast<Eigen::Index>(i), perm[i]);
        best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

Labels random_labels(std::size_t n, int k, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, k - 1);
    Labels out(n);
    for (auto& x : out) x = pick(rng);
    return out;
}

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("nmi: worked examples") {
    const Labels a{0, 0, 1, 1, 2, 2};
    CHECK(nmi(a, a) == doctest::Approx(1.0));
    CHECK(nmi(Labels{0, 0, 0, 0}, Labels{0, 0, 1, 1}) == 0.0);
    CHECK(nmi(Labels{0, 0, 1, 1}, Labels{0, 1, 0, 1}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(nmi(Labels{3, 3, 3}, Labels{1, 1, 1}) == 1.0);
}

TEST_CASE("ari: worked examples") {
    const Labels a{0, 0, 1, 1, 2, 2};
    CHECK(ari(a, a) == doctest::Approx(1.0));
    CHECK(ari(Labels{0, 0, 1, 1}, Labels{0, 1, 0, 1}) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(ari(Labels{5, 5, 9, 9}, Labels{0, 0, 1, 1}) == doctest::Approx(1.0));
    // Degenerate denominators.
    CHECK(ari(Labels{0, 1, 2}, Labels{0, 1, 2}) == 1.0);
    CHECK(ari(Labels{0, 0, 0}, Labels{1, 1, 1}) == 1.0);
    CHECK(ari(Labels{0, 0, 0}, Labels{0, 1, 2}) == 0.0);
}

TEST_CASE("acc: worked examples") {
    const Labels truth{0, 0, 1, 1, 2, 2};
    CHECK(acc(truth, truth) == 1.0);
    CHECK(acc(Labels{2, 2, 0, 0, 1, 1}, truth) == 1.0);
    CHECK(acc(Labels{0, 0, 0, 1, 1, 1}, Labels{0, 0, 1, 1, 2, 2}) == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("metrics: length mismatch") {
    CHECK_THROWS_AS(nmi(Labels{0, 1}, Labels{0}), InvalidArgument);
    CHECK_THROWS_AS(ari(Labels{0, 1}, Labels{0}), InvalidArgument);
    CHECK_THROWS_AS(acc(Labels{0, 1}, Labels{0}), InvalidArgument);
}

TEST_CASE("metrics: agree with definition oracles on random labelings") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 5 + static_cast<std::size_t>(trial % 40);
        const Labels a = random_labels(n, 1 + trial % 5, rng);
        const Labels b = random_labels(n, 1 + (trial / 5) % 6, rng);

        const double ha = entropy(a), hb = entropy(b);
        if (ha > 0 && hb > 0) {
            CHECK(nmi(a, b) == doctest::Approx(std::min(1.0, mutual_information(a, b) / std::sqrt(ha * hb))).epsilon(1e-9));
        }
        const double r = ari(a, b);
        const double expected_ari = oracle_ari(a, b);
        if (std::isfinite(expected_ari)) CHECK(r == doctest::Approx(expected_ari).epsilon(1e-9));
        CHECK(acc(a, b) == doctest::Approx(oracle_acc(a, b)).epsilon(1e-12));

        CHECK((nmi(a, b) >= 0.0 && nmi(a, b) <= 1.0));
        CHECK((r >= -1.0 && r <= 1.0));
        CHECK((acc(a, b) >= 0.0 && acc(a, b) <= 1.0));
    }
}

TEST_CASE("metrics: invariant to relabeling the prediction") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 50; ++trial) {
        const Labels a = random_labels(30, 4, rng);
        const Labels b = random_labels(30, 3, rng);
        std::vector<int> rename{7, 2, 9, 4};
        std::shuffle(rename.begin(), rename.end(), rng);
        Labels renamed(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) renamed[i] = rename[static_cast<std::size_t>(a[i])];
        CHECK(nmi(renamed, b) == doctest::Approx(nmi(a, b)).epsilon(1e-12));
        CHECK(ari(renamed, b) == doctest::Approx(ari(a, b)).epsilon(1e-12));
        CHECK(acc(renamed, b) == doctest::Approx(acc(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("contingency: sums are consistent") {
    const ContingencyTable t = contingency(Labels{4, 4, 1, 1, 1}, Labels{0, 1, 1, 1, 2});
    CHECK(t.counts.rows() == 2);
    CHECK(t.counts.cols() == 3);
    CHECK(t.total == 5.0);
    CHECK(t.row_sums.sum() == 5.0);
    CHECK(t.col_sums.sum() == 5.0);
    CHECK(t.counts(1, 1) == 2.0);
}

TEST_CASE("hungarian: worked examples") {
    Matrix c = Matrix::Ones(4, 4);
    c.diagonal().setZero();
    const Assignment id = hungarian(c);
    CHECK(id.cost == 0.0);
    CHECK(id.row_to_col == std::vector<int>{0, 1, 2, 3});

    Matrix two(2, 2);
    two << 4, 1, 2, 3;
    const Assignment a = hungarian(two);
    CHECK(a.row_to_col == std::vector<int>{1, 0});
    CHECK(a.cost == doctest::Approx(3.0));

    CHECK_THROWS_AS(hungarian(Matrix::Zero(2, 3)), InvalidArgument);
}

TEST_CASE("hungarian: matches brute force on 200 random matrices up to 7x7") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(-5.0, 10.0);
    std::uniform_int_distribution<int> small(0, 3);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 7;
        Matrix c(n, n);
        // Integer costs on every other matrix to exercise ties.
        for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = trial % 2 ? u(rng) : small(rng);
        const Assignment a = hungarian(c);
        double cost = 0.0;
        std::vector<int> cols = a.row_to_col;
        for (int r = 0; r < n; ++r) cost += c(r, a.row_to_col[static_cast<std::size_t>(r)]);
        std::sort(cols.begin(), cols.end());
        for (int r = 0; r < n; ++r) CHECK(cols[static_cast<std::size_t>(r)] == r);
        CHECK(cost == doctest::Approx(a.cost).epsilon(1e-12));
        CHECK(a.cost == doctest::Approx(brute_min_cost(c)).epsilon(1e-12));
    }
}

} // TEST_SUITE
