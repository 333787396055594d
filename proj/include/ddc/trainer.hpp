#pragma once

#include "ddc/data.hpp"
#include "ddc/linalg.hpp"
#include "ddc/network.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ddc {

struct TrainConfig {
    int batch_size = 1000;
    double learning_rate = 1e-3;
    double rmsprop_decay = 0.9;
    double rmsprop_epsilon = 1e-8;
    double epsilon_threshold = 0.05; // on the per-pair (ε / m²) constraint error
    int max_epochs = 200;
    int indicator_dim = 10;
    std::uint64_t seed = 0;
    std::vector<int> hidden = {256, 64};
    double positive_weight = 1.0;
    double output_init_scale = 0.01; // multiplies the He draws of the last layer
#ifdef NDEBUG
    bool check_relations = false;
#else
    bool check_relations = true; // validate every estimated R as an equivalence relation
#endif
};

/// Throws InvalidArgument when a field is out of range.
void validate(const TrainConfig& config);

/// Independent random streams derived from the user seed. Epoch and batch
/// seeds are derived from `shuffle` and `spectral` in turn.
struct RunSeeds {
    std::uint64_t init = 0;
    std::uint64_t shuffle = 0;
    std::uint64_t spectral = 0;
};

RunSeeds run_seeds(std::uint64_t seed);

struct EpochStats {
    int epoch = 0;
    double epsilon = 0.0; // mean over batches of ε / m²
    double loss = 0.0;    // mean over batches of E / m²
    double seconds = 0.0;
};

struct ClusteringResult {
    Labels labels;
    Matrix indicators; // n x k
    std::vector<EpochStats> history;
    double final_epsilon = 0.0;
    bool converged = false;
    int nonempty_clusters = 0;
    std::size_t relations_checked = 0;
    NetworkParams params;
    std::vector<std::string> warnings;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Alternates, per mini-batch, between estimating R from the current
/// indicators (spectral clustering of R̄) and one RMSProp step on the
/// pairwise cross-entropy. Stops once the epoch-mean ε / m² drops below
/// `epsilon_threshold` or after `max_epochs`, then labels every pattern.
///
/// Throws TrainingDivergence on a non-finite loss or gradient; running out of
/// epochs is reported through `converged`, not thrown.
ClusteringResult train(const Dataset& dataset, const TrainConfig& config, const EpochCallback& on_epoch = {});

/// argmax per row, ties to the smallest index.
Labels argmax_labels(const Matrix& indicators);

Labels assign_labels(const NetworkParams& params, const Matrix& features);

int count_nonempty(const Labels& labels);

struct SweepEntry {
    int k = 0;
    double final_epsilon = 0.0;
    bool converged = false;
    int nonempty_clusters = 0;
    std::vector<EpochStats> history;
    Labels labels;
    std::optional<std::string> error;
};

struct SweepResult {
    int best_k = 0; // 0 when every candidate failed
    std::vector<SweepEntry> entries;
};

using SweepCallback = std::function<void(const SweepEntry&, const ClusteringResult*)>;

/// Trains one model per candidate indicator dimension with identical seeds
/// and picks the candidate with the smallest final ε / m². A failing
/// candidate is recorded and the sweep moves on.
SweepResult estimate_cluster_count(const Dataset& dataset, const std::vector<int>& candidate_ks,
                                   const TrainConfig& config, const SweepCallback& on_candidate = {});

/// Fraction of unordered pattern pairs whose indicator dot product is
/// > 0.99 or < 0.01.
double near_binary_pair_fraction(const Matrix& indicators);

} // namespace ddc
