#include "ddc/trainer.hpp"

#include "ddc/errors.hpp"
#include "ddc/loss.hpp"
#include "ddc/relation.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace ddc {

RunSeeds run_seeds(std::uint64_t seed) {
    return {derive_seed(seed, 1), derive_seed(seed, 2), derive_seed(seed, 3)};
}

void validate(const TrainConfig& config) {
    if (config.batch_size < 2) throw InvalidArgument("batch size must be >= 2");
    if (!(config.learning_rate > 0.0)) throw InvalidArgument("learning rate must be > 0");
    if (!(config.rmsprop_decay >= 0.0 && config.rmsprop_decay < 1.0)) {
        throw InvalidArgument("rmsprop decay must be in [0, 1)");
    }
    if (!(config.rmsprop_epsilon > 0.0)) throw InvalidArgument("rmsprop epsilon must be > 0");
    if (!(config.epsilon_threshold > 0.0 && config.epsilon_threshold < 1.0)) {
        throw InvalidArgument("epsilon threshold must be in (0, 1)");
    }
    if (config.max_epochs < 1) throw InvalidArgument("max epochs must be >= 1");
    if (config.indicator_dim < 2) throw InvalidArgument("indicator dimension k must be >= 2");
    for (int width : config.hidden) {
        if (width < 1) throw InvalidArgument("hidden layer widths must be >= 1");
    }
    if (!(config.positive_weight > 0.0)) throw InvalidArgument("positive pair weight must be > 0");
    if (!(config.output_init_scale > 0.0)) throw InvalidArgument("output init scale must be > 0");
}

Labels argmax_labels(const Matrix& indicators) {
    Labels labels(static_cast<std::size_t>(indicators.rows()));
    for (Eigen::Index i = 0; i < indicators.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index h = 1; h < indicators.cols(); ++h) {
            if (indicators(i, h) > indicators(i, best)) best = h;
        }
        labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return labels;
}

Labels assign_labels(const NetworkParams& params, const Matrix& features) {
    return argmax_labels(predict(params, features));
}

int count_nonempty(const Labels& labels) {
    return static_cast<int>(std::set<int>(labels.begin(), labels.end()).size());
}

ClusteringResult train(const Dataset& dataset, const TrainConfig& config, const EpochCallback& on_epoch) {
    validate(config);
    const std::size_t n = dataset.size();
    if (n == 0) throw InvalidArgument("train: empty dataset");
    if (!dataset.features.allFinite()) throw InvalidArgument("train: non-finite feature");

    const int k = config.indicator_dim;
    const std::size_t m = std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), n);
    if (m < static_cast<std::size_t>(k)) {
        throw InvalidArgument("train: effective batch size " + std::to_string(m) + " is smaller than k=" +
                              std::to_string(k));
    }

    ClusteringResult result;
    if (m < 2 * static_cast<std::size_t>(k)) {
        result.warnings.push_back("batch size " + std::to_string(m) + " is below 2k=" + std::to_string(2 * k));
    }

    const RunSeeds seeds = run_seeds(config.seed);
    result.params = init_network(mlp_specs(dataset.dim(), config.hidden, k), k, seeds.init, config.output_init_scale);
    const RmsPropOptions optimizer{config.learning_rate, config.rmsprop_decay, config.rmsprop_epsilon};

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        const auto batches = batch_iter(n, m, derive_seed(seeds.shuffle, static_cast<std::uint64_t>(epoch)));
        const std::uint64_t spectral_seed = derive_seed(seeds.spectral, static_cast<std::uint64_t>(epoch));

        double epsilon_sum = 0.0;
        double loss_sum = 0.0;
        for (std::size_t b = 0; b < batches.size(); ++b) {
            const Matrix x = gather_rows(dataset.features, batches[b]);
            const ForwardResult fwd = forward(result.params, x);
            if (!fwd.indicators.allFinite()) {
                throw TrainingDivergence("non-finite indicators in epoch " + std::to_string(epoch),
                                         static_cast<std::size_t>(epoch));
            }
            const Matrix rbar = coarse_similarity(fwd.indicators);
            const RelationMatrix r = estimate_relations_factored(fwd.indicators, k, derive_seed(spectral_seed, b));

            if (config.check_relations) {
                const EquivalenceCheck check = validate_equivalence(r);
                if (!check.valid) {
                    throw std::logic_error("estimated relation is not an equivalence: " +
                                           (check.violation ? check.violation->describe() : std::string("?")));
                }
                ++result.relations_checked;
            }

            epsilon_sum += global_constraint_error(r, rbar).normalized;
            const PairLoss loss = batch_loss_and_grad(fwd.indicators, r, config.positive_weight);
            if (!std::isfinite(loss.report.total_loss)) {
                throw TrainingDivergence("non-finite loss in epoch " + std::to_string(epoch), static_cast<std::size_t>(epoch));
            }
            loss_sum += loss.report.mean_loss;

            const Gradients grads = backward(result.params, fwd.trace, loss.grad);
            try {
                rmsprop_step(result.params, grads, optimizer);
            } catch (const TrainingDivergence& e) {
                throw TrainingDivergence(std::string(e.what()) + " in epoch " + std::to_string(epoch),
                                         static_cast<std::size_t>(epoch));
            }
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.epsilon = epsilon_sum / static_cast<double>(batches.size());
        stats.loss = loss_sum / static_cast<double>(batches.size());
        stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        result.history.push_back(stats);
        if (on_epoch) on_epoch(stats);

        if (stats.epsilon < config.epsilon_threshold) {
            result.converged = true;
            break;
        }
    }

    result.final_epsilon = result.history.back().epsilon;
    result.indicators = predict(result.params, dataset.features);
    result.labels = argmax_labels(result.indicators);
    result.nonempty_clusters = count_nonempty(result.labels);
    return result;
}

SweepResult estimate_cluster_count(const Dataset& dataset, const std::vector<int>& candidate_ks,
                                   const TrainConfig& config, const SweepCallback& on_candidate) {
    if (candidate_ks.size() < 2) throw InvalidArgument("estimate_cluster_count: need at least two candidates");
    for (int k : candidate_ks) {
        if (k < 2) throw InvalidArgument("estimate_cluster_count: candidate k must be >= 2");
    }

    SweepResult sweep;
    double best = std::numeric_limits<double>::infinity();
    for (int k : candidate_ks) {
        TrainConfig run = config;
        run.indicator_dim = k;
        SweepEntry entry;
        entry.k = k;
        try {
            const ClusteringResult result = train(dataset, run);
            entry.final_epsilon = result.final_epsilon;
            entry.converged = result.converged;
            entry.nonempty_clusters = result.nonempty_clusters;
            entry.history = result.history;
            entry.labels = result.labels;
            if (entry.final_epsilon < best) {
                best = entry.final_epsilon;
                sweep.best_k = k;
            }
            if (on_candidate) on_candidate(entry, &result);
        } catch (const std::exception& e) {
            entry.error = e.what();
            if (on_candidate) on_candidate(entry, nullptr);
        }
        sweep.entries.push_back(std::move(entry));
    }
    return sweep;
}

double near_binary_pair_fraction(const Matrix& indicators) {
    const Eigen::Index n = indicators.rows();
    if (n < 2) return 1.0;
    std::size_t hits = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dot = indicators.row(i).dot(indicators.row(j));
            if (dot > 0.99 || dot < 0.01) ++hits;
        }
    }
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    return static_cast<double>(hits) / pairs;
}

} // namespace ddc
