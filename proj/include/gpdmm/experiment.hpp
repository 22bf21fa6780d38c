#pragma once

#include "gpdmm/metrics.hpp"
#include "gpdmm/mixture.hpp"
#include "gpdmm/model_io.hpp"

#include <cstdint>
#include <optional>

namespace gpdmm {

struct EvalOptions {
    double prefix_fraction = 0.4;
    /// 0 selects the default: 10% of the remainder length, at least 2.
    int dampening_window = 0;
    /// Eq.-style scoring: only correctly classified sequences enter the
    /// generation metrics. Disable to score every sequence (baselines).
    bool restrict_to_correct = true;
    /// Generate with the expert of the true class instead of the predicted
    /// one (used when evaluating a pooled single-expert baseline).
    bool generate_with_true_class = false;
};

struct SequenceEval {
    int seq_index = 0;
    int truth = 0;     // dataset class index
    int predicted = 0; // dataset class index, -1 when the label is foreign
    int prefix_steps = 0;
    Vector posterior;
    std::optional<double> frechet_norm;
    std::optional<double> damp;
    std::optional<double> ldjr;
};

struct EvalResult {
    MetricsReport report;
    std::vector<SequenceEval> rows;
};

/// Classify the prefix of every test sequence, generate the remainder, and
/// assemble the full metric suite (F1, averaged normalized Frechet,
/// dampening ratio, LDJ ratio, per class and overall).
EvalResult evaluate_split(const TrainedGPDMM& model, const Dataset& dataset,
                          const std::vector<int>& test_indices,
                          const EvalOptions& options);

struct MccvOptions {
    int iterations = 3;
    int n_validation_per_class = 1;
    int n_test_per_class = 1;
    std::uint64_t seed = 0;
    LatentConfig latent;
    TrainOptions train;
    EvalOptions eval;
    int jobs = 1;
};

struct MccvIteration {
    int iteration = 0;
    std::uint64_t split_seed = 0;
    int best_round = -1; // stopping round chosen on validation; -1 = final
    double validation_f1 = 0.0;
    MetricsReport test_report;
};

struct Stat {
    double mean = 0.0;
    double sd = 0.0;
    int count = 0;
};

struct MccvResult {
    std::vector<MccvIteration> iterations;
    Stat validation_f1;
    Stat test_f1;
    Stat frechet;
    Stat dampening;
    Stat ldj;
};

/// The paper's protocol: per iteration draw a fresh split (one train sequence
/// per class), use the validation sequences to pick the stopping round, then
/// evaluate the test sequences; aggregate mean +/- sd across iterations.
MccvResult run_mccv(const Dataset& dataset, const MccvOptions& options);

struct SearchSpace {
    int fourier_order_min = 1;
    int fourier_order_max = 3;
    int reduction_dims_min = 1;
    int reduction_dims_max = 3;
    std::vector<int> markov_orders{1, 2};
    double variance_init_min = 0.5;
    double variance_init_max = 2.0;
    /// FITC inducing fractions to sample from; a candidate may also pick the
    /// full model. Empty disables FITC candidates.
    std::vector<double> fitc_fractions;
};

struct SearchCandidate {
    int index = 0;
    LatentConfig latent;
    double variance_init = 1.0;
    std::optional<int> fitc_m;
    double validation_f1 = 0.0;
    std::optional<double> d_avg;
    MccvResult mccv;
};

struct SearchResult {
    /// Sorted by validation F1 (descending), then D_avg (ascending,
    /// undefined last), then candidate index.
    std::vector<SearchCandidate> leaderboard;
};

/// Seeded random search over (m, r, order, kernel variance init, FITC M),
/// each candidate scored by its mean MCCV validation F1 on shared splits.
SearchResult run_search(const Dataset& dataset, const SearchSpace& space,
                        const MccvOptions& base, int budget);

} // namespace gpdmm
