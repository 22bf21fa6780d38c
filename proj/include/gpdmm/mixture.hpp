#pragma once

#include "gpdmm/data.hpp"
#include "gpdmm/dynamics.hpp"
#include "gpdmm/emission.hpp"
#include "gpdmm/latent.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gpdmm {

struct ClassificationResult {
    Vector posterior;    // A entries, nonnegative, sum 1
    int predicted = 0;   // index into class_labels (argmax, lowest index on ties)
    Vector log_scores;   // per-expert sequence scores
    bool projection_converged = true;
};

/// One shared emission GP plus one dynamical expert per class, gated by the
/// Bayes posterior over experts.
struct TrainedGPDMM {
    EmissionModel emission;
    std::vector<DynamicsModel> experts;
    Vector priors; // p(a) = n_a / N over training points
    LatentConfig latent_config;
    std::vector<std::string> class_labels;
    double dt = 1.0;
    int sequence_length = 0;          // common training sequence length
    std::vector<int> sequence_class;  // class index per training sequence
    std::vector<Index> sequence_offsets; // row offset of each sequence in emission.X

    int num_classes() const { return static_cast<int>(class_labels.size()); }
    int order() const { return latent_config.markov_order; }
};

struct TrainOptions {
    // Alternation schedule: per round, steps on (X, emission hypers) then on
    // dynamics hypers; a final joint polish afterwards.
    int rounds = 40;
    int steps_per_phase = 50;
    int polish_steps = 100;
    double rel_tol = 1e-7;

    // Kernel initializations.
    double emission_rbf_variance = 1.0;
    double emission_lengthscale = 1.0;
    double emission_bias_variance = 0.1;
    double emission_noise = 1e-2;
    double dynamics_rbf_variance = 1.0;
    double dynamics_lengthscale = 1.0;
    double dynamics_linear_variance = 0.1;
    double dynamics_noise = 1e-2;

    // Optional FITC sparsification of the experts after training.
    std::optional<int> fitc_m;
    FitcOptions fitc;

    std::uint64_t seed = 0; // carried for reproducibility bookkeeping; training
                            // itself is deterministic

    /// Called after each alternation round with the assembled model so far.
    std::function<void(int round, const TrainedGPDMM&)> round_observer;
};

struct TrainLogEntry {
    int round;         // 0-based; polish logged as `rounds`
    std::string phase; // "emission", "dynamics", "polish"
    double objective;  // accepted objective value
};

struct TrainResult {
    TrainedGPDMM model;
    std::vector<TrainLogEntry> log;
    double final_objective = 0.0;
};

/// Joint training: latents from build_latent_init, then alternating gradient
/// ascent on the combined objective (emission log-likelihood plus the sum of
/// per-expert dynamics log-likelihoods) over X and all hyperparameters.
TrainResult train_with_log(const Dataset& dataset, const LatentConfig& config,
                           const TrainOptions& options = {});
TrainedGPDMM train(const Dataset& dataset, const LatentConfig& config,
                   const TrainOptions& options = {});

/// Bayes-posterior classification of an observation prefix (rows x D). The
/// prefix is projected through the emission GP, scored by every expert, and
/// normalized in log space with max-subtraction.
ClassificationResult classify(const TrainedGPDMM& model, const Matrix& y_prefix);

struct GenerateResult {
    Matrix observations; // horizon x D
    Matrix latent;       // horizon x Q
    int expert_used = 0;
    std::optional<ClassificationResult> classification; // absent when hinted
};

/// Class-conditional continuation: seed the chosen expert with the last
/// `order` rows of the inferred prefix latent, roll out `horizon` steps, and
/// map through the emission predictive mean.
GenerateResult generate(const TrainedGPDMM& model, const Matrix& y_prefix,
                        std::optional<int> class_hint, int horizon);

/// floor(fraction * length), clamped to [order + 1, length - 1].
int prefix_length(int sequence_length, double fraction, int markov_order);

} // namespace gpdmm
