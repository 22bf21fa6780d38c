#pragma once

#include "gpdmm/kernel.hpp"
#include "gpdmm/linalg.hpp"

#include <optional>
#include <utility>

namespace gpdmm {

/// FITC sparse approximation state for a dynamics expert: M inducing points
/// in transition-input space plus the factor caches predictions need.
struct FITCState {
    Matrix inducing;     // M x (order * Q)
    // Caches rebuilt from (inducing, kernel, X_in, X_out):
    Matrix kmm;          // M x M prior over inducing points
    Matrix a_mat;        // K_mm + K_mn Lambda^{-1} K_nm
    Matrix mean_weights; // A^{-1} K_mn Lambda^{-1} X_out, M x Q
    Vector lambda;       // per-point FITC diagonal (incl. noise)

    Index m() const { return inducing.rows(); }
};

/// One per-class autoregressive GP over latent states. X_in rows are the
/// concatenation of `order` consecutive latent states, X_out the following
/// state. Trained only on rows belonging to its class.
struct DynamicsModel {
    int class_id = 1; // 1..A
    int order = 1;
    Matrix X_in;  // (n_a - order) x (order * Q)
    Matrix X_out; // (n_a - order) x Q
    Kernel kernel;
    GramMatrix gram;
    Matrix alpha_cache; // K^{-1} X_out
    std::optional<FITCState> sparse;

    static DynamicsModel build(int class_id, int order, Matrix X_in, Matrix X_out,
                               Kernel kernel);
    /// Rebuild gram/alpha (and FITC caches when sparse) after edits.
    void refresh();

    Index q() const { return X_out.cols(); }
    Index transitions() const { return X_in.rows(); }
    const PsdCholesky& factor() const;

private:
    mutable std::optional<PsdCholesky> factor_;
};

/// Split one latent sequence into autoregressive transitions of the given
/// Markov order. Returns {X_in, X_out}.
std::pair<Matrix, Matrix> make_transitions(const Matrix& latent_sequence, int order);

/// GP-regression marginal log-likelihood of X_out given X_in (the
/// training-time dynamical term), per latent dimension with a shared kernel.
double dynamics_log_likelihood(const Matrix& X_in, const Matrix& X_out, const Kernel& kernel);
inline double dynamics_log_likelihood(const DynamicsModel& model, const Matrix& X_in,
                                      const Matrix& X_out) {
    return dynamics_log_likelihood(X_in, X_out, model.kernel);
}

struct DynamicsGradients {
    Matrix dX_in;
    Matrix dX_out;
    Vector d_hypers; // natural space
};
DynamicsGradients dynamics_gradients(const Matrix& X_in, const Matrix& X_out,
                                     const Kernel& kernel);

/// Log-density of a latent prefix under this expert: the prefix transitions
/// scored by the GP posterior conditioned on the training transitions (the
/// joint over training + prefix divided by the training marginal). Includes
/// the log-determinant normalizer so scores compare across experts. Uses the
/// FITC posterior when the model is sparse.
double sequence_score(const DynamicsModel& model, const Matrix& X_star);

/// Predictive mean of the next latent state for each input row (full GP or
/// FITC when sparse).
Matrix dynamics_predict_mean(const DynamicsModel& model, const Matrix& inputs);

/// Iterated mean prediction from a seed window of `order` latent states.
/// Deterministic; returns `steps` rows.
Matrix rollout(const DynamicsModel& model, const Matrix& x_seed, int steps);

struct FitcOptions {
    int opt_iters = 30;
    bool optimize_inducing = true;
    /// Pin inducing points to X_in and skip optimization entirely (requires
    /// M == transition count); used for exactness checks.
    bool pin_to_inputs = false;
    double fd_step_rel = 1e-5;
};

/// FITC marginal log-likelihood of the transitions for a given inducing set.
double fitc_log_likelihood(const Matrix& X_in, const Matrix& X_out, const Kernel& kernel,
                           const Matrix& inducing);

/// Sparsify an expert: inducing points start as a uniform stride subsample of
/// X_in and are optimized jointly with the kernel hyperparameters under the
/// FITC marginal likelihood (finite-difference gradients; the parameter count
/// is small at this scale).
DynamicsModel fitc_fit(const DynamicsModel& model, int m, const FitcOptions& options = {});

} // namespace gpdmm
