#pragma once

#include "gpdmm/kernel.hpp"
#include "gpdmm/linalg.hpp"
#include "gpdmm/optim.hpp"

#include <optional>

namespace gpdmm {

/// The shared emission GP mapping latent coordinates to observations.
/// Immutable once built; rebuild after changing X or the kernel.
struct EmissionModel {
    Matrix X;           // N x Q latents
    RowVector Y_mean;   // 1 x D per-feature mean (restored at prediction)
    Matrix Y_centered;  // N x D
    Kernel kernel;
    GramMatrix gram;
    Matrix alpha_cache; // K^{-1} Y_centered

    static EmissionModel build(Matrix X, const Matrix& Y, Kernel kernel);
    /// Rebuild from serialized fields without re-centering (round-trip safe).
    static EmissionModel restore(Matrix X, RowVector Y_mean, Matrix Y_centered,
                                 Kernel kernel);

    Index n() const { return X.rows(); }
    Index q() const { return X.cols(); }
    Index d() const { return Y_centered.cols(); }
    const PsdCholesky& factor() const;

private:
    mutable std::optional<PsdCholesky> factor_;
};

/// GPLVM marginal log-likelihood of Y given latents X:
/// -(D/2) log|K| - 1/2 tr(K^{-1} Yc Yc^T) - (N D/2) log(2 pi),
/// with Y mean-centered per feature.
double emission_log_likelihood(const Matrix& X, const Matrix& Y, const Kernel& kernel);

struct EmissionGradients {
    Matrix dX;       // N x Q
    Vector d_hypers; // natural-space kernel hyperparameter gradients
};
EmissionGradients emission_gradients(const Matrix& X, const Matrix& Y, const Kernel& kernel);

struct PredictResult {
    Matrix mean;     // T x D
    Vector variance; // T, latent-function variance clamped at 0
};
PredictResult emission_predict(const EmissionModel& model, const Matrix& X_star);

enum class LatentInitMode { nearest_neighbor, provided };

struct InferLatentResult {
    Matrix X_star;
    bool converged = true;
    double objective = 0.0;
    double objective_init = 0.0;
};

/// Latent projection of unseen observations: maximize the emission predictive
/// density of y_star with the model fixed, by gradient ascent from the
/// initialization. The dynamical prior is deliberately left out so no expert
/// biases the projection used for classification.
InferLatentResult infer_latent(const EmissionModel& model, const Matrix& y_star,
                               LatentInitMode mode = LatentInitMode::nearest_neighbor,
                               const Matrix* init = nullptr,
                               const AscentOptions& options = {});

} // namespace gpdmm
