#pragma once

#include "gpdmm/data.hpp"
#include "gpdmm/types.hpp"

namespace gpdmm {

/// Latent-space construction parameters.
struct LatentConfig {
    int fourier_order = 2;      // m; 0 disables the Fourier block
    bool include_constant = true;
    int reduction_dims = 2;     // r; 0 disables the PCA block
    int markov_order = 1;       // dynamics order (1 or 2)

    int fourier_dims() const {
        if (fourier_order < 1)
            return 0;
        return 2 * fourier_order + (include_constant ? 1 : 0);
    }
    int q() const { return fourier_dims() + reduction_dims; }
    void validate() const;
};

/// Velocity-weighted progression over a sequence: n entries from 0 to 2*pi,
/// increment i proportional to 1/(||y_{i+1}-y_i|| + epsilon). epsilon <= 0
/// selects the default 1e-3 * mean velocity.
Vector progression(const Matrix& values, double epsilon = 0.0);
Vector progression(const Sequence& sequence, double epsilon = 0.0);

/// Fourier basis features over a progression vector. Columns are
/// [1, cos(2*pi*theta), sin(2*pi*theta), cos(3*pi*theta), sin(3*pi*theta), ...]
/// i.e. m pairs at integer multiples k*pi*theta for k = 2..m+1, preceded by a
/// constant column when enabled. The frequency ladder starting at 2*pi and
/// stepping by pi is the one convention that yields the documented
/// (2m+1)-column layout; change it here if a different ladder is ever wanted.
Matrix fourier_features(const Vector& theta, int m, bool include_constant);

/// Mean-centered principal-component scores on the top-r components, with a
/// deterministic sign convention (largest-magnitude loading made positive).
Matrix pca_features(const Matrix& Y, int r);

struct LatentInit {
    Matrix X_G; // N x fourier_dims
    Matrix X_R; // N x reduction_dims
    Matrix X;   // N x Q, columnwise [X_G, X_R]
};

/// Per-sequence progression + Fourier blocks stacked in dataset order; X_R
/// from PCA on the stacked observations so all classes share one embedding.
LatentInit build_latent_init(const Dataset& dataset, const LatentConfig& config);

} // namespace gpdmm
