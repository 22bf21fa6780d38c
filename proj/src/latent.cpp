#include "gpdmm/latent.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numbers>

namespace gpdmm {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

void LatentConfig::validate() const {
    if (fourier_order < 0)
        throw ValueError("fourier_order must be nonnegative");
    if (reduction_dims < 0)
        throw ValueError("reduction_dims must be nonnegative");
    if (q() < 1)
        throw ValueError("latent configuration yields an empty latent space");
    if (markov_order != 1 && markov_order != 2)
        throw ValueError("markov_order must be 1 or 2");
}

Vector progression(const Matrix& values, double epsilon) {
    const Index n = values.rows();
    if (n < 2)
        throw ValueError("progression needs at least 2 time steps");
    require_finite(values, "progression input");

    Vector speed(n - 1);
    for (Index i = 0; i + 1 < n; ++i)
        speed[i] = (values.row(i + 1) - values.row(i)).norm();

    double eps = epsilon;
    if (!(eps > 0.0)) {
        eps = 1e-3 * speed.mean();
        if (!(eps > 0.0))
            eps = 1e-12; // fully static sequence: uniform increments
    }

    Vector increments = (speed.array() + eps).inverse();
    increments *= two_pi / increments.sum();

    Vector theta(n);
    theta[0] = 0.0;
    for (Index i = 1; i < n; ++i)
        theta[i] = theta[i - 1] + increments[i - 1];
    theta[n - 1] = two_pi; // pin the endpoint against rounding drift
    return theta;
}

Vector progression(const Sequence& sequence, double epsilon) {
    return progression(sequence.values, epsilon);
}

Matrix fourier_features(const Vector& theta, int m, bool include_constant) {
    if (m < 1)
        throw ValueError("fourier order must be at least 1");
    const Index n = theta.size();
    const int cols = 2 * m + (include_constant ? 1 : 0);
    Matrix out(n, cols);
    int col = 0;
    if (include_constant) {
        out.col(col++).setOnes();
    }
    for (int k = 2; k <= m + 1; ++k) {
        const double freq = static_cast<double>(k) * std::numbers::pi;
        out.col(col++) = (freq * theta.array()).cos();
        out.col(col++) = (freq * theta.array()).sin();
    }
    return out;
}

Matrix pca_features(const Matrix& Y, int r) {
    if (r < 1)
        throw ValueError("reduction dimension must be at least 1");
    const Index n = Y.rows(), d = Y.cols();
    if (r > std::min(n, d))
        throw ValueError("reduction dimension exceeds min(rows, cols)");
    require_finite(Y, "pca input");

    const RowVector mean = Y.colwise().mean();
    Matrix centered = Y.rowwise() - mean;
    Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);

    Matrix scores = svd.matrixU().leftCols(r) * svd.singularValues().head(r).asDiagonal();
    const Matrix loadings = svd.matrixV().leftCols(r);
    for (int j = 0; j < r; ++j) {
        Index imax = 0;
        loadings.col(j).cwiseAbs().maxCoeff(&imax);
        if (loadings(imax, j) < 0.0)
            scores.col(j) = -scores.col(j);
    }
    return scores;
}

LatentInit build_latent_init(const Dataset& dataset, const LatentConfig& config) {
    dataset.validate();
    config.validate();

    const int n = dataset.length;
    const int count = static_cast<int>(dataset.sequences.size());
    const Index total = static_cast<Index>(count) * n;

    LatentInit init;
    if (config.fourier_order >= 1) {
        init.X_G.resize(total, config.fourier_dims());
        for (int s = 0; s < count; ++s) {
            const Vector theta = progression(dataset.sequences[s].values);
            init.X_G.middleRows(static_cast<Index>(s) * n, n) =
                fourier_features(theta, config.fourier_order, config.include_constant);
        }
    } else {
        init.X_G.resize(total, 0);
    }

    if (config.reduction_dims >= 1) {
        Matrix stacked(total, dataset.feature_dim);
        for (int s = 0; s < count; ++s)
            stacked.middleRows(static_cast<Index>(s) * n, n) = dataset.sequences[s].values;
        init.X_R = pca_features(stacked, config.reduction_dims);
    } else {
        init.X_R.resize(total, 0);
    }

    init.X.resize(total, init.X_G.cols() + init.X_R.cols());
    init.X << init.X_G, init.X_R;
    return init;
}

} // namespace gpdmm
