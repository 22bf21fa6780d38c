#include "gpdmm/linalg.hpp"

#include <cmath>
#include <sstream>

namespace gpdmm {

namespace {

constexpr double kJitterStart = 1e-8;
constexpr double kJitterStop = 1e-2;

} // namespace

PsdCholesky::PsdCholesky(const Matrix& K) {
    if (K.rows() != K.cols())
        throw ShapeError("Cholesky input must be square");
    require_finite(K, "Cholesky input");

    llt_.compute(K);
    if (llt_.info() == Eigen::Success) {
        jitter_ = 0.0;
        return;
    }

    double mean_diag = K.diagonal().mean();
    if (!(mean_diag > 0.0))
        mean_diag = 1.0;
    for (double scale = kJitterStart; scale <= kJitterStop * (1.0 + 1e-12); scale *= 10.0) {
        const double jitter = scale * mean_diag;
        Matrix Kj = K;
        Kj.diagonal().array() += jitter;
        llt_.compute(Kj);
        if (llt_.info() == Eigen::Success) {
            jitter_ = jitter;
            return;
        }
    }
    std::ostringstream msg;
    msg << "matrix is singular: Cholesky failed after jitter up to "
        << kJitterStop * mean_diag;
    throw NumericError(msg.str());
}

double PsdCholesky::log_det() const {
    return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

Matrix PsdCholesky::solve(const Matrix& B) const {
    if (B.rows() != dim())
        throw ShapeError("right-hand side row count does not match matrix dimension");
    return llt_.solve(B);
}

Vector PsdCholesky::solve(const Vector& b) const {
    if (b.size() != dim())
        throw ShapeError("right-hand side length does not match matrix dimension");
    return llt_.solve(b);
}

Matrix psd_solve(const Matrix& K, const Matrix& B) {
    return PsdCholesky(K).solve(B);
}

double log_det_psd(const Matrix& K) {
    return PsdCholesky(K).log_det();
}

GramMatrix make_gram(Matrix K) {
    // Symmetrize away accumulation noise before factoring.
    K = 0.5 * (K + K.transpose()).eval();
    PsdCholesky chol(K);
    return GramMatrix{std::move(K), chol.jitter()};
}

} // namespace gpdmm
