#pragma once

#include "gpdmm/types.hpp"

namespace gpdmm {

/// A same-set covariance matrix together with the jitter that was needed to
/// factor it. `values` excludes the jitter; factorizations add it back.
struct GramMatrix {
    Matrix values;
    double jitter_applied = 0.0;
};

/// Cholesky factorization of a symmetric positive-definite matrix, obtained
/// with escalating jitter: 1e-8 * mean(diag) growing tenfold per retry up to
/// 1e-2 * mean(diag). Throws NumericError when even the largest jitter fails,
/// reporting the final jitter tried.
class PsdCholesky {
public:
    explicit PsdCholesky(const Matrix& K);

    double jitter() const { return jitter_; }
    double log_det() const;
    Matrix solve(const Matrix& B) const;
    Vector solve(const Vector& b) const;
    Index dim() const { return llt_.matrixLLT().rows(); }
    const Eigen::LLT<Matrix>& llt() const { return llt_; }

private:
    Eigen::LLT<Matrix> llt_;
    double jitter_ = 0.0;
};

/// Solve K X = B for symmetric positive-definite K (with jitter escalation).
Matrix psd_solve(const Matrix& K, const Matrix& B);

/// log |K| via the Cholesky diagonal.
double log_det_psd(const Matrix& K);

/// Factor a kernel gram, recording the jitter that was applied.
GramMatrix make_gram(Matrix K);

} // namespace gpdmm
