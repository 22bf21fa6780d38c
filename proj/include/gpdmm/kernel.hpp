#pragma once

#include "gpdmm/types.hpp"

#include <string>
#include <vector>

namespace gpdmm {

enum class KernelKind { rbf, linear, rbf_plus_linear, bias, white };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

/// One additive kernel component. Which fields are live depends on `kind`:
///   rbf              variance, lengthscale
///   linear           linear_variance
///   rbf_plus_linear  variance, lengthscale, linear_variance
///   bias             variance
///   white            noise (same-set diagonal only)
struct KernelSpec {
    KernelKind kind = KernelKind::rbf;
    double variance = 1.0;
    double lengthscale = 1.0;
    double linear_variance = 1.0;
    double noise = 0.0;

    void validate() const;
};

/// A kernel is a sum of components. Composites used by the model:
/// emission = rbf + bias + white, dynamics = rbf_plus_linear + white.
struct Kernel {
    std::vector<KernelSpec> parts;

    Kernel() = default;
    explicit Kernel(KernelSpec part) : parts{part} {}
    Kernel(std::initializer_list<KernelSpec> p) : parts(p) {}

    void validate() const;
    /// Total white-noise diagonal contributed by the sum.
    double noise() const;

    static Kernel emission_default(double rbf_variance, double lengthscale,
                                   double bias_variance, double noise);
    static Kernel dynamics_default(double rbf_variance, double lengthscale,
                                   double linear_variance, double noise);
};

// Free (positive) hyperparameters of each component, in declaration order:
// rbf [variance, lengthscale]; linear [linear_variance];
// rbf_plus_linear [variance, lengthscale, linear_variance];
// bias [variance]; white [noise].
int param_count(const KernelSpec& spec);
int param_count(const Kernel& kernel);
Vector get_params(const Kernel& kernel);
void set_params(Kernel& kernel, const Vector& values);
std::vector<std::string> param_names(const Kernel& kernel);

/// Entrywise squared Euclidean distances between rows of A and rows of B.
Matrix pairwise_sqdist(const Matrix& A, const Matrix& B);

/// Cross-covariance between two point sets. White components contribute
/// nothing here; their diagonal enters only through kernel_gram.
Matrix kernel_eval(const KernelSpec& spec, const Matrix& A, const Matrix& B);
Matrix kernel_eval(const Kernel& kernel, const Matrix& A, const Matrix& B);

/// Same-set covariance: kernel_eval(X, X) plus the white diagonal.
Matrix kernel_gram(const KernelSpec& spec, const Matrix& X);
Matrix kernel_gram(const Kernel& kernel, const Matrix& X);

/// diag of k(x, x) over the rows of A; white noise included on request.
Vector kernel_diag(const Kernel& kernel, const Matrix& A, bool include_noise = false);

/// dK(A,B)/dtheta_p for every free hyperparameter, kernel_eval semantics
/// unless same_set (then the white component differentiates to I).
std::vector<Matrix> kernel_grad_params(const KernelSpec& spec, const Matrix& A,
                                       const Matrix& B, bool same_set = false);
std::vector<Matrix> kernel_grad_params(const Kernel& kernel, const Matrix& A,
                                       const Matrix& B, bool same_set = false);

// Adjoint forms: gradients of <W, K> = sum_ij W_ij K_ij. These are what the
// likelihood objectives consume; entry gradients follow with W = e_i e_j^T.
Vector kernel_param_grad(const Kernel& kernel, const Matrix& A, const Matrix& B,
                         const Matrix& W, bool same_set);
/// d<W, K(X,X)>/dX with both kernel arguments varying.
Matrix kernel_input_grad_same(const Kernel& kernel, const Matrix& X, const Matrix& W);
/// d<W, K(A,B)>/dA with B held fixed.
Matrix kernel_input_grad_cross(const Kernel& kernel, const Matrix& A, const Matrix& B,
                               const Matrix& W);

} // namespace gpdmm
