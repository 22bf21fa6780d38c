#include "gpdmm/kernel.hpp"

#include <cmath>

namespace gpdmm {

std::string to_string(KernelKind kind) {
    switch (kind) {
    case KernelKind::rbf: return "rbf";
    case KernelKind::linear: return "linear";
    case KernelKind::rbf_plus_linear: return "rbf_plus_linear";
    case KernelKind::bias: return "bias";
    case KernelKind::white: return "white";
    }
    throw ValueError("unknown kernel kind");
}

KernelKind kernel_kind_from_string(const std::string& name) {
    if (name == "rbf") return KernelKind::rbf;
    if (name == "linear") return KernelKind::linear;
    if (name == "rbf_plus_linear") return KernelKind::rbf_plus_linear;
    if (name == "bias") return KernelKind::bias;
    if (name == "white") return KernelKind::white;
    throw ValueError("unknown kernel kind: " + name);
}

void KernelSpec::validate() const {
    const bool uses_rbf = kind == KernelKind::rbf || kind == KernelKind::rbf_plus_linear;
    const bool uses_linear = kind == KernelKind::linear || kind == KernelKind::rbf_plus_linear;
    if ((uses_rbf || kind == KernelKind::bias) && !(variance > 0.0 && std::isfinite(variance)))
        throw ValueError("kernel variance must be positive");
    if (uses_rbf && !(lengthscale > 0.0 && std::isfinite(lengthscale)))
        throw ValueError("kernel lengthscale must be positive");
    if (uses_linear && !(linear_variance > 0.0 && std::isfinite(linear_variance)))
        throw ValueError("kernel linear_variance must be positive");
    if (kind == KernelKind::white && !(noise >= 0.0 && std::isfinite(noise)))
        throw ValueError("kernel noise must be nonnegative");
}

void Kernel::validate() const {
    if (parts.empty())
        throw ValueError("kernel has no components");
    for (const auto& p : parts)
        p.validate();
}

double Kernel::noise() const {
    double total = 0.0;
    for (const auto& p : parts)
        if (p.kind == KernelKind::white)
            total += p.noise;
    return total;
}

Kernel Kernel::emission_default(double rbf_variance, double lengthscale,
                                double bias_variance, double noise) {
    Kernel k;
    k.parts.push_back({KernelKind::rbf, rbf_variance, lengthscale, 1.0, 0.0});
    k.parts.push_back({KernelKind::bias, bias_variance, 1.0, 1.0, 0.0});
    k.parts.push_back({KernelKind::white, 1.0, 1.0, 1.0, noise});
    return k;
}

Kernel Kernel::dynamics_default(double rbf_variance, double lengthscale,
                                double linear_variance, double noise) {
    Kernel k;
    k.parts.push_back({KernelKind::rbf_plus_linear, rbf_variance, lengthscale, linear_variance, 0.0});
    k.parts.push_back({KernelKind::white, 1.0, 1.0, 1.0, noise});
    return k;
}

int param_count(const KernelSpec& spec) {
    switch (spec.kind) {
    case KernelKind::rbf: return 2;
    case KernelKind::linear: return 1;
    case KernelKind::rbf_plus_linear: return 3;
    case KernelKind::bias: return 1;
    case KernelKind::white: return 1;
    }
    return 0;
}

int param_count(const Kernel& kernel) {
    int n = 0;
    for (const auto& p : kernel.parts)
        n += param_count(p);
    return n;
}

Vector get_params(const Kernel& kernel) {
    Vector out(param_count(kernel));
    int i = 0;
    for (const auto& p : kernel.parts) {
        switch (p.kind) {
        case KernelKind::rbf:
            out[i++] = p.variance;
            out[i++] = p.lengthscale;
            break;
        case KernelKind::linear:
            out[i++] = p.linear_variance;
            break;
        case KernelKind::rbf_plus_linear:
            out[i++] = p.variance;
            out[i++] = p.lengthscale;
            out[i++] = p.linear_variance;
            break;
        case KernelKind::bias:
            out[i++] = p.variance;
            break;
        case KernelKind::white:
            out[i++] = p.noise;
            break;
        }
    }
    return out;
}

void set_params(Kernel& kernel, const Vector& values) {
    if (values.size() != param_count(kernel))
        throw ShapeError("kernel parameter vector has wrong length");
    int i = 0;
    for (auto& p : kernel.parts) {
        switch (p.kind) {
        case KernelKind::rbf:
            p.variance = values[i++];
            p.lengthscale = values[i++];
            break;
        case KernelKind::linear:
            p.linear_variance = values[i++];
            break;
        case KernelKind::rbf_plus_linear:
            p.variance = values[i++];
            p.lengthscale = values[i++];
            p.linear_variance = values[i++];
            break;
        case KernelKind::bias:
            p.variance = values[i++];
            break;
        case KernelKind::white:
            p.noise = values[i++];
            break;
        }
    }
}

std::vector<std::string> param_names(const Kernel& kernel) {
    std::vector<std::string> names;
    int ci = 0;
    for (const auto& p : kernel.parts) {
        const std::string prefix = to_string(p.kind) + "[" + std::to_string(ci++) + "].";
        switch (p.kind) {
        case KernelKind::rbf:
            names.push_back(prefix + "variance");
            names.push_back(prefix + "lengthscale");
            break;
        case KernelKind::linear:
            names.push_back(prefix + "linear_variance");
            break;
        case KernelKind::rbf_plus_linear:
            names.push_back(prefix + "variance");
            names.push_back(prefix + "lengthscale");
            names.push_back(prefix + "linear_variance");
            break;
        case KernelKind::bias:
            names.push_back(prefix + "variance");
            break;
        case KernelKind::white:
            names.push_back(prefix + "noise");
            break;
        }
    }
    return names;
}

namespace {

void check_inputs(const Matrix& A, const Matrix& B) {
    if (A.cols() != B.cols())
        throw ShapeError("kernel inputs have mismatched column counts");
    require_finite(A, "kernel input A");
    require_finite(B, "kernel input B");
}

} // namespace

Matrix pairwise_sqdist(const Matrix& A, const Matrix& B) {
    // Entrywise so that K(A,B) and K(B,A)^T agree bit for bit.
    Matrix d2(A.rows(), B.rows());
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < B.rows(); ++j)
            d2(i, j) = (A.row(i) - B.row(j)).squaredNorm();
    return d2;
}

Matrix kernel_eval(const KernelSpec& spec, const Matrix& A, const Matrix& B) {
    spec.validate();
    check_inputs(A, B);
    switch (spec.kind) {
    case KernelKind::rbf: {
        const double inv2l2 = 1.0 / (2.0 * spec.lengthscale * spec.lengthscale);
        return spec.variance * (-pairwise_sqdist(A, B) * inv2l2).array().exp();
    }
    case KernelKind::linear:
        return spec.linear_variance * (A * B.transpose());
    case KernelKind::rbf_plus_linear: {
        const double inv2l2 = 1.0 / (2.0 * spec.lengthscale * spec.lengthscale);
        Matrix k = spec.variance * (-pairwise_sqdist(A, B) * inv2l2).array().exp();
        k.noalias() += spec.linear_variance * (A * B.transpose());
        return k;
    }
    case KernelKind::bias:
        return Matrix::Constant(A.rows(), B.rows(), spec.variance);
    case KernelKind::white:
        return Matrix::Zero(A.rows(), B.rows());
    }
    throw ValueError("unknown kernel kind");
}

Matrix kernel_eval(const Kernel& kernel, const Matrix& A, const Matrix& B) {
    kernel.validate();
    Matrix k = Matrix::Zero(A.rows(), B.rows());
    for (const auto& p : kernel.parts)
        k += kernel_eval(p, A, B);
    return k;
}

Matrix kernel_gram(const KernelSpec& spec, const Matrix& X) {
    Matrix k = kernel_eval(spec, X, X);
    if (spec.kind == KernelKind::white)
        k.diagonal().array() += spec.noise;
    return k;
}

Matrix kernel_gram(const Kernel& kernel, const Matrix& X) {
    Matrix k = kernel_eval(kernel, X, X);
    k.diagonal().array() += kernel.noise();
    return k;
}

Vector kernel_diag(const Kernel& kernel, const Matrix& A, bool include_noise) {
    Vector d = Vector::Zero(A.rows());
    for (const auto& p : kernel.parts) {
        switch (p.kind) {
        case KernelKind::rbf:
            d.array() += p.variance;
            break;
        case KernelKind::linear:
            d += p.linear_variance * A.rowwise().squaredNorm();
            break;
        case KernelKind::rbf_plus_linear:
            d.array() += p.variance;
            d += p.linear_variance * A.rowwise().squaredNorm();
            break;
        case KernelKind::bias:
            d.array() += p.variance;
            break;
        case KernelKind::white:
            if (include_noise)
                d.array() += p.noise;
            break;
        }
    }
    return d;
}

std::vector<Matrix> kernel_grad_params(const KernelSpec& spec, const Matrix& A,
                                       const Matrix& B, bool same_set) {
    spec.validate();
    check_inputs(A, B);
    std::vector<Matrix> grads;
    switch (spec.kind) {
    case KernelKind::rbf: {
        const double l2 = spec.lengthscale * spec.lengthscale;
        Matrix d2 = pairwise_sqdist(A, B);
        Matrix k = spec.variance * (-d2 / (2.0 * l2)).array().exp();
        grads.push_back(k / spec.variance);
        grads.push_back(k.cwiseProduct(d2) / (l2 * spec.lengthscale));
        break;
    }
    case KernelKind::linear:
        grads.push_back(A * B.transpose());
        break;
    case KernelKind::rbf_plus_linear: {
        const double l2 = spec.lengthscale * spec.lengthscale;
        Matrix d2 = pairwise_sqdist(A, B);
        Matrix k = spec.variance * (-d2 / (2.0 * l2)).array().exp();
        grads.push_back(k / spec.variance);
        grads.push_back(k.cwiseProduct(d2) / (l2 * spec.lengthscale));
        grads.push_back(A * B.transpose());
        break;
    }
    case KernelKind::bias:
        grads.push_back(Matrix::Ones(A.rows(), B.rows()));
        break;
    case KernelKind::white: {
        Matrix g = Matrix::Zero(A.rows(), B.rows());
        if (same_set)
            g.diagonal().setOnes();
        grads.push_back(g);
        break;
    }
    }
    return grads;
}

std::vector<Matrix> kernel_grad_params(const Kernel& kernel, const Matrix& A,
                                       const Matrix& B, bool same_set) {
    std::vector<Matrix> grads;
    for (const auto& p : kernel.parts) {
        auto g = kernel_grad_params(p, A, B, same_set);
        grads.insert(grads.end(), std::make_move_iterator(g.begin()),
                     std::make_move_iterator(g.end()));
    }
    return grads;
}

Vector kernel_param_grad(const Kernel& kernel, const Matrix& A, const Matrix& B,
                         const Matrix& W, bool same_set) {
    if (W.rows() != A.rows() || W.cols() != B.rows())
        throw ShapeError("weight matrix shape does not match kernel output");
    Vector out(param_count(kernel));
    int i = 0;
    for (const auto& p : kernel.parts) {
        switch (p.kind) {
        case KernelKind::rbf: {
            const double l2 = p.lengthscale * p.lengthscale;
            Matrix d2 = pairwise_sqdist(A, B);
            Matrix k = p.variance * (-d2 / (2.0 * l2)).array().exp();
            out[i++] = W.cwiseProduct(k).sum() / p.variance;
            out[i++] = W.cwiseProduct(k.cwiseProduct(d2)).sum() / (l2 * p.lengthscale);
            break;
        }
        case KernelKind::linear:
            out[i++] = W.cwiseProduct(A * B.transpose()).sum();
            break;
        case KernelKind::rbf_plus_linear: {
            const double l2 = p.lengthscale * p.lengthscale;
            Matrix d2 = pairwise_sqdist(A, B);
            Matrix k = p.variance * (-d2 / (2.0 * l2)).array().exp();
            out[i++] = W.cwiseProduct(k).sum() / p.variance;
            out[i++] = W.cwiseProduct(k.cwiseProduct(d2)).sum() / (l2 * p.lengthscale);
            out[i++] = W.cwiseProduct(A * B.transpose()).sum();
            break;
        }
        case KernelKind::bias:
            out[i++] = W.sum();
            break;
        case KernelKind::white:
            out[i++] = same_set ? W.trace() : 0.0;
            break;
        }
    }
    return out;
}

Matrix kernel_input_grad_same(const Kernel& kernel, const Matrix& X, const Matrix& W) {
    if (W.rows() != X.rows() || W.cols() != X.rows())
        throw ShapeError("weight matrix must be square of the point count");
    Matrix grad = Matrix::Zero(X.rows(), X.cols());
    const Matrix Wsym = W + W.transpose();
    for (const auto& p : kernel.parts) {
        switch (p.kind) {
        case KernelKind::rbf:
        case KernelKind::rbf_plus_linear: {
            const double l2 = p.lengthscale * p.lengthscale;
            Matrix k = p.variance * (-pairwise_sqdist(X, X) / (2.0 * l2)).array().exp();
            Matrix s = Wsym.cwiseProduct(k);
            // d/dx_i of sum_ab W_ab k(x_a, x_b): rbf pulls x_i toward weighted peers
            grad.noalias() += (s * X - s.rowwise().sum().asDiagonal() * X) / l2;
            if (p.kind == KernelKind::rbf_plus_linear)
                grad.noalias() += p.linear_variance * (Wsym * X);
            break;
        }
        case KernelKind::linear:
            grad.noalias() += p.linear_variance * (Wsym * X);
            break;
        case KernelKind::bias:
        case KernelKind::white:
            break;
        }
    }
    return grad;
}

Matrix kernel_input_grad_cross(const Kernel& kernel, const Matrix& A, const Matrix& B,
                               const Matrix& W) {
    if (W.rows() != A.rows() || W.cols() != B.rows())
        throw ShapeError("weight matrix shape does not match kernel output");
    Matrix grad = Matrix::Zero(A.rows(), A.cols());
    for (const auto& p : kernel.parts) {
        switch (p.kind) {
        case KernelKind::rbf:
        case KernelKind::rbf_plus_linear: {
            const double l2 = p.lengthscale * p.lengthscale;
            Matrix k = p.variance * (-pairwise_sqdist(A, B) / (2.0 * l2)).array().exp();
            Matrix s = W.cwiseProduct(k);
            grad.noalias() += (s * B - s.rowwise().sum().asDiagonal() * A) / l2;
            if (p.kind == KernelKind::rbf_plus_linear)
                grad.noalias() += p.linear_variance * (W * B);
            break;
        }
        case KernelKind::linear:
            grad.noalias() += p.linear_variance * (W * B);
            break;
        case KernelKind::bias:
        case KernelKind::white:
            break;
        }
    }
    return grad;
}

} // namespace gpdmm
