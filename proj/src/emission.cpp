#include "gpdmm/emission.hpp"

#include <cmath>
#include <numbers>

namespace gpdmm {

namespace {

constexpr double log_2pi = 1.8378770664093454836;

RowVector column_means(const Matrix& Y) {
    return Y.colwise().mean();
}

/// e-weighted gradient of the same-point diagonal k(x,x) w.r.t. the rows of A.
/// Only linear terms contribute; rbf/bias diagonals are constant in x.
Matrix diag_input_grad(const Kernel& kernel, const Matrix& A, const Vector& weights) {
    Matrix grad = Matrix::Zero(A.rows(), A.cols());
    for (const auto& p : kernel.parts) {
        if (p.kind == KernelKind::linear || p.kind == KernelKind::rbf_plus_linear)
            grad += (2.0 * p.linear_variance) * weights.asDiagonal() * A;
    }
    return grad;
}

} // namespace

EmissionModel EmissionModel::build(Matrix X, const Matrix& Y, Kernel kernel) {
    if (X.rows() != Y.rows())
        throw ShapeError("latent and observation row counts differ");
    kernel.validate();
    EmissionModel model;
    model.X = std::move(X);
    model.Y_mean = column_means(Y);
    model.Y_centered = Y.rowwise() - model.Y_mean;
    model.kernel = std::move(kernel);

    Matrix K = kernel_gram(model.kernel, model.X);
    K = 0.5 * (K + K.transpose()).eval();
    model.factor_.emplace(K);
    model.gram = GramMatrix{std::move(K), model.factor_->jitter()};
    model.alpha_cache = model.factor_->solve(model.Y_centered);
    return model;
}

EmissionModel EmissionModel::restore(Matrix X, RowVector Y_mean, Matrix Y_centered,
                                     Kernel kernel) {
    if (X.rows() != Y_centered.rows() || Y_mean.size() != Y_centered.cols())
        throw ShapeError("restored emission fields have inconsistent shapes");
    kernel.validate();
    EmissionModel model;
    model.X = std::move(X);
    model.Y_mean = std::move(Y_mean);
    model.Y_centered = std::move(Y_centered);
    model.kernel = std::move(kernel);

    Matrix K = kernel_gram(model.kernel, model.X);
    K = 0.5 * (K + K.transpose()).eval();
    model.factor_.emplace(K);
    model.gram = GramMatrix{std::move(K), model.factor_->jitter()};
    model.alpha_cache = model.factor_->solve(model.Y_centered);
    return model;
}

const PsdCholesky& EmissionModel::factor() const {
    if (!factor_)
        factor_.emplace(gram.values);
    return *factor_;
}

double emission_log_likelihood(const Matrix& X, const Matrix& Y, const Kernel& kernel) {
    if (X.rows() != Y.rows())
        throw ShapeError("latent and observation row counts differ");
    const auto n = static_cast<double>(X.rows());
    const auto d = static_cast<double>(Y.cols());
    const Matrix Yc = Y.rowwise() - column_means(Y);

    PsdCholesky chol(kernel_gram(kernel, X));
    const double quad = Yc.cwiseProduct(chol.solve(Yc)).sum();
    return -0.5 * d * chol.log_det() - 0.5 * quad - 0.5 * n * d * log_2pi;
}

EmissionGradients emission_gradients(const Matrix& X, const Matrix& Y, const Kernel& kernel) {
    if (X.rows() != Y.rows())
        throw ShapeError("latent and observation row counts differ");
    const auto d = static_cast<double>(Y.cols());
    const Matrix Yc = Y.rowwise() - column_means(Y);

    PsdCholesky chol(kernel_gram(kernel, X));
    const Matrix alpha = chol.solve(Yc);
    const Matrix Kinv = chol.solve(Matrix::Identity(X.rows(), X.rows()));
    const Matrix W = 0.5 * (alpha * alpha.transpose() - d * Kinv);

    EmissionGradients g;
    g.dX = kernel_input_grad_same(kernel, X, W);
    g.d_hypers = kernel_param_grad(kernel, X, X, W, /*same_set=*/true);
    return g;
}

PredictResult emission_predict(const EmissionModel& model, const Matrix& X_star) {
    if (X_star.cols() != model.q())
        throw ShapeError("prediction input has wrong latent dimension");
    PredictResult out;
    if (X_star.rows() == 0) {
        out.mean.resize(0, model.d());
        out.variance.resize(0);
        return out;
    }
    const Matrix k_sx = kernel_eval(model.kernel, X_star, model.X);
    out.mean = k_sx * model.alpha_cache;
    out.mean.rowwise() += model.Y_mean;

    const Matrix v = model.factor().solve(k_sx.transpose()); // N x T
    out.variance = kernel_diag(model.kernel, X_star, /*include_noise=*/false) -
                   k_sx.cwiseProduct(v.transpose()).rowwise().sum();
    out.variance = out.variance.cwiseMax(0.0);
    return out;
}

namespace {

struct ProjectionWork {
    const EmissionModel& model;
    const Matrix& y_star;
    double noise;

    double objective(const Matrix& Xs) const {
        const auto d = static_cast<double>(model.d());
        const Matrix k_sx = kernel_eval(model.kernel, Xs, model.X);
        const Matrix mu = (k_sx * model.alpha_cache).rowwise() + model.Y_mean;
        const Matrix v = model.factor().solve(k_sx.transpose());
        Vector s = kernel_diag(model.kernel, Xs, false) -
                   k_sx.cwiseProduct(v.transpose()).rowwise().sum();
        s = (s.cwiseMax(0.0).array() + noise).matrix();
        const Matrix r = y_star - mu;
        double f = 0.0;
        for (Index t = 0; t < Xs.rows(); ++t)
            f += -0.5 * d * (log_2pi + std::log(s[t])) - 0.5 * r.row(t).squaredNorm() / s[t];
        return f;
    }

    Matrix gradient(const Matrix& Xs) const {
        const auto d = static_cast<double>(model.d());
        const Matrix k_sx = kernel_eval(model.kernel, Xs, model.X);
        const Matrix mu = (k_sx * model.alpha_cache).rowwise() + model.Y_mean;
        const Matrix v = model.factor().solve(k_sx.transpose()); // N x T
        Vector s = kernel_diag(model.kernel, Xs, false) -
                   k_sx.cwiseProduct(v.transpose()).rowwise().sum();
        s = (s.cwiseMax(0.0).array() + noise).matrix();
        const Matrix r = y_star - mu;

        // d f / d mu path: weights c_{t,n} = (r_t . alpha_n) / s_t
        Matrix c = (r * model.alpha_cache.transpose());
        c.array().colwise() /= s.array();
        Matrix grad = kernel_input_grad_cross(model.kernel, Xs, model.X, c);

        // d f / d s path: e_t = -d/(2 s) + |r_t|^2/(2 s^2)
        Vector e = (-0.5 * d * s.cwiseInverse().array() +
                    0.5 * r.rowwise().squaredNorm().array() / s.array().square())
                       .matrix();
        // ds/dx = d k(x,x)/dx - 2 (K^{-1} k_x)^T dk_x/dx
        Matrix c2 = v.transpose(); // T x N
        c2.array().colwise() *= (-2.0 * e.array());
        grad += kernel_input_grad_cross(model.kernel, Xs, model.X, c2);
        grad += diag_input_grad(model.kernel, Xs, e);
        return grad;
    }
};

} // namespace

InferLatentResult infer_latent(const EmissionModel& model, const Matrix& y_star,
                               LatentInitMode mode, const Matrix* init,
                               const AscentOptions& options) {
    if (y_star.cols() != model.d())
        throw ShapeError("observation rows have wrong feature dimension");
    InferLatentResult result;
    if (y_star.rows() == 0) {
        result.X_star.resize(0, model.q());
        return result;
    }

    const Index T = y_star.rows(), Q = model.q();
    Matrix X0(T, Q);
    if (mode == LatentInitMode::provided) {
        if (!init || init->rows() != T || init->cols() != Q)
            throw ShapeError("provided latent initialization has wrong shape");
        X0 = *init;
    } else {
        // Each row starts at the training latent whose observation is closest.
        const Matrix Y_train = model.Y_centered.rowwise() + model.Y_mean;
        for (Index t = 0; t < T; ++t) {
            Index best = 0;
            (Y_train.rowwise() - y_star.row(t)).rowwise().squaredNorm().minCoeff(&best);
            X0.row(t) = model.X.row(best);
        }
    }

    ProjectionWork work{model, y_star, std::max(model.kernel.noise(), 1e-10)};
    const auto unflatten = [T, Q](const Vector& v) {
        return Matrix(Eigen::Map<const Matrix>(v.data(), T, Q));
    };
    const Objective f = [&](const Vector& v) { return work.objective(unflatten(v)); };
    const ObjectiveGradient g = [&](const Vector& v) {
        const Matrix gm = work.gradient(unflatten(v));
        return Vector(Eigen::Map<const Vector>(gm.data(), gm.size()));
    };

    Vector x0 = Eigen::Map<const Vector>(X0.data(), X0.size());
    result.objective_init = f(x0);
    const AscentResult opt = maximize(f, g, std::move(x0), options);
    result.X_star = unflatten(opt.x);
    result.objective = opt.value;
    result.converged = opt.converged;
    return result;
}

} // namespace gpdmm
