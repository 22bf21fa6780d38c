#include "gpdmm/dynamics.hpp"

#include "gpdmm/optim.hpp"

#include <cmath>

namespace gpdmm {

namespace {

constexpr double log_2pi = 1.8378770664093454836;
constexpr double lambda_floor = 1e-12;

struct FitcFactors {
    Matrix kmm;          // M x M, symmetrized
    Matrix a_mat;        // K_mm + K_mn Lambda^{-1} K_nm
    Vector lambda;       // n, floored away from zero
    Matrix knm;          // n x M
    PsdCholesky chol_kmm;
    PsdCholesky chol_a;

private:
    FitcFactors(Matrix kmm_, Matrix a_, Vector lambda_, Matrix knm_)
        : kmm(std::move(kmm_)), a_mat(std::move(a_)), lambda(std::move(lambda_)),
          knm(std::move(knm_)), chol_kmm(kmm), chol_a(a_mat) {}

public:
    static FitcFactors make(const Matrix& X_in, const Kernel& kernel, const Matrix& inducing) {
        Matrix kmm = kernel_eval(kernel, inducing, inducing);
        kmm = 0.5 * (kmm + kmm.transpose()).eval();
        const PsdCholesky chol_kmm(kmm);

        Matrix knm = kernel_eval(kernel, X_in, inducing);
        const Vector k_diag = kernel_diag(kernel, X_in, false);
        const Matrix v = chol_kmm.solve(knm.transpose()); // M x n
        const Vector q_diag = knm.cwiseProduct(v.transpose()).rowwise().sum();
        Vector lambda = ((k_diag - q_diag).cwiseMax(0.0).array() + kernel.noise())
                            .max(lambda_floor)
                            .matrix();

        Matrix kl = knm;
        kl.array().colwise() /= lambda.array(); // Lambda^{-1} K_nm
        Matrix a_mat = kmm + knm.transpose() * kl;
        a_mat = 0.5 * (a_mat + a_mat.transpose()).eval();
        return FitcFactors(std::move(kmm), std::move(a_mat), std::move(lambda), std::move(knm));
    }
};

double gaussian_conditional_log_density(const Matrix& cov, const Matrix& residual) {
    PsdCholesky chol(cov);
    const auto q = static_cast<double>(residual.cols());
    const auto t = static_cast<double>(residual.rows());
    const double quad = residual.cwiseProduct(chol.solve(residual)).sum();
    return -0.5 * q * chol.log_det() - 0.5 * quad - 0.5 * t * q * log_2pi;
}

} // namespace

DynamicsModel DynamicsModel::build(int class_id, int order, Matrix X_in, Matrix X_out,
                                   Kernel kernel) {
    if (X_in.rows() != X_out.rows())
        throw ShapeError("transition input/output row counts differ");
    if (order < 1 || X_out.cols() * order != X_in.cols())
        throw ShapeError("transition width inconsistent with Markov order");
    kernel.validate();
    DynamicsModel model;
    model.class_id = class_id;
    model.order = order;
    model.X_in = std::move(X_in);
    model.X_out = std::move(X_out);
    model.kernel = std::move(kernel);
    model.refresh();
    return model;
}

void DynamicsModel::refresh() {
    Matrix K = kernel_gram(kernel, X_in);
    K = 0.5 * (K + K.transpose()).eval();
    factor_.emplace(K);
    gram = GramMatrix{std::move(K), factor_->jitter()};
    alpha_cache = factor_->solve(X_out);
    if (sparse) {
        const FitcFactors f = FitcFactors::make(X_in, kernel, sparse->inducing);
        sparse->kmm = f.kmm;
        sparse->a_mat = f.a_mat;
        sparse->lambda = f.lambda;
        Matrix kl = f.knm;
        kl.array().colwise() /= f.lambda.array();
        sparse->mean_weights = f.chol_a.solve(kl.transpose() * X_out);
    }
}

const PsdCholesky& DynamicsModel::factor() const {
    if (!factor_)
        factor_.emplace(gram.values);
    return *factor_;
}

std::pair<Matrix, Matrix> make_transitions(const Matrix& latent_sequence, int order) {
    const Index n = latent_sequence.rows();
    const Index q = latent_sequence.cols();
    if (order < 1)
        throw ValueError("Markov order must be at least 1");
    if (n <= order)
        throw ValueError("sequence too short for the Markov order");
    const Index t = n - order;
    Matrix X_in(t, order * q), X_out(t, q);
    for (Index i = 0; i < t; ++i) {
        for (int k = 0; k < order; ++k)
            X_in.block(i, k * q, 1, q) = latent_sequence.row(i + k);
        X_out.row(i) = latent_sequence.row(i + order);
    }
    return {std::move(X_in), std::move(X_out)};
}

double dynamics_log_likelihood(const Matrix& X_in, const Matrix& X_out, const Kernel& kernel) {
    if (X_in.rows() != X_out.rows())
        throw ShapeError("transition input/output row counts differ");
    const auto n = static_cast<double>(X_in.rows());
    const auto q = static_cast<double>(X_out.cols());
    PsdCholesky chol(kernel_gram(kernel, X_in));
    const double quad = X_out.cwiseProduct(chol.solve(X_out)).sum();
    return -0.5 * q * chol.log_det() - 0.5 * quad - 0.5 * n * q * log_2pi;
}

DynamicsGradients dynamics_gradients(const Matrix& X_in, const Matrix& X_out,
                                     const Kernel& kernel) {
    const auto q = static_cast<double>(X_out.cols());
    PsdCholesky chol(kernel_gram(kernel, X_in));
    const Matrix alpha = chol.solve(X_out);
    const Matrix Kinv = chol.solve(Matrix::Identity(X_in.rows(), X_in.rows()));
    const Matrix W = 0.5 * (alpha * alpha.transpose() - q * Kinv);

    DynamicsGradients g;
    g.dX_in = kernel_input_grad_same(kernel, X_in, W);
    g.dX_out = -alpha; // data-term derivative
    g.d_hypers = kernel_param_grad(kernel, X_in, X_in, W, /*same_set=*/true);
    return g;
}

double sequence_score(const DynamicsModel& model, const Matrix& X_star) {
    if (X_star.cols() != model.q())
        throw ShapeError("latent prefix has wrong dimension");
    if (X_star.rows() <= model.order)
        throw ValueError("prefix must be longer than the Markov order");
    const auto [s_in, s_out] = make_transitions(X_star, model.order);

    if (!model.sparse) {
        const Matrix k_sn = kernel_eval(model.kernel, s_in, model.X_in);
        const Matrix v = model.factor().solve(k_sn.transpose()); // n x s
        Matrix cov = kernel_gram(model.kernel, s_in) - k_sn * v;
        cov = 0.5 * (cov + cov.transpose()).eval();
        const Matrix residual = s_out - k_sn * model.alpha_cache;
        return gaussian_conditional_log_density(cov, residual);
    }

    const FITCState& f = *model.sparse;
    const Matrix k_sm = kernel_eval(model.kernel, s_in, f.inducing);
    const Matrix residual = s_out - k_sm * f.mean_weights;
    const PsdCholesky chol_kmm(f.kmm);
    const PsdCholesky chol_a(f.a_mat);
    Matrix cov = kernel_gram(model.kernel, s_in) -
                 k_sm * chol_kmm.solve(k_sm.transpose()) +
                 k_sm * chol_a.solve(k_sm.transpose());
    cov = 0.5 * (cov + cov.transpose()).eval();
    return gaussian_conditional_log_density(cov, residual);
}

Matrix dynamics_predict_mean(const DynamicsModel& model, const Matrix& inputs) {
    if (inputs.cols() != model.X_in.cols())
        throw ShapeError("prediction input has wrong transition width");
    if (model.sparse)
        return kernel_eval(model.kernel, inputs, model.sparse->inducing) *
               model.sparse->mean_weights;
    return kernel_eval(model.kernel, inputs, model.X_in) * model.alpha_cache;
}

Matrix rollout(const DynamicsModel& model, const Matrix& x_seed, int steps) {
    if (x_seed.rows() != model.order || x_seed.cols() != model.q())
        throw ShapeError("rollout seed must be order x Q");
    if (steps < 0)
        throw ValueError("rollout steps must be nonnegative");
    const Index q = model.q();
    Matrix window = x_seed;
    Matrix out(steps, q);
    Matrix input(1, model.order * q);
    for (int t = 0; t < steps; ++t) {
        for (int k = 0; k < model.order; ++k)
            input.block(0, k * q, 1, q) = window.row(k);
        const Matrix next = dynamics_predict_mean(model, input);
        out.row(t) = next.row(0);
        if (model.order > 1)
            window.topRows(model.order - 1) = window.bottomRows(model.order - 1).eval();
        window.row(model.order - 1) = next.row(0);
    }
    return out;
}

double fitc_log_likelihood(const Matrix& X_in, const Matrix& X_out, const Kernel& kernel,
                           const Matrix& inducing) {
    if (inducing.cols() != X_in.cols())
        throw ShapeError("inducing points have wrong transition width");
    const auto n = static_cast<double>(X_in.rows());
    const auto q = static_cast<double>(X_out.cols());
    const FitcFactors f = FitcFactors::make(X_in, kernel, inducing);

    const double log_det = f.chol_a.log_det() - f.chol_kmm.log_det() +
                           f.lambda.array().log().sum();
    Matrix ly = X_out;
    ly.array().colwise() /= f.lambda.array(); // Lambda^{-1} X_out
    const Matrix proj = f.knm.transpose() * ly; // M x Q
    const double quad = X_out.cwiseProduct(ly).sum() -
                        proj.cwiseProduct(f.chol_a.solve(proj)).sum();
    return -0.5 * q * log_det - 0.5 * quad - 0.5 * n * q * log_2pi;
}

DynamicsModel fitc_fit(const DynamicsModel& model, int m, const FitcOptions& options) {
    const Index n = model.transitions();
    if (m < 1)
        throw ValueError("inducing point count must be at least 1");
    if (m > n)
        throw ValueError("inducing point count exceeds training transitions");

    DynamicsModel out = model;
    FITCState state;
    if (options.pin_to_inputs) {
        if (m != n)
            throw ValueError("pinned inducing points require M == transition count");
        state.inducing = model.X_in;
        out.sparse = std::move(state);
        out.refresh();
        return out;
    }

    // Uniform stride subsample of the transition inputs.
    state.inducing.resize(m, model.X_in.cols());
    for (int j = 0; j < m; ++j) {
        const auto idx = static_cast<Index>((static_cast<long long>(j) * n) / m);
        state.inducing.row(j) = model.X_in.row(idx);
    }

    if (options.opt_iters > 0) {
        Kernel kernel = model.kernel;
        const int pk = param_count(kernel);
        const Index pz = options.optimize_inducing ? state.inducing.size() : 0;
        Vector x0(pk + pz);
        x0.head(pk) = get_params(kernel).array().log();
        if (pz > 0)
            x0.tail(pz) = Eigen::Map<const Vector>(state.inducing.data(), pz);

        const Index zr = state.inducing.rows(), zc = state.inducing.cols();
        const Objective f = [&](const Vector& v) -> double {
            Kernel k = kernel;
            set_params(k, v.head(pk).array().exp());
            Matrix z = state.inducing;
            if (pz > 0)
                z = Eigen::Map<const Matrix>(v.tail(pz).data(), zr, zc);
            try {
                return fitc_log_likelihood(model.X_in, model.X_out, k, z);
            } catch (const NumericError&) {
                return -std::numeric_limits<double>::infinity();
            }
        };
        const ObjectiveGradient g = [&](const Vector& v) {
            return finite_difference_gradient(f, v, options.fd_step_rel);
        };
        AscentOptions ascent;
        ascent.max_iters = options.opt_iters;
        const AscentResult res = maximize(f, g, x0, ascent);

        set_params(kernel, res.x.head(pk).array().exp());
        out.kernel = kernel;
        if (pz > 0)
            state.inducing = Eigen::Map<const Matrix>(res.x.tail(pz).data(), zr, zc);
    }

    out.sparse = std::move(state);
    out.refresh();
    return out;
}

} // namespace gpdmm
