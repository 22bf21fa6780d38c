#include "gpdmm/mixture.hpp"

#include "gpdmm/optim.hpp"

#include <cmath>

namespace gpdmm {

namespace {

struct TrainWork {
    Matrix Y; // stacked observations, N x D
    std::vector<int> seq_class;
    std::vector<Index> offsets;
    std::vector<std::vector<Index>> expert_base; // per expert: transition base rows
    int n = 0;     // common sequence length
    int order = 1;
    int Q = 0;
    int A = 0;
    Index N = 0;
    Kernel emission_kernel;
    std::vector<Kernel> expert_kernels;
    int pe = 0, pd = 0;
    LatentConfig config;

    Index x_len() const { return N * Q; }
    Index total_params() const { return x_len() + pe + static_cast<Index>(A) * pd; }

    Matrix unpack_x(const Vector& v) const {
        return Eigen::Map<const Matrix>(v.data(), N, Q);
    }
    Kernel unpack_emission(const Vector& v) const {
        Kernel k = emission_kernel;
        set_params(k, v.segment(x_len(), pe).array().exp());
        return k;
    }
    Kernel unpack_expert(const Vector& v, int a) const {
        Kernel k = expert_kernels[a];
        set_params(k, v.segment(x_len() + pe + static_cast<Index>(a) * pd, pd).array().exp());
        return k;
    }

    std::pair<Matrix, Matrix> transitions(const Matrix& X, int a) const {
        const auto& base = expert_base[a];
        Matrix in(static_cast<Index>(base.size()), static_cast<Index>(order) * Q);
        Matrix out(static_cast<Index>(base.size()), Q);
        for (std::size_t r = 0; r < base.size(); ++r) {
            for (int k = 0; k < order; ++k)
                in.block(static_cast<Index>(r), static_cast<Index>(k) * Q, 1, Q) =
                    X.row(base[r] + k);
            out.row(static_cast<Index>(r)) = X.row(base[r] + order);
        }
        return {std::move(in), std::move(out)};
    }
};

double combined_objective(const TrainWork& w, const Vector& v) {
    try {
        const Matrix X = w.unpack_x(v);
        double value = emission_log_likelihood(X, w.Y, w.unpack_emission(v));
        for (int a = 0; a < w.A; ++a) {
            const auto [in, out] = w.transitions(X, a);
            value += dynamics_log_likelihood(in, out, w.unpack_expert(v, a));
        }
        return value;
    } catch (const NumericError&) {
        return -std::numeric_limits<double>::infinity();
    } catch (const ValueError&) {
        return -std::numeric_limits<double>::infinity();
    }
}

Vector combined_gradient(const TrainWork& w, const Vector& v) {
    const Matrix X = w.unpack_x(v);
    Vector grad = Vector::Zero(w.total_params());
    Matrix dX = Matrix::Zero(w.N, w.Q);

    const Kernel ke = w.unpack_emission(v);
    const EmissionGradients eg = emission_gradients(X, w.Y, ke);
    dX += eg.dX;
    // Optimizer works in log space: chain through theta = exp(log theta).
    grad.segment(w.x_len(), w.pe) =
        eg.d_hypers.cwiseProduct(get_params(ke));

    for (int a = 0; a < w.A; ++a) {
        const Kernel ka = w.unpack_expert(v, a);
        const auto [in, out] = w.transitions(X, a);
        const DynamicsGradients dg = dynamics_gradients(in, out, ka);
        const auto& base = w.expert_base[a];
        for (std::size_t r = 0; r < base.size(); ++r) {
            for (int k = 0; k < w.order; ++k)
                dX.row(base[r] + k) +=
                    dg.dX_in.block(static_cast<Index>(r), static_cast<Index>(k) * w.Q, 1, w.Q);
            dX.row(base[r] + w.order) += dg.dX_out.row(static_cast<Index>(r));
        }
        grad.segment(w.x_len() + w.pe + static_cast<Index>(a) * w.pd, w.pd) =
            dg.d_hypers.cwiseProduct(get_params(ka));
    }

    grad.head(w.x_len()) = Eigen::Map<const Vector>(dX.data(), dX.size());
    return grad;
}

TrainedGPDMM assemble(const TrainWork& w, const Dataset& dataset, const Vector& v) {
    const Matrix X = w.unpack_x(v);
    TrainedGPDMM model;
    model.emission = EmissionModel::build(X, w.Y, w.unpack_emission(v));
    for (int a = 0; a < w.A; ++a) {
        auto [in, out] = w.transitions(X, a);
        model.experts.push_back(
            DynamicsModel::build(a + 1, w.order, std::move(in), std::move(out),
                                 w.unpack_expert(v, a)));
    }
    model.priors.resize(w.A);
    for (int a = 0; a < w.A; ++a) {
        double rows = 0.0;
        for (std::size_t s = 0; s < w.seq_class.size(); ++s)
            if (w.seq_class[s] == a)
                rows += w.n;
        model.priors[a] = rows / static_cast<double>(w.N);
    }
    model.latent_config = w.config;
    model.class_labels = dataset.classes;
    model.dt = dataset.dt;
    model.sequence_length = w.n;
    model.sequence_class = w.seq_class;
    model.sequence_offsets = w.offsets;
    return model;
}

} // namespace

TrainResult train_with_log(const Dataset& dataset, const LatentConfig& config,
                           const TrainOptions& options) {
    dataset.validate();
    config.validate();

    TrainWork w;
    w.config = config;
    w.order = config.markov_order;
    w.n = dataset.length;
    w.Q = config.q();
    w.A = dataset.num_classes();
    if (w.n <= w.order + 1)
        throw ValueError("sequences too short for the Markov order");

    const int S = static_cast<int>(dataset.sequences.size());
    w.N = static_cast<Index>(S) * w.n;
    w.Y.resize(w.N, dataset.feature_dim);
    for (int s = 0; s < S; ++s) {
        w.offsets.push_back(static_cast<Index>(s) * w.n);
        w.seq_class.push_back(dataset.class_of(s));
        w.Y.middleRows(w.offsets[s], w.n) = dataset.sequences[s].values;
    }
    w.expert_base.resize(w.A);
    for (int s = 0; s < S; ++s)
        for (int j = 0; j + w.order < w.n; ++j)
            w.expert_base[w.seq_class[s]].push_back(w.offsets[s] + j);

    w.emission_kernel = Kernel::emission_default(
        options.emission_rbf_variance, options.emission_lengthscale,
        options.emission_bias_variance, options.emission_noise);
    for (int a = 0; a < w.A; ++a)
        w.expert_kernels.push_back(Kernel::dynamics_default(
            options.dynamics_rbf_variance, options.dynamics_lengthscale,
            options.dynamics_linear_variance, options.dynamics_noise));
    w.pe = param_count(w.emission_kernel);
    w.pd = param_count(w.expert_kernels[0]);

    const LatentInit init = build_latent_init(dataset, config);
    Vector v(w.total_params());
    v.head(w.x_len()) = Eigen::Map<const Vector>(init.X.data(), init.X.size());
    v.segment(w.x_len(), w.pe) = get_params(w.emission_kernel).array().log();
    for (int a = 0; a < w.A; ++a)
        v.segment(w.x_len() + w.pe + static_cast<Index>(a) * w.pd, w.pd) =
            get_params(w.expert_kernels[a]).array().log();

    const Objective f = [&](const Vector& x) { return combined_objective(w, x); };

    TrainResult result;
    double value = f(v);
    if (!std::isfinite(value))
        throw NumericError("training objective is non-finite at initialization");
    result.log.push_back({0, "init", value});

    const auto run_phase = [&](Index lo, Index len, int steps, int round,
                               const char* phase) {
        if (steps <= 0)
            return;
        const ObjectiveGradient g = [&](const Vector& x) {
            Vector grad = combined_gradient(w, x);
            if (lo > 0)
                grad.head(lo).setZero();
            const Index hi = lo + len;
            if (hi < grad.size())
                grad.tail(grad.size() - hi).setZero();
            return grad;
        };
        AscentOptions ao;
        ao.max_iters = steps;
        ao.rel_tol = options.rel_tol;
        ao.record_trace = true;
        AscentResult res = maximize(f, g, v, ao);
        v = std::move(res.x);
        value = res.value;
        for (std::size_t i = 1; i < res.trace.size(); ++i)
            result.log.push_back({round, phase, res.trace[i]});
    };

    const Index em_len = w.x_len() + w.pe;
    const Index dyn_lo = em_len;
    const Index dyn_len = static_cast<Index>(w.A) * w.pd;
    for (int round = 0; round < options.rounds; ++round) {
        const double round_start = value;
        run_phase(0, em_len, options.steps_per_phase, round, "emission");
        run_phase(dyn_lo, dyn_len, options.steps_per_phase, round, "dynamics");
        if (options.round_observer)
            options.round_observer(round, assemble(w, dataset, v));
        if (value - round_start <= options.rel_tol * (std::abs(value) + 1e-12))
            break;
    }
    run_phase(0, w.total_params(), options.polish_steps, options.rounds, "polish");

    result.model = assemble(w, dataset, v);
    if (options.fitc_m) {
        for (auto& expert : result.model.experts) {
            const int m = std::min<int>(*options.fitc_m,
                                        static_cast<int>(expert.transitions()));
            expert = fitc_fit(expert, m, options.fitc);
        }
    }
    result.final_objective = value;
    return result;
}

TrainedGPDMM train(const Dataset& dataset, const LatentConfig& config,
                   const TrainOptions& options) {
    return train_with_log(dataset, config, options).model;
}

namespace {

ClassificationResult classify_projected(const TrainedGPDMM& model,
                                        const InferLatentResult& projection) {
    const int A = model.num_classes();
    ClassificationResult result;
    result.projection_converged = projection.converged;
    result.log_scores.resize(A);
    for (int a = 0; a < A; ++a)
        result.log_scores[a] = sequence_score(model.experts[a], projection.X_star);

    // Bayes posterior in log space with max-subtraction.
    Vector log_post = model.priors.array().log() + result.log_scores.array();
    const double shift = log_post.maxCoeff();
    Vector un = (log_post.array() - shift).exp();
    result.posterior = un / un.sum();

    result.predicted = 0;
    for (int a = 1; a < A; ++a)
        if (result.posterior[a] > result.posterior[result.predicted])
            result.predicted = a;
    return result;
}

void check_prefix(const TrainedGPDMM& model, const Matrix& y_prefix) {
    if (y_prefix.cols() != model.emission.d())
        throw ShapeError("prefix feature dimension does not match the model");
    if (y_prefix.rows() <= model.order())
        throw ValueError("prefix must be longer than the Markov order");
}

} // namespace

ClassificationResult classify(const TrainedGPDMM& model, const Matrix& y_prefix) {
    check_prefix(model, y_prefix);
    return classify_projected(model, infer_latent(model.emission, y_prefix));
}

GenerateResult generate(const TrainedGPDMM& model, const Matrix& y_prefix,
                        std::optional<int> class_hint, int horizon) {
    if (horizon < 0)
        throw ValueError("generation horizon must be nonnegative");
    check_prefix(model, y_prefix);

    GenerateResult result;
    int expert_index;
    const InferLatentResult projection = infer_latent(model.emission, y_prefix);
    if (class_hint) {
        if (*class_hint < 0 || *class_hint >= model.num_classes())
            throw ValueError("class hint out of range");
        expert_index = *class_hint;
    } else {
        result.classification = classify_projected(model, projection);
        expert_index = result.classification->predicted;
    }
    result.expert_used = expert_index;

    const int order = model.order();
    const Matrix seed = projection.X_star.bottomRows(order);
    result.latent = rollout(model.experts[expert_index], seed, horizon);
    result.observations = emission_predict(model.emission, result.latent).mean;
    return result;
}

int prefix_length(int sequence_length, double fraction, int markov_order) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ValueError("prefix fraction must lie in (0, 1)");
    if (markov_order < 1)
        throw ValueError("Markov order must be at least 1");
    if (sequence_length < markov_order + 2)
        throw ValueError("sequence too short to take a usable prefix");
    const int raw = static_cast<int>(std::floor(fraction * sequence_length + 1e-9));
    return std::clamp(raw, markov_order + 1, sequence_length - 1);
}

} // namespace gpdmm
