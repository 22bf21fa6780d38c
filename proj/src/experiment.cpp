#include "gpdmm/experiment.hpp"

#include "gpdmm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>

namespace gpdmm {

namespace {

int model_class_index(const TrainedGPDMM& model, const std::string& label) {
    const auto it = std::find(model.class_labels.begin(), model.class_labels.end(), label);
    return it == model.class_labels.end()
               ? -1
               : static_cast<int>(it - model.class_labels.begin());
}

Stat make_stat(const std::vector<double>& values) {
    Stat s;
    for (double v : values)
        if (std::isfinite(v)) {
            s.mean += v;
            ++s.count;
        }
    if (s.count == 0)
        return s;
    s.mean /= s.count;
    double ss = 0.0;
    for (double v : values)
        if (std::isfinite(v))
            ss += (v - s.mean) * (v - s.mean);
    s.sd = s.count > 1 ? std::sqrt(ss / (s.count - 1)) : 0.0;
    return s;
}

std::optional<double> mean_defined(const std::vector<double>& values) {
    if (values.empty())
        return std::nullopt;
    double sum = 0.0;
    for (double v : values)
        sum += v;
    return sum / static_cast<double>(values.size());
}

} // namespace

EvalResult evaluate_split(const TrainedGPDMM& model, const Dataset& dataset,
                          const std::vector<int>& test_indices,
                          const EvalOptions& options) {
    if (test_indices.empty())
        throw ValueError("evaluation needs at least one test sequence");
    if (dataset.feature_dim != model.emission.d())
        throw ShapeError("dataset feature dimension does not match the model");

    const int order = model.order();
    const int length = dataset.length;
    const int t_prefix = prefix_length(length, options.prefix_fraction, order);
    const int horizon = length - t_prefix;

    EvalResult result;
    std::vector<int> predictions, truths;

    struct PairRecord {
        double damp;
        double ldjr;
        Matrix generated;
        Matrix truth;
    };
    std::map<int, std::vector<PairRecord>> pairs_by_class;
    std::map<int, std::vector<Matrix>> remainders_by_class;

    for (int idx : test_indices) {
        const Sequence& seq = dataset.sequences.at(idx);
        const int truth = dataset.class_of(idx);
        const Matrix prefix = seq.values.topRows(t_prefix);
        const Matrix remainder = seq.values.bottomRows(horizon);
        remainders_by_class[truth].push_back(remainder);

        SequenceEval row;
        row.seq_index = idx;
        row.truth = truth;
        row.prefix_steps = t_prefix;

        std::optional<int> hint;
        if (options.generate_with_true_class) {
            int h = model_class_index(model, dataset.classes[truth]);
            if (h < 0) {
                if (model.num_classes() != 1)
                    throw ValueError("true-class generation: label '" +
                                     dataset.classes[truth] + "' unknown to the model");
                h = 0; // pooled single-expert baseline
            }
            hint = h;
        }
        const GenerateResult gen = generate(model, prefix, hint, horizon);

        if (gen.classification) {
            row.posterior = gen.classification->posterior;
            row.predicted = model_class_index(
                model, model.class_labels[gen.classification->predicted]);
        } else {
            const ClassificationResult cls = classify(model, prefix);
            row.posterior = cls.posterior;
            row.predicted = cls.predicted;
        }
        // Map the model's label into this dataset's class indexing.
        if (row.predicted >= 0) {
            const auto& label = model.class_labels[row.predicted];
            const auto it = std::find(dataset.classes.begin(), dataset.classes.end(), label);
            row.predicted = it == dataset.classes.end()
                                ? -1
                                : static_cast<int>(it - dataset.classes.begin());
        }

        predictions.push_back(row.predicted);
        truths.push_back(truth);

        const bool counted = !options.restrict_to_correct || row.predicted == truth;
        if (counted) {
            PairRecord rec;
            const int w = options.dampening_window > 0
                              ? options.dampening_window
                              : std::max(2, static_cast<int>(std::lround(0.10 * horizon)));
            rec.damp = dampening(remainder, gen.observations, w);
            rec.ldjr = ldj_ratio(remainder, gen.observations, seq.dt);
            rec.generated = gen.observations;
            rec.truth = remainder;
            row.damp = rec.damp;
            row.ldjr = rec.ldjr;
            pairs_by_class[truth].push_back(std::move(rec));
        }
        result.rows.push_back(std::move(row));
    }

    // Assemble the report class by class.
    MetricsReport& report = result.report;
    report.f1_macro = f1_score(predictions, truths);
    report.total_sequences = static_cast<int>(test_indices.size());

    std::vector<ClassGeneration> frechet_input;
    std::vector<double> class_damp_means, class_ldj_means;
    for (int c = 0; c < dataset.num_classes(); ++c) {
        if (!remainders_by_class.count(c))
            continue; // class absent from this test split
        MetricsReport::PerClass pc;
        pc.label = dataset.classes[c];

        std::vector<int> cls_pred, cls_truth;
        for (std::size_t i = 0; i < truths.size(); ++i)
            if (truths[i] == c) {
                cls_pred.push_back(predictions[i]);
                cls_truth.push_back(truths[i]);
                ++pc.total;
                if (predictions[i] == truths[i])
                    ++pc.correct;
            }
        pc.f1 = f1_score(cls_pred, cls_truth);
        report.correct_sequences += pc.correct;

        ClassGeneration cg;
        cg.label = pc.label;
        cg.normalizer_set = remainders_by_class[c];
        const auto& recs = pairs_by_class[c];
        double damp_sum = 0.0, ldj_sum = 0.0;
        for (const auto& rec : recs) {
            cg.pairs.push_back({rec.generated, rec.truth});
            damp_sum += rec.damp;
            ldj_sum += rec.ldjr;
        }
        if (!recs.empty()) {
            pc.dampening = damp_sum / recs.size();
            pc.ldj = ldj_sum / recs.size();
            class_damp_means.push_back(*pc.dampening);
            class_ldj_means.push_back(*pc.ldj);
        }
        frechet_input.push_back(std::move(cg));
        report.per_class.push_back(std::move(pc));
    }

    // Classes whose normalizer is degenerate (fewer than two test remainders
    // or identical ones) cannot be scored; drop them with a warning count.
    std::vector<ClassGeneration> usable;
    std::vector<std::size_t> usable_pos;
    for (std::size_t i = 0; i < frechet_input.size(); ++i) {
        bool ok = frechet_input[i].normalizer_set.size() >= 2;
        if (ok) {
            try {
                ok = frechet_class_normalizer(frechet_input[i].normalizer_set) > 0.0;
            } catch (const ValueError&) {
                ok = false;
            }
        }
        if (ok) {
            usable.push_back(frechet_input[i]);
            usable_pos.push_back(i);
        } else if (!frechet_input[i].pairs.empty()) {
            ++report.excluded_classes;
        }
    }
    if (!usable.empty()) {
        const FrechetAvgResult fa = frechet_avg(usable);
        report.frechet_avg = fa.value;
        report.excluded_classes += fa.excluded_classes;
        for (std::size_t k = 0; k < usable.size(); ++k)
            report.per_class[usable_pos[k]].frechet = fa.per_class[k];
    }
    report.dampening_ratio = mean_defined(class_damp_means);
    report.ldj_ratio = mean_defined(class_ldj_means);
    return result;
}

namespace {

double validation_f1(const TrainedGPDMM& model, const Dataset& dataset,
                     const std::vector<int>& validation_indices, double prefix_fraction) {
    const int t_prefix =
        prefix_length(dataset.length, prefix_fraction, model.order());
    std::vector<int> pred, truth;
    for (int idx : validation_indices) {
        const ClassificationResult cls =
            classify(model, dataset.sequences.at(idx).values.topRows(t_prefix));
        const auto& label = model.class_labels[cls.predicted];
        const auto it = std::find(dataset.classes.begin(), dataset.classes.end(), label);
        pred.push_back(it == dataset.classes.end()
                           ? -1
                           : static_cast<int>(it - dataset.classes.begin()));
        truth.push_back(dataset.class_of(idx));
    }
    return f1_score(pred, truth);
}

MccvIteration run_mccv_iteration(const Dataset& dataset, const MccvOptions& options,
                                 int iteration) {
    MccvIteration result;
    result.iteration = iteration;
    result.split_seed = options.seed + static_cast<std::uint64_t>(iteration);
    const Split split = mccv_split(dataset, result.split_seed,
                                   options.n_validation_per_class,
                                   options.n_test_per_class);
    const Dataset train_set = subset(dataset, split.train);

    TrainOptions topts = options.train;
    TrainedGPDMM best_model;
    double best_f1 = -1.0;
    int best_round = -1;
    const bool stopping = !split.validation.empty();
    if (stopping) {
        topts.round_observer = [&](int round, const TrainedGPDMM& snapshot) {
            const double f1 =
                validation_f1(snapshot, dataset, split.validation, options.eval.prefix_fraction);
            if (f1 > best_f1 + 1e-12) {
                best_f1 = f1;
                best_round = round;
                best_model = snapshot;
            }
        };
    }
    TrainedGPDMM final_model = train(train_set, options.latent, topts);
    if (stopping) {
        // The polished final model competes with the per-round snapshots.
        const double f1 =
            validation_f1(final_model, dataset, split.validation, options.eval.prefix_fraction);
        if (f1 > best_f1 + 1e-12 || best_round < 0) {
            best_f1 = f1;
            best_round = -1;
            best_model = std::move(final_model);
        }
    } else {
        best_model = std::move(final_model);
        best_f1 = 0.0;
    }

    result.best_round = best_round;
    result.validation_f1 = stopping ? best_f1 : 0.0;
    result.test_report =
        evaluate_split(best_model, dataset, split.test, options.eval).report;
    return result;
}

} // namespace

MccvResult run_mccv(const Dataset& dataset, const MccvOptions& options) {
    if (options.iterations < 1)
        throw ValueError("MCCV needs at least one iteration");

    MccvResult result;
    result.iterations.resize(options.iterations);
    if (options.jobs > 1) {
        std::vector<std::future<MccvIteration>> futures;
        for (int i = 0; i < options.iterations; ++i)
            futures.push_back(std::async(std::launch::async, run_mccv_iteration,
                                         std::cref(dataset), std::cref(options), i));
        for (int i = 0; i < options.iterations; ++i)
            result.iterations[i] = futures[i].get(); // order-deterministic reduce
    } else {
        for (int i = 0; i < options.iterations; ++i)
            result.iterations[i] = run_mccv_iteration(dataset, options, i);
    }

    std::vector<double> vf1, tf1, fr, da, ld;
    for (const auto& it : result.iterations) {
        vf1.push_back(it.validation_f1);
        tf1.push_back(it.test_report.f1_macro);
        if (it.test_report.frechet_avg)
            fr.push_back(*it.test_report.frechet_avg);
        if (it.test_report.dampening_ratio)
            da.push_back(*it.test_report.dampening_ratio);
        if (it.test_report.ldj_ratio)
            ld.push_back(*it.test_report.ldj_ratio);
    }
    result.validation_f1 = make_stat(vf1);
    result.test_f1 = make_stat(tf1);
    result.frechet = make_stat(fr);
    result.dampening = make_stat(da);
    result.ldj = make_stat(ld);
    return result;
}

SearchResult run_search(const Dataset& dataset, const SearchSpace& space,
                        const MccvOptions& base, int budget) {
    if (budget < 1)
        throw ValueError("search budget must be at least 1");
    if (space.markov_orders.empty())
        throw ValueError("search space has no Markov orders");
    if (space.fourier_order_min > space.fourier_order_max ||
        space.reduction_dims_min > space.reduction_dims_max)
        throw ValueError("search space bounds are empty");

    SearchResult result;
    for (int i = 0; i < budget; ++i) {
        Rng rng(mix_seed(base.seed, 0xa5a5u + static_cast<std::uint64_t>(i)));
        SearchCandidate cand;
        cand.index = i;
        cand.latent = base.latent;
        cand.latent.fourier_order =
            rng.uniform_int(space.fourier_order_min, space.fourier_order_max);
        cand.latent.reduction_dims =
            rng.uniform_int(space.reduction_dims_min, space.reduction_dims_max);
        cand.latent.markov_order =
            space.markov_orders[rng.uniform_int(0, static_cast<int>(space.markov_orders.size()) - 1)];
        cand.variance_init = std::exp(rng.uniform(std::log(space.variance_init_min),
                                                  std::log(space.variance_init_max)));
        if (!space.fitc_fractions.empty()) {
            const int pick = rng.uniform_int(0, static_cast<int>(space.fitc_fractions.size()));
            if (pick < static_cast<int>(space.fitc_fractions.size())) {
                const int transitions =
                    dataset.length - cand.latent.markov_order;
                cand.fitc_m = std::max(
                    1, static_cast<int>(std::lround(space.fitc_fractions[pick] * transitions)));
            }
        }

        MccvOptions mccv = base;
        mccv.latent = cand.latent;
        mccv.train.emission_rbf_variance = cand.variance_init;
        mccv.train.dynamics_rbf_variance = cand.variance_init;
        mccv.train.fitc_m = cand.fitc_m;
        cand.mccv = run_mccv(dataset, mccv);
        cand.validation_f1 = cand.mccv.validation_f1.mean;
        cand.d_avg = cand.mccv.frechet.count > 0
                         ? std::optional<double>(cand.mccv.frechet.mean)
                         : std::nullopt;
        result.leaderboard.push_back(std::move(cand));
    }

    std::sort(result.leaderboard.begin(), result.leaderboard.end(),
              [](const SearchCandidate& a, const SearchCandidate& b) {
                  if (a.validation_f1 != b.validation_f1)
                      return a.validation_f1 > b.validation_f1;
                  const double da = a.d_avg.value_or(std::numeric_limits<double>::infinity());
                  const double db = b.d_avg.value_or(std::numeric_limits<double>::infinity());
                  if (da != db)
                      return da < db;
                  return a.index < b.index;
              });
    return result;
}

} // namespace gpdmm
