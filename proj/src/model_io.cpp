#include "gpdmm/model_io.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace gpdmm {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& rows) {
    if (!rows.is_array())
        throw DataError("expected a matrix (array of rows)");
    const auto r = static_cast<Index>(rows.size());
    if (r == 0)
        return Matrix(0, 0);
    const auto c = static_cast<Index>(rows[0].size());
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i) {
        if (static_cast<Index>(rows[i].size()) != c)
            throw DataError("ragged matrix in model document");
        for (Index j = 0; j < c; ++j)
            m(i, j) = rows[i][j].get<double>();
    }
    return m;
}

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i)
        out.push_back(v[i]);
    return out;
}

Vector vector_from_json(const json& arr) {
    Vector v(arr.size());
    for (Index i = 0; i < v.size(); ++i)
        v[i] = arr[i].get<double>();
    return v;
}

json kernel_to_json(const Kernel& kernel) {
    json parts = json::array();
    for (const auto& p : kernel.parts) {
        json part = {{"kind", to_string(p.kind)}};
        switch (p.kind) {
        case KernelKind::rbf:
            part["variance"] = p.variance;
            part["lengthscale"] = p.lengthscale;
            break;
        case KernelKind::linear:
            part["linear_variance"] = p.linear_variance;
            break;
        case KernelKind::rbf_plus_linear:
            part["variance"] = p.variance;
            part["lengthscale"] = p.lengthscale;
            part["linear_variance"] = p.linear_variance;
            break;
        case KernelKind::bias:
            part["variance"] = p.variance;
            break;
        case KernelKind::white:
            part["noise"] = p.noise;
            break;
        }
        parts.push_back(std::move(part));
    }
    return parts;
}

Kernel kernel_from_json(const json& parts) {
    Kernel kernel;
    for (const auto& part : parts) {
        KernelSpec spec;
        spec.kind = kernel_kind_from_string(part.at("kind").get<std::string>());
        if (part.contains("variance"))
            spec.variance = part["variance"].get<double>();
        if (part.contains("lengthscale"))
            spec.lengthscale = part["lengthscale"].get<double>();
        if (part.contains("linear_variance"))
            spec.linear_variance = part["linear_variance"].get<double>();
        if (part.contains("noise"))
            spec.noise = part["noise"].get<double>();
        kernel.parts.push_back(spec);
    }
    kernel.validate();
    return kernel;
}

} // namespace

void save_model(const TrainedGPDMM& model, const std::filesystem::path& path) {
    json doc;
    doc["class_labels"] = model.class_labels;
    doc["dt"] = model.dt;
    doc["sequence_length"] = model.sequence_length;
    doc["sequence_class"] = model.sequence_class;
    json offsets = json::array();
    for (Index off : model.sequence_offsets)
        offsets.push_back(static_cast<long long>(off));
    doc["sequence_offsets"] = std::move(offsets);
    doc["priors"] = vector_to_json(model.priors);
    doc["latent_config"] = {
        {"fourier_order", model.latent_config.fourier_order},
        {"include_constant", model.latent_config.include_constant},
        {"reduction_dims", model.latent_config.reduction_dims},
        {"markov_order", model.latent_config.markov_order},
    };
    doc["emission"] = {
        {"X", matrix_to_json(model.emission.X)},
        {"Y_mean", vector_to_json(model.emission.Y_mean.transpose())},
        {"Y_centered", matrix_to_json(model.emission.Y_centered)},
        {"kernel", kernel_to_json(model.emission.kernel)},
    };
    json experts = json::array();
    for (const auto& e : model.experts) {
        json expert = {
            {"class_id", e.class_id},
            {"order", e.order},
            {"X_in", matrix_to_json(e.X_in)},
            {"X_out", matrix_to_json(e.X_out)},
            {"kernel", kernel_to_json(e.kernel)},
        };
        if (e.sparse)
            expert["fitc_inducing"] = matrix_to_json(e.sparse->inducing);
        else
            expert["fitc_inducing"] = nullptr;
        experts.push_back(std::move(expert));
    }
    doc["experts"] = std::move(experts);

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot open '" + path.string() + "' for writing");
    out << kModelMagic << '\n' << doc.dump(2) << '\n';
}

TrainedGPDMM load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open model file '" + path.string() + "'");
    std::string magic;
    std::getline(in, magic);
    if (magic != kModelMagic)
        throw DataError("'" + path.string() + "' is not a " + kModelMagic +
                        " model document (bad magic header)");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("model document '" + path.string() + "' is corrupt: " + e.what());
    }

    TrainedGPDMM model;
    try {
        model.class_labels = doc.at("class_labels").get<std::vector<std::string>>();
        model.dt = doc.at("dt").get<double>();
        model.sequence_length = doc.at("sequence_length").get<int>();
        model.sequence_class = doc.at("sequence_class").get<std::vector<int>>();
        for (const auto& off : doc.at("sequence_offsets"))
            model.sequence_offsets.push_back(static_cast<Index>(off.get<long long>()));
        model.priors = vector_from_json(doc.at("priors"));

        const auto& lc = doc.at("latent_config");
        model.latent_config.fourier_order = lc.at("fourier_order").get<int>();
        model.latent_config.include_constant = lc.at("include_constant").get<bool>();
        model.latent_config.reduction_dims = lc.at("reduction_dims").get<int>();
        model.latent_config.markov_order = lc.at("markov_order").get<int>();

        const auto& em = doc.at("emission");
        model.emission = EmissionModel::restore(
            matrix_from_json(em.at("X")),
            vector_from_json(em.at("Y_mean")).transpose(),
            matrix_from_json(em.at("Y_centered")),
            kernel_from_json(em.at("kernel")));

        for (const auto& ej : doc.at("experts")) {
            DynamicsModel expert = DynamicsModel::build(
                ej.at("class_id").get<int>(), ej.at("order").get<int>(),
                matrix_from_json(ej.at("X_in")), matrix_from_json(ej.at("X_out")),
                kernel_from_json(ej.at("kernel")));
            if (!ej.at("fitc_inducing").is_null()) {
                FITCState state;
                state.inducing = matrix_from_json(ej["fitc_inducing"]);
                expert.sparse = std::move(state);
                expert.refresh();
            }
            model.experts.push_back(std::move(expert));
        }
    } catch (const json::exception& e) {
        throw DataError("model document '" + path.string() + "' missing field: " + e.what());
    }
    if (model.experts.size() != model.class_labels.size() ||
        model.priors.size() != static_cast<Index>(model.class_labels.size()))
        throw DataError("model document is inconsistent (experts/labels/priors)");
    return model;
}

} // namespace gpdmm
