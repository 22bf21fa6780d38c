#include "gpdmm/data.hpp"

#include "gpdmm/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <system_error>

namespace gpdmm {

using nlohmann::json;

void Sequence::validate() const {
    if (values.rows() < 2)
        throw DataError("sequence '" + source_id + "' has fewer than 2 time steps");
    if (values.cols() < 1)
        throw DataError("sequence '" + source_id + "' has no features");
    if (!values.allFinite())
        throw DataError("sequence '" + source_id + "' contains non-finite values");
    if (!(dt > 0.0))
        throw DataError("sequence '" + source_id + "' has non-positive dt");
}

int Dataset::class_of(int seq_index) const {
    const auto& label = sequences.at(seq_index).class_label;
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end())
        throw DataError("sequence class '" + label + "' is not in the dataset class list");
    return static_cast<int>(it - classes.begin());
}

std::vector<int> Dataset::indices_of_class(int class_index) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(sequences.size()); ++i)
        if (sequences[i].class_label == classes.at(class_index))
            out.push_back(i);
    return out;
}

void Dataset::validate() const {
    if (classes.empty())
        throw DataError("dataset has no classes");
    for (std::size_t i = 0; i < classes.size(); ++i)
        for (std::size_t j = i + 1; j < classes.size(); ++j)
            if (classes[i] == classes[j])
                throw DataError("duplicate class label '" + classes[i] + "'");
    for (const auto& s : sequences) {
        s.validate();
        if (s.dim() != feature_dim)
            throw DataError("sequence '" + s.source_id + "' has feature dimension " +
                            std::to_string(s.dim()) + ", dataset declares " +
                            std::to_string(feature_dim));
        if (s.length() != length)
            throw ShapeError("sequence '" + s.source_id + "' has length " +
                             std::to_string(s.length()) + ", dataset declares " +
                             std::to_string(length));
        if (std::find(classes.begin(), classes.end(), s.class_label) == classes.end())
            throw DataError("sequence '" + s.source_id + "' has unknown class '" +
                            s.class_label + "'");
    }
    for (int c = 0; c < num_classes(); ++c)
        if (indices_of_class(c).empty())
            throw DataError("class '" + classes[c] + "' has no sequences");
}

std::string format_double(double value) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

void write_csv(const Matrix& values, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot open '" + path.string() + "' for writing");
    std::string line;
    for (Index i = 0; i < values.rows(); ++i) {
        line.clear();
        for (Index j = 0; j < values.cols(); ++j) {
            if (j > 0)
                line += ',';
            line += format_double(values(i, j));
        }
        line += '\n';
        out << line;
    }
}

Matrix read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open sequence file '" + path.string() + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<double> row;
        std::size_t start = 0;
        int col = 0;
        while (start <= line.size()) {
            std::size_t end = line.find(',', start);
            if (end == std::string::npos)
                end = line.size();
            double v = 0.0;
            const char* first = line.data() + start;
            const char* last = line.data() + end;
            const auto res = std::from_chars(first, last, v);
            std::ostringstream cell;
            cell << path.string() << " row " << line_no << " column " << (col + 1);
            if (res.ec != std::errc{} || res.ptr != last)
                throw DataError("cannot parse value at " + cell.str());
            if (!std::isfinite(v))
                throw DataError("non-finite value at " + cell.str());
            row.push_back(v);
            ++col;
            start = end + 1;
            if (end == line.size())
                break;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError("ragged row at " + path.string() + " row " + std::to_string(line_no));
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw DataError("sequence file '" + path.string() + "' is empty");
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    return m;
}

namespace {

Matrix resample_values(const Matrix& values, int target_length) {
    if (target_length < 2)
        throw ValueError("resample target length must be at least 2");
    const Index n = values.rows();
    Matrix out(target_length, values.cols());
    for (int j = 0; j < target_length; ++j) {
        const double t = (target_length == 1)
                             ? 0.0
                             : static_cast<double>(j) / (target_length - 1) * static_cast<double>(n - 1);
        auto i = static_cast<Index>(std::floor(t));
        if (i >= n - 1)
            i = n - 2;
        const double w = t - static_cast<double>(i);
        if (w == 0.0)
            out.row(j) = values.row(i);
        else
            out.row(j) = (1.0 - w) * values.row(i) + w * values.row(i + 1);
    }
    // Endpoints are preserved exactly.
    out.row(0) = values.row(0);
    out.row(target_length - 1) = values.row(n - 1);
    return out;
}

} // namespace

Sequence resample(const Sequence& sequence, int target_length) {
    sequence.validate();
    Sequence out = sequence;
    out.values = resample_values(sequence.values, target_length);
    // Duration is preserved; the grid step changes.
    out.dt = sequence.dt * static_cast<double>(sequence.length() - 1) / (target_length - 1);
    return out;
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in)
        throw DataError("cannot open manifest '" + manifest_path.string() + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("manifest '" + manifest_path.string() + "' is not valid JSON: " + e.what());
    }

    Dataset ds;
    try {
        ds.name = doc.at("dataset_name").get<std::string>();
        ds.feature_dim = doc.at("feature_count").get<int>();
        ds.length = doc.at("target_length").get<int>();
        ds.dt = doc.at("dt").get<double>();
        ds.unit = doc.at("unit").get<std::string>();
    } catch (const json::exception& e) {
        throw DataError("manifest '" + manifest_path.string() + "' missing field: " + e.what());
    }
    if (ds.feature_dim < 1 || ds.length < 2 || !(ds.dt > 0.0))
        throw DataError("manifest '" + manifest_path.string() + "' has invalid dimensions");

    const auto dir = manifest_path.parent_path();
    for (const auto& cls : doc.at("classes")) {
        const auto label = cls.at("label").get<std::string>();
        if (label.empty())
            throw DataError("manifest contains an empty class label");
        if (std::find(ds.classes.begin(), ds.classes.end(), label) != ds.classes.end())
            throw DataError("manifest repeats class label '" + label + "'");
        ds.classes.push_back(label);
        for (const auto& file : cls.at("files")) {
            const auto rel = file.get<std::string>();
            Sequence seq;
            seq.values = read_csv(dir / rel);
            seq.class_label = label;
            seq.source_id = rel;
            seq.dt = ds.dt;
            if (seq.dim() != ds.feature_dim)
                throw DataError("sequence '" + rel + "' has " + std::to_string(seq.dim()) +
                                " features, manifest declares " + std::to_string(ds.feature_dim));
            if (seq.length() < 2)
                throw DataError("sequence '" + rel + "' has fewer than 2 rows");
            if (seq.length() != ds.length)
                seq.values = resample_values(seq.values, ds.length);
            ds.sequences.push_back(std::move(seq));
        }
    }
    ds.validate();
    return ds;
}

std::filesystem::path save_dataset(const Dataset& dataset, const std::filesystem::path& out_dir) {
    dataset.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw DataError("cannot create output directory '" + out_dir.string() + "'");

    json classes = json::array();
    for (int c = 0; c < dataset.num_classes(); ++c) {
        json files = json::array();
        for (int idx : dataset.indices_of_class(c)) {
            const auto& seq = dataset.sequences[idx];
            const std::string filename = seq.source_id + ".csv";
            write_csv(seq.values, out_dir / filename);
            files.push_back(filename);
        }
        classes.push_back({{"label", dataset.classes[c]}, {"files", files}});
    }
    json manifest = {
        {"dataset_name", dataset.name},
        {"feature_count", dataset.feature_dim},
        {"target_length", dataset.length},
        {"dt", dataset.dt},
        {"unit", dataset.unit},
        {"classes", classes},
    };
    const auto manifest_path = out_dir / "manifest.json";
    std::ofstream out(manifest_path, std::ios::binary);
    if (!out)
        throw DataError("cannot write manifest '" + manifest_path.string() + "'");
    out << manifest.dump(2) << '\n';
    return manifest_path;
}

Split mccv_split(const Dataset& dataset, std::uint64_t seed,
                 int n_validation_per_class, int n_test_per_class) {
    if (n_validation_per_class < 0 || n_test_per_class < 0)
        throw ValueError("split counts must be nonnegative");
    Split split;
    for (int c = 0; c < dataset.num_classes(); ++c) {
        auto idx = dataset.indices_of_class(c);
        const int need = 1 + n_validation_per_class + n_test_per_class;
        if (static_cast<int>(idx.size()) < need)
            throw DataError("class '" + dataset.classes[c] + "' has " +
                            std::to_string(idx.size()) + " sequences, split needs " +
                            std::to_string(need));
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(c)));
        rng.shuffle(idx);
        split.train.push_back(idx[0]);
        for (int i = 0; i < n_validation_per_class; ++i)
            split.validation.push_back(idx[1 + i]);
        for (int i = 0; i < n_test_per_class; ++i)
            split.test.push_back(idx[1 + n_validation_per_class + i]);
    }
    return split;
}

Dataset subset(const Dataset& dataset, const std::vector<int>& indices) {
    Dataset out;
    out.name = dataset.name;
    out.feature_dim = dataset.feature_dim;
    out.length = dataset.length;
    out.dt = dataset.dt;
    out.unit = dataset.unit;
    for (int i : indices)
        out.sequences.push_back(dataset.sequences.at(i));
    for (const auto& label : dataset.classes) {
        const bool present = std::any_of(out.sequences.begin(), out.sequences.end(),
                                         [&](const Sequence& s) { return s.class_label == label; });
        if (present)
            out.classes.push_back(label);
    }
    out.validate();
    return out;
}

SynthSpec SynthSpec::separable(int num_classes, int feature_dim, int length,
                               int trials_per_class, double noise_amplitude) {
    SynthSpec spec;
    spec.name = "synthetic_separable";
    spec.feature_dim = feature_dim;
    spec.length = length;
    spec.trials_per_class = trials_per_class;
    spec.noise_amplitude = noise_amplitude;
    for (int c = 0; c < num_classes; ++c) {
        SynthClassSpec cls;
        cls.label = "class_" + std::string(1, static_cast<char>('a' + c % 26));
        if (c >= 26)
            cls.label += std::to_string(c / 26);
        const double f = 1.0 + 1.0 * c;
        cls.frequencies = {f, 2.0 * f};
        cls.amplitudes = {1.0, 0.35};
        spec.classes.push_back(std::move(cls));
    }
    return spec;
}

SynthSpec SynthSpec::overlapping(int num_classes, int feature_dim, int length,
                                 int trials_per_class, double noise_amplitude) {
    SynthSpec spec = separable(num_classes, feature_dim, length, trials_per_class,
                               noise_amplitude);
    spec.name = "synthetic_overlapping";
    for (int c = 0; c < num_classes; ++c) {
        const double f = 2.0 + 0.35 * c;
        spec.classes[c].frequencies = {1.0, f};
        spec.classes[c].amplitudes = {0.6, 1.0};
    }
    return spec;
}

Dataset synth_generate(const SynthSpec& spec, std::uint64_t seed) {
    if (spec.classes.empty())
        throw ValueError("synthetic spec has no class descriptors");
    if (spec.feature_dim < 1 || spec.length < 2 || spec.trials_per_class < 1)
        throw ValueError("synthetic spec has invalid dimensions");

    constexpr double two_pi = 2.0 * std::numbers::pi;
    Dataset ds;
    ds.name = spec.name;
    ds.feature_dim = spec.feature_dim;
    ds.length = spec.length;
    ds.dt = spec.dt;
    ds.unit = "radians";

    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
        const auto& cls = spec.classes[c];
        if (cls.frequencies.empty() || cls.frequencies.size() != cls.amplitudes.size())
            throw ValueError("class '" + cls.label + "' has mismatched frequencies/amplitudes");
        ds.classes.push_back(cls.label);

        // Class identity: per-feature phases for each harmonic.
        Rng class_rng(mix_seed(seed, 2 * c + 1));
        std::vector<std::vector<double>> phases(cls.frequencies.size());
        for (auto& row : phases) {
            row.resize(spec.feature_dim);
            for (double& p : row)
                p = class_rng.uniform(0.0, two_pi);
        }

        for (int t = 0; t < spec.trials_per_class; ++t) {
            Rng trial_rng(mix_seed(seed, (c + 1) * 100003 + t));
            // Trial variation is smooth: phase offset, gain, and a slow
            // seeded modulation. White jitter would wreck the smoothness
            // metrics that mocap-like data is supposed to satisfy.
            const double th = spec.noise_amplitude;
            double phase_offset = 0.0, gain = 1.0, mod_amp = 0.0;
            std::vector<double> mod_phase(spec.feature_dim, 0.0);
            if (th > 0.0) {
                phase_offset = 2.0 * th * trial_rng.normal();
                gain = 1.0 + 0.5 * th * trial_rng.normal();
                mod_amp = th;
                for (double& p : mod_phase)
                    p = trial_rng.uniform(0.0, two_pi);
            }

            Sequence seq;
            seq.values.resize(spec.length, spec.feature_dim);
            for (int i = 0; i < spec.length; ++i) {
                const double u = static_cast<double>(i) / (spec.length - 1);
                for (int d = 0; d < spec.feature_dim; ++d) {
                    double v = 0.0;
                    for (std::size_t h = 0; h < cls.frequencies.size(); ++h)
                        v += cls.amplitudes[h] *
                             std::sin(two_pi * cls.frequencies[h] * u + phases[h][d] + phase_offset);
                    v = gain * v + mod_amp * std::sin(two_pi * 0.7 * u + mod_phase[d]);
                    seq.values(i, d) = v;
                }
            }
            seq.class_label = cls.label;
            seq.source_id = cls.label + "_t" + std::to_string(t);
            seq.dt = spec.dt;
            ds.sequences.push_back(std::move(seq));
        }
    }
    ds.validate();
    return ds;
}

} // namespace gpdmm
