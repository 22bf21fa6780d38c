#pragma once

#include "gpdmm/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace gpdmm {

/// One labeled multivariate trajectory, rows = time steps, columns = features.
struct Sequence {
    Matrix values;
    std::string class_label;
    std::string source_id;
    double dt = 1.0;

    int length() const { return static_cast<int>(values.rows()); }
    int dim() const { return static_cast<int>(values.cols()); }
    void validate() const;
};

struct Dataset {
    std::string name;
    std::vector<Sequence> sequences;
    std::vector<std::string> classes; // ordered unique labels
    int feature_dim = 0;
    int length = 0; // common sequence length after resampling
    double dt = 1.0;
    std::string unit = "radians";

    int num_classes() const { return static_cast<int>(classes.size()); }
    /// Index into `classes` for a sequence, or throws DataError.
    int class_of(int seq_index) const;
    std::vector<int> indices_of_class(int class_index) const;
    void validate() const;
};

/// Train/validation/test partition by sequence index. Train holds exactly one
/// sequence per class.
struct Split {
    std::vector<int> train;
    std::vector<int> validation;
    std::vector<int> test;
};

/// Read a JSON manifest ({dataset_name, feature_count, target_length, dt,
/// unit, classes:[{label, files:[...]}]}) and the CSV sequence files it
/// references, validating and resampling to target_length.
Dataset load_dataset(const std::filesystem::path& manifest_path);

/// Materialize a dataset as manifest + per-sequence CSV files under out_dir.
/// Returns the manifest path.
std::filesystem::path save_dataset(const Dataset& dataset,
                                   const std::filesystem::path& out_dir);

/// Per-feature linear interpolation over normalized time; endpoints exact.
Sequence resample(const Sequence& sequence, int target_length);

/// Deterministic Monte Carlo cross-validation split: one train sequence per
/// class, then n_validation and n_test per class, disjoint.
Split mccv_split(const Dataset& dataset, std::uint64_t seed,
                 int n_validation_per_class, int n_test_per_class);

/// Dataset restricted to the given sequence indices (order preserved).
Dataset subset(const Dataset& dataset, const std::vector<int>& indices);

/// Parametric motion class: a sum of sinusoids with class-specific
/// frequencies; per-feature phases derived deterministically from the seed.
struct SynthClassSpec {
    std::string label;
    std::vector<double> frequencies; // cycles over the sequence duration
    std::vector<double> amplitudes;  // one per frequency
};

struct SynthSpec {
    std::string name = "synthetic";
    int feature_dim = 12;
    int length = 100;
    int trials_per_class = 6;
    double dt = 0.01;
    /// Trial-to-trial variation scale; 0 makes all trials of a class identical.
    double noise_amplitude = 0.0;
    std::vector<SynthClassSpec> classes;

    /// Well-separated frequencies; inter-class Frechet far exceeds intra-class.
    static SynthSpec separable(int num_classes, int feature_dim, int length,
                               int trials_per_class, double noise_amplitude);
    /// Adjacent frequencies and shared harmonics; classes overlap.
    static SynthSpec overlapping(int num_classes, int feature_dim, int length,
                                 int trials_per_class, double noise_amplitude);
};

Dataset synth_generate(const SynthSpec& spec, std::uint64_t seed);

// CSV helpers shared with the CLI (shortest round-trip double formatting).
std::string format_double(double value);
void write_csv(const Matrix& values, const std::filesystem::path& path);
Matrix read_csv(const std::filesystem::path& path);

} // namespace gpdmm
