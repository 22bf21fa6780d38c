#pragma once

#include "gpdmm/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gpdmm {

/// Macro-averaged F1 over the classes present in `truths`. A class with no
/// true positives and no predictions contributes F1 = 0.
double f1_score(const std::vector<int>& predictions, const std::vector<int>& truths);

/// Discrete Frechet distance between two sampled trajectories (rows = points)
/// with Euclidean point distance, via the standard coupling dynamic program.
double discrete_frechet(const Matrix& s1, const Matrix& s2);

/// Largest pairwise discrete Frechet distance within a class set (the
/// normalizer denominator). Needs >= 2 members.
double frechet_class_normalizer(const std::vector<Matrix>& class_sequences);

/// d_F(s_g, s_t) divided by the class normalizer. Throws on a degenerate
/// class (all members identical).
double normalized_frechet(const Matrix& s_g, const Matrix& s_t,
                          const std::vector<Matrix>& class_sequences);

struct GenerationPair {
    Matrix generated;
    Matrix truth;
};

/// Per-class inputs to the averaged distance score: the correctly classified
/// (generated, truth-remainder) pairs plus the class's full test-remainder
/// set used for normalization.
struct ClassGeneration {
    std::string label;
    std::vector<GenerationPair> pairs;
    std::vector<Matrix> normalizer_set;
};

struct FrechetAvgResult {
    /// Mean over classes of mean normalized distances; absent when no class
    /// has a correctly classified pair (undefined, distinct from 0).
    std::optional<double> value;
    int excluded_classes = 0;
    std::vector<std::optional<double>> per_class;
};

FrechetAvgResult frechet_avg(const std::vector<ClassGeneration>& classes);

/// Windowed mean displacement ratio d(truth)/d(generated); > 1 means the
/// generated motion has diminished amplitude. Returns +inf when the generated
/// displacement is exactly zero (frozen output).
double dampening(const Matrix& truth, const Matrix& generated, int window);

/// Log dimensionless jerk: -ln(duration^3 / v_peak^2 * integral ||jerk||^2).
/// Central differences inside, one-sided at the ends, trapezoid integration.
/// Higher (less negative) is smoother.
double ldj(const Matrix& trajectory, double dt);

/// eta_generated / eta_truth. With the typical negative eta values this is
/// > 1 when the generated motion is less smooth than the truth; the plain
/// ratio is returned even if a sign changes, so interpret with care there.
double ldj_ratio(const Matrix& truth, const Matrix& generated, double dt);

struct MetricsReport {
    double f1_macro = 0.0;
    std::optional<double> frechet_avg;      // D_avg
    std::optional<double> dampening_ratio;  // same two-level averaging
    std::optional<double> ldj_ratio;
    int excluded_classes = 0;
    int total_sequences = 0;
    int correct_sequences = 0;

    struct PerClass {
        std::string label;
        double f1 = 0.0;
        std::optional<double> frechet;
        std::optional<double> dampening;
        std::optional<double> ldj;
        int correct = 0;
        int total = 0;
    };
    std::vector<PerClass> per_class;
};

std::string to_text_table(const MetricsReport& report);

} // namespace gpdmm
