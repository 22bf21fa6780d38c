#include "gpdmm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace gpdmm {

double f1_score(const std::vector<int>& predictions, const std::vector<int>& truths) {
    if (predictions.size() != truths.size())
        throw ShapeError("prediction and truth lists have different lengths");
    if (truths.empty())
        throw ValueError("f1_score needs at least one sample");

    std::map<int, int> tp, fp, fn;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (predictions[i] == truths[i])
            ++tp[truths[i]];
        else {
            ++fp[predictions[i]];
            ++fn[truths[i]];
        }
    }
    std::vector<int> classes;
    for (int t : truths)
        if (std::find(classes.begin(), classes.end(), t) == classes.end())
            classes.push_back(t);

    double sum = 0.0;
    for (int c : classes) {
        const double tpc = tp.count(c) ? tp[c] : 0;
        const double fpc = fp.count(c) ? fp[c] : 0;
        const double fnc = fn.count(c) ? fn[c] : 0;
        const double denom = 2.0 * tpc + fpc + fnc;
        sum += denom > 0.0 ? 2.0 * tpc / denom : 0.0;
    }
    return sum / static_cast<double>(classes.size());
}

double discrete_frechet(const Matrix& s1, const Matrix& s2) {
    const Index n = s1.rows(), m = s2.rows();
    if (n < 1 || m < 1)
        throw ValueError("trajectories must be nonempty");
    if (s1.cols() != s2.cols())
        throw ShapeError("trajectories have different feature dimensions");

    // One row of the coupling table at a time.
    std::vector<double> prev(m), curr(m);
    for (Index j = 0; j < m; ++j) {
        const double d = (s1.row(0) - s2.row(j)).norm();
        prev[j] = j == 0 ? d : std::max(prev[j - 1], d);
    }
    for (Index i = 1; i < n; ++i) {
        for (Index j = 0; j < m; ++j) {
            const double d = (s1.row(i) - s2.row(j)).norm();
            double reach = prev[j];
            if (j > 0)
                reach = std::min(reach, std::min(prev[j - 1], curr[j - 1]));
            curr[j] = std::max(reach, d);
        }
        std::swap(prev, curr);
    }
    return prev[m - 1];
}

double frechet_class_normalizer(const std::vector<Matrix>& class_sequences) {
    if (class_sequences.size() < 2)
        throw ValueError("normalizer needs at least two class sequences");
    double best = 0.0;
    for (std::size_t i = 0; i < class_sequences.size(); ++i)
        for (std::size_t j = i + 1; j < class_sequences.size(); ++j)
            best = std::max(best, discrete_frechet(class_sequences[i], class_sequences[j]));
    return best;
}

double normalized_frechet(const Matrix& s_g, const Matrix& s_t,
                          const std::vector<Matrix>& class_sequences) {
    const double denom = frechet_class_normalizer(class_sequences);
    if (!(denom > 0.0))
        throw ValueError("degenerate class: all sequences identical, normalizer is zero");
    return discrete_frechet(s_g, s_t) / denom;
}

FrechetAvgResult frechet_avg(const std::vector<ClassGeneration>& classes) {
    if (classes.empty())
        throw ValueError("frechet_avg needs at least one class");
    FrechetAvgResult result;
    double outer = 0.0;
    int contributing = 0;
    for (const auto& cls : classes) {
        if (cls.pairs.empty()) {
            ++result.excluded_classes;
            result.per_class.emplace_back(std::nullopt);
            continue;
        }
        double inner = 0.0;
        for (const auto& pair : cls.pairs)
            inner += normalized_frechet(pair.generated, pair.truth, cls.normalizer_set);
        inner /= static_cast<double>(cls.pairs.size());
        result.per_class.emplace_back(inner);
        outer += inner;
        ++contributing;
    }
    if (contributing > 0)
        result.value = outer / contributing;
    return result;
}

namespace {

double window_displacement(const Matrix& p, int w) {
    const Index n = p.rows();
    double sum = 0.0;
    for (Index i = 0; i + w < n; ++i)
        sum += (p.row(i + w) - p.row(i)).norm();
    return sum / static_cast<double>(n - w);
}

} // namespace

double dampening(const Matrix& truth, const Matrix& generated, int window) {
    if (window < 1)
        throw ValueError("dampening window must be positive");
    if (truth.rows() <= window || generated.rows() <= window)
        throw ValueError("trajectories must be longer than the dampening window");
    const double dg = window_displacement(generated, window);
    if (dg == 0.0)
        return std::numeric_limits<double>::infinity(); // frozen generation
    return window_displacement(truth, window) / dg;
}

namespace {

/// First derivative: central inside, one-sided at the ends.
Matrix derivative(const Matrix& x, double dt) {
    const Index n = x.rows();
    Matrix d(n, x.cols());
    d.row(0) = (x.row(1) - x.row(0)) / dt;
    for (Index i = 1; i + 1 < n; ++i)
        d.row(i) = (x.row(i + 1) - x.row(i - 1)) / (2.0 * dt);
    d.row(n - 1) = (x.row(n - 1) - x.row(n - 2)) / dt;
    return d;
}

} // namespace

double ldj(const Matrix& trajectory, double dt) {
    if (trajectory.rows() < 4)
        throw ValueError("LDJ needs at least 4 samples");
    if (!(dt > 0.0))
        throw ValueError("LDJ needs a positive time step");

    const Matrix vel = derivative(trajectory, dt);
    const Matrix acc = derivative(vel, dt);
    const Matrix jerk = derivative(acc, dt);

    const double v_peak = vel.rowwise().norm().maxCoeff();
    if (!(v_peak > 0.0))
        throw ValueError("degenerate trajectory: peak speed is zero");

    // Trapezoid rule over ||jerk||^2.
    const Vector j2 = jerk.rowwise().squaredNorm();
    double integral = 0.5 * (j2[0] + j2[j2.size() - 1]) + j2.segment(1, j2.size() - 2).sum();
    integral *= dt;

    const double duration = dt * static_cast<double>(trajectory.rows() - 1);
    return -std::log(duration * duration * duration / (v_peak * v_peak) * integral);
}

double ldj_ratio(const Matrix& truth, const Matrix& generated, double dt) {
    return ldj(generated, dt) / ldj(truth, dt);
}

std::string to_text_table(const MetricsReport& report) {
    const auto fmt = [](const std::optional<double>& v) -> std::string {
        if (!v)
            return "undefined";
        std::ostringstream s;
        s << std::fixed << std::setprecision(4) << *v;
        return s.str();
    };
    std::ostringstream out;
    out << std::left;
    out << std::setw(16) << "class" << std::setw(10) << "f1" << std::setw(12) << "frechet"
        << std::setw(12) << "dampening" << std::setw(12) << "ldj_ratio"
        << std::setw(10) << "correct" << "\n";
    for (const auto& c : report.per_class) {
        std::ostringstream f1s;
        f1s << std::fixed << std::setprecision(4) << c.f1;
        out << std::setw(16) << c.label << std::setw(10) << f1s.str() << std::setw(12)
            << fmt(c.frechet) << std::setw(12) << fmt(c.dampening) << std::setw(12)
            << fmt(c.ldj) << c.correct << "/" << c.total << "\n";
    }
    std::ostringstream f1s;
    f1s << std::fixed << std::setprecision(4) << report.f1_macro;
    out << std::setw(16) << "overall" << std::setw(10) << f1s.str() << std::setw(12)
        << fmt(report.frechet_avg) << std::setw(12) << fmt(report.dampening_ratio)
        << std::setw(12) << fmt(report.ldj_ratio) << report.correct_sequences << "/"
        << report.total_sequences << "\n";
    if (report.excluded_classes > 0)
        out << "warning: " << report.excluded_classes
            << " class(es) had no correctly classified sequences and were excluded\n";
    return out.str();
}

} // namespace gpdmm
