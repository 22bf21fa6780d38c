#include "gpdmm/plots.hpp"

#include "gpdmm/data.hpp"

#include <algorithm>
#include <fstream>

namespace gpdmm {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kPad = 40.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

struct Frame {
    double xmin, xmax, ymin, ymax;
    double sx(double x) const {
        const double span = xmax - xmin > 0 ? xmax - xmin : 1.0;
        return kPad + (x - xmin) / span * (kWidth - 2 * kPad);
    }
    double sy(double y) const {
        const double span = ymax - ymin > 0 ? ymax - ymin : 1.0;
        return kHeight - kPad - (y - ymin) / span * (kHeight - 2 * kPad);
    }
};

void polyline(std::string& svg, const Frame& frame, const Vector& xs, const Vector& ys,
              const char* color, const char* dash) {
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"1.5\"";
    if (dash[0] != '\0') {
        svg += " stroke-dasharray=\"";
        svg += dash;
        svg += "\"";
    }
    svg += " points=\"";
    for (Index i = 0; i < xs.size(); ++i) {
        if (i)
            svg += ' ';
        svg += format_double(frame.sx(xs[i]));
        svg += ',';
        svg += format_double(frame.sy(ys[i]));
    }
    svg += "\"/>\n";
}

std::string svg_header() {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(kWidth) +
           "\" height=\"" + format_double(kHeight) + "\">\n" +
           "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void write_file(const std::string& svg, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot open '" + path.string() + "' for writing");
    out << svg;
}

} // namespace

void write_latent_plot(const TrainedGPDMM& model, const std::filesystem::path& path) {
    const Matrix& X = model.emission.X;
    if (X.cols() < 2)
        throw ValueError("latent plot needs at least 2 latent dimensions");
    Frame frame{X.col(0).minCoeff(), X.col(0).maxCoeff(),
                X.col(1).minCoeff(), X.col(1).maxCoeff()};

    std::string svg = svg_header();
    const int n = model.sequence_length;
    for (std::size_t s = 0; s < model.sequence_offsets.size(); ++s) {
        const Index off = model.sequence_offsets[s];
        const Vector xs = X.col(0).segment(off, n);
        const Vector ys = X.col(1).segment(off, n);
        const char* color = kPalette[model.sequence_class[s] % 8];
        polyline(svg, frame, xs, ys, color, "");
    }
    // Legend: one label per class.
    double ly = kPad;
    for (int c = 0; c < model.num_classes(); ++c) {
        svg += "<text x=\"" + format_double(kWidth - kPad - 120.0) + "\" y=\"" +
               format_double(ly) + "\" fill=\"" + kPalette[c % 8] +
               "\" font-size=\"12\">" + model.class_labels[c] + "</text>\n";
        ly += 16.0;
    }
    svg += "</svg>\n";
    write_file(svg, path);
}

void write_generation_plot(const Matrix& truth, const Matrix& generated, double dt,
                           const std::filesystem::path& path) {
    if (truth.cols() != generated.cols())
        throw ShapeError("truth and generated feature counts differ");
    const Index features = std::min<Index>(4, truth.cols());
    const Index n = std::max(truth.rows(), generated.rows());

    double ymin = std::min(truth.leftCols(features).minCoeff(),
                           generated.leftCols(features).minCoeff());
    double ymax = std::max(truth.leftCols(features).maxCoeff(),
                           generated.leftCols(features).maxCoeff());
    Frame frame{0.0, dt * static_cast<double>(n - 1), ymin, ymax};

    std::string svg = svg_header();
    for (Index f = 0; f < features; ++f) {
        const char* color = kPalette[f % 8];
        Vector tx(truth.rows()), gx(generated.rows());
        for (Index i = 0; i < truth.rows(); ++i)
            tx[i] = dt * static_cast<double>(i);
        for (Index i = 0; i < generated.rows(); ++i)
            gx[i] = dt * static_cast<double>(i);
        polyline(svg, frame, tx, truth.col(f), color, "");
        polyline(svg, frame, gx, generated.col(f), color, "5,4");
    }
    svg += "<text x=\"" + format_double(kPad) + "\" y=\"" + format_double(kPad / 2) +
           "\" font-size=\"12\">solid = truth, dashed = generated</text>\n";
    svg += "</svg>\n";
    write_file(svg, path);
}

} // namespace gpdmm
