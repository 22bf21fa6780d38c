#pragma once

#include "gpdmm/mixture.hpp"

#include <filesystem>

namespace gpdmm {

/// First two latent dimensions of the training latents, one polyline per
/// training sequence, colored by class. Standalone SVG.
void write_latent_plot(const TrainedGPDMM& model, const std::filesystem::path& path);

/// Truth vs generated traces over time for the first few features. SVG.
void write_generation_plot(const Matrix& truth, const Matrix& generated, double dt,
                           const std::filesystem::path& path);

} // namespace gpdmm
