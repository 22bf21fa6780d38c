#pragma once

#include "gpdmm/mixture.hpp"

#include <filesystem>

namespace gpdmm {

inline constexpr const char* kModelMagic = "GPDMM1";

/// Write the versioned model document: a "GPDMM1" magic line followed by a
/// JSON body with the emission model, every expert, priors, class labels and
/// latent config. Saving a loaded model reproduces the file byte for byte.
void save_model(const TrainedGPDMM& model, const std::filesystem::path& path);

TrainedGPDMM load_model(const std::filesystem::path& path);

} // namespace gpdmm
