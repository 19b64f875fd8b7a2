#pragma once

#include "gsedit/scene.hpp"

#include <filesystem>

namespace gsedit {

/// Reads a Gaussian-splat PLY (binary little-endian, properties x,y,z, rot_0..3,
/// scale_0..2, opacity, f_dc_0..2; float or double per header). Unknown vertex
/// properties are skipped. The loaded state becomes both current and init.
/// Throws std::runtime_error with a byte offset on malformed input.
GaussianScene load_scene(const std::filesystem::path& path);

/// Writes the scene's current values as double properties so that
/// load_scene(save_scene(s)) reproduces every field bit-exactly.
void save_scene(const GaussianScene& scene, const std::filesystem::path& path);

}  // namespace gsedit
