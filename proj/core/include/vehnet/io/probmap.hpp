#pragma once

#include <string>

#include "vehnet/semantic_map.hpp"

namespace vehnet::io {

/// Probability-map directory layout: manifest.txt (one class name per line,
/// in order) plus class_<index>.png, a 16-bit grayscale PNG storing
/// round(p * 65535) per pixel.
void write_probmap(const std::string& dir, const SemanticMap& map);

SemanticMap read_probmap(const std::string& dir);

}  // namespace vehnet::io
