#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vehnet/image.hpp"
#include "vehnet/morphology.hpp"
#include "vehnet/semantic_map.hpp"

namespace vehnet {

struct PixelCoord {
    int x = 0;
    int y = 0;
    bool operator==(const PixelCoord&) const = default;
};

/// One candidate vehicle extracted from a semantic map.
struct ObjectInstance {
    int id = 0;
    std::vector<PixelCoord> pixels;  // raster order
    int area = 0;
    int bbox_x0 = 0, bbox_y0 = 0, bbox_x1 = 0, bbox_y1 = 0;  // inclusive tight hull
    double centroid_x = 0.0, centroid_y = 0.0;
    std::optional<std::string> label;
    std::optional<double> confidence;
};

/// Crop of an instance's bounding box expanded by the context margin,
/// clamped to the image; the source rectangle is recorded.
struct ObjectPatch {
    ImageU8 pixels;
    int src_x0 = 0, src_y0 = 0, src_x1 = 0, src_y1 = 0;  // inclusive
};

/// Pixels whose argmax class equals class_name (ties toward the lowest index).
BinaryMask class_mask(const SemanticMap& map, const std::string& class_name);

/// Maximal 4- or 8-connected foreground sets, ids assigned in raster order of
/// each component's first pixel.
std::vector<ObjectInstance> connected_components(const BinaryMask& mask, int connectivity = 8);

/// Keeps instances with area >= min_area; ids are preserved.
std::vector<ObjectInstance> filter_small(std::vector<ObjectInstance> instances, int min_area = 32);

ObjectPatch extract_patch(const ImageU8& image, const ObjectInstance& instance, int context = 16);

struct ExtractParams {
    StructuringElement se = StructuringElement::square(3);
    int connectivity = 8;
    int min_area = 32;
    int context = 16;
    std::string class_name = "car";
};

/// class_mask -> opening -> connected_components -> filter_small ->
/// extract_patch, in that order.
std::vector<std::pair<ObjectInstance, ObjectPatch>> extract_objects(const SemanticMap& map,
                                                                    const ImageU8& image,
                                                                    const ExtractParams& params);

}  // namespace vehnet
