#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vehnet::io {

/// One instance line of the pipeline CSVs; the header is fixed:
/// tile_id,instance_id,class,confidence,area_px,centroid_x,centroid_y,
/// bbox_x0,bbox_y0,bbox_x1,bbox_y1
struct InstanceRecord {
    std::string tile_id;
    int instance_id = 0;
    std::string vehicle_class;
    double confidence = 0.0;
    int area_px = 0;
    double centroid_x = 0.0, centroid_y = 0.0;
    int bbox_x0 = 0, bbox_y0 = 0, bbox_x1 = 0, bbox_y1 = 0;
};

void write_instances_csv(const std::string& path, const std::vector<InstanceRecord>& records);
std::vector<InstanceRecord> read_instances_csv(const std::string& path);

/// Axis-aligned hull of a 4-corner annotation.
struct CornerBox {
    std::string label;
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

struct CornerParseResult {
    std::vector<CornerBox> boxes;
    std::vector<std::pair<int, std::string>> errors;  // (1-based line, message)
};

/// Line-oriented records: label then 4 whitespace-separated (x, y) corner
/// pairs. Malformed lines are reported with their line number; parsing
/// continues.
CornerParseResult parse_corner_annotations(std::istream& in);
CornerParseResult parse_corner_annotations_file(const std::string& path);

}  // namespace vehnet::io
