#include "vehnet/io/annotations.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vehnet::io {

namespace {

constexpr const char* kHeader =
    "tile_id,instance_id,class,confidence,area_px,centroid_x,centroid_y,"
    "bbox_x0,bbox_y0,bbox_x1,bbox_y1";

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

int parse_int(const std::string& s, const char* what, int line_no) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("instances csv line " + std::to_string(line_no) + ": bad " +
                                 what + " '" + s + "'");
    }
}

double parse_real(const std::string& s, const char* what, int line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("instances csv line " + std::to_string(line_no) + ": bad " +
                                 what + " '" + s + "'");
    }
}

}  // namespace

void write_instances_csv(const std::string& path, const std::vector<InstanceRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("instances csv: cannot write '" + path + "'");
    out << kHeader << "\n";
    for (const InstanceRecord& r : records) {
        out << r.tile_id << "," << r.instance_id << "," << r.vehicle_class << ","
            << format_real(r.confidence) << "," << r.area_px << "," << format_real(r.centroid_x)
            << "," << format_real(r.centroid_y) << "," << r.bbox_x0 << "," << r.bbox_y0 << ","
            << r.bbox_x1 << "," << r.bbox_y1 << "\n";
    }
    if (!out) throw std::runtime_error("instances csv: write failed for '" + path + "'");
}

std::vector<InstanceRecord> read_instances_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("instances csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("instances csv '" + path + "': empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader) {
        throw std::runtime_error("instances csv '" + path + "': unexpected header '" + line + "'");
    }
    std::vector<InstanceRecord> records;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> f = split_csv(line);
        if (f.size() != 11) {
            throw std::runtime_error("instances csv line " + std::to_string(line_no) + ": expected 11 fields, got " +
                                     std::to_string(f.size()));
        }
        InstanceRecord r;
        r.tile_id = f[0];
        r.instance_id = parse_int(f[1], "instance_id", line_no);
        r.vehicle_class = f[2];
        r.confidence = parse_real(f[3], "confidence", line_no);
        r.area_px = parse_int(f[4], "area_px", line_no);
        r.centroid_x = parse_real(f[5], "centroid_x", line_no);
        r.centroid_y = parse_real(f[6], "centroid_y", line_no);
        r.bbox_x0 = parse_int(f[7], "bbox_x0", line_no);
        r.bbox_y0 = parse_int(f[8], "bbox_y0", line_no);
        r.bbox_x1 = parse_int(f[9], "bbox_x1", line_no);
        r.bbox_y1 = parse_int(f[10], "bbox_y1", line_no);
        records.push_back(std::move(r));
    }
    return records;
}

CornerParseResult parse_corner_annotations(std::istream& in) {
    CornerParseResult result;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string label;
        ss >> label;
        if (label.empty()) continue;

        double xs[4], ys[4];
        int read = 0;
        while (read < 4 && (ss >> xs[read] >> ys[read])) ++read;
        if (read != 4) {
            result.errors.emplace_back(line_no, "expected 4 corner pairs, got " +
                                                    std::to_string(read));
            continue;
        }
        double extra;
        if (ss >> extra) {
            result.errors.emplace_back(line_no, "trailing values after 4 corners");
            continue;
        }
        CornerBox box;
        box.label = label;
        box.x0 = *std::min_element(xs, xs + 4);
        box.x1 = *std::max_element(xs, xs + 4);
        box.y0 = *std::min_element(ys, ys + 4);
        box.y1 = *std::max_element(ys, ys + 4);
        result.boxes.push_back(std::move(box));
    }
    return result;
}

CornerParseResult parse_corner_annotations_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("annotations: cannot open '" + path + "'");
    return parse_corner_annotations(in);
}

}  // namespace vehnet::io
