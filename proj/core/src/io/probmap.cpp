#include "vehnet/io/probmap.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "vehnet/io/png.hpp"

namespace vehnet::io {

namespace {

std::string class_file(const std::string& dir, std::size_t k) {
    char name[32];
    std::snprintf(name, sizeof(name), "class_%03zu.png", k);
    return (std::filesystem::path(dir) / name).string();
}

}  // namespace

void write_probmap(const std::string& dir, const SemanticMap& map) {
    std::filesystem::create_directories(dir);
    const std::string manifest = (std::filesystem::path(dir) / "manifest.txt").string();
    std::ofstream out(manifest, std::ios::trunc);
    if (!out) throw std::runtime_error("probmap: cannot write '" + manifest + "'");
    for (const std::string& name : map.class_list) out << name << "\n";
    out.close();

    for (std::size_t k = 0; k < map.class_count(); ++k) {
        ImageU16 plane;
        plane.height = map.height;
        plane.width = map.width;
        plane.pixels.resize(map.height * map.width);
        const float* src = map.prob.data() + k * map.height * map.width;
        for (std::size_t i = 0; i < plane.pixels.size(); ++i) {
            const float p = std::min(1.0f, std::max(0.0f, src[i]));
            plane.pixels[i] = static_cast<std::uint16_t>(std::lround(p * 65535.0f));
        }
        write_png_gray16(class_file(dir, k), plane);
    }
}

SemanticMap read_probmap(const std::string& dir) {
    const std::string manifest = (std::filesystem::path(dir) / "manifest.txt").string();
    std::ifstream in(manifest);
    if (!in) throw std::runtime_error("probmap: cannot open '" + manifest + "'");
    std::vector<std::string> classes;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) classes.push_back(line);
    }
    if (classes.empty()) throw std::runtime_error("probmap: empty manifest '" + manifest + "'");

    SemanticMap map;
    for (std::size_t k = 0; k < classes.size(); ++k) {
        const ImageU16 plane = read_png_gray16(class_file(dir, k));
        if (k == 0) {
            map = SemanticMap(classes, plane.height, plane.width);
        } else if (plane.height != map.height || plane.width != map.width) {
            throw std::runtime_error("probmap: class plane " + std::to_string(k) +
                                     " size differs from plane 0");
        }
        float* dst = map.prob.data() + k * map.height * map.width;
        for (std::size_t i = 0; i < plane.pixels.size(); ++i) {
            dst[i] = static_cast<float>(plane.pixels[i]) / 65535.0f;
        }
    }
    return map;
}

}  // namespace vehnet::io
