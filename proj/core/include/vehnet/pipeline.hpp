#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vehnet/image.hpp"

namespace vehnet::pipeline {

/// Batch command surface shared by the CLI binary and the integration tests.
/// Every run_* function reads and writes only its declared paths and throws
/// on failure; outputs are byte-identical across runs given identical inputs
/// and seeds.

struct SynthOptions {
    std::uint64_t seed = 1;
    int scenes = 20;
    std::string out_dir;
    std::size_t scene_size = 256;
    int min_vehicles = 6;
    int max_vehicles = 12;
    int min_vehicle_side = 10;
    int max_vehicle_side = 20;
};
void run_synth(const SynthOptions& opt);

struct TrainSegOptions {
    std::string data_dir;
    int epochs = 10;
    int batch = 10;
    double lr = 0.1;
    std::vector<int> lr_drops = {3, 8};
    std::string out_path;
    int window = 128;
    int stride = 32;
    std::vector<int> blocks = {16, 32, 64};
    int convs_per_block = 2;
    std::uint64_t seed = 42;
    std::string encoder_init;  // optional weight file for encoder initialization
    bool quiet = false;
};
void run_train_seg(const TrainSegOptions& opt);

struct TrainClsOptions {
    std::string data_dir;
    int epochs = 50;
    int batch = 32;
    double lr = 0.001;
    std::vector<int> lr_drops = {30};
    std::string out_path;
    int side = 32;
    int context = 16;
    std::vector<std::string> taxonomy;  // empty -> Potsdam-4
    std::uint64_t seed = 42;
    bool quiet = false;
};
void run_train_cls(const TrainClsOptions& opt);

struct SegmentOptions {
    std::string model_path;
    std::string tile_path;
    int window = 128;
    int stride = 64;
    std::string out_dir;
    int batch = 8;
    int threads = 1;
    std::vector<std::string> classes;  // empty -> Potsdam segmentation classes
};
void run_segment(const SegmentOptions& opt);

struct ExtractOptions {
    std::string probmap_dir;
    std::string image_path;
    int min_area = 32;
    int context = 16;
    int se = 3;
    int connectivity = 8;
    std::string out_csv;
    std::string class_name = "car";
    std::string tile_id;  // empty -> image filename stem
};
void run_extract(const ExtractOptions& opt);

struct ClassifyOptions {
    std::string model_path;
    std::string image_path;
    std::string instances_csv;
    std::string out_csv;
    int context = 16;
    double reject_threshold = -1.0;  // < 0 disables rejection
    std::vector<std::string> taxonomy;  // empty -> Potsdam-4
};
void run_classify(const ClassifyOptions& opt);

struct CountOptions {
    std::string instances_csv;
    std::string gt_csv;  // optional
    std::string out_path;
};
void run_count(const CountOptions& opt);

struct HeatmapOptions {
    std::string instances_csv;
    std::string size;  // tile size as "HxW"
    double sigma = 48.0;
    std::string out_png;
    std::string color_png;  // optional color-mapped rendering
    int downscale = 1;      // render at size/downscale, coordinates rescaled
};
void run_heatmap(const HeatmapOptions& opt);

struct EvalOptions {
    std::string pred_png;
    std::string gt_png;
    std::vector<std::string> ignore_classes = {"clutter"};
    int erode = 3;
    std::string out_path;
    bool quiet = false;
};
void run_eval(const EvalOptions& opt);

/// Bilinear resample between ground sampling distances; dst_gsd must be
/// coarser than src_gsd. 5 cm -> 12.5 cm turns 6000 px into 2400 px.
ImageU8 downsample(const ImageU8& image, double src_gsd, double dst_gsd);

}  // namespace vehnet::pipeline
