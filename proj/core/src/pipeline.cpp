#include "vehnet/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "vehnet/analytics.hpp"
#include "vehnet/classifier.hpp"
#include "vehnet/io/annotations.hpp"
#include "vehnet/io/label_codec.hpp"
#include "vehnet/io/png.hpp"
#include "vehnet/io/probmap.hpp"
#include "vehnet/io/weight_file.hpp"
#include "vehnet/metrics.hpp"
#include "vehnet/objects.hpp"
#include "vehnet/seg/model.hpp"
#include "vehnet/synth.hpp"
#include "vehnet/tiling.hpp"

namespace fs = std::filesystem;

namespace vehnet::pipeline {

namespace {

std::string scene_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scene_%04d", index);
    return buf;
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

struct SplitFile {
    std::vector<std::pair<std::string, std::string>> entries;  // (scene id, split)

    std::vector<std::string> ids_in(const std::string& split) const {
        std::vector<std::string> out;
        for (const auto& [id, s] : entries)
            if (s == split) out.push_back(id);
        return out;
    }
};

SplitFile read_split(const std::string& data_dir) {
    const std::string path = (fs::path(data_dir) / "split.txt").string();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("split file: cannot open '" + path + "'");
    SplitFile split;
    std::string id, part;
    while (in >> id >> part) {
        if (part != "train" && part != "val" && part != "test") {
            throw std::runtime_error("split file '" + path + "': unknown split '" + part + "'");
        }
        split.entries.emplace_back(id, part);
    }
    return split;
}

io::InstanceRecord to_record(const std::string& tile_id, const ObjectInstance& inst,
                             const std::string& fallback_class, double confidence) {
    io::InstanceRecord r;
    r.tile_id = tile_id;
    r.instance_id = inst.id;
    r.vehicle_class = inst.label.value_or(fallback_class);
    r.confidence = inst.confidence.value_or(confidence);
    r.area_px = inst.area;
    r.centroid_x = inst.centroid_x;
    r.centroid_y = inst.centroid_y;
    r.bbox_x0 = inst.bbox_x0;
    r.bbox_y0 = inst.bbox_y0;
    r.bbox_x1 = inst.bbox_x1;
    r.bbox_y1 = inst.bbox_y1;
    return r;
}

nn::LrSchedule make_schedule(double lr, const std::vector<int>& drops) {
    nn::LrSchedule s;
    s.base_rate = lr;
    s.drop_epochs = drops;
    return s;
}

constexpr const char* kMetaPrefix = "meta/";

void add_meta(io::NamedTensors& file, const std::string& key, const std::vector<float>& values) {
    TensorT<float> t({values.size()});
    for (std::size_t i = 0; i < values.size(); ++i) t[i] = values[i];
    file.tensors.emplace(std::string(kMetaPrefix) + key, std::move(t));
}

std::vector<float> get_meta(const io::NamedTensors& file, const std::string& key) {
    auto it = file.tensors.find(std::string(kMetaPrefix) + key);
    if (it == file.tensors.end()) {
        throw std::runtime_error("weights: missing metadata entry '" + key + "'");
    }
    std::vector<float> out(it->second.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = it->second[i];
    return out;
}

io::NamedTensors strip_meta(io::NamedTensors file) {
    for (auto it = file.tensors.begin(); it != file.tensors.end();) {
        if (it->first.rfind(kMetaPrefix, 0) == 0) it = file.tensors.erase(it);
        else ++it;
    }
    return file;
}

VehicleTaxonomy taxonomy_from(const std::vector<std::string>& names) {
    if (names.empty()) return VehicleTaxonomy::potsdam4();
    if (names.size() < 2) throw std::runtime_error("taxonomy: need at least 2 classes");
    return VehicleTaxonomy{names};
}

// fixed blue->green->red ramp for the optional color heat map rendering
void ramp_color(float v, std::uint8_t& r, std::uint8_t& g, std::uint8_t& b) {
    const float t = std::min(1.0f, std::max(0.0f, v));
    const float rr = std::min(1.0f, std::max(0.0f, 1.5f - std::abs(4.0f * t - 3.0f)));
    const float gg = std::min(1.0f, std::max(0.0f, 1.5f - std::abs(4.0f * t - 2.0f)));
    const float bb = std::min(1.0f, std::max(0.0f, 1.5f - std::abs(4.0f * t - 1.0f)));
    r = static_cast<std::uint8_t>(std::lround(rr * 255.0f));
    g = static_cast<std::uint8_t>(std::lround(gg * 255.0f));
    b = static_cast<std::uint8_t>(std::lround(bb * 255.0f));
}

}  // namespace

void run_synth(const SynthOptions& opt) {
    if (opt.scenes < 10) throw std::runtime_error("synth: need at least 10 scenes for a split");
    if (opt.out_dir.empty()) throw std::runtime_error("synth: missing output directory");
    fs::create_directories(opt.out_dir);

    synth::SceneSpec spec;
    spec.seed = opt.seed;
    spec.height = spec.width = opt.scene_size;
    spec.min_vehicles = opt.min_vehicles;
    spec.max_vehicles = opt.max_vehicles;
    spec.min_vehicle_side = opt.min_vehicle_side;
    spec.max_vehicle_side = opt.max_vehicle_side;

    const synth::SynthDataset dataset = synth::generate_dataset(spec, opt.scenes);
    const io::LabelColorMap colors = io::LabelColorMap::potsdam();
    const std::vector<std::string> palette = synth::scene_palette();

    for (int i = 0; i < opt.scenes; ++i) {
        const synth::Scene& scene = dataset.scenes[i];
        const std::string id = scene_name(i);
        io::write_png_rgb8((fs::path(opt.out_dir) / (id + ".png")).string(), scene.image);

        // scene labels already follow the codec's class order
        io::write_label_png((fs::path(opt.out_dir) / (id + "_labels.png")).string(), scene.labels,
                            colors);

        std::vector<io::InstanceRecord> records;
        records.reserve(scene.instances.size());
        for (const ObjectInstance& inst : scene.instances)
            records.push_back(to_record(id, inst, "car", 1.0));
        io::write_instances_csv((fs::path(opt.out_dir) / (id + "_gt.csv")).string(), records);
    }

    std::ofstream split_out((fs::path(opt.out_dir) / "split.txt").string(), std::ios::trunc);
    if (!split_out) throw std::runtime_error("synth: cannot write split.txt");
    auto write_ids = [&](const std::vector<int>& ids, const char* part) {
        for (int i : ids) split_out << scene_name(i) << " " << part << "\n";
    };
    write_ids(dataset.split.train, "train");
    write_ids(dataset.split.val, "val");
    write_ids(dataset.split.test, "test");
}

void run_train_seg(const TrainSegOptions& opt) {
    const SplitFile split = read_split(opt.data_dir);
    const io::LabelColorMap colors = io::LabelColorMap::potsdam();

    seg::EncoderDecoderSpec spec;
    spec.block_channels = opt.blocks;
    spec.convs_per_block = opt.convs_per_block;
    // class list: the codec classes minus clutter, in codec order
    spec.class_list = seg::potsdam_segmentation_classes();

    std::vector<seg::TrainSample> samples;
    for (const std::string& id : split.ids_in("train")) {
        const ImageU8 image =
            io::read_png_rgb8((fs::path(opt.data_dir) / (id + ".png")).string());
        const LabelMap raw =
            io::read_label_png((fs::path(opt.data_dir) / (id + "_labels.png")).string(), colors);
        const LabelMap labels = remap_labels(raw, colors.class_names(), spec.class_list);
        for (auto& [img, lab] : extract_training_windows(image, labels,
                                                         static_cast<std::size_t>(opt.window),
                                                         static_cast<std::size_t>(opt.stride))) {
            samples.push_back({seg::image_to_tensor(img), std::move(lab)});
        }
    }
    if (samples.empty()) throw std::runtime_error("train-seg: no training windows found");

    seg::SegNet model(spec, opt.seed);
    if (!opt.encoder_init.empty()) {
        const auto report = seg::load_encoder_weights(model, opt.encoder_init);
        if (!opt.quiet) {
            std::cout << "encoder init: matched " << report.matched.size() << ", skipped "
                      << report.unmatched.size() << "\n";
        }
    }
    const seg::TrainReport report = train_segmentation(
        model, samples, opt.epochs, opt.batch, make_schedule(opt.lr, opt.lr_drops), opt.seed + 1);
    if (!opt.quiet) {
        for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
            std::cout << "epoch " << e << " loss " << format_real(report.epoch_loss[e]) << "\n";
        }
    }

    io::NamedTensors file;
    for (const auto& [name, p] : model.params()) file.tensors.emplace(name, p.value.cast<float>());
    add_meta(file, "arch", {1.0f});
    add_meta(file, "input_channels", {static_cast<float>(spec.input_channels)});
    std::vector<float> blocks(spec.block_channels.begin(), spec.block_channels.end());
    add_meta(file, "block_channels", blocks);
    add_meta(file, "convs_per_block", {static_cast<float>(spec.convs_per_block)});
    add_meta(file, "kernel", {static_cast<float>(spec.kernel)});
    add_meta(file, "class_count", {static_cast<float>(spec.class_list.size())});
    io::save_weights(opt.out_path, file);
}

void run_train_cls(const TrainClsOptions& opt) {
    const SplitFile split = read_split(opt.data_dir);
    const VehicleTaxonomy taxonomy = taxonomy_from(opt.taxonomy);

    std::vector<PatchSample> samples;
    for (const std::string& id : split.ids_in("train")) {
        const ImageU8 image =
            io::read_png_rgb8((fs::path(opt.data_dir) / (id + ".png")).string());
        const auto records =
            io::read_instances_csv((fs::path(opt.data_dir) / (id + "_gt.csv")).string());
        for (const io::InstanceRecord& r : records) {
            const int label = taxonomy.index_of(r.vehicle_class);
            if (label < 0) {
                throw std::runtime_error("train-cls: class '" + r.vehicle_class +
                                         "' not in the taxonomy");
            }
            ObjectInstance inst;
            inst.id = r.instance_id;
            inst.bbox_x0 = r.bbox_x0;
            inst.bbox_y0 = r.bbox_y0;
            inst.bbox_x1 = r.bbox_x1;
            inst.bbox_y1 = r.bbox_y1;
            const ObjectPatch patch = extract_patch(image, inst, opt.context);
            PatchSample base{resize_patch(patch.pixels, static_cast<std::size_t>(opt.side)), label,
                             0, r.instance_id};
            for (PatchSample& s : augment(base)) samples.push_back(std::move(s));
        }
    }
    if (samples.empty()) throw std::runtime_error("train-cls: no training patches found");

    PatchClassifier model(taxonomy, opt.side, opt.seed);
    const ClassifierTrainReport report = train_classifier(
        model, samples, opt.epochs, opt.batch, make_schedule(opt.lr, opt.lr_drops), opt.seed + 1);
    if (!opt.quiet) {
        for (const std::string& w : report.warnings) std::cout << "warning: " << w << "\n";
        for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
            std::cout << "epoch " << e << " loss " << format_real(report.epoch_loss[e]) << "\n";
        }
    }

    io::NamedTensors file;
    for (const auto& [name, p] : model.params()) file.tensors.emplace(name, p.value.cast<float>());
    add_meta(file, "cls_input_side", {static_cast<float>(opt.side)});
    add_meta(file, "class_count", {static_cast<float>(taxonomy.size())});
    io::save_weights(opt.out_path, file);
}

void run_segment(const SegmentOptions& opt) {
    const io::NamedTensors file = io::load_weights(opt.model_path);
    seg::EncoderDecoderSpec spec;
    spec.input_channels = static_cast<int>(get_meta(file, "input_channels")[0]);
    spec.block_channels.clear();
    for (float c : get_meta(file, "block_channels")) spec.block_channels.push_back(static_cast<int>(c));
    spec.convs_per_block = static_cast<int>(get_meta(file, "convs_per_block")[0]);
    spec.kernel = static_cast<int>(get_meta(file, "kernel")[0]);
    spec.class_list = opt.classes.empty() ? seg::potsdam_segmentation_classes() : opt.classes;
    const std::size_t class_count = static_cast<std::size_t>(get_meta(file, "class_count")[0]);
    if (spec.class_list.size() != class_count) {
        throw std::runtime_error("segment: model has " + std::to_string(class_count) +
                                 " classes but the class list names " +
                                 std::to_string(spec.class_list.size()));
    }

    seg::SegNet model(spec, 0);
    io::load_all_into(model.params(), strip_meta(file));

    const ImageU8 tile = io::read_png_rgb8(opt.tile_path);
    const TileGrid grid = make_grid(tile.height, tile.width,
                                    static_cast<std::size_t>(opt.window),
                                    static_cast<std::size_t>(opt.stride));
    const auto positions = grid.positions();
    const Tensor tile_tensor = seg::image_to_tensor(tile);

    // cut windows, run in batches, commit in grid order
    const std::size_t batch_size = std::max(1, opt.batch);
    const std::size_t n_batches = (positions.size() + batch_size - 1) / batch_size;
    std::vector<std::vector<SemanticMap>> batch_results(n_batches);

    auto window_tensor = [&](std::size_t idx) {
        const auto [y0, x0] = positions[idx];
        const std::size_t w = grid.window;
        Tensor t({static_cast<std::size_t>(spec.input_channels), w, w});
        for (std::size_t c = 0; c < t.dim(0); ++c)
            for (std::size_t y = 0; y < w; ++y)
                for (std::size_t x = 0; x < w; ++x)
                    t[(c * w + y) * w + x] =
                        tile_tensor[(c * tile.height + (y0 + y)) * tile.width + (x0 + x)];
        return t;
    };

    auto process_batch = [&](seg::SegNet& worker_model, std::size_t b) {
        const std::size_t start = b * batch_size;
        const std::size_t end = std::min(positions.size(), start + batch_size);
        std::vector<Tensor> windows;
        std::vector<const Tensor*> ptrs;
        windows.reserve(end - start);
        for (std::size_t i = start; i < end; ++i) windows.push_back(window_tensor(i));
        for (const Tensor& w : windows) ptrs.push_back(&w);
        batch_results[b] = worker_model.predict_batch(seg::stack_batch(ptrs));
    };

    const int threads = std::max(1, opt.threads);
    if (threads == 1 || n_batches <= 1) {
        for (std::size_t b = 0; b < n_batches; ++b) process_batch(model, b);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                seg::SegNet worker = model.clone();
                for (std::size_t b = next.fetch_add(1); b < n_batches; b = next.fetch_add(1)) {
                    process_batch(worker, b);
                }
            });
        }
        for (std::thread& t : pool) t.join();
    }

    StitchAccumulator acc(spec.class_list.size(), tile.height, tile.width);
    std::size_t idx = 0;
    for (std::size_t b = 0; b < n_batches; ++b) {
        for (SemanticMap& m : batch_results[b]) {
            acc.add(positions[idx].first, positions[idx].second, m);
            ++idx;
        }
    }
    io::write_probmap(opt.out_dir, acc.finalize(spec.class_list));
}

void run_extract(const ExtractOptions& opt) {
    const SemanticMap map = io::read_probmap(opt.probmap_dir);
    const ImageU8 image = io::read_png_rgb8(opt.image_path);
    ExtractParams params;
    params.se = StructuringElement::square(opt.se);
    params.connectivity = opt.connectivity;
    params.min_area = opt.min_area;
    params.context = opt.context;
    params.class_name = opt.class_name;

    const std::string tile_id =
        opt.tile_id.empty() ? fs::path(opt.image_path).stem().string() : opt.tile_id;

    std::vector<io::InstanceRecord> records;
    for (const auto& [inst, patch] : extract_objects(map, image, params)) {
        records.push_back(to_record(tile_id, inst, "unlabeled", 0.0));
    }
    io::write_instances_csv(opt.out_csv, records);
}

void run_classify(const ClassifyOptions& opt) {
    const io::NamedTensors file = io::load_weights(opt.model_path);
    const VehicleTaxonomy taxonomy = taxonomy_from(opt.taxonomy);
    const int side = static_cast<int>(get_meta(file, "cls_input_side")[0]);
    const std::size_t class_count = static_cast<std::size_t>(get_meta(file, "class_count")[0]);
    if (taxonomy.size() != class_count) {
        throw std::runtime_error("classify: model has " + std::to_string(class_count) +
                                 " classes but the taxonomy names " +
                                 std::to_string(taxonomy.size()));
    }
    PatchClassifier model(taxonomy, side, 0);
    io::load_all_into(model.params(), strip_meta(file));

    const ImageU8 image = io::read_png_rgb8(opt.image_path);
    std::vector<io::InstanceRecord> records = io::read_instances_csv(opt.instances_csv);
    for (io::InstanceRecord& r : records) {
        ObjectInstance inst;
        inst.id = r.instance_id;
        inst.bbox_x0 = r.bbox_x0;
        inst.bbox_y0 = r.bbox_y0;
        inst.bbox_x1 = r.bbox_x1;
        inst.bbox_y1 = r.bbox_y1;
        const ObjectPatch patch = extract_patch(image, inst, opt.context);
        const Classification c = model.classify(patch.pixels, opt.reject_threshold);
        r.vehicle_class = c.rejected ? "rejected" : c.label;
        r.confidence = c.confidence;
    }
    io::write_instances_csv(opt.out_csv, records);
}

void run_count(const CountOptions& opt) {
    const auto predictions = io::read_instances_csv(opt.instances_csv);
    std::map<std::string, int> pred_counts;
    for (const auto& r : predictions) ++pred_counts[r.tile_id];

    std::ofstream out(opt.out_path, std::ios::trunc);
    if (!out) throw std::runtime_error("count: cannot write '" + opt.out_path + "'");

    if (opt.gt_csv.empty()) {
        int total = 0;
        for (const auto& [tile, n] : pred_counts) {
            out << "tile/" << tile << "/predicted " << n << "\n";
            total += n;
        }
        out << "total_predicted " << total << "\n";
        return;
    }

    std::map<std::string, int> gt_counts;
    for (const auto& r : io::read_instances_csv(opt.gt_csv)) ++gt_counts[r.tile_id];

    std::vector<std::tuple<std::string, int, int>> pairs;
    for (const auto& [tile, gt] : gt_counts) {
        const auto it = pred_counts.find(tile);
        pairs.emplace_back(tile, gt, it == pred_counts.end() ? 0 : it->second);
    }
    for (const auto& [tile, n] : pred_counts) {
        if (!gt_counts.count(tile)) pairs.emplace_back(tile, 0, n);
    }

    const CountReport report = counting_report(pairs);
    for (const TileCount& t : report.tiles) {
        out << "tile/" << t.tile_id << "/ground_truth " << t.ground_truth << "\n";
        out << "tile/" << t.tile_id << "/predicted " << t.predicted << "\n";
        if (t.relative_error) {
            out << "tile/" << t.tile_id << "/relative_error " << format_real(*t.relative_error)
                << "\n";
        } else {
            out << "tile/" << t.tile_id << "/absolute_count " << t.predicted << "\n";
        }
    }
    if (report.mean_relative_error) {
        out << "mean_relative_error " << format_real(*report.mean_relative_error) << "\n";
    }
}

void run_heatmap(const HeatmapOptions& opt) {
    std::size_t height = 0, width = 0;
    {
        std::istringstream ss(opt.size);
        char sep = 0;
        if (!(ss >> height >> sep >> width) || (sep != 'x' && sep != 'X') || height == 0 ||
            width == 0) {
            throw std::runtime_error("heatmap: --size expects HxW, got '" + opt.size + "'");
        }
    }
    if (opt.downscale < 1) throw std::runtime_error("heatmap: --downscale must be >= 1");
    const double inv = 1.0 / opt.downscale;
    height = std::max<std::size_t>(1, height / opt.downscale);
    width = std::max<std::size_t>(1, width / opt.downscale);
    std::vector<std::pair<double, double>> centroids;
    for (const auto& r : io::read_instances_csv(opt.instances_csv)) {
        centroids.emplace_back(std::min(r.centroid_x * inv, width - 1.0),
                               std::min(r.centroid_y * inv, height - 1.0));
    }
    const HeatMap map = density_heatmap(centroids, height, width, opt.sigma * inv);

    ImageU8 gray(height, width, 1);
    for (std::size_t i = 0; i < map.values.size(); ++i) {
        gray.pixels[i] = static_cast<std::uint8_t>(std::lround(map.values[i] * 255.0f));
    }
    io::write_png_gray8(opt.out_png, gray);

    if (!opt.color_png.empty()) {
        ImageU8 color(height, width, 3);
        for (std::size_t i = 0; i < map.values.size(); ++i) {
            ramp_color(map.values[i], color.pixels[3 * i], color.pixels[3 * i + 1],
                       color.pixels[3 * i + 2]);
        }
        io::write_png_rgb8(opt.color_png, color);
    }
}

void run_eval(const EvalOptions& opt) {
    const io::LabelColorMap colors = io::LabelColorMap::potsdam();
    const LabelMap pred = io::read_label_png(opt.pred_png, colors);
    const LabelMap gt = io::read_label_png(opt.gt_png, colors);
    const std::vector<std::string> classes = colors.class_names();

    std::vector<int> ignore;
    for (const std::string& name : opt.ignore_classes) {
        if (name.empty()) continue;
        const int idx = colors.index_of(name);
        if (idx < 0) throw std::runtime_error("eval: unknown class '" + name + "'");
        ignore.push_back(idx);
    }

    const BinaryMask border = boundary_ignore_mask(gt, opt.erode);
    const ConfusionMatrix cm = confusion(pred, gt, classes, ignore, &border);
    const EvalReport report = derive_report(cm);

    std::ofstream out(opt.out_path, std::ios::trunc);
    if (!out) throw std::runtime_error("eval: cannot write '" + opt.out_path + "'");
    out << "overall_accuracy " << format_real(report.overall_accuracy) << "\n";
    for (std::size_t k = 0; k < classes.size(); ++k) {
        const ClassScore& s = report.per_class[k];
        if (!s.present_in_gt && std::find(ignore.begin(), ignore.end(), static_cast<int>(k)) !=
                                    ignore.end()) {
            continue;  // excluded classes do not appear in the report
        }
        out << "class/" << classes[k] << "/precision " << format_real(s.precision) << "\n";
        out << "class/" << classes[k] << "/recall " << format_real(s.recall) << "\n";
        out << "class/" << classes[k] << "/f1 " << format_real(s.f1) << "\n";
        out << "class/" << classes[k] << "/iou " << format_real(s.iou) << "\n";
    }
    out << "mean_iou " << format_real(report.mean_iou) << "\n";
    out << "evaluated_pixels " << cm.total() << "\n";
    out << "ignored_pixels " << cm.ignored << "\n";

    if (!opt.quiet) {
        std::cout << "class                 precision   recall       f1      iou\n";
        for (std::size_t k = 0; k < classes.size(); ++k) {
            const ClassScore& s = report.per_class[k];
            char row[160];
            std::snprintf(row, sizeof(row), "%-20s %9.4f %8.4f %8.4f %8.4f\n", classes[k].c_str(),
                          s.precision, s.recall, s.f1, s.iou);
            std::cout << row;
        }
        std::cout << "overall accuracy " << format_real(report.overall_accuracy) << ", mean IoU "
                  << format_real(report.mean_iou) << "\n";
    }
}

ImageU8 downsample(const ImageU8& image, double src_gsd, double dst_gsd) {
    if (src_gsd <= 0.0 || dst_gsd <= 0.0) {
        throw std::invalid_argument("downsample: ground sampling distances must be > 0");
    }
    if (dst_gsd <= src_gsd) {
        throw std::invalid_argument("downsample: dst_gsd must be coarser than src_gsd");
    }
    const double factor = src_gsd / dst_gsd;
    const std::size_t oh = static_cast<std::size_t>(std::lround(image.height * factor));
    const std::size_t ow = static_cast<std::size_t>(std::lround(image.width * factor));
    if (oh == 0 || ow == 0) throw std::invalid_argument("downsample: output collapses to zero size");
    return resize_bilinear(image, oh, ow);
}

}  // namespace vehnet::pipeline
