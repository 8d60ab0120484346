// Batch CLI for the vehicle segmentation + classification pipeline:
// synthetic scenes in, trained models, semantic maps, instances, counts,
// heat maps and metrics out.

#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "vehnet/pipeline.hpp"

namespace vp = vehnet::pipeline;

int main(int argc, char** argv) {
    CLI::App app{"vehnet: aerial vehicle segmentation, classification and counting"};
    app.require_subcommand(1);

    vp::SynthOptions synth;
    CLI::App* c_synth = app.add_subcommand("synth", "generate a synthetic labeled dataset");
    c_synth->add_option("--seed", synth.seed, "base RNG seed");
    c_synth->add_option("--scenes", synth.scenes, "number of scenes (>= 10)");
    c_synth->add_option("--out", synth.out_dir, "output directory")->required();
    c_synth->add_option("--size", synth.scene_size, "scene side length in px");
    c_synth->add_option("--min-vehicles", synth.min_vehicles);
    c_synth->add_option("--max-vehicles", synth.max_vehicles);
    c_synth->add_option("--min-vehicle-side", synth.min_vehicle_side);
    c_synth->add_option("--max-vehicle-side", synth.max_vehicle_side);

    vp::TrainSegOptions tseg;
    CLI::App* c_tseg = app.add_subcommand("train-seg", "train the segmentation network");
    c_tseg->add_option("--data", tseg.data_dir, "dataset directory from synth")->required();
    c_tseg->add_option("--epochs", tseg.epochs);
    c_tseg->add_option("--batch", tseg.batch);
    c_tseg->add_option("--lr", tseg.lr);
    c_tseg->add_option("--lr-drops", tseg.lr_drops)->delimiter(',');
    c_tseg->add_option("--out", tseg.out_path, "output weight file")->required();
    c_tseg->add_option("--window", tseg.window);
    c_tseg->add_option("--stride", tseg.stride);
    c_tseg->add_option("--blocks", tseg.blocks, "encoder channels per block")->delimiter(',');
    c_tseg->add_option("--convs", tseg.convs_per_block, "convolutions per block");
    c_tseg->add_option("--seed", tseg.seed);
    c_tseg->add_option("--encoder-init", tseg.encoder_init, "weight file for encoder initialization");

    vp::TrainClsOptions tcls;
    CLI::App* c_tcls = app.add_subcommand("train-cls", "train the patch classifier");
    c_tcls->add_option("--data", tcls.data_dir, "dataset directory from synth")->required();
    c_tcls->add_option("--epochs", tcls.epochs);
    c_tcls->add_option("--batch", tcls.batch);
    c_tcls->add_option("--lr", tcls.lr);
    c_tcls->add_option("--lr-drops", tcls.lr_drops)->delimiter(',');
    c_tcls->add_option("--out", tcls.out_path, "output weight file")->required();
    c_tcls->add_option("--side", tcls.side, "patch input side");
    c_tcls->add_option("--context", tcls.context, "context margin around gt boxes");
    c_tcls->add_option("--taxonomy", tcls.taxonomy, "class names")->delimiter(',');
    c_tcls->add_option("--seed", tcls.seed);

    vp::SegmentOptions seg;
    CLI::App* c_seg = app.add_subcommand("segment", "sliding-window semantic segmentation");
    c_seg->add_option("--model", seg.model_path)->required();
    c_seg->add_option("--tile", seg.tile_path)->required();
    c_seg->add_option("--window", seg.window);
    c_seg->add_option("--stride", seg.stride);
    c_seg->add_option("--out", seg.out_dir, "probability map directory")->required();
    c_seg->add_option("--batch", seg.batch, "windows per inference batch");
    c_seg->add_option("--threads", seg.threads);
    c_seg->add_option("--classes", seg.classes, "class names")->delimiter(',');

    vp::ExtractOptions ext;
    CLI::App* c_ext = app.add_subcommand("extract", "extract candidate vehicle instances");
    c_ext->add_option("--probmap", ext.probmap_dir)->required();
    c_ext->add_option("--image", ext.image_path)->required();
    c_ext->add_option("--min-area", ext.min_area);
    c_ext->add_option("--context", ext.context);
    c_ext->add_option("--se", ext.se, "structuring element side (odd)");
    c_ext->add_option("--connectivity", ext.connectivity);
    c_ext->add_option("--out", ext.out_csv)->required();
    c_ext->add_option("--class", ext.class_name, "semantic class to extract");
    c_ext->add_option("--tile-id", ext.tile_id, "tile id for the CSV (default: image stem)");

    vp::ClassifyOptions cls;
    CLI::App* c_cls = app.add_subcommand("classify", "classify extracted instances");
    c_cls->add_option("--model", cls.model_path)->required();
    c_cls->add_option("--image", cls.image_path)->required();
    c_cls->add_option("--instances", cls.instances_csv)->required();
    c_cls->add_option("--out", cls.out_csv)->required();
    c_cls->add_option("--context", cls.context);
    c_cls->add_option("--tau", cls.reject_threshold, "rejection threshold (off when < 0)");
    c_cls->add_option("--taxonomy", cls.taxonomy, "class names")->delimiter(',');

    vp::CountOptions cnt;
    CLI::App* c_cnt = app.add_subcommand("count", "count instances per tile");
    c_cnt->add_option("--instances", cnt.instances_csv)->required();
    c_cnt->add_option("--gt", cnt.gt_csv, "ground-truth instances CSV");
    c_cnt->add_option("--out", cnt.out_path)->required();

    vp::HeatmapOptions heat;
    CLI::App* c_heat = app.add_subcommand("heatmap", "vehicle density heat map");
    c_heat->add_option("--instances", heat.instances_csv)->required();
    c_heat->add_option("--size", heat.size, "tile size as HxW")->required();
    c_heat->add_option("--sigma", heat.sigma, "kernel bandwidth in px");
    c_heat->add_option("--out", heat.out_png)->required();
    c_heat->add_option("--color", heat.color_png, "optional color-mapped PNG");
    c_heat->add_option("--downscale", heat.downscale, "render at size/downscale");

    vp::EvalOptions ev;
    CLI::App* c_ev = app.add_subcommand("eval", "segmentation metrics against ground truth");
    c_ev->add_option("--pred", ev.pred_png)->required();
    c_ev->add_option("--gt", ev.gt_png)->required();
    c_ev->add_option("--ignore", ev.ignore_classes, "class names excluded from scoring")
        ->delimiter(',');
    c_ev->add_option("--erode", ev.erode, "border erosion radius in px");
    c_ev->add_option("--out", ev.out_path)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_synth->parsed()) vp::run_synth(synth);
        else if (c_tseg->parsed()) vp::run_train_seg(tseg);
        else if (c_tcls->parsed()) vp::run_train_cls(tcls);
        else if (c_seg->parsed()) vp::run_segment(seg);
        else if (c_ext->parsed()) vp::run_extract(ext);
        else if (c_cls->parsed()) vp::run_classify(cls);
        else if (c_cnt->parsed()) vp::run_count(cnt);
        else if (c_heat->parsed()) vp::run_heatmap(heat);
        else if (c_ev->parsed()) vp::run_eval(ev);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
