#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vehnet/image.hpp"
#include "vehnet/nn/layers.hpp"
#include "vehnet/nn/optim.hpp"

namespace vehnet {

struct VehicleTaxonomy {
    std::vector<std::string> classes;

    static VehicleTaxonomy vedai11();
    static VehicleTaxonomy potsdam4();

    std::size_t size() const { return classes.size(); }
    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < classes.size(); ++i)
            if (classes[i] == name) return static_cast<int>(i);
        return -1;
    }
};

struct PatchSample {
    ImageU8 patch;
    int label = 0;  // taxonomy index
    int tile_id = -1, instance_id = -1;
};

/// The 8 dihedral-group variants of a square patch (4 rotations x optional
/// horizontal mirror); labels are copied.
std::vector<PatchSample> augment(const PatchSample& sample);

ImageU8 rotate90(const ImageU8& image);   // counterclockwise
ImageU8 mirror_horizontal(const ImageU8& image);

/// Bilinear resample to side x side (center-aligned sampling, edge clamped).
ImageU8 resize_patch(const ImageU8& patch, std::size_t side);

struct Classification {
    int label_index = -1;
    std::string label;
    double confidence = 0.0;
    std::vector<double> probabilities;
    bool rejected = false;
};

/// Small LeNet-lineage convnet over fixed-size color patches:
/// conv(5x5,6)-pool-conv(5x5,16)-pool-dense(120)-dense(84)-dense(K).
class PatchClassifier {
public:
    PatchClassifier(VehicleTaxonomy taxonomy, int input_side, std::uint64_t seed);

    Tensor forward(const Tensor& batch, bool train);  // (N,3,S,S) -> (N,K)
    void backward(const Tensor& grad_logits);

    /// Patches not already at the model side are resized first. With
    /// reject_threshold tau >= 0, a patch whose confidence falls below tau is
    /// flagged rejected; tau >= 1 rejects everything. Negative tau disables
    /// rejection.
    Classification classify(const ImageU8& patch, double reject_threshold = -1.0);

    const VehicleTaxonomy& taxonomy() const { return taxonomy_; }
    int input_side() const { return input_side_; }
    nn::ParamStore& params() { return store_; }
    const nn::ParamStore& params() const { return store_; }

private:
    VehicleTaxonomy taxonomy_;
    int input_side_;
    nn::ParamStore store_;
    std::mt19937 rng_;
    Shape conv_out_shape_;
    nn::Conv2dLayer conv1_;
    nn::ReluLayer relu1_;
    nn::MaxPoolLayer pool1_;
    nn::Conv2dLayer conv2_;
    nn::ReluLayer relu2_;
    nn::MaxPoolLayer pool2_;
    nn::LinearLayer fc1_;
    nn::ReluLayer relu3_;
    nn::LinearLayer fc2_;
    nn::ReluLayer relu4_;
    nn::LinearLayer fc3_;
};

struct ClassifierTrainReport {
    std::vector<double> epoch_loss;
    std::vector<std::string> warnings;  // e.g. classes absent from the dataset
};

ClassifierTrainReport train_classifier(PatchClassifier& model,
                                       const std::vector<PatchSample>& dataset, int epochs,
                                       int batch_size, const nn::LrSchedule& schedule,
                                       std::uint64_t seed);

struct ClassificationReport {
    VehicleTaxonomy taxonomy;
    std::vector<int> per_class_total;
    std::vector<int> per_class_correct;
    std::vector<std::optional<double>> per_class_accuracy;  // empty class -> nullopt
    double global_accuracy = 0.0;
    int total = 0;
    int correct = 0;

    /// Two-row table: class names then percentages, with a trailing Global
    /// column.
    std::string format_table() const;
};

ClassificationReport per_class_report(const std::vector<int>& predictions,
                                      const std::vector<int>& ground_truth,
                                      const VehicleTaxonomy& taxonomy);

}  // namespace vehnet
