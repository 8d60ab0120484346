#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "vehnet/image.hpp"
#include "vehnet/nn/layers.hpp"
#include "vehnet/nn/optim.hpp"
#include "vehnet/semantic_map.hpp"

namespace vehnet::seg {

/// Default Potsdam-mode class list; clutter pixels become the ignore label.
std::vector<std::string> potsdam_segmentation_classes();

struct EncoderDecoderSpec {
    int input_channels = 3;
    std::vector<int> block_channels = {16, 32, 64};
    int convs_per_block = 2;
    std::vector<std::string> class_list = potsdam_segmentation_classes();
    int kernel = 3;  // 3x3, pad 1: spatial size is preserved inside a block

    void validate() const;
    std::size_t block_count() const { return block_channels.size(); }
};

/// Symmetric encoder-decoder segmentation network. Encoder blocks are
/// [conv-bn-relu] x convs_per_block followed by 2x2 max pooling with argmax
/// recording; decoder blocks unpool with the matching encoder's indices and
/// mirror the convolutions in reverse channel order; a final 1x1 convolution
/// maps to the class count.
class SegNet {
public:
    SegNet(EncoderDecoderSpec spec, std::uint64_t seed);

    /// input (N, C, H, W) with H, W divisible by 2^block_count.
    Tensor forward(const Tensor& batch, bool train);
    /// Accumulates parameter gradients; returns nothing the pipeline needs.
    void backward(const Tensor& grad_logits);

    /// Softmax probabilities for one window (C, H, W) or (1, C, H, W).
    SemanticMap predict(const Tensor& window);
    /// Batched inference: one SemanticMap per sample of (N, C, H, W).
    std::vector<SemanticMap> predict_batch(const Tensor& batch);

    const EncoderDecoderSpec& spec() const { return spec_; }
    nn::ParamStore& params() { return store_; }
    const nn::ParamStore& params() const { return store_; }

    /// Same spec and weights, fresh layer state; workers clone so inference
    /// can fan out without shared mutable state.
    SegNet clone() const;

private:
    struct ConvUnit {
        nn::Conv2dLayer conv;
        nn::BatchNormLayer bn;
        nn::ReluLayer relu;
    };
    struct EncoderBlock {
        std::vector<ConvUnit> units;
        nn::MaxPoolLayer pool;
    };
    struct DecoderBlock {
        nn::UnpoolLayer unpool;
        std::vector<ConvUnit> units;
    };

    void check_input(const Tensor& batch) const;

    EncoderDecoderSpec spec_;
    nn::ParamStore store_;
    std::vector<EncoderBlock> encoder_;
    std::vector<DecoderBlock> decoder_;
    std::unique_ptr<nn::Conv2dLayer> head_;
};

struct TrainSample {
    Tensor image;     // (C, H, W), values typically in [0, 1]
    LabelMap labels;  // class indices into spec.class_list, or LabelMap::kIgnore
};

struct TrainReport {
    std::vector<double> epoch_loss;  // mean minibatch loss per epoch
};

/// Shuffled minibatch SGD with a seeded shuffle. Loss ignores kIgnore pixels.
TrainReport train_segmentation(SegNet& model, const std::vector<TrainSample>& dataset, int epochs,
                               int batch_size, const nn::LrSchedule& schedule, std::uint64_t seed);

struct EncoderLoadReport {
    std::vector<std::string> matched;    // file entries copied into the encoder
    std::vector<std::string> unmatched;  // file entries left unused
};

/// Overwrites encoder tensors whose names match entries of the weight file;
/// decoder and head are untouched. A shape mismatch on a matched name throws.
EncoderLoadReport load_encoder_weights(SegNet& model, const std::string& weight_path);

/// (C, H, W) float tensor in [0, 1] from an 8-bit image.
Tensor image_to_tensor(const ImageU8& image);

/// Stacks same-shaped (C, H, W) tensors into (N, C, H, W).
Tensor stack_batch(const std::vector<const Tensor*>& samples);

}  // namespace vehnet::seg
