#include "vehnet/seg/model.hpp"

#include <algorithm>
#include <numeric>

#include "vehnet/io/weight_file.hpp"

namespace vehnet::seg {

std::vector<std::string> potsdam_segmentation_classes() {
    return {"impervious_surface", "building", "tree", "low_vegetation", "car"};
}

void EncoderDecoderSpec::validate() const {
    if (input_channels < 1) throw std::invalid_argument("model spec: input_channels must be >= 1");
    if (block_channels.empty()) throw std::invalid_argument("model spec: no encoder blocks");
    for (int c : block_channels)
        if (c < 1) throw std::invalid_argument("model spec: block channels must be >= 1");
    if (convs_per_block < 1) throw std::invalid_argument("model spec: convs_per_block must be >= 1");
    if (class_list.size() < 2) throw std::invalid_argument("model spec: need at least 2 classes");
    if (kernel < 1 || kernel % 2 == 0)
        throw std::invalid_argument("model spec: kernel must be odd and positive");
}

SegNet::SegNet(EncoderDecoderSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
    spec_.validate();
    std::mt19937 rng(static_cast<std::mt19937::result_type>(seed));
    const int pad = spec_.kernel / 2;
    const std::size_t blocks = spec_.block_count();

    for (std::size_t b = 0; b < blocks; ++b) {
        EncoderBlock block;
        std::size_t in_ch = (b == 0) ? static_cast<std::size_t>(spec_.input_channels)
                                     : static_cast<std::size_t>(spec_.block_channels[b - 1]);
        const std::size_t out_ch = static_cast<std::size_t>(spec_.block_channels[b]);
        for (int u = 0; u < spec_.convs_per_block; ++u) {
            const std::string base = "enc/b" + std::to_string(b);
            const std::string idx = std::to_string(u);
            block.units.push_back(
                ConvUnit{nn::Conv2dLayer(store_, base + "/conv" + idx, in_ch, out_ch,
                                         static_cast<std::size_t>(spec_.kernel), 1, pad, rng),
                         nn::BatchNormLayer(store_, base + "/bn" + idx, out_ch), nn::ReluLayer{}});
            in_ch = out_ch;
        }
        encoder_.push_back(std::move(block));
    }

    // decoder block b mirrors encoder block b; its last conv returns to the
    // channel width the encoder block started from
    for (std::size_t b = blocks; b-- > 0;) {
        DecoderBlock block;
        const std::size_t ch = static_cast<std::size_t>(spec_.block_channels[b]);
        const std::size_t prev_ch =
            (b == 0) ? static_cast<std::size_t>(spec_.block_channels[0])
                     : static_cast<std::size_t>(spec_.block_channels[b - 1]);
        for (int u = 0; u < spec_.convs_per_block; ++u) {
            const bool last = (u == spec_.convs_per_block - 1);
            const std::size_t out_ch = last ? prev_ch : ch;
            const std::string base = "dec/b" + std::to_string(b);
            const std::string idx = std::to_string(u);
            block.units.push_back(
                ConvUnit{nn::Conv2dLayer(store_, base + "/conv" + idx, ch, out_ch,
                                         static_cast<std::size_t>(spec_.kernel), 1, pad, rng),
                         nn::BatchNormLayer(store_, base + "/bn" + idx, out_ch), nn::ReluLayer{}});
        }
        decoder_.push_back(std::move(block));
    }

    head_ = std::make_unique<nn::Conv2dLayer>(store_, "head/conv",
                                              static_cast<std::size_t>(spec_.block_channels[0]),
                                              spec_.class_list.size(), 1, 1, 0, rng);
}

void SegNet::check_input(const Tensor& batch) const {
    if (batch.rank() != 4) {
        throw std::invalid_argument("segnet: expected (N,C,H,W) input, got " +
                                    shape_to_string(batch.shape()));
    }
    if (batch.dim(1) != static_cast<std::size_t>(spec_.input_channels)) {
        throw std::invalid_argument("segnet: input has " + std::to_string(batch.dim(1)) +
                                    " channels, spec expects " +
                                    std::to_string(spec_.input_channels));
    }
    const std::size_t div = std::size_t{1} << spec_.block_count();
    if (batch.dim(2) % div != 0 || batch.dim(3) % div != 0) {
        throw std::invalid_argument("segnet: spatial size " + shape_to_string(batch.shape()) +
                                    " not divisible by 2^" + std::to_string(spec_.block_count()));
    }
}

Tensor SegNet::forward(const Tensor& batch, bool train) {
    check_input(batch);
    Tensor x = batch;
    for (auto& block : encoder_) {
        for (auto& unit : block.units) {
            x = unit.conv.forward(store_, x);
            x = unit.bn.forward(store_, x, train);
            x = unit.relu.forward(x);
        }
        x = block.pool.forward(x);
    }
    for (std::size_t j = 0; j < decoder_.size(); ++j) {
        auto& block = decoder_[j];
        // decoder block j consumes the indices of encoder block (blocks-1-j)
        const auto& indices = encoder_[encoder_.size() - 1 - j].pool.indices();
        x = block.unpool.forward(x, indices);
        for (auto& unit : block.units) {
            x = unit.conv.forward(store_, x);
            x = unit.bn.forward(store_, x, train);
            x = unit.relu.forward(x);
        }
    }
    return head_->forward(store_, x);
}

void SegNet::backward(const Tensor& grad_logits) {
    Tensor g = head_->backward(store_, grad_logits);
    for (std::size_t j = decoder_.size(); j-- > 0;) {
        auto& block = decoder_[j];
        for (std::size_t u = block.units.size(); u-- > 0;) {
            g = block.units[u].relu.backward(g);
            g = block.units[u].bn.backward(store_, g);
            g = block.units[u].conv.backward(store_, g);
        }
        g = block.unpool.backward(g);
    }
    for (std::size_t b = encoder_.size(); b-- > 0;) {
        auto& block = encoder_[b];
        g = block.pool.backward(g);
        for (std::size_t u = block.units.size(); u-- > 0;) {
            g = block.units[u].relu.backward(g);
            g = block.units[u].bn.backward(store_, g);
            g = block.units[u].conv.backward(store_, g);
        }
    }
}

SegNet SegNet::clone() const {
    SegNet copy(spec_, 0);
    copy.store_ = store_;
    return copy;
}

SemanticMap SegNet::predict(const Tensor& window) {
    Tensor batch;
    if (window.rank() == 3) {
        batch = Tensor({1, window.dim(0), window.dim(1), window.dim(2)});
        std::copy(window.data(), window.data() + window.size(), batch.data());
    } else {
        batch = window;
        if (batch.rank() != 4 || batch.dim(0) != 1) {
            throw std::invalid_argument("segnet predict: expected one (C,H,W) window");
        }
    }
    return predict_batch(batch).front();
}

std::vector<SemanticMap> SegNet::predict_batch(const Tensor& batch) {
    const Tensor probs = nn::softmax_channels(forward(batch, /*train=*/false));
    const std::size_t N = probs.dim(0), K = probs.dim(1);
    const std::size_t H = probs.dim(2), W = probs.dim(3);
    std::vector<SemanticMap> maps;
    maps.reserve(N);
    for (std::size_t n = 0; n < N; ++n) {
        SemanticMap m(spec_.class_list, H, W);
        const real_t* src = probs.data() + n * K * H * W;
        for (std::size_t i = 0; i < K * H * W; ++i) m.prob[i] = static_cast<float>(src[i]);
        maps.push_back(std::move(m));
    }
    return maps;
}

Tensor image_to_tensor(const ImageU8& image) {
    Tensor t({image.channels, image.height, image.width});
    const real_t scale = real_t(1) / real_t(255);
    for (std::size_t c = 0; c < image.channels; ++c)
        for (std::size_t y = 0; y < image.height; ++y)
            for (std::size_t x = 0; x < image.width; ++x)
                t[(c * image.height + y) * image.width + x] =
                    static_cast<real_t>(image.at(y, x, c)) * scale;
    return t;
}

Tensor stack_batch(const std::vector<const Tensor*>& samples) {
    if (samples.empty()) throw std::invalid_argument("stack_batch: empty batch");
    const Shape& s = samples.front()->shape();
    Tensor batch({samples.size(), s[0], s[1], s[2]});
    const std::size_t stride = shape_numel(s);
    for (std::size_t n = 0; n < samples.size(); ++n) {
        if (samples[n]->shape() != s) {
            throw std::invalid_argument("stack_batch: mixed shapes " + shape_to_string(s) + " and " +
                                        shape_to_string(samples[n]->shape()));
        }
        std::copy(samples[n]->data(), samples[n]->data() + stride, batch.data() + n * stride);
    }
    return batch;
}

TrainReport train_segmentation(SegNet& model, const std::vector<TrainSample>& dataset, int epochs,
                               int batch_size, const nn::LrSchedule& schedule, std::uint64_t seed) {
    if (dataset.empty()) throw std::invalid_argument("train_segmentation: empty dataset");
    if (batch_size < 1) throw std::invalid_argument("train_segmentation: batch_size must be >= 1");

    std::mt19937 rng(static_cast<std::mt19937::result_type>(seed));
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainReport report;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t end = std::min(order.size(), start + batch_size);
            std::vector<const Tensor*> images;
            std::vector<std::int32_t> labels;
            for (std::size_t i = start; i < end; ++i) {
                const TrainSample& s = dataset[order[i]];
                images.push_back(&s.image);
                for (std::uint8_t lab : s.labels.labels) labels.push_back(lab);
            }
            const Tensor batch = stack_batch(images);
            const Tensor logits = model.forward(batch, /*train=*/true);
            auto loss = nn::softmax_cross_entropy(logits, labels,
                                                  std::int32_t{LabelMap::kIgnore});
            model.backward(loss.grad_logits);
            nn::sgd_step(model.params(), schedule, epoch);
            epoch_loss += loss.loss;
            ++batches;
        }
        report.epoch_loss.push_back(epoch_loss / static_cast<double>(batches));
    }
    return report;
}

EncoderLoadReport load_encoder_weights(SegNet& model, const std::string& weight_path) {
    const io::NamedTensors file = io::load_weights(weight_path);
    EncoderLoadReport report;
    for (const auto& [name, tensor] : file.tensors) {
        if (name.rfind("enc/", 0) == 0 && model.params().contains(name)) {
            nn::Param& p = model.params().get(name);
            if (p.value.shape() != tensor.shape()) {
                throw std::runtime_error("load_encoder_weights: shape mismatch for '" + name +
                                         "': model " + shape_to_string(p.value.shape()) + ", file " +
                                         shape_to_string(tensor.shape()));
            }
            for (std::size_t i = 0; i < tensor.size(); ++i)
                p.value[i] = static_cast<real_t>(tensor[i]);
            report.matched.push_back(name);
        } else {
            report.unmatched.push_back(name);
        }
    }
    return report;
}

}  // namespace vehnet::seg
