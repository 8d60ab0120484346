#include "vehnet/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "vehnet/seg/model.hpp"

namespace vehnet {

VehicleTaxonomy VehicleTaxonomy::vedai11() {
    return {{"car", "camping_car", "tractor", "truck", "bike", "van", "bus", "ship", "plane",
             "pick_up", "other"}};
}

VehicleTaxonomy VehicleTaxonomy::potsdam4() {
    return {{"car", "van", "truck", "pick_up"}};
}

ImageU8 rotate90(const ImageU8& image) {
    ImageU8 out(image.width, image.height, image.channels);
    for (std::size_t y = 0; y < image.height; ++y)
        for (std::size_t x = 0; x < image.width; ++x)
            for (std::size_t c = 0; c < image.channels; ++c)
                out.at(image.width - 1 - x, y, c) = image.at(y, x, c);
    return out;
}

ImageU8 mirror_horizontal(const ImageU8& image) {
    ImageU8 out(image.height, image.width, image.channels);
    for (std::size_t y = 0; y < image.height; ++y)
        for (std::size_t x = 0; x < image.width; ++x)
            for (std::size_t c = 0; c < image.channels; ++c)
                out.at(y, image.width - 1 - x, c) = image.at(y, x, c);
    return out;
}

std::vector<PatchSample> augment(const PatchSample& sample) {
    if (sample.patch.height != sample.patch.width) {
        throw std::invalid_argument("augment: patch must be square, got " +
                                    std::to_string(sample.patch.height) + "x" +
                                    std::to_string(sample.patch.width) + " (resize first)");
    }
    std::vector<PatchSample> out;
    out.reserve(8);
    ImageU8 base = sample.patch;
    ImageU8 mirrored = mirror_horizontal(base);
    for (int r = 0; r < 4; ++r) {
        out.push_back({base, sample.label, sample.tile_id, sample.instance_id});
        out.push_back({mirrored, sample.label, sample.tile_id, sample.instance_id});
        if (r < 3) {
            base = rotate90(base);
            mirrored = rotate90(mirrored);
        }
    }
    return out;
}

ImageU8 resize_patch(const ImageU8& patch, std::size_t side) {
    if (side == 0) throw std::invalid_argument("resize_patch: side must be > 0");
    return resize_bilinear(patch, side, side);
}

namespace {

int lenet_pooled_side(int input_side) {
    const int a = input_side - 4;
    if (input_side < 12 || a % 2 != 0 || (a / 2 - 4) % 2 != 0 || (a / 2 - 4) < 2) {
        throw std::invalid_argument("classifier: input side " + std::to_string(input_side) +
                                    " incompatible with conv5-pool-conv5-pool stack");
    }
    return (a / 2 - 4) / 2;
}

}  // namespace

PatchClassifier::PatchClassifier(VehicleTaxonomy taxonomy, int input_side, std::uint64_t seed)
    : taxonomy_(std::move(taxonomy)),
      input_side_((lenet_pooled_side(input_side), input_side)),
      store_(),
      rng_([&] {
          if (taxonomy_.size() < 2)
              throw std::invalid_argument("classifier: taxonomy needs at least 2 classes");
          return static_cast<std::mt19937::result_type>(seed);
      }()),
      conv1_(store_, "cls/conv1", 3, 6, 5, 1, 0, rng_),
      conv2_(store_, "cls/conv2", 6, 16, 5, 1, 0, rng_),
      fc1_(store_, "cls/fc1",
           16 * static_cast<std::size_t>(lenet_pooled_side(input_side)) *
               static_cast<std::size_t>(lenet_pooled_side(input_side)),
           120, rng_),
      fc2_(store_, "cls/fc2", 120, 84, rng_),
      fc3_(store_, "cls/fc3", 84, taxonomy_.size(), rng_) {}

Tensor PatchClassifier::forward(const Tensor& batch, bool train) {
    (void)train;  // no batch norm in this stack
    if (batch.rank() != 4 || batch.dim(1) != 3 ||
        batch.dim(2) != static_cast<std::size_t>(input_side_) ||
        batch.dim(3) != static_cast<std::size_t>(input_side_)) {
        throw std::invalid_argument("classifier: expected (N,3," + std::to_string(input_side_) +
                                    "," + std::to_string(input_side_) + ") batch, got " +
                                    shape_to_string(batch.shape()));
    }
    Tensor x = conv1_.forward(store_, batch);
    x = relu1_.forward(x);
    x = pool1_.forward(x);
    x = conv2_.forward(store_, x);
    x = relu2_.forward(x);
    x = pool2_.forward(x);
    conv_out_shape_ = x.shape();
    x = x.reshaped({x.dim(0), x.dim(1) * x.dim(2) * x.dim(3)});
    x = fc1_.forward(store_, x);
    x = relu3_.forward(x);
    x = fc2_.forward(store_, x);
    x = relu4_.forward(x);
    return fc3_.forward(store_, x);
}

void PatchClassifier::backward(const Tensor& grad_logits) {
    Tensor g = fc3_.backward(store_, grad_logits);
    g = relu4_.backward(g);
    g = fc2_.backward(store_, g);
    g = relu3_.backward(g);
    g = fc1_.backward(store_, g);
    g = g.reshaped(conv_out_shape_);
    g = pool2_.backward(g);
    g = relu2_.backward(g);
    g = conv2_.backward(store_, g);
    g = pool1_.backward(g);
    g = relu1_.backward(g);
    conv1_.backward(store_, g);
}

Classification PatchClassifier::classify(const ImageU8& patch, double reject_threshold) {
    ImageU8 sized = patch;
    if (patch.height != static_cast<std::size_t>(input_side_) ||
        patch.width != static_cast<std::size_t>(input_side_)) {
        sized = resize_patch(patch, static_cast<std::size_t>(input_side_));
    }
    const Tensor t = seg::image_to_tensor(sized);
    Tensor batch({1, t.dim(0), t.dim(1), t.dim(2)});
    std::copy(t.data(), t.data() + t.size(), batch.data());
    const Tensor logits = forward(batch, /*train=*/false);

    const std::size_t K = taxonomy_.size();
    double mx = logits[0];
    for (std::size_t k = 1; k < K; ++k) mx = std::max(mx, static_cast<double>(logits[k]));
    double denom = 0.0;
    std::vector<double> probs(K);
    for (std::size_t k = 0; k < K; ++k) {
        probs[k] = std::exp(static_cast<double>(logits[k]) - mx);
        denom += probs[k];
    }
    Classification result;
    for (std::size_t k = 0; k < K; ++k) {
        probs[k] /= denom;
        if (result.label_index < 0 || probs[k] > result.confidence) {
            result.label_index = static_cast<int>(k);
            result.confidence = probs[k];
        }
    }
    result.probabilities = std::move(probs);
    result.label = taxonomy_.classes[result.label_index];
    if (reject_threshold >= 0.0 &&
        (result.confidence < reject_threshold || reject_threshold >= 1.0)) {
        // softmax confidence is < 1 in exact arithmetic; the tau >= 1 branch
        // keeps float-saturated confidences from escaping rejection
        result.rejected = true;
    }
    return result;
}

ClassifierTrainReport train_classifier(PatchClassifier& model,
                                       const std::vector<PatchSample>& dataset, int epochs,
                                       int batch_size, const nn::LrSchedule& schedule,
                                       std::uint64_t seed) {
    if (dataset.empty()) throw std::invalid_argument("train_classifier: empty dataset");
    if (batch_size < 1) throw std::invalid_argument("train_classifier: batch_size must be >= 1");

    ClassifierTrainReport report;
    std::vector<int> class_counts(model.taxonomy().size(), 0);
    for (const PatchSample& s : dataset) {
        if (s.label < 0 || static_cast<std::size_t>(s.label) >= model.taxonomy().size()) {
            throw std::invalid_argument("train_classifier: label " + std::to_string(s.label) +
                                        " outside taxonomy");
        }
        ++class_counts[s.label];
    }
    for (std::size_t k = 0; k < class_counts.size(); ++k) {
        if (class_counts[k] == 0) {
            report.warnings.push_back("class '" + model.taxonomy().classes[k] +
                                      "' absent from training data");
        }
    }

    const std::size_t side = static_cast<std::size_t>(model.input_side());
    std::vector<Tensor> tensors;
    tensors.reserve(dataset.size());
    for (const PatchSample& s : dataset) {
        if (s.patch.height != side || s.patch.width != side) {
            throw std::invalid_argument("train_classifier: patches must be pre-resized to " +
                                        std::to_string(side));
        }
        tensors.push_back(seg::image_to_tensor(s.patch));
    }

    std::mt19937 rng(static_cast<std::mt19937::result_type>(seed));
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t end = std::min(order.size(), start + batch_size);
            std::vector<const Tensor*> images;
            std::vector<std::int32_t> labels;
            for (std::size_t i = start; i < end; ++i) {
                images.push_back(&tensors[order[i]]);
                labels.push_back(dataset[order[i]].label);
            }
            const Tensor batch = seg::stack_batch(images);
            const Tensor logits = model.forward(batch, /*train=*/true);
            auto loss = nn::softmax_cross_entropy(
                logits.reshaped({logits.dim(0), logits.dim(1), 1, 1}), labels, std::nullopt);
            model.backward(loss.grad_logits.reshaped(logits.shape()));
            nn::sgd_step(model.params(), schedule, epoch);
            epoch_loss += loss.loss;
            ++batches;
        }
        report.epoch_loss.push_back(epoch_loss / static_cast<double>(batches));
    }
    return report;
}

ClassificationReport per_class_report(const std::vector<int>& predictions,
                                      const std::vector<int>& ground_truth,
                                      const VehicleTaxonomy& taxonomy) {
    if (predictions.size() != ground_truth.size()) {
        throw std::invalid_argument("per_class_report: " + std::to_string(predictions.size()) +
                                    " predictions for " + std::to_string(ground_truth.size()) +
                                    " labels");
    }
    ClassificationReport report;
    report.taxonomy = taxonomy;
    report.per_class_total.assign(taxonomy.size(), 0);
    report.per_class_correct.assign(taxonomy.size(), 0);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const int gt = ground_truth[i];
        if (gt < 0 || static_cast<std::size_t>(gt) >= taxonomy.size()) {
            throw std::invalid_argument("per_class_report: label outside taxonomy");
        }
        ++report.per_class_total[gt];
        ++report.total;
        if (predictions[i] == gt) {
            ++report.per_class_correct[gt];
            ++report.correct;
        }
    }
    report.per_class_accuracy.resize(taxonomy.size());
    for (std::size_t k = 0; k < taxonomy.size(); ++k) {
        if (report.per_class_total[k] > 0) {
            report.per_class_accuracy[k] =
                static_cast<double>(report.per_class_correct[k]) / report.per_class_total[k];
        }
    }
    report.global_accuracy =
        report.total > 0 ? static_cast<double>(report.correct) / report.total : 0.0;
    return report;
}

std::string ClassificationReport::format_table() const {
    auto pct = [](double v) {
        std::ostringstream s;
        s << static_cast<int>(std::lround(v * 100.0)) << "%";
        return s.str();
    };
    std::ostringstream out;
    out << "Class";
    for (const std::string& c : taxonomy.classes) out << "\t" << c;
    out << "\tGlobal\n";
    out << "Accuracy";
    for (std::size_t k = 0; k < taxonomy.size(); ++k) {
        out << "\t" << (per_class_accuracy[k] ? pct(*per_class_accuracy[k]) : std::string("-"));
    }
    out << "\t" << pct(global_accuracy) << "\n";
    return out.str();
}

}  // namespace vehnet
