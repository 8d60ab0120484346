#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "vehnet/tensor.hpp"

namespace vehnet::nn {

/// Pooled-output shape plus, for every pooled cell, the flat offset
/// (y * W + x within the pre-pool spatial plane) of the window maximum.
/// Ties are broken toward the smallest flat offset so that unpooling
/// replays deterministically.
struct PoolIndices {
    Shape shape;                       // (N, C, H/2, W/2)
    std::vector<std::uint32_t> index;  // one entry per pooled cell
};

template <typename T>
struct ConvGrads {
    TensorT<T> input;
    TensorT<T> weights;
    TensorT<T> bias;
};

/// 2D convolution in the cross-correlation convention (no kernel flip).
/// input (N, C, H, W), weights (OC, C, kH, kW), bias (OC).
/// Output spatial size is floor((H + 2*pad - kH) / stride) + 1 per axis.
template <typename T>
TensorT<T> conv2d(const TensorT<T>& input, const TensorT<T>& weights,
                  const TensorT<T>& bias, int stride, int pad);

template <typename T>
ConvGrads<T> conv2d_backward(const TensorT<T>& grad_out, const TensorT<T>& input,
                             const TensorT<T>& weights, int stride, int pad);

template <typename T>
struct BatchNormCache {
    TensorT<T> xhat;
    std::vector<T> inv_std;  // per channel, 1/sqrt(var + eps)
};

template <typename T>
struct BatchNormGrads {
    TensorT<T> input;
    TensorT<T> gamma;
    TensorT<T> beta;
};

/// Per-channel batch normalization over (N, H, W). Train mode normalizes by
/// batch statistics (biased variance) and updates the running statistics
/// in place; infer mode normalizes by the running statistics.
template <typename T>
TensorT<T> batchnorm(const TensorT<T>& input, const TensorT<T>& gamma, const TensorT<T>& beta,
                     TensorT<T>& running_mean, TensorT<T>& running_var,
                     bool train, T momentum, T eps, BatchNormCache<T>* cache = nullptr);

template <typename T>
BatchNormGrads<T> batchnorm_backward(const TensorT<T>& grad_out, const BatchNormCache<T>& cache,
                                     const TensorT<T>& gamma);

template <typename T>
TensorT<T> relu(const TensorT<T>& input);

/// Gradient passes where input > 0; the gradient at exactly 0 is 0.
template <typename T>
TensorT<T> relu_backward(const TensorT<T>& grad_out, const TensorT<T>& input);

/// 2x2 max pooling with stride 2. H and W must be even.
template <typename T>
std::pair<TensorT<T>, PoolIndices> maxpool2x2(const TensorT<T>& input);

template <typename T>
TensorT<T> maxpool2x2_backward(const TensorT<T>& grad_out, const PoolIndices& indices,
                               const Shape& input_shape);

/// Places each input value at the offset recorded for its pooled cell;
/// every other output cell is exactly zero. Throws if a stored offset
/// falls outside its own 2x2 window (corrupted indices).
template <typename T>
TensorT<T> argmax_unpool(const TensorT<T>& input, const PoolIndices& indices,
                         const Shape& out_shape);

template <typename T>
TensorT<T> argmax_unpool_backward(const TensorT<T>& grad_out, const PoolIndices& indices);

template <typename T>
struct LossResult {
    double loss = 0.0;
    TensorT<T> grad_logits;
};

/// Mean negative log-likelihood over non-ignored pixels. logits (N, K, H, W),
/// labels laid out (N, H, W) row-major; a label equal to ignore_label does not
/// contribute. Stabilized by max-subtraction. grad = (softmax - onehot)/count
/// on scored pixels, zero elsewhere.
template <typename T>
LossResult<T> softmax_cross_entropy(const TensorT<T>& logits, const std::vector<std::int32_t>& labels,
                                    std::optional<std::int32_t> ignore_label = std::nullopt);

/// Channel-wise softmax of (N, K, H, W) logits.
template <typename T>
TensorT<T> softmax_channels(const TensorT<T>& logits);

template <typename T>
struct LinearGrads {
    TensorT<T> input;
    TensorT<T> weights;
    TensorT<T> bias;
};

/// Fully connected layer: input (N, IN), weights (OUT, IN), bias (OUT).
template <typename T>
TensorT<T> linear(const TensorT<T>& input, const TensorT<T>& weights, const TensorT<T>& bias);

template <typename T>
LinearGrads<T> linear_backward(const TensorT<T>& grad_out, const TensorT<T>& input,
                               const TensorT<T>& weights);

}  // namespace vehnet::nn
