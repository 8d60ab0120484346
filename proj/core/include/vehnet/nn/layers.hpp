#pragma once

#include <random>
#include <string>

#include "vehnet/nn/ops.hpp"
#include "vehnet/nn/params.hpp"

namespace vehnet::nn {

/// Layers register their tensors in an external ParamStore and address them by
/// name, so a model object is freely copyable (copy the store, keep the
/// layers). forward() caches whatever backward() needs; backward() accumulates
/// parameter gradients into the store and returns the input gradient.

class Conv2dLayer {
public:
    Conv2dLayer(ParamStore& store, std::string name, std::size_t in_ch, std::size_t out_ch,
                std::size_t kernel, int stride, int pad, std::mt19937& rng);

    Tensor forward(ParamStore& store, const Tensor& input);
    Tensor backward(ParamStore& store, const Tensor& grad_out);

    const std::string& weight_name() const { return wname_; }

private:
    std::string wname_, bname_;
    int stride_, pad_;
    Tensor cached_input_;
    bool has_cache_ = false;
};

class BatchNormLayer {
public:
    BatchNormLayer(ParamStore& store, std::string name, std::size_t channels,
                   real_t momentum = real_t(0.1), real_t eps = real_t(1e-5));

    Tensor forward(ParamStore& store, const Tensor& input, bool train);
    Tensor backward(ParamStore& store, const Tensor& grad_out);

private:
    std::string gamma_, beta_, rmean_, rvar_;
    real_t momentum_, eps_;
    BatchNormCache<real_t> cache_;
    bool has_cache_ = false;
};

class ReluLayer {
public:
    Tensor forward(const Tensor& input);
    Tensor backward(const Tensor& grad_out);

private:
    Tensor cached_input_;
    bool has_cache_ = false;
};

class MaxPoolLayer {
public:
    Tensor forward(const Tensor& input);
    Tensor backward(const Tensor& grad_out);

    const PoolIndices& indices() const { return indices_; }

private:
    PoolIndices indices_;
    Shape input_shape_;
    bool has_cache_ = false;
};

/// Decoder-side unpooling; consumes the indices of its paired encoder pool.
class UnpoolLayer {
public:
    Tensor forward(const Tensor& input, const PoolIndices& indices);
    Tensor backward(const Tensor& grad_out);

private:
    PoolIndices indices_;
    bool has_cache_ = false;
};

class LinearLayer {
public:
    LinearLayer(ParamStore& store, std::string name, std::size_t in_dim, std::size_t out_dim,
                std::mt19937& rng);

    Tensor forward(ParamStore& store, const Tensor& input);
    Tensor backward(ParamStore& store, const Tensor& grad_out);

private:
    std::string wname_, bname_;
    Tensor cached_input_;
    bool has_cache_ = false;
};

}  // namespace vehnet::nn
