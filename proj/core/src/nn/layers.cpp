#include "vehnet/nn/layers.hpp"

namespace vehnet::nn {

namespace {

void require_cache(bool has_cache, const char* who) {
    if (!has_cache) {
        throw std::runtime_error(std::string(who) + ": backward called without a forward cache");
    }
}

void accumulate(Tensor& dst, const Tensor& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

Conv2dLayer::Conv2dLayer(ParamStore& store, std::string name, std::size_t in_ch, std::size_t out_ch,
                         std::size_t kernel, int stride, int pad, std::mt19937& rng)
    : wname_(name + "/weight"), bname_(name + "/bias"), stride_(stride), pad_(pad) {
    const std::size_t fan_in = in_ch * kernel * kernel;
    const std::size_t fan_out = out_ch * kernel * kernel;
    store.add(wname_, glorot_uniform({out_ch, in_ch, kernel, kernel}, fan_in, fan_out, rng));
    store.add(bname_, Tensor({out_ch}));
}

Tensor Conv2dLayer::forward(ParamStore& store, const Tensor& input) {
    cached_input_ = input;
    has_cache_ = true;
    return conv2d(input, store.get(wname_).value, store.get(bname_).value, stride_, pad_);
}

Tensor Conv2dLayer::backward(ParamStore& store, const Tensor& grad_out) {
    require_cache(has_cache_, "conv2d");
    auto g = conv2d_backward(grad_out, cached_input_, store.get(wname_).value, stride_, pad_);
    accumulate(store.get(wname_).grad, g.weights);
    accumulate(store.get(bname_).grad, g.bias);
    return std::move(g.input);
}

BatchNormLayer::BatchNormLayer(ParamStore& store, std::string name, std::size_t channels,
                               real_t momentum, real_t eps)
    : gamma_(name + "/gamma"),
      beta_(name + "/beta"),
      rmean_(name + "/running_mean"),
      rvar_(name + "/running_var"),
      momentum_(momentum),
      eps_(eps) {
    store.add(gamma_, Tensor::full({channels}, real_t(1)));
    store.add(beta_, Tensor({channels}));
    store.add(rmean_, Tensor({channels}), /*trainable=*/false);
    store.add(rvar_, Tensor::full({channels}, real_t(1)), /*trainable=*/false);
}

Tensor BatchNormLayer::forward(ParamStore& store, const Tensor& input, bool train) {
    has_cache_ = train;
    return batchnorm(input, store.get(gamma_).value, store.get(beta_).value,
                     store.get(rmean_).value, store.get(rvar_).value, train, momentum_, eps_,
                     train ? &cache_ : nullptr);
}

Tensor BatchNormLayer::backward(ParamStore& store, const Tensor& grad_out) {
    require_cache(has_cache_, "batchnorm");
    auto g = batchnorm_backward(grad_out, cache_, store.get(gamma_).value);
    accumulate(store.get(gamma_).grad, g.gamma);
    accumulate(store.get(beta_).grad, g.beta);
    return std::move(g.input);
}

Tensor ReluLayer::forward(const Tensor& input) {
    cached_input_ = input;
    has_cache_ = true;
    return relu(input);
}

Tensor ReluLayer::backward(const Tensor& grad_out) {
    require_cache(has_cache_, "relu");
    return relu_backward(grad_out, cached_input_);
}

Tensor MaxPoolLayer::forward(const Tensor& input) {
    input_shape_ = input.shape();
    auto [out, idx] = maxpool2x2(input);
    indices_ = std::move(idx);
    has_cache_ = true;
    return std::move(out);
}

Tensor MaxPoolLayer::backward(const Tensor& grad_out) {
    require_cache(has_cache_, "maxpool2x2");
    return maxpool2x2_backward(grad_out, indices_, input_shape_);
}

Tensor UnpoolLayer::forward(const Tensor& input, const PoolIndices& indices) {
    indices_ = indices;
    has_cache_ = true;
    const Shape out_shape{input.dim(0), input.dim(1), input.dim(2) * 2, input.dim(3) * 2};
    return argmax_unpool(input, indices, out_shape);
}

Tensor UnpoolLayer::backward(const Tensor& grad_out) {
    require_cache(has_cache_, "argmax_unpool");
    return argmax_unpool_backward(grad_out, indices_);
}

LinearLayer::LinearLayer(ParamStore& store, std::string name, std::size_t in_dim,
                         std::size_t out_dim, std::mt19937& rng)
    : wname_(name + "/weight"), bname_(name + "/bias") {
    store.add(wname_, glorot_uniform({out_dim, in_dim}, in_dim, out_dim, rng));
    store.add(bname_, Tensor({out_dim}));
}

Tensor LinearLayer::forward(ParamStore& store, const Tensor& input) {
    cached_input_ = input;
    has_cache_ = true;
    return linear(input, store.get(wname_).value, store.get(bname_).value);
}

Tensor LinearLayer::backward(ParamStore& store, const Tensor& grad_out) {
    require_cache(has_cache_, "linear");
    auto g = linear_backward(grad_out, cached_input_, store.get(wname_).value);
    accumulate(store.get(wname_).grad, g.weights);
    accumulate(store.get(bname_).grad, g.bias);
    return std::move(g.input);
}

}  // namespace vehnet::nn
