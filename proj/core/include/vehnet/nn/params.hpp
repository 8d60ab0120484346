#pragma once

#include <map>
#include <random>
#include <string>

#include "vehnet/tensor.hpp"

namespace vehnet::nn {

struct Param {
    Tensor value;
    Tensor grad;
    bool trainable = true;
};

/// Named parameter tensors with matching gradient tensors. Iteration is in
/// name order, which keeps every traversal (updates, serialization)
/// reproducible. Non-trainable entries hold state such as batch-norm running
/// statistics; they are serialized but never stepped.
class ParamStore {
public:
    Param& add(const std::string& name, Tensor init, bool trainable = true) {
        auto [it, inserted] = params_.try_emplace(name);
        if (!inserted) throw std::invalid_argument("param store: duplicate name '" + name + "'");
        it->second.value = std::move(init);
        it->second.grad = Tensor(it->second.value.shape());
        it->second.trainable = trainable;
        return it->second;
    }

    bool contains(const std::string& name) const { return params_.count(name) != 0; }

    Param& get(const std::string& name) {
        auto it = params_.find(name);
        if (it == params_.end()) throw std::invalid_argument("param store: unknown name '" + name + "'");
        return it->second;
    }
    const Param& get(const std::string& name) const {
        auto it = params_.find(name);
        if (it == params_.end()) throw std::invalid_argument("param store: unknown name '" + name + "'");
        return it->second;
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(params_.size());
        for (const auto& [k, v] : params_) out.push_back(k);
        return out;
    }

    std::size_t entry_count() const { return params_.size(); }

    /// Total element count over trainable tensors.
    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& [k, v] : params_)
            if (v.trainable) n += v.value.size();
        return n;
    }

    void zero_grads() {
        for (auto& [k, v] : params_) v.grad.fill(real_t(0));
    }

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

private:
    std::map<std::string, Param> params_;
};

/// Uniform initialization in +-sqrt(6 / (fan_in + fan_out)).
inline Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out,
                             std::mt19937& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<real_t>(dist(rng));
    return t;
}

}  // namespace vehnet::nn
