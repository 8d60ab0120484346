#pragma once

#include <map>
#include <string>

#include "vehnet/nn/params.hpp"

namespace vehnet::io {

/// Weight file layout ("VEHNET01"): the 8-byte magic, then one record per
/// tensor: name length (u32 LE), name bytes, rank (u32 LE), dims (u32 LE
/// each), values (f32 LE). Records run to end of file; anything that is not
/// a whole record is rejected with its byte offset.
struct NamedTensors {
    std::map<std::string, TensorT<float>> tensors;
};

void save_weights(const std::string& path, const NamedTensors& tensors);

/// Serializes every store entry (trainable or not) in name order.
void save_weights(const std::string& path, const nn::ParamStore& store);

NamedTensors load_weights(const std::string& path);

/// Copies every file tensor into the same-named store entry. Throws if a
/// name is missing from the store or a shape differs.
void load_all_into(nn::ParamStore& store, const NamedTensors& tensors);

}  // namespace vehnet::io
