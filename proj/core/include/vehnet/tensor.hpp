#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vehnet {

#ifdef VEHNET_USE_DOUBLE
using real_t = double;
#else
using real_t = float;
#endif

using Shape = std::vector<std::size_t>;

inline std::string shape_to_string(const Shape& shape) {
    std::ostringstream out;
    out << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out << ",";
        out << shape[i];
    }
    out << ")";
    return out.str();
}

inline std::size_t shape_numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<std::size_t>());
}

/// Dense N-dimensional array in row-major order. Network data flow uses
/// rank 4 with (batch, channels, height, width).
template <typename T>
class TensorT {
public:
    TensorT() = default;

    explicit TensorT(Shape shape)
        : shape_(std::move(shape)), data_(shape_numel(shape_), T(0)) {}

    TensorT(Shape shape, std::vector<T> values)
        : shape_(std::move(shape)), data_(std::move(values)) {
        if (data_.size() != shape_numel(shape_)) {
            throw std::invalid_argument("tensor: data length " + std::to_string(data_.size()) +
                                        " does not match shape " + shape_to_string(shape_));
        }
    }

    static TensorT zeros(Shape shape) { return TensorT(std::move(shape)); }

    static TensorT full(Shape shape, T value) {
        TensorT t(std::move(shape));
        std::fill(t.data_.begin(), t.data_.end(), value);
        return t;
    }

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    /// Rank-4 accessor, (n, c, y, x).
    T& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) {
        return data_[((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
    }
    const T& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
        return data_[((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
    }

    void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

    bool all_finite() const {
        for (T v : data_) {
            if (!std::isfinite(static_cast<double>(v))) return false;
        }
        return true;
    }

    bool same_shape(const TensorT& other) const { return shape_ == other.shape_; }

    template <typename U>
    TensorT<U> cast() const {
        TensorT<U> out(shape_);
        for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
        return out;
    }

    /// Same data under a new shape with equal element count.
    TensorT reshaped(Shape shape) const {
        if (shape_numel(shape) != data_.size()) {
            throw std::invalid_argument("tensor: cannot reshape " + shape_to_string(shape_) +
                                        " to " + shape_to_string(shape));
        }
        TensorT out;
        out.shape_ = std::move(shape);
        out.data_ = data_;
        return out;
    }

private:
    Shape shape_;
    std::vector<T> data_;
};

using Tensor = TensorT<real_t>;

}  // namespace vehnet
