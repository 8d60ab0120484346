#include "vehnet/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace vehnet::nn {

namespace {

// C(M x N) += A(M x K) * B(K x N), row-major. Rows are processed four at a
// time so each loaded B vector feeds four accumulations, and columns are
// blocked so the active slice of B stays in cache. Per-element accumulation
// runs over k in increasing order regardless of blocking, which keeps results
// bit-identical across shapes and runs.
template <typename T>
void gemm_acc(std::size_t M, std::size_t K, std::size_t N,
              const T* A, const T* B, T* C) {
    constexpr std::size_t kColBlock = 1024;
    for (std::size_t j0 = 0; j0 < N; j0 += kColBlock) {
        const std::size_t j1 = std::min(N, j0 + kColBlock);
        std::size_t i = 0;
        for (; i + 4 <= M; i += 4) {
            T* c0 = C + (i + 0) * N;
            T* c1 = C + (i + 1) * N;
            T* c2 = C + (i + 2) * N;
            T* c3 = C + (i + 3) * N;
            const T* a0 = A + (i + 0) * K;
            const T* a1 = A + (i + 1) * K;
            const T* a2 = A + (i + 2) * K;
            const T* a3 = A + (i + 3) * K;
            for (std::size_t k = 0; k < K; ++k) {
                const T v0 = a0[k], v1 = a1[k], v2 = a2[k], v3 = a3[k];
                const T* brow = B + k * N;
                for (std::size_t j = j0; j < j1; ++j) {
                    const T b = brow[j];
                    c0[j] += v0 * b;
                    c1[j] += v1 * b;
                    c2[j] += v2 * b;
                    c3[j] += v3 * b;
                }
            }
        }
        for (; i < M; ++i) {
            T* crow = C + i * N;
            const T* arow = A + i * K;
            for (std::size_t k = 0; k < K; ++k) {
                const T a = arow[k];
                const T* brow = B + k * N;
                for (std::size_t j = j0; j < j1; ++j) crow[j] += a * brow[j];
            }
        }
    }
}

// tiled so both sides stay cache-resident
template <typename T>
void transpose(std::size_t rows, std::size_t cols, const T* src, T* dst) {
    constexpr std::size_t kTile = 32;
    for (std::size_t r0 = 0; r0 < rows; r0 += kTile) {
        const std::size_t r1 = std::min(rows, r0 + kTile);
        for (std::size_t c0 = 0; c0 < cols; c0 += kTile) {
            const std::size_t c1 = std::min(cols, c0 + kTile);
            for (std::size_t r = r0; r < r1; ++r)
                for (std::size_t c = c0; c < c1; ++c) dst[c * rows + r] = src[r * cols + c];
        }
    }
}

// Dot product with eight fixed-order accumulators: vectorizable without
// reassociating a single serial sum, so results stay run-to-run identical.
template <typename T>
T dot8(const T* a, const T* b, std::size_t n) {
    T acc[8] = {T(0), T(0), T(0), T(0), T(0), T(0), T(0), T(0)};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        for (int l = 0; l < 8; ++l) acc[l] += a[i + l] * b[i + l];
    }
    T tail = T(0);
    for (; i < n; ++i) tail += a[i] * b[i];
    return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) +
           tail;
}

// Unrolls the per-position window copies; out-of-bounds taps read as zero.
template <typename T>
void im2col(const T* src, std::size_t C, std::size_t H, std::size_t W,
            std::size_t kH, std::size_t kW, int stride, int pad,
            std::size_t Ho, std::size_t Wo, T* col) {
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t ky = 0; ky < kH; ++ky) {
            for (std::size_t kx = 0; kx < kW; ++kx) {
                T* dst = col + ((c * kH + ky) * kW + kx) * (Ho * Wo);
                for (std::size_t oy = 0; oy < Ho; ++oy) {
                    const long iy = static_cast<long>(oy) * stride + static_cast<long>(ky) - pad;
                    T* drow = dst + oy * Wo;
                    if (iy < 0 || iy >= static_cast<long>(H)) {
                        std::fill(drow, drow + Wo, T(0));
                        continue;
                    }
                    const T* srow = src + (c * H + iy) * W;
                    for (std::size_t ox = 0; ox < Wo; ++ox) {
                        const long ix = static_cast<long>(ox) * stride + static_cast<long>(kx) - pad;
                        drow[ox] = (ix >= 0 && ix < static_cast<long>(W)) ? srow[ix] : T(0);
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im_acc(const T* col, std::size_t C, std::size_t H, std::size_t W,
                std::size_t kH, std::size_t kW, int stride, int pad,
                std::size_t Ho, std::size_t Wo, T* dst) {
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t ky = 0; ky < kH; ++ky) {
            for (std::size_t kx = 0; kx < kW; ++kx) {
                const T* srow0 = col + ((c * kH + ky) * kW + kx) * (Ho * Wo);
                for (std::size_t oy = 0; oy < Ho; ++oy) {
                    const long iy = static_cast<long>(oy) * stride + static_cast<long>(ky) - pad;
                    if (iy < 0 || iy >= static_cast<long>(H)) continue;
                    const T* srow = srow0 + oy * Wo;
                    T* drow = dst + (c * H + iy) * W;
                    for (std::size_t ox = 0; ox < Wo; ++ox) {
                        const long ix = static_cast<long>(ox) * stride + static_cast<long>(kx) - pad;
                        if (ix >= 0 && ix < static_cast<long>(W)) drow[ix] += srow[ox];
                    }
                }
            }
        }
    }
}

void require_rank4(const Shape& shape, const char* who) {
    if (shape.size() != 4) {
        throw std::invalid_argument(std::string(who) + ": expected a rank-4 tensor, got shape " +
                                    shape_to_string(shape));
    }
}

struct ConvDims {
    std::size_t N, C, H, W, OC, kH, kW, Ho, Wo;
};

template <typename T>
ConvDims conv_dims(const TensorT<T>& input, const TensorT<T>& weights,
                   int stride, int pad) {
    require_rank4(input.shape(), "conv2d");
    require_rank4(weights.shape(), "conv2d");
    if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
    if (pad < 0) throw std::invalid_argument("conv2d: pad must be >= 0");
    ConvDims d;
    d.N = input.dim(0); d.C = input.dim(1); d.H = input.dim(2); d.W = input.dim(3);
    d.OC = weights.dim(0); d.kH = weights.dim(2); d.kW = weights.dim(3);
    if (weights.dim(1) != d.C) {
        throw std::invalid_argument("conv2d: input shape " + shape_to_string(input.shape()) +
                                    " has " + std::to_string(d.C) + " channels but weight shape " +
                                    shape_to_string(weights.shape()) + " expects " +
                                    std::to_string(weights.dim(1)));
    }
    const long ho = (static_cast<long>(d.H) + 2L * pad - static_cast<long>(d.kH)) / stride + 1;
    const long wo = (static_cast<long>(d.W) + 2L * pad - static_cast<long>(d.kW)) / stride + 1;
    if (ho < 1 || wo < 1) {
        throw std::invalid_argument("conv2d: kernel " + shape_to_string(weights.shape()) +
                                    " does not fit input " + shape_to_string(input.shape()) +
                                    " with pad " + std::to_string(pad));
    }
    d.Ho = static_cast<std::size_t>(ho);
    d.Wo = static_cast<std::size_t>(wo);
    return d;
}

}  // namespace

template <typename T>
TensorT<T> conv2d(const TensorT<T>& input, const TensorT<T>& weights,
                  const TensorT<T>& bias, int stride, int pad) {
    const ConvDims d = conv_dims(input, weights, stride, pad);
    if (bias.size() != d.OC) {
        throw std::invalid_argument("conv2d: bias length " + std::to_string(bias.size()) +
                                    " does not match " + std::to_string(d.OC) + " output channels");
    }
    TensorT<T> out({d.N, d.OC, d.Ho, d.Wo});
    const std::size_t ckk = d.C * d.kH * d.kW;
    const std::size_t cols = d.Ho * d.Wo;
    std::vector<T> col(ckk * cols);
    for (std::size_t n = 0; n < d.N; ++n) {
        im2col(input.data() + n * d.C * d.H * d.W, d.C, d.H, d.W, d.kH, d.kW,
               stride, pad, d.Ho, d.Wo, col.data());
        T* out_n = out.data() + n * d.OC * cols;
        for (std::size_t o = 0; o < d.OC; ++o)
            std::fill(out_n + o * cols, out_n + (o + 1) * cols, bias[o]);
        gemm_acc(d.OC, ckk, cols, weights.data(), col.data(), out_n);
    }
    return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const TensorT<T>& grad_out, const TensorT<T>& input,
                             const TensorT<T>& weights, int stride, int pad) {
    const ConvDims d = conv_dims(input, weights, stride, pad);
    const Shape expected{d.N, d.OC, d.Ho, d.Wo};
    if (grad_out.shape() != expected) {
        throw std::invalid_argument("conv2d_backward: grad shape " + shape_to_string(grad_out.shape()) +
                                    " does not match forward output shape " + shape_to_string(expected));
    }
    const std::size_t ckk = d.C * d.kH * d.kW;
    const std::size_t cols = d.Ho * d.Wo;

    ConvGrads<T> g{TensorT<T>(input.shape()), TensorT<T>(weights.shape()), TensorT<T>({d.OC})};
    std::vector<T> col(ckk * cols);
    std::vector<T> colT(cols * ckk);
    std::vector<T> gcol(ckk * cols);
    std::vector<T> wT(ckk * d.OC);
    transpose(d.OC, ckk, weights.data(), wT.data());

    for (std::size_t n = 0; n < d.N; ++n) {
        const T* go_n = grad_out.data() + n * d.OC * cols;

        for (std::size_t o = 0; o < d.OC; ++o) {
            T ones_sum = 0;
            const T* row = go_n + o * cols;
            T acc[8] = {T(0), T(0), T(0), T(0), T(0), T(0), T(0), T(0)};
            std::size_t j = 0;
            for (; j + 8 <= cols; j += 8)
                for (int l = 0; l < 8; ++l) acc[l] += row[j + l];
            for (; j < cols; ++j) ones_sum += row[j];
            g.bias[o] += ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
                         ((acc[4] + acc[5]) + (acc[6] + acc[7])) + ones_sum;
        }

        im2col(input.data() + n * d.C * d.H * d.W, d.C, d.H, d.W, d.kH, d.kW,
               stride, pad, d.Ho, d.Wo, col.data());
        transpose(ckk, cols, col.data(), colT.data());
        gemm_acc(d.OC, cols, ckk, go_n, colT.data(), g.weights.data());

        std::fill(gcol.begin(), gcol.end(), T(0));
        gemm_acc(ckk, d.OC, cols, wT.data(), go_n, gcol.data());
        col2im_acc(gcol.data(), d.C, d.H, d.W, d.kH, d.kW, stride, pad, d.Ho, d.Wo,
                   g.input.data() + n * d.C * d.H * d.W);
    }
    return g;
}

template <typename T>
TensorT<T> batchnorm(const TensorT<T>& input, const TensorT<T>& gamma, const TensorT<T>& beta,
                     TensorT<T>& running_mean, TensorT<T>& running_var,
                     bool train, T momentum, T eps, BatchNormCache<T>* cache) {
    require_rank4(input.shape(), "batchnorm");
    const std::size_t N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
    if (gamma.size() != C || beta.size() != C || running_mean.size() != C || running_var.size() != C) {
        throw std::invalid_argument("batchnorm: parameter lengths must equal channel count " +
                                    std::to_string(C));
    }
    if (eps <= T(0)) throw std::invalid_argument("batchnorm: eps must be > 0");
    if (train && N == 0) throw std::invalid_argument("batchnorm: empty batch in train mode");

    const std::size_t plane = H * W;
    const std::size_t count = N * plane;
    TensorT<T> out(input.shape());
    if (cache) {
        cache->xhat = TensorT<T>(input.shape());
        cache->inv_std.assign(C, T(0));
    }

    for (std::size_t c = 0; c < C; ++c) {
        T mean, var;
        if (train) {
            double sum = 0.0;
            for (std::size_t n = 0; n < N; ++n) {
                const T* p = input.data() + (n * C + c) * plane;
                for (std::size_t i = 0; i < plane; ++i) sum += p[i];
            }
            mean = static_cast<T>(sum / static_cast<double>(count));
            double sq = 0.0;
            for (std::size_t n = 0; n < N; ++n) {
                const T* p = input.data() + (n * C + c) * plane;
                for (std::size_t i = 0; i < plane; ++i) {
                    const double dlt = static_cast<double>(p[i]) - static_cast<double>(mean);
                    sq += dlt * dlt;
                }
            }
            var = static_cast<T>(sq / static_cast<double>(count));
            running_mean[c] = (T(1) - momentum) * running_mean[c] + momentum * mean;
            running_var[c] = (T(1) - momentum) * running_var[c] + momentum * var;
        } else {
            mean = running_mean[c];
            var = running_var[c];
        }
        const T istd = T(1) / std::sqrt(var + eps);
        if (cache) cache->inv_std[c] = istd;
        for (std::size_t n = 0; n < N; ++n) {
            const T* p = input.data() + (n * C + c) * plane;
            T* q = out.data() + (n * C + c) * plane;
            T* xh = cache ? cache->xhat.data() + (n * C + c) * plane : nullptr;
            for (std::size_t i = 0; i < plane; ++i) {
                const T xhat = (p[i] - mean) * istd;
                if (xh) xh[i] = xhat;
                q[i] = gamma[c] * xhat + beta[c];
            }
        }
    }
    return out;
}

template <typename T>
BatchNormGrads<T> batchnorm_backward(const TensorT<T>& grad_out, const BatchNormCache<T>& cache,
                                     const TensorT<T>& gamma) {
    if (cache.xhat.empty()) throw std::runtime_error("batchnorm_backward: no forward cache");
    if (grad_out.shape() != cache.xhat.shape()) {
        throw std::invalid_argument("batchnorm_backward: grad shape " +
                                    shape_to_string(grad_out.shape()) + " does not match cached " +
                                    shape_to_string(cache.xhat.shape()));
    }
    const std::size_t N = grad_out.dim(0), C = grad_out.dim(1);
    const std::size_t plane = grad_out.dim(2) * grad_out.dim(3);
    const std::size_t count = N * plane;

    BatchNormGrads<T> g{TensorT<T>(grad_out.shape()), TensorT<T>({C}), TensorT<T>({C})};
    for (std::size_t c = 0; c < C; ++c) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (std::size_t n = 0; n < N; ++n) {
            const T* dy = grad_out.data() + (n * C + c) * plane;
            const T* xh = cache.xhat.data() + (n * C + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                sum_dy += dy[i];
                sum_dy_xhat += static_cast<double>(dy[i]) * xh[i];
            }
        }
        g.beta[c] = static_cast<T>(sum_dy);
        g.gamma[c] = static_cast<T>(sum_dy_xhat);

        const T scale = gamma[c] * cache.inv_std[c] / static_cast<T>(count);
        const T m = static_cast<T>(count);
        for (std::size_t n = 0; n < N; ++n) {
            const T* dy = grad_out.data() + (n * C + c) * plane;
            const T* xh = cache.xhat.data() + (n * C + c) * plane;
            T* dx = g.input.data() + (n * C + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                dx[i] = scale * (m * dy[i] - static_cast<T>(sum_dy) -
                                 xh[i] * static_cast<T>(sum_dy_xhat));
            }
        }
    }
    return g;
}

template <typename T>
TensorT<T> relu(const TensorT<T>& input) {
    TensorT<T> out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > T(0) ? input[i] : T(0);
    return out;
}

template <typename T>
TensorT<T> relu_backward(const TensorT<T>& grad_out, const TensorT<T>& input) {
    if (!grad_out.same_shape(input)) {
        throw std::invalid_argument("relu_backward: grad shape " + shape_to_string(grad_out.shape()) +
                                    " does not match input shape " + shape_to_string(input.shape()));
    }
    TensorT<T> out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > T(0) ? grad_out[i] : T(0);
    return out;
}

template <typename T>
std::pair<TensorT<T>, PoolIndices> maxpool2x2(const TensorT<T>& input) {
    require_rank4(input.shape(), "maxpool2x2");
    const std::size_t N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
    if (H % 2 != 0 || W % 2 != 0) {
        throw std::invalid_argument("maxpool2x2: spatial size must be even, got " +
                                    shape_to_string(input.shape()));
    }
    const std::size_t Ho = H / 2, Wo = W / 2;
    TensorT<T> out({N, C, Ho, Wo});
    PoolIndices idx;
    idx.shape = {N, C, Ho, Wo};
    idx.index.resize(N * C * Ho * Wo);

    std::size_t cell = 0;
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t c = 0; c < C; ++c) {
            const T* plane = input.data() + (n * C + c) * H * W;
            for (std::size_t oy = 0; oy < Ho; ++oy) {
                for (std::size_t ox = 0; ox < Wo; ++ox, ++cell) {
                    const std::size_t y0 = 2 * oy, x0 = 2 * ox;
                    // raster scan keeps the first maximum: smallest flat offset wins ties
                    std::size_t best = y0 * W + x0;
                    T best_v = plane[best];
                    const std::size_t cand[3] = {y0 * W + x0 + 1, (y0 + 1) * W + x0,
                                                 (y0 + 1) * W + x0 + 1};
                    for (std::size_t k = 0; k < 3; ++k) {
                        if (plane[cand[k]] > best_v) {
                            best_v = plane[cand[k]];
                            best = cand[k];
                        }
                    }
                    out[cell] = best_v;
                    idx.index[cell] = static_cast<std::uint32_t>(best);
                }
            }
        }
    }
    return {std::move(out), std::move(idx)};
}

namespace {

// Offsets must land inside the 2x2 window of their own pooled cell.
void check_unpool_args(const Shape& in_shape, const PoolIndices& indices, const Shape& out_shape) {
    if (in_shape.size() != 4 || in_shape != indices.shape) {
        throw std::invalid_argument("argmax_unpool: input shape " + shape_to_string(in_shape) +
                                    " does not match index shape " + shape_to_string(indices.shape));
    }
    if (indices.index.size() != shape_numel(indices.shape)) {
        throw std::invalid_argument("argmax_unpool: index count does not match index shape");
    }
    if (out_shape.size() != 4 || out_shape[0] != in_shape[0] || out_shape[1] != in_shape[1] ||
        out_shape[2] != in_shape[2] * 2 || out_shape[3] != in_shape[3] * 2) {
        throw std::invalid_argument("argmax_unpool: output shape " + shape_to_string(out_shape) +
                                    " is not 2x the input shape " + shape_to_string(in_shape) +
                                    " spatially");
    }
}

void check_index_in_window(std::uint32_t offset, std::size_t oy, std::size_t ox, std::size_t W) {
    const std::size_t y = offset / W, x = offset % W;
    if (y / 2 != oy || x / 2 != ox) {
        throw std::invalid_argument("argmax_unpool: stored offset " + std::to_string(offset) +
                                    " lies outside the window of pooled cell (" + std::to_string(oy) +
                                    "," + std::to_string(ox) + ")");
    }
}

}  // namespace

template <typename T>
TensorT<T> argmax_unpool(const TensorT<T>& input, const PoolIndices& indices,
                         const Shape& out_shape) {
    check_unpool_args(input.shape(), indices, out_shape);
    const std::size_t N = input.dim(0), C = input.dim(1), Ho = input.dim(2), Wo = input.dim(3);
    const std::size_t H = out_shape[2], W = out_shape[3];
    TensorT<T> out(out_shape);
    std::size_t cell = 0;
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t c = 0; c < C; ++c) {
            T* plane = out.data() + (n * C + c) * H * W;
            for (std::size_t oy = 0; oy < Ho; ++oy) {
                for (std::size_t ox = 0; ox < Wo; ++ox, ++cell) {
                    const std::uint32_t off = indices.index[cell];
                    check_index_in_window(off, oy, ox, W);
                    plane[off] = input[cell];
                }
            }
        }
    }
    return out;
}

template <typename T>
TensorT<T> argmax_unpool_backward(const TensorT<T>& grad_out, const PoolIndices& indices) {
    if (indices.shape.size() != 4 || indices.index.size() != shape_numel(indices.shape)) {
        throw std::invalid_argument("argmax_unpool_backward: malformed pool indices");
    }
    const std::size_t N = indices.shape[0], C = indices.shape[1];
    const std::size_t Ho = indices.shape[2], Wo = indices.shape[3];
    const Shape expected{N, C, Ho * 2, Wo * 2};
    if (grad_out.shape() != expected) {
        throw std::invalid_argument("argmax_unpool_backward: grad shape " +
                                    shape_to_string(grad_out.shape()) + " does not match " +
                                    shape_to_string(expected));
    }
    const std::size_t H = Ho * 2, W = Wo * 2;
    TensorT<T> out(indices.shape);
    std::size_t cell = 0;
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t c = 0; c < C; ++c) {
            const T* plane = grad_out.data() + (n * C + c) * H * W;
            for (std::size_t oy = 0; oy < Ho; ++oy) {
                for (std::size_t ox = 0; ox < Wo; ++ox, ++cell) {
                    const std::uint32_t off = indices.index[cell];
                    check_index_in_window(off, oy, ox, W);
                    out[cell] = plane[off];
                }
            }
        }
    }
    return out;
}

template <typename T>
TensorT<T> maxpool2x2_backward(const TensorT<T>& grad_out, const PoolIndices& indices,
                               const Shape& input_shape) {
    if (grad_out.shape() != indices.shape) {
        throw std::invalid_argument("maxpool2x2_backward: grad shape " +
                                    shape_to_string(grad_out.shape()) + " does not match index shape " +
                                    shape_to_string(indices.shape));
    }
    check_unpool_args(indices.shape, indices, input_shape);
    // scatter of the pooled gradient back to the argmax positions
    return argmax_unpool(grad_out, indices, input_shape);
}

template <typename T>
TensorT<T> softmax_channels(const TensorT<T>& logits) {
    require_rank4(logits.shape(), "softmax_channels");
    const std::size_t N = logits.dim(0), K = logits.dim(1);
    const std::size_t plane = logits.dim(2) * logits.dim(3);
    TensorT<T> out(logits.shape());
    for (std::size_t n = 0; n < N; ++n) {
        const T* base = logits.data() + n * K * plane;
        T* obase = out.data() + n * K * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            T mx = base[i];
            for (std::size_t k = 1; k < K; ++k) mx = std::max(mx, base[k * plane + i]);
            double denom = 0.0;
            for (std::size_t k = 0; k < K; ++k)
                denom += std::exp(static_cast<double>(base[k * plane + i] - mx));
            for (std::size_t k = 0; k < K; ++k) {
                obase[k * plane + i] =
                    static_cast<T>(std::exp(static_cast<double>(base[k * plane + i] - mx)) / denom);
            }
        }
    }
    return out;
}

template <typename T>
LossResult<T> softmax_cross_entropy(const TensorT<T>& logits, const std::vector<std::int32_t>& labels,
                                    std::optional<std::int32_t> ignore_label) {
    require_rank4(logits.shape(), "softmax_cross_entropy");
    const std::size_t N = logits.dim(0), K = logits.dim(1);
    const std::size_t plane = logits.dim(2) * logits.dim(3);
    if (labels.size() != N * plane) {
        throw std::invalid_argument("softmax_cross_entropy: " + std::to_string(labels.size()) +
                                    " labels for " + std::to_string(N * plane) + " pixels");
    }

    std::size_t scored = 0;
    for (std::int32_t lab : labels) {
        if (ignore_label && lab == *ignore_label) continue;
        if (lab < 0 || static_cast<std::size_t>(lab) >= K) {
            throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(lab) +
                                        " outside class count " + std::to_string(K));
        }
        ++scored;
    }
    if (scored == 0) throw std::invalid_argument("softmax_cross_entropy: every pixel is ignored");

    LossResult<T> res;
    res.grad_logits = TensorT<T>(logits.shape());
    double loss = 0.0;
    const T inv_count = T(1) / static_cast<T>(scored);

    for (std::size_t n = 0; n < N; ++n) {
        const T* base = logits.data() + n * K * plane;
        T* gbase = res.grad_logits.data() + n * K * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            const std::int32_t lab = labels[n * plane + i];
            if (ignore_label && lab == *ignore_label) continue;
            T mx = base[i];
            for (std::size_t k = 1; k < K; ++k) mx = std::max(mx, base[k * plane + i]);
            double denom = 0.0;
            for (std::size_t k = 0; k < K; ++k)
                denom += std::exp(static_cast<double>(base[k * plane + i] - mx));
            const double log_denom = std::log(denom);
            loss -= static_cast<double>(base[static_cast<std::size_t>(lab) * plane + i] - mx) - log_denom;
            for (std::size_t k = 0; k < K; ++k) {
                const double p = std::exp(static_cast<double>(base[k * plane + i] - mx)) / denom;
                const double onehot = (static_cast<std::size_t>(lab) == k) ? 1.0 : 0.0;
                gbase[k * plane + i] = static_cast<T>(p - onehot) * inv_count;
            }
        }
    }
    res.loss = loss / static_cast<double>(scored);
    return res;
}

template <typename T>
TensorT<T> linear(const TensorT<T>& input, const TensorT<T>& weights, const TensorT<T>& bias) {
    if (input.rank() != 2 || weights.rank() != 2) {
        throw std::invalid_argument("linear: expected rank-2 input and weights, got " +
                                    shape_to_string(input.shape()) + " and " +
                                    shape_to_string(weights.shape()));
    }
    const std::size_t N = input.dim(0), IN = input.dim(1);
    const std::size_t OUT = weights.dim(0);
    if (weights.dim(1) != IN || bias.size() != OUT) {
        throw std::invalid_argument("linear: input shape " + shape_to_string(input.shape()) +
                                    " incompatible with weight shape " + shape_to_string(weights.shape()));
    }
    TensorT<T> out({N, OUT});
    for (std::size_t n = 0; n < N; ++n) {
        T* orow = out.data() + n * OUT;
        for (std::size_t o = 0; o < OUT; ++o) orow[o] = bias[o];
    }
    for (std::size_t n = 0; n < N; ++n) {
        const T* xrow = input.data() + n * IN;
        T* orow = out.data() + n * OUT;
        for (std::size_t o = 0; o < OUT; ++o) orow[o] += dot8(xrow, weights.data() + o * IN, IN);
    }
    return out;
}

template <typename T>
LinearGrads<T> linear_backward(const TensorT<T>& grad_out, const TensorT<T>& input,
                               const TensorT<T>& weights) {
    const std::size_t N = input.dim(0), IN = input.dim(1), OUT = weights.dim(0);
    const Shape expected{N, OUT};
    if (grad_out.shape() != expected) {
        throw std::invalid_argument("linear_backward: grad shape " + shape_to_string(grad_out.shape()) +
                                    " does not match " + shape_to_string(expected));
    }
    LinearGrads<T> g{TensorT<T>(input.shape()), TensorT<T>(weights.shape()), TensorT<T>({OUT})};
    for (std::size_t n = 0; n < N; ++n) {
        const T* go = grad_out.data() + n * OUT;
        const T* xrow = input.data() + n * IN;
        T* gx = g.input.data() + n * IN;
        for (std::size_t o = 0; o < OUT; ++o) {
            const T a = go[o];
            g.bias[o] += a;
            const T* wrow = weights.data() + o * IN;
            T* gwrow = g.weights.data() + o * IN;
            for (std::size_t i = 0; i < IN; ++i) {
                gx[i] += a * wrow[i];
                gwrow[i] += a * xrow[i];
            }
        }
    }
    return g;
}

#define VEHNET_INSTANTIATE_OPS(T)                                                                   \
    template TensorT<T> conv2d<T>(const TensorT<T>&, const TensorT<T>&, const TensorT<T>&, int,    \
                                  int);                                                             \
    template ConvGrads<T> conv2d_backward<T>(const TensorT<T>&, const TensorT<T>&,                 \
                                             const TensorT<T>&, int, int);                          \
    template TensorT<T> batchnorm<T>(const TensorT<T>&, const TensorT<T>&, const TensorT<T>&,      \
                                     TensorT<T>&, TensorT<T>&, bool, T, T, BatchNormCache<T>*);    \
    template BatchNormGrads<T> batchnorm_backward<T>(const TensorT<T>&, const BatchNormCache<T>&,  \
                                                     const TensorT<T>&);                            \
    template TensorT<T> relu<T>(const TensorT<T>&);                                                 \
    template TensorT<T> relu_backward<T>(const TensorT<T>&, const TensorT<T>&);                     \
    template std::pair<TensorT<T>, PoolIndices> maxpool2x2<T>(const TensorT<T>&);                   \
    template TensorT<T> maxpool2x2_backward<T>(const TensorT<T>&, const PoolIndices&,               \
                                               const Shape&);                                       \
    template TensorT<T> argmax_unpool<T>(const TensorT<T>&, const PoolIndices&, const Shape&);      \
    template TensorT<T> argmax_unpool_backward<T>(const TensorT<T>&, const PoolIndices&);           \
    template TensorT<T> softmax_channels<T>(const TensorT<T>&);                                     \
    template LossResult<T> softmax_cross_entropy<T>(const TensorT<T>&,                              \
                                                    const std::vector<std::int32_t>&,               \
                                                    std::optional<std::int32_t>);                   \
    template TensorT<T> linear<T>(const TensorT<T>&, const TensorT<T>&, const TensorT<T>&);         \
    template LinearGrads<T> linear_backward<T>(const TensorT<T>&, const TensorT<T>&,                \
                                               const TensorT<T>&);

VEHNET_INSTANTIATE_OPS(float)
VEHNET_INSTANTIATE_OPS(double)

#undef VEHNET_INSTANTIATE_OPS

}  // namespace vehnet::nn
