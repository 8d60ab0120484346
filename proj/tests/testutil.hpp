#pragma once

#include <cmath>
#include <random>

#include "vehnet/tensor.hpp"

namespace testutil {

using vehnet::Shape;
using vehnet::TensorT;

inline TensorT<double> random_tensor(Shape shape, std::mt19937& rng, double lo = -1.0,
                                     double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    TensorT<double> t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
    return t;
}

inline double weighted_sum(const TensorT<double>& values, const TensorT<double>& weights) {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * weights[i];
    return s;
}

/// Relative error with a floor: tiny gradients are compared absolutely
/// (|a - f| < 1e-7 passes), everything else relatively.
inline double rel_error(double analytic, double fd) {
    const double denom = std::max({1e-3, std::abs(analytic), std::abs(fd)});
    return std::abs(analytic - fd) / denom;
}

/// Central finite differences of `loss` against `analytic` over every
/// coordinate of `x`; returns the max relative error.
template <typename Loss>
double fd_check(TensorT<double>& x, const TensorT<double>& analytic, Loss&& loss,
                double h = 1e-4) {
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double lp = loss();
        x[i] = orig - h;
        const double lm = loss();
        x[i] = orig;
        const double fd = (lp - lm) / (2.0 * h);
        worst = std::max(worst, rel_error(analytic[i], fd));
    }
    return worst;
}

}  // namespace testutil
