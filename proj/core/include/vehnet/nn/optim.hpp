#pragma once

#include <algorithm>
#include <vector>

#include "vehnet/nn/params.hpp"

namespace vehnet::nn {

/// Step schedule: rate(e) = base_rate / drop_factor^(number of drop_epochs <= e).
struct LrSchedule {
    double base_rate = 0.1;
    std::vector<int> drop_epochs;  // sorted epoch indices
    double drop_factor = 10.0;

    double rate(int epoch) const {
        if (base_rate <= 0.0) throw std::invalid_argument("lr schedule: base_rate must be > 0");
        if (drop_factor <= 0.0) throw std::invalid_argument("lr schedule: drop_factor must be > 0");
        double r = base_rate;
        for (int d : drop_epochs) {
            if (d <= epoch) r /= drop_factor;
        }
        return r;
    }
};

/// p <- p - rate(epoch) * g for every trainable parameter, then zero all
/// gradients. Throws on a non-finite gradient, naming the parameter.
void sgd_step(ParamStore& params, const LrSchedule& schedule, int epoch);

}  // namespace vehnet::nn
