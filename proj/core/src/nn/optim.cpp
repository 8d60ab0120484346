#include "vehnet/nn/optim.hpp"

namespace vehnet::nn {

void sgd_step(ParamStore& params, const LrSchedule& schedule, int epoch) {
    const real_t lr = static_cast<real_t>(schedule.rate(epoch));
    for (auto& [name, p] : params) {
        if (!p.trainable) continue;
        if (!p.grad.all_finite()) {
            throw std::runtime_error("sgd_step: non-finite gradient for parameter '" + name + "'");
        }
        for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] -= lr * p.grad[i];
    }
    params.zero_grads();
}

}  // namespace vehnet::nn
