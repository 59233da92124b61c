#pragma once

#include <vector>

#include "masklab/tensor.hpp"

namespace masklab {

// Adam with bias correction. Moment buffers mirror the parameter list given
// to init(); steps are counted globally, not per parameter.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    long step = 0;

    void init(const std::vector<Tensor*>& params);
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
               AdamState& state, const AdamConfig& cfg);

} // namespace masklab
