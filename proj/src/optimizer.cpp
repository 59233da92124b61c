#include "masklab/optimizer.hpp"

#include <cmath>

#include "masklab/error.hpp"

namespace masklab {

void AdamState::init(const std::vector<Tensor*>& params) {
    m.clear();
    v.clear();
    step = 0;
    for (const Tensor* p : params) {
        m.emplace_back(p->shape());
        v.emplace_back(p->shape());
    }
}

void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
               AdamState& state, const AdamConfig& cfg) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw ContractError("adam_step: parameter, gradient and state counts differ");
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k];
        const Tensor& g = *grads[k];
        if (!p.same_shape(g) || !p.same_shape(state.m[k]))
            throw ShapeError("adam_step: parameter " + p.shape_str() +
                             " vs gradient " + g.shape_str());
        Tensor& mk = state.m[k];
        Tensor& vk = state.v[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
            mk[i] = cfg.beta1 * mk[i] + (1.0 - cfg.beta1) * g[i];
            vk[i] = cfg.beta2 * vk[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double mhat = mk[i] / bc1;
            const double vhat = vk[i] / bc2;
            p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
        }
    }
}

} // namespace masklab
