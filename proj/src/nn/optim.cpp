#include "cellcast/nn/optim.hpp"

#include <cmath>

#include "cellcast/error.hpp"
#include "cellcast/simd/kernels.hpp"

namespace cellcast::nn {

AdamState make_adam_state(const ParameterList& params, const AdamConfig& config) {
    if (!(config.lr > 0.0)) throw UsageError("adam: learning rate must be > 0");
    AdamState state;
    state.config = config;
    for (const auto* p : params) {
        state.first_moment.emplace_back(p->value.shape());
        state.second_moment.emplace_back(p->value.shape());
    }
    return state;
}

void adam_step(AdamState& state, const ParameterList& params) {
    if (params.size() != state.first_moment.size()) throw UsageError("adam: parameter list does not match state");
    for (std::size_t p = 0; p < params.size(); ++p) {
        if (params[p]->grad.shape() != state.first_moment[p].shape()) {
            throw UsageError("adam: shape mismatch for " + params[p]->name);
        }
        if (!params[p]->grad.all_finite()) throw NumericError("adam: non-finite gradient in " + params[p]->name);
    }

    const auto& c = state.config;
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(c.beta1, t);
    const double correction2 = 1.0 - std::pow(c.beta2, t);
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto value = params[p]->value.data();
        const auto grad = params[p]->grad.data();
        auto m = state.first_moment[p].data();
        auto v = state.second_moment[p].data();
        for (std::size_t i = 0; i < value.size(); ++i) {
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * grad[i];
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            value[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
        }
    }
}

double global_grad_norm(const ParameterList& params) {
    double total = 0.0;
    for (const auto* p : params) total += simd::dot(p->grad.data(), p->grad.data());
    return std::sqrt(total);
}

double clip_grad_norm(const ParameterList& params, double max_norm) {
    const double norm = global_grad_norm(params);
    if (norm > max_norm && norm > 0.0) {
        const double scale = max_norm / norm;
        for (auto* p : params)
            for (double& g : p->grad.data()) g *= scale;
    }
    return norm;
}

}  // namespace cellcast::nn
