#pragma once

#include <cstdint>
#include <vector>

#include "cellcast/nn/layers.hpp"

namespace cellcast::nn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig config;
    std::int64_t step = 0;
    std::vector<NdArray> first_moment;   // one per parameter, same shape
    std::vector<NdArray> second_moment;
};

AdamState make_adam_state(const ParameterList& params, const AdamConfig& config = {});

/// Bias-corrected Adam update of every parameter from its grad buffer.
/// Checks all gradients first and throws NumericError naming the first
/// non-finite one, leaving parameters and state untouched.
void adam_step(AdamState& state, const ParameterList& params);

double global_grad_norm(const ParameterList& params);

/// Rescales all gradients so their global L2 norm is at most max_norm.
/// Returns the norm before clipping.
double clip_grad_norm(const ParameterList& params, double max_norm);

}  // namespace cellcast::nn
