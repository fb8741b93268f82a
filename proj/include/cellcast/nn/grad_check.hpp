#pragma once

#include <functional>
#include <string>

#include "cellcast/nn/layers.hpp"

namespace cellcast::nn {

/// Runs forward, returns the scalar loss, and when the flag is set also
/// runs backward (gradient buffers are zeroed by the caller).
using LossFn = std::function<double(bool with_gradients)>;

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::string worst_parameter;
    std::size_t worst_index = 0;
    std::size_t checked = 0;
};

/// Central differences over every parameter entry. The error of one entry
/// is |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
/// Throws NumericError when a loss evaluation is not finite.
GradCheckResult grad_check(const ParameterList& params, const LossFn& loss, double eps = 1e-5);

}  // namespace cellcast::nn
