#include "cellcast/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "cellcast/error.hpp"

namespace cellcast::nn {

GradCheckResult grad_check(const ParameterList& params, const LossFn& loss, double eps) {
    auto evaluate = [&](bool with_gradients) {
        const double value = loss(with_gradients);
        if (!std::isfinite(value)) throw NumericError("grad_check: non-finite loss");
        return value;
    };

    zero_grads(params);
    evaluate(true);
    std::vector<NdArray> analytic;
    analytic.reserve(params.size());
    for (const auto* p : params) analytic.push_back(p->grad);

    GradCheckResult result;
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto values = params[p]->value.data();
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double saved = values[i];
            values[i] = saved + eps;
            const double plus = evaluate(false);
            values[i] = saved - eps;
            const double minus = evaluate(false);
            values[i] = saved;

            const double numeric = (plus - minus) / (2.0 * eps);
            const double a = analytic[p][i];
            const double error = std::fabs(a - numeric) / std::max({std::fabs(a), std::fabs(numeric), 1e-8});
            ++result.checked;
            if (error > result.max_relative_error) {
                result.max_relative_error = error;
                result.worst_parameter = params[p]->name;
                result.worst_index = i;
            }
        }
    }
    // Leave the analytic gradients in place for callers that inspect them.
    for (std::size_t p = 0; p < params.size(); ++p) params[p]->grad = analytic[p];
    return result;
}

}  // namespace cellcast::nn
