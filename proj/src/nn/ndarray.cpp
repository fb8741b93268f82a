#include "cellcast/nn/ndarray.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "cellcast/error.hpp"

namespace cellcast::nn {

namespace {
std::size_t element_count(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}
std::size_t trailing_count(const Shape& shape) {
    return shape.empty() ? 0 : std::accumulate(shape.begin() + 1, shape.end(), std::size_t{1}, std::multiplies<>());
}
}  // namespace

std::string to_string(const Shape& shape) {
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

NdArray::NdArray(Shape shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill), row_stride_(trailing_count(shape_)) {}

NdArray::NdArray(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)), row_stride_(trailing_count(shape_)) {
    if (data_.size() != element_count(shape_)) {
        throw UsageError("NdArray: " + std::to_string(data_.size()) + " values do not fill shape " + to_string(shape_));
    }
}

std::span<double> NdArray::row(std::size_t i) {
    const std::size_t stride = row_stride_;
    return std::span<double>(data_).subspan(i * stride, stride);
}

std::span<const double> NdArray::row(std::size_t i) const {
    const std::size_t stride = row_stride_;
    return std::span<const double>(data_).subspan(i * stride, stride);
}

void NdArray::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool NdArray::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_shape(const NdArray& array, const Shape& expected, const char* what) {
    if (array.shape() != expected) {
        throw UsageError(std::string(what) + ": expected shape " + to_string(expected) + ", got " +
                         to_string(array.shape()));
    }
}

}  // namespace cellcast::nn
