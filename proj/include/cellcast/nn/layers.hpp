#pragma once

// Layers with hand-written backward passes. Each forward() caches what its
// backward() needs; backward() accumulates into the parameter gradient
// buffers and returns the gradient with respect to the layer input.
// Instances are not thread safe.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "cellcast/nn/ndarray.hpp"
#include "cellcast/rng.hpp"

namespace cellcast::nn {

struct Parameter {
    std::string name;
    NdArray value;
    NdArray grad;

    Parameter(std::string n, Shape shape) : name(std::move(n)), value(shape), grad(std::move(shape)) {}
    void zero_grad() { grad.fill(0.0); }
};

using ParameterList = std::vector<Parameter*>;

void zero_grads(const ParameterList& params);

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
void xavier_uniform(NdArray& array, std::size_t fan_in, std::size_t fan_out, Rng& rng);

class Layer {
public:
    virtual ~Layer() = default;
    virtual ParameterList parameters() = 0;
    /// Weights Xavier-uniform, biases zero (LSTM forget gate: one).
    virtual void initialize(Rng& rng) = 0;
};

/// out[t, o] = b[o] + sum_{k,i} w[k, i, o] * in[t - (K - 1 - k) * dilation, i],
/// with in[<0] = 0. Input and output are [time, channels].
class CausalConv1d : public Layer {
public:
    CausalConv1d(const std::string& name, std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                 std::size_t dilation = 1);

    NdArray forward(const NdArray& input);
    NdArray backward(const NdArray& grad_output);

    ParameterList parameters() override { return {&weight_, &bias_}; }
    void initialize(Rng& rng) override;

    Parameter& weight() { return weight_; }  // [kernel, in, out]
    Parameter& bias() { return bias_; }      // [out]
    std::size_t in_channels() const { return in_; }
    std::size_t out_channels() const { return out_; }
    std::size_t kernel() const { return kernel_; }
    std::size_t dilation() const { return dilation_; }

private:
    std::size_t in_, out_, kernel_, dilation_;
    Parameter weight_;
    Parameter bias_;
    NdArray input_;
    bool has_input_ = false;
};

/// Length-1 convolution, i.e. a per-time-step linear map of the channels.
class PointwiseConv1d : public CausalConv1d {
public:
    PointwiseConv1d(const std::string& name, std::size_t in_channels, std::size_t out_channels)
        : CausalConv1d(name, in_channels, out_channels, 1, 1) {}
};

/// Standard LSTM, gates ordered (input, forget, candidate, output), zero
/// initial state. w_x is [in, 4H], w_h is [H, 4H], bias is [4H].
class Lstm : public Layer {
public:
    Lstm(const std::string& name, std::size_t input_size, std::size_t hidden_size);

    /// [time, in] -> [time, H]
    NdArray forward(const NdArray& input);
    /// Backpropagation through time over the whole cached sequence.
    NdArray backward(const NdArray& grad_output);

    /// Hidden state after the last step (zeros for an empty sequence).
    std::vector<double> final_hidden() const;

    ParameterList parameters() override { return {&w_x_, &w_h_, &bias_}; }
    void initialize(Rng& rng) override;

    Parameter& input_weights() { return w_x_; }
    Parameter& recurrent_weights() { return w_h_; }
    Parameter& bias() { return bias_; }
    std::size_t input_size() const { return in_; }
    std::size_t hidden_size() const { return hidden_; }

private:
    std::size_t in_, hidden_;
    Parameter w_x_;
    Parameter w_h_;
    Parameter bias_;
    // Caches from the last forward pass.
    NdArray input_;
    NdArray gates_;      // [T, 4H] post-activation
    NdArray cell_;       // [T, H]
    NdArray cell_tanh_;  // [T, H]
    NdArray hidden_seq_; // [T, H]
    bool has_input_ = false;
};

/// y = b + x W for a single vector; W is [in, out].
class Dense : public Layer {
public:
    Dense(const std::string& name, std::size_t in_features, std::size_t out_features);

    NdArray forward(const NdArray& input);  // [in] -> [out]
    NdArray backward(const NdArray& grad_output);

    ParameterList parameters() override { return {&weight_, &bias_}; }
    void initialize(Rng& rng) override;

    Parameter& weight() { return weight_; }
    Parameter& bias() { return bias_; }
    std::size_t in_features() const { return in_; }
    std::size_t out_features() const { return out_; }

private:
    std::size_t in_, out_;
    Parameter weight_;
    Parameter bias_;
    NdArray input_;
    bool has_input_ = false;
};

class Tanh {
public:
    NdArray forward(const NdArray& input);
    NdArray backward(const NdArray& grad_output);

private:
    NdArray output_;
    bool has_output_ = false;
};

/// Elementwise sum of equal shapes.
NdArray add(const NdArray& a, const NdArray& b);
/// d(a + b): the upstream gradient flows unchanged to both addends.
std::pair<NdArray, NdArray> add_backward(const NdArray& grad_output);

}  // namespace cellcast::nn
