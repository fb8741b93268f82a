#pragma once

// Forecasting networks built from the nn layers: the stacked TCN-LSTM with
// residual convolutional connections, plus LSTM-only and MLP baselines.
// Every model maps a [window, 1] history to a [horizon] forecast.

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cellcast/nn/layers.hpp"

namespace cellcast::model {

using nn::NdArray;
using nn::ParameterList;

enum class Variant { MultiTcnLstm, Lstm, Mlp };

Variant parse_variant(std::string_view name);
std::string_view to_string(Variant variant);

struct MultiTcnLstmConfig {
    std::vector<std::size_t> channels{16, 32, 64};
    std::size_t kernel = 3;
    std::vector<std::size_t> dilations{1, 2, 4};
    /// Per-block LSTM width; empty means "same as the block's channels".
    std::vector<std::size_t> lstm_hidden;
    std::size_t window = 24;
    std::size_t horizon = 1;
    std::uint64_t seed = 0;

    std::vector<std::size_t> resolved_lstm_hidden() const;
    /// Throws UsageError on the first violated invariant.
    void validate() const;
};

struct BaselineConfig {
    std::size_t lstm_hidden = 64;
    std::vector<std::size_t> mlp_widths{64, 64};
};

/// Everything needed to rebuild a model for any variant.
struct ModelSpec {
    Variant variant = Variant::MultiTcnLstm;
    MultiTcnLstmConfig tcn;   // window, horizon and seed apply to all variants
    BaselineConfig baseline;
};

class Forecaster {
public:
    virtual ~Forecaster() = default;

    /// [window, 1] -> [horizon]. Throws NumericError on non-finite activations.
    virtual NdArray forward(const NdArray& window) = 0;
    /// Gradient of the loss w.r.t. the last forward's output; accumulates
    /// parameter gradients and returns the gradient w.r.t. the window.
    virtual NdArray backward(const NdArray& grad_output) = 0;
    virtual ParameterList parameters() = 0;
    virtual Variant variant() const = 0;

    std::size_t window() const { return window_; }
    std::size_t horizon() const { return horizon_; }
    std::size_t parameter_count();

protected:
    Forecaster(std::size_t window, std::size_t horizon) : window_(window), horizon_(horizon) {}
    void check_window(const NdArray& window) const;

private:
    std::size_t window_;
    std::size_t horizon_;
};

/// y = LSTM(conv(x)) + P(x), P a pointwise projection to the LSTM width.
class TcnLstmBlock {
public:
    TcnLstmBlock(const std::string& name, std::size_t in_channels, std::size_t conv_channels, std::size_t kernel,
                 std::size_t dilation, std::size_t lstm_hidden);

    NdArray forward(const NdArray& input);
    NdArray backward(const NdArray& grad_output);
    ParameterList parameters();
    void initialize(Rng& rng);

    nn::CausalConv1d& conv() { return conv_; }
    nn::Lstm& lstm() { return lstm_; }
    nn::PointwiseConv1d& residual() { return residual_; }

private:
    std::string name_;
    nn::CausalConv1d conv_;
    nn::Lstm lstm_;
    nn::PointwiseConv1d residual_;
};

class MultiTcnLstm final : public Forecaster {
public:
    explicit MultiTcnLstm(const MultiTcnLstmConfig& config);

    NdArray forward(const NdArray& window) override;
    NdArray backward(const NdArray& grad_output) override;
    ParameterList parameters() override;
    Variant variant() const override { return Variant::MultiTcnLstm; }

    const MultiTcnLstmConfig& config() const { return config_; }
    std::vector<TcnLstmBlock>& blocks() { return blocks_; }
    nn::Dense& head() { return head_; }

private:
    MultiTcnLstmConfig config_;
    std::vector<TcnLstmBlock> blocks_;
    nn::Dense head_;
    std::size_t last_steps_ = 0;
};

/// Single LSTM over the window, dense head on the last hidden state.
class LstmBaseline final : public Forecaster {
public:
    LstmBaseline(std::size_t hidden, std::size_t window, std::size_t horizon, std::uint64_t seed);

    NdArray forward(const NdArray& window) override;
    NdArray backward(const NdArray& grad_output) override;
    ParameterList parameters() override;
    Variant variant() const override { return Variant::Lstm; }

    nn::Lstm& lstm() { return lstm_; }
    nn::Dense& head() { return head_; }

private:
    nn::Lstm lstm_;
    nn::Dense head_;
};

/// Flattened window through tanh hidden layers and a linear head. With no
/// hidden widths it is a plain linear map window -> horizon.
class MlpBaseline final : public Forecaster {
public:
    MlpBaseline(std::vector<std::size_t> widths, std::size_t window, std::size_t horizon, std::uint64_t seed);

    NdArray forward(const NdArray& window) override;
    NdArray backward(const NdArray& grad_output) override;
    ParameterList parameters() override;
    Variant variant() const override { return Variant::Mlp; }

    std::vector<nn::Dense>& hidden_layers() { return hidden_; }
    nn::Dense& head() { return head_; }

private:
    std::vector<nn::Dense> hidden_;
    std::vector<nn::Tanh> activations_;
    nn::Dense head_;
};

std::unique_ptr<Forecaster> build(const MultiTcnLstmConfig& config);
std::unique_ptr<Forecaster> build_baseline_lstm(std::size_t hidden, std::size_t window, std::size_t horizon,
                                                std::uint64_t seed);
std::unique_ptr<Forecaster> build_baseline_mlp(std::vector<std::size_t> widths, std::size_t window,
                                               std::size_t horizon, std::uint64_t seed);
std::unique_ptr<Forecaster> build_model(const ModelSpec& spec);

/// Copies parameter values between two models of identical structure.
void copy_parameters(Forecaster& from, Forecaster& to);

}  // namespace cellcast::model
