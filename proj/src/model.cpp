#include "cellcast/model.hpp"

#include <algorithm>

#include "cellcast/error.hpp"

namespace cellcast::model {

Variant parse_variant(std::string_view name) {
    if (name == "multi-tcn-lstm") return Variant::MultiTcnLstm;
    if (name == "lstm") return Variant::Lstm;
    if (name == "mlp") return Variant::Mlp;
    throw UsageError("unknown variant '" + std::string(name) + "' (expected multi-tcn-lstm|lstm|mlp)");
}

std::string_view to_string(Variant variant) {
    switch (variant) {
        case Variant::MultiTcnLstm: return "multi-tcn-lstm";
        case Variant::Lstm: return "lstm";
        case Variant::Mlp: return "mlp";
    }
    return "unknown";
}

std::vector<std::size_t> MultiTcnLstmConfig::resolved_lstm_hidden() const {
    return lstm_hidden.empty() ? channels : lstm_hidden;
}

void MultiTcnLstmConfig::validate() const {
    if (channels.empty()) throw UsageError("model: channels must be non-empty");
    if (dilations.size() != channels.size()) throw UsageError("model: need one dilation per block");
    if (!lstm_hidden.empty() && lstm_hidden.size() != channels.size()) {
        throw UsageError("model: need one lstm_hidden per block");
    }
    auto positive = [](const std::vector<std::size_t>& v) {
        return std::all_of(v.begin(), v.end(), [](std::size_t x) { return x > 0; });
    };
    if (!positive(channels) || !positive(dilations) || !positive(lstm_hidden)) {
        throw UsageError("model: channels, dilations and lstm widths must be >= 1");
    }
    if (kernel == 0) throw UsageError("model: kernel must be >= 1");
    if (horizon == 0) throw UsageError("model: horizon must be >= 1");
    const std::size_t max_dilation = *std::max_element(dilations.begin(), dilations.end());
    if (window < (kernel - 1) * max_dilation + 1) {
        throw UsageError("model: window shorter than one convolution receptive field");
    }
}

std::size_t Forecaster::parameter_count() {
    std::size_t n = 0;
    for (const auto* p : parameters()) n += p->value.size();
    return n;
}

void Forecaster::check_window(const NdArray& window) const {
    nn::require_shape(window, {window_, 1}, "forecaster input");
}

// ---- block --------------------------------------------------------------------

TcnLstmBlock::TcnLstmBlock(const std::string& name, std::size_t in_channels, std::size_t conv_channels,
                           std::size_t kernel, std::size_t dilation, std::size_t lstm_hidden)
    : name_(name),
      conv_(name + ".conv", in_channels, conv_channels, kernel, dilation),
      lstm_(name + ".lstm", conv_channels, lstm_hidden),
      residual_(name + ".residual", in_channels, lstm_hidden) {}

NdArray TcnLstmBlock::forward(const NdArray& input) {
    NdArray out = nn::add(lstm_.forward(conv_.forward(input)), residual_.forward(input));
    if (!out.all_finite()) throw NumericError("non-finite activation in " + name_);
    return out;
}

NdArray TcnLstmBlock::backward(const NdArray& grad_output) {
    auto [grad_main, grad_skip] = nn::add_backward(grad_output);
    NdArray grad_input = conv_.backward(lstm_.backward(grad_main));
    return nn::add(grad_input, residual_.backward(grad_skip));
}

ParameterList TcnLstmBlock::parameters() {
    ParameterList params = conv_.parameters();
    for (auto* p : lstm_.parameters()) params.push_back(p);
    for (auto* p : residual_.parameters()) params.push_back(p);
    return params;
}

void TcnLstmBlock::initialize(Rng& rng) {
    conv_.initialize(rng);
    lstm_.initialize(rng);
    residual_.initialize(rng);
}

// ---- multi TCN-LSTM --------------------------------------------------------------

namespace {
const MultiTcnLstmConfig& validated(const MultiTcnLstmConfig& config) {
    config.validate();
    return config;
}
}  // namespace

MultiTcnLstm::MultiTcnLstm(const MultiTcnLstmConfig& config)
    : Forecaster(validated(config).window, config.horizon),
      config_(config),
      head_("head", config.resolved_lstm_hidden().back(), config.horizon) {
    const auto hidden = config.resolved_lstm_hidden();
    blocks_.reserve(config.channels.size());
    std::size_t in_channels = 1;
    for (std::size_t b = 0; b < config.channels.size(); ++b) {
        blocks_.emplace_back("block" + std::to_string(b), in_channels, config.channels[b], config.kernel,
                             config.dilations[b], hidden[b]);
        in_channels = hidden[b];
    }
    Rng rng(config.seed);
    for (auto& block : blocks_) block.initialize(rng);
    head_.initialize(rng);
}

NdArray MultiTcnLstm::forward(const NdArray& window) {
    check_window(window);
    NdArray x = window;
    for (auto& block : blocks_) x = block.forward(x);
    last_steps_ = x.dim(0);
    const auto last = x.row(last_steps_ - 1);
    NdArray out = head_.forward(NdArray({last.size()}, std::vector<double>(last.begin(), last.end())));
    if (!out.all_finite()) throw NumericError("non-finite activation in head");
    return out;
}

NdArray MultiTcnLstm::backward(const NdArray& grad_output) {
    const NdArray grad_last = head_.backward(grad_output);
    NdArray grad({last_steps_, grad_last.size()});
    std::copy(grad_last.data().begin(), grad_last.data().end(), grad.row(last_steps_ - 1).begin());
    for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it) grad = it->backward(grad);
    return grad;
}

ParameterList MultiTcnLstm::parameters() {
    ParameterList params;
    for (auto& block : blocks_)
        for (auto* p : block.parameters()) params.push_back(p);
    for (auto* p : head_.parameters()) params.push_back(p);
    return params;
}

// ---- baselines -----------------------------------------------------------------------

LstmBaseline::LstmBaseline(std::size_t hidden, std::size_t window, std::size_t horizon, std::uint64_t seed)
    : Forecaster(window, horizon), lstm_("lstm", 1, hidden), head_("head", hidden, horizon) {
    if (window == 0 || horizon == 0) throw UsageError("lstm baseline: window and horizon must be >= 1");
    Rng rng(seed);
    lstm_.initialize(rng);
    head_.initialize(rng);
}

NdArray LstmBaseline::forward(const NdArray& window) {
    check_window(window);
    lstm_.forward(window);
    const auto last = lstm_.final_hidden();
    NdArray out = head_.forward(NdArray({last.size()}, last));
    if (!out.all_finite()) throw NumericError("non-finite activation in lstm baseline");
    return out;
}

NdArray LstmBaseline::backward(const NdArray& grad_output) {
    const NdArray grad_last = head_.backward(grad_output);
    NdArray grad({window(), grad_last.size()});
    std::copy(grad_last.data().begin(), grad_last.data().end(), grad.row(window() - 1).begin());
    return lstm_.backward(grad);
}

ParameterList LstmBaseline::parameters() {
    ParameterList params = lstm_.parameters();
    for (auto* p : head_.parameters()) params.push_back(p);
    return params;
}

MlpBaseline::MlpBaseline(std::vector<std::size_t> widths, std::size_t window, std::size_t horizon,
                         std::uint64_t seed)
    : Forecaster(window, horizon),
      head_("head", widths.empty() ? window : widths.back(), horizon) {
    if (window == 0 || horizon == 0) throw UsageError("mlp baseline: window and horizon must be >= 1");
    hidden_.reserve(widths.size());
    std::size_t in = window;
    for (std::size_t i = 0; i < widths.size(); ++i) {
        hidden_.emplace_back("hidden" + std::to_string(i), in, widths[i]);
        activations_.emplace_back();
        in = widths[i];
    }
    Rng rng(seed);
    for (auto& layer : hidden_) layer.initialize(rng);
    head_.initialize(rng);
}

NdArray MlpBaseline::forward(const NdArray& window) {
    check_window(window);
    NdArray x({this->window()}, window.values());
    for (std::size_t i = 0; i < hidden_.size(); ++i) x = activations_[i].forward(hidden_[i].forward(x));
    NdArray out = head_.forward(x);
    if (!out.all_finite()) throw NumericError("non-finite activation in mlp baseline");
    return out;
}

NdArray MlpBaseline::backward(const NdArray& grad_output) {
    NdArray grad = head_.backward(grad_output);
    for (std::size_t i = hidden_.size(); i-- > 0;) grad = hidden_[i].backward(activations_[i].backward(grad));
    return NdArray({window(), 1}, grad.values());
}

ParameterList MlpBaseline::parameters() {
    ParameterList params;
    for (auto& layer : hidden_)
        for (auto* p : layer.parameters()) params.push_back(p);
    for (auto* p : head_.parameters()) params.push_back(p);
    return params;
}

// ---- factories --------------------------------------------------------------------------

std::unique_ptr<Forecaster> build(const MultiTcnLstmConfig& config) { return std::make_unique<MultiTcnLstm>(config); }

std::unique_ptr<Forecaster> build_baseline_lstm(std::size_t hidden, std::size_t window, std::size_t horizon,
                                                std::uint64_t seed) {
    return std::make_unique<LstmBaseline>(hidden, window, horizon, seed);
}

std::unique_ptr<Forecaster> build_baseline_mlp(std::vector<std::size_t> widths, std::size_t window,
                                               std::size_t horizon, std::uint64_t seed) {
    return std::make_unique<MlpBaseline>(std::move(widths), window, horizon, seed);
}

std::unique_ptr<Forecaster> build_model(const ModelSpec& spec) {
    switch (spec.variant) {
        case Variant::MultiTcnLstm:
            return build(spec.tcn);
        case Variant::Lstm:
            return build_baseline_lstm(spec.baseline.lstm_hidden, spec.tcn.window, spec.tcn.horizon, spec.tcn.seed);
        case Variant::Mlp:
            return build_baseline_mlp(spec.baseline.mlp_widths, spec.tcn.window, spec.tcn.horizon, spec.tcn.seed);
    }
    throw UsageError("unknown variant");
}

void copy_parameters(Forecaster& from, Forecaster& to) {
    const auto src = from.parameters();
    const auto dst = to.parameters();
    if (src.size() != dst.size()) throw UsageError("copy_parameters: structure mismatch");
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (src[i]->value.shape() != dst[i]->value.shape()) throw UsageError("copy_parameters: shape mismatch");
        dst[i]->value = src[i]->value;
    }
}

}  // namespace cellcast::model
