#include "cellcast/nn/layers.hpp"

#include <cmath>

#include "cellcast/error.hpp"
#include "cellcast/simd/kernels.hpp"

namespace cellcast::nn {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void require_forward(bool cached, const std::string& layer) {
    if (!cached) throw UsageError(layer + ": backward called before forward");
}

void require_rank2(const NdArray& input, std::size_t channels, const std::string& layer) {
    if (input.rank() != 2 || input.dim(1) != channels) {
        throw UsageError(layer + ": expected input [time, " + std::to_string(channels) + "], got " +
                         to_string(input.shape()));
    }
}

}  // namespace

void zero_grads(const ParameterList& params) {
    for (auto* p : params) p->zero_grad();
}

void xavier_uniform(NdArray& array, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : array.data()) v = rng.uniform(-limit, limit);
}

// ---- CausalConv1d -----------------------------------------------------------

CausalConv1d::CausalConv1d(const std::string& name, std::size_t in_channels, std::size_t out_channels,
                           std::size_t kernel, std::size_t dilation)
    : in_(in_channels),
      out_(out_channels),
      kernel_(kernel),
      dilation_(dilation),
      weight_(name + ".weight", {kernel, in_channels, out_channels}),
      bias_(name + ".bias", {out_channels}) {
    if (in_ == 0 || out_ == 0 || kernel_ == 0 || dilation_ == 0) {
        throw UsageError(name + ": channels, kernel and dilation must be >= 1");
    }
}

void CausalConv1d::initialize(Rng& rng) {
    xavier_uniform(weight_.value, kernel_ * in_, kernel_ * out_, rng);
    bias_.value.fill(0.0);
}

NdArray CausalConv1d::forward(const NdArray& input) {
    require_rank2(input, in_, weight_.name);
    const std::size_t steps = input.dim(0);
    input_ = input;
    has_input_ = true;

    NdArray out({steps, out_});
    const auto& w = weight_.value;
    for (std::size_t t = 0; t < steps; ++t) {
        auto out_row = out.row(t);
        std::copy(bias_.value.data().begin(), bias_.value.data().end(), out_row.begin());
        for (std::size_t k = 0; k < kernel_; ++k) {
            const std::size_t lag = (kernel_ - 1 - k) * dilation_;
            if (lag > t) continue;
            const auto in_row = input.row(t - lag);
            for (std::size_t i = 0; i < in_; ++i) {
                simd::axpy(in_row[i], w.data().subspan((k * in_ + i) * out_, out_), out_row);
            }
        }
    }
    return out;
}

NdArray CausalConv1d::backward(const NdArray& grad_output) {
    require_forward(has_input_, weight_.name);
    const std::size_t steps = input_.dim(0);
    require_shape(grad_output, {steps, out_}, "CausalConv1d::backward");

    NdArray grad_input({steps, in_});
    auto gw = weight_.grad.data();
    const auto w = weight_.value.data();
    for (std::size_t t = 0; t < steps; ++t) {
        const auto g = grad_output.row(t);
        simd::axpy(1.0, g, bias_.grad.data());
        for (std::size_t k = 0; k < kernel_; ++k) {
            const std::size_t lag = (kernel_ - 1 - k) * dilation_;
            if (lag > t) continue;
            const auto in_row = input_.row(t - lag);
            auto gin_row = grad_input.row(t - lag);
            for (std::size_t i = 0; i < in_; ++i) {
                const std::size_t offset = (k * in_ + i) * out_;
                simd::axpy(in_row[i], g, gw.subspan(offset, out_));
                gin_row[i] += simd::dot(w.subspan(offset, out_), g);
            }
        }
    }
    return grad_input;
}

// ---- Lstm -------------------------------------------------------------------

Lstm::Lstm(const std::string& name, std::size_t input_size, std::size_t hidden_size)
    : in_(input_size),
      hidden_(hidden_size),
      w_x_(name + ".w_x", {input_size, 4 * hidden_size}),
      w_h_(name + ".w_h", {hidden_size, 4 * hidden_size}),
      bias_(name + ".bias", {4 * hidden_size}) {
    if (hidden_size == 0) throw UsageError(name + ": hidden_size must be >= 1");
    if (input_size == 0) throw UsageError(name + ": input_size must be >= 1");
}

void Lstm::initialize(Rng& rng) {
    xavier_uniform(w_x_.value, in_, 4 * hidden_, rng);
    xavier_uniform(w_h_.value, hidden_, 4 * hidden_, rng);
    bias_.value.fill(0.0);
    for (std::size_t j = hidden_; j < 2 * hidden_; ++j) bias_.value[j] = 1.0;
}

NdArray Lstm::forward(const NdArray& input) {
    require_rank2(input, in_, w_x_.name);
    const std::size_t steps = input.dim(0);
    const std::size_t H = hidden_;
    input_ = input;
    gates_ = NdArray({steps, 4 * H});
    cell_ = NdArray({steps, H});
    cell_tanh_ = NdArray({steps, H});
    hidden_seq_ = NdArray({steps, H});
    has_input_ = true;

    const auto wx = w_x_.value.data();
    const auto wh = w_h_.value.data();
    for (std::size_t t = 0; t < steps; ++t) {
        auto z = gates_.row(t);
        std::copy(bias_.value.data().begin(), bias_.value.data().end(), z.begin());
        const auto x = input.row(t);
        for (std::size_t i = 0; i < in_; ++i) simd::axpy(x[i], wx.subspan(i * 4 * H, 4 * H), z);
        if (t > 0) {
            const auto h_prev = hidden_seq_.row(t - 1);
            for (std::size_t j = 0; j < H; ++j) simd::axpy(h_prev[j], wh.subspan(j * 4 * H, 4 * H), z);
        }
        auto c = cell_.row(t);
        auto tc = cell_tanh_.row(t);
        auto h = hidden_seq_.row(t);
        for (std::size_t j = 0; j < H; ++j) {
            const double ig = sigmoid(z[j]);
            const double fg = sigmoid(z[H + j]);
            const double gg = std::tanh(z[2 * H + j]);
            const double og = sigmoid(z[3 * H + j]);
            z[j] = ig;
            z[H + j] = fg;
            z[2 * H + j] = gg;
            z[3 * H + j] = og;
            const double c_prev = t > 0 ? cell_.at(t - 1, j) : 0.0;
            c[j] = fg * c_prev + ig * gg;
            tc[j] = std::tanh(c[j]);
            h[j] = og * tc[j];
        }
    }
    return hidden_seq_;
}

std::vector<double> Lstm::final_hidden() const {
    if (!has_input_ || hidden_seq_.dim(0) == 0) return std::vector<double>(hidden_, 0.0);
    const auto last = hidden_seq_.row(hidden_seq_.dim(0) - 1);
    return {last.begin(), last.end()};
}

NdArray Lstm::backward(const NdArray& grad_output) {
    require_forward(has_input_, w_x_.name);
    const std::size_t steps = input_.dim(0);
    const std::size_t H = hidden_;
    require_shape(grad_output, {steps, H}, "Lstm::backward");

    NdArray grad_input({steps, in_});
    std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0), dz(4 * H);
    const auto wx = w_x_.value.data();
    const auto wh = w_h_.value.data();
    auto gwx = w_x_.grad.data();
    auto gwh = w_h_.grad.data();

    for (std::size_t t = steps; t-- > 0;) {
        const auto gates = gates_.row(t);
        const auto g_out = grad_output.row(t);
        for (std::size_t j = 0; j < H; ++j) {
            const double ig = gates[j], fg = gates[H + j], gg = gates[2 * H + j], og = gates[3 * H + j];
            const double tc = cell_tanh_.at(t, j);
            const double c_prev = t > 0 ? cell_.at(t - 1, j) : 0.0;
            const double dh = g_out[j] + dh_next[j];
            const double dc = dh * og * (1.0 - tc * tc) + dc_next[j];
            dz[j] = dc * gg * ig * (1.0 - ig);
            dz[H + j] = dc * c_prev * fg * (1.0 - fg);
            dz[2 * H + j] = dc * ig * (1.0 - gg * gg);
            dz[3 * H + j] = dh * tc * og * (1.0 - og);
            dc_next[j] = dc * fg;
        }
        simd::axpy(1.0, dz, bias_.grad.data());
        const auto x = input_.row(t);
        auto gx = grad_input.row(t);
        for (std::size_t i = 0; i < in_; ++i) {
            const auto w_row = wx.subspan(i * 4 * H, 4 * H);
            simd::axpy(x[i], dz, gwx.subspan(i * 4 * H, 4 * H));
            gx[i] = simd::dot(w_row, dz);
        }
        for (std::size_t j = 0; j < H; ++j) {
            const auto w_row = wh.subspan(j * 4 * H, 4 * H);
            if (t > 0) simd::axpy(hidden_seq_.at(t - 1, j), dz, gwh.subspan(j * 4 * H, 4 * H));
            dh_next[j] = simd::dot(w_row, dz);
        }
    }
    return grad_input;
}

// ---- Dense ------------------------------------------------------------------

Dense::Dense(const std::string& name, std::size_t in_features, std::size_t out_features)
    : in_(in_features),
      out_(out_features),
      weight_(name + ".weight", {in_features, out_features}),
      bias_(name + ".bias", {out_features}) {
    if (in_ == 0 || out_ == 0) throw UsageError(name + ": features must be >= 1");
}

void Dense::initialize(Rng& rng) {
    xavier_uniform(weight_.value, in_, out_, rng);
    bias_.value.fill(0.0);
}

NdArray Dense::forward(const NdArray& input) {
    require_shape(input, {in_}, weight_.name.c_str());
    input_ = input;
    has_input_ = true;
    NdArray out = bias_.value;
    const auto w = weight_.value.data();
    for (std::size_t i = 0; i < in_; ++i) simd::axpy(input[i], w.subspan(i * out_, out_), out.data());
    return out;
}

NdArray Dense::backward(const NdArray& grad_output) {
    require_forward(has_input_, weight_.name);
    require_shape(grad_output, {out_}, "Dense::backward");
    NdArray grad_input({in_});
    const auto w = weight_.value.data();
    auto gw = weight_.grad.data();
    simd::axpy(1.0, grad_output.data(), bias_.grad.data());
    for (std::size_t i = 0; i < in_; ++i) {
        simd::axpy(input_[i], grad_output.data(), gw.subspan(i * out_, out_));
        grad_input[i] = simd::dot(w.subspan(i * out_, out_), grad_output.data());
    }
    return grad_input;
}

// ---- Tanh / add ---------------------------------------------------------------

NdArray Tanh::forward(const NdArray& input) {
    output_ = input;
    for (double& v : output_.data()) v = std::tanh(v);
    has_output_ = true;
    return output_;
}

NdArray Tanh::backward(const NdArray& grad_output) {
    require_forward(has_output_, "tanh");
    require_shape(grad_output, output_.shape(), "Tanh::backward");
    NdArray grad = grad_output;
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= 1.0 - output_[i] * output_[i];
    return grad;
}

NdArray add(const NdArray& a, const NdArray& b) {
    require_shape(b, a.shape(), "add");
    NdArray out = a;
    simd::axpy(1.0, b.data(), out.data());
    return out;
}

std::pair<NdArray, NdArray> add_backward(const NdArray& grad_output) { return {grad_output, grad_output}; }

}  // namespace cellcast::nn
