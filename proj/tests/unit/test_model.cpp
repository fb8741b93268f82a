#include <doctest.h>

#include <cmath>
#include <limits>

#include "cellcast/error.hpp"
#include "cellcast/model.hpp"
#include "cellcast/nn/grad_check.hpp"
#include "helpers.hpp"

using namespace cellcast;
using namespace cellcast::model;
using testing::random_array;

namespace {

// Independent count: conv K*in*c + c, LSTM 4H(in + H + 1), residual
// in*H + H, head H_last*horizon + horizon.
std::size_t counted_parameters(const MultiTcnLstmConfig& c) {
    std::size_t total = 0;
    std::size_t in = 1;
    for (std::size_t b = 0; b < c.channels.size(); ++b) {
        const std::size_t ch = c.channels[b];
        const std::size_t h = c.lstm_hidden.empty() ? ch : c.lstm_hidden[b];
        total += c.kernel * in * ch + ch;
        total += 4 * h * (ch + h + 1);
        total += in * h + h;
        in = h;
    }
    return total + in * c.horizon + c.horizon;
}

MultiTcnLstmConfig small_config() {
    MultiTcnLstmConfig c;
    c.channels = {4, 8, 16};
    c.window = 9;
    c.horizon = 2;
    c.seed = 3;
    return c;
}

nn::GradCheckResult check_model(Forecaster& m, Rng& rng) {
    const auto x = random_array(rng, {m.window(), 1}, 2.0);
    const auto coef = random_array(rng, {m.horizon()});
    return nn::grad_check(m.parameters(), [&](bool with_gradients) {
        const auto y = m.forward(x);
        double loss = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) loss += coef[i] * y[i];
        if (with_gradients) m.backward(coef);
        return loss;
    });
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("variant names") {
    CHECK(parse_variant("multi-tcn-lstm") == Variant::MultiTcnLstm);
    CHECK(parse_variant("lstm") == Variant::Lstm);
    CHECK(parse_variant("mlp") == Variant::Mlp);
    CHECK(to_string(Variant::MultiTcnLstm) == "multi-tcn-lstm");
    CHECK_THROWS_AS(parse_variant("gru"), UsageError);
}

TEST_CASE("config validation") {
    MultiTcnLstmConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.resolved_lstm_hidden() == std::vector<std::size_t>{16, 32, 64});
    auto bad = c;
    bad.channels.clear();
    bad.dilations.clear();
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = c;
    bad.dilations = {1, 2};
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = c;
    bad.window = 8;  // needs (3 - 1) * 4 + 1 = 9
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad.window = 9;
    CHECK_NOTHROW(bad.validate());
    bad = c;
    bad.lstm_hidden = {8};
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = c;
    bad.horizon = 0;
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = c;
    bad.kernel = 0;
    CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("parameter count matches an independent count") {
    MultiTcnLstmConfig minimal;
    minimal.channels = {1};
    minimal.kernel = 1;
    minimal.dilations = {1};
    minimal.lstm_hidden = {1};
    minimal.window = 4;
    CHECK(build(minimal)->parameter_count() == 18);
    CHECK(counted_parameters(minimal) == 18);

    const MultiTcnLstmConfig defaults;
    CHECK(build(defaults)->parameter_count() == counted_parameters(defaults));
    CHECK(counted_parameters(defaults) == 54049);

    auto custom = small_config();
    custom.lstm_hidden = {3, 5, 7};
    CHECK(build(custom)->parameter_count() == counted_parameters(custom));
}

TEST_CASE("default build has three blocks and a head") {
    auto m = build(MultiTcnLstmConfig{});
    auto& net = dynamic_cast<MultiTcnLstm&>(*m);
    REQUIRE(net.blocks().size() == 3);
    CHECK(net.blocks()[0].conv().out_channels() == 16);
    CHECK(net.blocks()[1].conv().dilation() == 2);
    CHECK(net.blocks()[2].lstm().hidden_size() == 64);
    CHECK(net.blocks()[2].residual().in_channels() == 32);
    CHECK(net.head().in_features() == 64);
    CHECK(m->window() == 24);
    CHECK(m->horizon() == 1);
}

TEST_CASE("construction is deterministic under seed") {
    auto a = build(small_config());
    auto b = build(small_config());
    auto other = small_config();
    other.seed = 4;
    auto c = build(other);
    const auto pa = a->parameters(), pb = b->parameters(), pc = c->parameters();
    bool any_difference = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i]->name == pb[i]->name);
        CHECK(pa[i]->value == pb[i]->value);
        any_difference = any_difference || !(pa[i]->value == pc[i]->value);
    }
    CHECK(any_difference);
}

TEST_CASE("zero weights give zero output") {
    auto m = build(small_config());
    for (auto* p : m->parameters()) p->value.fill(0.0);
    Rng rng(1);
    const auto y = m->forward(random_array(rng, {9, 1}));
    for (double v : y.data()) CHECK(v == 0.0);

    auto mlp = build_baseline_mlp({64, 64}, 24, 1, 0);
    for (auto* p : mlp->parameters()) p->value.fill(0.0);
    CHECK(mlp->forward(random_array(rng, {24, 1}))[0] == 0.0);
}

TEST_CASE("forward equals a straight-line composition of layers") {
    Rng rng(2);
    auto m = build(small_config());
    auto& net = dynamic_cast<MultiTcnLstm&>(*m);
    const auto cfg = small_config();
    const auto x = random_array(rng, {9, 1});

    nn::NdArray h = x;
    std::size_t in = 1;
    for (std::size_t b = 0; b < 3; ++b) {
        nn::CausalConv1d conv("c", in, cfg.channels[b], cfg.kernel, cfg.dilations[b]);
        nn::Lstm lstm("l", cfg.channels[b], cfg.channels[b]);
        nn::PointwiseConv1d res("r", in, cfg.channels[b]);
        conv.weight().value = net.blocks()[b].conv().weight().value;
        conv.bias().value = net.blocks()[b].conv().bias().value;
        lstm.input_weights().value = net.blocks()[b].lstm().input_weights().value;
        lstm.recurrent_weights().value = net.blocks()[b].lstm().recurrent_weights().value;
        lstm.bias().value = net.blocks()[b].lstm().bias().value;
        res.weight().value = net.blocks()[b].residual().weight().value;
        res.bias().value = net.blocks()[b].residual().bias().value;
        h = nn::add(lstm.forward(conv.forward(h)), res.forward(h));
        in = cfg.channels[b];
    }
    nn::Dense head("h", 16, 2);
    head.weight().value = net.head().weight().value;
    head.bias().value = net.head().bias().value;
    const auto row = h.row(8);
    const auto expected = head.forward(nn::NdArray({16}, std::vector<double>(row.begin(), row.end())));

    const auto y = m->forward(x);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(y[i] - expected[i]) <= 1e-12);
    CHECK(m->forward(x) == y);  // no state carried across calls
}

TEST_CASE("residual wiring passes the block input through") {
    TcnLstmBlock block("b", 3, 3, 3, 1, 3);
    for (auto* p : block.parameters()) p->value.fill(0.0);
    for (std::size_t i = 0; i < 3; ++i) block.residual().weight().value.at(0, i, i) = 1.0;
    Rng rng(3);
    const auto x = random_array(rng, {6, 3});
    CHECK(block.forward(x) == x);
}

TEST_CASE("non-finite activations name the block") {
    auto m = build(small_config());
    auto& net = dynamic_cast<MultiTcnLstm&>(*m);
    net.blocks()[1].conv().weight().value[0] = std::numeric_limits<double>::quiet_NaN();
    Rng rng(4);
    try {
        m->forward(random_array(rng, {9, 1}));
        FAIL("expected a numeric error");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("block1") != std::string::npos);
    }
    CHECK_THROWS_AS(m->forward(nn::NdArray({8, 1})), UsageError);
}

TEST_CASE("full model gradients at reduced width") {
    Rng rng(5);
    auto m = build(small_config());
    const auto r = check_model(*m, rng);
    double analytic = 0.0;
    for (auto* p : m->parameters())
        if (p->name == r.worst_parameter) analytic = p->grad[r.worst_index];
    // Central differences at eps 1e-5 carry ~1e-11 absolute round-off, which
    // dominates the relative error of gradients near 1e-7.
    const double abs_error = r.max_relative_error * std::max(std::abs(analytic), 1e-8);
    INFO(r.worst_parameter, "[", r.worst_index, "] analytic ", analytic);
    CHECK((r.max_relative_error <= 1e-4 || abs_error <= 1e-10));
    CHECK(r.checked == m->parameter_count());
}

TEST_CASE("baselines") {
    Rng rng(6);
    auto lstm = build_baseline_lstm(6, 12, 1, 1);
    CHECK(lstm->variant() == Variant::Lstm);
    CHECK(lstm->parameter_count() == 4 * 6 * (1 + 6 + 1) + 6 + 1);
    CHECK(check_model(*lstm, rng).max_relative_error <= 1e-4);

    auto mlp = build_baseline_mlp({5, 4}, 12, 2, 1);
    CHECK(mlp->parameter_count() == (12 * 5 + 5) + (5 * 4 + 4) + (4 * 2 + 2));
    CHECK(check_model(*mlp, rng).max_relative_error <= 1e-6);

    auto linear = build_baseline_mlp({}, 4, 1, 1);
    auto& lin = dynamic_cast<MlpBaseline&>(*linear);
    CHECK(lin.hidden_layers().empty());
    lin.head().weight().value = nn::NdArray({4, 1}, std::vector<double>{1, 2, 3, 4});
    lin.head().bias().value[0] = 0.5;
    CHECK(linear->forward(nn::NdArray({4, 1}, std::vector<double>{1, 1, 1, 2}))[0] == 14.5);

    ModelSpec spec;
    spec.variant = Variant::Mlp;
    spec.tcn.window = 24;
    CHECK(build_model(spec)->parameter_count() == (24 * 64 + 64) + (64 * 64 + 64) + 65);
    spec.variant = Variant::Lstm;
    CHECK(build_model(spec)->parameter_count() == 4 * 64 * 66 + 65);
}

TEST_CASE("copy_parameters transfers weights") {
    auto a = build(small_config());
    auto cfg = small_config();
    cfg.seed = 99;
    auto b = build(cfg);
    copy_parameters(*a, *b);
    Rng rng(7);
    const auto x = random_array(rng, {9, 1});
    CHECK(a->forward(x) == b->forward(x));
}

}  // TEST_SUITE
