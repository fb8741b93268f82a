#include <doctest.h>

#include <cmath>

#include "cellcast/error.hpp"
#include "cellcast/eval.hpp"
#include "cellcast/io.hpp"
#include "helpers.hpp"

using namespace cellcast;
using namespace cellcast::eval;

namespace {

constexpr std::int64_t kMidnight = 16010 * 24;

struct Oracle {
    double mape = 0.0;
    double mae = 0.0;
    std::size_t skipped = 0;
};

Oracle brute_metrics(const std::vector<double>& q, const std::vector<double>& p) {
    double ratio = 0.0, abs = 0.0;
    std::size_t kept = 0, skipped = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        abs += std::fabs(q[i] - p[i]);
        if (q[i] > 1e-9) {
            ratio += std::fabs(q[i] - p[i]) / q[i];
            ++kept;
        } else {
            ++skipped;
        }
    }
    return {100.0 * ratio / static_cast<double>(kept), abs / static_cast<double>(q.size()), skipped};
}

ingest::SeriesMap toy_dataset() {
    ingest::SyntheticSpec spec;
    spec.n_cells = 3;
    spec.n_days = 3;
    spec.seed = 2;
    spec.start_day = 16010;
    spec.regimes = {{15, 100, 200, 0.3, 1.0}};
    return ingest::generate_synthetic(spec).series;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("hand-computed metrics") {
    const std::vector<double> q{100, 200}, p{110, 180};
    const auto m = mape(q, p);
    CHECK(std::abs(m.percent - 10.0) <= 1e-12);
    CHECK(m.fraction() == doctest::Approx(0.1));
    CHECK(m.skipped == 0);
    CHECK(m.n == 2);
    CHECK(std::abs(mae(q, p) - 15.0) <= 1e-12);
    CHECK(mape(q, q).percent == 0.0);
    CHECK(mae(q, q) == 0.0);

    const auto z = mape(std::vector<double>{0, 100}, std::vector<double>{5, 100});
    CHECK(z.percent == 0.0);
    CHECK(z.skipped == 1);
    CHECK(z.n == 1);
    CHECK_THROWS_AS(mape(std::vector<double>{0, 0}, std::vector<double>{1, 1}), UndefinedMetricError);
    CHECK_THROWS_AS(mae(std::vector<double>{}, std::vector<double>{}), UndefinedMetricError);
    CHECK_THROWS_AS(mape(std::vector<double>{}, std::vector<double>{}), UndefinedMetricError);
    CHECK_THROWS_AS(mae(q, std::vector<double>{1}), ValidationError);
}

TEST_CASE("metrics agree with a brute-force oracle") {
    Rng rng(1);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.below(200);
        auto q = testing::random_vector(rng, n, 0.0, 500.0);
        const auto p = testing::random_vector(rng, n, 0.0, 500.0);
        std::size_t zeros = 0;
        for (auto& v : q)
            if (rng.uniform() < 0.1) {
                v = 0.0;
                ++zeros;
            }
        if (zeros == n) continue;
        const auto o = brute_metrics(q, p);
        const auto m = mape(q, p);
        CHECK(std::abs(m.percent - o.mape) <= 1e-12 * std::max(1.0, o.mape));
        CHECK(m.skipped == zeros);
        CHECK(m.skipped == o.skipped);
        CHECK(std::abs(mae(q, p) - o.mae) <= 1e-12 * std::max(1.0, o.mae));
    }
}

TEST_CASE("mae detects translation exactly") {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const auto q = testing::random_vector(rng, 50, 0.0, 1.0);
        const double d = std::ldexp(1.0, static_cast<int>(rng.below(6)));  // power of two keeps sums exact
        std::vector<double> p;
        for (double v : q) p.push_back(v + d);
        CHECK(mae(q, p) == d);
    }
}

TEST_CASE("accumulators pool by addition") {
    MetricAccumulator a, b, all;
    const std::vector<std::pair<double, double>> points{{100, 90}, {0, 3}, {50, 55}, {200, 260}};
    for (std::size_t i = 0; i < points.size(); ++i) {
        (i % 2 ? a : b).add(points[i].first, points[i].second);
        all.add(points[i].first, points[i].second);
    }
    a.merge(b);
    CHECK(a.total == 4);
    CHECK(a.skipped == 1);
    CHECK(a.mape_percent() == doctest::Approx(all.mape_percent()));
    CHECK(a.mae() == doctest::Approx((10 + 3 + 5 + 60) / 4.0));
    CHECK_THROWS_AS(MetricAccumulator{}.mae(), UndefinedMetricError);
}

TEST_CASE("rolling evaluation with a perfect oracle") {
    const auto data = toy_dataset();
    const ingest::HourSpan split{kMidnight + 48, kMidnight + 72};
    const PredictFn oracle = [&](std::int64_t cell, std::span<const double> history) {
        const auto& s = data.at(cell);
        // The hour after the history is the target.
        const auto offset = static_cast<std::size_t>(history.data() - s.values.data()) + history.size();
        return s.values.at(offset);
    };
    const auto report = evaluate("oracle", oracle, data, split, 24);
    CHECK(report.mape_percent == 0.0);
    CHECK(report.mae == 0.0);
    CHECK(report.n == 3 * 24);
    for (const auto& [cell, trace] : report.per_cell) CHECK(trace.hours.size() == 24);
}

TEST_CASE("constant-mean predictor matches a brute-force computation") {
    const auto data = toy_dataset();
    const ingest::HourSpan split{kMidnight + 48, kMidnight + 72};
    const PredictFn mean_of_history = [](std::int64_t, std::span<const double> history) {
        double s = 0.0;
        for (double v : history) s += v;
        return s / static_cast<double>(history.size());
    };
    const auto report = evaluate("mean", mean_of_history, data, split, 24);
    std::vector<double> q, p;
    for (const auto& [cell, s] : data) {
        for (std::size_t t = 48; t < 72; ++t) {
            double sum = 0.0;
            for (std::size_t k = t - 24; k < t; ++k) sum += s.values[k];
            q.push_back(s.values[t]);
            p.push_back(sum / 24.0);
        }
    }
    const auto o = brute_metrics(q, p);
    CHECK(std::abs(report.mape_percent - o.mape) <= 1e-12 * o.mape);
    CHECK(std::abs(report.mae - o.mae) <= 1e-12 * o.mae);
    CHECK(report.mape_fraction == report.mape_percent / 100.0);

    const PredictFn unrouted = [](std::int64_t, std::span<const double>) -> double {
        throw ValidationError("cell is not routed");
    };
    CHECK_THROWS_AS(evaluate("x", unrouted, data, split, 24), ValidationError);
}

TEST_CASE("evaluation never reads targets before the split") {
    const auto data = toy_dataset();
    const ingest::HourSpan split{kMidnight + 48, kMidnight + 72};
    const PredictFn check = [&](std::int64_t cell, std::span<const double> history) {
        const auto& s = data.at(cell);
        const auto target_hour = s.start_hour + (history.data() - s.values.data()) + static_cast<std::int64_t>(history.size());
        CHECK(target_hour >= split.start_hour);
        return 1.0;
    };
    evaluate("check", check, data, split, 24);
}

TEST_CASE("csv exports") {
    const auto data = toy_dataset();
    const ingest::HourSpan split{kMidnight + 48, kMidnight + 72};
    const PredictFn flat = [](std::int64_t, std::span<const double> h) { return h.back(); };
    const PredictFn half = [](std::int64_t, std::span<const double> h) { return 0.5 * h.back(); };
    const std::vector<EvalReport> reports{evaluate("a", flat, data, split, 24), evaluate("b", half, data, split, 24)};

    const auto table = comparison_csv(reports);
    CHECK(table.rfind("variant,mape_percent,mape_fraction,mae,n,skipped\n", 0) == 0);
    CHECK(table.find("\na,") != std::string::npos);

    const auto preds = predictions_csv(reports[0]);
    CHECK(preds.rfind("cell_id,hour,actual,predicted\n", 0) == 0);
    const auto back = report_from_predictions_csv("a", preds);
    CHECK(comparison_row(back) == comparison_row(reports[0]));
    CHECK(back.per_cell.at(1).predicted == reports[0].per_cell.at(1).predicted);

    const std::vector<std::int64_t> cells{2};
    const auto traces = traces_csv(cells, reports);
    CHECK(traces.rfind("cell_id,hour,actual,predicted_a,predicted_b\n", 0) == 0);
    CHECK(std::count(traces.begin(), traces.end(), '\n') == 25);  // one row per evaluation hour
    const std::vector<std::int64_t> unknown{99};
    CHECK_THROWS_AS(traces_csv(unknown, reports), ValidationError);

    CHECK(per_cell_csv(reports[0]).rfind("cell_id,n,mape_percent,mae,skipped\n", 0) == 0);
}

TEST_CASE("grid heatmap") {
    ingest::SeriesMap series;
    series[4956] = {4956, 0, {1.0, 2.0, 6.0}};
    const auto csv = grid_heatmap_csv(series);
    const auto lines = io::split(csv, '\n');
    CHECK(lines.front() == "row,col,mean_traffic");
    CHECK(lines.size() == 10002);  // header, 10,000 rows, trailing newline
    CHECK(csv.find("\n50,56,3\n") != std::string::npos);  // cell 4956 = row 50, col 56
    CHECK(csv.find("\n1,1,0\n") != std::string::npos);
    CHECK(io::split(grid_heatmap_csv(series, 3), '\n').size() == 11);
}

}  // TEST_SUITE
