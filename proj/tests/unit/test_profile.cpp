#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "cellcast/error.hpp"
#include "cellcast/profile.hpp"
#include "helpers.hpp"

using namespace cellcast;
using namespace cellcast::profile;

namespace {

constexpr std::int64_t kMidnight = 16010 * 24;

// A series whose day d peaks at peaks[d].
HourlyCellSeries series_with_peaks(std::int64_t cell, const std::vector<int>& peaks) {
    std::vector<double> values;
    for (int p : peaks)
        for (int h = 0; h < 24; ++h) values.push_back(h == p ? 10.0 : 1.0 + 0.01 * h);
    return {cell, kMidnight, values};
}

std::vector<int> repeat(std::initializer_list<std::pair<int, int>> counts) {
    std::vector<int> out;
    for (auto [hour, n] : counts) out.insert(out.end(), static_cast<std::size_t>(n), hour);
    return out;
}

}  // namespace

TEST_SUITE("profile") {

TEST_CASE("daily_peak_hour") {
    std::vector<double> day(24, 1.0);
    day[15] = 7.0;
    const HourlyCellSeries s{1, kMidnight, day};
    CHECK(daily_peak_hour(s, 0) == 15);
    const HourlyCellSeries flat{1, kMidnight, std::vector<double>(24, 3.0)};
    CHECK(daily_peak_hour(flat, 0) == 0);
    std::vector<double> tie(24, 0.0);
    tie[4] = tie[9] = 2.0;
    CHECK(daily_peak_hour({1, kMidnight, tie}, 0) == 4);
    CHECK_THROWS_AS(daily_peak_hour(s, 1), ValidationError);
    CHECK_THROWS_AS(daily_peak_hour(s, -1), ValidationError);
}

TEST_CASE("days start at local midnight") {
    std::vector<double> values(30, 0.0);
    values[6 + 20] = 5.0;  // series starts at 18:00, so day 0 begins at index 6
    const HourlyCellSeries s{1, kMidnight - 6, values};
    CHECK(first_day_offset(s) == 6);
    CHECK(complete_days(s) == 1);
    CHECK(daily_peak_hour(s, 0) == 20);
}

TEST_CASE("representative_peak_hour is the earliest mode") {
    CHECK(representative_peak_hour(series_with_peaks(1, repeat({{15, 12}, {14, 5}, {16, 3}})), 20) == 15);
    CHECK(representative_peak_hour(series_with_peaks(1, repeat({{9, 10}, {18, 10}})), 20) == 9);
    CHECK(representative_peak_hour(series_with_peaks(1, repeat({{18, 10}, {9, 10}})), 20) == 9);
    CHECK_THROWS_AS(representative_peak_hour(series_with_peaks(1, repeat({{9, 5}})), 20), ValidationError);

    ingest::SyntheticSpec spec;
    spec.n_cells = 3;
    spec.n_days = 20;
    spec.regimes = {{21, 100, 200, 0, 1}};
    for (const auto& [cell, s] : ingest::generate_synthetic(spec).series) CHECK(representative_peak_hour(s) == 21);
}

TEST_CASE("peak histogram counts sum to the day count") {
    const auto h = peak_histogram(series_with_peaks(3, repeat({{15, 12}, {14, 5}, {16, 3}})), 20);
    CHECK(h.cell_id == 3);
    CHECK(h.n_days == 20);
    CHECK(h.counts[15] == 12);
    CHECK(h.counts[14] == 5);
    int total = 0;
    for (int c : h.counts) total += c;
    CHECK(total == 20);
    CHECK(h.mode() == 15);
    const std::vector<PeakHistogram> all{h};
    const auto csv = peak_histograms_csv(all);
    CHECK(csv.rfind("cell_id,hour,count\n", 0) == 0);
    CHECK(csv.find("3,15,12\n") != std::string::npos);
}

TEST_CASE("representative peak is invariant to day order") {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> peaks(20);
        for (auto& p : peaks) p = static_cast<int>(rng.below(5)) + 10;
        const int expected = representative_peak_hour(series_with_peaks(1, peaks), 20);
        rng.shuffle(std::span<int>(peaks));
        CHECK(representative_peak_hour(series_with_peaks(1, peaks), 20) == expected);
        CHECK(mode_hour(peaks) == expected);
    }
}

TEST_CASE("group_by_peak_hour averages members") {
    const auto a = series_with_peaks(1, std::vector<int>(20, 15));
    auto b = series_with_peaks(2, std::vector<int>(20, 15));
    for (auto& v : b.values) v *= 3.0;
    const auto c = series_with_peaks(3, std::vector<int>(20, 21));
    const SeriesMap cells{{1, a}, {2, b}, {3, c}};
    const auto groups = group_by_peak_hour(cells);
    REQUIRE(groups.size() == 2);
    const auto& g15 = groups.at(15);
    CHECK(g15.group_id == 15);
    CHECK(g15.members == std::vector<std::int64_t>{1, 2});
    REQUIRE(g15.profile.size() == 480);
    double mean = 0.0;
    for (std::size_t j = 0; j < 480; ++j) {
        CHECK(g15.profile[j] == doctest::Approx((a.values[j] + b.values[j]) / 2.0).epsilon(1e-15));
        mean += g15.profile[j];
    }
    CHECK(g15.mean == doctest::Approx(mean / 480.0).epsilon(1e-14));
    CHECK(groups.at(21).members == std::vector<std::int64_t>{3});

    const auto folded = group_by_peak_hour(cells, {20, ProfileMode::FoldedDay});
    REQUIRE(folded.at(21).profile.size() == 24);
    CHECK(folded.at(21).profile[21] == doctest::Approx(10.0));

    const auto csv = group_profiles_csv(groups);
    CHECK(csv.rfind("group_id,hour_index,mean_value\n", 0) == 0);
    CHECK_THROWS_AS(group_by_peak_hour({}), ValidationError);
}

TEST_CASE("grouping partitions the cells") {
    ingest::SyntheticSpec spec;
    spec.n_cells = 60;
    spec.n_days = 20;
    spec.seed = 12;
    spec.regimes = {{8, 100, 200, 0.4, 0.3}, {13, 100, 200, 0.4, 0.3}, {20, 100, 200, 0.4, 0.4}};
    const auto cells = ingest::generate_synthetic(spec).series;
    const auto groups = group_by_peak_hour(cells);
    CHECK(groups.size() <= 24);
    std::set<std::int64_t> seen;
    std::size_t total = 0;
    for (const auto& [id, g] : groups) {
        CHECK(!g.members.empty());
        total += g.members.size();
        for (auto cell : g.members) {
            seen.insert(cell);
            CHECK(representative_peak_hour(cells.at(cell)) == id);
        }
    }
    CHECK(total == cells.size());
    CHECK(seen.size() == cells.size());
}

TEST_CASE("pearson examples") {
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> y{1, 3, 2, 4};
    CHECK(pearson(x, x) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pearson(x, y) == doctest::Approx(0.8).epsilon(1e-14));
    std::vector<double> neg;
    for (double v : x) neg.push_back(-v + 7.0);
    CHECK(pearson(x, neg) == doctest::Approx(-1.0).epsilon(1e-15));
    const std::vector<double> flat{2, 2, 2, 2};
    CHECK_THROWS_AS(pearson(x, flat), UndefinedCorrelationError);
    CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{2}), ValidationError);
    CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2, 3}), ValidationError);

    GroupProfile a{3, {1}, {1, 2, 3}, 2};
    GroupProfile c{7, {2}, {5, 5, 5}, 5};
    try {
        pearson(a, c);
        FAIL("expected an undefined correlation");
    } catch (const UndefinedCorrelationError& e) {
        CHECK(std::string(e.what()).find('7') != std::string::npos);
    }
}

TEST_CASE("pearson agrees with a brute-force two-pass oracle") {
    Rng rng(100);
    for (int trial = 0; trial < 1000; ++trial) {
        auto x = testing::random_vector(rng, 480, 0.0, 500.0);
        auto y = testing::random_vector(rng, 480, 0.0, 500.0);
        if (trial % 3 == 0)
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = 0.7 * x[i] + y[i] * 0.2;
        CHECK(std::abs(pearson(x, y) - testing::brute_pearson(x, y)) <= 1e-12);
    }
}

TEST_CASE("pearson is affine invariant") {
    Rng rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        const auto x = testing::random_vector(rng, 480, -50.0, 50.0);
        const double a = rng.uniform(-10.0, 10.0);
        const double b = rng.uniform(-1000.0, 1000.0);
        if (std::abs(a) < 1e-3) continue;
        std::vector<double> y;
        for (double v : x) y.push_back(a * v + b);
        CHECK(std::abs(pearson(x, y) - (a > 0 ? 1.0 : -1.0)) <= 1e-9);
        const auto r = pearson(x, testing::random_vector(rng, 480));
        CHECK(r >= -1.0);
        CHECK(r <= 1.0);
    }
}

}  // TEST_SUITE
