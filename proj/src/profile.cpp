#include "cellcast/profile.hpp"

#include <algorithm>
#include <cmath>

#include "cellcast/error.hpp"
#include "cellcast/io.hpp"
#include "cellcast/simd/kernels.hpp"

namespace cellcast::profile {

std::int64_t first_day_offset(const HourlyCellSeries& series) {
    const auto r = ((series.start_hour % kHoursPerDay) + kHoursPerDay) % kHoursPerDay;
    return (kHoursPerDay - r) % kHoursPerDay;
}

int complete_days(const HourlyCellSeries& series) {
    const auto usable = static_cast<std::int64_t>(series.values.size()) - first_day_offset(series);
    return usable <= 0 ? 0 : static_cast<int>(usable / kHoursPerDay);
}

int daily_peak_hour(const HourlyCellSeries& series, int day) {
    if (day < 0 || day >= complete_days(series)) {
        throw ValidationError("day " + std::to_string(day) + " not covered by series of cell " +
                              std::to_string(series.cell_id));
    }
    const auto begin = series.values.begin() + first_day_offset(series) + static_cast<std::ptrdiff_t>(day) * kHoursPerDay;
    // max_element returns the first maximum, i.e. the earliest hour on ties.
    return static_cast<int>(std::max_element(begin, begin + kHoursPerDay) - begin);
}

int mode_hour(std::span<const int> peaks) {
    std::array<int, kHoursPerDay> counts{};
    for (int h : peaks) {
        if (h < 0 || h >= kHoursPerDay) throw ValidationError("peak hour outside 0..23");
        ++counts[static_cast<std::size_t>(h)];
    }
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

int PeakHistogram::mode() const {
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

PeakHistogram peak_histogram(const HourlyCellSeries& series, int n_days) {
    if (n_days < 1) throw UsageError("n_days must be >= 1");
    if (complete_days(series) < n_days) {
        throw ValidationError("cell " + std::to_string(series.cell_id) + " covers " +
                              std::to_string(complete_days(series)) + " complete days, need " + std::to_string(n_days));
    }
    PeakHistogram hist;
    hist.cell_id = series.cell_id;
    hist.n_days = n_days;
    for (int d = 0; d < n_days; ++d) ++hist.counts[static_cast<std::size_t>(daily_peak_hour(series, d))];
    return hist;
}

int representative_peak_hour(const HourlyCellSeries& series, int n_days) {
    return peak_histogram(series, n_days).mode();
}

bool GroupProfile::is_constant() const {
    return std::adjacent_find(profile.begin(), profile.end(), std::not_equal_to<>()) == profile.end();
}

GroupMap group_by_peak_hour(const SeriesMap& cells, const GroupingOptions& options) {
    if (cells.empty()) throw ValidationError("group_by_peak_hour: no cells");
    const auto& first = cells.begin()->second;
    const std::int64_t window_start = first.start_hour + first_day_offset(first);
    const std::size_t h = static_cast<std::size_t>(options.n_days) * kHoursPerDay;

    GroupMap groups;
    for (const auto& [cell, series] : cells) {
        if (series.start_hour + first_day_offset(series) != window_start) {
            throw ValidationError("cell " + std::to_string(cell) + " does not share the training window");
        }
        const int peak = representative_peak_hour(series, options.n_days);
        auto& g = groups[peak];
        g.group_id = peak;
        g.members.push_back(cell);
        const std::size_t profile_len = options.mode == ProfileMode::RawHours ? h : kHoursPerDay;
        if (g.profile.empty()) g.profile.assign(profile_len, 0.0);
        const double* values = series.values.data() + first_day_offset(series);
        if (options.mode == ProfileMode::RawHours) {
            simd::axpy(1.0, std::span<const double>(values, h), g.profile);
        } else {
            for (std::size_t t = 0; t < h; ++t) g.profile[t % kHoursPerDay] += values[t];
        }
    }
    for (auto& [id, g] : groups) {
        double scale = 1.0 / static_cast<double>(g.members.size());
        if (options.mode == ProfileMode::FoldedDay) scale /= static_cast<double>(options.n_days);
        for (double& v : g.profile) v *= scale;
        g.mean = simd::sum(g.profile) / static_cast<double>(g.profile.size());
    }
    return groups;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
    if (x.size() < 2) throw ValidationError("pearson: need at least 2 points");
    auto constant = [](std::span<const double> v) {
        return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
    };
    if (constant(x) || constant(y)) throw UndefinedCorrelationError("pearson: constant profile");
    const double n = static_cast<double>(x.size());
    const double mx = simd::sum(x) / n;
    const double my = simd::sum(y) / n;
    const auto m = simd::centered_moments(x, y, mx, my);
    const double r = m.sxy / (std::sqrt(m.sxx) * std::sqrt(m.syy));
    if (!std::isfinite(r)) throw NumericError("pearson: non-finite result");
    return std::clamp(r, -1.0, 1.0);
}

double pearson(const GroupProfile& x, const GroupProfile& y) {
    try {
        return pearson(x.profile, y.profile);
    } catch (const UndefinedCorrelationError&) {
        throw UndefinedCorrelationError("pearson: constant profile in group " +
                                        std::to_string(x.is_constant() ? x.group_id : y.group_id));
    }
}

std::string group_profiles_csv(const GroupMap& groups) {
    std::string out = "group_id,hour_index,mean_value\n";
    for (const auto& [id, g] : groups) {
        for (std::size_t j = 0; j < g.profile.size(); ++j) {
            out += std::to_string(id) + ',' + std::to_string(j) + ',' + io::format_double(g.profile[j]) + '\n';
        }
    }
    return out;
}

std::string peak_histograms_csv(std::span<const PeakHistogram> histograms) {
    std::string out = "cell_id,hour,count\n";
    for (const auto& hist : histograms) {
        for (int h = 0; h < kHoursPerDay; ++h) {
            out += std::to_string(hist.cell_id) + ',' + std::to_string(h) + ',' +
                   std::to_string(hist.counts[static_cast<std::size_t>(h)]) + '\n';
        }
    }
    return out;
}

}  // namespace cellcast::profile
