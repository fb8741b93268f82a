#pragma once

// Daily peak hours, representative peak hours, peak-hour groups and the
// Pearson correlation between group mean profiles.

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cellcast/ingest.hpp"

namespace cellcast::profile {

using ingest::HourlyCellSeries;
using ingest::SeriesMap;

inline constexpr int kHoursPerDay = ingest::kHoursPerDay;
inline constexpr int kDefaultTrainingDays = 20;

/// Hours from the series start to its first local midnight.
std::int64_t first_day_offset(const HourlyCellSeries& series);

/// Number of complete local days covered by the series.
int complete_days(const HourlyCellSeries& series);

/// Argmax of the 24 values of complete day `day` (0-based, counted from the
/// first local midnight); ties go to the earliest hour.
int daily_peak_hour(const HourlyCellSeries& series, int day);

/// Most frequent value in `peaks` (each 0..23); ties go to the earliest hour.
int mode_hour(std::span<const int> peaks);

struct PeakHistogram {
    std::int64_t cell_id = 0;
    std::array<int, kHoursPerDay> counts{};
    int n_days = 0;

    int mode() const;
};

PeakHistogram peak_histogram(const HourlyCellSeries& series, int n_days = kDefaultTrainingDays);

int representative_peak_hour(const HourlyCellSeries& series, int n_days = kDefaultTrainingDays);

enum class ProfileMode {
    RawHours,   // one entry per training hour (h = 24 * n_days)
    FoldedDay,  // 24 entries: mean over days of each hour of day
};

struct GroupingOptions {
    int n_days = kDefaultTrainingDays;
    ProfileMode mode = ProfileMode::RawHours;
};

struct GroupProfile {
    int group_id = 0;                   // the shared representative peak hour
    std::vector<std::int64_t> members;  // ascending cell ids
    std::vector<double> profile;        // hourly cross-member mean
    double mean = 0.0;                  // arithmetic mean of `profile`

    bool is_constant() const;
};

using GroupMap = std::map<int, GroupProfile>;

/// Partitions cells by representative peak hour over the first n_days
/// complete days. All series must share the same first local midnight.
/// Empty groups are omitted.
GroupMap group_by_peak_hour(const SeriesMap& cells, const GroupingOptions& options = {});

/// Pearson correlation of two equal-length sequences (length >= 2).
/// Throws UndefinedCorrelationError when either sequence is constant.
double pearson(std::span<const double> x, std::span<const double> y);
double pearson(const GroupProfile& x, const GroupProfile& y);

/// `group_id,hour_index,mean_value`
std::string group_profiles_csv(const GroupMap& groups);
/// `cell_id,hour,count`
std::string peak_histograms_csv(std::span<const PeakHistogram> histograms);

}  // namespace cellcast::profile
