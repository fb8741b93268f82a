#pragma once

// Raw grid activity records -> hourly per-cell traffic series.
//
// Input rows are tab separated: cell_id, timestamp (epoch ms, start of a
// 10-minute slot), country_code, sms_in, sms_out, call_in, call_out,
// internet. Trailing activity fields may be empty or missing.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string_view>
#include <vector>

namespace cellcast::ingest {

inline constexpr std::int64_t kMaxCellId = 10000;
inline constexpr std::int64_t kSlotMillis = 600'000;
inline constexpr std::int64_t kHourMillis = 3'600'000;
inline constexpr int kHoursPerDay = 24;
/// Milan is UTC+1 for the whole of November and December 2013.
inline constexpr int kDefaultUtcOffsetHours = 1;

struct RawRecord {
    std::int64_t cell_id = 0;
    std::int64_t timestamp_ms = 0;
    std::int64_t country_code = 0;
    double sms_in = 0.0;
    double sms_out = 0.0;
    double call_in = 0.0;
    double call_out = 0.0;
    double internet = 0.0;
};

/// Throws ParseError (with `line_number`) for malformed ids or timestamps
/// and ValidationError for out-of-range ids, misaligned slots or negative
/// activity.
RawRecord parse_record(std::string_view line, std::size_t line_number = 0);

enum class Selector { Internet, Total };

Selector parse_selector(std::string_view name);
std::string_view to_string(Selector selector);
double selected_activity(const RawRecord& record, Selector selector);

/// Half-open range of local hour indices (hours since the epoch, shifted
/// into local time so that hour % 24 == 0 is local midnight).
struct HourSpan {
    std::int64_t start_hour = 0;
    std::int64_t end_hour = 0;

    std::int64_t length() const { return end_hour - start_hour; }
    bool contains(std::int64_t hour) const { return hour >= start_hour && hour < end_hour; }
};

std::int64_t local_hour_index(std::int64_t timestamp_ms, int utc_offset_hours = kDefaultUtcOffsetHours);

/// Local hour index of midnight on a "YYYY-MM-DD" date. Throws UsageError.
std::int64_t local_day_start_hour(std::string_view iso_date);

struct HourlyCellSeries {
    std::int64_t cell_id = 0;
    std::int64_t start_hour = 0;
    std::vector<double> values;

    std::int64_t end_hour() const { return start_hour + static_cast<std::int64_t>(values.size()); }
    HourSpan span() const { return {start_hour, end_hour()}; }
};

using SeriesMap = std::map<std::int64_t, HourlyCellSeries>;

struct Aggregation {
    SeriesMap series;
    std::size_t records_used = 0;
    std::size_t skipped_out_of_span = 0;
};

/// Accumulates records into zero-filled hourly bins over a fixed span.
/// Merging is elementwise addition, so partial aggregators built from
/// different files combine in any grouping.
class HourlyAggregator {
public:
    HourlyAggregator(Selector selector, HourSpan span, int utc_offset_hours = kDefaultUtcOffsetHours);

    void add(const RawRecord& record);
    void merge(const HourlyAggregator& other);
    Aggregation finish() &&;

private:
    Selector selector_;
    HourSpan span_;
    int utc_offset_hours_;
    std::map<std::int64_t, std::vector<double>> bins_;
    std::size_t used_ = 0;
    std::size_t skipped_ = 0;
};

Aggregation aggregate_hourly(std::span<const RawRecord> records, Selector selector, HourSpan span,
                             int utc_offset_hours = kDefaultUtcOffsetHours);

/// Parses and aggregates every regular file under `dir` (non-recursive).
/// Files are processed on up to `jobs` threads and merged in sorted path
/// order, so the result does not depend on scheduling.
Aggregation aggregate_directory(const std::filesystem::path& dir, Selector selector, HourSpan span,
                                int utc_offset_hours = kDefaultUtcOffsetHours, unsigned jobs = 1);

struct GridPosition {
    std::int64_t row = 0;  // 1-based
    std::int64_t col = 0;  // 1-based
};

/// Row-major: id = (row - 1) * grid_side + col.
GridPosition grid_position(std::int64_t cell_id, std::int64_t grid_side = 100);
std::int64_t cell_id_at(GridPosition pos, std::int64_t grid_side = 100);

/// Ids of the centered block_side x block_side block, ascending.
std::vector<std::int64_t> select_central_cells(std::int64_t grid_side = 100, std::int64_t block_side = 30);

// ---- synthetic traffic -------------------------------------------------

struct Regime {
    int peak_hour = 0;
    double base_level = 100.0;
    double amplitude = 200.0;
    double noise_sigma = 0.0;
    double cell_fraction = 1.0;
};

struct SyntheticSpec {
    int n_cells = 0;
    std::vector<Regime> regimes;
    int n_days = 0;
    std::uint64_t seed = 0;
    /// Lag-1 correlation of the hourly log-noise (stationary AR(1) whose
    /// marginal standard deviation is the regime's noise_sigma).
    double noise_rho = 0.9;
    /// Local day index of the first generated day.
    std::int64_t start_day = 0;
    /// Width (hours) of the circular Gaussian daily bump.
    double bump_width_hours = 2.0;
};

struct SyntheticData {
    SeriesMap series;
    std::map<std::int64_t, int> regime_of;  // cell id -> index into spec.regimes
};

/// Throws UsageError describing the first violated constraint.
void validate(const SyntheticSpec& spec);

/// Cells get ids 1..n_cells. Regime sizes follow the fractions by the
/// largest-remainder rule, labels are shuffled across ids by the seed.
/// value = (base + amplitude * bump(hour_of_day - peak)) * exp(e_t - sigma^2 / 2).
SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Smooth unimodal daily profile in [0, 1], 1 at zero circular distance.
double daily_bump(int hour_of_day, int peak_hour, double width_hours);

}  // namespace cellcast::ingest
