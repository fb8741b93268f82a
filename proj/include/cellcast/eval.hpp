#pragma once

// Forecast accuracy (MAPE, MAE), rolling one-step evaluation and CSV
// exports for comparison tables, prediction traces and the grid heatmap.

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cellcast/ingest.hpp"

namespace cellcast::eval {

/// Targets at or below this are left out of MAPE.
inline constexpr double kZeroTargetThreshold = 1e-9;

struct MapeResult {
    double percent = 0.0;
    std::size_t n = 0;        // retained points
    std::size_t skipped = 0;  // zero targets

    double fraction() const { return percent / 100.0; }
};

/// (100 / n') * sum |q - q_hat| / q over points with q > 1e-9.
/// Throws UndefinedMetricError when every point is skipped.
MapeResult mape(std::span<const double> actual, std::span<const double> predicted);

/// (1 / n) * sum |q - q_hat| over all points.
double mae(std::span<const double> actual, std::span<const double> predicted);

/// Running sums for pooled metrics; merge() is plain addition.
struct MetricAccumulator {
    double ratio_sum = 0.0;   // sum |q - q_hat| / q over retained points
    double abs_sum = 0.0;     // sum |q - q_hat| over all points
    std::size_t total = 0;
    std::size_t retained = 0;
    std::size_t skipped = 0;

    void add(double actual, double predicted);
    void merge(const MetricAccumulator& other);
    double mape_percent() const;  // throws UndefinedMetricError
    double mae() const;           // throws UndefinedMetricError when empty
};

struct CellTrace {
    std::int64_t cell_id = 0;
    std::vector<std::int64_t> hours;
    std::vector<double> actual;
    std::vector<double> predicted;
    MetricAccumulator metrics;
};

struct EvalReport {
    std::string variant;
    std::size_t n = 0;  // points retained by MAPE
    double mape_percent = 0.0;
    double mape_fraction = 0.0;
    double mae = 0.0;
    std::size_t skipped_zero_targets = 0;
    std::map<std::int64_t, CellTrace> per_cell;
};

/// Raw-unit forecast for the hour right after `history` (oldest first).
using PredictFn = std::function<double(std::int64_t cell_id, std::span<const double> history)>;

/// Rolling one-step forecasts over every hour of `split`, each fed the true
/// preceding `window` hours. Metrics are pooled over all cells and hours.
EvalReport evaluate(const std::string& variant, const PredictFn& predict, const ingest::SeriesMap& dataset,
                    ingest::HourSpan split, std::size_t window);

/// Pools a report from its per-cell traces.
void finalize(EvalReport& report);

/// `variant,mape_percent,mape_fraction,mae,n,skipped`
std::string comparison_csv(std::span<const EvalReport> reports);
std::string comparison_header();
std::string comparison_row(const EvalReport& report);

/// `cell_id,n,mape_percent,mae,skipped`
std::string per_cell_csv(const EvalReport& report);

/// `cell_id,hour,actual,predicted`
std::string predictions_csv(const EvalReport& report);
/// Rebuilds a report (traces and pooled metrics) from predictions_csv output.
EvalReport report_from_predictions_csv(const std::string& variant, std::string_view text);

/// `cell_id,hour,actual,predicted_<variant>...`; all reports must cover the
/// requested cells over the same hours. Unknown cells throw ValidationError.
std::string traces_csv(std::span<const std::int64_t> cell_ids, std::span<const EvalReport> reports);

/// `row,col,mean_traffic` for every grid cell; cells without data are 0.
std::string grid_heatmap_csv(const ingest::SeriesMap& series, std::int64_t grid_side = 100);

}  // namespace cellcast::eval
