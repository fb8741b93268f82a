#include "cellcast/eval.hpp"

#include <cmath>

#include "cellcast/error.hpp"
#include "cellcast/io.hpp"
#include "cellcast/simd/kernels.hpp"

namespace cellcast::eval {

namespace {
void require_pair(std::span<const double> actual, std::span<const double> predicted, const char* what) {
    if (actual.size() != predicted.size()) throw ValidationError(std::string(what) + ": length mismatch");
    if (actual.empty()) throw UndefinedMetricError(std::string(what) + ": empty input");
}
}  // namespace

MapeResult mape(std::span<const double> actual, std::span<const double> predicted) {
    require_pair(actual, predicted, "mape");
    double ratio_sum = 0.0;
    MapeResult out;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        if (actual[i] > kZeroTargetThreshold) {
            ratio_sum += std::fabs(actual[i] - predicted[i]) / actual[i];
            ++out.n;
        } else {
            ++out.skipped;
        }
    }
    if (out.n == 0) throw UndefinedMetricError("mape: every target is zero");
    out.percent = 100.0 * ratio_sum / static_cast<double>(out.n);
    return out;
}

double mae(std::span<const double> actual, std::span<const double> predicted) {
    require_pair(actual, predicted, "mae");
    return simd::abs_diff_sum(actual, predicted) / static_cast<double>(actual.size());
}

void MetricAccumulator::add(double actual, double predicted) {
    const double err = std::fabs(actual - predicted);
    abs_sum += err;
    ++total;
    if (actual > kZeroTargetThreshold) {
        ratio_sum += err / actual;
        ++retained;
    } else {
        ++skipped;
    }
}

void MetricAccumulator::merge(const MetricAccumulator& other) {
    ratio_sum += other.ratio_sum;
    abs_sum += other.abs_sum;
    total += other.total;
    retained += other.retained;
    skipped += other.skipped;
}

double MetricAccumulator::mape_percent() const {
    if (retained == 0) throw UndefinedMetricError("mape: every target is zero");
    return 100.0 * ratio_sum / static_cast<double>(retained);
}

double MetricAccumulator::mae() const {
    if (total == 0) throw UndefinedMetricError("mae: no points");
    return abs_sum / static_cast<double>(total);
}

void finalize(EvalReport& report) {
    MetricAccumulator pooled;
    for (const auto& [cell, trace] : report.per_cell) pooled.merge(trace.metrics);
    report.n = pooled.retained;
    report.skipped_zero_targets = pooled.skipped;
    report.mape_percent = pooled.mape_percent();
    report.mape_fraction = report.mape_percent / 100.0;
    report.mae = pooled.mae();
}

EvalReport evaluate(const std::string& variant, const PredictFn& predict, const ingest::SeriesMap& dataset,
                    ingest::HourSpan split, std::size_t window) {
    if (split.length() <= 0) throw UsageError("evaluate: empty split");
    EvalReport report;
    report.variant = variant;
    const auto w = static_cast<std::int64_t>(window);
    for (const auto& [cell, series] : dataset) {
        if (split.start_hour - w < series.start_hour || split.end_hour > series.end_hour()) {
            throw ValidationError("evaluate: cell " + std::to_string(cell) + " does not cover the evaluation split");
        }
        CellTrace trace;
        trace.cell_id = cell;
        for (std::int64_t t = split.start_hour; t < split.end_hour; ++t) {
            const auto offset = static_cast<std::size_t>(t - w - series.start_hour);
            const std::span<const double> history(series.values.data() + offset, window);
            const double actual = series.values[offset + window];
            const double predicted = predict(cell, history);
            if (!std::isfinite(predicted)) {
                throw NumericError("evaluate: non-finite prediction for cell " + std::to_string(cell));
            }
            trace.hours.push_back(t);
            trace.actual.push_back(actual);
            trace.predicted.push_back(predicted);
            trace.metrics.add(actual, predicted);
        }
        report.per_cell.emplace(cell, std::move(trace));
    }
    finalize(report);
    return report;
}

std::string comparison_header() { return "variant,mape_percent,mape_fraction,mae,n,skipped\n"; }

std::string comparison_row(const EvalReport& r) {
    return r.variant + ',' + io::format_double(r.mape_percent) + ',' + io::format_double(r.mape_fraction) + ',' +
           io::format_double(r.mae) + ',' + std::to_string(r.n) + ',' + std::to_string(r.skipped_zero_targets) + '\n';
}

std::string comparison_csv(std::span<const EvalReport> reports) {
    std::string out = comparison_header();
    for (const auto& r : reports) out += comparison_row(r);
    return out;
}

std::string per_cell_csv(const EvalReport& report) {
    std::string out = "cell_id,n,mape_percent,mae,skipped\n";
    for (const auto& [cell, trace] : report.per_cell) {
        const auto& m = trace.metrics;
        const std::string mape_text = m.retained ? io::format_double(m.mape_percent()) : std::string("nan");
        out += std::to_string(cell) + ',' + std::to_string(m.retained) + ',' + mape_text + ',' +
               io::format_double(m.mae()) + ',' + std::to_string(m.skipped) + '\n';
    }
    return out;
}

std::string predictions_csv(const EvalReport& report) {
    std::string out = "cell_id,hour,actual,predicted\n";
    for (const auto& [cell, trace] : report.per_cell) {
        for (std::size_t i = 0; i < trace.hours.size(); ++i) {
            out += std::to_string(cell) + ',' + std::to_string(trace.hours[i]) + ',' +
                   io::format_double(trace.actual[i]) + ',' + io::format_double(trace.predicted[i]) + '\n';
        }
    }
    return out;
}

EvalReport report_from_predictions_csv(const std::string& variant, std::string_view text) {
    EvalReport report;
    report.variant = variant;
    std::size_t line_number = 0;
    bool header = true;
    for (auto line : io::split(text, '\n')) {
        ++line_number;
        line = io::trim(line);
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line != "cell_id,hour,actual,predicted") throw ParseError(line_number, "unexpected predictions header");
            continue;
        }
        const auto f = io::split(line, ',');
        if (f.size() != 4) throw ParseError(line_number, "expected 4 columns");
        const auto cell = io::parse_int(f[0]);
        const auto hour = io::parse_int(f[1]);
        const auto actual = io::parse_double(f[2]);
        const auto predicted = io::parse_double(f[3]);
        if (!cell || !hour || !actual || !predicted) throw ParseError(line_number, "malformed predictions row");
        auto& trace = report.per_cell[*cell];
        trace.cell_id = *cell;
        trace.hours.push_back(*hour);
        trace.actual.push_back(*actual);
        trace.predicted.push_back(*predicted);
        trace.metrics.add(*actual, *predicted);
    }
    if (report.per_cell.empty()) throw MissingInputError("no predictions for " + variant);
    finalize(report);
    return report;
}

std::string traces_csv(std::span<const std::int64_t> cell_ids, std::span<const EvalReport> reports) {
    if (reports.empty()) throw UsageError("traces: no reports");
    std::string out = "cell_id,hour,actual";
    for (const auto& r : reports) out += ",predicted_" + r.variant;
    out += '\n';
    for (auto cell : cell_ids) {
        std::vector<const CellTrace*> traces;
        for (const auto& r : reports) {
            const auto it = r.per_cell.find(cell);
            if (it == r.per_cell.end()) {
                throw ValidationError("traces: cell " + std::to_string(cell) + " not evaluated by " + r.variant);
            }
            traces.push_back(&it->second);
        }
        const auto& base = *traces.front();
        for (const auto* t : traces) {
            if (t->hours != base.hours) throw ValidationError("traces: reports cover different hours");
        }
        for (std::size_t i = 0; i < base.hours.size(); ++i) {
            out += std::to_string(cell) + ',' + std::to_string(base.hours[i]) + ',' + io::format_double(base.actual[i]);
            for (const auto* t : traces) out += ',' + io::format_double(t->predicted[i]);
            out += '\n';
        }
    }
    return out;
}

std::string grid_heatmap_csv(const ingest::SeriesMap& series, std::int64_t grid_side) {
    std::string out = "row,col,mean_traffic\n";
    for (std::int64_t row = 1; row <= grid_side; ++row) {
        for (std::int64_t col = 1; col <= grid_side; ++col) {
            const auto id = ingest::cell_id_at({row, col}, grid_side);
            double mean = 0.0;
            if (const auto it = series.find(id); it != series.end() && !it->second.values.empty()) {
                mean = simd::sum(it->second.values) / static_cast<double>(it->second.values.size());
            }
            out += std::to_string(row) + ',' + std::to_string(col) + ',' + io::format_double(mean) + '\n';
        }
    }
    return out;
}

}  // namespace cellcast::eval
