#include "cellcast/ingest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>
#include <string>
#include <unordered_map>

#include "cellcast/error.hpp"
#include "cellcast/io.hpp"
#include "cellcast/rng.hpp"

namespace cellcast::ingest {

namespace {

constexpr std::size_t kNumFields = 8;

double parse_activity(std::string_view field, std::size_t line_number, const char* name) {
    if (io::trim(field).empty()) return 0.0;
    const auto value = io::parse_double(field);
    if (!value || !std::isfinite(*value)) {
        throw ParseError(line_number, std::string("malformed ") + name + " value '" + std::string(field) + "'");
    }
    if (*value < 0.0) {
        throw ValidationError("line " + std::to_string(line_number) + ": negative " + name + " activity");
    }
    return *value;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

RawRecord parse_record(std::string_view line, std::size_t line_number) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
    const auto fields = io::split(line, '\t');
    if (fields.size() < 3) throw ParseError(line_number, "expected at least 3 tab-separated fields");
    for (std::size_t i = kNumFields; i < fields.size(); ++i) {
        if (!io::trim(fields[i]).empty()) throw ParseError(line_number, "too many fields");
    }

    RawRecord r;
    const auto cell = io::parse_int(fields[0]);
    if (!cell) throw ParseError(line_number, "malformed cell_id '" + std::string(fields[0]) + "'");
    const auto ts = io::parse_int(fields[1]);
    if (!ts) throw ParseError(line_number, "malformed timestamp '" + std::string(fields[1]) + "'");
    r.cell_id = *cell;
    r.timestamp_ms = *ts;
    if (r.cell_id < 1 || r.cell_id > kMaxCellId) {
        throw ValidationError("line " + std::to_string(line_number) + ": cell_id " + std::to_string(r.cell_id) +
                              " outside [1, 10000]");
    }
    if (r.timestamp_ms % kSlotMillis != 0) {
        throw ValidationError("line " + std::to_string(line_number) + ": timestamp not on a 10-minute boundary");
    }
    if (!io::trim(fields[2]).empty()) {
        const auto code = io::parse_int(fields[2]);
        if (!code) throw ParseError(line_number, "malformed country_code '" + std::string(fields[2]) + "'");
        r.country_code = *code;
    }

    auto field = [&](std::size_t i) { return i < fields.size() ? fields[i] : std::string_view{}; };
    r.sms_in = parse_activity(field(3), line_number, "sms_in");
    r.sms_out = parse_activity(field(4), line_number, "sms_out");
    r.call_in = parse_activity(field(5), line_number, "call_in");
    r.call_out = parse_activity(field(6), line_number, "call_out");
    r.internet = parse_activity(field(7), line_number, "internet");
    return r;
}

Selector parse_selector(std::string_view name) {
    if (name == "internet") return Selector::Internet;
    if (name == "total") return Selector::Total;
    throw UsageError("unknown selector '" + std::string(name) + "' (expected internet|total)");
}

std::string_view to_string(Selector selector) {
    return selector == Selector::Internet ? "internet" : "total";
}

double selected_activity(const RawRecord& r, Selector selector) {
    if (selector == Selector::Internet) return r.internet;
    return r.sms_in + r.sms_out + r.call_in + r.call_out + r.internet;
}

std::int64_t local_hour_index(std::int64_t timestamp_ms, int utc_offset_hours) {
    return floor_div(timestamp_ms, kHourMillis) + utc_offset_hours;
}

std::int64_t local_day_start_hour(std::string_view iso_date) {
    const auto parts = io::split(io::trim(iso_date), '-');
    if (parts.size() != 3) throw UsageError("expected date YYYY-MM-DD, got '" + std::string(iso_date) + "'");
    const auto y = io::parse_int(parts[0]);
    const auto m = io::parse_int(parts[1]);
    const auto d = io::parse_int(parts[2]);
    if (!y || !m || !d) throw UsageError("expected date YYYY-MM-DD, got '" + std::string(iso_date) + "'");
    using namespace std::chrono;
    const year_month_day ymd{year{static_cast<int>(*y)}, month{static_cast<unsigned>(*m)},
                             day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) throw UsageError("invalid calendar date '" + std::string(iso_date) + "'");
    return static_cast<std::int64_t>(sys_days{ymd}.time_since_epoch().count()) * kHoursPerDay;
}

// ---- aggregation ---------------------------------------------------------

HourlyAggregator::HourlyAggregator(Selector selector, HourSpan span, int utc_offset_hours)
    : selector_(selector), span_(span), utc_offset_hours_(utc_offset_hours) {
    if (span.length() <= 0) throw UsageError("aggregation span must be non-empty");
}

void HourlyAggregator::add(const RawRecord& record) {
    const auto hour = local_hour_index(record.timestamp_ms, utc_offset_hours_);
    if (!span_.contains(hour)) {
        ++skipped_;
        return;
    }
    auto& bins = bins_[record.cell_id];
    if (bins.empty()) bins.assign(static_cast<std::size_t>(span_.length()), 0.0);
    bins[static_cast<std::size_t>(hour - span_.start_hour)] += selected_activity(record, selector_);
    ++used_;
}

void HourlyAggregator::merge(const HourlyAggregator& other) {
    if (other.span_.start_hour != span_.start_hour || other.span_.end_hour != span_.end_hour ||
        other.selector_ != selector_) {
        throw UsageError("cannot merge aggregators with different span or selector");
    }
    for (const auto& [cell, values] : other.bins_) {
        auto& bins = bins_[cell];
        if (bins.empty()) bins.assign(values.size(), 0.0);
        for (std::size_t i = 0; i < values.size(); ++i) bins[i] += values[i];
    }
    used_ += other.used_;
    skipped_ += other.skipped_;
}

Aggregation HourlyAggregator::finish() && {
    Aggregation out;
    out.records_used = used_;
    out.skipped_out_of_span = skipped_;
    for (auto& [cell, values] : bins_) {
        out.series.emplace(cell, HourlyCellSeries{cell, span_.start_hour, std::move(values)});
    }
    bins_.clear();
    return out;
}

Aggregation aggregate_hourly(std::span<const RawRecord> records, Selector selector, HourSpan span,
                             int utc_offset_hours) {
    HourlyAggregator agg(selector, span, utc_offset_hours);
    for (const auto& r : records) agg.add(r);
    return std::move(agg).finish();
}

namespace {

// Sparse per-file partial sums keyed by (cell, hour offset).
struct FilePartial {
    std::unordered_map<std::uint64_t, double> bins;
    std::size_t used = 0;
    std::size_t skipped = 0;
};

FilePartial aggregate_file(const std::filesystem::path& path, Selector selector, HourSpan span,
                           int utc_offset_hours) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInputError("cannot open " + path.string());
    FilePartial partial;
    std::string line;
    std::size_t line_number = 0;
    const auto span_len = static_cast<std::uint64_t>(span.length());
    while (std::getline(in, line)) {
        ++line_number;
        if (io::trim(line).empty()) continue;
        RawRecord r;
        try {
            r = parse_record(line, line_number);
        } catch (const ParseError& e) {
            throw ParseError(path.string(), e);
        } catch (const ValidationError& e) {
            throw ValidationError(path.string() + ": " + e.what());
        }
        const auto hour = local_hour_index(r.timestamp_ms, utc_offset_hours);
        if (!span.contains(hour)) {
            ++partial.skipped;
            continue;
        }
        const auto key = static_cast<std::uint64_t>(r.cell_id) * span_len +
                         static_cast<std::uint64_t>(hour - span.start_hour);
        partial.bins[key] += selected_activity(r, selector);
        ++partial.used;
    }
    return partial;
}

}  // namespace

Aggregation aggregate_directory(const std::filesystem::path& dir, Selector selector, HourSpan span,
                                int utc_offset_hours, unsigned jobs) {
    if (span.length() <= 0) throw UsageError("aggregation span must be non-empty");
    if (!std::filesystem::is_directory(dir)) throw MissingInputError("input directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    jobs = std::max(1u, jobs);

    const auto span_len = static_cast<std::uint64_t>(span.length());
    std::map<std::int64_t, std::vector<double>> bins;
    std::size_t used = 0, skipped = 0;

    for (std::size_t batch = 0; batch < files.size(); batch += jobs) {
        const std::size_t end = std::min(files.size(), batch + jobs);
        std::vector<std::future<FilePartial>> pending;
        for (std::size_t i = batch; i < end; ++i) {
            pending.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, aggregate_file,
                                         files[i], selector, span, utc_offset_hours));
        }
        // Merge in file order; each bin receives at most one addition per file.
        for (auto& f : pending) {
            const FilePartial partial = f.get();
            std::vector<std::pair<std::uint64_t, double>> entries(partial.bins.begin(), partial.bins.end());
            std::sort(entries.begin(), entries.end());
            for (const auto& [key, value] : entries) {
                const auto cell = static_cast<std::int64_t>(key / span_len);
                auto& cell_bins = bins[cell];
                if (cell_bins.empty()) cell_bins.assign(span_len, 0.0);
                cell_bins[key % span_len] += value;
            }
            used += partial.used;
            skipped += partial.skipped;
        }
    }

    Aggregation out;
    out.records_used = used;
    out.skipped_out_of_span = skipped;
    for (auto& [cell, values] : bins) out.series.emplace(cell, HourlyCellSeries{cell, span.start_hour, std::move(values)});
    return out;
}

// ---- grid ------------------------------------------------------------------

GridPosition grid_position(std::int64_t cell_id, std::int64_t grid_side) {
    if (cell_id < 1 || cell_id > grid_side * grid_side) {
        throw ValidationError("cell id " + std::to_string(cell_id) + " outside the grid");
    }
    return {(cell_id - 1) / grid_side + 1, (cell_id - 1) % grid_side + 1};
}

std::int64_t cell_id_at(GridPosition pos, std::int64_t grid_side) {
    return (pos.row - 1) * grid_side + pos.col;
}

std::vector<std::int64_t> select_central_cells(std::int64_t grid_side, std::int64_t block_side) {
    if (grid_side <= 0 || block_side <= 0) throw UsageError("grid and block sides must be positive");
    if (block_side > grid_side) throw UsageError("block side exceeds grid side");
    if ((grid_side - block_side) % 2 != 0) throw UsageError("grid side minus block side must be even");
    const std::int64_t lo = (grid_side - block_side) / 2 + 1;
    const std::int64_t hi = (grid_side + block_side) / 2;
    std::vector<std::int64_t> ids;
    ids.reserve(static_cast<std::size_t>(block_side * block_side));
    for (std::int64_t row = lo; row <= hi; ++row) {
        for (std::int64_t col = lo; col <= hi; ++col) ids.push_back(cell_id_at({row, col}, grid_side));
    }
    return ids;
}

// ---- synthetic -------------------------------------------------------------

double daily_bump(int hour_of_day, int peak_hour, double width_hours) {
    int d = ((hour_of_day - peak_hour) % kHoursPerDay + kHoursPerDay) % kHoursPerDay;
    if (d > kHoursPerDay / 2) d -= kHoursPerDay;
    const double x = static_cast<double>(d) / width_hours;
    return std::exp(-0.5 * x * x);
}

void validate(const SyntheticSpec& spec) {
    if (spec.n_cells < 1) throw UsageError("synthetic: n_cells must be >= 1");
    if (spec.n_days < 1) throw UsageError("synthetic: n_days must be >= 1");
    if (spec.regimes.empty()) throw UsageError("synthetic: at least one regime required");
    if (!(spec.noise_rho >= 0.0 && spec.noise_rho < 1.0)) throw UsageError("synthetic: noise_rho must be in [0, 1)");
    if (!(spec.bump_width_hours > 0.0)) throw UsageError("synthetic: bump width must be positive");
    double total = 0.0;
    std::vector<bool> seen(kHoursPerDay, false);
    for (const auto& r : spec.regimes) {
        if (r.peak_hour < 0 || r.peak_hour >= kHoursPerDay) throw UsageError("synthetic: peak hour outside 0..23");
        if (seen[static_cast<std::size_t>(r.peak_hour)]) throw UsageError("synthetic: duplicate regime peak hour");
        seen[static_cast<std::size_t>(r.peak_hour)] = true;
        if (!(r.base_level > 0.0)) throw UsageError("synthetic: base_level must be > 0");
        if (!(r.amplitude >= 0.0)) throw UsageError("synthetic: amplitude must be >= 0");
        if (!(r.noise_sigma >= 0.0)) throw UsageError("synthetic: noise_sigma must be >= 0");
        if (!(r.cell_fraction > 0.0 && r.cell_fraction <= 1.0)) throw UsageError("synthetic: cell_fraction must be in (0, 1]");
        total += r.cell_fraction;
    }
    if (std::fabs(total - 1.0) > 1e-9) throw UsageError("synthetic: cell fractions must sum to 1");
}

namespace {

// Largest-remainder apportionment; equal remainders go to the lower index.
std::vector<int> regime_counts(const SyntheticSpec& spec) {
    const auto n = static_cast<double>(spec.n_cells);
    std::vector<int> counts;
    std::vector<std::pair<double, std::size_t>> remainders;
    int assigned = 0;
    for (std::size_t i = 0; i < spec.regimes.size(); ++i) {
        const double exact = spec.regimes[i].cell_fraction * n;
        const int whole = static_cast<int>(std::floor(exact));
        counts.push_back(whole);
        assigned += whole;
        remainders.emplace_back(exact - whole, i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < spec.n_cells; ++k, ++assigned) {
        ++counts[remainders[k % remainders.size()].second];
    }
    return counts;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    validate(spec);
    Rng rng(spec.seed);

    std::vector<int> labels;
    const auto counts = regime_counts(spec);
    for (std::size_t i = 0; i < counts.size(); ++i) labels.insert(labels.end(), static_cast<std::size_t>(counts[i]), static_cast<int>(i));
    rng.shuffle(std::span<int>(labels));

    const std::size_t hours = static_cast<std::size_t>(spec.n_days) * kHoursPerDay;
    const std::int64_t start_hour = spec.start_day * kHoursPerDay;
    const double innovation_scale = std::sqrt(1.0 - spec.noise_rho * spec.noise_rho);

    SyntheticData out;
    for (int c = 0; c < spec.n_cells; ++c) {
        const std::int64_t cell_id = c + 1;
        const int label = labels[static_cast<std::size_t>(c)];
        const Regime& regime = spec.regimes[static_cast<std::size_t>(label)];
        const double sigma = regime.noise_sigma;

        HourlyCellSeries s{cell_id, start_hour, std::vector<double>(hours)};
        double log_noise = sigma * rng.normal();
        for (std::size_t t = 0; t < hours; ++t) {
            if (t > 0) log_noise = spec.noise_rho * log_noise + sigma * innovation_scale * rng.normal();
            const int hour_of_day = static_cast<int>(t % kHoursPerDay);
            const double clean =
                regime.base_level + regime.amplitude * daily_bump(hour_of_day, regime.peak_hour, spec.bump_width_hours);
            s.values[t] = sigma > 0.0 ? clean * std::exp(log_noise - 0.5 * sigma * sigma) : clean;
        }
        out.series.emplace(cell_id, std::move(s));
        out.regime_of.emplace(cell_id, label);
    }
    return out;
}

}  // namespace cellcast::ingest
