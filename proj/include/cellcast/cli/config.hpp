#pragma once

// Line-based `key = value` configuration with `[section]` headers. Keys are
// addressed as "section.key". Blank lines and lines starting with '#' or
// ';' are ignored.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cellcast/ingest.hpp"
#include "cellcast/model.hpp"
#include "cellcast/profile.hpp"
#include "cellcast/trainer.hpp"

namespace cellcast::cli {

class KeyValueFile {
public:
    static KeyValueFile parse(std::string_view text);
    static KeyValueFile load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::optional<std::string> get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::size_t> get_sizes(const std::string& key, const std::vector<std::size_t>& fallback) const;

    /// Keys never read through a getter; used to reject typos.
    std::vector<std::string> unused_keys() const;
    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

/// Renders sections in the given order; `entries` are (section.key, value).
std::string render_key_values(const std::vector<std::pair<std::string, std::string>>& entries);

std::vector<std::size_t> parse_size_list(std::string_view text);
std::string format_size_list(const std::vector<std::size_t>& values);

struct SynthSettings {
    int cells = 200;
    std::vector<int> peak_hours{15, 21};
    int days = 30;
    double noise = 0.0;
    double noise_rho = 0.9;
    double base = 100.0;
    double amplitude = 200.0;
    std::string start_date = "2013-11-01";
};

ingest::SyntheticSpec to_synthetic_spec(const SynthSettings& s, std::uint64_t seed);
std::vector<int> parse_peak_hours(std::string_view text);  // "15:21"

enum class ClusteredMode { No, Yes, Both };

struct RunConfig {
    // [paths]
    std::string input;  // raw TSV directory; empty -> synthetic data
    std::string workdir = "work";
    // [ingest]
    ingest::Selector selector = ingest::Selector::Internet;
    std::string start_date = "2013-11-01";
    int days = 30;
    int utc_offset = ingest::kDefaultUtcOffsetHours;
    std::int64_t grid_side = 100;
    std::int64_t central_block = 30;
    // [synth]
    SynthSettings synth;
    // [cluster]
    int k = 2;
    int training_days = profile::kDefaultTrainingDays;
    profile::ProfileMode profile_mode = profile::ProfileMode::RawHours;
    // [model] / [baseline]
    model::ModelSpec model;
    // [trainer]
    trainer::TrainerConfig trainer;
    trainer::ExperimentOptions experiment;
    // [run]
    std::vector<model::Variant> variants{model::Variant::MultiTcnLstm, model::Variant::Lstm, model::Variant::Mlp};
    ClusteredMode clustered = ClusteredMode::Both;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    std::vector<std::int64_t> trace_cells;

    void validate() const;
};

/// `require_seed` enforces an explicit [run] seed (no implicit seeding).
RunConfig run_config_from(const KeyValueFile& file, bool require_seed);
/// Full configuration, every default spelled out; parses back identically.
std::string to_text(const RunConfig& config);

/// Model/trainer settings shared by train manifests.
std::vector<std::pair<std::string, std::string>> model_entries(const model::ModelSpec& spec);
std::vector<std::pair<std::string, std::string>> trainer_entries(const trainer::TrainerConfig& t,
                                                                 const trainer::ExperimentOptions& e);
model::ModelSpec model_spec_from(const KeyValueFile& file, model::ModelSpec base);
trainer::TrainerConfig trainer_config_from(const KeyValueFile& file, trainer::TrainerConfig base);
trainer::ExperimentOptions experiment_options_from(const KeyValueFile& file, trainer::ExperimentOptions base);

}  // namespace cellcast::cli
