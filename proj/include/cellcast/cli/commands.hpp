#pragma once

// Subcommand entry points. Each stage reads and writes declared files only;
// `run` chains them from a configuration file.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cellcast/cli/config.hpp"
#include "cellcast/error.hpp"

namespace cellcast::cli {

namespace fs = std::filesystem;

struct IngestArgs {
    fs::path input;
    fs::path out;
    ingest::Selector selector = ingest::Selector::Internet;
    std::string start_date = "2013-11-01";
    int days = 30;
    int utc_offset = ingest::kDefaultUtcOffsetHours;
    std::int64_t grid_side = 100;
    std::int64_t central_block = 30;  // 0 keeps every cell
    unsigned jobs = 1;
};

struct SynthArgs {
    SynthSettings settings;
    std::uint64_t seed = 0;
    fs::path out;
    fs::path labels;
};

struct ClusterArgs {
    fs::path series;
    fs::path out;
    int k = 2;
    int days = profile::kDefaultTrainingDays;
    profile::ProfileMode mode = profile::ProfileMode::RawHours;
};

struct TrainArgs {
    fs::path series;
    std::string assignment = "none";  // path or "none"
    model::ModelSpec spec;
    trainer::TrainerConfig trainer;
    trainer::ExperimentOptions experiment;
    fs::path out;
};

struct EvaluateArgs {
    fs::path models;  // a run directory or a directory of runs
    fs::path series;
    std::string assignment;  // empty: the run's own copy
    fs::path out;
};

struct ReportArgs {
    fs::path eval;
    fs::path series;  // empty: look for the grid cache in the work dir
    fs::path workdir;
    std::vector<std::int64_t> cells;
    std::int64_t grid_side = 100;
    fs::path out;
};

void cmd_ingest(const IngestArgs& args);
void cmd_synth(const SynthArgs& args);
void cmd_cluster(const ClusterArgs& args);
/// Returns the run directory.
fs::path cmd_train(const TrainArgs& args);
void cmd_evaluate(const EvaluateArgs& args);
void cmd_report(const ReportArgs& args);
/// Full pipeline from a configuration; outputs land under the work dir.
void cmd_run(const RunConfig& config);

/// Comparison-table order: unclustered lstm, mlp, multi-tcn-lstm, then the
/// clustered runs in the same order; anything else sorts last by name.
bool report_order(const std::string& a, const std::string& b);

/// `error category=<c> kind=<k> message="<m>"`
std::string error_line(std::string_view category, std::string_view kind, std::string_view message);
int exit_code(ErrorCategory category);

/// Parses arguments, dispatches, maps failures to exit codes.
int run_cli(int argc, const char* const* argv);

}  // namespace cellcast::cli
