#include "cellcast/cli/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>

#include "cellcast/cluster.hpp"
#include "cellcast/eval.hpp"
#include "cellcast/io.hpp"
#include "cellcast/log.hpp"
#include "cellcast/nn/serialize.hpp"
#include "cellcast/series_io.hpp"
#include "cellcast/trainer.hpp"

namespace cellcast::cli {

namespace {

constexpr const char* kManifest = "manifest.txt";
constexpr const char* kGridCache = "grid_series.bin";

void require_file(const fs::path& path, std::string_view what) {
    if (!fs::is_regular_file(path)) throw MissingInputError(std::string(what) + " not found: " + path.string());
}

ingest::SeriesMap load_series(const fs::path& path) {
    require_file(path, "series");
    auto series = ingest::read_series(path);
    if (series.empty()) throw ValidationError("series file holds no cells: " + path.string());
    return series;
}

std::optional<cluster::ClusterAssignment> load_assignment(const std::string& arg) {
    if (arg.empty() || arg == "none") return std::nullopt;
    require_file(arg, "assignment");
    return cluster::assignment_from_csv(io::read_text_file(arg));
}

std::string join_ints(const std::vector<int>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + std::to_string(values[i]);
    return out;
}

std::string mode_name(profile::ProfileMode mode) {
    return mode == profile::ProfileMode::RawHours ? "raw" : "folded";
}

profile::ProfileMode parse_mode(const std::string& name) {
    if (name == "raw") return profile::ProfileMode::RawHours;
    if (name == "folded") return profile::ProfileMode::FoldedDay;
    throw UsageError("profile must be raw or folded");
}

// Run directories under `root`: root itself when it holds `marker`,
// otherwise its immediate subdirectories that do, sorted by name.
std::vector<fs::path> run_dirs(const fs::path& root, const char* marker) {
    if (!fs::is_directory(root)) throw MissingInputError("directory not found: " + root.string());
    if (fs::is_regular_file(root / marker)) return {root};
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory() && fs::is_regular_file(entry.path() / marker)) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

}  // namespace

bool report_order(const std::string& a, const std::string& b) {
    const auto rank = [](const std::string& name) {
        static const std::vector<std::string> order{"lstm", "mlp", "multi-tcn-lstm", "lstm-C", "mlp-C",
                                                    "multi-tcn-lstm-C"};
        const auto it = std::find(order.begin(), order.end(), name);
        return static_cast<std::size_t>(it - order.begin());
    };
    const auto ra = rank(a);
    const auto rb = rank(b);
    return ra != rb ? ra < rb : a < b;
}

std::string error_line(std::string_view category, std::string_view kind, std::string_view message) {
    std::string escaped;
    for (char c : message) {
        if (c == '"' || c == '\\') escaped += '\\';
        escaped += (c == '\n' ? ' ' : c);
    }
    return "error category=" + std::string(category) + " kind=" + std::string(kind) + " message=\"" + escaped + "\"";
}

int exit_code(ErrorCategory category) {
    switch (category) {
        case ErrorCategory::Usage: return 2;
        case ErrorCategory::Data: return 3;
        case ErrorCategory::Numeric: return 4;
    }
    return 1;
}

// ---- stages ------------------------------------------------------------------

void cmd_ingest(const IngestArgs& a) {
    if (a.days < 1) throw UsageError("--days must be >= 1");
    if (!fs::is_directory(a.input)) throw MissingInputError("input directory not found: " + a.input.string());
    const auto start = ingest::local_day_start_hour(a.start_date);
    const ingest::HourSpan span{start, start + static_cast<std::int64_t>(a.days) * ingest::kHoursPerDay};
    auto agg = ingest::aggregate_directory(a.input, a.selector, span, a.utc_offset, a.jobs);
    log::info("ingest.done", {{"records", agg.records_used},
                              {"skipped_out_of_span", agg.skipped_out_of_span},
                              {"cells", agg.series.size()}});
    if (agg.series.empty()) throw ValidationError("no records fall inside the requested span");

    if (a.central_block == 0) {
        ingest::write_series(a.out, agg.series);
        return;
    }
    ingest::write_series_binary(a.out.parent_path() / kGridCache, agg.series);
    ingest::SeriesMap selected;
    std::size_t filled = 0;
    for (auto id : ingest::select_central_cells(a.grid_side, a.central_block)) {
        const auto it = agg.series.find(id);
        if (it != agg.series.end()) {
            selected.emplace(id, it->second);
        } else {
            // A cell with no records carried no traffic.
            selected.emplace(id, ingest::HourlyCellSeries{id, span.start_hour,
                                                          std::vector<double>(static_cast<std::size_t>(span.length()), 0.0)});
            ++filled;
        }
    }
    if (filled > 0) log::warn("ingest.empty_cells", {{"count", filled}});
    ingest::write_series(a.out, selected);
}

void cmd_synth(const SynthArgs& a) {
    const auto data = ingest::generate_synthetic(to_synthetic_spec(a.settings, a.seed));
    ingest::write_series(a.out, data.series);
    std::string labels = "cell_id,regime,peak_hour\n";
    for (const auto& [cell, regime] : data.regime_of) {
        labels += std::to_string(cell) + ',' + std::to_string(regime) + ',' +
                  std::to_string(a.settings.peak_hours[static_cast<std::size_t>(regime)]) + '\n';
    }
    io::write_text_file(a.labels, labels);
    log::info("synth.done", {{"cells", data.series.size()}, {"days", a.settings.days}, {"seed", a.seed}});
}

void cmd_cluster(const ClusterArgs& a) {
    const auto series = load_series(a.series);
    const profile::GroupingOptions options{a.days, a.mode};

    std::vector<profile::PeakHistogram> histograms;
    for (const auto& [cell, s] : series) histograms.push_back(profile::peak_histogram(s, a.days));
    const auto groups = profile::group_by_peak_hour(series, options);
    log::info("cluster.groups", {{"cells", series.size()}, {"groups", groups.size()}});

    const auto assignment = cluster::cluster_groups(groups, a.k, series, options);
    if (!assignment.flagged_groups.empty()) {
        log::warn("cluster.constant_groups", {{"groups", join_ints(assignment.flagged_groups)}});
    }
    profile::GroupMap regular;
    for (const auto& [id, g] : groups)
        if (!g.is_constant()) regular.emplace(id, g);

    io::write_text_file(a.out / "peaks.csv", profile::peak_histograms_csv(histograms));
    io::write_text_file(a.out / "groups.csv", profile::group_profiles_csv(groups));
    io::write_text_file(a.out / "correlation.csv", cluster::correlation_csv(cluster::correlation_matrix(regular)));
    io::write_text_file(a.out / "assignment.csv", cluster::assignment_csv(groups, assignment));

    std::vector<std::pair<std::string, std::string>> summary{
        {"k", std::to_string(assignment.k)},
        {"groups", std::to_string(groups.size())},
        {"cells", std::to_string(series.size())},
        {"quality", io::format_double(assignment.quality)},
        {"profile", mode_name(a.mode)},
        {"training_days", std::to_string(a.days)},
        {"flagged_groups", join_ints(assignment.flagged_groups)},
    };
    for (int c = 0; c < assignment.k; ++c) {
        std::vector<int> members;
        std::size_t cells = 0;
        for (const auto& [gid, cl] : assignment.group_to_cluster) {
            if (cl != c) continue;
            members.push_back(gid);
            cells += groups.at(gid).members.size();
        }
        summary.push_back({"cluster" + std::to_string(c) + ".groups", join_ints(members)});
        summary.push_back({"cluster" + std::to_string(c) + ".cells", std::to_string(cells)});
    }
    io::write_text_file(a.out / "cluster_summary.txt", render_key_values(summary));
    log::info("cluster.done", {{"k", assignment.k}, {"quality", assignment.quality}});
}

fs::path cmd_train(const TrainArgs& a) {
    const auto series = load_series(a.series);
    const auto assignment = load_assignment(a.assignment);
    const auto* assign_ptr = assignment ? &*assignment : nullptr;

    const auto on_epoch = [](const trainer::EpochLog& e) {
        log::info("train.epoch",
                  {{"model", e.model_id}, {"epoch", e.epoch}, {"loss", e.train_loss}, {"val_mape", e.val_mape}});
    };
    auto experiment = trainer::run_experiment(series, assign_ptr, a.spec, a.trainer, a.experiment, on_epoch);
    const auto dir = a.out / experiment.run_name;
    fs::create_directories(dir);

    std::vector<std::pair<std::string, std::string>> manifest{
        {"run.name", experiment.run_name},
        {"run.variant", std::string(model::to_string(a.spec.variant))},
        {"run.clustered", assignment ? "true" : "false"},
        {"run.k", std::to_string(assignment ? assignment->k : 0)},
        {"run.models", std::to_string(experiment.models.size())},
    };
    for (auto& e : model_entries(a.spec)) manifest.push_back(std::move(e));
    for (auto& e : trainer_entries(a.trainer, a.experiment)) manifest.push_back(std::move(e));

    std::string train_log = "model_id,epoch,train_loss,val_mape\n";
    for (auto& [id, tm] : experiment.models) {
        const auto weights = id + ".weights";
        nn::save_parameters(dir / weights, tm.model->parameters());
        const auto section = "trained." + id + ".";
        manifest.push_back({section + "cluster", std::to_string(tm.cluster)});
        manifest.push_back({section + "scope", tm.run.scope});
        manifest.push_back({section + "cells", std::to_string(tm.cells.size())});
        manifest.push_back({section + "parameters", std::to_string(tm.model->parameter_count())});
        manifest.push_back({section + "norm_mean", io::format_double(tm.norm.mean)});
        manifest.push_back({section + "norm_std", io::format_double(tm.norm.std)});
        manifest.push_back({section + "weights", weights});
        manifest.push_back({section + "epochs", std::to_string(tm.run.epochs)});
        manifest.push_back({section + "best_epoch", std::to_string(tm.run.best_epoch)});
        manifest.push_back({section + "best_val_mape", io::format_double(tm.run.best_val_mape)});
        manifest.push_back({section + "stop_reason", tm.run.stop_reason});
        for (std::size_t i = 0; i < tm.run.train_loss.size(); ++i) {
            train_log += id + ',' + std::to_string(i + 1) + ',' + io::format_double(tm.run.train_loss[i]) + ',' +
                         io::format_double(tm.run.val_mape[i]) + '\n';
        }
        log::info("train.model", {{"model", id},
                                  {"epochs", tm.run.epochs},
                                  {"best_epoch", tm.run.best_epoch},
                                  {"best_val_mape", tm.run.best_val_mape},
                                  {"stop", tm.run.stop_reason}});
    }
    io::write_text_file(dir / kManifest, render_key_values(manifest));
    io::write_text_file(dir / "train_log.csv", train_log);
    if (assignment) fs::copy_file(a.assignment, dir / "assignment.csv", fs::copy_options::overwrite_existing);
    log::info("train.done", {{"run", experiment.run_name}, {"models", experiment.models.size()}});
    return dir;
}

namespace {

struct LoadedRun {
    std::string name;
    model::ModelSpec spec;
    trainer::ExperimentOptions options;
    bool clustered = false;
    std::map<std::string, std::unique_ptr<model::Forecaster>> models;
    std::map<int, std::pair<model::Forecaster*, trainer::NormStats>> routes;
};

LoadedRun load_run(const fs::path& dir) {
    const auto manifest = KeyValueFile::load(dir / kManifest);
    LoadedRun run;
    const auto name = manifest.get("run.name");
    const auto variant = manifest.get("run.variant");
    if (!name || !variant) throw ValidationError("manifest lacks [run] name/variant: " + dir.string());
    run.name = *name;
    run.spec = model_spec_from(manifest, {});
    run.spec.variant = model::parse_variant(*variant);
    run.options = experiment_options_from(manifest, {});
    run.clustered = manifest.get_bool("run.clustered", false);

    const std::string prefix = "trained.";
    const std::string suffix = ".weights";
    for (const auto& [key, value] : manifest.values()) {
        if (key.rfind(prefix, 0) != 0 || key.size() <= prefix.size() + suffix.size() ||
            key.compare(key.size() - suffix.size(), suffix.size(), suffix) != 0) {
            continue;
        }
        const auto id = key.substr(prefix.size(), key.size() - prefix.size() - suffix.size());
        const auto section = prefix + id + ".";
        auto model = model::build_model(run.spec);
        const auto weights = dir / value;
        require_file(weights, "weights");
        nn::load_parameters(weights, model->parameters());
        trainer::NormStats norm{manifest.get_or(section + "scope", "global"),
                                manifest.get_double(section + "norm_mean", 0.0),
                                manifest.get_double(section + "norm_std", 1.0)};
        const auto cluster = static_cast<int>(manifest.get_int(section + "cluster", -1));
        if (!run.routes.emplace(cluster, std::make_pair(model.get(), norm)).second) {
            throw ValidationError("manifest routes cluster " + std::to_string(cluster) + " twice");
        }
        run.models.emplace(id, std::move(model));
    }
    if (run.models.empty()) throw ValidationError("manifest lists no models: " + dir.string());
    return run;
}

std::string summary_row(const fs::path& path) {
    const auto text = io::read_text_file(path);
    const auto lines = io::split(text, '\n');
    if (lines.size() < 2 || lines[1].empty()) throw ValidationError("malformed summary: " + path.string());
    return std::string(lines[1]);
}

}  // namespace

void cmd_evaluate(const EvaluateArgs& a) {
    const auto series = load_series(a.series);
    const auto dirs = run_dirs(a.models, kManifest);
    if (dirs.empty()) throw MissingInputError("no trained runs under " + a.models.string());

    for (const auto& dir : dirs) {
        auto run = load_run(dir);
        std::optional<cluster::ClusterAssignment> assignment;
        if (run.clustered) {
            assignment = load_assignment(a.assignment.empty() ? (dir / "assignment.csv").string() : a.assignment);
            if (!assignment) throw UsageError("run " + run.name + " is clustered and needs an assignment");
        }
        const auto splits = trainer::make_splits(series, run.options);
        const auto predict = trainer::make_predictor(run.routes, assignment ? &assignment->cell_to_cluster : nullptr);
        const auto report = eval::evaluate(run.name, predict, series, splits.evaluation, run.spec.tcn.window);

        const auto out = a.out / run.name;
        io::write_text_file(out / "summary.csv", eval::comparison_csv(std::span(&report, 1)));
        io::write_text_file(out / "per_cell.csv", eval::per_cell_csv(report));
        io::write_text_file(out / "predictions.csv", eval::predictions_csv(report));
        log::info("evaluate.run", {{"run", run.name},
                                   {"mape_percent", report.mape_percent},
                                   {"mae", report.mae},
                                   {"n", report.n},
                                   {"skipped", report.skipped_zero_targets}});
    }

    // The comparison table covers every run evaluated into this directory.
    std::vector<std::pair<std::string, std::string>> rows;
    for (const auto& dir : run_dirs(a.out, "summary.csv")) {
        if (dir == a.out) continue;
        rows.push_back({dir.filename().string(), summary_row(dir / "summary.csv")});
    }
    std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) { return report_order(x.first, y.first); });
    std::string table = eval::comparison_header();
    for (const auto& [name, row] : rows) table += row + '\n';
    io::write_text_file(a.out / "comparison.csv", table);
}

void cmd_report(const ReportArgs& a) {
    if (!fs::is_directory(a.eval)) throw MissingInputError("no evaluation outputs: " + a.eval.string());
    auto dirs = run_dirs(a.eval, "predictions.csv");
    if (dirs.empty()) throw MissingInputError("no evaluation outputs under " + a.eval.string());
    std::sort(dirs.begin(), dirs.end(), [](const fs::path& x, const fs::path& y) {
        return report_order(x.filename().string(), y.filename().string());
    });

    std::vector<eval::EvalReport> reports;
    for (const auto& dir : dirs) {
        reports.push_back(eval::report_from_predictions_csv(dir.filename().string(),
                                                            io::read_text_file(dir / "predictions.csv")));
    }
    io::write_text_file(a.out / "comparison.csv", eval::comparison_csv(reports));

    auto cells = a.cells;
    if (cells.empty()) {
        for (const auto& [cell, trace] : reports.front().per_cell) {
            if (cells.size() == 3) break;
            cells.push_back(cell);
        }
    }
    io::write_text_file(a.out / "traces.csv", eval::traces_csv(cells, reports));

    fs::path grid = a.series;
    if (grid.empty()) {
        for (const auto& candidate : {a.workdir / kGridCache, a.workdir / "series.csv"}) {
            if (fs::is_regular_file(candidate)) {
                grid = candidate;
                break;
            }
        }
    }
    if (grid.empty()) {
        log::warn("report.no_heatmap", {{"reason", "no series file in the work dir"}});
    } else {
        io::write_text_file(a.out / "heatmap.csv", eval::grid_heatmap_csv(load_series(grid), a.grid_side));
    }
    log::info("report.done", {{"runs", reports.size()}, {"out", a.out.string()}});
}

void cmd_run(const RunConfig& c) {
    const fs::path work = c.workdir;
    fs::create_directories(work);
    const auto echo = to_text(c);
    io::write_text_file(work / "run_config.txt", echo);
    for (auto line : io::split(echo, '\n')) {
        if (!line.empty() && line.front() != '[') log::info("config", {{"entry", io::trim(line)}});
    }

    const auto series = work / "series.csv";
    if (c.input.empty()) {
        cmd_synth({c.synth, c.seed, series, work / "synth_labels.csv"});
    } else {
        cmd_ingest({c.input, series, c.selector, c.start_date, c.days, c.utc_offset, c.grid_side, c.central_block,
                    c.jobs});
    }

    const bool clustered = c.clustered != ClusteredMode::No;
    if (clustered) cmd_cluster({series, work / "cluster", c.k, c.training_days, c.profile_mode});

    std::vector<std::string> assignments;
    if (c.clustered != ClusteredMode::Yes) assignments.push_back("none");
    if (clustered) assignments.push_back((work / "cluster" / "assignment.csv").string());

    auto options = c.experiment;
    options.jobs = c.jobs;
    for (auto variant : c.variants) {
        for (const auto& assignment : assignments) {
            auto spec = c.model;
            spec.variant = variant;
            cmd_train({series, assignment, spec, c.trainer, options, work / "models"});
        }
    }
    cmd_evaluate({work / "models", series, "", work / "eval"});
    cmd_report({work / "eval", {}, work, c.trace_cells, c.grid_side, work / "report"});
}

// ---- argument parsing ---------------------------------------------------------

namespace {

log::Level parse_level(const std::string& name) {
    if (name == "debug") return log::Level::Debug;
    if (name == "info") return log::Level::Info;
    if (name == "warn") return log::Level::Warn;
    if (name == "error") return log::Level::Error;
    if (name == "off") return log::Level::Off;
    throw UsageError("--log-level must be debug, info, warn, error or off");
}

fs::path or_default(const std::string& value, const fs::path& fallback) {
    return value.empty() ? fallback : fs::path(value);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Cell traffic clustering and forecasting pipeline", "cellcast"};
    app.require_subcommand(1);

    const char* env_workdir = std::getenv("CELLCAST_WORKDIR");
    std::string workdir = env_workdir ? env_workdir : ".";
    std::string level = "info";
    unsigned jobs = 1;
    app.add_option("--workdir", workdir, "Default location of inputs and outputs (env CELLCAST_WORKDIR)");
    app.add_option("--log-level", level, "debug|info|warn|error|off");
    app.add_option("--jobs", jobs, "Worker threads for ingest and cluster training")->check(CLI::Range(1u, 256u));

    // ingest
    IngestArgs ingest_args;
    std::string ingest_selector = "internet", ingest_out;
    auto* ingest = app.add_subcommand("ingest", "Aggregate raw activity files into hourly series");
    ingest->add_option("--input", ingest_args.input, "Directory of tab-separated activity files")->required();
    ingest->add_option("--selector", ingest_selector, "internet|total");
    ingest->add_option("--start", ingest_args.start_date, "First local date, YYYY-MM-DD");
    ingest->add_option("--days", ingest_args.days, "Number of days");
    ingest->add_option("--out", ingest_out, "Series file (.csv or .bin)");
    ingest->add_option("--utc-offset", ingest_args.utc_offset, "Local time offset in hours");
    ingest->add_option("--grid-side", ingest_args.grid_side, "Grid width in cells");
    ingest->add_option("--central-block", ingest_args.central_block, "Central block side; 0 keeps all cells");

    // synth
    SynthArgs synth_args;
    std::string synth_regimes = "15:21", synth_out, synth_labels;
    auto* synth = app.add_subcommand("synth", "Generate synthetic daily-periodic traffic");
    synth->add_option("--cells", synth_args.settings.cells, "Number of cells");
    synth->add_option("--regimes", synth_regimes, "Peak hours, colon separated");
    synth->add_option("--days", synth_args.settings.days, "Number of days");
    synth->add_option("--seed", synth_args.seed, "Random seed");
    synth->add_option("--noise", synth_args.settings.noise, "Multiplicative log-noise sigma");
    synth->add_option("--noise-rho", synth_args.settings.noise_rho, "Hour-to-hour noise correlation");
    synth->add_option("--base", synth_args.settings.base, "Base level");
    synth->add_option("--amplitude", synth_args.settings.amplitude, "Daily peak amplitude");
    synth->add_option("--start-date", synth_args.settings.start_date, "First local date, YYYY-MM-DD");
    synth->add_option("--out", synth_out, "Series file");
    synth->add_option("--labels", synth_labels, "Generating regime per cell");

    // cluster
    ClusterArgs cluster_args;
    std::string cluster_series, cluster_out, cluster_profile = "raw";
    auto* clus = app.add_subcommand("cluster", "Group cells by peak hour and merge groups into k clusters");
    clus->add_option("--series", cluster_series, "Series file");
    clus->add_option("--k", cluster_args.k, "Number of clusters");
    clus->add_option("--days", cluster_args.days, "Training days used for profiling");
    clus->add_option("--profile", cluster_profile, "raw|folded group profiles");
    clus->add_option("--out", cluster_out, "Output directory");

    // train
    std::string train_series, train_assignment = "none", train_variant = "multi-tcn-lstm", train_config, train_out;
    std::optional<std::uint64_t> train_seed;
    auto* train = app.add_subcommand("train", "Train one model per cluster, or one global model");
    train->add_option("--series", train_series, "Series file");
    train->add_option("--assignment", train_assignment, "Assignment CSV or 'none'");
    train->add_option("--variant", train_variant, "multi-tcn-lstm|lstm|mlp");
    train->add_option("--config", train_config, "Model/trainer settings file");
    train->add_option("--seed", train_seed, "Seed for initialization and shuffling");
    train->add_option("--out", train_out, "Models directory");

    // evaluate
    std::string eval_models, eval_series, eval_assignment, eval_out;
    auto* evaluate = app.add_subcommand("evaluate", "Rolling one-step evaluation of trained runs");
    evaluate->add_option("--models", eval_models, "Run directory or directory of runs");
    evaluate->add_option("--series", eval_series, "Series file");
    evaluate->add_option("--assignment", eval_assignment, "Assignment CSV or 'none'; defaults to the run's copy");
    evaluate->add_option("--out", eval_out, "Evaluation directory");

    // report
    ReportArgs report_args;
    std::string report_eval, report_series, report_out;
    auto* report = app.add_subcommand("report", "Comparison table, traces and heatmap from evaluation outputs");
    report->add_option("--eval", report_eval, "Evaluation directory");
    report->add_option("--series", report_series, "Series for the heatmap");
    report->add_option("--cells", report_args.cells, "Cells to trace")->delimiter(',');
    report->add_option("--grid-side", report_args.grid_side, "Grid width in cells");
    report->add_option("--out", report_out, "Report directory");

    // run
    std::string run_config;
    auto* run = app.add_subcommand("run", "Full pipeline from a configuration file");
    run->add_option("--config", run_config, "Configuration file")->required();

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        } catch (const CLI::CallForAllHelp& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            std::cerr << error_line("usage", "usage", e.what()) << '\n';
            return 2;
        }
        log::set_level(parse_level(level));
        const fs::path work = workdir;

        if (ingest->parsed()) {
            ingest_args.selector = ingest::parse_selector(ingest_selector);
            ingest_args.out = or_default(ingest_out, work / "series.csv");
            ingest_args.jobs = jobs;
            cmd_ingest(ingest_args);
        } else if (synth->parsed()) {
            synth_args.settings.peak_hours = parse_peak_hours(synth_regimes);
            synth_args.out = or_default(synth_out, work / "series.csv");
            synth_args.labels = or_default(synth_labels, work / "synth_labels.csv");
            cmd_synth(synth_args);
        } else if (clus->parsed()) {
            cluster_args.series = or_default(cluster_series, work / "series.csv");
            cluster_args.out = or_default(cluster_out, work / "cluster");
            cluster_args.mode = parse_mode(cluster_profile);
            cmd_cluster(cluster_args);
        } else if (train->parsed()) {
            TrainArgs args;
            std::uint64_t seed = 0;
            if (!train_config.empty()) {
                const auto file = KeyValueFile::load(train_config);
                seed = static_cast<std::uint64_t>(file.get_int("run.seed", 0));
                args.spec.tcn.seed = seed;
                args.trainer.seed = seed;
                args.spec = model_spec_from(file, args.spec);
                args.trainer = trainer_config_from(file, args.trainer);
                args.experiment = experiment_options_from(file, args.experiment);
                // Whole-run configs may carry sections train does not use.
                for (const auto& key : file.unused_keys()) {
                    const auto section = key.substr(0, key.find('.'));
                    if (section == "model" || section == "baseline" || section == "trainer") {
                        throw UsageError("config: unknown key " + key);
                    }
                }
            }
            if (train_seed) {
                args.spec.tcn.seed = *train_seed;
                args.trainer.seed = *train_seed;
            }
            args.spec.tcn.validate();
            args.spec.variant = model::parse_variant(train_variant);
            args.series = or_default(train_series, work / "series.csv");
            args.assignment = train_assignment;
            args.experiment.jobs = jobs;
            args.out = or_default(train_out, work / "models");
            cmd_train(args);
        } else if (evaluate->parsed()) {
            EvaluateArgs args;
            args.models = or_default(eval_models, work / "models");
            args.series = or_default(eval_series, work / "series.csv");
            args.assignment = eval_assignment;
            args.out = or_default(eval_out, work / "eval");
            cmd_evaluate(args);
        } else if (report->parsed()) {
            report_args.eval = or_default(report_eval, work / "eval");
            report_args.series = report_series;
            report_args.workdir = work;
            report_args.out = or_default(report_out, work / "report");
            cmd_report(report_args);
        } else if (run->parsed()) {
            const auto file = KeyValueFile::load(run_config);
            auto config = run_config_from(file, true);
            if (!file.has("paths.workdir")) config.workdir = workdir;
            if (jobs > 1) config.jobs = jobs;
            config.validate();
            cmd_run(config);
        }
        return 0;
    } catch (const Error& e) {
        const char* category = e.category() == ErrorCategory::Usage  ? "usage"
                               : e.category() == ErrorCategory::Data ? "data"
                                                                     : "numeric";
        std::cerr << error_line(category, e.kind(), e.what()) << '\n';
        return exit_code(e.category());
    } catch (const fs::filesystem_error& e) {
        std::cerr << error_line("data", "io_error", e.what()) << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << error_line("data", "internal", e.what()) << '\n';
        return 3;
    }
}

}  // namespace cellcast::cli
