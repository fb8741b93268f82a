#include "cellcast/cli/config.hpp"

#include <algorithm>

#include "cellcast/error.hpp"
#include "cellcast/io.hpp"

namespace cellcast::cli {

KeyValueFile KeyValueFile::parse(std::string_view text) {
    KeyValueFile file;
    std::string section;
    std::size_t line_number = 0;
    for (auto raw : io::split(text, '\n')) {
        ++line_number;
        const auto line = io::trim(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw UsageError("config line " + std::to_string(line_number) + ": bad section");
            section = std::string(io::trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw UsageError("config line " + std::to_string(line_number) + ": expected key = value");
        }
        const auto key = std::string(io::trim(line.substr(0, eq)));
        if (key.empty()) throw UsageError("config line " + std::to_string(line_number) + ": empty key");
        const auto full = section.empty() ? key : section + "." + key;
        if (!file.values_.emplace(full, std::string(io::trim(line.substr(eq + 1)))).second) {
            throw UsageError("config line " + std::to_string(line_number) + ": duplicate key " + full);
        }
    }
    return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw MissingInputError("config file not found: " + path.string());
    return parse(io::read_text_file(path));
}

std::optional<std::string> KeyValueFile::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    used_.insert(key);
    return it->second;
}

std::string KeyValueFile::get_or(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

std::int64_t KeyValueFile::get_int(const std::string& key, std::int64_t fallback) const {
    const auto text = get(key);
    if (!text) return fallback;
    const auto value = io::parse_int(*text);
    if (!value) throw UsageError("config: " + key + " must be an integer");
    return *value;
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
    const auto text = get(key);
    if (!text) return fallback;
    const auto value = io::parse_double(*text);
    if (!value) throw UsageError("config: " + key + " must be a number");
    return *value;
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
    const auto text = get(key);
    if (!text) return fallback;
    if (*text == "true" || *text == "yes" || *text == "1") return true;
    if (*text == "false" || *text == "no" || *text == "0") return false;
    throw UsageError("config: " + key + " must be true or false");
}

std::vector<std::size_t> KeyValueFile::get_sizes(const std::string& key, const std::vector<std::size_t>& fallback) const {
    const auto text = get(key);
    if (!text) return fallback;
    return parse_size_list(*text);
}

std::vector<std::string> KeyValueFile::unused_keys() const {
    std::vector<std::string> keys;
    for (const auto& [key, value] : values_)
        if (!used_.count(key)) keys.push_back(key);
    return keys;
}

std::string render_key_values(const std::vector<std::pair<std::string, std::string>>& entries) {
    std::string out;
    std::string current;
    for (const auto& [full, value] : entries) {
        const auto dot = full.rfind('.');
        const std::string section = dot == std::string::npos ? "" : full.substr(0, dot);
        const std::string key = dot == std::string::npos ? full : full.substr(dot + 1);
        if (section != current || out.empty()) {
            if (!out.empty()) out += '\n';
            if (!section.empty()) out += "[" + section + "]\n";
            current = section;
        }
        out += key + " = " + value + '\n';
    }
    return out;
}

std::vector<std::size_t> parse_size_list(std::string_view text) {
    std::vector<std::size_t> out;
    text = io::trim(text);
    if (text.empty()) return out;
    for (auto part : io::split(text, ',')) {
        const auto v = io::parse_int(part);
        if (!v || *v < 0) throw UsageError("expected a comma-separated list of non-negative integers");
        out.push_back(static_cast<std::size_t>(*v));
    }
    return out;
}

std::string format_size_list(const std::vector<std::size_t>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(values[i]);
    }
    return out;
}

std::vector<int> parse_peak_hours(std::string_view text) {
    std::vector<int> hours;
    for (auto part : io::split(io::trim(text), ':')) {
        const auto v = io::parse_int(part);
        if (!v || *v < 0 || *v > 23) throw UsageError("regimes: expected peak hours like 15:21");
        hours.push_back(static_cast<int>(*v));
    }
    return hours;
}

ingest::SyntheticSpec to_synthetic_spec(const SynthSettings& s, std::uint64_t seed) {
    ingest::SyntheticSpec spec;
    spec.n_cells = s.cells;
    spec.n_days = s.days;
    spec.seed = seed;
    spec.noise_rho = s.noise_rho;
    spec.start_day = ingest::local_day_start_hour(s.start_date) / ingest::kHoursPerDay;
    if (s.peak_hours.empty()) throw UsageError("synthetic: at least one regime required");
    const double fraction = 1.0 / static_cast<double>(s.peak_hours.size());
    for (int peak : s.peak_hours) spec.regimes.push_back({peak, s.base, s.amplitude, s.noise, fraction});
    // Equal fractions may not sum to exactly 1 in binary; fix the last one up.
    double rest = 1.0;
    for (std::size_t i = 0; i + 1 < spec.regimes.size(); ++i) rest -= spec.regimes[i].cell_fraction;
    spec.regimes.back().cell_fraction = rest;
    ingest::validate(spec);
    return spec;
}

// ---- RunConfig ------------------------------------------------------------------

namespace {

std::string variants_text(const std::vector<model::Variant>& variants) {
    std::string out;
    for (std::size_t i = 0; i < variants.size(); ++i) {
        if (i) out += ',';
        out += model::to_string(variants[i]);
    }
    return out;
}

std::string hours_text(const std::vector<int>& hours) {
    std::string out;
    for (std::size_t i = 0; i < hours.size(); ++i) {
        if (i) out += ':';
        out += std::to_string(hours[i]);
    }
    return out;
}

std::string clustered_text(ClusteredMode mode) {
    switch (mode) {
        case ClusteredMode::No: return "no";
        case ClusteredMode::Yes: return "yes";
        case ClusteredMode::Both: return "both";
    }
    return "both";
}

}  // namespace

void RunConfig::validate() const {
    if (!input.empty() && std::filesystem::weakly_canonical(input) == std::filesystem::weakly_canonical(workdir)) {
        throw UsageError("config: input and workdir must differ");
    }
    if (k < 1) throw UsageError("config: k must be >= 1");
    if (days < experiment.train_days + experiment.eval_days) {
        throw UsageError("config: ingest days shorter than train_days + eval_days");
    }
    if (variants.empty()) throw UsageError("config: no variants");
    model.tcn.validate();
}

model::ModelSpec model_spec_from(const KeyValueFile& f, model::ModelSpec base) {
    auto& t = base.tcn;
    t.channels = f.get_sizes("model.channels", t.channels);
    t.kernel = static_cast<std::size_t>(f.get_int("model.kernel", static_cast<std::int64_t>(t.kernel)));
    t.dilations = f.get_sizes("model.dilations", t.dilations);
    t.lstm_hidden = f.get_sizes("model.lstm_hidden", t.lstm_hidden);
    t.window = static_cast<std::size_t>(f.get_int("model.window", static_cast<std::int64_t>(t.window)));
    t.horizon = static_cast<std::size_t>(f.get_int("model.horizon", static_cast<std::int64_t>(t.horizon)));
    t.seed = static_cast<std::uint64_t>(f.get_int("model.seed", static_cast<std::int64_t>(t.seed)));
    base.baseline.lstm_hidden = static_cast<std::size_t>(
        f.get_int("baseline.lstm_hidden", static_cast<std::int64_t>(base.baseline.lstm_hidden)));
    base.baseline.mlp_widths = f.get_sizes("baseline.mlp_widths", base.baseline.mlp_widths);
    if (const auto v = f.get("model.variant")) base.variant = model::parse_variant(*v);
    return base;
}

trainer::TrainerConfig trainer_config_from(const KeyValueFile& f, trainer::TrainerConfig t) {
    t.epochs = static_cast<std::size_t>(f.get_int("trainer.epochs", static_cast<std::int64_t>(t.epochs)));
    t.batch_size = static_cast<std::size_t>(f.get_int("trainer.batch_size", static_cast<std::int64_t>(t.batch_size)));
    t.lr = f.get_double("trainer.lr", t.lr);
    t.patience = static_cast<std::size_t>(f.get_int("trainer.patience", static_cast<std::int64_t>(t.patience)));
    t.clip_norm = f.get_double("trainer.clip_norm", t.clip_norm);
    t.seed = static_cast<std::uint64_t>(f.get_int("trainer.seed", static_cast<std::int64_t>(t.seed)));
    return t;
}

trainer::ExperimentOptions experiment_options_from(const KeyValueFile& f, trainer::ExperimentOptions e) {
    e.train_days = static_cast<int>(f.get_int("trainer.train_days", e.train_days));
    e.eval_days = static_cast<int>(f.get_int("trainer.eval_days", e.eval_days));
    e.validation_days = static_cast<int>(f.get_int("trainer.validation_days", e.validation_days));
    return e;
}

std::vector<std::pair<std::string, std::string>> model_entries(const model::ModelSpec& spec) {
    const auto& t = spec.tcn;
    return {
        {"model.channels", format_size_list(t.channels)},
        {"model.kernel", std::to_string(t.kernel)},
        {"model.dilations", format_size_list(t.dilations)},
        {"model.lstm_hidden", format_size_list(t.lstm_hidden)},
        {"model.window", std::to_string(t.window)},
        {"model.horizon", std::to_string(t.horizon)},
        {"model.seed", std::to_string(t.seed)},
        {"baseline.lstm_hidden", std::to_string(spec.baseline.lstm_hidden)},
        {"baseline.mlp_widths", format_size_list(spec.baseline.mlp_widths)},
    };
}

std::vector<std::pair<std::string, std::string>> trainer_entries(const trainer::TrainerConfig& t,
                                                                 const trainer::ExperimentOptions& e) {
    return {
        {"trainer.epochs", std::to_string(t.epochs)},
        {"trainer.batch_size", std::to_string(t.batch_size)},
        {"trainer.lr", io::format_double(t.lr)},
        {"trainer.patience", std::to_string(t.patience)},
        {"trainer.clip_norm", io::format_double(t.clip_norm)},
        {"trainer.seed", std::to_string(t.seed)},
        {"trainer.train_days", std::to_string(e.train_days)},
        {"trainer.eval_days", std::to_string(e.eval_days)},
        {"trainer.validation_days", std::to_string(e.validation_days)},
    };
}

RunConfig run_config_from(const KeyValueFile& f, bool require_seed) {
    RunConfig c;
    if (require_seed && !f.has("run.seed")) throw UsageError("config: [run] seed is required");
    c.seed = static_cast<std::uint64_t>(f.get_int("run.seed", 0));
    // The run seed drives every stochastic stage unless a section overrides it.
    c.model.tcn.seed = c.seed;
    c.trainer.seed = c.seed;

    c.input = f.get_or("paths.input", c.input);
    c.workdir = f.get_or("paths.workdir", c.workdir);

    c.selector = ingest::parse_selector(f.get_or("ingest.selector", std::string(ingest::to_string(c.selector))));
    c.start_date = f.get_or("ingest.start", c.start_date);
    c.days = static_cast<int>(f.get_int("ingest.days", c.days));
    c.utc_offset = static_cast<int>(f.get_int("ingest.utc_offset", c.utc_offset));
    c.grid_side = f.get_int("ingest.grid_side", c.grid_side);
    c.central_block = f.get_int("ingest.central_block", c.central_block);

    c.synth.cells = static_cast<int>(f.get_int("synth.cells", c.synth.cells));
    if (const auto v = f.get("synth.regimes")) c.synth.peak_hours = parse_peak_hours(*v);
    c.synth.days = static_cast<int>(f.get_int("synth.days", c.synth.days));
    c.synth.noise = f.get_double("synth.noise", c.synth.noise);
    c.synth.noise_rho = f.get_double("synth.noise_rho", c.synth.noise_rho);
    c.synth.base = f.get_double("synth.base", c.synth.base);
    c.synth.amplitude = f.get_double("synth.amplitude", c.synth.amplitude);
    c.synth.start_date = f.get_or("synth.start", c.synth.start_date);

    c.k = static_cast<int>(f.get_int("cluster.k", c.k));
    c.training_days = static_cast<int>(f.get_int("cluster.training_days", c.training_days));
    const auto mode = f.get_or("cluster.profile", "raw");
    if (mode == "raw") {
        c.profile_mode = profile::ProfileMode::RawHours;
    } else if (mode == "folded") {
        c.profile_mode = profile::ProfileMode::FoldedDay;
    } else {
        throw UsageError("config: cluster.profile must be raw or folded");
    }

    c.model = model_spec_from(f, c.model);
    c.trainer = trainer_config_from(f, c.trainer);
    c.experiment = experiment_options_from(f, c.experiment);

    if (const auto v = f.get("run.variants")) {
        c.variants.clear();
        for (auto part : io::split(*v, ',')) c.variants.push_back(model::parse_variant(io::trim(part)));
    }
    const auto clustered = f.get_or("run.clustered", "both");
    if (clustered == "no") {
        c.clustered = ClusteredMode::No;
    } else if (clustered == "yes") {
        c.clustered = ClusteredMode::Yes;
    } else if (clustered == "both") {
        c.clustered = ClusteredMode::Both;
    } else {
        throw UsageError("config: run.clustered must be no, yes or both");
    }
    c.jobs = static_cast<unsigned>(std::max<std::int64_t>(1, f.get_int("run.jobs", c.jobs)));
    if (const auto v = f.get("run.trace_cells")) {
        for (auto s : parse_size_list(*v)) c.trace_cells.push_back(static_cast<std::int64_t>(s));
    }

    if (const auto unused = f.unused_keys(); !unused.empty()) throw UsageError("config: unknown key " + unused.front());
    c.validate();
    return c;
}

std::string to_text(const RunConfig& c) {
    std::vector<std::pair<std::string, std::string>> e{
        {"paths.input", c.input},
        {"paths.workdir", c.workdir},
        {"ingest.selector", std::string(ingest::to_string(c.selector))},
        {"ingest.start", c.start_date},
        {"ingest.days", std::to_string(c.days)},
        {"ingest.utc_offset", std::to_string(c.utc_offset)},
        {"ingest.grid_side", std::to_string(c.grid_side)},
        {"ingest.central_block", std::to_string(c.central_block)},
        {"synth.cells", std::to_string(c.synth.cells)},
        {"synth.regimes", hours_text(c.synth.peak_hours)},
        {"synth.days", std::to_string(c.synth.days)},
        {"synth.noise", io::format_double(c.synth.noise)},
        {"synth.noise_rho", io::format_double(c.synth.noise_rho)},
        {"synth.base", io::format_double(c.synth.base)},
        {"synth.amplitude", io::format_double(c.synth.amplitude)},
        {"synth.start", c.synth.start_date},
        {"cluster.k", std::to_string(c.k)},
        {"cluster.training_days", std::to_string(c.training_days)},
        {"cluster.profile", c.profile_mode == profile::ProfileMode::RawHours ? "raw" : "folded"},
    };
    for (auto& entry : model_entries(c.model)) e.push_back(std::move(entry));
    for (auto& entry : trainer_entries(c.trainer, c.experiment)) e.push_back(std::move(entry));
    std::string trace;
    for (std::size_t i = 0; i < c.trace_cells.size(); ++i) trace += (i ? "," : "") + std::to_string(c.trace_cells[i]);
    e.push_back({"run.variants", variants_text(c.variants)});
    e.push_back({"run.clustered", clustered_text(c.clustered)});
    e.push_back({"run.seed", std::to_string(c.seed)});
    e.push_back({"run.jobs", std::to_string(c.jobs)});
    e.push_back({"run.trace_cells", trace});
    return render_key_values(e);
}

}  // namespace cellcast::cli
