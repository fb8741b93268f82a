#include "cellcast/trainer.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <numeric>

#include "cellcast/error.hpp"
#include "cellcast/log.hpp"
#include "cellcast/profile.hpp"

namespace cellcast::trainer {

// ---- normalization -------------------------------------------------------------

NormStats fit_norm(const SeriesMap& cells, std::span<const std::int64_t> scope_cells, HourSpan train,
                   std::string scope) {
    double sum = 0.0;
    std::size_t count = 0;
    auto for_each_value = [&](auto&& fn) {
        for (auto cell : scope_cells) {
            const auto it = cells.find(cell);
            if (it == cells.end()) throw ValidationError("fit_norm: unknown cell " + std::to_string(cell));
            const auto& s = it->second;
            const auto begin = std::max(train.start_hour, s.start_hour);
            const auto end = std::min(train.end_hour, s.end_hour());
            for (auto t = begin; t < end; ++t) fn(s.values[static_cast<std::size_t>(t - s.start_hour)]);
        }
    };
    for_each_value([&](double v) {
        sum += v;
        ++count;
    });
    if (count == 0) throw ValidationError("fit_norm: empty scope '" + scope + "'");
    const double mean = sum / static_cast<double>(count);
    double sq = 0.0;
    for_each_value([&](double v) { sq += (v - mean) * (v - mean); });
    const double std = std::sqrt(sq / static_cast<double>(count));
    return {std::move(scope), mean, std::max(std, kStdFloor)};
}

NormStats fit_norm(const SeriesMap& cells, HourSpan train, std::string scope) {
    std::vector<std::int64_t> ids;
    for (const auto& [cell, s] : cells) ids.push_back(cell);
    return fit_norm(cells, ids, train, std::move(scope));
}

// ---- windows -------------------------------------------------------------------

namespace {

Sample sample_at(const HourlyCellSeries& series, std::size_t window, std::size_t horizon, std::int64_t t0,
                 const NormStats& norm) {
    Sample s;
    s.cell_id = series.cell_id;
    s.t0 = t0;
    const auto first = static_cast<std::size_t>(t0 - static_cast<std::int64_t>(window) - series.start_hour);
    s.input.reserve(window);
    for (std::size_t i = 0; i < window; ++i) s.input.push_back(norm.normalize(series.values[first + i]));
    s.target.reserve(horizon);
    for (std::size_t i = 0; i < horizon; ++i) s.target.push_back(norm.normalize(series.values[first + window + i]));
    return s;
}

}  // namespace

std::vector<Sample> make_windows(const HourlyCellSeries& series, std::size_t window, std::size_t horizon,
                                 HourSpan split, const NormStats& norm) {
    if (split.start_hour < series.start_hour || split.end_hour > series.end_hour()) {
        throw ValidationError("make_windows: split outside series of cell " + std::to_string(series.cell_id));
    }
    const auto needed = static_cast<std::int64_t>(window + horizon);
    if (split.length() < needed) {
        log::warn("make_windows.short_split", {{"cell", series.cell_id}, {"length", split.length()}, {"needed", needed}});
        return {};
    }
    std::vector<Sample> samples;
    samples.reserve(static_cast<std::size_t>(split.length() - needed + 1));
    for (auto t0 = split.start_hour + static_cast<std::int64_t>(window);
         t0 + static_cast<std::int64_t>(horizon) <= split.end_hour; ++t0) {
        samples.push_back(sample_at(series, window, horizon, t0, norm));
    }
    return samples;
}

std::vector<Sample> make_forecast_windows(const HourlyCellSeries& series, std::size_t window, std::size_t horizon,
                                          HourSpan targets, const NormStats& norm) {
    const auto w = static_cast<std::int64_t>(window);
    if (targets.start_hour - w < series.start_hour || targets.end_hour > series.end_hour()) {
        throw ValidationError("make_forecast_windows: history or targets outside series of cell " +
                              std::to_string(series.cell_id));
    }
    std::vector<Sample> samples;
    for (auto t0 = targets.start_hour; t0 + static_cast<std::int64_t>(horizon) <= targets.end_hour; ++t0) {
        samples.push_back(sample_at(series, window, horizon, t0, norm));
    }
    return samples;
}

// ---- training ---------------------------------------------------------------------

namespace {

nn::NdArray as_window(const std::vector<double>& input) { return nn::NdArray({input.size(), 1}, input); }

std::string parameter_norms(model::Forecaster& model) {
    std::string out;
    for (const auto* p : model.parameters()) {
        double sq = 0.0;
        for (double v : p->value.data()) sq += v * v;
        if (!out.empty()) out += ';';
        out += p->name + ':' + io::format_double(std::sqrt(sq));
    }
    return out;
}

}  // namespace

double validation_mape(model::Forecaster& model, const std::vector<Sample>& samples, const NormStats& norm) {
    eval::MetricAccumulator acc;
    for (const auto& s : samples) {
        const auto out = model.forward(as_window(s.input));
        for (std::size_t i = 0; i < s.target.size(); ++i) acc.add(norm.denormalize(s.target[i]), norm.denormalize(out[i]));
    }
    return acc.retained ? acc.mape_percent() : std::numeric_limits<double>::quiet_NaN();
}

TrainRun train(model::Forecaster& model, const TrainingData& data, const TrainerConfig& config,
               const std::string& model_id, const EpochCallback& on_epoch) {
    if (data.train.empty()) throw ValidationError("train: no training samples for " + model_id);
    if (config.batch_size == 0) throw UsageError("train: batch_size must be >= 1");

    TrainRun run;
    run.variant = std::string(model::to_string(model.variant()));
    run.model_id = model_id;
    run.seed = config.seed;
    run.best_val_mape = std::numeric_limits<double>::quiet_NaN();
    run.stop_reason = "max_epochs";

    const auto params = model.parameters();
    auto adam = nn::make_adam_state(params, {.lr = config.lr});
    Rng rng(config.seed);
    std::vector<std::size_t> order(data.train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::vector<nn::NdArray> best_weights;
    std::size_t since_best = 0;
    const bool early_stopping = !data.validation.empty();

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const double scale = 1.0 / static_cast<double>(end - start);
            nn::zero_grads(params);
            double batch_loss = 0.0;
            try {
                for (std::size_t b = start; b < end; ++b) {
                    const Sample& s = data.train[order[b]];
                    const auto out = model.forward(as_window(s.input));
                    nn::NdArray grad({s.target.size()});
                    double loss = 0.0;
                    const double inv_h = 1.0 / static_cast<double>(s.target.size());
                    for (std::size_t i = 0; i < s.target.size(); ++i) {
                        const double diff = out[i] - s.target[i];
                        loss += diff * diff * inv_h;
                        grad[i] = 2.0 * diff * inv_h * scale;
                    }
                    batch_loss += loss;
                    model.backward(grad);
                }
                if (!std::isfinite(batch_loss)) throw NumericError("non-finite loss");
                nn::clip_grad_norm(params, config.clip_norm);
                nn::adam_step(adam, params);
            } catch (const NumericError& e) {
                log::error("train.non_finite", {{"model", model_id},
                                                {"epoch", epoch},
                                                {"batch", batch_index},
                                                {"detail", std::string(e.what())},
                                                {"param_norms", parameter_norms(model)}});
                throw NumericError("training " + model_id + " diverged at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(batch_index) + ": " + e.what());
            }
            epoch_loss += batch_loss;
        }
        epoch_loss /= static_cast<double>(order.size());

        const double val = early_stopping ? validation_mape(model, data.validation, data.norm)
                                          : std::numeric_limits<double>::quiet_NaN();
        run.train_loss.push_back(epoch_loss);
        run.val_mape.push_back(val);
        run.epochs = epoch;
        if (on_epoch) on_epoch({model_id, epoch, epoch_loss, val});

        if (!early_stopping || std::isnan(val)) continue;
        if (best_weights.empty() || val < run.best_val_mape) {
            run.best_val_mape = val;
            run.best_epoch = epoch;
            best_weights.clear();
            for (const auto* p : params) best_weights.push_back(p->value);
            since_best = 0;
        } else if (++since_best >= config.patience) {
            run.stop_reason = "early_stop";
            break;
        }
    }

    if (!best_weights.empty()) {
        for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_weights[i];
    } else {
        run.best_epoch = run.epochs;
    }
    return run;
}

// ---- experiment --------------------------------------------------------------------

Splits make_splits(const SeriesMap& dataset, const ExperimentOptions& options) {
    if (dataset.empty()) throw ValidationError("dataset is empty");
    if (options.validation_days < 0 || options.validation_days >= options.train_days || options.eval_days < 1) {
        throw UsageError("invalid split configuration");
    }
    const auto& first = dataset.begin()->second;
    const std::int64_t s = first.start_hour + profile::first_day_offset(first);
    const int needed = options.train_days + options.eval_days;
    for (const auto& [cell, series] : dataset) {
        if (series.start_hour + profile::first_day_offset(series) != s) {
            throw ValidationError("cell " + std::to_string(cell) + " starts on a different day");
        }
        if (profile::complete_days(series) < needed) {
            throw ValidationError("cell " + std::to_string(cell) + " covers fewer than " + std::to_string(needed) +
                                  " complete days");
        }
    }
    constexpr std::int64_t D = ingest::kHoursPerDay;
    const std::int64_t train_end = s + options.train_days * D;
    const std::int64_t fit_end = train_end - options.validation_days * D;
    return {{s, train_end}, {s, fit_end}, {fit_end, train_end}, {train_end, train_end + options.eval_days * D}};
}

std::string run_name(model::Variant variant, bool clustered) {
    return std::string(model::to_string(variant)) + (clustered ? "-C" : "");
}

namespace {

void train_one(TrainedModel& tm, const SeriesMap& dataset, const Splits& splits, const model::ModelSpec& spec,
               const TrainerConfig& config, const EpochCallback& on_epoch) {
    const std::size_t window = spec.tcn.window;
    const std::size_t horizon = spec.tcn.horizon;
    TrainingData data;
    data.norm = tm.norm;
    for (auto cell : tm.cells) {
        const auto& series = dataset.at(cell);
        auto fit = make_windows(series, window, horizon, splits.fit, tm.norm);
        data.train.insert(data.train.end(), std::make_move_iterator(fit.begin()), std::make_move_iterator(fit.end()));
        if (splits.validation.length() > 0) {
            auto val = make_forecast_windows(series, window, horizon, splits.validation, tm.norm);
            data.validation.insert(data.validation.end(), std::make_move_iterator(val.begin()),
                                   std::make_move_iterator(val.end()));
        }
    }
    tm.model = model::build_model(spec);
    tm.run = train(*tm.model, data, config, tm.model_id, on_epoch);
    tm.run.scope = tm.cluster < 0 ? "all" : std::to_string(tm.cluster);
}

}  // namespace

Experiment run_experiment(const SeriesMap& dataset, const cluster::ClusterAssignment* assignment,
                          const model::ModelSpec& spec, const TrainerConfig& config, const ExperimentOptions& options,
                          const EpochCallback& on_epoch) {
    Experiment ex;
    ex.spec = spec;
    ex.splits = make_splits(dataset, options);
    ex.run_name = run_name(spec.variant, assignment != nullptr);
    const std::string variant(model::to_string(spec.variant));

    std::vector<TrainedModel> jobs;
    if (assignment) {
        std::vector<std::vector<std::int64_t>> members(static_cast<std::size_t>(assignment->k));
        for (const auto& [cell, series] : dataset) {
            const auto it = assignment->cell_to_cluster.find(cell);
            if (it == assignment->cell_to_cluster.end()) {
                throw ValidationError("cell " + std::to_string(cell) + " missing from the cluster assignment");
            }
            if (it->second < 0 || it->second >= assignment->k) throw ValidationError("cluster index out of range");
            members[static_cast<std::size_t>(it->second)].push_back(cell);
        }
        for (int c = 0; c < assignment->k; ++c) {
            auto& cells = members[static_cast<std::size_t>(c)];
            if (cells.empty()) throw ValidationError("cluster " + std::to_string(c) + " has no cells in the dataset");
            TrainedModel tm;
            tm.model_id = variant + "-c" + std::to_string(c);
            tm.cluster = c;
            tm.cells = cells;
            tm.norm = fit_norm(dataset, cells, ex.splits.train, std::to_string(c));
            jobs.push_back(std::move(tm));
        }
    } else {
        TrainedModel tm;
        tm.model_id = variant + "-all";
        for (const auto& [cell, series] : dataset) tm.cells.push_back(cell);
        tm.norm = fit_norm(dataset, tm.cells, ex.splits.train, "global");
        jobs.push_back(std::move(tm));
    }

    const unsigned parallel = std::max(1u, options.jobs);
    for (std::size_t start = 0; start < jobs.size(); start += parallel) {
        const std::size_t end = std::min(jobs.size(), start + parallel);
        if (parallel == 1) {
            train_one(jobs[start], dataset, ex.splits, spec, config, on_epoch);
            continue;
        }
        std::vector<std::future<void>> running;
        for (std::size_t j = start; j < end; ++j) {
            running.push_back(std::async(std::launch::async, [&, j] {
                train_one(jobs[j], dataset, ex.splits, spec, config, on_epoch);
            }));
        }
        for (auto& f : running) f.get();
    }
    for (auto& tm : jobs) {
        auto id = tm.model_id;
        ex.models.emplace(std::move(id), std::move(tm));
    }
    return ex;
}

eval::PredictFn make_predictor(const std::map<int, std::pair<model::Forecaster*, NormStats>>& by_cluster,
                               const std::map<std::int64_t, int>* cell_to_cluster) {
    return [&by_cluster, cell_to_cluster](std::int64_t cell, std::span<const double> history) {
        int key = -1;
        if (cell_to_cluster) {
            const auto it = cell_to_cluster->find(cell);
            if (it == cell_to_cluster->end()) throw ValidationError("cell " + std::to_string(cell) + " is not routed");
            key = it->second;
        }
        const auto route = by_cluster.find(key);
        if (route == by_cluster.end()) {
            throw ValidationError("no model for cell " + std::to_string(cell));
        }
        auto& [model, norm] = route->second;
        nn::NdArray window({history.size(), 1});
        for (std::size_t i = 0; i < history.size(); ++i) window[i] = norm.normalize(history[i]);
        return norm.denormalize(model->forward(window)[0]);
    };
}

eval::EvalReport evaluate_experiment(Experiment& experiment, const SeriesMap& dataset,
                                     const cluster::ClusterAssignment* assignment) {
    std::map<int, std::pair<model::Forecaster*, NormStats>> routes;
    for (auto& [id, tm] : experiment.models) routes.emplace(tm.cluster, std::make_pair(tm.model.get(), tm.norm));
    const auto predict = make_predictor(routes, assignment ? &assignment->cell_to_cluster : nullptr);
    return eval::evaluate(experiment.run_name, predict, dataset, experiment.splits.evaluation, experiment.spec.tcn.window);
}

}  // namespace cellcast::trainer
