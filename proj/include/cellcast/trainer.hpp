#pragma once

// Windowing, normalization, the mini-batch training loop and the
// clustered/unclustered experiment driver.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cellcast/cluster.hpp"
#include "cellcast/eval.hpp"
#include "cellcast/ingest.hpp"
#include "cellcast/model.hpp"
#include "cellcast/nn/optim.hpp"

namespace cellcast::trainer {

using ingest::HourlyCellSeries;
using ingest::HourSpan;
using ingest::SeriesMap;

struct NormStats {
    std::string scope;  // cluster index or "global"
    double mean = 0.0;
    double std = 1.0;

    double normalize(double x) const { return (x - mean) / std; }
    double denormalize(double z) const { return z * std + mean; }
};

inline constexpr double kStdFloor = 1e-8;

/// Population mean/std of the given cells' values inside `train`.
/// Throws ValidationError for an empty scope.
NormStats fit_norm(const SeriesMap& cells, std::span<const std::int64_t> scope_cells, HourSpan train,
                   std::string scope);
/// Convenience overload over every cell in the map.
NormStats fit_norm(const SeriesMap& cells, HourSpan train, std::string scope = "global");

struct Sample {
    std::int64_t cell_id = 0;
    std::vector<double> input;   // `window` normalized hours
    std::vector<double> target;  // `horizon` normalized hours
    std::int64_t t0 = 0;         // absolute hour of target[0]
};

/// All windows lying entirely inside `split` (inputs and targets):
/// split length - window - horizon + 1 samples, none when the split is too
/// short (a warning is logged).
std::vector<Sample> make_windows(const HourlyCellSeries& series, std::size_t window, std::size_t horizon,
                                 HourSpan split, const NormStats& norm = {});

/// Windows whose targets lie inside `targets`; inputs are the true hours
/// right before each target and may precede the span.
std::vector<Sample> make_forecast_windows(const HourlyCellSeries& series, std::size_t window, std::size_t horizon,
                                          HourSpan targets, const NormStats& norm = {});

struct TrainerConfig {
    std::size_t epochs = 200;
    std::size_t batch_size = 64;
    double lr = 1e-3;
    std::size_t patience = 10;
    double clip_norm = 5.0;
    std::uint64_t seed = 0;
};

struct EpochLog {
    std::string model_id;
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_mape = 0.0;  // percent; NaN without validation data
};

struct TrainRun {
    std::string variant;
    std::string model_id;
    std::string scope;  // cluster index or "all"
    std::size_t epochs = 0;
    std::vector<double> train_loss;
    std::vector<double> val_mape;
    std::size_t best_epoch = 0;
    double best_val_mape = 0.0;
    std::uint64_t seed = 0;
    std::string stop_reason;
};

struct TrainingData {
    std::vector<Sample> train;
    std::vector<Sample> validation;
    NormStats norm;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// MSE on normalized values, seeded per-epoch shuffling, global-norm
/// clipping and Adam. Early stopping on validation MAPE (denormalized) with
/// the best-validation weights restored at the end. Throws NumericError
/// with diagnostics when the loss turns non-finite.
TrainRun train(model::Forecaster& model, const TrainingData& data, const TrainerConfig& config,
               const std::string& model_id = "model", const EpochCallback& on_epoch = {});

/// Validation MAPE (percent) of `model` over `samples`.
double validation_mape(model::Forecaster& model, const std::vector<Sample>& samples, const NormStats& norm);

struct ExperimentOptions {
    int train_days = 20;
    int eval_days = 10;
    int validation_days = 2;
    unsigned jobs = 1;
};

/// Absolute hour ranges of the protocol, anchored at the dataset's first
/// local midnight.
struct Splits {
    HourSpan train;       // all training days
    HourSpan fit;         // training days minus the validation tail
    HourSpan validation;  // last validation_days of training
    HourSpan evaluation;  // the eval_days after training
};

/// Checks that every series shares the first midnight and covers
/// train_days + eval_days complete days.
Splits make_splits(const SeriesMap& dataset, const ExperimentOptions& options = {});

struct TrainedModel {
    std::string model_id;
    int cluster = -1;  // -1: global model
    std::vector<std::int64_t> cells;
    NormStats norm;
    TrainRun run;
    std::unique_ptr<model::Forecaster> model;
};

struct Experiment {
    std::string run_name;  // variant, with "-C" when clustered
    model::ModelSpec spec;
    Splits splits;
    std::map<std::string, TrainedModel> models;  // by model id
};

std::string run_name(model::Variant variant, bool clustered);

/// One model per cluster (trained on all member cells) or one global model.
/// Cluster models are independent and may train on up to options.jobs
/// threads; results do not depend on the thread count.
Experiment run_experiment(const SeriesMap& dataset, const cluster::ClusterAssignment* assignment,
                          const model::ModelSpec& spec, const TrainerConfig& config,
                          const ExperimentOptions& options = {}, const EpochCallback& on_epoch = {});

/// Routes each cell to its cluster's model (or the global one) and returns
/// raw-unit one-step forecasts for eval::evaluate.
eval::PredictFn make_predictor(const std::map<int, std::pair<model::Forecaster*, NormStats>>& by_cluster,
                               const std::map<std::int64_t, int>* cell_to_cluster);

eval::EvalReport evaluate_experiment(Experiment& experiment, const SeriesMap& dataset,
                                     const cluster::ClusterAssignment* assignment);

}  // namespace cellcast::trainer
