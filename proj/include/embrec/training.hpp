#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "embrec/dataset.hpp"
#include "embrec/model.hpp"

namespace embrec {

/// Error triple over one evaluation pass. rmse is always computed as
/// sqrt(mse), never accumulated separately.
struct Metrics {
    double mse = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
    std::size_t count = 0;
};

struct EpochReport {
    std::size_t epoch = 0;  // 1-based
    double train_mse = 0.0;
    Metrics test_metrics;
    double elapsed_seconds = 0.0;
};

/// One pass over the train set: shuffles with Rng(epoch_seed), walks
/// batches of config.batch_size (last batch may be short), and applies one
/// Adam step per batch on the mean of the batch's per-example gradients.
/// Returns the mean squared error of the epoch's predictions, each taken
/// before its batch's update.
double train_epoch(ModelParams& params, AdamState& state,
                   const std::vector<EncodedExample>& train_set, const ModelConfig& config,
                   std::uint64_t epoch_seed);

/// Metrics of predict_clamped over the examples. Empty list is an error.
Metrics evaluate(const ModelParams& params, const std::vector<EncodedExample>& examples);

/// Predicts the train-set mean rating for every test example.
Metrics baseline_global_mean(const std::vector<EncodedExample>& train,
                             const std::vector<EncodedExample>& test);

/// "epoch=<i> train_mse=<v> test_mse=<v> test_rmse=<v> test_mae=<v>",
/// values %.6f.
std::string format_epoch_line(const EpochReport& report);

struct FitResult {
    ModelParams params;
    Vocabs vocabs;
    std::vector<MovieMeta> movies;
    std::vector<EpochReport> reports;
    DatasetSummary summary;
    SplitProvenance provenance;
    std::size_t unknown_tag_rows = 0;
};

/// Full pipeline: parse -> vocabularies -> encode -> split -> init ->
/// config.epochs rounds of train_epoch, evaluating on the held-out split
/// after each. When `progress` is set, one epoch line (format_epoch_line)
/// is written per epoch. When `patience` is set, training halts after that
/// many consecutive epochs without a strictly better test RMSE.
FitResult fit(const std::string& ratings_path, const std::string& movies_path,
              const std::optional<std::string>& tags_path, const ModelConfig& config,
              std::optional<std::size_t> patience = std::nullopt,
              std::ostream* progress = nullptr);

}  // namespace embrec
