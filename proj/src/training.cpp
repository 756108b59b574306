#include "embrec/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "embrec/errors.hpp"
#include "embrec/rng.hpp"

namespace embrec {

namespace {

Metrics metrics_from_sums(double sq_sum, double abs_sum, std::size_t count) {
    Metrics m;
    m.count = count;
    m.mse = sq_sum / static_cast<double>(count);
    m.mae = abs_sum / static_cast<double>(count);
    m.rmse = std::sqrt(m.mse);
    return m;
}

}  // namespace

double train_epoch(ModelParams& params, AdamState& state,
                   const std::vector<EncodedExample>& train_set, const ModelConfig& config,
                   std::uint64_t epoch_seed) {
    if (train_set.empty()) {
        throw ArgumentError("train_epoch: train set is empty");
    }

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(epoch_seed);
    rng.shuffle(order);

    Gradients grads = zeros_like(params);
    ForwardCache cache;
    double sq_sum = 0.0;
    const std::size_t n = train_set.size();
    for (std::size_t begin = 0; begin < n; begin += config.batch_size) {
        const std::size_t end = std::min(begin + config.batch_size, n);
        const double scale = 1.0 / static_cast<double>(end - begin);
        zero(grads);
        for (std::size_t i = begin; i < end; ++i) {
            const EncodedExample& x = train_set[order[i]];
            const double pred = forward(params, x, cache);
            const double d = pred - x.target;
            sq_sum += d * d;
            accumulate_gradients(params, x, cache, x.target, scale, grads);
        }
        adam_step(params, grads, state);
    }
    return sq_sum / static_cast<double>(n);
}

Metrics evaluate(const ModelParams& params, const std::vector<EncodedExample>& examples) {
    if (examples.empty()) {
        throw ArgumentError("evaluate: example list is empty");
    }
    double sq_sum = 0.0;
    double abs_sum = 0.0;
    for (const auto& x : examples) {
        const double d = predict_clamped(params, x) - x.target;
        sq_sum += d * d;
        abs_sum += std::abs(d);
    }
    return metrics_from_sums(sq_sum, abs_sum, examples.size());
}

Metrics baseline_global_mean(const std::vector<EncodedExample>& train,
                             const std::vector<EncodedExample>& test) {
    if (train.empty() || test.empty()) {
        throw ArgumentError("baseline_global_mean: train and test must be non-empty");
    }
    double target_sum = 0.0;
    for (const auto& x : train) target_sum += x.target;
    const double mean = target_sum / static_cast<double>(train.size());

    double sq_sum = 0.0;
    double abs_sum = 0.0;
    for (const auto& x : test) {
        const double d = mean - x.target;
        sq_sum += d * d;
        abs_sum += std::abs(d);
    }
    return metrics_from_sums(sq_sum, abs_sum, test.size());
}

std::string format_epoch_line(const EpochReport& report) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "epoch=%zu train_mse=%.6f test_mse=%.6f test_rmse=%.6f test_mae=%.6f",
                  report.epoch, report.train_mse, report.test_metrics.mse,
                  report.test_metrics.rmse, report.test_metrics.mae);
    return std::string(buf);
}

FitResult fit(const std::string& ratings_path, const std::string& movies_path,
              const std::optional<std::string>& tags_path, const ModelConfig& config,
              std::optional<std::size_t> patience, std::ostream* progress) {
    validate(config);

    const auto ratings = parse_ratings(ratings_path);
    auto movies_result = parse_movies(movies_path, tags_path);

    FitResult result;
    result.summary = dataset_summary(ratings, movies_result.movies);
    result.unknown_tag_rows = movies_result.unknown_tag_rows;
    result.vocabs = build_vocabs(ratings, movies_result.movies);

    const auto examples = encode_all(ratings, movies_result.movies, result.vocabs);
    const DatasetSplit dsplit = split(examples, config.test_frac, config.seed);
    result.provenance =
        SplitProvenance{config.seed, config.test_frac, dsplit.source_count};

    result.params = init(vocab_sizes(result.vocabs), config, config.seed);
    AdamState state = make_adam_state(result.params);

    if (config.epochs > 0 && dsplit.test.empty()) {
        throw ArgumentError("fit: test split is empty; raise test_frac or add data");
    }

    double best_rmse = std::numeric_limits<double>::infinity();
    std::size_t stale_epochs = 0;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        const double train_mse =
            train_epoch(result.params, state, dsplit.train, config,
                        config.seed ^ static_cast<std::uint64_t>(epoch));
        EpochReport report;
        report.epoch = epoch;
        report.train_mse = train_mse;
        report.test_metrics = evaluate(result.params, dsplit.test);
        report.elapsed_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        if (progress) {
            *progress << format_epoch_line(report) << '\n' << std::flush;
        }
        result.reports.push_back(report);

        if (patience) {
            if (report.test_metrics.rmse < best_rmse) {
                best_rmse = report.test_metrics.rmse;
                stale_epochs = 0;
            } else if (++stale_epochs >= *patience) {
                break;
            }
        }
    }

    result.movies = std::move(movies_result.movies);
    return result;
}

}  // namespace embrec
