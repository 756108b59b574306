#pragma once

#include <cstdint>
#include <vector>

#include "embrec/dataset.hpp"

namespace embrec {

/// Learnable index -> vector map. Row 0 (PAD) is pinned to the zero vector:
/// it is zeroed at init and re-zeroed after every optimizer step, and its
/// gradient is always dropped.
struct EmbeddingTable {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<double> w;  // row-major rows x dim

    double* row(std::size_t r) { return w.data() + r * dim; }
    const double* row(std::size_t r) const { return w.data() + r * dim; }
};

/// Fully connected layer, weight stored row-major out_dim x in_dim.
struct DenseLayer {
    std::size_t out_dim = 0;
    std::size_t in_dim = 0;
    std::vector<double> w;
    std::vector<double> b;
};

struct ModelConfig {
    std::size_t dim_user = 32;
    std::size_t dim_movie = 32;
    std::size_t dim_cat = 8;  // shared by the genre and keyword tables
    std::vector<std::size_t> hidden_sizes{64, 32};
    double rating_min = 0.5;
    double rating_max = 5.0;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t batch_size = 256;
    std::size_t epochs = 20;
    std::uint64_t seed = 42;
    double test_frac = 0.2;
};

/// Throws ArgumentError on an invalid configuration.
void validate(const ModelConfig& config);

struct VocabSizes {
    std::size_t user = 0;
    std::size_t movie = 0;
    std::size_t genre = 0;
    std::size_t keyword = 0;
};

VocabSizes vocab_sizes(const Vocabs& vocabs);

/// All learnable state. The six concatenated embeddings (user, movie, two
/// genre slots, two keyword slots) feed the first dense layer, so
/// hidden[0].in_dim == dim_user + dim_movie + 4 * dim_cat. Both genre slots
/// read emb_genre and both keyword slots read emb_keyword.
struct ModelParams {
    EmbeddingTable emb_user;
    EmbeddingTable emb_movie;
    EmbeddingTable emb_genre;
    EmbeddingTable emb_keyword;
    std::vector<DenseLayer> hidden;
    DenseLayer output;  // out_dim 1, linear
    ModelConfig config;

    std::size_t input_width() const {
        return config.dim_user + config.dim_movie + 4 * config.dim_cat;
    }
};

/// Draws embeddings from uniform(-0.05, 0.05) and each dense weight from
/// uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)); biases start at
/// zero and PAD rows are zeroed after drawing. Draw order is fixed (user,
/// movie, genre, keyword tables row-major, then each dense layer), so a
/// seed fully determines the parameters.
ModelParams init(const VocabSizes& sizes, const ModelConfig& config, std::uint64_t seed);

/// Copy of row idx; IndexError when idx >= rows.
std::vector<double> lookup(const EmbeddingTable& table, std::size_t idx);

/// Intermediate activations kept for the backward pass, plus scratch reused
/// across calls so the training loop does not reallocate.
struct ForwardCache {
    std::vector<double> input;              // concatenated embeddings
    std::vector<std::vector<double>> pre;   // z_i per hidden layer
    std::vector<std::vector<double>> act;   // relu(z_i) per hidden layer
    double prediction = 0.0;
    std::vector<double> grad_cur;  // backward scratch
    std::vector<double> grad_prev;
};

/// h_0 = concat of the six embedding rows; h_i = relu(W_i h_{i-1} + b_i);
/// prediction = w_out . h_last + b_out (linear, unbounded).
double forward(const ModelParams& params, const EncodedExample& x, ForwardCache& cache);

double predict(const ModelParams& params, const EncodedExample& x);

/// forward clamped into [rating_min, rating_max].
double predict_clamped(const ModelParams& params, const EncodedExample& x);

/// Squared error.
double loss(double prediction, double target);

/// Same shapes as the parameters; embedding slots hold dLoss/dRow only for
/// rows indexed by the example (PAD excluded).
struct Gradients {
    EmbeddingTable emb_user;
    EmbeddingTable emb_movie;
    EmbeddingTable emb_genre;
    EmbeddingTable emb_keyword;
    std::vector<DenseLayer> hidden;
    DenseLayer output;
};

Gradients zeros_like(const ModelParams& params);
void zero(Gradients& grads);

/// Adds scale * dLoss/dParam for one example into `grads`. `cache` must
/// come from forward(params, x, cache). relu'(0) is taken as 0.
void accumulate_gradients(const ModelParams& params, const EncodedExample& x, ForwardCache& cache,
                          double target, double scale, Gradients& grads);

/// Gradients of loss(forward(params, x), target) for one example.
Gradients backward(const ModelParams& params, const EncodedExample& x, ForwardCache& cache,
                   double target);

/// Adam moment estimates. Powers of the betas are maintained by running
/// products so the update uses only +-*/ and sqrt.
struct AdamState {
    Gradients m;
    Gradients v;
    std::int64_t step_count = 0;
    double beta1_pow = 1.0;
    double beta2_pow = 1.0;
};

AdamState make_adam_state(const ModelParams& params);

/// One Adam update with bias correction over every parameter, using the
/// rates in params.config; PAD rows are re-zeroed afterwards.
void adam_step(ModelParams& params, const Gradients& grads, AdamState& state);

}  // namespace embrec
