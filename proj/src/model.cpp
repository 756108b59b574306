#include "embrec/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "embrec/errors.hpp"
#include "embrec/rng.hpp"

namespace embrec {

namespace {

void check_index(const EmbeddingTable& table, std::size_t idx, const char* table_name) {
    if (idx >= table.rows) {
        std::ostringstream msg;
        msg << table_name << ": index " << idx << " out of bounds (rows " << table.rows << ")";
        throw IndexError(msg.str());
    }
}

EmbeddingTable zero_table(std::size_t rows, std::size_t dim) {
    return EmbeddingTable{rows, dim, std::vector<double>(rows * dim, 0.0)};
}

DenseLayer zero_layer(std::size_t out_dim, std::size_t in_dim) {
    return DenseLayer{out_dim, in_dim, std::vector<double>(out_dim * in_dim, 0.0),
                      std::vector<double>(out_dim, 0.0)};
}

void fill_uniform(std::vector<double>& values, double bound, Rng& rng) {
    for (double& v : values) {
        v = rng.uniform(-bound, bound);
    }
}

// w . x + b for one dense layer, written into out.
void affine(const DenseLayer& layer, const std::vector<double>& in, std::vector<double>& out) {
    out.resize(layer.out_dim);
    const double* w = layer.w.data();
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
        double acc = layer.b[o];
        const double* row = w + o * layer.in_dim;
        for (std::size_t i = 0; i < layer.in_dim; ++i) {
            acc += row[i] * in[i];
        }
        out[o] = acc;
    }
}

void scatter_embedding(const EmbeddingTable& table, std::uint32_t idx, const double* grad_segment,
                       double scale, EmbeddingTable& grad_table) {
    if (idx == Vocab::kPad) return;  // PAD row is frozen
    double* row = grad_table.row(idx);
    for (std::size_t d = 0; d < table.dim; ++d) {
        row[d] += scale * grad_segment[d];
    }
}

void adam_update(std::vector<double>& params, const std::vector<double>& grads,
                 std::vector<double>& m, std::vector<double>& v, const ModelConfig& cfg,
                 double m_corr, double v_corr) {
    const double b1 = cfg.adam_beta1;
    const double b2 = cfg.adam_beta2;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        m[i] = b1 * m[i] + (1.0 - b1) * g;
        v[i] = b2 * v[i] + (1.0 - b2) * g * g;
        const double m_hat = m[i] / m_corr;
        const double v_hat = v[i] / v_corr;
        params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
    }
}

void check_same_shape(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        std::ostringstream msg;
        msg << "shape mismatch in " << what << ": " << a << " vs " << b;
        throw ArgumentError(msg.str());
    }
}

}  // namespace

void validate(const ModelConfig& config) {
    if (config.dim_user < 1 || config.dim_movie < 1 || config.dim_cat < 1) {
        throw ArgumentError("config: embedding dims must be >= 1");
    }
    for (const std::size_t h : config.hidden_sizes) {
        if (h < 1) throw ArgumentError("config: hidden sizes must be >= 1");
    }
    if (!(config.learning_rate > 0.0)) {
        throw ArgumentError("config: learning_rate must be positive");
    }
    if (!(config.rating_min < config.rating_max)) {
        throw ArgumentError("config: rating_min must be below rating_max");
    }
    if (config.batch_size < 1) {
        throw ArgumentError("config: batch_size must be >= 1");
    }
    if (!(config.test_frac > 0.0 && config.test_frac < 1.0)) {
        throw ArgumentError("config: test_frac must lie in (0, 1)");
    }
}

VocabSizes vocab_sizes(const Vocabs& vocabs) {
    return VocabSizes{vocabs.user.size(), vocabs.movie.size(), vocabs.genre.size(),
                      vocabs.keyword.size()};
}

ModelParams init(const VocabSizes& sizes, const ModelConfig& config, std::uint64_t seed) {
    validate(config);
    if (sizes.user < 2 || sizes.movie < 2 || sizes.genre < 2 || sizes.keyword < 2) {
        throw ArgumentError("init: every vocabulary needs at least the PAD and UNK rows");
    }

    ModelParams p;
    p.config = config;
    p.emb_user = zero_table(sizes.user, config.dim_user);
    p.emb_movie = zero_table(sizes.movie, config.dim_movie);
    p.emb_genre = zero_table(sizes.genre, config.dim_cat);
    p.emb_keyword = zero_table(sizes.keyword, config.dim_cat);

    Rng rng(seed);
    constexpr double kEmbeddingBound = 0.05;
    fill_uniform(p.emb_user.w, kEmbeddingBound, rng);
    fill_uniform(p.emb_movie.w, kEmbeddingBound, rng);
    fill_uniform(p.emb_genre.w, kEmbeddingBound, rng);
    fill_uniform(p.emb_keyword.w, kEmbeddingBound, rng);

    std::size_t width = p.input_width();
    for (const std::size_t h : config.hidden_sizes) {
        DenseLayer layer = zero_layer(h, width);
        const double bound = std::sqrt(6.0 / static_cast<double>(width + h));
        fill_uniform(layer.w, bound, rng);
        p.hidden.push_back(std::move(layer));
        width = h;
    }
    p.output = zero_layer(1, width);
    fill_uniform(p.output.w, std::sqrt(6.0 / static_cast<double>(width + 1)), rng);

    for (EmbeddingTable* table : {&p.emb_user, &p.emb_movie, &p.emb_genre, &p.emb_keyword}) {
        std::fill_n(table->row(Vocab::kPad), table->dim, 0.0);
    }
    return p;
}

std::vector<double> lookup(const EmbeddingTable& table, std::size_t idx) {
    check_index(table, idx, "embedding table");
    return std::vector<double>(table.row(idx), table.row(idx) + table.dim);
}

double forward(const ModelParams& params, const EncodedExample& x, ForwardCache& cache) {
    check_index(params.emb_user, x.user_idx, "emb_user");
    check_index(params.emb_movie, x.movie_idx, "emb_movie");
    check_index(params.emb_genre, x.genre1_idx, "emb_genre");
    check_index(params.emb_genre, x.genre2_idx, "emb_genre");
    check_index(params.emb_keyword, x.kw1_idx, "emb_keyword");
    check_index(params.emb_keyword, x.kw2_idx, "emb_keyword");

    cache.input.resize(params.input_width());
    double* dst = cache.input.data();
    const auto copy_row = [&dst](const EmbeddingTable& t, std::uint32_t idx) {
        std::memcpy(dst, t.row(idx), t.dim * sizeof(double));
        dst += t.dim;
    };
    copy_row(params.emb_user, x.user_idx);
    copy_row(params.emb_movie, x.movie_idx);
    copy_row(params.emb_genre, x.genre1_idx);
    copy_row(params.emb_genre, x.genre2_idx);
    copy_row(params.emb_keyword, x.kw1_idx);
    copy_row(params.emb_keyword, x.kw2_idx);

    cache.pre.resize(params.hidden.size());
    cache.act.resize(params.hidden.size());
    const std::vector<double>* cur = &cache.input;
    for (std::size_t l = 0; l < params.hidden.size(); ++l) {
        affine(params.hidden[l], *cur, cache.pre[l]);
        auto& act = cache.act[l];
        act.resize(cache.pre[l].size());
        for (std::size_t i = 0; i < act.size(); ++i) {
            act[i] = cache.pre[l][i] > 0.0 ? cache.pre[l][i] : 0.0;
        }
        cur = &act;
    }

    double pred = params.output.b[0];
    for (std::size_t i = 0; i < params.output.in_dim; ++i) {
        pred += params.output.w[i] * (*cur)[i];
    }
    cache.prediction = pred;
    return pred;
}

double predict(const ModelParams& params, const EncodedExample& x) {
    ForwardCache cache;
    return forward(params, x, cache);
}

double predict_clamped(const ModelParams& params, const EncodedExample& x) {
    return std::clamp(predict(params, x), params.config.rating_min, params.config.rating_max);
}

double loss(double prediction, double target) {
    const double d = prediction - target;
    return d * d;
}

Gradients zeros_like(const ModelParams& params) {
    Gradients g;
    g.emb_user = zero_table(params.emb_user.rows, params.emb_user.dim);
    g.emb_movie = zero_table(params.emb_movie.rows, params.emb_movie.dim);
    g.emb_genre = zero_table(params.emb_genre.rows, params.emb_genre.dim);
    g.emb_keyword = zero_table(params.emb_keyword.rows, params.emb_keyword.dim);
    for (const auto& layer : params.hidden) {
        g.hidden.push_back(zero_layer(layer.out_dim, layer.in_dim));
    }
    g.output = zero_layer(params.output.out_dim, params.output.in_dim);
    return g;
}

void zero(Gradients& grads) {
    const auto clear = [](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); };
    clear(grads.emb_user.w);
    clear(grads.emb_movie.w);
    clear(grads.emb_genre.w);
    clear(grads.emb_keyword.w);
    for (auto& layer : grads.hidden) {
        clear(layer.w);
        clear(layer.b);
    }
    clear(grads.output.w);
    clear(grads.output.b);
}

void accumulate_gradients(const ModelParams& params, const EncodedExample& x, ForwardCache& cache,
                          double target, double scale, Gradients& grads) {
    const double dpred = 2.0 * (cache.prediction - target);
    const std::size_t layers = params.hidden.size();
    const std::vector<double>& last_act = layers > 0 ? cache.act[layers - 1] : cache.input;

    for (std::size_t i = 0; i < params.output.in_dim; ++i) {
        grads.output.w[i] += scale * dpred * last_act[i];
    }
    grads.output.b[0] += scale * dpred;

    // Gradient flowing into the activations of the current layer.
    auto& g = cache.grad_cur;
    g.resize(params.output.in_dim);
    for (std::size_t i = 0; i < params.output.in_dim; ++i) {
        g[i] = dpred * params.output.w[i];
    }

    for (std::size_t l = layers; l-- > 0;) {
        const DenseLayer& layer = params.hidden[l];
        DenseLayer& grad = grads.hidden[l];
        const std::vector<double>& in = l > 0 ? cache.act[l - 1] : cache.input;

        // relu'(z) with relu'(0) := 0
        for (std::size_t o = 0; o < layer.out_dim; ++o) {
            if (!(cache.pre[l][o] > 0.0)) g[o] = 0.0;
        }
        for (std::size_t o = 0; o < layer.out_dim; ++o) {
            const double go = scale * g[o];
            double* row = grad.w.data() + o * layer.in_dim;
            for (std::size_t i = 0; i < layer.in_dim; ++i) {
                row[i] += go * in[i];
            }
            grad.b[o] += go;
        }

        auto& g_prev = cache.grad_prev;
        g_prev.assign(layer.in_dim, 0.0);
        for (std::size_t o = 0; o < layer.out_dim; ++o) {
            const double go = g[o];
            if (go == 0.0) continue;
            const double* row = layer.w.data() + o * layer.in_dim;
            for (std::size_t i = 0; i < layer.in_dim; ++i) {
                g_prev[i] += go * row[i];
            }
        }
        std::swap(g, g_prev);
    }

    // g now holds dLoss/dInput; scatter the six segments into the indexed
    // embedding rows (two slots share each categorical table).
    const double* seg = g.data();
    scatter_embedding(params.emb_user, x.user_idx, seg, scale, grads.emb_user);
    seg += params.emb_user.dim;
    scatter_embedding(params.emb_movie, x.movie_idx, seg, scale, grads.emb_movie);
    seg += params.emb_movie.dim;
    scatter_embedding(params.emb_genre, x.genre1_idx, seg, scale, grads.emb_genre);
    seg += params.emb_genre.dim;
    scatter_embedding(params.emb_genre, x.genre2_idx, seg, scale, grads.emb_genre);
    seg += params.emb_genre.dim;
    scatter_embedding(params.emb_keyword, x.kw1_idx, seg, scale, grads.emb_keyword);
    seg += params.emb_keyword.dim;
    scatter_embedding(params.emb_keyword, x.kw2_idx, seg, scale, grads.emb_keyword);
}

Gradients backward(const ModelParams& params, const EncodedExample& x, ForwardCache& cache,
                   double target) {
    Gradients grads = zeros_like(params);
    accumulate_gradients(params, x, cache, target, 1.0, grads);
    return grads;
}

AdamState make_adam_state(const ModelParams& params) {
    AdamState state;
    state.m = zeros_like(params);
    state.v = zeros_like(params);
    return state;
}

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state) {
    check_same_shape(params.emb_user.w.size(), grads.emb_user.w.size(), "emb_user");
    check_same_shape(params.emb_movie.w.size(), grads.emb_movie.w.size(), "emb_movie");
    check_same_shape(params.emb_genre.w.size(), grads.emb_genre.w.size(), "emb_genre");
    check_same_shape(params.emb_keyword.w.size(), grads.emb_keyword.w.size(), "emb_keyword");
    check_same_shape(params.hidden.size(), grads.hidden.size(), "hidden layer count");
    for (std::size_t l = 0; l < params.hidden.size(); ++l) {
        check_same_shape(params.hidden[l].w.size(), grads.hidden[l].w.size(), "hidden weight");
        check_same_shape(params.hidden[l].b.size(), grads.hidden[l].b.size(), "hidden bias");
    }
    check_same_shape(params.output.w.size(), grads.output.w.size(), "output weight");

    const ModelConfig& cfg = params.config;
    ++state.step_count;
    state.beta1_pow *= cfg.adam_beta1;
    state.beta2_pow *= cfg.adam_beta2;
    const double m_corr = 1.0 - state.beta1_pow;
    const double v_corr = 1.0 - state.beta2_pow;

    adam_update(params.emb_user.w, grads.emb_user.w, state.m.emb_user.w, state.v.emb_user.w, cfg,
                m_corr, v_corr);
    adam_update(params.emb_movie.w, grads.emb_movie.w, state.m.emb_movie.w, state.v.emb_movie.w,
                cfg, m_corr, v_corr);
    adam_update(params.emb_genre.w, grads.emb_genre.w, state.m.emb_genre.w, state.v.emb_genre.w,
                cfg, m_corr, v_corr);
    adam_update(params.emb_keyword.w, grads.emb_keyword.w, state.m.emb_keyword.w,
                state.v.emb_keyword.w, cfg, m_corr, v_corr);
    for (std::size_t l = 0; l < params.hidden.size(); ++l) {
        adam_update(params.hidden[l].w, grads.hidden[l].w, state.m.hidden[l].w,
                    state.v.hidden[l].w, cfg, m_corr, v_corr);
        adam_update(params.hidden[l].b, grads.hidden[l].b, state.m.hidden[l].b,
                    state.v.hidden[l].b, cfg, m_corr, v_corr);
    }
    adam_update(params.output.w, grads.output.w, state.m.output.w, state.v.output.w, cfg, m_corr,
                v_corr);
    adam_update(params.output.b, grads.output.b, state.m.output.b, state.v.output.b, cfg, m_corr,
                v_corr);

    for (EmbeddingTable* table :
         {&params.emb_user, &params.emb_movie, &params.emb_genre, &params.emb_keyword}) {
        std::fill_n(table->row(Vocab::kPad), table->dim, 0.0);
    }
}

}  // namespace embrec
