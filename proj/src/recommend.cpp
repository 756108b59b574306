#include "embrec/recommend.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "embrec/errors.hpp"

namespace embrec {

namespace {

// Appends the mean of the non-PAD rows of the pair, or dim zeros.
void append_pair_mean(const EmbeddingTable& table, std::array<std::uint32_t, 2> idx,
                      std::vector<double>& out) {
    const std::size_t base = out.size();
    out.resize(base + table.dim, 0.0);
    std::size_t live = 0;
    for (const std::uint32_t i : idx) {
        if (i == Vocab::kPad) continue;
        ++live;
        const double* row = table.row(i);
        for (std::size_t d = 0; d < table.dim; ++d) {
            out[base + d] += row[d];
        }
    }
    if (live > 1) {
        for (std::size_t d = 0; d < table.dim; ++d) {
            out[base + d] /= static_cast<double>(live);
        }
    }
}

void check_table_index(const EmbeddingTable& table, std::uint32_t idx, const char* name) {
    if (idx >= table.rows) {
        throw IndexError(std::string(name) + ": index " + std::to_string(idx) +
                         " out of bounds (rows " + std::to_string(table.rows) + ")");
    }
}

}  // namespace

ContentVector content_vector(const ModelParams& params, const Vocab& movie_vocab,
                             std::uint32_t movie_idx, std::array<std::uint32_t, 2> genre_idx,
                             std::array<std::uint32_t, 2> kw_idx) {
    check_table_index(params.emb_movie, movie_idx, "emb_movie");
    for (const auto g : genre_idx) check_table_index(params.emb_genre, g, "emb_genre");
    for (const auto k : kw_idx) check_table_index(params.emb_keyword, k, "emb_keyword");

    ContentVector cv;
    cv.movie_idx = movie_idx;
    if (movie_idx >= 2) {
        cv.movie_id = movie_vocab.decode(movie_idx);
    }
    cv.v.reserve(params.emb_movie.dim + 2 * params.config.dim_cat);
    cv.v.assign(params.emb_movie.row(movie_idx),
                params.emb_movie.row(movie_idx) + params.emb_movie.dim);
    append_pair_mean(params.emb_genre, genre_idx, cv.v);
    append_pair_mean(params.emb_keyword, kw_idx, cv.v);
    return cv;
}

std::vector<ContentVector> build_catalog(const ModelParams& params, const Vocabs& vocabs,
                                         const std::vector<MovieMeta>& movies) {
    const auto by_id = movie_index(movies);
    std::vector<ContentVector> catalog;
    catalog.reserve(vocabs.movie.tokens().size());
    for (std::size_t i = 0; i < vocabs.movie.tokens().size(); ++i) {
        const auto idx = static_cast<std::uint32_t>(i + 2);
        const std::string& movie_id = vocabs.movie.tokens()[i];
        const auto it = by_id.find(movie_id);
        if (it == by_id.end()) {
            throw LookupError("movie '" + movie_id + "' has no entry in the movies file");
        }
        const MovieMeta& meta = movies[it->second];
        const std::array<std::uint32_t, 2> genre_idx{
            meta.genres.size() > 0 ? vocabs.genre.encode(meta.genres[0]) : Vocab::kPad,
            meta.genres.size() > 1 ? vocabs.genre.encode(meta.genres[1]) : Vocab::kPad};
        const std::array<std::uint32_t, 2> kw_idx{
            meta.keywords.size() > 0 ? vocabs.keyword.encode(meta.keywords[0]) : Vocab::kPad,
            meta.keywords.size() > 1 ? vocabs.keyword.encode(meta.keywords[1]) : Vocab::kPad};
        catalog.push_back(content_vector(params, vocabs.movie, idx, genre_idx, kw_idx));
    }
    return catalog;
}

TasteVector taste_vector(const ModelParams& params, const std::string& user_id,
                         const std::vector<EncodedExample>& history, double threshold,
                         std::size_t fallback_k) {
    if (history.empty()) {
        throw ArgumentError("taste_vector: user '" + user_id + "' has an empty history");
    }
    if (fallback_k < 1) {
        throw ArgumentError("taste_vector: fallback_k must be >= 1");
    }

    std::vector<std::size_t> selected;
    for (std::size_t i = 0; i < history.size(); ++i) {
        if (history[i].target >= threshold) selected.push_back(i);
    }
    if (selected.empty()) {
        // Best-rated entries instead; stable sort keeps earlier history
        // positions ahead on equal ratings.
        selected.resize(history.size());
        std::iota(selected.begin(), selected.end(), std::size_t{0});
        std::stable_sort(selected.begin(), selected.end(), [&](std::size_t a, std::size_t b) {
            return history[a].target > history[b].target;
        });
        selected.resize(std::min(fallback_k, selected.size()));
    }

    TasteVector taste;
    taste.user_id = user_id;
    taste.support = selected.size();
    taste.threshold_used = threshold;
    taste.v.assign(params.emb_movie.dim + 2 * params.config.dim_cat, 0.0);
    for (const std::size_t i : selected) {
        const EncodedExample& x = history[i];
        check_table_index(params.emb_movie, x.movie_idx, "emb_movie");
        std::vector<double> v(params.emb_movie.row(x.movie_idx),
                              params.emb_movie.row(x.movie_idx) + params.emb_movie.dim);
        append_pair_mean(params.emb_genre, {x.genre1_idx, x.genre2_idx}, v);
        append_pair_mean(params.emb_keyword, {x.kw1_idx, x.kw2_idx}, v);
        for (std::size_t d = 0; d < taste.v.size(); ++d) {
            taste.v[d] += v[d];
        }
    }
    for (double& d : taste.v) {
        d /= static_cast<double>(taste.support);
    }
    return taste;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ArgumentError("cosine: length mismatch (" + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    constexpr double kMinNorm = 1e-12;
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (na < kMinNorm || nb < kMinNorm) return 0.0;
    return dot / (na * nb);
}

std::vector<Recommendation> top_k_similar(std::span<const double> query,
                                          const std::vector<ContentVector>& candidates,
                                          std::size_t k,
                                          const std::unordered_set<std::uint32_t>& exclude) {
    if (k < 1) {
        throw ArgumentError("top_k_similar: k must be >= 1");
    }

    struct Scored {
        double score;
        std::size_t pos;
    };
    std::vector<Scored> scored;
    scored.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (exclude.count(candidates[i].movie_idx) != 0) continue;
        scored.push_back({cosine(query, candidates[i].v), i});
    }
    std::sort(scored.begin(), scored.end(), [&](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return candidates[a.pos].movie_idx < candidates[b.pos].movie_idx;
    });
    if (scored.size() > k) scored.resize(k);

    std::vector<Recommendation> out;
    out.reserve(scored.size());
    for (std::size_t r = 0; r < scored.size(); ++r) {
        const ContentVector& cv = candidates[scored[r].pos];
        out.push_back({cv.movie_idx, cv.movie_id, scored[r].score, r + 1});
    }
    return out;
}

std::vector<Recommendation> recommend_for_user(const ModelParams& params, const Vocabs& vocabs,
                                               const std::vector<EncodedExample>& train_set,
                                               const std::vector<ContentVector>& catalog,
                                               const std::string& user_id, std::size_t k,
                                               double threshold, std::size_t fallback_k) {
    if (!vocabs.user.contains(user_id)) {
        throw LookupError("user '" + user_id + "' is not in the vocabulary");
    }
    const std::uint32_t user_idx = vocabs.user.encode(user_id);

    std::vector<EncodedExample> history;
    std::unordered_set<std::uint32_t> rated;
    for (const auto& x : train_set) {
        if (x.user_idx == user_idx) {
            history.push_back(x);
            rated.insert(x.movie_idx);
        }
    }
    if (history.empty()) {
        throw ArgumentError("user '" + user_id + "' has no training history");
    }

    const TasteVector taste = taste_vector(params, user_id, history, threshold, fallback_k);
    return top_k_similar(taste.v, catalog, k, rated);
}

std::vector<Recommendation> similar_movies(const Vocabs& vocabs,
                                           const std::vector<ContentVector>& catalog,
                                           const std::string& movie_id, std::size_t k) {
    if (!vocabs.movie.contains(movie_id)) {
        throw LookupError("movie '" + movie_id + "' is not in the vocabulary");
    }
    const std::uint32_t movie_idx = vocabs.movie.encode(movie_id);
    const ContentVector* query = nullptr;
    for (const auto& cv : catalog) {
        if (cv.movie_idx == movie_idx) {
            query = &cv;
            break;
        }
    }
    if (query == nullptr) {
        throw LookupError("movie '" + movie_id + "' is missing from the catalog");
    }
    return top_k_similar(query->v, catalog, k, {movie_idx});
}

}  // namespace embrec
