#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "embrec/dataset.hpp"
#include "embrec/model.hpp"

namespace embrec {

/// Per-movie content representation: the movie-id embedding followed by the
/// mean of its non-PAD genre embeddings and the mean of its non-PAD keyword
/// embeddings (zero vectors when a family is all PAD). Length is
/// dim_movie + 2 * dim_cat. Lives in a user-independent space, so a user
/// taste vector can be compared against every movie.
struct ContentVector {
    std::uint32_t movie_idx = 0;  // index in the movie vocabulary
    std::string movie_id;
    std::vector<double> v;
};

/// Mean of the content vectors of the movies a user rated at or above the
/// threshold (or of the fallback_k best-rated movies when none qualify).
struct TasteVector {
    std::string user_id;
    std::vector<double> v;
    std::size_t support = 0;
    double threshold_used = 0.0;
};

struct Recommendation {
    std::uint32_t movie_idx = 0;
    std::string movie_id;
    double score = 0.0;   // cosine, in [-1, 1]
    std::size_t rank = 0; // 1-based, gap-free
};

ContentVector content_vector(const ModelParams& params, const Vocab& movie_vocab,
                             std::uint32_t movie_idx, std::array<std::uint32_t, 2> genre_idx,
                             std::array<std::uint32_t, 2> kw_idx);

/// Content vector for every real movie in the vocabulary (indices 2..),
/// joining each against its metadata. Unknown metadata tokens map to UNK; a
/// vocabulary movie missing from `movies` raises LookupError.
std::vector<ContentVector> build_catalog(const ModelParams& params, const Vocabs& vocabs,
                                         const std::vector<MovieMeta>& movies);

/// History entries with target >= threshold; when none qualify, the
/// fallback_k best-rated entries (earlier history position wins ties).
TasteVector taste_vector(const ModelParams& params, const std::string& user_id,
                         const std::vector<EncodedExample>& history, double threshold,
                         std::size_t fallback_k);

/// a.b / (|a||b|); 0.0 when either norm is below 1e-12.
double cosine(std::span<const double> a, std::span<const double> b);

/// Exact exhaustive top-k by cosine against the query, skipping excluded
/// movie indices. Ties break toward the lower movie index. Returns fewer
/// than k when the pool is smaller.
std::vector<Recommendation> top_k_similar(std::span<const double> query,
                                          const std::vector<ContentVector>& candidates,
                                          std::size_t k,
                                          const std::unordered_set<std::uint32_t>& exclude);

/// Aggregates the user's training history into a taste vector and returns
/// the k most similar catalog movies the user has not rated in training.
std::vector<Recommendation> recommend_for_user(const ModelParams& params, const Vocabs& vocabs,
                                               const std::vector<EncodedExample>& train_set,
                                               const std::vector<ContentVector>& catalog,
                                               const std::string& user_id, std::size_t k,
                                               double threshold, std::size_t fallback_k = 5);

/// Movies closest to the given movie's own content vector, excluding it.
std::vector<Recommendation> similar_movies(const Vocabs& vocabs,
                                           const std::vector<ContentVector>& catalog,
                                           const std::string& movie_id, std::size_t k);

}  // namespace embrec
