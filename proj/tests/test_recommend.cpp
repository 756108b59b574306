#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>
#include <vector>

#include "embrec/errors.hpp"
#include "embrec/recommend.hpp"
#include "embrec/rng.hpp"

using namespace embrec;

namespace {

ModelConfig content_config() {
    ModelConfig c;
    c.dim_user = 2;
    c.dim_movie = 2;
    c.dim_cat = 2;
    c.hidden_sizes = {3};
    return c;
}

/// Brute-force reference: score every non-excluded candidate, full sort by
/// (score desc, movie_idx asc), truncate. Dot/norm arithmetic is written
/// out here independently of the library.
std::vector<Recommendation> oracle_top_k(const std::vector<double>& query,
                                         const std::vector<ContentVector>& candidates,
                                         std::size_t k,
                                         const std::unordered_set<std::uint32_t>& exclude) {
    struct Row {
        double score;
        std::uint32_t movie_idx;
        std::size_t pos;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (exclude.count(candidates[i].movie_idx) != 0) continue;
        double dot = 0.0;
        double qq = 0.0;
        double cc = 0.0;
        for (std::size_t d = 0; d < query.size(); ++d) {
            dot += query[d] * candidates[i].v[d];
            qq += query[d] * query[d];
            cc += candidates[i].v[d] * candidates[i].v[d];
        }
        double score = 0.0;
        if (std::sqrt(qq) >= 1e-12 && std::sqrt(cc) >= 1e-12) {
            score = dot / (std::sqrt(qq) * std::sqrt(cc));
        }
        rows.push_back({score, candidates[i].movie_idx, i});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.movie_idx < b.movie_idx;
    });
    if (rows.size() > k) rows.resize(k);
    std::vector<Recommendation> out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.push_back({rows[r].movie_idx, candidates[rows[r].pos].movie_id, rows[r].score,
                       r + 1});
    }
    return out;
}

/// 200 candidates over a handful of distinct vectors so exact score ties
/// are guaranteed and the movie-index tie-break is exercised.
std::vector<ContentVector> tied_candidates(Rng& rng, std::size_t n, std::size_t dim) {
    std::vector<std::vector<double>> pool;
    for (int p = 0; p < 40; ++p) {
        std::vector<double> v(dim);
        for (double& x : v) x = rng.uniform(-1.0, 1.0);
        pool.push_back(std::move(v));
    }
    std::vector<ContentVector> candidates;
    for (std::size_t i = 0; i < n; ++i) {
        ContentVector cv;
        cv.movie_idx = static_cast<std::uint32_t>(2 + i);
        cv.movie_id = "m" + std::to_string(2 + i);
        cv.v = pool[rng.index(pool.size())];  // shared vectors -> exact ties
        candidates.push_back(std::move(cv));
    }
    return candidates;
}

void check_same(const std::vector<Recommendation>& got,
                const std::vector<Recommendation>& want) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].movie_idx == want[i].movie_idx);
        CHECK(got[i].score == want[i].score);
        CHECK(got[i].rank == want[i].rank);
    }
}

}  // namespace

TEST_SUITE("recommend") {

TEST_CASE("content_vector concatenates movie, genre-mean, and keyword-mean blocks") {
    auto p = init({4, 4, 4, 4}, content_config(), 1);
    Vocab movie_vocab("movie");
    movie_vocab.add("50");
    movie_vocab.add("60");

    p.emb_movie.row(2)[0] = 0.5;
    p.emb_movie.row(2)[1] = -0.5;
    p.emb_genre.row(2)[0] = 1.0;
    p.emb_genre.row(2)[1] = 0.0;
    p.emb_genre.row(3)[0] = 0.0;
    p.emb_genre.row(3)[1] = 1.0;

    SUBCASE("both genres PAD -> zero middle block") {
        const auto cv = content_vector(p, movie_vocab, 2, {0, 0}, {0, 0});
        REQUIRE(cv.v.size() == 6);
        CHECK(cv.movie_id == "50");
        CHECK(cv.v[0] == 0.5);
        CHECK(cv.v[1] == -0.5);
        CHECK(cv.v[2] == 0.0);
        CHECK(cv.v[3] == 0.0);
    }
    SUBCASE("one genre -> mean of a singleton") {
        const auto cv = content_vector(p, movie_vocab, 2, {2, 0}, {0, 0});
        CHECK(cv.v[2] == 1.0);
        CHECK(cv.v[3] == 0.0);
    }
    SUBCASE("two genres -> elementwise mean") {
        const auto cv = content_vector(p, movie_vocab, 2, {2, 3}, {0, 0});
        CHECK(cv.v[2] == 0.5);
        CHECK(cv.v[3] == 0.5);
    }
    SUBCASE("out-of-bounds index is rejected") {
        CHECK_THROWS_AS(content_vector(p, movie_vocab, 9, {0, 0}, {0, 0}), IndexError);
    }
}

TEST_CASE("taste_vector averages qualifying movies") {
    auto p = init({4, 6, 4, 4}, content_config(), 2);
    Vocab movie_vocab("movie");
    for (const char* id : {"10", "20", "30", "40"}) movie_vocab.add(id);

    const auto example = [&](std::uint32_t movie_idx, double target) {
        EncodedExample x;
        x.user_idx = 2;
        x.movie_idx = movie_idx;
        x.target = target;
        return x;
    };
    const auto cv = [&](std::uint32_t movie_idx) {
        return content_vector(p, movie_vocab, movie_idx, {0, 0}, {0, 0}).v;
    };

    SUBCASE("singleton") {
        const auto t = taste_vector(p, "u", {example(2, 5.0)}, 4.0, 5);
        CHECK(t.support == 1);
        CHECK(t.v == cv(2));
    }
    SUBCASE("two qualifying movies") {
        const auto t = taste_vector(p, "u", {example(2, 4.5), example(3, 4.0)}, 4.0, 5);
        CHECK(t.support == 2);
        const auto a = cv(2);
        const auto b = cv(3);
        for (std::size_t d = 0; d < t.v.size(); ++d) {
            CHECK(t.v[d] == doctest::Approx((a[d] + b[d]) / 2.0).epsilon(1e-15));
        }
    }
    SUBCASE("fallback picks the k best, earlier position winning ties") {
        const auto t = taste_vector(
            p, "u", {example(2, 2.0), example(3, 2.0), example(4, 2.0), example(5, 2.0)}, 4.0,
            2);
        CHECK(t.support == 2);
        const auto a = cv(2);
        const auto b = cv(3);
        for (std::size_t d = 0; d < t.v.size(); ++d) {
            CHECK(t.v[d] == doctest::Approx((a[d] + b[d]) / 2.0).epsilon(1e-15));
        }
    }
    SUBCASE("fallback selection rule over a mixed toy history") {
        const auto t = taste_vector(
            p, "u", {example(2, 3.5), example(3, 2.0), example(4, 3.5), example(5, 1.0)}, 4.0,
            2);
        CHECK(t.support == 2);
        const auto a = cv(2);
        const auto b = cv(4);
        for (std::size_t d = 0; d < t.v.size(); ++d) {
            CHECK(t.v[d] == doctest::Approx((a[d] + b[d]) / 2.0).epsilon(1e-15));
        }
    }
    SUBCASE("identical content vectors aggregate to themselves") {
        const auto t = taste_vector(p, "u", {example(2, 5.0), example(2, 4.5)}, 4.0, 5);
        CHECK(t.v == cv(2));
    }
    SUBCASE("empty history is rejected") {
        CHECK_THROWS_AS(taste_vector(p, "u", {}, 4.0, 5), ArgumentError);
    }
}

TEST_CASE("cosine matches the analytic values") {
    const std::vector<double> v{0.3, -1.2, 0.5};
    CHECK(cosine(v, v) == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<double> e1{1.0, 0.0};
    const std::vector<double> e2{0.0, 1.0};
    CHECK(cosine(e1, e2) == 0.0);

    const std::vector<double> diag{1.0, 1.0};
    CHECK(cosine(e1, diag) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

    const std::vector<double> zero{0.0, 0.0};
    CHECK(cosine(e1, zero) == 0.0);

    const std::vector<double> longer{1.0, 0.0, 0.0};
    CHECK_THROWS_AS(cosine(e1, longer), ArgumentError);
}

TEST_CASE("top_k_similar returns the whole pool when k exceeds it") {
    Rng rng(31);
    const auto candidates = tied_candidates(rng, 5, 4);
    std::vector<double> query(4, 0.5);
    const auto got = top_k_similar(query, candidates, 50, {});
    CHECK(got.size() == 5);
    for (std::size_t i = 1; i < got.size(); ++i) {
        CHECK(got[i - 1].score >= got[i].score);
        CHECK(got[i].rank == i + 1);
    }
}

TEST_CASE("top_k_similar ranks an exact vector match first") {
    Rng rng(32);
    auto candidates = tied_candidates(rng, 20, 4);
    const auto query = candidates[7].v;
    const auto got = top_k_similar(query, candidates, 3, {});
    REQUIRE(!got.empty());
    CHECK(got[0].score == doctest::Approx(1.0).epsilon(1e-12));
    // The query vector may be shared (planted ties); the winner must then
    // be the lowest movie index among the tied copies.
    std::uint32_t lowest_tied = candidates[7].movie_idx;
    for (const auto& c : candidates) {
        if (c.v == candidates[7].v) lowest_tied = std::min(lowest_tied, c.movie_idx);
    }
    CHECK(got[0].movie_idx == lowest_tied);
}

TEST_CASE("top_k_similar rejects k = 0") {
    Rng rng(33);
    const auto candidates = tied_candidates(rng, 5, 4);
    std::vector<double> query(4, 0.5);
    CHECK_THROWS_AS(top_k_similar(query, candidates, 0, {}), ArgumentError);
}

TEST_CASE("top_k_similar equals the brute-force oracle, ties included") {
    Rng rng(34);
    const auto candidates = tied_candidates(rng, 200, 6);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> query(6);
        for (double& x : query) x = rng.uniform(-1.0, 1.0);
        std::unordered_set<std::uint32_t> exclude;
        const std::size_t n_excluded = rng.index(8);
        for (std::size_t e = 0; e < n_excluded; ++e) {
            exclude.insert(static_cast<std::uint32_t>(2 + rng.index(200)));
        }
        const auto got = top_k_similar(query, candidates, 10, exclude);
        const auto want = oracle_top_k(query, candidates, 10, exclude);
        check_same(got, want);
        for (const auto& rec : got) {
            CHECK(exclude.count(rec.movie_idx) == 0);
        }
    }
}

TEST_CASE("top_k_similar is invariant to positive scaling of the query") {
    Rng rng(35);
    const auto candidates = tied_candidates(rng, 60, 5);
    std::vector<double> query(5);
    for (double& x : query) x = rng.uniform(-1.0, 1.0);
    std::vector<double> scaled = query;
    for (double& x : scaled) x *= 7.5;
    const auto a = top_k_similar(query, candidates, 10, {});
    const auto b = top_k_similar(scaled, candidates, 10, {});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].movie_idx == b[i].movie_idx);
    }
}

TEST_CASE("recommend_for_user excludes the training history and matches brute force") {
    // Three movies; the user rated one of them highly.
    std::vector<RatingRecord> ratings{{"7", "100", 5.0, 0},
                                      {"8", "200", 3.0, 0},
                                      {"8", "300", 4.0, 0}};
    std::vector<MovieMeta> movies{{"100", "A", {"Drama"}, {}},
                                  {"200", "B", {"Drama"}, {}},
                                  {"300", "C", {"Horror"}, {}}};
    const auto vocabs = build_vocabs(ratings, movies);
    const auto params = init(vocab_sizes(vocabs), content_config(), 40);
    const auto train = encode_all(ratings, movies, vocabs);
    const auto catalog = build_catalog(params, vocabs, movies);

    const auto recs = recommend_for_user(params, vocabs, train, catalog, "7", 10, 4.0);
    REQUIRE(recs.size() == 2);  // everything except the rated movie
    for (const auto& rec : recs) {
        CHECK(rec.movie_id != "100");
    }

    // Brute force over the same pool.
    const auto taste = taste_vector(params, "7", {train[0]}, 4.0, 5);
    const auto want = oracle_top_k(taste.v, catalog, 10, {vocabs.movie.encode("100")});
    check_same(recs, want);
}

TEST_CASE("recommend_for_user returns empty when the user rated everything") {
    std::vector<RatingRecord> ratings{{"7", "100", 5.0, 0}, {"7", "200", 4.0, 0}};
    std::vector<MovieMeta> movies{{"100", "A", {"Drama"}, {}}, {"200", "B", {}, {}}};
    const auto vocabs = build_vocabs(ratings, movies);
    const auto params = init(vocab_sizes(vocabs), content_config(), 41);
    const auto train = encode_all(ratings, movies, vocabs);
    const auto catalog = build_catalog(params, vocabs, movies);
    CHECK(recommend_for_user(params, vocabs, train, catalog, "7", 5, 4.0).empty());
}

TEST_CASE("recommend_for_user rejects unknown users and empty histories") {
    std::vector<RatingRecord> ratings{{"7", "100", 5.0, 0}, {"9", "200", 3.0, 0}};
    std::vector<MovieMeta> movies{{"100", "A", {"Drama"}, {}}, {"200", "B", {}, {}}};
    const auto vocabs = build_vocabs(ratings, movies);
    const auto params = init(vocab_sizes(vocabs), content_config(), 42);
    const auto train = encode_all(ratings, movies, vocabs);
    const auto catalog = build_catalog(params, vocabs, movies);

    CHECK_THROWS_WITH_AS(
        recommend_for_user(params, vocabs, train, catalog, "nobody", 5, 4.0),
        doctest::Contains("nobody"), LookupError);

    // "9" is in the vocabulary but has no entries in this (filtered) train set.
    std::vector<EncodedExample> only_user7;
    for (const auto& x : train) {
        if (x.user_idx == vocabs.user.encode("7")) only_user7.push_back(x);
    }
    CHECK_THROWS_AS(recommend_for_user(params, vocabs, only_user7, catalog, "9", 5, 4.0),
                    ArgumentError);
}

TEST_CASE("recommendation lists are ordered with gap-free ranks") {
    Rng rng(43);
    const auto candidates = tied_candidates(rng, 80, 4);
    std::vector<double> query(4);
    for (double& x : query) x = rng.uniform(-1.0, 1.0);
    const auto got = top_k_similar(query, candidates, 15, {});
    REQUIRE(got.size() == 15);
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].rank == i + 1);
        if (i > 0) CHECK(got[i - 1].score >= got[i].score);
        CHECK(got[i].score <= 1.0 + 1e-12);
        CHECK(got[i].score >= -1.0 - 1e-12);
    }
}

TEST_CASE("similar_movies excludes the query movie and matches brute force") {
    std::vector<RatingRecord> ratings;
    std::vector<MovieMeta> movies;
    for (int i = 0; i < 200; ++i) {
        const std::string id = std::to_string(1000 + i);
        ratings.push_back({"1", id, 3.0, 0});
        movies.push_back({id, "T" + id, {i % 2 == 0 ? "Drama" : "Horror"}, {}});
    }
    const auto vocabs = build_vocabs(ratings, movies);
    const auto params = init(vocab_sizes(vocabs), content_config(), 44);
    const auto catalog = build_catalog(params, vocabs, movies);

    const auto got = similar_movies(vocabs, catalog, "1003", 10);
    REQUIRE(got.size() == 10);
    for (const auto& rec : got) {
        CHECK(rec.movie_id != "1003");
    }
    const auto query_idx = vocabs.movie.encode("1003");
    const auto want = oracle_top_k(catalog[query_idx - 2].v, catalog, 10, {query_idx});
    check_same(got, want);

    CHECK_THROWS_AS(similar_movies(vocabs, catalog, "zzz", 5), LookupError);
}

TEST_CASE("similar_movies over two movies returns the other one") {
    std::vector<RatingRecord> ratings{{"1", "10", 3.0, 0}, {"1", "20", 3.0, 0}};
    std::vector<MovieMeta> movies{{"10", "A", {"Drama"}, {}}, {"20", "B", {"Drama"}, {}}};
    const auto vocabs = build_vocabs(ratings, movies);
    const auto params = init(vocab_sizes(vocabs), content_config(), 45);
    const auto catalog = build_catalog(params, vocabs, movies);
    const auto got = similar_movies(vocabs, catalog, "10", 1);
    REQUIRE(got.size() == 1);
    CHECK(got[0].movie_id == "20");
}

}  // TEST_SUITE
