#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace embrec {

/// One row of a MovieLens-style ratings file. Identifiers are kept as the
/// opaque tokens found in the file; ratings live on the half-star grid
/// [0.5, 5.0].
struct RatingRecord {
    std::string user_id;
    std::string movie_id;
    double rating = 0.0;
    std::int64_t timestamp = 0;  // carried, unused by the model
};

/// Movie metadata: title, ordered genres, and keywords derived from tags.
struct MovieMeta {
    std::string movie_id;
    std::string title;
    std::vector<std::string> genres;    // trimmed, possibly empty
    std::vector<std::string> keywords;  // lowercased, frequency-ordered
};

/// Token <-> index map with two reserved rows: index 0 is PAD (missing
/// slot), index 1 is UNK (unseen token). Real tokens occupy 2..size()-1 in
/// insertion order.
class Vocab {
public:
    static constexpr std::uint32_t kPad = 0;
    static constexpr std::uint32_t kUnk = 1;

    explicit Vocab(std::string name) : name_(std::move(name)) {}

    /// Inserts the token if new; returns its index either way.
    std::uint32_t add(const std::string& token);

    /// Index of an in-vocab token, kUnk otherwise.
    std::uint32_t encode(const std::string& token) const;

    /// Token at index (valid for 2 <= idx < size()); throws IndexError.
    const std::string& decode(std::uint32_t idx) const;

    bool contains(const std::string& token) const { return index_.count(token) != 0; }

    /// Cardinality including the PAD and UNK rows.
    std::size_t size() const { return tokens_.size() + 2; }

    /// Real tokens only; tokens()[i] sits at index i + 2.
    const std::vector<std::string>& tokens() const { return tokens_; }

    const std::string& name() const { return name_; }

private:
    std::string name_;
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

struct Vocabs {
    Vocab user{"user"};
    Vocab movie{"movie"};
    Vocab genre{"genre"};
    Vocab keyword{"keyword"};
};

/// One encoded training row: six vocabulary indices plus the target rating.
struct EncodedExample {
    std::uint32_t user_idx = 0;
    std::uint32_t movie_idx = 0;
    std::uint32_t genre1_idx = 0;
    std::uint32_t genre2_idx = 0;
    std::uint32_t kw1_idx = 0;
    std::uint32_t kw2_idx = 0;
    double target = 0.0;
};

struct DatasetSplit {
    std::vector<EncodedExample> train;
    std::vector<EncodedExample> test;
    std::uint64_t seed = 0;
    double test_frac = 0.0;
    std::size_t source_count = 0;
};

/// Everything needed to re-derive a DatasetSplit from the original ratings
/// file: stored in the model file at save time.
struct SplitProvenance {
    std::uint64_t seed = 0;
    double test_frac = 0.0;
    std::size_t source_count = 0;
};

struct DatasetSummary {
    std::size_t entries = 0;
    std::size_t unique_movies = 0;  // distinct movie ids among the ratings
    std::size_t unique_users = 0;
    std::size_t catalog_movies = 0;  // rows in the movies file
};

struct MoviesResult {
    std::vector<MovieMeta> movies;
    std::size_t unknown_tag_rows = 0;  // tag rows naming movies not in the movies file
};

/// Parses `ratings.csv` (header userId,movieId,rating,timestamp). Rows must
/// carry a rating on the half-star grid in [0.5, 5.0]; violations raise
/// FormatError with the offending line number.
std::vector<RatingRecord> parse_ratings(const std::string& path);

/// Parses `movies.csv` (header movieId,title,genres; genres pipe-separated,
/// "(no genres listed)" meaning none) and, when given, `tags.csv` (header
/// userId,movieId,tag,timestamp). Keywords are the movie's distinct tags,
/// lowercased, ordered by descending frequency across the whole tags file,
/// ties broken lexicographically. Tag rows naming unknown movies are
/// skipped and counted.
MoviesResult parse_movies(const std::string& movies_path,
                          const std::optional<std::string>& tags_path = std::nullopt);

/// Builds the four vocabularies: users and movies in first-appearance order
/// over the ratings, genres and keywords in first-appearance order over the
/// movies list. Deterministic for fixed inputs.
Vocabs build_vocabs(const std::vector<RatingRecord>& ratings,
                    const std::vector<MovieMeta>& movies);

/// Encodes one rating against its movie's metadata: first two genres and
/// first two keywords (PAD-filled when fewer), unknown tokens mapping to
/// UNK. `meta` must describe `record.movie_id`.
EncodedExample encode(const RatingRecord& record, const MovieMeta& meta, const Vocabs& vocabs);

/// Encodes every rating, joining each to its movie's metadata. A rating
/// whose movie has no metadata raises LookupError naming the movie.
std::vector<EncodedExample> encode_all(const std::vector<RatingRecord>& ratings,
                                       const std::vector<MovieMeta>& movies,
                                       const Vocabs& vocabs);

/// Shuffles the examples with Rng(seed) (see rng.hpp) and sends the last
/// round(test_frac * N) of the shuffled order to the test side.
DatasetSplit split(const std::vector<EncodedExample>& examples, double test_frac,
                   std::uint64_t seed);

DatasetSummary dataset_summary(const std::vector<RatingRecord>& ratings,
                               const std::vector<MovieMeta>& movies);

/// movie_id -> position in `movies`.
std::unordered_map<std::string, std::size_t> movie_index(const std::vector<MovieMeta>& movies);

}  // namespace embrec
