#include "embrec/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "embrec/csv.hpp"
#include "embrec/errors.hpp"
#include "embrec/rng.hpp"

namespace embrec {

namespace {

constexpr const char* kRatingsHeader = "userId,movieId,rating,timestamp";
constexpr const char* kMoviesHeader = "movieId,title,genres";
constexpr const char* kTagsHeader = "userId,movieId,tag,timestamp";
constexpr const char* kNoGenres = "(no genres listed)";

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    const char* first = t.data();
    const char* last = t.data() + t.size();
    const auto result = std::from_chars(first, last, out);
    return result.ec == std::errc{} && result.ptr == last && !t.empty();
}

bool parse_int64(const std::string& s, std::int64_t& out) {
    const std::string t = trim(s);
    const char* first = t.data();
    const char* last = t.data() + t.size();
    const auto result = std::from_chars(first, last, out);
    return result.ec == std::errc{} && result.ptr == last && !t.empty();
}

void check_header(const CsvRecord& header, const char* expected, const std::string& path) {
    std::string joined;
    for (std::size_t i = 0; i < header.fields.size(); ++i) {
        if (i > 0) joined += ',';
        joined += trim(header.fields[i]);
    }
    if (joined != expected) {
        throw FormatError(path + ": expected header '" + std::string(expected) + "', found '" +
                          joined + "'");
    }
}

[[noreturn]] void row_error(const std::string& path, std::size_t line, const std::string& what) {
    std::ostringstream msg;
    msg << path << ": line " << line << ": " << what;
    throw FormatError(msg.str());
}

bool on_half_star_grid(double r) {
    if (r < 0.5 || r > 5.0) return false;
    const double doubled = r * 2.0;
    return std::abs(doubled - std::round(doubled)) < 1e-9;
}

std::vector<std::string> split_pipe(const std::string& s) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t bar = s.find('|', start);
        const std::size_t end = (bar == std::string::npos) ? s.size() : bar;
        const std::string token = trim(s.substr(start, end - start));
        if (!token.empty()) parts.push_back(token);
        if (bar == std::string::npos) break;
        start = bar + 1;
    }
    return parts;
}

}  // namespace

std::uint32_t Vocab::add(const std::string& token) {
    const auto it = index_.find(token);
    if (it != index_.end()) return it->second;
    const auto idx = static_cast<std::uint32_t>(tokens_.size() + 2);
    tokens_.push_back(token);
    index_.emplace(token, idx);
    return idx;
}

std::uint32_t Vocab::encode(const std::string& token) const {
    const auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::decode(std::uint32_t idx) const {
    if (idx < 2 || idx >= size()) {
        std::ostringstream msg;
        msg << name_ << " vocab: index " << idx << " has no token (valid range 2.." << size() - 1
            << ")";
        throw IndexError(msg.str());
    }
    return tokens_[idx - 2];
}

std::vector<RatingRecord> parse_ratings(const std::string& path) {
    const auto records = read_csv(path);
    if (records.empty()) {
        throw FormatError(path + ": expected header '" + std::string(kRatingsHeader) +
                          "', found empty file");
    }
    check_header(records.front(), kRatingsHeader, path);

    std::vector<RatingRecord> out;
    out.reserve(records.size() - 1);
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (rec.fields.size() < 3 || rec.fields.size() > 4) {
            row_error(path, rec.line, "expected 4 fields, found " +
                                          std::to_string(rec.fields.size()));
        }
        RatingRecord r;
        r.user_id = trim(rec.fields[0]);
        r.movie_id = trim(rec.fields[1]);
        if (r.user_id.empty() || r.movie_id.empty()) {
            row_error(path, rec.line, "empty userId or movieId");
        }
        if (!parse_double(rec.fields[2], r.rating)) {
            row_error(path, rec.line, "non-numeric rating '" + trim(rec.fields[2]) + "'");
        }
        if (!on_half_star_grid(r.rating)) {
            row_error(path, rec.line,
                      "rating " + trim(rec.fields[2]) + " not on the half-star grid [0.5, 5.0]");
        }
        if (rec.fields.size() == 4 && !trim(rec.fields[3]).empty()) {
            if (!parse_int64(rec.fields[3], r.timestamp)) {
                row_error(path, rec.line, "non-integer timestamp '" + trim(rec.fields[3]) + "'");
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

MoviesResult parse_movies(const std::string& movies_path,
                          const std::optional<std::string>& tags_path) {
    const auto records = read_csv(movies_path);
    if (records.empty()) {
        throw FormatError(movies_path + ": expected header '" + std::string(kMoviesHeader) +
                          "', found empty file");
    }
    check_header(records.front(), kMoviesHeader, movies_path);

    MoviesResult result;
    result.movies.reserve(records.size() - 1);
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (rec.fields.size() != 3) {
            row_error(movies_path, rec.line,
                      "expected 3 fields, found " + std::to_string(rec.fields.size()));
        }
        MovieMeta meta;
        meta.movie_id = trim(rec.fields[0]);
        if (meta.movie_id.empty()) {
            row_error(movies_path, rec.line, "empty movieId");
        }
        meta.title = rec.fields[1];
        const std::string genres = trim(rec.fields[2]);
        if (genres != kNoGenres) {
            meta.genres = split_pipe(genres);
        }
        by_id.emplace(meta.movie_id, result.movies.size());
        result.movies.push_back(std::move(meta));
    }

    if (!tags_path) {
        return result;
    }

    const auto tag_records = read_csv(*tags_path);
    if (tag_records.empty()) {
        throw FormatError(*tags_path + ": expected header '" + std::string(kTagsHeader) +
                          "', found empty file");
    }
    check_header(tag_records.front(), kTagsHeader, *tags_path);

    // Global tag frequencies plus per-movie distinct tag sets.
    std::unordered_map<std::string, std::size_t> frequency;
    std::vector<std::vector<std::string>> movie_tags(result.movies.size());
    for (std::size_t i = 1; i < tag_records.size(); ++i) {
        const auto& rec = tag_records[i];
        if (rec.fields.size() < 3 || rec.fields.size() > 4) {
            row_error(*tags_path, rec.line,
                      "expected 4 fields, found " + std::to_string(rec.fields.size()));
        }
        const std::string movie_id = trim(rec.fields[1]);
        const std::string tag = to_lower(trim(rec.fields[2]));
        if (tag.empty()) continue;
        const auto it = by_id.find(movie_id);
        if (it == by_id.end()) {
            ++result.unknown_tag_rows;
            continue;
        }
        ++frequency[tag];
        auto& tags = movie_tags[it->second];
        if (std::find(tags.begin(), tags.end(), tag) == tags.end()) {
            tags.push_back(tag);
        }
    }

    for (std::size_t m = 0; m < result.movies.size(); ++m) {
        auto& tags = movie_tags[m];
        std::sort(tags.begin(), tags.end(), [&](const std::string& a, const std::string& b) {
            const std::size_t fa = frequency.at(a);
            const std::size_t fb = frequency.at(b);
            if (fa != fb) return fa > fb;
            return a < b;
        });
        result.movies[m].keywords = std::move(tags);
    }
    return result;
}

Vocabs build_vocabs(const std::vector<RatingRecord>& ratings,
                    const std::vector<MovieMeta>& movies) {
    Vocabs vocabs;
    for (const auto& r : ratings) {
        vocabs.user.add(r.user_id);
        vocabs.movie.add(r.movie_id);
    }
    for (const auto& m : movies) {
        for (const auto& g : m.genres) vocabs.genre.add(g);
        for (const auto& k : m.keywords) vocabs.keyword.add(k);
    }
    return vocabs;
}

EncodedExample encode(const RatingRecord& record, const MovieMeta& meta, const Vocabs& vocabs) {
    if (record.movie_id != meta.movie_id) {
        throw ArgumentError("encode: metadata for movie '" + meta.movie_id +
                            "' does not match rating for movie '" + record.movie_id + "'");
    }
    EncodedExample ex;
    ex.user_idx = vocabs.user.encode(record.user_id);
    ex.movie_idx = vocabs.movie.encode(record.movie_id);
    ex.genre1_idx = meta.genres.size() > 0 ? vocabs.genre.encode(meta.genres[0]) : Vocab::kPad;
    ex.genre2_idx = meta.genres.size() > 1 ? vocabs.genre.encode(meta.genres[1]) : Vocab::kPad;
    ex.kw1_idx = meta.keywords.size() > 0 ? vocabs.keyword.encode(meta.keywords[0]) : Vocab::kPad;
    ex.kw2_idx = meta.keywords.size() > 1 ? vocabs.keyword.encode(meta.keywords[1]) : Vocab::kPad;
    ex.target = record.rating;
    return ex;
}

std::vector<EncodedExample> encode_all(const std::vector<RatingRecord>& ratings,
                                       const std::vector<MovieMeta>& movies,
                                       const Vocabs& vocabs) {
    const auto by_id = movie_index(movies);
    std::vector<EncodedExample> out;
    out.reserve(ratings.size());
    for (const auto& r : ratings) {
        const auto it = by_id.find(r.movie_id);
        if (it == by_id.end()) {
            throw LookupError("movie '" + r.movie_id + "' has no entry in the movies file");
        }
        out.push_back(encode(r, movies[it->second], vocabs));
    }
    return out;
}

DatasetSplit split(const std::vector<EncodedExample>& examples, double test_frac,
                   std::uint64_t seed) {
    if (!(test_frac > 0.0 && test_frac < 1.0)) {
        throw ArgumentError("split: test_frac must lie in (0, 1), got " +
                            std::to_string(test_frac));
    }
    if (examples.size() < 2) {
        throw ArgumentError("split: need at least 2 examples, got " +
                            std::to_string(examples.size()));
    }
    std::vector<EncodedExample> shuffled = examples;
    Rng rng(seed);
    rng.shuffle(shuffled);

    const auto n = shuffled.size();
    const auto test_count = static_cast<std::size_t>(
        std::llround(test_frac * static_cast<double>(n)));

    DatasetSplit out;
    out.seed = seed;
    out.test_frac = test_frac;
    out.source_count = n;
    out.train.assign(shuffled.begin(), shuffled.end() - static_cast<std::ptrdiff_t>(test_count));
    out.test.assign(shuffled.end() - static_cast<std::ptrdiff_t>(test_count), shuffled.end());
    return out;
}

DatasetSummary dataset_summary(const std::vector<RatingRecord>& ratings,
                               const std::vector<MovieMeta>& movies) {
    DatasetSummary s;
    s.entries = ratings.size();
    s.catalog_movies = movies.size();
    std::unordered_map<std::string, bool> seen_users;
    std::unordered_map<std::string, bool> seen_movies;
    for (const auto& r : ratings) {
        seen_users.emplace(r.user_id, true);
        seen_movies.emplace(r.movie_id, true);
    }
    s.unique_users = seen_users.size();
    s.unique_movies = seen_movies.size();
    return s;
}

std::unordered_map<std::string, std::size_t> movie_index(const std::vector<MovieMeta>& movies) {
    std::unordered_map<std::string, std::size_t> by_id;
    by_id.reserve(movies.size());
    for (std::size_t i = 0; i < movies.size(); ++i) {
        by_id.emplace(movies[i].movie_id, i);
    }
    return by_id;
}

}  // namespace embrec
