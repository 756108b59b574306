#include "embrec/store.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "embrec/errors.hpp"
#include "embrec/recommend.hpp"

namespace embrec {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kFormatTag = "embrec-model";
constexpr int kVersion = 1;

void check_finite(const std::vector<double>& values, const std::string& what) {
    for (const double v : values) {
        if (!std::isfinite(v)) {
            throw IntegrityError("save: non-finite value in " + what);
        }
    }
}

ordered_json matrix_json(std::size_t rows, std::size_t cols, const std::vector<double>& data,
                         const std::string& what) {
    check_finite(data, what);
    ordered_json j;
    j["rows"] = rows;
    j["cols"] = cols;
    j["data"] = data;
    return j;
}

ordered_json config_json(const ModelConfig& c) {
    ordered_json j;
    j["dim_user"] = c.dim_user;
    j["dim_movie"] = c.dim_movie;
    j["dim_cat"] = c.dim_cat;
    j["hidden_sizes"] = c.hidden_sizes;
    j["rating_min"] = c.rating_min;
    j["rating_max"] = c.rating_max;
    j["learning_rate"] = c.learning_rate;
    j["adam_beta1"] = c.adam_beta1;
    j["adam_beta2"] = c.adam_beta2;
    j["adam_eps"] = c.adam_eps;
    j["batch_size"] = c.batch_size;
    j["epochs"] = c.epochs;
    j["seed"] = c.seed;
    j["test_frac"] = c.test_frac;
    return j;
}

// --- load-side helpers -----------------------------------------------------

const ordered_json& require(const ordered_json& j, const char* key, const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end()) {
        throw IntegrityError("model file: missing field '" + std::string(key) + "' in " + where);
    }
    return *it;
}

EmbeddingTable table_from_json(const ordered_json& j, const std::string& what) {
    EmbeddingTable t;
    t.rows = require(j, "rows", what).get<std::size_t>();
    t.dim = require(j, "cols", what).get<std::size_t>();
    t.w = require(j, "data", what).get<std::vector<double>>();
    if (t.w.size() != t.rows * t.dim) {
        throw IntegrityError("model file: " + what + " declares " + std::to_string(t.rows) + "x" +
                             std::to_string(t.dim) + " but holds " + std::to_string(t.w.size()) +
                             " values");
    }
    return t;
}

DenseLayer layer_from_json(const ordered_json& j, const std::string& what) {
    const auto& wj = require(j, "weight", what);
    DenseLayer layer;
    layer.out_dim = require(wj, "rows", what).get<std::size_t>();
    layer.in_dim = require(wj, "cols", what).get<std::size_t>();
    layer.w = require(wj, "data", what).get<std::vector<double>>();
    layer.b = require(j, "bias", what).get<std::vector<double>>();
    if (layer.w.size() != layer.out_dim * layer.in_dim) {
        throw IntegrityError("model file: " + what + " weight declares " +
                             std::to_string(layer.out_dim) + "x" + std::to_string(layer.in_dim) +
                             " but holds " + std::to_string(layer.w.size()) + " values");
    }
    if (layer.b.size() != layer.out_dim) {
        throw IntegrityError("model file: " + what + " bias length " +
                             std::to_string(layer.b.size()) + " does not match out_dim " +
                             std::to_string(layer.out_dim));
    }
    return layer;
}

void rebuild_vocab(Vocab& vocab, const ordered_json& tokens, const std::string& what) {
    for (const auto& t : tokens) {
        vocab.add(t.get<std::string>());
    }
    if (vocab.size() != tokens.size() + 2) {
        throw IntegrityError("model file: duplicate tokens in " + what + " vocabulary");
    }
}

void check_vocab_rows(const Vocab& vocab, const EmbeddingTable& table, const std::string& what) {
    if (vocab.size() != table.rows) {
        throw IntegrityError("model file: " + what + " vocabulary has " +
                             std::to_string(vocab.size()) + " entries but the table has " +
                             std::to_string(table.rows) + " rows");
    }
}

}  // namespace

void save(const ModelParams& params, const Vocabs& vocabs, const SplitProvenance& provenance,
          const std::string& path) {
    ordered_json j;
    j["format_tag"] = kFormatTag;
    j["version"] = kVersion;
    j["config"] = config_json(params.config);

    ordered_json vj;
    vj["user"] = vocabs.user.tokens();
    vj["movie"] = vocabs.movie.tokens();
    vj["genre"] = vocabs.genre.tokens();
    vj["keyword"] = vocabs.keyword.tokens();
    j["vocabs"] = vj;

    ordered_json pj;
    pj["emb_user"] = matrix_json(params.emb_user.rows, params.emb_user.dim, params.emb_user.w,
                                 "emb_user");
    pj["emb_movie"] = matrix_json(params.emb_movie.rows, params.emb_movie.dim, params.emb_movie.w,
                                  "emb_movie");
    pj["emb_genre"] = matrix_json(params.emb_genre.rows, params.emb_genre.dim, params.emb_genre.w,
                                  "emb_genre");
    pj["emb_keyword"] = matrix_json(params.emb_keyword.rows, params.emb_keyword.dim,
                                    params.emb_keyword.w, "emb_keyword");
    ordered_json hidden = ordered_json::array();
    for (std::size_t l = 0; l < params.hidden.size(); ++l) {
        const auto& layer = params.hidden[l];
        ordered_json lj;
        lj["weight"] = matrix_json(layer.out_dim, layer.in_dim, layer.w,
                                   "hidden[" + std::to_string(l) + "].weight");
        check_finite(layer.b, "hidden[" + std::to_string(l) + "].bias");
        lj["bias"] = layer.b;
        hidden.push_back(std::move(lj));
    }
    pj["hidden"] = std::move(hidden);
    ordered_json oj;
    oj["weight"] = matrix_json(params.output.out_dim, params.output.in_dim, params.output.w,
                               "output.weight");
    check_finite(params.output.b, "output.bias");
    oj["bias"] = params.output.b;
    pj["output"] = std::move(oj);
    j["params"] = std::move(pj);

    ordered_json prov;
    prov["seed"] = provenance.seed;
    prov["test_frac"] = provenance.test_frac;
    prov["source_count"] = provenance.source_count;
    j["provenance"] = std::move(prov);

    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write file: " + path);
    }
    out << j.dump() << '\n';
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

ModelFile load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path);
    }
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError("model file: not valid JSON (" + std::string(e.what()) + ")");
    }

    if (!j.contains("format_tag") || j["format_tag"] != kFormatTag) {
        throw IntegrityError(path + ": not a model file");
    }
    const int version = require(j, "version", "document").get<int>();
    if (version != kVersion) {
        throw IntegrityError(path + ": unsupported version " + std::to_string(version));
    }

    ModelFile file;
    const auto& cj = require(j, "config", "document");
    ModelConfig& c = file.params.config;
    c.dim_user = require(cj, "dim_user", "config").get<std::size_t>();
    c.dim_movie = require(cj, "dim_movie", "config").get<std::size_t>();
    c.dim_cat = require(cj, "dim_cat", "config").get<std::size_t>();
    c.hidden_sizes = require(cj, "hidden_sizes", "config").get<std::vector<std::size_t>>();
    c.rating_min = require(cj, "rating_min", "config").get<double>();
    c.rating_max = require(cj, "rating_max", "config").get<double>();
    c.learning_rate = require(cj, "learning_rate", "config").get<double>();
    c.adam_beta1 = require(cj, "adam_beta1", "config").get<double>();
    c.adam_beta2 = require(cj, "adam_beta2", "config").get<double>();
    c.adam_eps = require(cj, "adam_eps", "config").get<double>();
    c.batch_size = require(cj, "batch_size", "config").get<std::size_t>();
    c.epochs = require(cj, "epochs", "config").get<std::size_t>();
    c.seed = require(cj, "seed", "config").get<std::uint64_t>();
    c.test_frac = require(cj, "test_frac", "config").get<double>();

    const auto& vj = require(j, "vocabs", "document");
    rebuild_vocab(file.vocabs.user, require(vj, "user", "vocabs"), "user");
    rebuild_vocab(file.vocabs.movie, require(vj, "movie", "vocabs"), "movie");
    rebuild_vocab(file.vocabs.genre, require(vj, "genre", "vocabs"), "genre");
    rebuild_vocab(file.vocabs.keyword, require(vj, "keyword", "vocabs"), "keyword");

    const auto& pj = require(j, "params", "document");
    file.params.emb_user = table_from_json(require(pj, "emb_user", "params"), "emb_user");
    file.params.emb_movie = table_from_json(require(pj, "emb_movie", "params"), "emb_movie");
    file.params.emb_genre = table_from_json(require(pj, "emb_genre", "params"), "emb_genre");
    file.params.emb_keyword = table_from_json(require(pj, "emb_keyword", "params"), "emb_keyword");
    const auto& hj = require(pj, "hidden", "params");
    for (std::size_t l = 0; l < hj.size(); ++l) {
        file.params.hidden.push_back(layer_from_json(hj[l], "hidden[" + std::to_string(l) + "]"));
    }
    file.params.output = layer_from_json(require(pj, "output", "params"), "output");

    check_vocab_rows(file.vocabs.user, file.params.emb_user, "user");
    check_vocab_rows(file.vocabs.movie, file.params.emb_movie, "movie");
    check_vocab_rows(file.vocabs.genre, file.params.emb_genre, "genre");
    check_vocab_rows(file.vocabs.keyword, file.params.emb_keyword, "keyword");

    // Embedding dims and the dense chain must agree with the config.
    const auto check_dim = [](std::size_t got, std::size_t want, const std::string& what) {
        if (got != want) {
            throw IntegrityError("model file: " + what + " has dim " + std::to_string(got) +
                                 " but the config says " + std::to_string(want));
        }
    };
    check_dim(file.params.emb_user.dim, c.dim_user, "emb_user");
    check_dim(file.params.emb_movie.dim, c.dim_movie, "emb_movie");
    check_dim(file.params.emb_genre.dim, c.dim_cat, "emb_genre");
    check_dim(file.params.emb_keyword.dim, c.dim_cat, "emb_keyword");
    if (file.params.hidden.size() != c.hidden_sizes.size()) {
        throw IntegrityError("model file: hidden layer count disagrees with the config");
    }
    std::size_t width = file.params.input_width();
    for (std::size_t l = 0; l < file.params.hidden.size(); ++l) {
        const auto& layer = file.params.hidden[l];
        const std::string what = "hidden[" + std::to_string(l) + "]";
        check_dim(layer.in_dim, width, what + " in_dim");
        check_dim(layer.out_dim, c.hidden_sizes[l], what + " out_dim");
        width = layer.out_dim;
    }
    check_dim(file.params.output.in_dim, width, "output in_dim");
    check_dim(file.params.output.out_dim, 1, "output out_dim");

    const auto& prov = require(j, "provenance", "document");
    file.provenance.seed = require(prov, "seed", "provenance").get<std::uint64_t>();
    file.provenance.test_frac = require(prov, "test_frac", "provenance").get<double>();
    file.provenance.source_count =
        require(prov, "source_count", "provenance").get<std::size_t>();
    return file;
}

ExportKind parse_export_kind(const std::string& name) {
    if (name == "user") return ExportKind::user;
    if (name == "movie") return ExportKind::movie;
    if (name == "genre") return ExportKind::genre;
    if (name == "keyword") return ExportKind::keyword;
    if (name == "content") return ExportKind::content;
    throw ArgumentError("unknown export kind '" + name +
                        "' (expected user|movie|genre|keyword|content)");
}

void export_embeddings(const ModelParams& params, const Vocabs& vocabs, ExportKind kind,
                       const std::string& path, const std::vector<MovieMeta>* movies) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write file: " + path);
    }

    const auto write_rows = [&](const std::vector<std::string>& tokens,
                                auto&& vector_for_token) {
        std::size_t dim = 0;
        if (!tokens.empty()) {
            dim = vector_for_token(0).size();
        }
        out << "token";
        for (std::size_t d = 0; d < dim; ++d) {
            out << "\tv" << d;
        }
        out << '\n';
        char buf[32];
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            out << tokens[i];
            for (const double v : vector_for_token(i)) {
                std::snprintf(buf, sizeof(buf), "%.8g", v);
                out << '\t' << buf;
            }
            out << '\n';
        }
    };

    switch (kind) {
    case ExportKind::user:
        write_rows(vocabs.user.tokens(),
                   [&](std::size_t i) { return lookup(params.emb_user, i + 2); });
        break;
    case ExportKind::movie:
        write_rows(vocabs.movie.tokens(),
                   [&](std::size_t i) { return lookup(params.emb_movie, i + 2); });
        break;
    case ExportKind::genre:
        write_rows(vocabs.genre.tokens(),
                   [&](std::size_t i) { return lookup(params.emb_genre, i + 2); });
        break;
    case ExportKind::keyword:
        write_rows(vocabs.keyword.tokens(),
                   [&](std::size_t i) { return lookup(params.emb_keyword, i + 2); });
        break;
    case ExportKind::content: {
        if (movies == nullptr) {
            throw ArgumentError("content export needs the movies file");
        }
        const auto catalog = build_catalog(params, vocabs, *movies);
        write_rows(vocabs.movie.tokens(), [&](std::size_t i) { return catalog[i].v; });
        break;
    }
    }

    if (!out) {
        throw IoError("write failed: " + path);
    }
}

}  // namespace embrec
