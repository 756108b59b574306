#include "embrec/cli.hpp"

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "embrec/dataset.hpp"
#include "embrec/errors.hpp"
#include "embrec/model.hpp"
#include "embrec/recommend.hpp"
#include "embrec/store.hpp"
#include "embrec/training.hpp"

namespace embrec {

namespace {

struct TrainArgs {
    std::string ratings;
    std::string movies;
    std::string tags;
    std::string out;
    ModelConfig config;
    std::size_t patience = 0;
    bool has_patience = false;
    bool has_tags = false;
};

struct EvaluateArgs {
    std::string model;
    std::string ratings;
    std::string movies;
    std::string tags;
    bool has_tags = false;
};

struct RecommendArgs {
    std::string model;
    std::string ratings;
    std::string movies;
    std::string tags;
    std::string user;
    std::size_t k = 10;
    double min_rating = 4.0;
    bool has_tags = false;
};

struct SimilarArgs {
    std::string model;
    std::string movies;
    std::string tags;
    std::string movie;
    std::size_t k = 10;
    bool has_tags = false;
};

struct ExportArgs {
    std::string model;
    std::string what;
    std::string out;
    std::string movies;
    std::string tags;
    bool has_movies = false;
    bool has_tags = false;
};

std::optional<std::string> maybe(const std::string& value, bool present) {
    if (present) {
        return value;
    }
    return std::nullopt;
}

std::string format_score(double score) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", score);
    return buf;
}

void print_recommendations(const std::vector<Recommendation>& recs,
                           const std::vector<MovieMeta>& movies) {
    const auto by_id = movie_index(movies);
    for (const auto& rec : recs) {
        const std::string& title = movies[by_id.at(rec.movie_id)].title;
        std::cout << rec.rank << '\t' << rec.movie_id << '\t' << title << '\t'
                  << format_score(rec.score) << '\n';
    }
}

void warn_unknown_tags(std::size_t rows) {
    if (rows > 0) {
        std::cerr << "warning: " << rows
                  << " tag row(s) name movies absent from the movies file\n";
    }
}

int run_train(const TrainArgs& args) {
    validate(args.config);
    const auto result = fit(args.ratings, args.movies, maybe(args.tags, args.has_tags),
                            args.config,
                            args.has_patience ? std::optional<std::size_t>(args.patience)
                                              : std::nullopt,
                            &std::cerr);
    const DatasetSummary& s = result.summary;
    std::cerr << "ratings=" << s.entries << " users=" << s.unique_users
              << " movies=" << s.unique_movies << " catalog=" << s.catalog_movies << '\n';
    warn_unknown_tags(result.unknown_tag_rows);
    save(result.params, result.vocabs, result.provenance, args.out);
    std::cerr << "model written to " << args.out << '\n';
    return 0;
}

/// Shared front half of evaluate/recommend: load the model, re-encode the
/// ratings against its vocabularies, and re-derive the train/test split
/// from the stored provenance.
DatasetSplit rebuild_split(const ModelFile& file, const std::vector<RatingRecord>& ratings,
                           const std::vector<MovieMeta>& movies) {
    if (ratings.size() != file.provenance.source_count) {
        std::cerr << "warning: ratings file has " << ratings.size()
                  << " rows but the model was trained on " << file.provenance.source_count
                  << "; the re-derived split may not match\n";
    }
    const auto encoded = encode_all(ratings, movies, file.vocabs);
    return split(encoded, file.provenance.test_frac, file.provenance.seed);
}

int run_evaluate(const EvaluateArgs& args) {
    const ModelFile file = load(args.model);
    const auto ratings = parse_ratings(args.ratings);
    const auto movies = parse_movies(args.movies, maybe(args.tags, args.has_tags));
    warn_unknown_tags(movies.unknown_tag_rows);
    const auto held_out = rebuild_split(file, ratings, movies.movies);
    const Metrics m = evaluate(file.params, held_out.test);
    char line[160];
    std::snprintf(line, sizeof(line), "mse=%.6f rmse=%.6f mae=%.6f n=%zu", m.mse, m.rmse,
                  m.mae, m.count);
    std::cout << line << '\n';
    return 0;
}

int run_recommend(const RecommendArgs& args) {
    const ModelFile file = load(args.model);
    const auto ratings = parse_ratings(args.ratings);
    const auto movies = parse_movies(args.movies, maybe(args.tags, args.has_tags));
    warn_unknown_tags(movies.unknown_tag_rows);
    const auto held_out = rebuild_split(file, ratings, movies.movies);
    const auto catalog = build_catalog(file.params, file.vocabs, movies.movies);
    const auto recs = recommend_for_user(file.params, file.vocabs, held_out.train, catalog,
                                         args.user, args.k, args.min_rating);
    print_recommendations(recs, movies.movies);
    return 0;
}

int run_similar(const SimilarArgs& args) {
    const ModelFile file = load(args.model);
    const auto movies = parse_movies(args.movies, maybe(args.tags, args.has_tags));
    warn_unknown_tags(movies.unknown_tag_rows);
    const auto catalog = build_catalog(file.params, file.vocabs, movies.movies);
    const auto recs = similar_movies(file.vocabs, catalog, args.movie, args.k);
    print_recommendations(recs, movies.movies);
    return 0;
}

int run_export(const ExportArgs& args) {
    const ModelFile file = load(args.model);
    const ExportKind kind = parse_export_kind(args.what);
    if (kind == ExportKind::content) {
        const auto movies = parse_movies(args.movies, maybe(args.tags, args.has_tags));
        warn_unknown_tags(movies.unknown_tag_rows);
        export_embeddings(file.params, file.vocabs, kind, args.out, &movies.movies);
    } else {
        export_embeddings(file.params, file.vocabs, kind, args.out);
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"embrec: content-based movie recommendations from entity embeddings"};
    app.require_subcommand(1);

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand(
        "train", "Fit a rating model on a ratings/movies corpus and write the model file");
    train_cmd->add_option("--ratings", train_args.ratings, "ratings.csv path")->required();
    train_cmd->add_option("--movies", train_args.movies, "movies.csv path")->required();
    train_cmd->add_option("--tags", train_args.tags, "tags.csv path (keyword source)");
    train_cmd->add_option("--out", train_args.out, "output model path")->required();
    ModelConfig& c = train_args.config;
    train_cmd->add_option("--dim-user", c.dim_user, "user embedding width")
        ->capture_default_str();
    train_cmd->add_option("--dim-movie", c.dim_movie, "movie embedding width")
        ->capture_default_str();
    train_cmd->add_option("--dim-cat", c.dim_cat, "genre/keyword embedding width")
        ->capture_default_str();
    train_cmd->add_option("--hidden", c.hidden_sizes, "hidden layer widths, e.g. 64,32")
        ->delimiter(',')
        ->capture_default_str();
    train_cmd->add_option("--epochs", c.epochs, "training epochs")->capture_default_str();
    train_cmd->add_option("--lr", c.learning_rate, "Adam learning rate")
        ->capture_default_str();
    train_cmd->add_option("--batch", c.batch_size, "minibatch size")->capture_default_str();
    train_cmd->add_option("--test-frac", c.test_frac, "held-out fraction")
        ->capture_default_str();
    train_cmd->add_option("--seed", c.seed, "RNG seed for init/split/shuffles")
        ->capture_default_str();
    train_cmd->add_option("--patience", train_args.patience,
                          "stop after N epochs without test-RMSE improvement");

    EvaluateArgs eval_args;
    auto* eval_cmd = app.add_subcommand(
        "evaluate", "Score a saved model on the held-out split it was trained with");
    eval_cmd->add_option("--model", eval_args.model, "model file path")->required();
    eval_cmd->add_option("--ratings", eval_args.ratings, "ratings.csv path")->required();
    eval_cmd->add_option("--movies", eval_args.movies, "movies.csv path")->required();
    eval_cmd->add_option("--tags", eval_args.tags, "tags.csv path");

    RecommendArgs rec_args;
    auto* rec_cmd =
        app.add_subcommand("recommend", "Top-k recommendations for one user's taste");
    rec_cmd->add_option("--model", rec_args.model, "model file path")->required();
    rec_cmd->add_option("--ratings", rec_args.ratings, "ratings.csv path")->required();
    rec_cmd->add_option("--movies", rec_args.movies, "movies.csv path")->required();
    rec_cmd->add_option("--tags", rec_args.tags, "tags.csv path");
    rec_cmd->add_option("--user", rec_args.user, "user id")->required();
    rec_cmd->add_option("--k", rec_args.k, "list length")->capture_default_str();
    rec_cmd->add_option("--min-rating", rec_args.min_rating, "taste threshold")
        ->capture_default_str();

    SimilarArgs sim_args;
    auto* sim_cmd =
        app.add_subcommand("similar", "Movies closest to one movie's content vector");
    sim_cmd->add_option("--model", sim_args.model, "model file path")->required();
    sim_cmd->add_option("--movies", sim_args.movies, "movies.csv path")->required();
    sim_cmd->add_option("--tags", sim_args.tags, "tags.csv path");
    sim_cmd->add_option("--movie", sim_args.movie, "movie id")->required();
    sim_cmd->add_option("--k", sim_args.k, "list length")->capture_default_str();

    ExportArgs export_args;
    auto* export_cmd = app.add_subcommand("export", "Write one embedding family as TSV");
    export_cmd->add_option("--model", export_args.model, "model file path")->required();
    export_cmd
        ->add_option("--what", export_args.what, "user|movie|genre|keyword|content")
        ->required()
        ->check(CLI::IsMember({"user", "movie", "genre", "keyword", "content"}));
    export_cmd->add_option("--out", export_args.out, "output TSV path")->required();
    export_cmd->add_option("--movies", export_args.movies,
                           "movies.csv path (required for --what content)");
    export_cmd->add_option("--tags", export_args.tags, "tags.csv path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        const CLI::App* target = &app;
        while (!target->get_subcommands().empty()) {
            target = target->get_subcommands().front();
        }
        std::cout << target->help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    train_args.has_patience = train_cmd->count("--patience") > 0;
    train_args.has_tags = train_cmd->count("--tags") > 0;
    eval_args.has_tags = eval_cmd->count("--tags") > 0;
    rec_args.has_tags = rec_cmd->count("--tags") > 0;
    sim_args.has_tags = sim_cmd->count("--tags") > 0;
    export_args.has_movies = export_cmd->count("--movies") > 0;
    export_args.has_tags = export_cmd->count("--tags") > 0;

    if (export_cmd->parsed() && export_args.what == "content" && !export_args.has_movies) {
        std::cerr << "error: --what content requires --movies\n\n" << export_cmd->help();
        return 2;
    }

    try {
        if (train_cmd->parsed()) {
            return run_train(train_args);
        }
        if (eval_cmd->parsed()) {
            return run_evaluate(eval_args);
        }
        if (rec_cmd->parsed()) {
            return run_recommend(rec_args);
        }
        if (sim_cmd->parsed()) {
            return run_similar(sim_args);
        }
        if (export_cmd->parsed()) {
            return run_export(export_args);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;  // unreachable with require_subcommand(1)
}

}  // namespace embrec
