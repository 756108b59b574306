#pragma once

#include <string>
#include <vector>

#include "embrec/dataset.hpp"
#include "embrec/model.hpp"

namespace embrec {

/// A loaded model file: parameters, the vocabularies the embedding rows are
/// indexed by, and the provenance needed to re-derive the training split.
struct ModelFile {
    ModelParams params;
    Vocabs vocabs;
    SplitProvenance provenance;
};

/// Writes one UTF-8 JSON document with fixed key order and shortest
/// round-trip float encoding, so identical models produce identical bytes.
/// Non-finite weights are rejected.
void save(const ModelParams& params, const Vocabs& vocabs, const SplitProvenance& provenance,
          const std::string& path);

/// Reads a model file, validating the format tag, the version, and every
/// declared shape against the arrays behind it.
ModelFile load(const std::string& path);

enum class ExportKind { user, movie, genre, keyword, content };

/// Parses "user"/"movie"/"genre"/"keyword"/"content"; ArgumentError otherwise.
ExportKind parse_export_kind(const std::string& name);

/// Writes a TSV (header `token<TAB>v0<TAB>v1...`, values %.8g, LF endings)
/// of one embedding table, PAD and UNK rows omitted. ExportKind::content
/// writes the per-movie content vectors and needs the movie metadata.
void export_embeddings(const ModelParams& params, const Vocabs& vocabs, ExportKind kind,
                       const std::string& path,
                       const std::vector<MovieMeta>* movies = nullptr);

}  // namespace embrec
