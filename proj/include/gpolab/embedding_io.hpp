#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "gpolab/linalg.hpp"

namespace gpolab::io {

/// EMB1 layout: "EMB1", u32 LE rows, u32 LE dim, rows*dim f32 LE row-major.
void write_emb1(const std::filesystem::path& path, const EmbeddingMatrix& m);
EmbeddingMatrix read_emb1(const std::filesystem::path& path);

/// One row per line, comma-separated components.
void write_embedding_csv(const std::filesystem::path& path, const EmbeddingMatrix& m);
EmbeddingMatrix read_embedding_csv(const std::filesystem::path& path);

/// Dispatches on the leading magic bytes: EMB1 binary, otherwise CSV.
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

/// LBL1 layout: "LBL1", u32 LE count, count i8 clean, count i8 noisy.
void write_lbl1(const std::filesystem::path& path, const SignVector& clean, const SignVector& noisy);
std::pair<SignVector, SignVector> read_lbl1(const std::filesystem::path& path);

/// LBL1 or a CSV with one label per line (first column used; +1/-1 or 1/0).
SignVector read_labels(const std::filesystem::path& path);

using KeyValues = std::map<std::string, std::string>;

void write_key_values(const std::filesystem::path& path, const KeyValues& kv);
KeyValues read_key_values(const std::filesystem::path& path);

}  // namespace gpolab::io
