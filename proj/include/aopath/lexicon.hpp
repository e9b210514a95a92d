#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "aopath/tensor.hpp"

namespace aopath {

// Token -> 768-vector lookup standing in for the pretrained BPE table.
// Binary format: text header "aopath-embeddings <vocab> <dim>", then per
// row a token line followed by dim little-endian doubles.
struct EmbeddingTable {
    std::size_t dim = 768;
    std::vector<std::string> tokens;
    std::unordered_map<std::string, std::size_t> vocab;
    std::vector<double> vectors;  // vocab_size x dim

    std::size_t size() const { return tokens.size(); }

    std::span<const double> row(std::size_t i) const {
        return {vectors.data() + i * dim, dim};
    }

    std::optional<std::size_t> lookup(const std::string& token) const;

    static EmbeddingTable load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    // Seeded Gaussian rows (unit-variance entries); the stand-in for the real BPE table.
    static EmbeddingTable synthetic(std::vector<std::string> toks, std::size_t dim,
                                    std::uint64_t seed);
};

enum class LabelKind { Action, Object };

const char* to_string(LabelKind k);

// Ordered label set with precomputed embeddings. Multi-token labels are
// embedded as the mean of their token rows.
struct LabelDictionary {
    LabelKind kind = LabelKind::Action;
    std::size_t dim = 768;
    std::vector<std::string> labels;
    std::vector<double> embeddings;  // num_labels x dim
    std::vector<double> norms;       // per-row euclidean norms, for retrieval
    std::unordered_set<std::string> label_set;

    std::size_t size() const { return labels.size(); }

    std::span<const double> row(std::size_t i) const {
        return {embeddings.data() + i * dim, dim};
    }

    Tensor row_tensor(std::size_t i) const;

    bool contains(const std::string& token) const { return label_set.count(token) > 0; }

    static LabelDictionary from_labels(std::vector<std::string> labels, LabelKind kind,
                                       const EmbeddingTable& table);
    // One label per line, UTF-8, '#' comments. Labels are lowercased and
    // trimmed; duplicates are a load error.
    static LabelDictionary load(const std::filesystem::path& path, LabelKind kind,
                                const EmbeddingTable& table);
    void save_labels(const std::filesystem::path& path) const;
};

// Mean of the label's token rows; case-insensitive. Throws DataError on a
// token missing from the vocabulary.
Tensor embed_label(const std::string& label, const EmbeddingTable& table);

// Per-word embed_label, order preserved; unknown words are skipped and
// counted rather than raised.
std::vector<Tensor> embed_tokens(std::span<const std::string> words, const EmbeddingTable& table,
                                 std::size_t* skipped = nullptr);

std::string to_lower(std::string s);

// Everything the model needs from the language side.
struct Lexicon {
    EmbeddingTable table;
    LabelDictionary actions;
    LabelDictionary objects;
};

}  // namespace aopath
