#include "aopath/lexicon.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "aopath/rng.hpp"

namespace aopath {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_words(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream iss(s);
    std::string w;
    while (iss >> w) out.push_back(w);
    return out;
}

}  // namespace

std::string to_lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

const char* to_string(LabelKind k) {
    return k == LabelKind::Action ? "action" : "object";
}

std::optional<std::size_t> EmbeddingTable::lookup(const std::string& token) const {
    auto it = vocab.find(token);
    if (it == vocab.end()) return std::nullopt;
    return it->second;
}

EmbeddingTable EmbeddingTable::synthetic(std::vector<std::string> toks, std::size_t dim,
                                         std::uint64_t seed) {
    EmbeddingTable t;
    t.dim = dim;
    t.tokens = std::move(toks);
    t.vectors.resize(t.tokens.size() * dim);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < t.tokens.size(); ++i) {
        // plain unit-variance Gaussian entries (row norm ~ sqrt(dim)): retrieval
        // is cosine-based so row scale is irrelevant there, while downstream
        // projections of these rows land at O(1) instead of O(1/sqrt(dim))
        double* r = t.vectors.data() + i * dim;
        for (std::size_t j = 0; j < dim; ++j) r[j] = gaussian(rng);
        if (!t.vocab.emplace(t.tokens[i], i).second)
            throw DataError("synthetic embedding table: duplicate token '" + t.tokens[i] + "'");
    }
    return t;
}

void EmbeddingTable::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for write: " + path.string());
    out << "aopath-embeddings " << tokens.size() << " " << dim << "\n";
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        out << tokens[i] << "\n";
        out.write(reinterpret_cast<const char*>(vectors.data() + i * dim),
                  static_cast<std::streamsize>(dim * sizeof(double)));
    }
    if (!out) throw IoError("write failed: " + path.string());
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::string magic;
    std::size_t n = 0, d = 0;
    in >> magic >> n >> d;
    if (magic != "aopath-embeddings" || !in)
        throw IoError("bad embedding table header: " + path.string());
    in.ignore(1);  // newline
    EmbeddingTable t;
    t.dim = d;
    t.tokens.reserve(n);
    t.vectors.resize(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        std::string tok;
        if (!std::getline(in, tok)) throw IoError("truncated embedding table: " + path.string());
        in.read(reinterpret_cast<char*>(t.vectors.data() + i * d),
                static_cast<std::streamsize>(d * sizeof(double)));
        if (!in) throw IoError("truncated embedding table: " + path.string());
        if (!t.vocab.emplace(tok, i).second)
            throw DataError("embedding table: duplicate token '" + tok + "'");
        t.tokens.push_back(std::move(tok));
    }
    return t;
}

Tensor embed_label(const std::string& label, const EmbeddingTable& table) {
    const std::string lowered = to_lower(trim(label));
    if (lowered.empty()) throw DataError("embed_label: empty label");
    const auto words = split_words(lowered);
    Tensor acc({table.dim}, 0.0);
    for (const auto& w : words) {
        auto idx = table.lookup(w);
        if (!idx)
            throw DataError("embed_label: token '" + w + "' of label '" + label +
                            "' not in vocabulary");
        auto r = table.row(*idx);
        for (std::size_t j = 0; j < table.dim; ++j) acc[j] += r[j];
    }
    const double inv = 1.0 / static_cast<double>(words.size());
    for (double& v : acc.data) v *= inv;
    return acc;
}

std::vector<Tensor> embed_tokens(std::span<const std::string> words, const EmbeddingTable& table,
                                 std::size_t* skipped) {
    std::vector<Tensor> out;
    std::size_t skip = 0;
    for (const auto& w : words) {
        auto idx = table.lookup(to_lower(w));
        if (!idx) {
            ++skip;
            continue;
        }
        Tensor t({table.dim});
        auto r = table.row(*idx);
        std::copy(r.begin(), r.end(), t.data.begin());
        out.push_back(std::move(t));
    }
    if (skipped) *skipped = skip;
    return out;
}

Tensor LabelDictionary::row_tensor(std::size_t i) const {
    Tensor t({dim});
    auto r = row(i);
    std::copy(r.begin(), r.end(), t.data.begin());
    return t;
}

LabelDictionary LabelDictionary::from_labels(std::vector<std::string> raw, LabelKind kind,
                                             const EmbeddingTable& table) {
    LabelDictionary d;
    d.kind = kind;
    d.dim = table.dim;
    d.labels.reserve(raw.size());
    d.embeddings.reserve(raw.size() * table.dim);
    for (auto& l : raw) {
        std::string label = to_lower(trim(l));
        if (label.empty()) continue;
        if (!d.label_set.insert(label).second)
            throw DataError(std::string(to_string(kind)) + " dictionary: duplicate label '" +
                            label + "'");
        Tensor e = embed_label(label, table);
        if (norm(e) == 0.0)
            throw DataError(std::string(to_string(kind)) + " dictionary: zero-norm embedding for '" +
                            label + "'");
        if (!all_finite(e))
            throw DataError(std::string(to_string(kind)) + " dictionary: non-finite embedding for '" +
                            label + "'");
        d.labels.push_back(std::move(label));
        d.embeddings.insert(d.embeddings.end(), e.data.begin(), e.data.end());
        d.norms.push_back(norm(e));
    }
    return d;
}

LabelDictionary LabelDictionary::load(const std::filesystem::path& path, LabelKind kind,
                                      const EmbeddingTable& table) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dictionary: " + path.string());
    std::vector<std::string> raw;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (!line.empty()) raw.push_back(line);
    }
    return from_labels(std::move(raw), kind, table);
}

void LabelDictionary::save_labels(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path.string());
    for (const auto& l : labels) out << l << "\n";
}

}  // namespace aopath
