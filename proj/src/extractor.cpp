#include "aopath/extractor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace aopath {

const char* to_string(PathwaySource s) {
    switch (s) {
        case PathwaySource::Audio: return "audio";
        case PathwaySource::Text: return "text";
        default: return "subtitle";
    }
}

PathwayFeatureSet top_k_labels(const Tensor& feature, const LabelDictionary& dict, std::size_t k,
                               PathwaySource source) {
    if (k == 0 || k > dict.size())
        throw ConfigError("top_k_labels: K=" + std::to_string(k) + " out of range for dictionary of " +
                          std::to_string(dict.size()));
    if (!all_finite(feature)) throw NumericError("top_k_labels: non-finite feature");
    if (feature.size() != dict.dim) throw DimensionError("top_k_labels: feature dim mismatch");

    const double fnorm = norm(feature);
    PathwayFeatureSet out;
    out.kind = dict.kind;
    out.source = source;
    out.zero_norm_input = (fnorm == 0.0);

    const bool have_norms = dict.norms.size() == dict.size();
    std::vector<std::pair<double, std::size_t>> sims(dict.size());
    for (std::size_t i = 0; i < dict.size(); ++i) {
        double s = 0.0;
        if (fnorm > 0.0) {
            auto r = dict.row(i);
            double d = 0.0;
            for (std::size_t j = 0; j < dict.dim; ++j) d += feature[j] * r[j];
            double rn;
            if (have_norms) {
                rn = dict.norms[i];
            } else {
                double sq = 0.0;
                for (std::size_t j = 0; j < dict.dim; ++j) sq += r[j] * r[j];
                rn = std::sqrt(sq);
            }
            s = d / (fnorm * rn);
        }
        sims[i] = {s, i};
    }
    // descending similarity, ascending index on ties
    auto cmp = [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    };
    std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k), sims.end(), cmp);

    out.vectors.reserve(k);
    out.label_ids.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        out.label_ids.push_back(sims[i].second);
        out.vectors.push_back(dict.row_tensor(sims[i].second));
    }
    return out;
}

ModalityPathways extract_modality_pathways(const Tensor& audio, const Tensor& text,
                                           const LabelDictionary& actions,
                                           const LabelDictionary& objects, std::size_t k) {
    return {
        top_k_labels(audio, actions, k, PathwaySource::Audio),
        top_k_labels(audio, objects, k, PathwaySource::Audio),
        top_k_labels(text, actions, k, PathwaySource::Text),
        top_k_labels(text, objects, k, PathwaySource::Text),
    };
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

SubtitleWords extract_subtitle_words(const std::string& subtitle, const LabelDictionary& actions,
                                     const LabelDictionary& objects) {
    SubtitleWords out;
    for (const auto& tok : tokenize(subtitle)) {
        if (actions.contains(tok)) out.verbs.push_back(tok);
        if (objects.contains(tok)) out.nouns.push_back(tok);
    }
    return out;
}

SubtitlePathways subtitle_pathways(const std::string& subtitle, const LabelDictionary& actions,
                                   const LabelDictionary& objects, const EmbeddingTable& table) {
    const SubtitleWords words = extract_subtitle_words(subtitle, actions, objects);
    SubtitlePathways out;
    out.action_seq = embed_tokens(words.verbs, table);
    out.object_seq = embed_tokens(words.nouns, table);
    if (out.action_seq.empty()) out.action_seq.emplace_back(std::vector<std::size_t>{table.dim});
    if (out.object_seq.empty()) out.object_seq.emplace_back(std::vector<std::size_t>{table.dim});
    return out;
}

}  // namespace aopath
