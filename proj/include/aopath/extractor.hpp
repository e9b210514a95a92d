#pragma once

#include <string>
#include <vector>

#include "aopath/lexicon.hpp"
#include "aopath/tensor.hpp"

namespace aopath {

enum class PathwaySource { Audio, Text, Subtitle };

const char* to_string(PathwaySource s);

// Output of the dissociation step. The vectors are dictionary embeddings
// (or subtitle token embeddings) and carry no gradient; nothing in this
// module is trainable.
struct PathwayFeatureSet {
    LabelKind kind = LabelKind::Action;
    PathwaySource source = PathwaySource::Audio;
    std::vector<Tensor> vectors;
    std::vector<std::size_t> label_ids;  // empty for subtitle source
    bool zero_norm_input = false;
};

// The K dictionary labels most cosine-similar to the feature, descending,
// ties broken by ascending dictionary index. A zero-norm feature returns
// the first K labels by index with zero_norm_input set.
PathwayFeatureSet top_k_labels(const Tensor& feature, const LabelDictionary& dict, std::size_t k,
                               PathwaySource source = PathwaySource::Audio);

struct ModalityPathways {
    PathwayFeatureSet d_action, d_object, t_action, t_object;
};

ModalityPathways extract_modality_pathways(const Tensor& audio, const Tensor& text,
                                           const LabelDictionary& actions,
                                           const LabelDictionary& objects, std::size_t k);

struct SubtitleWords {
    std::vector<std::string> verbs;
    std::vector<std::string> nouns;
};

// Tokenize on non-alphanumeric boundaries, lowercase; a token is a verb
// iff it is an action label and a noun iff it is an object label (both
// lists when in both). Occurrence order kept, duplicates kept.
SubtitleWords extract_subtitle_words(const std::string& subtitle, const LabelDictionary& actions,
                                     const LabelDictionary& objects);

struct SubtitlePathways {
    std::vector<Tensor> action_seq;
    std::vector<Tensor> object_seq;
};

// Embedded verb/noun sequences; an empty list becomes a single zero
// vector so downstream aggregation always sees a non-empty sequence.
SubtitlePathways subtitle_pathways(const std::string& subtitle, const LabelDictionary& actions,
                                   const LabelDictionary& objects, const EmbeddingTable& table);

std::vector<std::string> tokenize(const std::string& text);

}  // namespace aopath
