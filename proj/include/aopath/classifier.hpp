#pragma once

#include <array>
#include <optional>

#include "aopath/pathway.hpp"
#include "aopath/record.hpp"

namespace aopath {

// Pathway term index order, used everywhere four-term arrays appear.
enum PathwayTerm : std::size_t {
    kAudioAction = 0,
    kAudioObject = 1,
    kTextAction = 2,
    kTextObject = 3,
};

struct CandidateScore {
    std::array<double, 4> pathway_terms{};     // weighted cosine similarities
    std::array<double, 4> attention_weights{};  // the four alphas
    double text_logit = 0.0;
    std::optional<double> audio_logit;
    double total = 0.0;
};

// One attention-weighted similarity: alpha = FC_att(rep) computed from the
// pre-similarity global representation; term = cos(rep, sub_rep) * alpha.
// With attention off, alpha is fixed at 1.
struct TermResult {
    Var term;
    double alpha = 1.0;
    double cosine = 0.0;
};
TermResult pathway_term(const Var& rep, const Var& sub_rep, const ModelParams& params,
                        bool use_attention);

// Extraction results for one record, reusable across epochs (the
// extractor has no trainable weights, so this is loop-invariant).
struct PreparedRecord {
    std::array<ModalityPathways, kNumCandidates> candidates;
    SubtitlePathways subtitle;
};

PreparedRecord prepare_record(const QARecord& record, const Lexicon& lex,
                              const PathwayConfig& cfg);

struct QuestionForward {
    Var logits;  // [5]
    std::array<CandidateScore, kNumCandidates> scores;
};

// Shares the projection node of each (layer, dictionary label) pair
// between every sequence built while the current weights are live: one
// batch during training (reset() after each optimizer step, which edits
// the weights in place), or a whole evaluation pass. The cached nodes
// join the caller's graph, so gradients accumulate through them exactly
// once per backward pass.
class ProjectionCache {
  public:
    std::vector<Var> project(const PathwayFeatureSet& set, const ModelParams& params);
    void reset();

  private:
    // audio-action, audio-object, text-action, text-object; indexed by
    // dictionary label id, invalid Var = not yet projected
    std::array<std::vector<Var>, 4> slots_;
};

// Full scoring of one question under any variant/ablation. Subtitle
// pathway representations are computed once and shared by all candidates.
QuestionForward forward_question(const QARecord& record, const ModelParams& params,
                                 const PathwayConfig& cfg, const Lexicon& lex,
                                 const PreparedRecord* prepared = nullptr,
                                 ProjectionCache* cache = nullptr);

std::size_t argmax_lowest(const Tensor& logits);

}  // namespace aopath
