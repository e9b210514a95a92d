#include "aopath/classifier.hpp"

namespace aopath {

namespace {

Var zero_scalar() { return Var::constant(Tensor::scalar_of(0.0)); }

bool needs_extractor(const PathwayConfig& cfg) {
    return cfg.variant == Variant::AOPathB || cfg.variant == Variant::AOPathS;
}

}  // namespace

TermResult pathway_term(const Var& rep, const Var& sub_rep, const ModelParams& params,
                        bool use_attention) {
    Var cos = cosine_similarity(rep, sub_rep);
    TermResult r;
    r.cosine = cos.value()[0];
    if (use_attention) {
        if (!params.fc_att) throw ConfigError("pathway_term: attention head not present");
        Var alpha = affine(rep, params.fc_att->weight, params.fc_att->bias);
        r.alpha = alpha.value()[0];
        r.term = mul(cos, alpha);
    } else {
        r.alpha = 1.0;
        r.term = cos;
    }
    return r;
}

PreparedRecord prepare_record(const QARecord& record, const Lexicon& lex,
                              const PathwayConfig& cfg) {
    PreparedRecord p;
    if (needs_extractor(cfg)) {
        for (std::size_t n = 0; n < kNumCandidates; ++n)
            p.candidates[n] = extract_modality_pathways(record.audio[n], record.text[n],
                                                        lex.actions, lex.objects, cfg.k);
        p.subtitle = subtitle_pathways(record.subtitle, lex.actions, lex.objects, lex.table);
    }
    return p;
}

std::vector<Var> ProjectionCache::project(const PathwayFeatureSet& set,
                                          const ModelParams& params) {
    const std::optional<AffineParams>* fc = nullptr;
    std::size_t slot = (set.kind == LabelKind::Action) ? 0 : 1;
    if (set.source == PathwaySource::Audio) {
        fc = (set.kind == LabelKind::Action) ? &params.fc_da : &params.fc_do;
    } else {
        fc = (set.kind == LabelKind::Action) ? &params.fc_a : &params.fc_o;
        slot += 2;
    }
    if (!*fc)
        throw ConfigError(std::string("project: layer for (") + to_string(set.source) + ", " +
                          to_string(set.kind) + ") not present under this config");

    auto& memo = slots_[slot];
    std::vector<Var> out;
    out.reserve(set.vectors.size());
    for (std::size_t i = 0; i < set.vectors.size(); ++i) {
        const std::size_t id = set.label_ids[i];
        if (id >= memo.size()) memo.resize(id + 1);
        if (!memo[id].valid())
            memo[id] = affine(Var::constant(set.vectors[i]), (*fc)->weight, (*fc)->bias);
        out.push_back(memo[id]);
    }
    return out;
}

void ProjectionCache::reset() {
    for (auto& m : slots_) m.assign(m.size(), Var());
}

QuestionForward forward_question(const QARecord& record, const ModelParams& params,
                                 const PathwayConfig& cfg, const Lexicon& lex,
                                 const PreparedRecord* prepared, ProjectionCache* cache) {
    record.validate();
    for (std::size_t n = 0; n < kNumCandidates; ++n)
        if (record.audio[n].size() != cfg.feature_dim || record.text[n].size() != cfg.feature_dim)
            throw DataError("record " + record.id + ": feature dimension mismatch");

    PreparedRecord local;
    if (!prepared) {
        local = prepare_record(record, lex, cfg);
        prepared = &local;
    }

    QuestionForward out;
    std::array<Var, kNumCandidates> totals;

    // --- baselines ---
    if (cfg.variant == Variant::ATClassifier) {
        if (!params.fc_t) throw ConfigError("ATClassifier requires the text head");
        for (std::size_t n = 0; n < kNumCandidates; ++n) {
            Var logit = affine(Var::constant(record.text[n]), params.fc_t->weight,
                               params.fc_t->bias);
            out.scores[n].text_logit = logit.value()[0];
            if (cfg.use_audio_head) {
                Var alog = affine(Var::constant(record.audio[n]), params.fc_t->weight,
                                  params.fc_t->bias);
                out.scores[n].audio_logit = alog.value()[0];
                logit = add(logit, alog);
            }
            out.scores[n].total = logit.value()[0];
            totals[n] = logit;
        }
        out.logits = concat(std::span<const Var>(totals));
        return out;
    }

    if (cfg.variant == Variant::NoPaths) {
        if (!params.fc_da || !params.fc_a || !params.fc_att || !params.fc_t)
            throw ConfigError("NoPaths: required layers missing from params");
        for (std::size_t n = 0; n < kNumCandidates; ++n) {
            std::vector<Var> dseq{affine(Var::constant(record.audio[n]), params.fc_da->weight,
                                         params.fc_da->bias)};
            std::vector<Var> tseq{affine(Var::constant(record.text[n]), params.fc_a->weight,
                                         params.fc_a->bias)};
            Var rep_d = global_representation(dseq, LabelKind::Action, params);
            Var rep_t = global_representation(tseq, LabelKind::Action, params);
            Var sd = affine(rep_d, params.fc_att->weight, params.fc_att->bias);
            Var st = affine(rep_t, params.fc_att->weight, params.fc_att->bias);
            Var text_logit = affine(Var::constant(record.text[n]), params.fc_t->weight,
                                    params.fc_t->bias);
            out.scores[n].pathway_terms[kAudioAction] = sd.value()[0];
            out.scores[n].pathway_terms[kTextAction] = st.value()[0];
            out.scores[n].attention_weights = {1.0, 1.0, 1.0, 1.0};
            out.scores[n].text_logit = text_logit.value()[0];
            Var total = add(add(sd, st), text_logit);
            out.scores[n].total = total.value()[0];
            totals[n] = total;
        }
        out.logits = concat(std::span<const Var>(totals));
        return out;
    }

    // --- AOPath proper ---
    if ((cfg.use_actions && !params.fc_a) || (cfg.use_objects && !params.fc_o) ||
        (cfg.use_text_head && !params.fc_t) || (cfg.use_audio_head && !params.fc_d))
        throw ConfigError("forward_question: required layers missing from params");
    Var sub_rep_a, sub_rep_o;
    if (cfg.use_actions) {
        auto seq = project_sequence(prepared->subtitle.action_seq, *params.fc_a);
        sub_rep_a = global_representation(seq, LabelKind::Action, params);
    }
    if (cfg.use_objects) {
        auto seq = project_sequence(prepared->subtitle.object_seq, *params.fc_o);
        sub_rep_o = global_representation(seq, LabelKind::Object, params);
    }

    for (std::size_t n = 0; n < kNumCandidates; ++n) {
        const ModalityPathways& mp = prepared->candidates[n];
        CandidateScore& sc = out.scores[n];
        std::vector<Var> parts;

        auto add_term = [&](const PathwayFeatureSet& set, const Var& sub_rep, std::size_t slot) {
            auto seq = (cache && set.label_ids.size() == set.vectors.size())
                           ? cache->project(set, params)
                           : project_pathway(set, params, cfg);
            Var rep = global_representation(seq, set.kind, params);
            TermResult tr = pathway_term(rep, sub_rep, params, cfg.use_attention);
            sc.pathway_terms[slot] = tr.term.value()[0];
            sc.attention_weights[slot] = tr.alpha;
            parts.push_back(tr.term);
        };

        if (cfg.use_actions) {
            add_term(mp.d_action, sub_rep_a, kAudioAction);
            add_term(mp.t_action, sub_rep_a, kTextAction);
        }
        if (cfg.use_objects) {
            add_term(mp.d_object, sub_rep_o, kAudioObject);
            add_term(mp.t_object, sub_rep_o, kTextObject);
        }
        if (cfg.use_text_head) {
            Var tl = affine(Var::constant(record.text[n]), params.fc_t->weight, params.fc_t->bias);
            sc.text_logit = tl.value()[0];
            parts.push_back(tl);
        }
        if (cfg.use_audio_head) {
            Var al = affine(Var::constant(record.audio[n]), params.fc_d->weight,
                            params.fc_d->bias);
            sc.audio_logit = al.value()[0];
            parts.push_back(al);
        }

        Var total = parts.empty() ? zero_scalar() : parts[0];
        for (std::size_t i = 1; i < parts.size(); ++i) total = add(total, parts[i]);
        sc.total = total.value()[0];
        totals[n] = total;
    }

    out.logits = concat(std::span<const Var>(totals));
    return out;
}

std::size_t argmax_lowest(const Tensor& logits) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i)
        if (logits[i] > logits[best]) best = i;
    return best;
}

}  // namespace aopath
