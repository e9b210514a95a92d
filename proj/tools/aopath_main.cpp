// Command-line front end: synthetic data generation, training, evaluation,
// the ablation matrix, extractor inspection and score explanations.
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "aopath/checkpoint.hpp"
#include "aopath/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace aopath;

namespace {

struct LexiconArgs {
    std::string embeddings, actions_dict, objects_dict;

    void attach(CLI::App* cmd) {
        cmd->add_option("--embeddings", embeddings, "embedding table file")->required();
        cmd->add_option("--actions-dict", actions_dict, "action labels file")->required();
        cmd->add_option("--objects-dict", objects_dict, "object labels file")->required();
    }

    Lexicon load() const {
        Lexicon lex;
        lex.table = EmbeddingTable::load(embeddings);
        lex.actions = LabelDictionary::load(actions_dict, LabelKind::Action, lex.table);
        lex.objects = LabelDictionary::load(objects_dict, LabelKind::Object, lex.table);
        return lex;
    }
};

struct ModelArgs {
    std::string variant = "aopath-s";
    std::size_t k = 15;
    std::size_t feature_dim = 768;
    std::size_t proj_dim = 0;     // 0: variant default
    std::size_t lstm_hidden = 0;  // 0: variant default
    bool no_actions = false, no_objects = false, no_attention = false;
    bool no_text_head = false, audio_head = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--variant", variant, "aopath-b|aopath-s|atclassifier|nopaths");
        cmd->add_option("--k", k, "labels retrieved per dictionary");
        cmd->add_option("--feature-dim", feature_dim, "modality feature size");
        cmd->add_option("--proj-dim", proj_dim, "pathway feature size override");
        cmd->add_option("--lstm-hidden", lstm_hidden, "LSTM hidden size override");
        cmd->add_flag("--no-actions", no_actions, "disable the actions pathway");
        cmd->add_flag("--no-objects", no_objects, "disable the objects pathway");
        cmd->add_flag("--no-attention", no_attention, "disable attention weights");
        cmd->add_flag("--no-text-head", no_text_head, "disable the text head");
        cmd->add_flag("--audio-head", audio_head, "enable the audio head");
    }

    PathwayConfig build() const {
        PathwayConfig cfg = PathwayConfig::preset(variant_from_string(variant));
        cfg.k = k;
        cfg.feature_dim = feature_dim;
        if (proj_dim) cfg.proj_dim = proj_dim;
        if (lstm_hidden) cfg.lstm_hidden = lstm_hidden;
        cfg.use_actions = !no_actions;
        cfg.use_objects = !no_objects;
        cfg.use_attention = !no_attention;
        cfg.use_text_head = !no_text_head;
        cfg.use_audio_head = audio_head;
        cfg.validate();
        return cfg;
    }
};

void apply_config_file(const std::string& path, RunConfig& rc, ModelArgs& model) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    json j = json::parse(in);
    if (j.contains("variant")) model.variant = j["variant"].get<std::string>();
    if (j.contains("k")) model.k = j["k"].get<std::size_t>();
    if (j.contains("feature_dim")) model.feature_dim = j["feature_dim"].get<std::size_t>();
    if (j.contains("proj_dim")) model.proj_dim = j["proj_dim"].get<std::size_t>();
    if (j.contains("lstm_hidden")) model.lstm_hidden = j["lstm_hidden"].get<std::size_t>();
    if (j.contains("epochs")) rc.epochs = j["epochs"].get<std::size_t>();
    if (j.contains("batch_size")) rc.batch_size = j["batch_size"].get<std::size_t>();
    if (j.contains("lr")) rc.lr = j["lr"].get<double>();
    if (j.contains("seed")) rc.seed = j["seed"].get<std::uint64_t>();
}

json metrics_to_json(const Metrics& m) {
    json j;
    j["accuracy"] = m.accuracy;
    j["n_records"] = m.n_records;
    j["per_genre"] = m.per_genre;
    j["epoch_loss"] = m.epoch_loss;
    return j;
}

void write_out(const json& j, const std::string& out) {
    if (out.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream o(out);
        if (!o) throw IoError("cannot open --out file: " + out);
        o << j.dump(2) << "\n";
    }
}

int cmd_gen_synthetic(const std::string& out_dir, std::size_t n_records, std::size_t n_actions,
                      std::size_t n_objects, std::size_t dim, std::uint64_t seed,
                      const std::string& signal, const std::vector<std::string>& genres,
                      std::size_t words_per_dict, double noise_sigma) {
    fs::create_directories(out_dir);
    Lexicon lex = make_synthetic_lexicon(n_actions, n_objects, dim, seed);
    lex.table.save(fs::path(out_dir) / "embeddings.bin");
    lex.actions.save_labels(fs::path(out_dir) / "actions.txt");
    lex.objects.save_labels(fs::path(out_dir) / "objects.txt");

    SyntheticSpec spec;
    spec.n_records = n_records;
    spec.genres = genres;
    spec.seed = seed;
    spec.signal = signal_from_string(signal);
    spec.feature_dim = dim;
    spec.words_per_dict = words_per_dict;
    spec.noise_sigma = noise_sigma;
    auto records = generate_synthetic(spec, lex);
    save_dataset(records, fs::path(out_dir) / "data.jsonl");
    std::cout << "wrote " << records.size() << " records and lexicon files to " << out_dir << "\n";
    return 0;
}

std::vector<QARecord> select_genre(std::vector<QARecord> all, const std::string& genre) {
    if (genre.empty()) return all;
    std::vector<QARecord> out;
    for (auto& r : all)
        if (r.genre == genre) out.push_back(std::move(r));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AOPath: actions/objects pathway classifier for multiple-choice video QA"};
    app.require_subcommand(1);

    // --- gen-synthetic ---
    auto* gen = app.add_subcommand("gen-synthetic", "generate a synthetic lexicon and dataset");
    std::string gen_out = "synthetic";
    std::size_t gen_n = 500, gen_actions = 240, gen_objects = 240, gen_dim = 768, gen_words = 10;
    std::uint64_t gen_seed = 1;
    std::string gen_signal = "pathway";
    std::vector<std::string> gen_genres{"medical", "sitcom", "crime"};
    double gen_sigma = 0.1;
    gen->add_option("--out-dir", gen_out, "output directory");
    gen->add_option("--n-records", gen_n, "records to generate");
    gen->add_option("--n-actions", gen_actions, "action dictionary size");
    gen->add_option("--n-objects", gen_objects, "object dictionary size");
    gen->add_option("--dim", gen_dim, "embedding/feature dimension");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--signal", gen_signal, "pathway|text|none");
    gen->add_option("--genres", gen_genres, "genre tags")->delimiter(',');
    gen->add_option("--words-per-dict", gen_words, "planted words per dictionary per record");
    gen->add_option("--noise-sigma", gen_sigma, "feature noise level");

    // --- count-params ---
    auto* census = app.add_subcommand("count-params", "print the per-layer parameter census");
    ModelArgs census_model;
    census_model.attach(census);

    // --- train ---
    auto* tr = app.add_subcommand("train", "train a model and optionally save a checkpoint");
    LexiconArgs tr_lex;
    ModelArgs tr_model;
    tr_lex.attach(tr);
    tr_model.attach(tr);
    std::string tr_dataset, tr_genre, tr_out, tr_ckpt, tr_config;
    RunConfig tr_run;
    tr->add_option("--dataset", tr_dataset, "dataset file")->required();
    tr->add_option("--train-genre", tr_genre, "restrict training to this genre");
    tr->add_option("--config", tr_config, "JSON config file (flags override)");
    tr->add_option("--epochs", tr_run.epochs, "training epochs");
    tr->add_option("--batch-size", tr_run.batch_size, "batch size");
    tr->add_option("--lr", tr_run.lr, "Adam learning rate");
    tr->add_option("--seed", tr_run.seed, "initialization seed");
    tr->add_option("--out", tr_out, "metrics output file (JSON)");
    tr->add_option("--save-checkpoint", tr_ckpt, "checkpoint output path");

    // --- eval ---
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
    LexiconArgs ev_lex;
    ModelArgs ev_model;
    ev_lex.attach(ev);
    ev_model.attach(ev);
    std::string ev_dataset, ev_genre, ev_ckpt, ev_out;
    ev->add_option("--dataset", ev_dataset, "dataset file")->required();
    ev->add_option("--eval-genre", ev_genre, "restrict evaluation to this genre");
    ev->add_option("--checkpoint", ev_ckpt, "checkpoint to load")->required();
    ev->add_option("--out", ev_out, "metrics output file (JSON)");

    // --- ablate ---
    auto* ab = app.add_subcommand("ablate", "train/evaluate a variant x split matrix");
    LexiconArgs ab_lex;
    ab_lex.attach(ab);
    std::string ab_dataset, ab_out;
    std::vector<std::string> ab_variants{"atclassifier", "nopaths", "aopath-s", "aopath-b"};
    std::vector<std::string> ab_splits;
    std::size_t ab_k = 15, ab_epochs = 5, ab_batch = 32;
    double ab_lr = 3e-4;
    std::uint64_t ab_seed = 1;
    std::size_t ab_dim = 768;
    ab->add_option("--dataset", ab_dataset, "dataset file")->required();
    ab->add_option("--variants", ab_variants, "variant list")->delimiter(',');
    ab->add_option("--splits", ab_splits, "train:eval genre pairs, e.g. medical:crime")
        ->required()
        ->delimiter(',');
    ab->add_option("--k", ab_k, "labels per dictionary");
    ab->add_option("--feature-dim", ab_dim, "modality feature size");
    ab->add_option("--epochs", ab_epochs, "epochs per cell");
    ab->add_option("--batch-size", ab_batch, "batch size");
    ab->add_option("--lr", ab_lr, "learning rate");
    ab->add_option("--seed", ab_seed, "seed shared by all cells");
    ab->add_option("--out", ab_out, "report output file (JSON)");

    // --- extract ---
    auto* ex = app.add_subcommand("extract", "dump the top-K labels per record feature");
    LexiconArgs ex_lex;
    ex_lex.attach(ex);
    std::string ex_dataset;
    std::size_t ex_k = 15, ex_limit = 5;
    ex->add_option("--dataset", ex_dataset, "dataset file")->required();
    ex->add_option("--k", ex_k, "labels per dictionary");
    ex->add_option("--limit", ex_limit, "records to dump");

    // --- explain ---
    auto* xp = app.add_subcommand("explain", "per-candidate attention weights and score terms");
    LexiconArgs xp_lex;
    ModelArgs xp_model;
    xp_lex.attach(xp);
    xp_model.attach(xp);
    std::string xp_dataset, xp_ckpt, xp_record;
    xp->add_option("--dataset", xp_dataset, "dataset file")->required();
    xp->add_option("--checkpoint", xp_ckpt, "checkpoint to load")->required();
    xp->add_option("--record", xp_record, "record id (default: first record)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_gen_synthetic(gen_out, gen_n, gen_actions, gen_objects, gen_dim, gen_seed,
                                     gen_signal, gen_genres, gen_words, gen_sigma);

        if (census->parsed()) {
            PathwayConfig cfg = census_model.build();
            std::size_t total = 0;
            std::printf("%-18s %-14s %10s\n", "tensor", "shape", "params");
            for (const auto& [name, shape] : param_shapes(cfg)) {
                std::string s;
                for (std::size_t d : shape) s += (s.empty() ? "" : "x") + std::to_string(d);
                std::size_t n = Tensor::count(shape);
                total += n;
                std::printf("%-18s %-14s %10zu\n", name.c_str(), s.c_str(), n);
            }
            std::printf("%-18s %-14s %10zu\n", "total", "", total);
            return 0;
        }

        if (tr->parsed()) {
            ModelArgs model = tr_model;
            if (!tr_config.empty()) apply_config_file(tr_config, tr_run, model);
            tr_run.model = model.build();
            Lexicon lex = tr_lex.load();
            auto records = select_genre(load_dataset(tr_dataset), tr_genre);
            TrainResult res = train(tr_run, records, lex);
            Metrics train_m = evaluate(res.params, tr_run.model, records, lex);
            train_m.epoch_loss = res.epoch_loss;
            json j = metrics_to_json(train_m);
            j["split"] = "train";
            j["param_count"] = count_params(tr_run.model);
            write_out(j, tr_out);
            if (!tr_ckpt.empty()) save_checkpoint(res.params, tr_run.model, tr_ckpt);
            return 0;
        }

        if (ev->parsed()) {
            PathwayConfig cfg = ev_model.build();
            Lexicon lex = ev_lex.load();
            ModelParams params = load_checkpoint(cfg, ev_ckpt);
            auto records = select_genre(load_dataset(ev_dataset), ev_genre);
            if (records.empty()) throw DataError("eval: no records selected");
            Metrics m = evaluate(params, cfg, records, lex);
            write_out(metrics_to_json(m), ev_out);
            return 0;
        }

        if (ab->parsed()) {
            Lexicon lex = ab_lex.load();
            auto records = load_dataset(ab_dataset);
            std::vector<AblationCell> cells;
            for (const auto& vname : ab_variants) {
                for (const auto& split : ab_splits) {
                    auto colon = split.find(':');
                    if (colon == std::string::npos)
                        throw ConfigError("--splits entries must be train:eval, got '" + split +
                                          "'");
                    AblationCell c;
                    c.config_name = vname;
                    c.run.model = PathwayConfig::preset(variant_from_string(vname));
                    c.run.model.k = ab_k;
                    c.run.model.feature_dim = ab_dim;
                    c.run.epochs = ab_epochs;
                    c.run.batch_size = ab_batch;
                    c.run.lr = ab_lr;
                    c.run.seed = ab_seed;
                    c.train_genre = split.substr(0, colon);
                    c.eval_genre = split.substr(colon + 1);
                    cells.push_back(std::move(c));
                }
            }
            auto done = run_ablation(std::move(cells), records, lex);
            json rows = json::array();
            for (const auto& c : done) {
                rows.push_back({{"config", c.config_name},
                                {"train_genre", c.train_genre},
                                {"eval_genre", c.eval_genre},
                                {"accuracy", c.accuracy},
                                {"final_loss", c.final_loss},
                                {"param_count", c.param_count}});
                std::printf("%-14s %s->%s  acc=%.4f  loss=%.4f  params=%zu\n",
                            c.config_name.c_str(), c.train_genre.c_str(), c.eval_genre.c_str(),
                            c.accuracy, c.final_loss, c.param_count);
            }
            if (!ab_out.empty()) write_out(rows, ab_out);
            return 0;
        }

        if (ex->parsed()) {
            Lexicon lex = ex_lex.load();
            auto records = load_dataset(ex_dataset);
            for (std::size_t i = 0; i < std::min(ex_limit, records.size()); ++i) {
                const QARecord& r = records[i];
                std::cout << "record " << r.id << " (genre=" << r.genre << ")\n";
                for (std::size_t n = 0; n < kNumCandidates; ++n) {
                    auto mp = extract_modality_pathways(r.audio[n], r.text[n], lex.actions,
                                                        lex.objects, ex_k);
                    auto dump = [&](const char* tag, const PathwayFeatureSet& set,
                                    const LabelDictionary& dict) {
                        std::cout << "  cand " << n << " " << tag << ":";
                        for (std::size_t id : set.label_ids) std::cout << " " << dict.labels[id];
                        std::cout << "\n";
                    };
                    dump("D/actions", mp.d_action, lex.actions);
                    dump("D/objects", mp.d_object, lex.objects);
                    dump("T/actions", mp.t_action, lex.actions);
                    dump("T/objects", mp.t_object, lex.objects);
                }
            }
            return 0;
        }

        if (xp->parsed()) {
            PathwayConfig cfg = xp_model.build();
            Lexicon lex = xp_lex.load();
            ModelParams params = load_checkpoint(cfg, xp_ckpt);
            auto records = load_dataset(xp_dataset);
            const QARecord* rec = nullptr;
            if (xp_record.empty()) {
                if (records.empty()) throw DataError("explain: empty dataset");
                rec = &records.front();
            } else {
                for (const auto& r : records)
                    if (r.id == xp_record) rec = &r;
                if (!rec) throw DataError("explain: record '" + xp_record + "' not found");
            }
            QuestionForward fwd = forward_question(*rec, params, cfg, lex);
            std::cout << "record " << rec->id << " gold=" << rec->gold
                      << " predicted=" << argmax_lowest(fwd.logits.value()) << "\n";
            static const char* term_names[4] = {"audio/actions", "audio/objects", "text/actions",
                                                "text/objects"};
            for (std::size_t n = 0; n < kNumCandidates; ++n) {
                const CandidateScore& sc = fwd.scores[n];
                std::printf("candidate %zu%s\n", n, n == rec->gold ? " (gold)" : "");
                for (std::size_t t = 0; t < 4; ++t)
                    std::printf("  %-14s alpha=%+9.4f  term=%+9.4f\n", term_names[t],
                                sc.attention_weights[t], sc.pathway_terms[t]);
                std::printf("  text logit %+9.4f\n", sc.text_logit);
                if (sc.audio_logit) std::printf("  audio logit %+9.4f\n", *sc.audio_logit);
                std::printf("  total %+9.4f\n", sc.total);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
