#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <unordered_set>

#include "aopath/trainer.hpp"

using namespace aopath;
namespace fs = std::filesystem;

namespace {

Lexicon& harness_lexicon() {
    static Lexicon lex = make_synthetic_lexicon(90, 90, 48, 2024);
    return lex;
}

SyntheticSpec small_spec(std::size_t n, Signal sig, std::uint64_t seed) {
    SyntheticSpec s;
    s.n_records = n;
    s.signal = sig;
    s.seed = seed;
    s.feature_dim = 48;
    s.words_per_dict = 6;
    s.genres = {"medical", "sitcom", "crime"};
    return s;
}

RunConfig tiny_run(Variant v, std::uint64_t seed) {
    RunConfig rc;
    rc.model = PathwayConfig::preset(v);
    rc.model.feature_dim = 48;
    rc.model.k = 6;
    rc.epochs = 2;
    rc.batch_size = 8;
    rc.seed = seed;
    return rc;
}

}  // namespace

TEST_CASE("dataset: save/load round-trip equals originals") {
    auto records = generate_synthetic(small_spec(10, Signal::Pathway, 5), harness_lexicon());
    auto path = fs::temp_directory_path() / "aopath_test_ds.jsonl";
    save_dataset(records, path);
    auto loaded = load_dataset(path);
    REQUIRE(loaded.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(loaded[i].id == records[i].id);
        CHECK(loaded[i].gold == records[i].gold);
        CHECK(loaded[i].genre == records[i].genre);
        CHECK(loaded[i].subtitle == records[i].subtitle);
        for (std::size_t n = 0; n < kNumCandidates; ++n) {
            CHECK(loaded[i].audio[n].data == records[i].audio[n].data);
            CHECK(loaded[i].text[n].data == records[i].text[n].data);
        }
    }
    fs::remove(path);
}

TEST_CASE("dataset: empty file and malformed records") {
    auto path = fs::temp_directory_path() / "aopath_test_bad.jsonl";
    { std::ofstream out(path); }
    CHECK(load_dataset(path).empty());

    {
        std::ofstream out(path);
        out << R"({"id":"x","genre":"g","subtitle":"s","gold":0,"dim":2,)"
            << R"("D":["AAAAAAAAAAAAAAAAAAAAAA=="],"T":["AAAAAAAAAAAAAAAAAAAAAA=="]})" << "\n";
    }
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains(":1:"), DataError);
    fs::remove(path);
}

TEST_CASE("synthetic: determinism and gold balance") {
    auto a = generate_synthetic(small_spec(30, Signal::Pathway, 9), harness_lexicon());
    auto b = generate_synthetic(small_spec(30, Signal::Pathway, 9), harness_lexicon());
    REQUIRE(a.size() == 30);
    std::array<std::size_t, 5> gold_counts{};
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].subtitle == b[i].subtitle);
        CHECK(a[i].audio[0].data == b[i].audio[0].data);
        ++gold_counts[a[i].gold];
    }
    for (std::size_t c : gold_counts) CHECK(c == 6);
}

TEST_CASE("synthetic: pathway signal is solvable by the construction-aware oracle") {
    auto records = generate_synthetic(small_spec(60, Signal::Pathway, 13), harness_lexicon());
    CHECK(overlap_oracle_accuracy(records, harness_lexicon(), 6) >= 0.9);
}

TEST_CASE("genre split: partition and in-domain holdout") {
    auto records = generate_synthetic(small_spec(30, Signal::Pathway, 17), harness_lexicon());
    GenreSplit xy = GenreSplit::make(records, "medical", "crime");
    CHECK(xy.train_records.size() == 10);
    CHECK(xy.eval_records.size() == 10);
    for (const auto& r : xy.train_records) CHECK(r.genre == "medical");
    for (const auto& r : xy.eval_records) CHECK(r.genre == "crime");

    GenreSplit xx = GenreSplit::make(records, "sitcom", "sitcom");
    CHECK(xx.train_records.size() == 8);
    CHECK(xx.eval_records.size() == 2);
    std::unordered_set<std::string> train_ids;
    for (const auto& r : xx.train_records) train_ids.insert(r.id);
    for (const auto& r : xx.eval_records) CHECK(train_ids.count(r.id) == 0);
}

TEST_CASE("train: lr=0 leaves parameters unchanged") {
    auto records = generate_synthetic(small_spec(12, Signal::Pathway, 21), harness_lexicon());
    RunConfig rc = tiny_run(Variant::AOPathS, 3);
    rc.lr = 0.0;
    rc.epochs = 1;
    TrainResult tr = train(rc, records, harness_lexicon());
    ModelParams fresh = init_params(rc.model, rc.seed);
    auto a = tr.params.named(), b = fresh.named();
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a[i].second.value().data == b[i].second.value().data);
}

TEST_CASE("train: identical seeds give bit-identical loss curves") {
    auto records = generate_synthetic(small_spec(20, Signal::Pathway, 23), harness_lexicon());
    RunConfig rc = tiny_run(Variant::AOPathS, 7);
    TrainResult a = train(rc, records, harness_lexicon());
    TrainResult b = train(rc, records, harness_lexicon());
    CHECK(a.epoch_loss == b.epoch_loss);
}

TEST_CASE("train: text-signal loss decreases across epochs") {
    auto records = generate_synthetic(small_spec(40, Signal::Text, 29), harness_lexicon());
    RunConfig rc = tiny_run(Variant::ATClassifier, 9);
    rc.epochs = 5;
    rc.lr = 3e-3;
    TrainResult tr = train(rc, records, harness_lexicon());
    REQUIRE(tr.epoch_loss.size() == 5);
    CHECK(tr.epoch_loss.back() < tr.epoch_loss.front());
}

TEST_CASE("train: split hygiene audit log covers exactly the training records") {
    auto records = generate_synthetic(small_spec(30, Signal::Pathway, 31), harness_lexicon());
    GenreSplit split = GenreSplit::make(records, "medical", "crime");
    RunConfig rc = tiny_run(Variant::AOPathS, 11);
    rc.epochs = 1;
    TrainResult tr = train(rc, split.train_records, harness_lexicon());
    std::unordered_set<std::string> visited(tr.visited_ids.begin(), tr.visited_ids.end());
    CHECK(visited.size() == split.train_records.size());
    for (const auto& r : split.eval_records) CHECK(visited.count(r.id) == 0);
}

TEST_CASE("evaluate: tie-break picks the lowest index") {
    auto records = generate_synthetic(small_spec(25, Signal::None, 37), harness_lexicon());
    // force identical logits by zeroing every parameter of an ATClassifier
    PathwayConfig cfg = PathwayConfig::preset(Variant::ATClassifier);
    cfg.feature_dim = 48;
    ModelParams p = init_params(cfg, 1);
    p.fc_t->weight.mutable_value().fill(0.0);
    p.fc_t->bias.mutable_value().fill(0.0);
    Metrics m = evaluate(p, cfg, records, harness_lexicon());
    double gold0 = 0.0;
    for (const auto& r : records) gold0 += (r.gold == 0) ? 1.0 : 0.0;
    CHECK(m.accuracy == doctest::Approx(gold0 / records.size()).epsilon(1e-12));
}

TEST_CASE("evaluate: hand-built records with known scores") {
    // three records scored by an ATClassifier with weight = e0, bias 0:
    // logit_n = text[n][0]
    Lexicon& lex = harness_lexicon();
    PathwayConfig cfg = PathwayConfig::preset(Variant::ATClassifier);
    cfg.feature_dim = 48;
    ModelParams p = init_params(cfg, 1);
    p.fc_t->weight.mutable_value().fill(0.0);
    p.fc_t->weight.mutable_value().at(0, 0) = 1.0;
    p.fc_t->bias.mutable_value().fill(0.0);

    auto make_rec = [&](const std::string& id, std::size_t gold, std::size_t peak) {
        QARecord r;
        r.id = id;
        r.genre = "g";
        r.subtitle = "none";
        r.gold = gold;
        for (std::size_t n = 0; n < kNumCandidates; ++n) {
            r.audio[n] = Tensor({48}, 0.0);
            r.text[n] = Tensor({48}, 0.0);
            r.text[n][0] = (n == peak) ? 5.0 : static_cast<double>(n) * 0.1;
        }
        return r;
    };
    // predicted answer is `peak`; correct for 2 of 3 records
    std::vector<QARecord> recs{make_rec("a", 1, 1), make_rec("b", 2, 2), make_rec("c", 0, 4)};
    Metrics m = evaluate(p, cfg, recs, lex);
    CHECK(m.accuracy == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(m.per_genre.at("g") == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("evaluate: order-independent and idempotent") {
    auto records = generate_synthetic(small_spec(15, Signal::Pathway, 41), harness_lexicon());
    RunConfig rc = tiny_run(Variant::AOPathS, 13);
    rc.epochs = 1;
    TrainResult tr = train(rc, records, harness_lexicon());
    Metrics a = evaluate(tr.params, rc.model, records, harness_lexicon());
    Metrics b = evaluate(tr.params, rc.model, records, harness_lexicon());
    CHECK(a.accuracy == b.accuracy);
    std::vector<QARecord> reversed(records.rbegin(), records.rend());
    Metrics c = evaluate(tr.params, rc.model, reversed, harness_lexicon());
    CHECK(a.accuracy == c.accuracy);
}

TEST_CASE("run_ablation: 2 configs x 2 splits give 4 reproducible cells") {
    auto records = generate_synthetic(small_spec(45, Signal::Pathway, 43), harness_lexicon());
    std::vector<AblationCell> cells;
    for (Variant v : {Variant::AOPathS, Variant::ATClassifier}) {
        for (auto [tg, eg] : {std::pair{"medical", "sitcom"}, std::pair{"sitcom", "crime"}}) {
            AblationCell c;
            c.config_name = to_string(v);
            c.run = tiny_run(v, 17);
            c.run.epochs = 1;
            c.train_genre = tg;
            c.eval_genre = eg;
            cells.push_back(c);
        }
    }
    auto done = run_ablation(cells, records, harness_lexicon());
    REQUIRE(done.size() == 4);
    for (const auto& c : done) {
        CHECK(c.param_count == count_params(c.run.model));
        CHECK(c.accuracy >= 0.0);
        CHECK(c.accuracy <= 1.0);
    }
    // reproducibility of a single cell
    auto again = run_ablation({cells[0]}, records, harness_lexicon());
    CHECK(again[0].accuracy == done[0].accuracy);
    CHECK(again[0].final_loss == done[0].final_loss);
}

TEST_CASE("train: empty training set raises") {
    std::vector<QARecord> none;
    RunConfig rc = tiny_run(Variant::AOPathS, 1);
    CHECK_THROWS_AS(train(rc, none, harness_lexicon()), DataError);
}
