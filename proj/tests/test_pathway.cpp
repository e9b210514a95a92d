#include "doctest.h"

#include <cmath>

#include "aopath/checkpoint.hpp"
#include "aopath/dataset.hpp"
#include "aopath/pathway.hpp"
#include "aopath/rng.hpp"

using namespace aopath;

TEST_CASE("count_params: published totals") {
    CHECK(count_params(PathwayConfig::preset(Variant::AOPathS)) == 26282);
    CHECK(count_params(PathwayConfig::preset(Variant::AOPathB)) == 1579010);
    CHECK(count_params(PathwayConfig::preset(Variant::ATClassifier)) == 769);
}

TEST_CASE("count_params: toggles change the census") {
    PathwayConfig cfg = PathwayConfig::preset(Variant::AOPathS);
    const std::size_t full = count_params(cfg);
    cfg.use_audio_head = true;
    CHECK(count_params(cfg) == full + 769);
    cfg.use_audio_head = false;
    cfg.use_attention = false;
    CHECK(count_params(cfg) == full - 9);  // 2h+1 with h=4
}

TEST_CASE("init_params: deterministic per seed") {
    PathwayConfig cfg = PathwayConfig::preset(Variant::AOPathS);
    ModelParams a = init_params(cfg, 42);
    ModelParams b = init_params(cfg, 42);
    ModelParams c = init_params(cfg, 43);
    auto na = a.named(), nb = b.named(), nc = c.named();
    REQUIRE(na.size() == nb.size());
    bool any_diff = false;
    for (std::size_t i = 0; i < na.size(); ++i) {
        CHECK(na[i].second.value().data == nb[i].second.value().data);
        if (na[i].second.value().data != nc[i].second.value().data) any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("init_params: projection weights stay within the fan-in bound") {
    PathwayConfig cfg = PathwayConfig::preset(Variant::AOPathS);
    ModelParams p = init_params(cfg, 7);
    const double bound = 1.0 / std::sqrt(768.0);
    for (double v : p.fc_a->weight.value().data) {
        CHECK(v >= -bound);
        CHECK(v <= bound);
    }
}

TEST_CASE("init_params: empirical mean of AOPath_B weights near zero") {
    PathwayConfig cfg = PathwayConfig::preset(Variant::AOPathB);
    ModelParams p = init_params(cfg, 11);
    // all uniform(-b, b) with b <= 1/sqrt(128); mean estimator stddev is
    // bounded by b/sqrt(3n) with the largest bound worst-case
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [name, v] : p.named()) {
        for (double x : v.value().data) sum += x;
        n += v.value().size();
    }
    const double mean = sum / static_cast<double>(n);
    const double worst_b = 1.0 / std::sqrt(128.0);
    const double sigma = worst_b / std::sqrt(3.0 * static_cast<double>(n));
    CHECK(std::abs(mean) < 3.0 * sigma);
}

TEST_CASE("weight sharing is real: one FC_A serves subtitle and text projections") {
    Lexicon lex = make_synthetic_lexicon(30, 30, 32, 3);
    PathwayConfig cfg = PathwayConfig::preset(Variant::AOPathS);
    cfg.feature_dim = 32;
    cfg.k = 4;
    ModelParams p = init_params(cfg, 1);

    std::mt19937_64 rng(5);
    Tensor f({32});
    for (double& v : f.data) v = uniform_in(rng, -1, 1);
    PathwayFeatureSet text_set = top_k_labels(f, lex.actions, 4, PathwaySource::Text);
    PathwayFeatureSet sub_set = text_set;
    sub_set.source = PathwaySource::Subtitle;

    auto before_t = project_pathway(text_set, p, cfg);
    auto before_s = project_pathway(sub_set, p, cfg);
    CHECK(before_t[0].value().data == before_s[0].value().data);

    p.fc_a->bias.mutable_value()[0] += 1.0;
    auto after_t = project_pathway(text_set, p, cfg);
    auto after_s = project_pathway(sub_set, p, cfg);
    CHECK(after_t[0].value()[0] == doctest::Approx(before_t[0].value()[0] + 1.0));
    CHECK(after_s[0].value()[0] == doctest::Approx(before_s[0].value()[0] + 1.0));
}

TEST_CASE("project_pathway: shapes, zero weights, constant inputs") {
    Lexicon lex = make_synthetic_lexicon(40, 40, 32, 9);
    PathwayConfig cfg = PathwayConfig::preset(Variant::AOPathS);
    cfg.feature_dim = 32;
    cfg.k = 15;
    ModelParams p = init_params(cfg, 2);

    std::mt19937_64 rng(4);
    Tensor f({32});
    for (double& v : f.data) v = uniform_in(rng, -1, 1);
    auto set = top_k_labels(f, lex.actions, 15, PathwaySource::Audio);
    auto projected = project_pathway(set, p, cfg);
    CHECK(projected.size() == 15);
    CHECK(projected[0].value().size() == cfg.proj_dim);

    // zero weights: every output equals the bias
    p.fc_da->weight.mutable_value().fill(0.0);
    auto zeroed = project_pathway(set, p, cfg);
    for (const Var& v : zeroed)
        for (std::size_t j = 0; j < cfg.proj_dim; ++j)
            CHECK(v.value()[j] == p.fc_da->bias.value()[j]);

    // gradient flows into the FC, never into dictionary embeddings
    Var loss = sum(projected[0]);
    loss.backward();
    CHECK(p.fc_da->weight.has_grad());
    // extractor outputs are constants; nothing to check gradients on
}

TEST_CASE("global_representation: output dims and pathway separation") {
    PathwayConfig small = PathwayConfig::preset(Variant::AOPathS);
    ModelParams p = init_params(small, 6);
    std::vector<Var> seq;
    std::mt19937_64 rng(8);
    for (int i = 0; i < 3; ++i) {
        Tensor t({small.proj_dim});
        for (double& v : t.data) v = uniform_in(rng, -1, 1);
        seq.push_back(Var::constant(t));
    }
    Var ra = global_representation(seq, LabelKind::Action, p);
    Var ro = global_representation(seq, LabelKind::Object, p);
    CHECK(ra.value().size() == 8);  // 2 x 4
    CHECK(ro.value().size() == 8);
    CHECK(ra.value().data != ro.value().data);

    PathwayConfig base = PathwayConfig::preset(Variant::AOPathB);
    ModelParams pb = init_params(base, 6);
    std::vector<Var> seq2{Var::constant(Tensor({base.proj_dim}, 0.1))};
    CHECK(global_representation(seq2, LabelKind::Action, pb).value().size() == 256);
}

TEST_CASE("checkpoint: save/load round-trip and config hash guard") {
    PathwayConfig cfg = PathwayConfig::preset(Variant::AOPathS);
    ModelParams p = init_params(cfg, 21);
    auto path = std::filesystem::temp_directory_path() / "aopath_test_ckpt.bin";
    save_checkpoint(p, cfg, path);
    ModelParams r = load_checkpoint(cfg, path);
    auto np = p.named(), nr = r.named();
    REQUIRE(np.size() == nr.size());
    for (std::size_t i = 0; i < np.size(); ++i)
        CHECK(np[i].second.value().data == nr[i].second.value().data);

    PathwayConfig other = PathwayConfig::preset(Variant::AOPathB);
    CHECK_THROWS_AS(load_checkpoint(other, path), ConfigError);
    std::filesystem::remove(path);
}

TEST_CASE("config validation") {
    PathwayConfig cfg = PathwayConfig::preset(Variant::AOPathS);
    cfg.use_actions = false;
    cfg.use_objects = false;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.variant = Variant::ATClassifier;
    CHECK_NOTHROW(cfg.validate());
}
