#include "aopath/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "aopath/rng.hpp"

namespace aopath {

TrainResult train(const RunConfig& cfg, std::span<const QARecord> records, const Lexicon& lex,
                  std::span<const PreparedRecord> prepared) {
    if (records.empty()) throw DataError("train: empty training set");
    if (!prepared.empty() && prepared.size() != records.size())
        throw DataError("train: prepared/record count mismatch");
    cfg.model.validate();

    TrainResult result;
    result.params = init_params(cfg.model, cfg.seed);
    Adam opt(result.params.all_vars(), AdamConfig{.lr = cfg.lr});

    // extraction is loop-invariant; prepare each record once
    std::vector<PreparedRecord> local;
    if (prepared.empty()) {
        local.reserve(records.size());
        for (const QARecord& r : records) local.push_back(prepare_record(r, lex, cfg.model));
        prepared = local;
    }

    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull ^ (epoch + 1));
        for (std::size_t i = 0; i + 1 < order.size(); ++i)
            std::swap(order[i], order[i + uniform_index(shuffle_rng, order.size() - i)]);

        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        ProjectionCache cache;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(start + cfg.batch_size, order.size());
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            // one graph per batch; projection nodes are shared between
            // its records and must not outlive this step's weights
            cache.reset();
            Var batch_sum;
            for (std::size_t i = start; i < end; ++i) {
                const QARecord& rec = records[order[i]];
                if (epoch == 0) result.visited_ids.push_back(rec.id);
                QuestionForward fwd = forward_question(rec, result.params, cfg.model, lex,
                                                       &prepared[order[i]], &cache);
                Var loss = softmax_cross_entropy(fwd.logits, rec.gold);
                if (!std::isfinite(loss.value()[0]))
                    throw NumericError("train: non-finite loss at record " + rec.id);
                batch_sum = batch_sum.valid() ? add(batch_sum, loss) : loss;
            }
            // mean over the batch
            const double batch_loss = batch_sum.value()[0];
            scale(batch_sum, inv_batch).backward();
            for (const auto& [name, v] : result.params.named())
                if (v.has_grad() && !all_finite(v.grad()))
                    throw NumericError("train: non-finite gradient in " + name);
            opt.step();
            epoch_loss += batch_loss * inv_batch;
            ++n_batches;
        }
        result.epoch_loss.push_back(epoch_loss / static_cast<double>(n_batches));
    }
    return result;
}

Metrics evaluate(const ModelParams& params, const PathwayConfig& cfg,
                 std::span<const QARecord> records, const Lexicon& lex,
                 std::span<const PreparedRecord> prepared) {
    if (!prepared.empty() && prepared.size() != records.size())
        throw DataError("evaluate: prepared/record count mismatch");
    Metrics m;
    std::map<std::string, std::pair<std::size_t, std::size_t>> per_genre;  // correct, total
    std::size_t correct = 0;
    ProjectionCache cache;  // weights are fixed for the whole pass
    for (std::size_t ri = 0; ri < records.size(); ++ri) {
        const QARecord& rec = records[ri];
        QuestionForward fwd = forward_question(
            rec, params, cfg, lex, prepared.empty() ? nullptr : &prepared[ri], &cache);
        const bool hit = argmax_lowest(fwd.logits.value()) == rec.gold;
        correct += hit;
        auto& [gc, gt] = per_genre[rec.genre];
        gc += hit;
        ++gt;
    }
    m.n_records = records.size();
    m.accuracy = records.empty() ? 0.0 : static_cast<double>(correct) / records.size();
    for (const auto& [genre, ct] : per_genre)
        m.per_genre[genre] = static_cast<double>(ct.first) / ct.second;
    return m;
}

std::vector<AblationCell> run_ablation(std::vector<AblationCell> cells,
                                       std::span<const QARecord> all_records, const Lexicon& lex) {
    for (AblationCell& cell : cells) {
        GenreSplit split = GenreSplit::make(all_records, cell.train_genre, cell.eval_genre);
        TrainResult tr = train(cell.run, split.train_records, lex);
        Metrics m = evaluate(tr.params, cell.run.model, split.eval_records, lex);
        cell.accuracy = m.accuracy;
        cell.final_loss = tr.epoch_loss.empty() ? 0.0 : tr.epoch_loss.back();
        cell.param_count = count_params(cell.run.model);
    }
    return cells;
}

}  // namespace aopath
