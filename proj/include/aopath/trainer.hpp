#pragma once

#include <map>
#include <string>
#include <vector>

#include "aopath/adam.hpp"
#include "aopath/classifier.hpp"
#include "aopath/dataset.hpp"

namespace aopath {

struct RunConfig {
    PathwayConfig model;
    std::size_t epochs = 5;
    std::size_t batch_size = 32;
    double lr = 3e-4;
    std::uint64_t seed = 1;
};

struct Metrics {
    double accuracy = 0.0;
    std::size_t n_records = 0;
    std::map<std::string, double> per_genre;
    std::vector<double> epoch_loss;
};

struct TrainResult {
    ModelParams params;
    std::vector<double> epoch_loss;     // mean batch loss per epoch
    std::vector<std::string> visited_ids;  // audit log for split hygiene
};

// Seeded mini-batch SGD with Adam; batch loss is the mean over its
// records, shuffling is reseeded per epoch independently of the init
// seed so ablations can share initializations. Extraction has no
// trainable weights, so callers running several seeds over the same
// records may pass the prepared extractions once.
TrainResult train(const RunConfig& cfg, std::span<const QARecord> records, const Lexicon& lex,
                  std::span<const PreparedRecord> prepared = {});

Metrics evaluate(const ModelParams& params, const PathwayConfig& cfg,
                 std::span<const QARecord> records, const Lexicon& lex,
                 std::span<const PreparedRecord> prepared = {});

struct AblationCell {
    std::string config_name;
    RunConfig run;
    std::string train_genre;
    std::string eval_genre;
    // results
    double accuracy = 0.0;
    double final_loss = 0.0;
    std::size_t param_count = 0;
};

// Trains and evaluates every (config, split) cell.
std::vector<AblationCell> run_ablation(std::vector<AblationCell> cells,
                                       std::span<const QARecord> all_records, const Lexicon& lex);

}  // namespace aopath
