#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "aopath/lexicon.hpp"
#include "aopath/record.hpp"

namespace aopath {

// Line-delimited JSON, one record per line; feature vectors are base64
// blocks of little-endian doubles.
std::vector<QARecord> load_dataset(const std::filesystem::path& path);
void save_dataset(std::span<const QARecord> records, const std::filesystem::path& path);

enum class Signal { Pathway, Text, None };

Signal signal_from_string(const std::string& s);
const char* to_string(Signal s);

struct SyntheticSpec {
    std::size_t n_records = 100;
    std::vector<std::string> genres{"medical", "sitcom", "crime"};
    std::uint64_t seed = 1;
    Signal signal = Signal::Pathway;
    std::size_t feature_dim = 768;
    // planted dictionary words per record and per dictionary
    std::size_t words_per_dict = 10;
    double noise_sigma = 0.1;
};

// Stands in for TVQA + backbone features. Each genre samples a disjoint
// slice of the dictionaries, creating the domain gap. For signal=pathway
// the gold candidate's features are noisy mixtures of the embeddings of
// words planted in the subtitle, distractors mix words absent from it;
// the marginal feature distribution is candidate-independent so a linear
// head over raw features carries no signal. For signal=text the gold T
// feature is offset along a fixed direction. Gold indices are balanced.
std::vector<QARecord> generate_synthetic(const SyntheticSpec& spec, const Lexicon& lex);

// Synthetic lexicon: labels "act0".."actN", "obj0".."objM" plus filler
// vocabulary, with seeded unit-norm Gaussian embeddings.
Lexicon make_synthetic_lexicon(std::size_t n_actions, std::size_t n_objects, std::size_t dim,
                               std::uint64_t seed);

// Construction-aware reference scorer: counts overlaps between each
// candidate's top-K retrieved labels and the subtitle's planted words.
// Used to certify that pathway-signal data is solvable before training.
double overlap_oracle_accuracy(std::span<const QARecord> records, const Lexicon& lex,
                               std::size_t k);

struct GenreSplit {
    std::string train_genre;
    std::string eval_genre;
    std::vector<QARecord> train_records;
    std::vector<QARecord> eval_records;

    static GenreSplit make(std::span<const QARecord> all, const std::string& train_genre,
                           const std::string& eval_genre);
};

std::string base64_encode(const unsigned char* data, std::size_t len);
std::vector<unsigned char> base64_decode(const std::string& s);

}  // namespace aopath
