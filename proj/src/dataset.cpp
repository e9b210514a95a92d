#include "aopath/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "aopath/extractor.hpp"
#include "aopath/rng.hpp"

namespace aopath {

using nlohmann::json;

namespace {
constexpr char kB64Chars[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const unsigned char* data, std::size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (std::size_t i = 0; i < len; i += 3) {
        unsigned int v = data[i] << 16;
        if (i + 1 < len) v |= data[i + 1] << 8;
        if (i + 2 < len) v |= data[i + 2];
        out += kB64Chars[(v >> 18) & 63];
        out += kB64Chars[(v >> 12) & 63];
        out += (i + 1 < len) ? kB64Chars[(v >> 6) & 63] : '=';
        out += (i + 2 < len) ? kB64Chars[v & 63] : '=';
    }
    return out;
}

std::vector<unsigned char> base64_decode(const std::string& s) {
    static const auto table = [] {
        std::array<int, 256> t{};
        t.fill(-1);
        for (int i = 0; i < 64; ++i) t[static_cast<unsigned char>(kB64Chars[i])] = i;
        return t;
    }();
    std::vector<unsigned char> out;
    out.reserve(s.size() / 4 * 3);
    int acc = 0, bits = 0;
    for (char c : s) {
        if (c == '=') break;
        int v = table[static_cast<unsigned char>(c)];
        if (v < 0) throw DataError("base64: invalid character");
        acc = (acc << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<unsigned char>((acc >> bits) & 0xff));
        }
    }
    return out;
}

namespace {

std::string encode_tensor(const Tensor& t) {
    return base64_encode(reinterpret_cast<const unsigned char*>(t.data.data()),
                         t.data.size() * sizeof(double));
}

Tensor decode_tensor(const std::string& b64, std::size_t dim) {
    auto bytes = base64_decode(b64);
    if (bytes.size() != dim * sizeof(double))
        throw DataError("feature block has wrong size");
    Tensor t({dim});
    std::memcpy(t.data.data(), bytes.data(), bytes.size());
    return t;
}

}  // namespace

void save_dataset(std::span<const QARecord> records, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for write: " + path.string());
    for (const QARecord& r : records) {
        json j;
        j["id"] = r.id;
        j["genre"] = r.genre;
        j["series"] = r.series;
        j["subtitle"] = r.subtitle;
        j["gold"] = r.gold;
        j["dim"] = r.audio[0].size();
        json d = json::array(), t = json::array();
        for (std::size_t i = 0; i < kNumCandidates; ++i) {
            d.push_back(encode_tensor(r.audio[i]));
            t.push_back(encode_tensor(r.text[i]));
        }
        j["D"] = std::move(d);
        j["T"] = std::move(t);
        out << j.dump() << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<QARecord> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset: " + path.string());
    std::vector<QARecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            QARecord r;
            r.id = j.at("id").get<std::string>();
            r.genre = j.at("genre").get<std::string>();
            r.series = j.value("series", std::string{});
            r.subtitle = j.at("subtitle").get<std::string>();
            r.gold = j.at("gold").get<std::size_t>();
            const std::size_t dim = j.at("dim").get<std::size_t>();
            const auto& d = j.at("D");
            const auto& t = j.at("T");
            if (d.size() != kNumCandidates || t.size() != kNumCandidates)
                throw DataError("expected exactly " + std::to_string(kNumCandidates) +
                                " candidates");
            for (std::size_t i = 0; i < kNumCandidates; ++i) {
                r.audio[i] = decode_tensor(d[i].get<std::string>(), dim);
                r.text[i] = decode_tensor(t[i].get<std::string>(), dim);
            }
            r.validate();
            records.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(lineno) +
                            ": malformed record: " + e.what());
        }
    }
    return records;
}

Signal signal_from_string(const std::string& s) {
    if (s == "pathway") return Signal::Pathway;
    if (s == "text") return Signal::Text;
    if (s == "none") return Signal::None;
    throw ConfigError("unknown signal '" + s + "'");
}

const char* to_string(Signal s) {
    switch (s) {
        case Signal::Pathway: return "pathway";
        case Signal::Text: return "text";
        default: return "none";
    }
}

Lexicon make_synthetic_lexicon(std::size_t n_actions, std::size_t n_objects, std::size_t dim,
                               std::uint64_t seed) {
    std::vector<std::string> tokens;
    std::vector<std::string> actions, objects;
    for (std::size_t i = 0; i < n_actions; ++i) {
        actions.push_back("act" + std::to_string(i));
        tokens.push_back(actions.back());
    }
    for (std::size_t i = 0; i < n_objects; ++i) {
        objects.push_back("obj" + std::to_string(i));
        tokens.push_back(objects.back());
    }
    Lexicon lex;
    lex.table = EmbeddingTable::synthetic(std::move(tokens), dim, seed);
    lex.actions = LabelDictionary::from_labels(std::move(actions), LabelKind::Action, lex.table);
    lex.objects = LabelDictionary::from_labels(std::move(objects), LabelKind::Object, lex.table);
    return lex;
}

namespace {

struct GenreSlice {
    std::size_t begin, end;  // [begin, end) over dictionary indices
    std::size_t size() const { return end - begin; }
};

GenreSlice slice_for(std::size_t genre_idx, std::size_t n_genres, std::size_t dict_size) {
    const std::size_t b = genre_idx * dict_size / n_genres;
    const std::size_t e = (genre_idx + 1) * dict_size / n_genres;
    return {b, e};
}

// without replacement, excluding `taken`
std::vector<std::size_t> sample_ids(std::mt19937_64& rng, GenreSlice slice, std::size_t n,
                                    const std::unordered_set<std::size_t>* taken) {
    std::vector<std::size_t> pool;
    for (std::size_t i = slice.begin; i < slice.end; ++i)
        if (!taken || taken->count(i) == 0) pool.push_back(i);
    if (pool.size() < n) throw ConfigError("synthetic: genre slice too small for word count");
    for (std::size_t i = 0; i < n; ++i)
        std::swap(pool[i], pool[i + uniform_index(rng, pool.size() - i)]);
    pool.resize(n);
    return pool;
}

Tensor mixture_feature(std::mt19937_64& rng, const LabelDictionary& actions,
                       const LabelDictionary& objects, std::span<const std::size_t> act_ids,
                       std::span<const std::size_t> obj_ids, double sigma, std::size_t dim) {
    Tensor f({dim}, 0.0);
    const double inv = 1.0 / static_cast<double>(act_ids.size() + obj_ids.size());
    for (std::size_t id : act_ids) {
        auto r = actions.row(id);
        for (std::size_t j = 0; j < dim; ++j) f[j] += r[j] * inv;
    }
    for (std::size_t id : obj_ids) {
        auto r = objects.row(id);
        for (std::size_t j = 0; j < dim; ++j) f[j] += r[j] * inv;
    }
    for (std::size_t j = 0; j < dim; ++j) f[j] += sigma * gaussian(rng) / std::sqrt(double(dim));
    const double n = norm(f);
    for (double& v : f.data) v /= n;
    return f;
}

// order planted ids by descending similarity to the (noiseless) planted mixture
// mean, i.e. the same ranking the extractor produces for the gold candidate's
// features up to the feature noise. Writing the subtitle in this order makes the
// gold pathway sequences line up with the subtitle pathway sequences.
void order_by_mixture_similarity(std::vector<std::size_t>& ids, const LabelDictionary& dict,
                                 const Tensor& mean) {
    std::vector<std::pair<double, std::size_t>> keyed;
    keyed.reserve(ids.size());
    for (std::size_t id : ids) {
        auto r = dict.row(id);
        double d = 0.0;
        for (std::size_t j = 0; j < mean.data.size(); ++j) d += mean[j] * r[j];
        keyed.emplace_back(d / dict.norms[id], id);
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = keyed[i].second;
}

Tensor noise_feature(std::mt19937_64& rng, std::size_t dim) {
    Tensor f({dim});
    for (double& v : f.data) v = gaussian(rng);
    const double n = norm(f);
    for (double& v : f.data) v /= n;
    return f;
}

}  // namespace

std::vector<QARecord> generate_synthetic(const SyntheticSpec& spec, const Lexicon& lex) {
    if (spec.genres.empty()) throw ConfigError("synthetic: need at least one genre");
    const std::size_t dim = spec.feature_dim;
    if (dim != lex.table.dim) throw ConfigError("synthetic: feature_dim != lexicon dim");

    std::mt19937_64 rng(spec.seed);

    // fixed direction for the text signal
    Tensor text_dir = noise_feature(rng, dim);

    std::vector<QARecord> out;
    out.reserve(spec.n_records);
    for (std::size_t r = 0; r < spec.n_records; ++r) {
        const std::size_t g = r % spec.genres.size();
        const GenreSlice act_slice = slice_for(g, spec.genres.size(), lex.actions.size());
        const GenreSlice obj_slice = slice_for(g, spec.genres.size(), lex.objects.size());

        QARecord rec;
        rec.id = "syn" + std::to_string(r);
        rec.genre = spec.genres[g];
        rec.series = rec.genre + "-show";
        rec.gold = r % kNumCandidates;

        auto planted_act = sample_ids(rng, act_slice, spec.words_per_dict, nullptr);
        auto planted_obj = sample_ids(rng, obj_slice, spec.words_per_dict, nullptr);

        // subtitle: planted words, each dictionary's words ordered the way the
        // extractor will rank them for the gold candidate (actions first)
        Tensor planted_mean({dim}, 0.0);
        for (std::size_t id : planted_act) {
            auto row = lex.actions.row(id);
            for (std::size_t j = 0; j < dim; ++j) planted_mean[j] += row[j];
        }
        for (std::size_t id : planted_obj) {
            auto row = lex.objects.row(id);
            for (std::size_t j = 0; j < dim; ++j) planted_mean[j] += row[j];
        }
        order_by_mixture_similarity(planted_act, lex.actions, planted_mean);
        order_by_mixture_similarity(planted_obj, lex.objects, planted_mean);
        std::vector<std::string> words;
        for (std::size_t id : planted_act) words.push_back(lex.actions.labels[id]);
        for (std::size_t id : planted_obj) words.push_back(lex.objects.labels[id]);
        std::string subtitle;
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (i) subtitle += " ";
            subtitle += words[i];
        }
        subtitle += ".";
        rec.subtitle = subtitle;

        std::unordered_set<std::size_t> act_taken(planted_act.begin(), planted_act.end());
        std::unordered_set<std::size_t> obj_taken(planted_obj.begin(), planted_obj.end());

        for (std::size_t n = 0; n < kNumCandidates; ++n) {
            switch (spec.signal) {
                case Signal::Pathway: {
                    if (n == rec.gold) {
                        rec.audio[n] = mixture_feature(rng, lex.actions, lex.objects, planted_act,
                                                       planted_obj, spec.noise_sigma, dim);
                        rec.text[n] = mixture_feature(rng, lex.actions, lex.objects, planted_act,
                                                      planted_obj, spec.noise_sigma, dim);
                    } else {
                        const auto da = sample_ids(rng, act_slice, spec.words_per_dict, &act_taken);
                        const auto dob = sample_ids(rng, obj_slice, spec.words_per_dict, &obj_taken);
                        rec.audio[n] = mixture_feature(rng, lex.actions, lex.objects, da, dob,
                                                       spec.noise_sigma, dim);
                        rec.text[n] = mixture_feature(rng, lex.actions, lex.objects, da, dob,
                                                      spec.noise_sigma, dim);
                    }
                    break;
                }
                case Signal::Text: {
                    rec.audio[n] = noise_feature(rng, dim);
                    Tensor t = noise_feature(rng, dim);
                    if (n == rec.gold) {
                        for (std::size_t j = 0; j < dim; ++j) t[j] += 1.5 * text_dir[j];
                        const double nrm = norm(t);
                        for (double& v : t.data) v /= nrm;
                    }
                    rec.text[n] = std::move(t);
                    break;
                }
                case Signal::None: {
                    rec.audio[n] = noise_feature(rng, dim);
                    rec.text[n] = noise_feature(rng, dim);
                    break;
                }
            }
        }
        out.push_back(std::move(rec));
    }
    return out;
}

double overlap_oracle_accuracy(std::span<const QARecord> records, const Lexicon& lex,
                               std::size_t k) {
    std::size_t correct = 0;
    for (const QARecord& rec : records) {
        std::unordered_set<std::string> sub_words;
        for (const auto& t : tokenize(rec.subtitle)) sub_words.insert(t);
        std::size_t best = 0;
        long best_score = -1;
        for (std::size_t n = 0; n < kNumCandidates; ++n) {
            long score = 0;
            for (const Tensor* f : {&rec.audio[n], &rec.text[n]}) {
                for (const LabelDictionary* d : {&lex.actions, &lex.objects}) {
                    auto set = top_k_labels(*f, *d, k);
                    for (std::size_t id : set.label_ids)
                        if (sub_words.count(d->labels[id])) ++score;
                }
            }
            if (score > best_score) {
                best_score = score;
                best = n;
            }
        }
        if (best == rec.gold) ++correct;
    }
    return records.empty() ? 0.0 : static_cast<double>(correct) / records.size();
}

GenreSplit GenreSplit::make(std::span<const QARecord> all, const std::string& train_genre,
                            const std::string& eval_genre) {
    GenreSplit s;
    s.train_genre = train_genre;
    s.eval_genre = eval_genre;
    if (train_genre == eval_genre) {
        // in-domain protocol: held-out tail of the same genre
        std::vector<QARecord> same;
        for (const QARecord& r : all)
            if (r.genre == train_genre) same.push_back(r);
        const std::size_t cut = same.size() * 4 / 5;
        s.train_records.assign(same.begin(), same.begin() + cut);
        s.eval_records.assign(same.begin() + cut, same.end());
        return s;
    }
    for (const QARecord& r : all) {
        if (r.genre == train_genre) s.train_records.push_back(r);
        if (r.genre == eval_genre) s.eval_records.push_back(r);
    }
    return s;
}

}  // namespace aopath
