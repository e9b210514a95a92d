#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aopath/extractor.hpp"
#include "aopath/lstm.hpp"

namespace aopath {

enum class Variant { AOPathB, AOPathS, ATClassifier, NoPaths };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct PathwayConfig {
    std::size_t feature_dim = 768;
    std::size_t proj_dim = 256;     // base 256, small 8
    std::size_t lstm_hidden = 128;  // base 128, small 4
    std::size_t k = 15;
    Variant variant = Variant::AOPathB;
    bool use_actions = true;
    bool use_objects = true;
    bool use_audio_head = false;
    bool use_text_head = true;
    bool use_attention = true;

    static PathwayConfig preset(Variant v);
    void validate() const;
    // Canonical one-line description; hashed into checkpoints.
    std::string canonical() const;
    std::uint64_t hash() const;
};

struct AffineParams {
    Var weight;  // [out x in]
    Var bias;    // [out]
};

struct BiLstmParams {
    LstmCellParams fwd;
    LstmCellParams bwd;
};

// Every trainable weight, addressable by a stable name for the census,
// checkpoints and Adam. Slots absent under a config are nullopt.
struct ModelParams {
    std::optional<AffineParams> fc_da, fc_do, fc_a, fc_o;
    std::optional<BiLstmParams> lstm_a, lstm_o;
    std::optional<AffineParams> fc_att, fc_t, fc_d;

    std::vector<std::pair<std::string, Var>> named() const;
    std::vector<Var> all_vars() const;
    std::size_t total_size() const;
    void zero_grads() const;
};

// Stable (name, shape) census for a config; the single source of truth
// shared by init, count and checkpoint layout.
std::vector<std::pair<std::string, std::vector<std::size_t>>> param_shapes(
    const PathwayConfig& cfg);

// Weights i.i.d. uniform on [-1/sqrt(fan_in), +1/sqrt(fan_in)]; for LSTM
// tensors fan_in is the hidden size. Deterministic per seed.
ModelParams init_params(const PathwayConfig& cfg, std::uint64_t seed);

std::size_t count_params(const PathwayConfig& cfg);

// Elementwise affine over the set's vectors. Which layer applies is fixed
// by (source, kind): audio uses FC_DA/FC_DO, text and subtitle share
// FC_A/FC_O.
std::vector<Var> project_pathway(const PathwayFeatureSet& set, const ModelParams& params,
                                 const PathwayConfig& cfg);
std::vector<Var> project_sequence(const std::vector<Tensor>& seq, const AffineParams& fc);

// BiLSTM global representation; kind selects LSTM_A or LSTM_O.
Var global_representation(std::span<const Var> seq, LabelKind kind, const ModelParams& params);

}  // namespace aopath
