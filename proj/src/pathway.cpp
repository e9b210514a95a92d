#include "aopath/pathway.hpp"

#include <cmath>

#include "aopath/rng.hpp"

namespace aopath {

const char* to_string(Variant v) {
    switch (v) {
        case Variant::AOPathB: return "aopath-b";
        case Variant::AOPathS: return "aopath-s";
        case Variant::ATClassifier: return "atclassifier";
        default: return "nopaths";
    }
}

Variant variant_from_string(const std::string& s) {
    if (s == "aopath-b") return Variant::AOPathB;
    if (s == "aopath-s") return Variant::AOPathS;
    if (s == "atclassifier") return Variant::ATClassifier;
    if (s == "nopaths") return Variant::NoPaths;
    throw ConfigError("unknown variant '" + s + "'");
}

PathwayConfig PathwayConfig::preset(Variant v) {
    PathwayConfig c;
    c.variant = v;
    if (v == Variant::AOPathS) {
        c.proj_dim = 8;
        c.lstm_hidden = 4;
    }
    return c;
}

void PathwayConfig::validate() const {
    if (proj_dim == 0 || lstm_hidden == 0) throw ConfigError("config: zero layer size");
    if (k == 0) throw ConfigError("config: K must be >= 1");
    if (variant != Variant::ATClassifier && variant != Variant::NoPaths && !use_actions &&
        !use_objects)
        throw ConfigError("config: at least one pathway must be enabled");
}

std::string PathwayConfig::canonical() const {
    std::string s = std::string("variant=") + to_string(variant);
    s += " feat=" + std::to_string(feature_dim);
    s += " proj=" + std::to_string(proj_dim);
    s += " hid=" + std::to_string(lstm_hidden);
    s += " k=" + std::to_string(k);
    s += std::string(" act=") + (use_actions ? "1" : "0");
    s += std::string(" obj=") + (use_objects ? "1" : "0");
    s += std::string(" aud=") + (use_audio_head ? "1" : "0");
    s += std::string(" txt=") + (use_text_head ? "1" : "0");
    s += std::string(" att=") + (use_attention ? "1" : "0");
    return s;
}

std::uint64_t PathwayConfig::hash() const {
    // FNV-1a over the canonical string
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

using ShapeList = std::vector<std::pair<std::string, std::vector<std::size_t>>>;

void add_affine(ShapeList& out, const std::string& name, std::size_t rows, std::size_t cols) {
    out.push_back({name + ".weight", {rows, cols}});
    out.push_back({name + ".bias", {rows}});
}

void add_bilstm(ShapeList& out, const std::string& name, std::size_t in, std::size_t hid) {
    for (const char* dir : {"fwd", "bwd"}) {
        std::string base = name + "." + dir;
        out.push_back({base + ".w_ih", {4 * hid, in}});
        out.push_back({base + ".w_hh", {4 * hid, hid}});
        out.push_back({base + ".b_ih", {4 * hid}});
        out.push_back({base + ".b_hh", {4 * hid}});
    }
}

}  // namespace

std::vector<std::pair<std::string, std::vector<std::size_t>>> param_shapes(
    const PathwayConfig& cfg) {
    cfg.validate();
    ShapeList out;
    const std::size_t f = cfg.feature_dim, p = cfg.proj_dim, h = cfg.lstm_hidden;

    switch (cfg.variant) {
        case Variant::ATClassifier:
            add_affine(out, "fc_t", 1, f);
            return out;
        case Variant::NoPaths:
            // raw D and T each projected, aggregated by one shared BiLSTM,
            // scored by the attention-style head plus the text head
            add_affine(out, "fc_da", p, f);
            add_affine(out, "fc_a", p, f);
            add_bilstm(out, "lstm_a", p, h);
            add_affine(out, "fc_att", 1, 2 * h);
            add_affine(out, "fc_t", 1, f);
            return out;
        default:
            break;
    }

    if (cfg.use_actions) {
        add_affine(out, "fc_da", p, f);
        add_affine(out, "fc_a", p, f);
        add_bilstm(out, "lstm_a", p, h);
    }
    if (cfg.use_objects) {
        add_affine(out, "fc_do", p, f);
        add_affine(out, "fc_o", p, f);
        add_bilstm(out, "lstm_o", p, h);
    }
    if (cfg.use_attention) add_affine(out, "fc_att", 1, 2 * h);
    if (cfg.use_text_head) add_affine(out, "fc_t", 1, f);
    if (cfg.use_audio_head) add_affine(out, "fc_d", 1, f);
    return out;
}

std::size_t count_params(const PathwayConfig& cfg) {
    std::size_t total = 0;
    for (const auto& [name, shape] : param_shapes(cfg)) total += Tensor::count(shape);
    return total;
}

namespace {

// fan_in rule: affine uses the input width, LSTM tensors use the hidden size
std::size_t fan_in_of(const std::string& name, const std::vector<std::size_t>& shape,
                      std::size_t lstm_hidden) {
    if (name.find("lstm") != std::string::npos) return lstm_hidden;
    (void)shape;
    return 0;  // resolved by caller from the weight's column count
}

struct Assembler {
    std::vector<std::pair<std::string, Var>> vars;

    Var take(const std::string& name) {
        for (auto& [n, v] : vars)
            if (n == name) return v;
        throw ConfigError("missing parameter tensor '" + name + "'");
    }

    AffineParams affine(const std::string& base) {
        return {take(base + ".weight"), take(base + ".bias")};
    }

    LstmCellParams lstm_dir(const std::string& base) {
        return {take(base + ".w_ih"), take(base + ".w_hh"), take(base + ".b_ih"),
                take(base + ".b_hh")};
    }

    BiLstmParams bilstm(const std::string& base) {
        return {lstm_dir(base + ".fwd"), lstm_dir(base + ".bwd")};
    }

    bool has(const std::string& prefix) const {
        for (const auto& [n, v] : vars)
            if (n.rfind(prefix, 0) == 0) return true;
        return false;
    }
};

ModelParams assemble(Assembler& a) {
    ModelParams p;
    if (a.has("fc_da.")) p.fc_da = a.affine("fc_da");
    if (a.has("fc_do.")) p.fc_do = a.affine("fc_do");
    if (a.has("fc_a.")) p.fc_a = a.affine("fc_a");
    if (a.has("fc_o.")) p.fc_o = a.affine("fc_o");
    if (a.has("lstm_a.")) p.lstm_a = a.bilstm("lstm_a");
    if (a.has("lstm_o.")) p.lstm_o = a.bilstm("lstm_o");
    if (a.has("fc_att.")) p.fc_att = a.affine("fc_att");
    if (a.has("fc_t.")) p.fc_t = a.affine("fc_t");
    if (a.has("fc_d.")) p.fc_d = a.affine("fc_d");
    return p;
}

}  // namespace

ModelParams init_params(const PathwayConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Assembler a;
    for (const auto& [name, shape] : param_shapes(cfg)) {
        std::size_t fan_in = fan_in_of(name, shape, cfg.lstm_hidden);
        if (fan_in == 0) {
            // affine: columns of the weight matrix define the layer input
            if (shape.size() == 2) {
                fan_in = shape[1];
            } else {
                // bias: same bound as its weight
                if (name == "fc_att.bias") fan_in = 2 * cfg.lstm_hidden;
                else if (name == "fc_t.bias" || name == "fc_d.bias") fan_in = cfg.feature_dim;
                else fan_in = cfg.feature_dim;  // projection biases
            }
        }
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Tensor t(shape);
        for (double& v : t.data) v = uniform_in(rng, -bound, bound);
        a.vars.push_back({name, Var::leaf(std::move(t), true)});
    }
    return assemble(a);
}

std::vector<std::pair<std::string, Var>> ModelParams::named() const {
    std::vector<std::pair<std::string, Var>> out;
    auto push_affine = [&](const char* base, const std::optional<AffineParams>& p) {
        if (!p) return;
        out.push_back({std::string(base) + ".weight", p->weight});
        out.push_back({std::string(base) + ".bias", p->bias});
    };
    auto push_dir = [&](const std::string& base, const LstmCellParams& d) {
        out.push_back({base + ".w_ih", d.w_ih});
        out.push_back({base + ".w_hh", d.w_hh});
        out.push_back({base + ".b_ih", d.b_ih});
        out.push_back({base + ".b_hh", d.b_hh});
    };
    auto push_bilstm = [&](const char* base, const std::optional<BiLstmParams>& p) {
        if (!p) return;
        push_dir(std::string(base) + ".fwd", p->fwd);
        push_dir(std::string(base) + ".bwd", p->bwd);
    };
    // fixed serialization order
    push_affine("fc_da", fc_da);
    push_affine("fc_a", fc_a);
    push_bilstm("lstm_a", lstm_a);
    push_affine("fc_do", fc_do);
    push_affine("fc_o", fc_o);
    push_bilstm("lstm_o", lstm_o);
    push_affine("fc_att", fc_att);
    push_affine("fc_t", fc_t);
    push_affine("fc_d", fc_d);
    return out;
}

std::vector<Var> ModelParams::all_vars() const {
    std::vector<Var> out;
    for (auto& [n, v] : named()) out.push_back(v);
    return out;
}

std::size_t ModelParams::total_size() const {
    std::size_t n = 0;
    for (const auto& [name, v] : named()) n += v.size();
    return n;
}

void ModelParams::zero_grads() const {
    for (auto& [n, v] : named()) {
        Var vv = v;
        vv.zero_grad();
    }
}

std::vector<Var> project_sequence(const std::vector<Tensor>& seq, const AffineParams& fc) {
    std::vector<Var> out;
    out.reserve(seq.size());
    for (const Tensor& t : seq)
        out.push_back(affine(Var::constant(t), fc.weight, fc.bias));
    return out;
}

std::vector<Var> project_pathway(const PathwayFeatureSet& set, const ModelParams& params,
                                 const PathwayConfig& cfg) {
    (void)cfg;
    const std::optional<AffineParams>* fc = nullptr;
    if (set.source == PathwaySource::Audio)
        fc = (set.kind == LabelKind::Action) ? &params.fc_da : &params.fc_do;
    else
        fc = (set.kind == LabelKind::Action) ? &params.fc_a : &params.fc_o;
    if (!*fc)
        throw ConfigError(std::string("project_pathway: layer for (") + to_string(set.source) +
                          ", " + to_string(set.kind) + ") not present under this config");
    return project_sequence(set.vectors, **fc);
}

Var global_representation(std::span<const Var> seq, LabelKind kind, const ModelParams& params) {
    const std::optional<BiLstmParams>& l =
        (kind == LabelKind::Action) ? params.lstm_a : params.lstm_o;
    if (!l) throw ConfigError("global_representation: LSTM for this pathway not present");
    return bilstm(seq, l->fwd, l->bwd);
}

}  // namespace aopath
