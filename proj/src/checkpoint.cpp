#include "aopath/checkpoint.hpp"

#include <fstream>

namespace aopath {

void save_checkpoint(const ModelParams& params, const PathwayConfig& cfg,
                     const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for write: " + path.string());
    const auto named = params.named();
    out << "aopath-ckpt 1 " << cfg.hash() << " " << named.size() << "\n";
    for (const auto& [name, var] : named) {
        const Tensor& t = var.value();
        out << name << " " << t.ndim();
        for (std::size_t d : t.shape) out << " " << d;
        out << "\n";
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    }
    if (!out) throw IoError("write failed: " + path.string());
}

ModelParams load_checkpoint(const PathwayConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path.string());
    std::string magic;
    int version = 0;
    std::uint64_t hash = 0;
    std::size_t count = 0;
    in >> magic >> version >> hash >> count;
    if (magic != "aopath-ckpt" || version != 1 || !in)
        throw IoError("bad checkpoint header: " + path.string());
    if (hash != cfg.hash())
        throw ConfigError("checkpoint config hash mismatch: " + path.string());
    in.ignore(1);

    ModelParams params = init_params(cfg, 0);
    auto named = params.named();
    if (named.size() != count)
        throw IoError("checkpoint tensor count mismatch: " + path.string());
    for (auto& [expect_name, var] : named) {
        std::string name;
        std::size_t ndim = 0;
        in >> name >> ndim;
        if (!in || name != expect_name)
            throw IoError("checkpoint: expected tensor '" + expect_name + "', found '" + name +
                          "'");
        std::vector<std::size_t> shape(ndim);
        for (auto& d : shape) in >> d;
        in.ignore(1);
        Tensor& t = var.mutable_value();
        if (shape != t.shape) throw IoError("checkpoint: shape mismatch for '" + name + "'");
        in.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(double)));
        if (!in) throw IoError("truncated checkpoint: " + path.string());
    }
    return params;
}

}  // namespace aopath
