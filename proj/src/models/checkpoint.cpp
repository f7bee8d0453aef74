#include "gnnevade/models/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "gnnevade/common/errors.hpp"

namespace gnnevade::models {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr const char* kMagic = "GNNCKPT1";

}  // namespace

json to_json(const TrainConfig& c) {
    return {{"learning_rate", c.learning_rate}, {"weight_decay", c.weight_decay}, {"max_epochs", c.max_epochs},
            {"patience", c.patience},           {"dropout", c.dropout},           {"hidden", c.hidden},
            {"layers", c.layers},               {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& doc) {
    TrainConfig c;
    c.learning_rate = doc.at("learning_rate").get<double>();
    c.weight_decay = doc.at("weight_decay").get<double>();
    c.max_epochs = doc.at("max_epochs").get<std::size_t>();
    c.patience = doc.at("patience").get<std::size_t>();
    c.dropout = doc.at("dropout").get<double>();
    c.hidden = doc.at("hidden").get<std::size_t>();
    c.layers = doc.at("layers").get<std::size_t>();
    c.seed = doc.at("seed").get<std::uint64_t>();
    return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    const ModelParams& p = ckpt.model.params;
    json header;
    header["architecture"] = to_string(p.arch);
    header["layers"] = p.layers;
    header["hidden"] = p.hidden;
    header["in_dim"] = p.in_dim;
    header["num_classes"] = p.num_classes;
    header["dropout"] = p.dropout;
    header["seed"] = p.seed;
    header["best_val_accuracy"] = ckpt.model.best_val_accuracy;
    header["best_epoch"] = ckpt.model.best_epoch;
    header["loss_curve"] = ckpt.model.loss_curve;
    header["config"] = ckpt.train_config;
    if (ckpt.adv_config) header["adv_config"] = *ckpt.adv_config;
    json manifest = json::array();
    std::size_t offset = 0;
    for (std::size_t k = 0; k < p.values.size(); ++k) {
        manifest.push_back({{"name", p.names[k]}, {"rows", p.values[k].rows()}, {"cols", p.values[k].cols()},
                            {"offset", offset}});
        offset += static_cast<std::size_t>(p.values[k].size());
    }
    header["params"] = std::move(manifest);
    header["num_values"] = offset;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    out << kMagic << '\n' << header.dump() << '\n';
    for (const auto& v : p.values)
        out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open checkpoint " + path.string());
    std::string magic;
    std::string line;
    if (!std::getline(in, magic) || magic != kMagic) throw ParseError(path.string() + " is not a model checkpoint");
    if (!std::getline(in, line)) throw ParseError("checkpoint header missing");
    Checkpoint ckpt;
    try {
        const json header = json::parse(line);
        ModelParams& p = ckpt.model.params;
        p.arch = architecture_from_string(header.at("architecture").get<std::string>());
        p.layers = header.at("layers").get<std::size_t>();
        p.hidden = header.at("hidden").get<std::size_t>();
        p.in_dim = header.at("in_dim").get<std::size_t>();
        p.num_classes = header.at("num_classes").get<std::size_t>();
        p.dropout = header.at("dropout").get<double>();
        p.seed = header.at("seed").get<std::uint64_t>();
        ckpt.model.best_val_accuracy = header.at("best_val_accuracy").get<double>();
        ckpt.model.best_epoch = header.at("best_epoch").get<std::size_t>();
        ckpt.model.loss_curve = header.at("loss_curve").get<std::vector<double>>();
        ckpt.train_config = header.at("config");
        if (header.contains("adv_config")) ckpt.adv_config = header["adv_config"];
        std::size_t expected_offset = 0;
        for (const json& entry : header.at("params")) {
            const auto rows = entry.at("rows").get<Eigen::Index>();
            const auto cols = entry.at("cols").get<Eigen::Index>();
            if (entry.at("offset").get<std::size_t>() != expected_offset)
                throw ParseError("checkpoint manifest offsets are not contiguous");
            DenseMatrix value(rows, cols);
            in.read(reinterpret_cast<char*>(value.data()), static_cast<std::streamsize>(value.size() * sizeof(double)));
            if (!in) throw ParseError("checkpoint value block is truncated");
            if (!value.allFinite()) throw ParseError("checkpoint holds non-finite values");
            p.names.push_back(entry.at("name").get<std::string>());
            p.values.push_back(std::move(value));
            expected_offset += static_cast<std::size_t>(rows * cols);
        }
        // The manifest must match the layout the architecture expects.
        const ModelParams fresh = init_params(p.arch, p.in_dim, p.num_classes, p.layers, p.hidden, p.dropout, 0);
        if (fresh.names != p.names) throw ParseError("checkpoint manifest does not match its architecture");
        for (std::size_t k = 0; k < p.values.size(); ++k)
            if (fresh.values[k].rows() != p.values[k].rows() || fresh.values[k].cols() != p.values[k].cols())
                throw ParseError("checkpoint parameter " + p.names[k] + " has the wrong shape");
    } catch (const json::exception& e) {
        throw ParseError("checkpoint " + path.string() + ": " + e.what());
    }
    if (in.peek() != std::char_traits<char>::eof()) throw ParseError("checkpoint has trailing bytes");
    return ckpt;
}

}  // namespace gnnevade::models
