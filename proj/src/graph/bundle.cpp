#include "gnnevade/graph/bundle.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "gnnevade/common/errors.hpp"

namespace gnnevade::graph {

using nlohmann::json;

namespace {

const json& field(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) throw ParseError(std::string("bundle is missing field '") + key + "'");
    return *it;
}

std::size_t count_field(const json& doc, const char* key) {
    const json& v = field(doc, key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ParseError(std::string("field '") + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

std::vector<NodeId> read_mask(const json& doc, const char* key) {
    const json& v = field(doc, key);
    if (!v.is_array()) throw ParseError(std::string("field '") + key + "' must be an array");
    std::vector<NodeId> out;
    out.reserve(v.size());
    for (const json& x : v) {
        if (!x.is_number_integer()) throw ParseError(std::string(key) + " holds a non-integer id");
        out.push_back(x.get<NodeId>());
    }
    return out;
}

}  // namespace

Graph bundle_from_json(const json& doc) {
    if (!doc.is_object()) throw ParseError("bundle root must be an object");
    const json& version = field(doc, "version");
    if (!version.is_number_integer() || version.get<int>() != kBundleVersion)
        throw ParseError("unsupported bundle version " + version.dump());

    Graph::Spec spec;
    spec.name = field(doc, "name").get<std::string>();
    const std::size_t n = count_field(doc, "num_nodes");
    const std::size_t d = count_field(doc, "num_features");
    spec.num_classes = count_field(doc, "num_classes");
    spec.feature_kind = feature_kind_from_string(field(doc, "feature_kind").get<std::string>());
    const bool binary = spec.feature_kind == FeatureKind::binary;

    const json& rows = field(doc, "features");
    if (!rows.is_array() || rows.size() != n)
        throw ValidationError("feature-rows", "features must hold one row per node");
    spec.features = DenseMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i) {
        if (!rows[i].is_array()) throw ParseError("feature row " + std::to_string(i) + " is not an array");
        std::set<std::size_t> cols;
        for (const json& entry : rows[i]) {
            if (!entry.is_array() || entry.empty() || entry.size() > 2 || !entry[0].is_number_integer())
                throw ParseError("feature row " + std::to_string(i) + " has a malformed entry");
            const long long col = entry[0].get<long long>();
            if (col < 0 || static_cast<std::size_t>(col) >= d)
                throw ValidationError("feature-column", "row " + std::to_string(i) + " column " +
                                                            std::to_string(col) + " out of range");
            if (!cols.insert(static_cast<std::size_t>(col)).second)
                throw ValidationError("feature-column", "row " + std::to_string(i) + " repeats column " +
                                                            std::to_string(col));
            double value = 1.0;
            if (entry.size() == 2) {
                if (!entry[1].is_number()) throw ParseError("feature value is not a number");
                value = entry[1].get<double>();
            } else if (!binary) {
                throw ParseError("continuous feature entry without a value in row " + std::to_string(i));
            }
            spec.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col)) = value;
        }
    }

    const json& edges = field(doc, "edges");
    if (!edges.is_array()) throw ParseError("edges must be an array");
    spec.edges.reserve(edges.size());
    for (const json& e : edges) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
            throw ParseError("edge entries must be [u, v] integer pairs");
        const NodeId u = e[0].get<NodeId>();
        const NodeId v = e[1].get<NodeId>();
        if (u >= v)
            throw ValidationError("edge-order", "edge [" + std::to_string(u) + ", " + std::to_string(v) +
                                                    "] must satisfy u < v");
        spec.edges.push_back({u, v});
    }

    const json& labels = field(doc, "labels");
    if (!labels.is_array() || labels.size() != n)
        throw ValidationError("label-count", "labels must hold one entry per node");
    spec.labels.reserve(n);
    for (const json& y : labels) {
        if (y.is_null()) {
            spec.labels.emplace_back(std::nullopt);
        } else if (y.is_number_integer()) {
            spec.labels.emplace_back(y.get<int>());
        } else {
            throw ParseError("labels must be integers or null");
        }
    }
    spec.train_mask = read_mask(doc, "train_mask");
    spec.val_mask = read_mask(doc, "val_mask");
    spec.test_mask = read_mask(doc, "test_mask");
    return Graph(std::move(spec));
}

json bundle_to_json(const Graph& g) {
    json doc;
    doc["version"] = kBundleVersion;
    doc["name"] = g.name();
    doc["num_nodes"] = g.num_nodes();
    doc["num_features"] = g.num_features();
    doc["num_classes"] = g.num_classes();
    doc["feature_kind"] = to_string(g.feature_kind());
    const bool binary = g.feature_kind() == FeatureKind::binary;
    json rows = json::array();
    const DenseMatrix& x = g.features();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (x(i, j) == 0.0) continue;
            if (binary) {
                row.push_back(json::array({j}));
            } else {
                row.push_back(json::array({j, x(i, j)}));
            }
        }
        rows.push_back(std::move(row));
    }
    doc["features"] = std::move(rows);
    json edges = json::array();
    for (const Edge& e : g.edges()) edges.push_back(json::array({e.u, e.v}));
    doc["edges"] = std::move(edges);
    json labels = json::array();
    for (const auto& y : g.labels()) labels.push_back(y ? json(*y) : json(nullptr));
    doc["labels"] = std::move(labels);
    doc["train_mask"] = g.train_mask();
    doc["val_mask"] = g.val_mask();
    doc["test_mask"] = g.test_mask();
    return doc;
}

Graph load_bundle(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open bundle " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError("bundle " + path.string() + ": " + e.what());
    }
    try {
        return bundle_from_json(doc);
    } catch (const json::exception& e) {
        throw ParseError("bundle " + path.string() + ": " + e.what());
    }
}

void save_bundle(const Graph& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write bundle " + path.string());
    out << bundle_to_json(g).dump() << '\n';
}

std::vector<std::string> validate_bundle(const std::filesystem::path& path) {
    try {
        (void)load_bundle(path);
        return {};
    } catch (const ValidationError& e) {
        return {e.what()};
    } catch (const ParseError& e) {
        return {std::string("parse: ") + e.what()};
    }
}

}  // namespace gnnevade::graph
