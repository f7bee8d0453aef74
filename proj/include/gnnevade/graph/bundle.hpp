#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gnnevade/graph/graph.hpp"

namespace gnnevade::graph {

/// Version of the graph-bundle JSON layout written by save_bundle().
inline constexpr int kBundleVersion = 1;

/// Parses a bundle document. Throws ParseError for malformed JSON/structure and
/// ValidationError (naming the violated rule) for invariant violations.
Graph bundle_from_json(const nlohmann::json& doc);
nlohmann::json bundle_to_json(const Graph& g);

Graph load_bundle(const std::filesystem::path& path);
void save_bundle(const Graph& g, const std::filesystem::path& path);

/// Empty when the file is a valid bundle; otherwise one message per detected
/// problem, each prefixed with the rule name.
std::vector<std::string> validate_bundle(const std::filesystem::path& path);

}  // namespace gnnevade::graph
