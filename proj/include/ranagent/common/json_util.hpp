#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace ranagent {

using json = nlohmann::json;

/// Flattens an object into dotted leaf paths. Arrays, scalars and empty
/// objects are leaves; non-empty objects are descended into.
///   {"a": {"b": 1}, "c": [1, 2]} -> {"a.b": 1, "c": [1, 2]}
std::map<std::string, json> flatten(const json& value, const std::string& prefix = "");

/// Writes `value` at a dotted path, creating intermediate objects.
void set_path(json& root, std::string_view path, const json& value);

/// Removes the leaf at a dotted path and prunes parents left empty.
void remove_path(json& root, std::string_view path);

/// Looks up a dotted path; returns nullptr when any segment is missing.
const json* find_path(const json& root, std::string_view path);

std::uint64_t fnv1a(std::string_view bytes);

/// Hash of the canonical (sorted-key) serialization.
std::uint64_t content_hash(const json& value);

/// Renders a leaf for human-facing text: strings unquoted, integral doubles
/// without a fraction, arrays joined by ", ".
std::string render_value(const json& value);

}  // namespace ranagent
