#include "ranagent/common/json_util.hpp"

#include <vector>

#include "ranagent/common/text.hpp"

namespace ranagent {

namespace {

std::vector<std::string_view> split_path(std::string_view path) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    auto dot = path.find('.', start);
    if (dot == std::string_view::npos) dot = path.size();
    parts.push_back(path.substr(start, dot - start));
    start = dot + 1;
  }
  return parts;
}

void flatten_into(const json& value, const std::string& prefix,
                  std::map<std::string, json>& out) {
  if (value.is_object() && !value.empty()) {
    for (const auto& [key, child] : value.items()) {
      flatten_into(child, prefix.empty() ? key : prefix + "." + key, out);
    }
    return;
  }
  out[prefix] = value;
}

bool remove_rec(json& node, const std::vector<std::string_view>& parts, std::size_t i) {
  if (!node.is_object()) return false;
  const std::string key(parts[i]);
  auto it = node.find(key);
  if (it == node.end()) return false;
  if (i + 1 == parts.size()) {
    node.erase(it);
    return true;
  }
  const bool removed = remove_rec(*it, parts, i + 1);
  if (removed && it->is_object() && it->empty()) node.erase(key);
  return removed;
}

}  // namespace

std::map<std::string, json> flatten(const json& value, const std::string& prefix) {
  std::map<std::string, json> out;
  flatten_into(value, prefix, out);
  return out;
}

void set_path(json& root, std::string_view path, const json& value) {
  json* node = &root;
  for (auto part : split_path(path)) {
    if (!node->is_object()) *node = json::object();
    node = &(*node)[std::string(part)];
  }
  *node = value;
}

void remove_path(json& root, std::string_view path) {
  remove_rec(root, split_path(path), 0);
}

const json* find_path(const json& root, std::string_view path) {
  const json* node = &root;
  for (auto part : split_path(path)) {
    if (!node->is_object()) return nullptr;
    auto it = node->find(std::string(part));
    if (it == node->end()) return nullptr;
    node = &*it;
  }
  return node;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t content_hash(const json& value) {
  // nlohmann::json objects are std::map backed, so dump() is already canonical.
  return fnv1a(value.dump());
}

std::string render_value(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number()) return format_number(value.get<double>());
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  if (value.is_null()) return "none";
  if (value.is_array()) {
    std::string out;
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (i) out += ", ";
      out += render_value(value[i]);
    }
    return out;
  }
  return value.dump();
}

}  // namespace ranagent
