/**
 * @file toml_util.hpp
 * @brief Strict TOML field access for the config readers. Every error names
 * the offending key path, e.g. `algorithm[1].timeout`.
 */
#pragma once

#include <toml.hpp>

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "graspbench/error.hpp"
#include "graspbench/geometry.hpp"

namespace graspbench::cfg {

inline std::string join(std::string_view path, std::string_view key) {
  return path.empty() ? std::string(key) : std::string(path) + "." + std::string(key);
}

inline std::string index_path(std::string_view path, std::size_t i) {
  return std::string(path) + "[" + std::to_string(i) + "]";
}

[[noreturn]] inline void fail(std::string_view path, std::string_view msg) {
  throw Error(ErrorCode::ConfigError, std::string(path) + ": " + std::string(msg));
}

inline toml::table parse_file(const std::filesystem::path& file) {
  try {
    return toml::parse_file(file.string());
  } catch (const toml::parse_error& e) {
    const auto& src = e.source();
    throw Error(ErrorCode::ConfigError, file.string() + ":" + std::to_string(src.begin.line) + ":" +
                                            std::to_string(src.begin.column) + ": " + std::string(e.description()));
  }
}

inline toml::table parse_string(std::string_view text, std::string_view name = "<string>") {
  try {
    return toml::parse(text, name);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorCode::ConfigError, std::string(name) + ":" + std::to_string(e.source().begin.line) + ": " +
                                            std::string(e.description()));
  }
}

inline void reject_unknown(const toml::table& t, std::string_view path, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, node] : t) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key.str() == a;
    if (!ok) fail(join(path, key.str()), "unknown key");
  }
}

inline std::optional<double> opt_double(const toml::table& t, std::string_view path, std::string_view key) {
  const auto* n = t.get(key);
  if (!n) return std::nullopt;
  if (auto v = n->value<double>(); v && (n->is_floating_point() || n->is_integer())) return *v;
  fail(join(path, key), "expected a number");
}

inline double get_double(const toml::table& t, std::string_view path, std::string_view key, double fallback) {
  return opt_double(t, path, key).value_or(fallback);
}

inline double req_double(const toml::table& t, std::string_view path, std::string_view key) {
  const auto v = opt_double(t, path, key);
  if (!v) fail(join(path, key), "required number missing");
  return *v;
}

inline std::optional<std::int64_t> opt_int(const toml::table& t, std::string_view path, std::string_view key) {
  const auto* n = t.get(key);
  if (!n) return std::nullopt;
  if (!n->is_integer()) fail(join(path, key), "expected an integer");
  return n->value<std::int64_t>();
}

inline std::optional<bool> opt_bool(const toml::table& t, std::string_view path, std::string_view key) {
  const auto* n = t.get(key);
  if (!n) return std::nullopt;
  if (!n->is_boolean()) fail(join(path, key), "expected true or false");
  return n->value<bool>();
}

inline std::optional<std::string> opt_string(const toml::table& t, std::string_view path, std::string_view key) {
  const auto* n = t.get(key);
  if (!n) return std::nullopt;
  if (!n->is_string()) fail(join(path, key), "expected a string");
  return n->value<std::string>();
}

inline std::string req_string(const toml::table& t, std::string_view path, std::string_view key) {
  auto v = opt_string(t, path, key);
  if (!v) fail(join(path, key), "required string missing");
  return *v;
}

inline const toml::table* opt_table(const toml::table& t, std::string_view path, std::string_view key) {
  const auto* n = t.get(key);
  if (!n) return nullptr;
  if (!n->is_table()) fail(join(path, key), "expected a table");
  return n->as_table();
}

/// Array of tables (`[[key]]`); empty when absent.
inline std::vector<const toml::table*> table_array(const toml::table& t, std::string_view path, std::string_view key) {
  std::vector<const toml::table*> out;
  const auto* n = t.get(key);
  if (!n) return out;
  const auto* arr = n->as_array();
  if (!arr || !arr->is_array_of_tables()) fail(join(path, key), "expected an array of tables");
  for (const auto& e : *arr) out.push_back(e.as_table());
  return out;
}

inline std::optional<std::vector<std::string>> opt_string_list(const toml::table& t, std::string_view path,
                                                               std::string_view key) {
  const auto* n = t.get(key);
  if (!n) return std::nullopt;
  const auto* arr = n->as_array();
  if (!arr) fail(join(path, key), "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    const auto s = (*arr)[i].value<std::string>();
    if (!(*arr)[i].is_string() || !s) fail(index_path(join(path, key), i), "expected a string");
    out.push_back(*s);
  }
  return out;
}

/// `[x, y]` pair of numbers.
inline std::optional<Point2> opt_point(const toml::table& t, std::string_view path, std::string_view key) {
  const auto* n = t.get(key);
  if (!n) return std::nullopt;
  const auto* arr = n->as_array();
  if (!arr || arr->size() != 2) fail(join(path, key), "expected [x, y]");
  Point2 p;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& e = (*arr)[i];
    if (!(e.is_floating_point() || e.is_integer())) fail(index_path(join(path, key), i), "expected a number");
    (i == 0 ? p.x : p.y) = *e.value<double>();
  }
  return p;
}

inline std::vector<Point2> req_point_list(const toml::table& t, std::string_view path, std::string_view key) {
  const auto* n = t.get(key);
  if (!n) fail(join(path, key), "required list of [x, y] points missing");
  const auto* arr = n->as_array();
  if (!arr) fail(join(path, key), "expected a list of [x, y] points");
  std::vector<Point2> out;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    const auto* pt = (*arr)[i].as_array();
    const std::string p = index_path(join(path, key), i);
    if (!pt || pt->size() != 2 || !((*pt)[0].is_number()) || !((*pt)[1].is_number())) fail(p, "expected [x, y]");
    out.push_back({*(*pt)[0].value<double>(), *(*pt)[1].value<double>()});
  }
  return out;
}

}  // namespace graspbench::cfg
