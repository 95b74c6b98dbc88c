#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace simuda {

/// A scalar or single-level array from a key-value document.
class Value {
 public:
  enum class Type { string, integer, real, boolean, array };

  static Value string(std::string s);
  static Value integer(std::int64_t v);
  static Value real(double v);
  static Value boolean(bool v);
  static Value array(std::vector<Value> items);

  Type type() const { return type_; }
  bool is_array() const { return type_ == Type::array; }

  // Accessors throw ConfigError naming `key` on a type mismatch.
  const std::string& as_string(std::string_view key) const;
  double as_real(std::string_view key) const;  // integers widen
  std::int64_t as_integer(std::string_view key) const;
  bool as_boolean(std::string_view key) const;
  const std::vector<Value>& as_array(std::string_view key) const;

  /// Canonical TOML-compatible rendering.
  std::string render() const;

  friend bool operator==(const Value&, const Value&) = default;

 private:
  Type type_ = Type::string;
  std::string text_;
  std::int64_t int_ = 0;
  double real_ = 0.0;
  bool bool_ = false;
  std::vector<Value> items_;
};

/// Flat dotted-key document: a subset of TOML with `[section]` headers,
/// `key = value` lines, `#` comments and one-line arrays.
class KeyValueDoc {
 public:
  static KeyValueDoc parse(std::string_view text, const std::string& origin = "<config>");
  static KeyValueDoc load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  const Value* find(const std::string& key) const;
  void set(const std::string& key, Value v) { values_[key] = std::move(v); }
  bool erase(const std::string& key) { return values_.erase(key) != 0; }

  const std::map<std::string, Value>& entries() const { return values_; }

  /// Keys sorted, one `key = value` per line.
  std::string render() const;

 private:
  std::map<std::string, Value> values_;
};

}  // namespace simuda
