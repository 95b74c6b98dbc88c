#include "simuda/core/keyvalue.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "simuda/core/errors.hpp"

namespace simuda {

Value Value::string(std::string s) {
  Value v;
  v.type_ = Type::string;
  v.text_ = std::move(s);
  return v;
}
Value Value::integer(std::int64_t i) {
  Value v;
  v.type_ = Type::integer;
  v.int_ = i;
  return v;
}
Value Value::real(double d) {
  Value v;
  v.type_ = Type::real;
  v.real_ = d;
  return v;
}
Value Value::boolean(bool b) {
  Value v;
  v.type_ = Type::boolean;
  v.bool_ = b;
  return v;
}
Value Value::array(std::vector<Value> items) {
  Value v;
  v.type_ = Type::array;
  v.items_ = std::move(items);
  return v;
}

namespace {

[[noreturn]] void type_error(std::string_view key, const char* expected) {
  throw ConfigError("key '" + std::string(key) + "' must be " + expected);
}

std::string render_real(double d) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, d);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        out += c;
    }
  }
  return out + "\"";
}

class Parser {
 public:
  Parser(std::string_view text, std::string origin, int line) : s_(text), origin_(std::move(origin)), line_(line) {}

  Value value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return Value::string(quoted());
    if (c == '[') return array();
    return bare();
  }

  void expect_end() {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] != '#') fail("unexpected trailing text");
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError(origin_ + ":" + std::to_string(line_) + ": " + why);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  std::string quoted() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) fail("dangling escape");
        const char e = s_[pos_++];
        switch (e) {
          case 'n':
            c = '\n';
            break;
          case 't':
            c = '\t';
            break;
          case '"':
          case '\\':
            c = e;
            break;
          default:
            fail(std::string("unsupported escape \\") + e);
        }
      }
      out += c;
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  Value array() {
    ++pos_;
    std::vector<Value> items;
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == ']') {
      ++pos_;
      return Value::array(std::move(items));
    }
    for (;;) {
      Value v = value();
      if (v.is_array()) fail("nested arrays are not supported");
      items.push_back(std::move(v));
      skip_ws();
      if (pos_ >= s_.size()) fail("unterminated array");
      if (s_[pos_] == ',') {
        ++pos_;
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ']') {
          ++pos_;
          break;
        }
        continue;
      }
      if (s_[pos_] == ']') {
        ++pos_;
        break;
      }
      fail("expected ',' or ']' in array");
    }
    return Value::array(std::move(items));
  }

  Value bare() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#' && s_[pos_] != ' ' &&
           s_[pos_] != '\t') {
      ++pos_;
    }
    std::string tok(s_.substr(start, pos_ - start));
    if (tok == "true") return Value::boolean(true);
    if (tok == "false") return Value::boolean(false);
    std::string clean;
    for (char c : tok) {
      if (c != '_') clean += c;
    }
    const bool looks_real = clean.find_first_of(".eE") != std::string::npos || clean == "inf" || clean == "nan";
    if (!looks_real) {
      std::int64_t i = 0;
      const char* b = clean.data();
      if (!clean.empty() && clean[0] == '+') ++b;
      auto [p, ec] = std::from_chars(b, clean.data() + clean.size(), i);
      if (ec == std::errc() && p == clean.data() + clean.size() && !clean.empty()) return Value::integer(i);
    } else {
      double d = 0.0;
      const char* b = clean.data();
      if (!clean.empty() && clean[0] == '+') ++b;
      auto [p, ec] = std::from_chars(b, clean.data() + clean.size(), d);
      if (ec == std::errc() && p == clean.data() + clean.size()) return Value::real(d);
    }
    fail("cannot parse value '" + tok + "' (strings must be quoted)");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::string origin_;
  int line_;
};

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  }
  return k.find("..") == std::string::npos;
}

}  // namespace

const std::string& Value::as_string(std::string_view key) const {
  if (type_ != Type::string) type_error(key, "a string");
  return text_;
}

double Value::as_real(std::string_view key) const {
  if (type_ == Type::real) return real_;
  if (type_ == Type::integer) return static_cast<double>(int_);
  type_error(key, "a number");
}

std::int64_t Value::as_integer(std::string_view key) const {
  if (type_ != Type::integer) type_error(key, "an integer");
  return int_;
}

bool Value::as_boolean(std::string_view key) const {
  if (type_ != Type::boolean) type_error(key, "a boolean");
  return bool_;
}

const std::vector<Value>& Value::as_array(std::string_view key) const {
  if (type_ != Type::array) type_error(key, "an array");
  return items_;
}

std::string Value::render() const {
  switch (type_) {
    case Type::string:
      return quote(text_);
    case Type::integer:
      return std::to_string(int_);
    case Type::real:
      return render_real(real_);
    case Type::boolean:
      return bool_ ? "true" : "false";
    case Type::array: {
      std::string out = "[";
      for (std::size_t i = 0; i < items_.size(); ++i) {
        if (i) out += ", ";
        out += items_[i].render();
      }
      return out + "]";
    }
  }
  return {};
}

KeyValueDoc KeyValueDoc::parse(std::string_view text, const std::string& origin) {
  KeyValueDoc doc;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (line[0] == '[') {
      const auto close = line.find(']');
      if (close == std::string::npos) throw ConfigError(where + ": unterminated section header");
      section = trim(std::string_view(line).substr(1, close - 1));
      if (!valid_key(section)) throw ConfigError(where + ": invalid section name '" + section + "'");
      const std::string rest = trim(std::string_view(line).substr(close + 1));
      if (!rest.empty() && rest[0] != '#') throw ConfigError(where + ": trailing text after section header");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    std::string key = trim(std::string_view(line).substr(0, eq));
    if (!valid_key(key)) throw ConfigError(where + ": invalid key '" + key + "'");
    if (!section.empty()) key = section + "." + key;
    Parser p(std::string_view(line).substr(eq + 1), origin, line_no);
    Value v = p.value();
    p.expect_end();
    if (doc.values_.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    doc.values_.emplace(std::move(key), std::move(v));
  }
  return doc;
}

KeyValueDoc KeyValueDoc::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

const Value* KeyValueDoc::find(const std::string& key) const {
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::string KeyValueDoc::render() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v.render() + "\n";
  return out;
}

}  // namespace simuda
