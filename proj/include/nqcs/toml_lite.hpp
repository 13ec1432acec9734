#pragma once
// Minimal TOML reader covering the subset the config files use: tables,
// arrays of tables, dotted keys, strings, booleans, integers, floats, and
// (possibly multi-line) arrays. Output is a json tree, so both config formats
// funnel through one loader. Datetimes and inline tables are rejected.

#include <cctype>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace nqcs::toml_lite {

namespace detail {

[[noreturn]] inline void fail(std::size_t line, const std::string& what) {
  throw std::runtime_error("toml line " + std::to_string(line) + ": " + what);
}

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// cut an end-of-line comment, respecting both quote styles
inline std::string strip_comment(const std::string& s) {
  char in_quote = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_quote) {
      if (in_quote == '"' && c == '\\') {
        ++i;
      } else if (c == in_quote) {
        in_quote = 0;
      }
    } else if (c == '"' || c == '\'') {
      in_quote = c;
    } else if (c == '#') {
      return s.substr(0, i);
    }
  }
  return s;
}

inline bool bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

inline std::vector<std::string> split_key(const std::string& s, std::size_t line) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == '.') {
      if (cur.empty()) fail(line, "empty key segment");
      parts.push_back(cur);
      cur.clear();
    } else if (bare_key_char(c)) {
      cur += c;
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      fail(line, std::string("unsupported character '") + c + "' in key");
    }
  }
  if (cur.empty()) fail(line, "empty key segment");
  parts.push_back(cur);
  return parts;
}

struct cursor {
  const std::string& s;
  std::size_t i = 0;
  std::size_t line;

  void skip_ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool done() {
    skip_ws();
    return i >= s.size();
  }
};

inline nlohmann::json parse_value(cursor& c);

inline std::string parse_basic_string(cursor& c) {
  std::string out;
  ++c.i;
  while (c.i < c.s.size() && c.s[c.i] != '"') {
    char ch = c.s[c.i];
    if (ch == '\\') {
      ++c.i;
      if (c.i >= c.s.size()) fail(c.line, "dangling escape");
      switch (c.s[c.i]) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail(c.line, "unsupported escape");
      }
    } else {
      out += ch;
    }
    ++c.i;
  }
  if (c.i >= c.s.size()) fail(c.line, "unterminated string");
  ++c.i;
  return out;
}

inline nlohmann::json parse_scalar_token(cursor& c) {
  std::size_t start = c.i;
  while (c.i < c.s.size() && c.s[c.i] != ',' && c.s[c.i] != ']' &&
         !std::isspace(static_cast<unsigned char>(c.s[c.i])))
    ++c.i;
  std::string tok = c.s.substr(start, c.i - start);
  if (tok == "true") return true;
  if (tok == "false") return false;
  std::string digits;
  for (char ch : tok)
    if (ch != '_') digits += ch;
  const bool floaty = digits.find_first_of(".eE") != std::string::npos ||
                      digits.find("inf") != std::string::npos ||
                      digits.find("nan") != std::string::npos;
  try {
    std::size_t used = 0;
    if (floaty) {
      const double v = std::stod(digits, &used);
      if (used != digits.size()) fail(c.line, "bad number '" + tok + "'");
      return v;
    }
    const long long v = std::stoll(digits, &used);
    if (used != digits.size()) fail(c.line, "bad number '" + tok + "'");
    return v;
  } catch (const std::logic_error&) {
    fail(c.line, "unsupported value '" + tok + "'");
  }
}

inline nlohmann::json parse_value(cursor& c) {
  c.skip_ws();
  if (c.i >= c.s.size()) fail(c.line, "missing value");
  const char ch = c.s[c.i];
  if (ch == '"') return parse_basic_string(c);
  if (ch == '\'') {
    std::size_t end = c.s.find('\'', c.i + 1);
    if (end == std::string::npos) fail(c.line, "unterminated string");
    std::string out = c.s.substr(c.i + 1, end - c.i - 1);
    c.i = end + 1;
    return out;
  }
  if (ch == '[') {
    ++c.i;
    nlohmann::json arr = nlohmann::json::array();
    c.skip_ws();
    while (c.i < c.s.size() && c.s[c.i] != ']') {
      arr.push_back(parse_value(c));
      c.skip_ws();
      if (c.i < c.s.size() && c.s[c.i] == ',') {
        ++c.i;
        c.skip_ws();
      }
    }
    if (c.i >= c.s.size()) fail(c.line, "unterminated array");
    ++c.i;
    return arr;
  }
  if (ch == '{') fail(c.line, "inline tables are not supported");
  return parse_scalar_token(c);
}

}  // namespace detail

/// Parse TOML text into a json object tree.
[[nodiscard]] inline nlohmann::json parse(const std::string& text) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* table = &root;

  std::size_t pos = 0, line_no = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = detail::strip_comment(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    std::string t = detail::trim(line);
    if (t.empty()) {
      if (pos > text.size()) break;
      continue;
    }

    if (t.front() == '[') {
      const bool is_array = t.size() > 1 && t[1] == '[';
      const std::string close = is_array ? "]]" : "]";
      const std::size_t end = t.find(close);
      if (end == std::string::npos || detail::trim(t.substr(end + close.size())) != "")
        detail::fail(line_no, "malformed table header");
      const auto path =
          detail::split_key(t.substr(is_array ? 2 : 1, end - (is_array ? 2 : 1)), line_no);
      nlohmann::json* node = &root;
      for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        if (node->is_array()) node = &node->back();
        node = &(*node)[path[k]];
        if (node->is_null()) *node = nlohmann::json::object();
      }
      if (node->is_array()) node = &node->back();
      nlohmann::json& slot = (*node)[path.back()];
      if (is_array) {
        if (slot.is_null()) slot = nlohmann::json::array();
        if (!slot.is_array()) detail::fail(line_no, "table redefined as array");
        slot.push_back(nlohmann::json::object());
        table = &slot.back();
      } else {
        if (slot.is_null()) slot = nlohmann::json::object();
        if (!slot.is_object()) detail::fail(line_no, "array redefined as table");
        table = &slot;
      }
      continue;
    }

    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) detail::fail(line_no, "expected key = value");
    const auto path = detail::split_key(t.substr(0, eq), line_no);
    std::string value_text = t.substr(eq + 1);

    // arrays may continue over following lines until brackets balance
    auto depth = [](const std::string& s) {
      int d = 0;
      char q = 0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (q) {
          if (q == '"' && c == '\\')
            ++i;
          else if (c == q)
            q = 0;
        } else if (c == '"' || c == '\'') {
          q = c;
        } else if (c == '[') {
          ++d;
        } else if (c == ']') {
          --d;
        }
      }
      return d;
    };
    int open = depth(value_text);
    while (open > 0 && pos <= text.size()) {
      std::size_t e2 = text.find('\n', pos);
      if (e2 == std::string::npos) e2 = text.size();
      const std::string extra = detail::strip_comment(text.substr(pos, e2 - pos));
      pos = e2 + 1;
      ++line_no;
      value_text += ' ' + extra;
      open += depth(extra);
    }
    if (open != 0) detail::fail(line_no, "unbalanced array");

    nlohmann::json* node = table;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      node = &(*node)[path[k]];
      if (node->is_null()) *node = nlohmann::json::object();
      if (!node->is_object()) detail::fail(line_no, "key collides with a value");
    }
    detail::cursor c{value_text, 0, line_no};
    nlohmann::json v = detail::parse_value(c);
    if (!c.done()) detail::fail(line_no, "trailing characters after value");
    if (!(*node)[path.back()].is_null()) detail::fail(line_no, "duplicate key");
    (*node)[path.back()] = std::move(v);
  }
  return root;
}

}  // namespace nqcs::toml_lite
