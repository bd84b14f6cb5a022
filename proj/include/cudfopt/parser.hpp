#pragma once

#include <cctype>
#include <charconv>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cudfopt/model.hpp"

namespace cudfopt {

enum class ParseErrorKind { Syntax, UnknownProperty, DuplicateProperty, BadVersion, BadOperator };

inline const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::Syntax: return "syntax";
    case ParseErrorKind::UnknownProperty: return "unknown property";
    case ParseErrorKind::DuplicateProperty: return "duplicate property";
    case ParseErrorKind::BadVersion: return "bad version";
    case ParseErrorKind::BadOperator: return "bad operator";
  }
  return "?";
}

class ParseError : public Error {
public:
  ParseError(std::size_t line, ParseErrorKind kind, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + to_string(kind) + ": " + message),
        line_(line),
        kind_(kind),
        message_(message) {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] ParseErrorKind kind() const noexcept { return kind_; }
  [[nodiscard]] const std::string& message() const noexcept { return message_; }

private:
  std::size_t line_;
  ParseErrorKind kind_;
  std::string message_;
};

struct ParseWarning {
  std::size_t line;
  std::string message;
};

using WarningSink = std::function<void(const ParseWarning&)>;

namespace detail {

inline bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '.' || c == '+' || c == '-' || c == '_';
}

inline bool is_space(char c) { return c == ' ' || c == '\t'; }

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (is_space(s.front()) || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (is_space(s.back()) || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Positive integer without sign or overflow.
inline Version parse_version(std::string_view text, std::size_t line) {
  if (text.empty()) throw ParseError(line, ParseErrorKind::BadVersion, "missing version number");
  for (char c : text) {
    if (c < '0' || c > '9') {
      throw ParseError(line, ParseErrorKind::BadVersion, "version '" + std::string(text) + "' is not a positive integer");
    }
  }
  Version v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(line, ParseErrorKind::BadVersion, "version '" + std::string(text) + "' out of range");
  }
  if (v < 1) throw ParseError(line, ParseErrorKind::BadVersion, "versions start at 1");
  return v;
}

class FormulaReader {
public:
  FormulaReader(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  Formula read() {
    Formula f;
    skip_space();
    if (at_end()) return f;
    for (;;) {
      f.clauses.push_back(read_clause());
      skip_space();
      if (at_end()) break;
      if (peek() != ',') fail(ParseErrorKind::Syntax, "expected ',' or '|'");
      ++pos_;
    }
    return f;
  }

private:
  Clause read_clause() {
    Clause clause;
    for (;;) {
      skip_space();
      if (text_.substr(pos_).starts_with("false!")) {
        if (!clause.atoms.empty()) fail(ParseErrorKind::Syntax, "'false!' cannot be part of a disjunction");
        pos_ += 6;
        skip_space();
        if (!at_end() && peek() == '|') fail(ParseErrorKind::Syntax, "'false!' cannot be part of a disjunction");
        return clause;
      }
      clause.atoms.push_back(read_atom());
      skip_space();
      if (at_end() || peek() != '|') return clause;
      ++pos_;
    }
  }

  Constraint read_atom() {
    skip_space();
    const std::size_t start = pos_;
    while (!at_end() && is_name_char(peek())) ++pos_;
    if (pos_ == start) {
      if (!at_end() && is_op_char(peek())) fail(ParseErrorKind::BadOperator, "operator without package name");
      fail(ParseErrorKind::Syntax, "empty package atom");
    }
    Constraint c{std::string(text_.substr(start, pos_ - start)), std::nullopt};
    skip_space();
    if (at_end() || !is_op_char(peek())) return c;
    const Op op = read_op();
    skip_space();
    const std::size_t num_start = pos_;
    while (!at_end() && !is_space(peek()) && peek() != ',' && peek() != '|') ++pos_;
    c.bound = Bound{op, parse_version(text_.substr(num_start, pos_ - num_start), line_)};
    return c;
  }

  Op read_op() {
    const char c = peek();
    ++pos_;
    const bool eq_next = !at_end() && peek() == '=';
    switch (c) {
      case '=':
        return Op::EQ;
      case '!':
        if (!eq_next) fail(ParseErrorKind::BadOperator, "expected '!='");
        ++pos_;
        return Op::NEQ;
      case '<':
        if (eq_next) ++pos_;
        return eq_next ? Op::LE : Op::LT;
      case '>':
        if (eq_next) ++pos_;
        return eq_next ? Op::GE : Op::GT;
      default:
        fail(ParseErrorKind::BadOperator, "unknown operator");
    }
  }

  static bool is_op_char(char c) { return c == '=' || c == '!' || c == '<' || c == '>'; }
  [[nodiscard]] bool at_end() const { return pos_ >= text_.size(); }
  [[nodiscard]] char peek() const { return text_[pos_]; }
  void skip_space() {
    while (!at_end() && (is_space(peek()) || peek() == '\r')) ++pos_;
  }
  [[noreturn]] void fail(ParseErrorKind kind, const std::string& what) const {
    throw ParseError(line_, kind, what + " in '" + std::string(text_) + "'");
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

inline Formula parse_formula_at(std::string_view text, std::size_t line) {
  const auto trimmed = trim(text);
  if (trimmed == "true!") return {};
  return FormulaReader(trimmed, line).read();
}

struct Property {
  std::string key;
  std::string value;
  std::size_t line;
};

enum class StanzaKind { Preamble, Package, Request };

struct Stanza {
  StanzaKind kind;
  std::size_t line;
  std::vector<Property> props;
};

inline bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!is_name_char(c)) return false;
  }
  return true;
}

inline Keep parse_keep(std::string_view v, std::size_t line) {
  if (v == "version") return Keep::Version;
  if (v == "package") return Keep::Package;
  if (v == "feature") return Keep::Feature;
  if (v == "none") return Keep::None;
  throw ParseError(line, ParseErrorKind::Syntax, "keep must be version, package, feature or none");
}

inline std::vector<Stanza> split_stanzas(std::string_view text) {
  std::vector<Stanza> stanzas;
  bool open = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (trim(line).empty()) {
      open = false;
      continue;
    }
    if (line.front() == '#') continue;
    if (is_space(line.front())) {
      if (!open || stanzas.back().props.empty()) {
        throw ParseError(line_no, ParseErrorKind::Syntax, "continuation line without a property");
      }
      auto& value = stanzas.back().props.back().value;
      if (!value.empty()) value += ' ';
      value += trim(line);
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError(line_no, ParseErrorKind::Syntax, "expected 'property: value'");
    }
    const std::string key(trim(line.substr(0, colon)));
    if (key.empty()) throw ParseError(line_no, ParseErrorKind::Syntax, "empty property name");
    const std::string value(trim(line.substr(colon + 1)));
    if (key == "package" || key == "request" || key == "preamble") {
      const auto kind = key == "package"   ? StanzaKind::Package
                        : key == "request" ? StanzaKind::Request
                                           : StanzaKind::Preamble;
      stanzas.push_back(Stanza{kind, line_no, {}});
      open = true;
    } else if (!open) {
      throw ParseError(line_no, ParseErrorKind::Syntax, "property '" + key + "' outside of a stanza");
    }
    stanzas.back().props.push_back(Property{key, value, line_no});
  }
  return stanzas;
}

inline void check_provides_line(const Formula& f, std::size_t line) {
  for (const auto& clause : f.clauses) {
    if (clause.atoms.size() != 1) throw ParseError(line, ParseErrorKind::Syntax, "provides takes single atoms");
    const auto& b = clause.atoms.front().bound;
    if (b && b->op != Op::EQ) throw ParseError(line, ParseErrorKind::BadOperator, "provides only allows '='");
  }
}

}  // namespace detail

/// Parses a package formula: ',' separates clauses, '|' separates atoms.
inline Formula parse_formula(std::string_view text) { return detail::parse_formula_at(text, 1); }

/// Parses a CUDF document. Unknown properties are reported to `warn`.
inline CudfDocument parse_document(std::string_view text, const WarningSink& warn = {}) {
  using detail::Property;
  using detail::StanzaKind;

  std::vector<PackageDesc> packages;
  Request request;
  bool have_request = false;
  std::map<PackageId, std::size_t> seen;

  for (const auto& stanza : detail::split_stanzas(text)) {
    if (stanza.kind == StanzaKind::Preamble) continue;

    std::map<std::string, const Property*> props;
    for (const auto& p : stanza.props) {
      if (!props.emplace(p.key, &p).second) {
        throw ParseError(p.line, ParseErrorKind::DuplicateProperty, "property '" + p.key + "' given twice");
      }
    }

    if (stanza.kind == StanzaKind::Request) {
      if (have_request) throw ParseError(stanza.line, ParseErrorKind::Syntax, "second request stanza");
      have_request = true;
      for (const auto& p : stanza.props) {
        if (p.key == "install") {
          request.install = detail::parse_formula_at(p.value, p.line);
        } else if (p.key == "remove") {
          request.remove = detail::parse_formula_at(p.value, p.line);
        } else if (p.key == "upgrade") {
          request.upgrade = detail::parse_formula_at(p.value, p.line);
        } else if (p.key != "request" && warn) {
          warn(ParseWarning{p.line, "ignoring request property '" + p.key + "'"});
        }
      }
      continue;
    }

    PackageDesc desc;
    desc.id.name = props.at("package")->value;
    if (!detail::valid_name(desc.id.name)) {
      throw ParseError(stanza.line, ParseErrorKind::Syntax, "invalid package name '" + desc.id.name + "'");
    }
    auto version = props.find("version");
    if (version == props.end()) {
      throw ParseError(stanza.line, ParseErrorKind::BadVersion, "package '" + desc.id.name + "' has no version");
    }
    desc.id.version = detail::parse_version(version->second->value, version->second->line);

    for (const auto& p : stanza.props) {
      if (p.key == "package" || p.key == "version") continue;
      if (p.key == "depends") {
        desc.depends = detail::parse_formula_at(p.value, p.line);
      } else if (p.key == "conflicts") {
        desc.conflicts = detail::parse_formula_at(p.value, p.line);
      } else if (p.key == "provides") {
        desc.provides = detail::parse_formula_at(p.value, p.line);
        detail::check_provides_line(desc.provides, p.line);
      } else if (p.key == "recommends") {
        desc.recommends = detail::parse_formula_at(p.value, p.line);
      } else if (p.key == "installed") {
        if (p.value == "true") {
          desc.installed = true;
        } else if (p.value != "false") {
          throw ParseError(p.line, ParseErrorKind::Syntax, "installed must be true or false");
        }
      } else if (p.key == "keep") {
        desc.keep = detail::parse_keep(p.value, p.line);
      } else if (warn) {
        warn(ParseWarning{p.line, "ignoring package property '" + p.key + "'"});
      }
    }

    if (!seen.emplace(desc.id, stanza.line).second) {
      throw ParseError(stanza.line, ParseErrorKind::Syntax, "duplicate package " + to_string(desc.id));
    }
    packages.push_back(std::move(desc));
  }

  try {
    return make_document(std::move(packages), std::move(request));
  } catch (const ModelError& e) {
    throw ParseError(1, ParseErrorKind::Syntax, e.what());
  }
}

inline std::string render_formula(const Formula& f) {
  std::string out;
  for (std::size_t i = 0; i < f.clauses.size(); ++i) {
    if (i) out += ", ";
    const auto& clause = f.clauses[i];
    if (clause.is_false_marker()) {
      out += "false!";
      continue;
    }
    for (std::size_t j = 0; j < clause.atoms.size(); ++j) {
      if (j) out += " | ";
      const auto& atom = clause.atoms[j];
      out += atom.name;
      if (atom.bound) {
        out += ' ';
        out += op_symbol(atom.bound->op);
        out += ' ';
        out += std::to_string(atom.bound->n);
      }
    }
  }
  return out;
}

inline const char* keep_name(Keep k) {
  switch (k) {
    case Keep::Version: return "version";
    case Keep::Package: return "package";
    case Keep::Feature: return "feature";
    case Keep::None: return "none";
  }
  return "none";
}

/// Canonical text; parse_document(render_document(d)) == d.
inline std::string render_document(const CudfDocument& doc) {
  std::ostringstream out;
  auto prop = [&out](const char* key, const Formula& f) {
    if (!f.empty()) out << key << ": " << render_formula(f) << '\n';
  };
  for (const auto& p : doc.packages()) {
    out << "package: " << p.id.name << '\n' << "version: " << p.id.version << '\n';
    prop("depends", p.depends);
    prop("conflicts", p.conflicts);
    prop("provides", p.provides);
    prop("recommends", p.recommends);
    if (p.installed) out << "installed: true\n";
    if (p.keep) out << "keep: " << keep_name(*p.keep) << '\n';
    out << '\n';
  }
  out << "request: \n";
  prop("install", doc.request().install);
  prop("remove", doc.request().remove);
  prop("upgrade", doc.request().upgrade);
  return out.str();
}

/// Solution stanzas sorted by (name, version), blank line between stanzas.
inline std::string render_solution(const PackageSet& pairs) {
  std::string out;
  bool first = true;
  for (const auto& id : pairs) {
    if (!first) out += '\n';
    first = false;
    out += "package: " + id.name + "\nversion: " + std::to_string(id.version) + "\ninstalled: true\n";
  }
  return out;
}

}  // namespace cudfopt
