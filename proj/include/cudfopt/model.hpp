#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cudfopt {

using Version = std::uint64_t;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class ModelErrorKind { DuplicatePackage, InvalidVersion, InvalidProvides, UnknownName };

class ModelError : public Error {
public:
  ModelError(ModelErrorKind kind, std::string message) : Error(std::move(message)), kind_(kind) {}
  [[nodiscard]] ModelErrorKind kind() const noexcept { return kind_; }

private:
  ModelErrorKind kind_;
};

struct PackageId {
  std::string name;
  Version version = 1;

  friend auto operator<=>(const PackageId&, const PackageId&) = default;
  friend bool operator==(const PackageId&, const PackageId&) = default;
};

using PackageSet = std::set<PackageId>;

inline std::string to_string(const PackageId& id) {
  return "(" + id.name + "," + std::to_string(id.version) + ")";
}

enum class Op { EQ, NEQ, LT, LE, GT, GE };

inline const char* op_symbol(Op op) {
  switch (op) {
    case Op::EQ: return "=";
    case Op::NEQ: return "!=";
    case Op::LT: return "<";
    case Op::LE: return "<=";
    case Op::GT: return ">";
    case Op::GE: return ">=";
  }
  return "?";
}

struct Bound {
  Op op = Op::EQ;
  Version n = 1;

  friend bool operator==(const Bound&, const Bound&) = default;
};

// `name [op n]`
struct Constraint {
  std::string name;
  std::optional<Bound> bound;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

// Disjunction of atoms. A clause with no atoms is the `false!` marker and
// is satisfied by nothing.
struct Clause {
  std::vector<Constraint> atoms;

  [[nodiscard]] bool is_false_marker() const noexcept { return atoms.empty(); }
  friend bool operator==(const Clause&, const Clause&) = default;
};

// Conjunction of clauses, in source order. Empty means true.
struct Formula {
  std::vector<Clause> clauses;

  [[nodiscard]] bool empty() const noexcept { return clauses.empty(); }
  friend bool operator==(const Formula&, const Formula&) = default;
};

enum class Keep { Version, Package, Feature, None };

struct PackageDesc {
  PackageId id;
  Formula depends;
  Formula conflicts;
  Formula provides;
  Formula recommends;
  bool installed = false;
  std::optional<Keep> keep;

  friend bool operator==(const PackageDesc&, const PackageDesc&) = default;
};

struct Request {
  Formula install;
  Formula remove;
  Formula upgrade;

  friend bool operator==(const Request&, const Request&) = default;
};

namespace detail {

inline void check_provides(const PackageDesc& p) {
  for (const auto& clause : p.provides.clauses) {
    if (clause.atoms.size() != 1) {
      throw ModelError(ModelErrorKind::InvalidProvides,
                       "provides of " + to_string(p.id) + " must list single atoms");
    }
    const auto& bound = clause.atoms.front().bound;
    if (bound && bound->op != Op::EQ) {
      throw ModelError(ModelErrorKind::InvalidProvides,
                       "provides of " + to_string(p.id) + " may only use '='");
    }
  }
}

inline void check_bounds(const Formula& f) {
  for (const auto& clause : f.clauses) {
    for (const auto& atom : clause.atoms) {
      if (atom.bound && atom.bound->n < 1) {
        throw ModelError(ModelErrorKind::InvalidVersion, "constraint on '" + atom.name + "' uses version 0");
      }
    }
  }
}

}  // namespace detail

/// A validated CUDF document: the universe of versioned packages, their
/// interdependencies and the request. Immutable once built.
class CudfDocument {
public:
  CudfDocument() = default;

  [[nodiscard]] const std::vector<PackageDesc>& packages() const noexcept { return packages_; }
  [[nodiscard]] const Request& request() const noexcept { return request_; }

  [[nodiscard]] PackageSet universe() const {
    PackageSet out;
    for (const auto& p : packages_) out.insert(p.id);
    return out;
  }

  [[nodiscard]] PackageSet installed() const {
    PackageSet out;
    for (const auto& p : packages_) {
      if (p.installed) out.insert(p.id);
    }
    return out;
  }

  [[nodiscard]] const PackageDesc* find(const PackageId& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &packages_[it->second];
  }

  [[nodiscard]] bool contains(const PackageId& id) const { return index_.count(id) != 0; }

  [[nodiscard]] std::set<Version> versions_of(const std::string& name) const {
    auto it = versions_.find(name);
    return it == versions_.end() ? std::set<Version>{} : it->second;
  }

  [[nodiscard]] Version max_version(const std::string& name) const {
    auto it = versions_.find(name);
    if (it == versions_.end()) {
      throw ModelError(ModelErrorKind::UnknownName, "no package named '" + name + "'");
    }
    return *it->second.rbegin();
  }

  /// Names with at least one version in the universe, sorted.
  [[nodiscard]] std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(versions_.size());
    for (const auto& [name, _] : versions_) out.push_back(name);
    return out;
  }

  /// Names with a version in the existing installation.
  [[nodiscard]] std::set<std::string> installed_names() const {
    std::set<std::string> out;
    for (const auto& p : packages_) {
      if (p.installed) out.insert(p.id.name);
    }
    return out;
  }

  friend bool operator==(const CudfDocument& a, const CudfDocument& b) {
    return a.packages_ == b.packages_ && a.request_ == b.request_;
  }

  friend CudfDocument make_document(std::vector<PackageDesc> packages, Request request);

private:
  std::vector<PackageDesc> packages_;
  Request request_;
  std::map<PackageId, std::size_t> index_;
  std::map<std::string, std::set<Version>> versions_;
};

/// Validates distinctness, versions and provides shape; keeps package order.
inline CudfDocument make_document(std::vector<PackageDesc> packages, Request request) {
  CudfDocument doc;
  for (std::size_t i = 0; i < packages.size(); ++i) {
    const auto& p = packages[i];
    if (p.id.version < 1) {
      throw ModelError(ModelErrorKind::InvalidVersion, "package '" + p.id.name + "' has version 0");
    }
    if (!doc.index_.emplace(p.id, i).second) {
      throw ModelError(ModelErrorKind::DuplicatePackage, "duplicate package " + to_string(p.id));
    }
    detail::check_provides(p);
    for (const auto* f : {&p.depends, &p.conflicts, &p.provides, &p.recommends}) detail::check_bounds(*f);
    doc.versions_[p.id.name].insert(p.id.version);
  }
  for (const auto* f : {&request.install, &request.remove, &request.upgrade}) detail::check_bounds(*f);
  doc.packages_ = std::move(packages);
  doc.request_ = std::move(request);
  return doc;
}

inline std::set<Version> versions_of(const CudfDocument& doc, const std::string& name) {
  return doc.versions_of(name);
}

inline Version max_version(const CudfDocument& doc, const std::string& name) { return doc.max_version(name); }

/// The request with `keep` flags of installed packages folded into install
/// clauses: Version keeps the exact pair, Package keeps some version of the
/// name, Feature keeps each provided feature.
inline Request effective_request(const CudfDocument& doc) {
  Request req = doc.request();
  for (const auto& p : doc.packages()) {
    if (!p.installed || !p.keep) continue;
    switch (*p.keep) {
      case Keep::Version:
        req.install.clauses.push_back(Clause{{Constraint{p.id.name, Bound{Op::EQ, p.id.version}}}});
        break;
      case Keep::Package:
        req.install.clauses.push_back(Clause{{Constraint{p.id.name, std::nullopt}}});
        break;
      case Keep::Feature:
        for (const auto& clause : p.provides.clauses) req.install.clauses.push_back(clause);
        break;
      case Keep::None:
        break;
    }
  }
  return req;
}

}  // namespace cudfopt
