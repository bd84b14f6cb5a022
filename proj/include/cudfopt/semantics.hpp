#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cudfopt/criteria.hpp"
#include "cudfopt/model.hpp"
#include "cudfopt/parser.hpp"

namespace cudfopt {

/// A provided version: one exact version, or every positive version.
class VersionSpec {
public:
  static VersionSpec exactly(Version n) { return VersionSpec(n); }
  static VersionSpec all() { return VersionSpec(std::nullopt); }

  [[nodiscard]] bool is_all() const noexcept { return !exact_; }
  [[nodiscard]] Version value() const { return *exact_; }

  friend auto operator<=>(const VersionSpec&, const VersionSpec&) = default;
  friend bool operator==(const VersionSpec&, const VersionSpec&) = default;

private:
  explicit VersionSpec(std::optional<Version> v) : exact_(v) {}
  std::optional<Version> exact_;
};

/// Possibly infinite set of (name, version) pairs. `All` under a name
/// absorbs any exact entries for it.
class ProvideSet {
public:
  void add(const std::string& name, VersionSpec spec) {
    auto& specs = entries_[name];
    if (!specs.empty() && specs.begin()->is_all()) return;
    if (spec.is_all()) specs.clear();
    specs.insert(spec);
  }

  void merge(const ProvideSet& other) {
    for (const auto& [name, specs] : other.entries_) {
      for (const auto& s : specs) add(name, s);
    }
  }

  [[nodiscard]] const std::map<std::string, std::set<VersionSpec>>& entries() const noexcept { return entries_; }

  [[nodiscard]] const std::set<VersionSpec>* find(const std::string& name) const {
    auto it = entries_.find(name);
    return it == entries_.end() ? nullptr : &it->second;
  }

  friend bool operator==(const ProvideSet&, const ProvideSet&) = default;

private:
  std::map<std::string, std::set<VersionSpec>> entries_;
};

inline bool version_satisfies(Version v, const Bound& b) {
  switch (b.op) {
    case Op::EQ: return v == b.n;
    case Op::NEQ: return v != b.n;
    case Op::LT: return v < b.n;
    case Op::LE: return v <= b.n;
    case Op::GT: return v > b.n;
    case Op::GE: return v >= b.n;
  }
  return false;
}

/// True iff (name, v) is a target of `c`.
inline bool constraint_matches(const Constraint& c, const std::string& name, Version v) {
  return c.name == name && (!c.bound || version_satisfies(v, *c.bound));
}

/// True iff the constraint and the provided spec share a pair. `All` meets
/// every bound that some positive version satisfies, which excludes `< 1`.
inline bool constraint_matches(const Constraint& c, const std::string& name, const VersionSpec& spec) {
  if (c.name != name) return false;
  if (!spec.is_all()) return constraint_matches(c, name, spec.value());
  return !c.bound || !(c.bound->op == Op::LT && c.bound->n <= 1);
}

inline bool clause_matches(const Clause& clause, const ProvideSet& provided) {
  for (const auto& atom : clause.atoms) {
    if (const auto* specs = provided.find(atom.name)) {
      for (const auto& s : *specs) {
        if (constraint_matches(atom, atom.name, s)) return true;
      }
    }
  }
  return false;
}

/// The package itself plus everything its provides formula names.
inline ProvideSet provide(const PackageDesc& p) {
  ProvideSet out;
  out.add(p.id.name, VersionSpec::exactly(p.id.version));
  for (const auto& clause : p.provides.clauses) {
    for (const auto& atom : clause.atoms) {
      out.add(atom.name, atom.bound ? VersionSpec::exactly(atom.bound->n) : VersionSpec::all());
    }
  }
  return out;
}

template <typename Range>
PackageSet clause_providers(const Clause& clause, const Range& candidates) {
  PackageSet out;
  for (const PackageDesc& p : candidates) {
    if (clause_matches(clause, provide(p))) out.insert(p.id);
  }
  return out;
}

/// Reverse index from provided names to the packages providing them, over
/// the whole universe of one document.
class ProviderIndex {
public:
  explicit ProviderIndex(const CudfDocument& doc) : doc_(&doc) {
    const auto& pkgs = doc.packages();
    provides_.reserve(pkgs.size());
    for (std::size_t i = 0; i < pkgs.size(); ++i) {
      provides_.push_back(provide(pkgs[i]));
      for (const auto& [name, specs] : provides_.back().entries()) {
        for (const auto& s : specs) by_name_[name].push_back({i, s});
      }
    }
  }

  [[nodiscard]] const CudfDocument& document() const noexcept { return *doc_; }
  [[nodiscard]] std::size_t size() const noexcept { return provides_.size(); }
  [[nodiscard]] const ProvideSet& provide_of(std::size_t i) const { return provides_[i]; }

  /// Indices (document order) of packages providing some target of `clause`.
  [[nodiscard]] std::vector<std::size_t> providers(const Clause& clause) const {
    std::vector<std::size_t> out;
    for (const auto& atom : clause.atoms) {
      auto it = by_name_.find(atom.name);
      if (it == by_name_.end()) continue;
      for (const auto& [idx, spec] : it->second) {
        if (constraint_matches(atom, atom.name, spec)) out.push_back(idx);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Indices of packages providing any version of `name`.
  [[nodiscard]] std::vector<std::size_t> providers_of_name(const std::string& name) const {
    std::vector<std::size_t> out;
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return out;
    for (const auto& entry : it->second) out.push_back(entry.first);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

private:
  const CudfDocument* doc_;
  std::vector<ProvideSet> provides_;
  std::map<std::string, std::vector<std::pair<std::size_t, VersionSpec>>> by_name_;
};

struct RecommendTriple {
  std::string name;
  Version version;
  std::size_t clause_index;  // 1-based, source order

  friend auto operator<=>(const RecommendTriple&, const RecommendTriple&) = default;
  friend bool operator==(const RecommendTriple&, const RecommendTriple&) = default;
};

struct OptimizationSets {
  std::set<std::string> new_names;
  std::set<std::string> removed;
  std::set<std::string> changed;
  std::set<std::string> not_up_to_date;
  std::set<RecommendTriple> unsat_recommends;
};

namespace detail {

inline ProvideSet provide_all(const CudfDocument& doc, const PackageSet& pairs) {
  ProvideSet out;
  for (const auto& id : pairs) {
    if (const auto* p = doc.find(id)) out.merge(provide(*p));
  }
  return out;
}

}  // namespace detail

/// The five criteria sets of a follow-up installation `P` (P ⊆ universe).
inline OptimizationSets compute_sets(const CudfDocument& doc, const PackageSet& P) {
  OptimizationSets s;
  const auto O = doc.installed();
  std::set<std::string> names_in_P;
  for (const auto& id : P) names_in_P.insert(id.name);
  const auto names_in_O = doc.installed_names();

  for (const auto& n : names_in_P) {
    if (!names_in_O.count(n)) s.new_names.insert(n);
    if (!P.count(PackageId{n, doc.max_version(n)})) s.not_up_to_date.insert(n);
  }
  for (const auto& n : names_in_O) {
    if (!names_in_P.count(n)) s.removed.insert(n);
  }
  for (const auto& id : P) {
    if (!O.count(id)) s.changed.insert(id.name);
  }
  for (const auto& id : O) {
    if (!P.count(id)) s.changed.insert(id.name);
  }

  const auto provided = detail::provide_all(doc, P);
  for (const auto& id : P) {
    const auto* p = doc.find(id);
    if (!p) continue;
    const auto& clauses = p->recommends.clauses;
    for (std::size_t i = 0; i < clauses.size(); ++i) {
      if (!clause_matches(clauses[i], provided)) s.unsat_recommends.insert({id.name, id.version, i + 1});
    }
  }
  return s;
}

struct ObjectiveEntry {
  Criterion criterion;
  Polarity polarity;
  std::size_t count;

  friend bool operator==(const ObjectiveEntry&, const ObjectiveEntry&) = default;
};

/// Criterion counts, most significant first.
struct ObjectiveVector {
  std::vector<ObjectiveEntry> values;

  friend bool operator==(const ObjectiveVector&, const ObjectiveVector&) = default;

  [[nodiscard]] std::size_t count(Criterion c) const {
    for (const auto& v : values) {
      if (v.criterion == c) return v.count;
    }
    throw Error(std::string("criterion '") + cli_name(c) + "' not in objective");
  }
};

/// Lexicographic comparison: true iff `a` is strictly better than `b`.
inline bool lex_better(const ObjectiveVector& a, const ObjectiveVector& b) {
  for (std::size_t i = 0; i < a.values.size() && i < b.values.size(); ++i) {
    const auto x = a.values[i].count;
    const auto y = b.values[i].count;
    if (x == y) continue;
    return a.values[i].polarity == Polarity::Minus ? x < y : x > y;
  }
  return false;
}

inline std::string to_string(const ObjectiveVector& v) {
  std::string out;
  for (const auto& e : v.values) {
    if (!out.empty()) out += ',';
    out += e.polarity == Polarity::Minus ? '-' : '+';
    out += cli_name(e.criterion);
    out += '=';
    out += std::to_string(e.count);
  }
  return out;
}

inline std::size_t criterion_count(const OptimizationSets& s, Criterion c) {
  switch (c) {
    case Criterion::NewPackage: return s.new_names.size();
    case Criterion::Removed: return s.removed.size();
    case Criterion::Changed: return s.changed.size();
    case Criterion::NotUpToDate: return s.not_up_to_date.size();
    case Criterion::UnsatRecommends: return s.unsat_recommends.size();
  }
  return 0;
}

inline ObjectiveVector evaluate(const CudfDocument& doc, const PackageSet& P, const CriteriaSeq& criteria) {
  const auto sets = compute_sets(doc, P);
  ObjectiveVector v;
  const auto& items = criteria.items();
  for (auto it = items.rbegin(); it != items.rend(); ++it) {
    v.values.push_back({it->criterion, it->polarity, criterion_count(sets, it->criterion)});
  }
  return v;
}

struct Violation {
  enum class Kind {
    UnsatisfiedRequest,
    UnsatisfiedDependency,
    ConflictViolated,
    OutPackageInstalled,
    UpgradeMultiVersion
  };

  Kind kind;
  std::optional<PackageId> package;
  std::optional<PackageId> other;
  std::optional<Clause> clause;
  std::string name;

  friend bool operator==(const Violation&, const Violation&) = default;
};

inline std::string describe(const Violation& v) {
  const auto clause_text = [&] { return v.clause ? render_formula(Formula{{*v.clause}}) : std::string{}; };
  switch (v.kind) {
    case Violation::Kind::UnsatisfiedRequest:
      return "unsatisfied request: " + clause_text();
    case Violation::Kind::UnsatisfiedDependency:
      return "unsatisfied dependency of " + to_string(*v.package) + ": " + clause_text();
    case Violation::Kind::ConflictViolated:
      return "conflict: " + to_string(*v.package) + " vs " + to_string(*v.other);
    case Violation::Kind::OutPackageInstalled:
      return "forbidden package installed: " + to_string(*v.package);
    case Violation::Kind::UpgradeMultiVersion:
      return "upgrade of '" + v.name + "' does not yield exactly one version";
  }
  return "?";
}

struct ValidationReport {
  bool ok = true;
  std::vector<Violation> violations;
};

namespace detail {

// Does `spec` contain a version below some version in `installed`?
inline bool below_installed(const VersionSpec& spec, const std::set<VersionSpec>& installed) {
  for (const auto& o : installed) {
    if (o.is_all()) return true;
    if (spec.is_all() ? o.value() >= 2 : spec.value() < o.value()) return true;
  }
  return false;
}

}  // namespace detail

/// Checks P ⊆ universe against the request, dependencies, conflicts and the
/// upgrade requirements (no downgrade, exactly one provided version).
inline ValidationReport validate_solution(const CudfDocument& doc, const PackageSet& P) {
  ValidationReport report;
  auto add = [&report](Violation v) {
    for (const auto& existing : report.violations) {
      if (existing == v) return;
    }
    report.violations.push_back(std::move(v));
  };

  const auto req = effective_request(doc);
  const auto provided = detail::provide_all(doc, P);

  std::vector<std::pair<PackageId, ProvideSet>> members;
  for (const auto& id : P) {
    if (const auto* p = doc.find(id)) members.emplace_back(id, provide(*p));
  }

  for (const auto* f : {&req.install, &req.upgrade}) {
    for (const auto& clause : f->clauses) {
      if (!clause_matches(clause, provided)) {
        add({Violation::Kind::UnsatisfiedRequest, std::nullopt, std::nullopt, clause, {}});
      }
    }
  }

  for (const auto& [id, prov] : members) {
    for (const auto& clause : req.remove.clauses) {
      if (clause_matches(clause, prov)) add({Violation::Kind::OutPackageInstalled, id, std::nullopt, std::nullopt, {}});
    }
  }

  for (const auto& [id, prov] : members) {
    const auto* p = doc.find(id);
    for (const auto& clause : p->depends.clauses) {
      if (!clause_matches(clause, provided)) {
        add({Violation::Kind::UnsatisfiedDependency, id, std::nullopt, clause, {}});
      }
    }
    Clause all_conflicts;
    for (const auto& clause : p->conflicts.clauses) {
      all_conflicts.atoms.insert(all_conflicts.atoms.end(), clause.atoms.begin(), clause.atoms.end());
    }
    if (all_conflicts.atoms.empty()) continue;
    for (const auto& [other, other_prov] : members) {
      if (other == id) continue;
      if (clause_matches(all_conflicts, other_prov)) {
        add({Violation::Kind::ConflictViolated, id, other, std::nullopt, {}});
      }
    }
  }

  const auto installed_provided = detail::provide_all(doc, doc.installed());
  for (const auto& clause : req.upgrade.clauses) {
    std::set<std::string> names;
    for (const auto& atom : clause.atoms) names.insert(atom.name);

    std::set<std::pair<std::string, VersionSpec>> versions;
    for (const auto& [id, prov] : members) {
      for (const auto& name : names) {
        const auto* specs = prov.find(name);
        if (!specs) continue;
        for (const auto& s : *specs) {
          versions.insert({name, s});
          const auto* old = installed_provided.find(name);
          if (old && detail::below_installed(s, *old)) {
            add({Violation::Kind::OutPackageInstalled, id, std::nullopt, std::nullopt, {}});
          }
        }
      }
    }
    bool multiple = versions.size() > 1;
    for (const auto& [name, s] : versions) multiple = multiple || s.is_all();
    if (multiple) {
      for (const auto& [name, s] : versions) add({Violation::Kind::UpgradeMultiVersion, {}, {}, {}, name});
    }
  }

  report.ok = report.violations.empty();
  return report;
}

}  // namespace cudfopt
