#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cudfopt/criteria.hpp"
#include "cudfopt/model.hpp"
#include "cudfopt/preprocessor.hpp"
#include "cudfopt/semantics.hpp"

namespace cudfopt {

class InfeasibleInput : public Error {
public:
  InfeasibleInput() : Error("request cannot be satisfied; no facts for an infeasible closure") {}
};

/// Interned name of a set of packages, "s<k>".
struct SetId {
  std::string token;

  friend auto operator<=>(const SetId&, const SetId&) = default;
  friend bool operator==(const SetId&, const SetId&) = default;
};

/// Hands out one token per distinct package set, numbered by first mention.
class Interner {
public:
  SetId intern(const PackageSet& members) {
    std::vector<PackageId> key(members.begin(), members.end());
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    SetId id{"s" + std::to_string(ids_.size())};
    ids_.emplace(std::move(key), id);
    members_.emplace(id, members);
    return id;
  }

  [[nodiscard]] const std::map<SetId, PackageSet>& members() const noexcept { return members_; }

private:
  std::map<std::vector<PackageId>, SetId> ids_;
  std::map<SetId, PackageSet> members_;
};

struct DependsFact {
  PackageId package;
  SetId set;
  friend bool operator==(const DependsFact&, const DependsFact&) = default;
};

struct RecommendsFact {
  PackageId package;
  SetId set;
  std::size_t multiplicity;
  friend bool operator==(const RecommendsFact&, const RecommendsFact&) = default;
};

struct ConflictFact {
  PackageId package;
  SetId set;
  friend bool operator==(const ConflictFact&, const ConflictFact&) = default;
};

struct SatisfiesFact {
  PackageId package;
  SetId set;
  friend bool operator==(const SatisfiesFact&, const SatisfiesFact&) = default;
};

struct CriterionFact {
  std::string constant;
  int position;  // +i or -i, i counted from the least significant criterion
  friend bool operator==(const CriterionFact&, const CriterionFact&) = default;
};

struct FactSet {
  std::vector<DependsFact> depends;
  std::vector<RecommendsFact> recommends;
  std::vector<ConflictFact> conflicts;
  std::vector<SetId> requests;
  std::vector<SatisfiesFact> satisfies;
  PackageSet units;
  PackageSet installed;
  std::map<std::string, Version> newest;
  std::vector<CriterionFact> criteria;
  std::map<SetId, PackageSet> members;

  [[nodiscard]] bool empty() const {
    return depends.empty() && recommends.empty() && conflicts.empty() && requests.empty() && satisfies.empty() &&
           units.empty() && installed.empty() && newest.empty() && criteria.empty();
  }
};

namespace detail {

template <typename T>
void push_unique(std::vector<T>& v, T item) {
  if (std::find(v.begin(), v.end(), item) == v.end()) v.push_back(std::move(item));
}

// The part of `prov` that meets the clause's targets.
inline std::set<std::pair<std::string, VersionSpec>> matching_part(const Clause& clause, const ProvideSet& prov) {
  std::set<std::pair<std::string, VersionSpec>> out;
  for (const auto& atom : clause.atoms) {
    if (const auto* specs = prov.find(atom.name)) {
      for (const auto& s : *specs) {
        if (constraint_matches(atom, atom.name, s)) out.insert({atom.name, s});
      }
    }
  }
  return out;
}

}  // namespace detail

/// Compiles the document, the closure and the criteria into facts. Every
/// target set is restricted to the closure and named by an interned id.
inline FactSet generate(const CudfDocument& doc, const CriteriaSeq& criteria, const ClosureResult& closure) {
  if (!closure.feasible) throw InfeasibleInput();

  const ProviderIndex index(doc);
  const auto& pkgs = doc.packages();
  std::vector<bool> in(pkgs.size(), false);
  for (std::size_t i = 0; i < pkgs.size(); ++i) in[i] = closure.closure.count(pkgs[i].id) != 0;

  auto restricted = [&](const std::vector<std::size_t>& providers, std::size_t except = SIZE_MAX) {
    PackageSet s;
    for (auto i : providers) {
      if (in[i] && i != except) s.insert(pkgs[i].id);
    }
    return s;
  };

  FactSet facts;
  Interner interner;
  const auto req = effective_request(doc);
  const bool with_recommends = criteria.mentions(Criterion::UnsatRecommends);

  for (std::size_t i = 0; i < pkgs.size(); ++i) {
    if (!in[i]) continue;
    const auto& p = pkgs[i];

    for (const auto& clause : p.depends.clauses) {
      detail::push_unique(facts.depends, DependsFact{p.id, interner.intern(restricted(index.providers(clause)))});
    }

    if (with_recommends) {
      std::vector<std::pair<PackageSet, std::size_t>> groups;
      for (const auto& clause : p.recommends.clauses) {
        auto set = restricted(index.providers(clause));
        auto g = std::find_if(groups.begin(), groups.end(), [&](const auto& e) { return e.first == set; });
        if (g == groups.end()) {
          groups.emplace_back(std::move(set), 1);
        } else {
          ++g->second;
        }
      }
      for (const auto& [set, r] : groups) facts.recommends.push_back({p.id, interner.intern(set), r});
    }

    Clause conflict_union;
    for (const auto& clause : p.conflicts.clauses) {
      conflict_union.atoms.insert(conflict_union.atoms.end(), clause.atoms.begin(), clause.atoms.end());
    }
    if (auto set = restricted(index.providers(conflict_union), i); !set.empty()) {
      detail::push_unique(facts.conflicts, ConflictFact{p.id, interner.intern(set)});
    }

    for (const auto& clause : req.upgrade.clauses) {
      const auto mine = detail::matching_part(clause, index.provide_of(i));
      if (mine.empty()) continue;
      PackageSet rivals;
      for (auto j : index.providers(clause)) {
        if (in[j] && detail::matching_part(clause, index.provide_of(j)) != mine) rivals.insert(pkgs[j].id);
      }
      if (!rivals.empty()) detail::push_unique(facts.conflicts, ConflictFact{p.id, interner.intern(rivals)});
    }
  }

  for (const auto* f : {&req.install, &req.upgrade}) {
    for (const auto& clause : f->clauses) {
      detail::push_unique(facts.requests, interner.intern(restricted(index.providers(clause))));
    }
  }

  std::set<SetId> referenced;
  for (const auto& d : facts.depends) referenced.insert(d.set);
  for (const auto& r : facts.recommends) referenced.insert(r.set);
  for (const auto& c : facts.conflicts) referenced.insert(c.set);
  for (const auto& r : facts.requests) referenced.insert(r);
  for (const auto& id : referenced) {
    const auto& members = interner.members().at(id);
    facts.members.emplace(id, members);
    for (const auto& m : members) facts.satisfies.push_back({m, id});
  }

  facts.units = closure.closure;
  facts.installed = doc.installed();
  for (const auto& id : closure.closure) facts.newest[id.name] = doc.max_version(id.name);

  const auto& items = criteria.items();
  for (std::size_t k = 0; k < items.size(); ++k) {
    const int pos = static_cast<int>(k + 1);
    facts.criteria.push_back({fact_constant(items[k].criterion), items[k].polarity == Polarity::Minus ? -pos : pos});
  }
  return facts;
}

namespace detail {

inline std::string fact_term(const std::string& name) {
  bool plain = !name.empty() && name.front() >= 'a' && name.front() <= 'z';
  for (char c : name) plain = plain && ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_');
  if (plain) return name;
  std::string out = "\"";
  for (char c : name) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

inline std::string fact_pkg(const PackageId& id) { return fact_term(id.name) + "," + std::to_string(id.version); }

}  // namespace detail

/// One `pred(args).` per line, grouped by predicate and sorted within groups.
inline std::string render_facts(const FactSet& facts) {
  using detail::fact_pkg;
  std::string out;
  auto emit = [&out](std::vector<std::string> lines) {
    std::sort(lines.begin(), lines.end());
    for (auto& l : lines) out += l + '\n';
  };

  std::vector<std::string> lines;
  for (const auto& u : facts.units) lines.push_back("unit(" + fact_pkg(u) + ").");
  emit(std::move(lines));
  lines = {};
  for (const auto& u : facts.installed) lines.push_back("installed(" + fact_pkg(u) + ").");
  emit(std::move(lines));
  lines = {};
  for (const auto& [name, v] : facts.newest) {
    lines.push_back("newestversion(" + detail::fact_term(name) + "," + std::to_string(v) + ").");
  }
  emit(std::move(lines));
  lines = {};
  for (const auto& d : facts.depends) lines.push_back("depends(" + fact_pkg(d.package) + "," + d.set.token + ").");
  emit(std::move(lines));
  lines = {};
  for (const auto& r : facts.recommends) {
    lines.push_back("recommends(" + fact_pkg(r.package) + "," + r.set.token + "," + std::to_string(r.multiplicity) +
                    ").");
  }
  emit(std::move(lines));
  lines = {};
  for (const auto& c : facts.conflicts) lines.push_back("conflict(" + fact_pkg(c.package) + "," + c.set.token + ").");
  emit(std::move(lines));
  lines = {};
  for (const auto& r : facts.requests) lines.push_back("request(" + r.token + ").");
  emit(std::move(lines));
  lines = {};
  for (const auto& s : facts.satisfies) lines.push_back("satisfies(" + fact_pkg(s.package) + "," + s.set.token + ").");
  emit(std::move(lines));
  lines = {};
  for (const auto& c : facts.criteria) lines.push_back("criterion(" + c.constant + "," + std::to_string(c.position) + ").");
  emit(std::move(lines));
  return out;
}

}  // namespace cudfopt
