#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cudfopt/criteria.hpp"
#include "cudfopt/model.hpp"
#include "cudfopt/semantics.hpp"

namespace cudfopt {

struct ClosureResult {
  PackageSet out;
  PackageSet closure;
  bool feasible = false;
  std::size_t iterations = 0;
};

namespace detail {

inline std::vector<bool> out_flags(const ProviderIndex& index) {
  const auto& doc = index.document();
  const auto& pkgs = doc.packages();
  const auto req = effective_request(doc);
  std::vector<bool> out(pkgs.size(), false);

  for (const auto& clause : req.remove.clauses) {
    for (auto i : index.providers(clause)) out[i] = true;
  }

  ProvideSet installed;
  for (const auto& p : pkgs) {
    if (p.installed) installed.merge(index.provide_of(&p - pkgs.data()));
  }

  for (const auto& clause : req.upgrade.clauses) {
    std::set<std::string> names;
    for (const auto& atom : clause.atoms) names.insert(atom.name);

    std::set<std::size_t> touching;
    for (const auto& name : names) {
      for (auto i : index.providers_of_name(name)) touching.insert(i);
    }

    for (auto i : touching) {
      const auto& prov = index.provide_of(i);
      std::size_t provided_versions = 0;
      bool downgrade = false;
      for (const auto& name : names) {
        const auto* specs = prov.find(name);
        if (!specs) continue;
        const auto* old = installed.find(name);
        for (const auto& s : *specs) {
          // An unbounded provide counts as infinitely many versions.
          provided_versions += s.is_all() ? 2 : 1;
          if (!old) continue;
          for (const auto& o : *old) {
            if (o.is_all() || (s.is_all() ? o.value() >= 2 : s.value() < o.value())) downgrade = true;
          }
        }
      }
      const bool no_match = !clause_matches(clause, prov);
      if (downgrade || provided_versions > 1 || no_match) out[i] = true;
    }
  }
  return out;
}

inline bool feasible_with(const ProviderIndex& index, const std::vector<bool>& out) {
  const auto req = effective_request(index.document());
  for (const auto* f : {&req.install, &req.upgrade}) {
    for (const auto& clause : f->clauses) {
      bool served = false;
      for (auto i : index.providers(clause)) served = served || !out[i];
      if (!served) return false;
    }
  }
  return true;
}

inline PackageSet to_set(const CudfDocument& doc, const std::vector<bool>& flags) {
  PackageSet s;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) s.insert(doc.packages()[i].id);
  }
  return s;
}

}  // namespace detail

/// Packages no follow-up installation may contain: providers of remove
/// targets, and packages that would break an upgrade (downgrade below the
/// installed version, several versions at once, or only non-matching ones).
inline PackageSet compute_out(const CudfDocument& doc) {
  const ProviderIndex index(doc);
  return detail::to_set(doc, detail::out_flags(index));
}

/// False iff some install or upgrade clause has no provider outside `out`.
inline bool check_feasible(const CudfDocument& doc, const PackageSet& out) {
  const ProviderIndex index(doc);
  std::vector<bool> flags(doc.packages().size(), false);
  for (std::size_t i = 0; i < flags.size(); ++i) flags[i] = out.count(doc.packages()[i].id) != 0;
  return detail::feasible_with(index, flags);
}

/// Need-driven closure: seeded by request providers and the objectives,
/// then saturated over dependencies (and recommendations / newest versions
/// when those are minimized). Packages in Out are never added.
inline ClosureResult compute_closure(const CudfDocument& doc, const CriteriaSeq& criteria) {
  const ProviderIndex index(doc);
  const auto& pkgs = doc.packages();
  const auto out = detail::out_flags(index);

  ClosureResult result;
  result.out = detail::to_set(doc, out);
  if (!detail::feasible_with(index, out)) return result;
  result.feasible = true;

  std::vector<bool> in(pkgs.size(), false);
  std::vector<std::size_t> frontier;
  auto include = [&](std::size_t i, std::vector<std::size_t>& into) {
    if (out[i] || in[i]) return;
    in[i] = true;
    into.push_back(i);
  };

  const auto req = effective_request(doc);
  for (const auto* f : {&req.install, &req.upgrade}) {
    for (const auto& clause : f->clauses) {
      for (auto i : index.providers(clause)) include(i, frontier);
    }
  }

  const auto installed_names = doc.installed_names();
  for (std::size_t i = 0; i < pkgs.size(); ++i) {
    const auto& p = pkgs[i];
    const bool name_installed = installed_names.count(p.id.name) != 0;
    if ((criteria.contains(Criterion::NewPackage, Polarity::Plus) && !name_installed) ||
        (criteria.contains(Criterion::Removed, Polarity::Minus) && name_installed) ||
        (criteria.contains(Criterion::Changed, Polarity::Plus) && !p.installed) ||
        (criteria.contains(Criterion::Changed, Polarity::Minus) && p.installed) ||
        (criteria.contains(Criterion::NotUpToDate, Polarity::Plus) && p.id.version < doc.max_version(p.id.name)) ||
        (criteria.contains(Criterion::UnsatRecommends, Polarity::Plus) && !p.recommends.empty())) {
      include(i, frontier);
    }
  }

  std::map<std::string, std::size_t> newest;
  for (std::size_t i = 0; i < pkgs.size(); ++i) {
    if (pkgs[i].id.version == doc.max_version(pkgs[i].id.name)) newest[pkgs[i].id.name] = i;
  }
  const bool follow_recommends = criteria.contains(Criterion::UnsatRecommends, Polarity::Minus);
  const bool follow_newest = criteria.contains(Criterion::NotUpToDate, Polarity::Minus);

  // Members added before the current pass already had their targets added,
  // so scanning the last pass's additions yields the same Add set as
  // scanning the whole closure.
  while (!frontier.empty()) {
    std::vector<std::size_t> added;
    for (auto j : frontier) {
      const auto& p = pkgs[j];
      for (const auto& clause : p.depends.clauses) {
        for (auto i : index.providers(clause)) include(i, added);
      }
      if (follow_recommends) {
        for (const auto& clause : p.recommends.clauses) {
          for (auto i : index.providers(clause)) include(i, added);
        }
      }
      if (follow_newest) include(newest.at(p.id.name), added);
    }
    if (added.empty()) break;
    ++result.iterations;
    frontier = std::move(added);
  }

  result.closure = detail::to_set(doc, in);
  return result;
}

/// Every package outside Out; the comparison baseline without closure.
inline ClosureResult full_scope(const CudfDocument& doc) {
  const ProviderIndex index(doc);
  const auto out = detail::out_flags(index);
  ClosureResult result;
  result.out = detail::to_set(doc, out);
  if (!detail::feasible_with(index, out)) return result;
  result.feasible = true;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!out[i]) result.closure.insert(doc.packages()[i].id);
  }
  return result;
}

}  // namespace cudfopt
