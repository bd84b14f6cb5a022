#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cudfopt/criteria.hpp"
#include "cudfopt/detail/engine.hpp"
#include "cudfopt/factgen.hpp"
#include "cudfopt/model.hpp"
#include "cudfopt/preprocessor.hpp"
#include "cudfopt/semantics.hpp"

namespace cudfopt {

using IndexSet = std::vector<std::size_t>;

struct RecommendGroup {
  IndexSet providers;
  std::size_t multiplicity;
};

/// Installation problem over the candidate packages. All sets hold indices
/// into `candidates`.
struct Problem {
  std::vector<PackageId> candidates;  // sorted
  std::vector<IndexSet> requests;
  std::vector<std::vector<IndexSet>> depends;    // per candidate
  std::vector<std::vector<IndexSet>> conflicts;  // per candidate, never containing itself
  std::vector<std::vector<RecommendGroup>> recommends;
  CriteriaSeq criteria;
  PackageSet installed;                   // the existing installation, all of it
  std::map<std::string, Version> newest;  // newest universe version per candidate name

  [[nodiscard]] std::optional<std::size_t> index_of(const PackageId& id) const {
    auto it = std::lower_bound(candidates.begin(), candidates.end(), id);
    if (it == candidates.end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - candidates.begin());
  }
};

/// Reads the problem off a fact set, as the fact consumer would.
inline Problem problem_from_facts(const FactSet& facts, const CriteriaSeq& criteria) {
  Problem pb;
  pb.candidates.assign(facts.units.begin(), facts.units.end());
  const auto n = pb.candidates.size();
  pb.depends.resize(n);
  pb.conflicts.resize(n);
  pb.recommends.resize(n);
  pb.criteria = criteria;
  pb.installed = facts.installed;
  pb.newest = facts.newest;

  auto members = [&](const SetId& id) {
    IndexSet out;
    for (const auto& m : facts.members.at(id)) out.push_back(*pb.index_of(m));
    return out;
  };
  for (const auto& r : facts.requests) pb.requests.push_back(members(r));
  for (const auto& d : facts.depends) pb.depends[*pb.index_of(d.package)].push_back(members(d.set));
  for (const auto& c : facts.conflicts) pb.conflicts[*pb.index_of(c.package)].push_back(members(c.set));
  for (const auto& r : facts.recommends) {
    pb.recommends[*pb.index_of(r.package)].push_back({members(r.set), r.multiplicity});
  }
  return pb;
}

inline Problem build_problem(const CudfDocument& doc, const CriteriaSeq& criteria, const ClosureResult& closure) {
  return problem_from_facts(generate(doc, criteria, closure), criteria);
}

/// Objective vector of `chosen` (candidate indices) computed on the problem.
inline ObjectiveVector evaluate(const Problem& pb, const IndexSet& chosen) {
  std::set<std::size_t> in(chosen.begin(), chosen.end());
  std::set<std::string> names_in;
  PackageSet chosen_ids;
  for (auto i : chosen) {
    names_in.insert(pb.candidates[i].name);
    chosen_ids.insert(pb.candidates[i]);
  }
  std::set<std::string> names_old;
  for (const auto& id : pb.installed) names_old.insert(id.name);

  auto count = [&](Criterion c) -> std::size_t {
    std::set<std::string> s;
    switch (c) {
      case Criterion::NewPackage:
        for (const auto& n : names_in) {
          if (!names_old.count(n)) s.insert(n);
        }
        return s.size();
      case Criterion::Removed:
        for (const auto& n : names_old) {
          if (!names_in.count(n)) s.insert(n);
        }
        return s.size();
      case Criterion::Changed:
        for (const auto& id : chosen_ids) {
          if (!pb.installed.count(id)) s.insert(id.name);
        }
        for (const auto& id : pb.installed) {
          if (!chosen_ids.count(id)) s.insert(id.name);
        }
        return s.size();
      case Criterion::NotUpToDate:
        for (const auto& n : names_in) {
          if (!chosen_ids.count(PackageId{n, pb.newest.at(n)})) s.insert(n);
        }
        return s.size();
      case Criterion::UnsatRecommends: {
        std::size_t total = 0;
        for (auto i : chosen) {
          for (const auto& g : pb.recommends[i]) {
            bool served = false;
            for (auto j : g.providers) served = served || in.count(j);
            if (!served) total += g.multiplicity;
          }
        }
        return total;
      }
    }
    return 0;
  };

  ObjectiveVector v;
  const auto& items = pb.criteria.items();
  for (auto it = items.rbegin(); it != items.rend(); ++it) v.values.push_back({it->criterion, it->polarity, count(it->criterion)});
  return v;
}

struct Solution {
  PackageSet installed;
  ObjectiveVector objective;
};

struct SolveStats {
  std::size_t variables = 0;
  std::size_t clauses = 0;
  std::size_t counting_constraints = 0;
  std::uint64_t conflicts = 0;
  std::uint64_t decisions = 0;
  std::size_t improvements = 0;
};

struct SolveOutcome {
  enum class Status { Optimal, Unsat, TimedOut };

  Status status = Status::Unsat;
  std::optional<Solution> solution;  // Optimal: the optimum; TimedOut: best so far, if any
  SolveStats stats;

  [[nodiscard]] bool optimal() const noexcept { return status == Status::Optimal; }
};

struct Limits {
  std::uint64_t max_steps = UINT64_MAX;
  std::chrono::duration<double> wall_clock = std::chrono::seconds(300);
};

namespace detail {

struct WeightedLit {
  Lit lit;
  std::uint64_t weight;
};

struct EncodedObjective {
  Criterion criterion;
  Polarity polarity;
  std::vector<WeightedLit> terms;
  std::uint64_t constant = 0;

  [[nodiscard]] std::uint64_t total_weight() const {
    std::uint64_t w = 0;
    for (const auto& t : terms) w += t.weight;
    return w;
  }
};

/// Propositional model of a problem: one variable per candidate, one per
/// candidate name (some version installed), and one per objective term
/// that is not already a plain literal.
class Encoding {
public:
  explicit Encoding(const Problem& pb) : pb_(pb) {
    const auto n = pb.candidates.size();
    for (std::size_t i = 0; i < n; ++i) x_.push_back(engine_.new_var(pb.installed.count(pb.candidates[i]) != 0));

    for (const auto& req : pb.requests) engine_.add_clause(lits_of(req));
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& dep : pb.depends[i]) {
        auto c = lits_of(dep);
        c.push_back(Lit::neg(x_[i]));
        engine_.add_clause(std::move(c));
      }
      for (const auto& forbidden : pb.conflicts[i]) {
        for (auto j : forbidden) engine_.add_clause({Lit::neg(x_[i]), Lit::neg(x_[j])});
      }
    }

    std::map<std::string, std::vector<std::size_t>> by_name;
    for (std::size_t i = 0; i < n; ++i) by_name[pb.candidates[i].name].push_back(i);
    std::set<std::string> old_names;
    for (const auto& id : pb.installed) old_names.insert(id.name);

    const auto& items = pb.criteria.items();
    for (auto it = items.rbegin(); it != items.rend(); ++it) {
      EncodedObjective obj{it->criterion, it->polarity, {}, 0};
      switch (it->criterion) {
        case Criterion::NewPackage:
          for (const auto& [name, idx] : by_name) {
            if (!old_names.count(name)) obj.terms.push_back({Lit::pos(name_var(name, idx)), 1});
          }
          break;
        case Criterion::Removed:
          for (const auto& name : old_names) {
            auto found = by_name.find(name);
            if (found == by_name.end()) {
              ++obj.constant;
            } else {
              obj.terms.push_back({Lit::neg(name_var(name, found->second)), 1});
            }
          }
          break;
        case Criterion::Changed: {
          std::set<std::string> names = old_names;
          for (const auto& [name, _] : by_name) names.insert(name);
          for (const auto& name : names) {
            bool always = false;
            std::vector<Lit> diff;
            for (const auto& id : pb.installed) {
              if (id.name != name) continue;
              if (auto i = pb.index_of(id)) {
                diff.push_back(Lit::neg(x_[*i]));
              } else {
                always = true;
              }
            }
            if (auto found = by_name.find(name); found != by_name.end()) {
              for (auto i : found->second) {
                if (!pb.installed.count(pb.candidates[i])) diff.push_back(Lit::pos(x_[i]));
              }
            }
            if (always) {
              ++obj.constant;
            } else if (!diff.empty()) {
              obj.terms.push_back({or_of(diff), 1});
            }
          }
          break;
        }
        case Criterion::NotUpToDate:
          for (const auto& [name, idx] : by_name) {
            const Lit some = Lit::pos(name_var(name, idx));
            if (auto newest = pb.index_of(PackageId{name, pb.newest.at(name)})) {
              obj.terms.push_back({and_of({some, Lit::neg(x_[*newest])}), 1});
            } else {
              obj.terms.push_back({some, 1});
            }
          }
          break;
        case Criterion::UnsatRecommends:
          for (std::size_t i = 0; i < n; ++i) {
            for (const auto& g : pb.recommends[i]) {
              if (g.providers.empty()) {
                obj.terms.push_back({Lit::pos(x_[i]), g.multiplicity});
              } else {
                const Lit served = or_of(lits_of(g.providers));
                obj.terms.push_back({and_of({Lit::pos(x_[i]), ~served}), g.multiplicity});
              }
            }
          }
          break;
      }
      objectives_.push_back(std::move(obj));
    }
  }

  Engine& engine() { return engine_; }
  [[nodiscard]] const Engine& engine() const { return engine_; }
  [[nodiscard]] const std::vector<EncodedObjective>& objectives() const { return objectives_; }

  /// Restricts objective `k` to values at least as good as `value`
  /// (strictly better when `strict`). Returns false if that is impossible.
  bool bound(std::size_t k, std::uint64_t value, bool strict) {
    const auto& obj = objectives_[k];
    std::vector<std::pair<Lit, std::uint64_t>> terms;
    const std::uint64_t total = obj.total_weight();
    if (obj.polarity == Polarity::Minus) {
      if (strict && value == 0) return false;
      const std::uint64_t limit = strict ? value - 1 : value;
      if (limit < obj.constant) return false;
      for (const auto& t : obj.terms) terms.push_back({t.lit, t.weight});
      return engine_.add_at_most(terms, limit - obj.constant);
    }
    const std::uint64_t target = strict ? value + 1 : value;
    if (target <= obj.constant) return true;
    if (target - obj.constant > total) return false;
    for (const auto& t : obj.terms) terms.push_back({~t.lit, t.weight});
    return engine_.add_at_most(terms, total - (target - obj.constant));
  }

  [[nodiscard]] IndexSet chosen() const {
    IndexSet out;
    for (std::size_t i = 0; i < x_.size(); ++i) {
      if (engine_.model_value(x_[i])) out.push_back(i);
    }
    return out;
  }

  [[nodiscard]] std::uint64_t model_objective(std::size_t k) const {
    const auto& obj = objectives_[k];
    std::uint64_t v = obj.constant;
    for (const auto& t : obj.terms) {
      if (engine_.model_value(t.lit)) v += t.weight;
    }
    return v;
  }

private:
  std::vector<Lit> lits_of(const IndexSet& set) const {
    std::vector<Lit> out;
    for (auto i : set) out.push_back(Lit::pos(x_[i]));
    return out;
  }

  Var name_var(const std::string& name, const std::vector<std::size_t>& versions) {
    auto it = name_vars_.find(name);
    if (it != name_vars_.end()) return it->second;
    const Var y = or_of(lits_of(versions)).var();
    name_vars_.emplace(name, y);
    return y;
  }

  // Fresh variable equivalent to the disjunction (reused for equal inputs).
  Lit or_of(std::vector<Lit> lits) {
    if (lits.size() == 1) return lits.front();
    std::vector<int> key;
    for (auto l : lits) key.push_back(l.code);
    std::sort(key.begin(), key.end());
    if (auto it = or_cache_.find(key); it != or_cache_.end()) return Lit::pos(it->second);
    const Var y = engine_.new_var(false);
    std::vector<Lit> back{Lit::neg(y)};
    for (auto l : lits) {
      engine_.add_clause({~l, Lit::pos(y)});
      back.push_back(l);
    }
    engine_.add_clause(std::move(back));
    or_cache_.emplace(std::move(key), y);
    return Lit::pos(y);
  }

  Lit and_of(const std::vector<Lit>& lits) {
    std::vector<Lit> negated;
    for (auto l : lits) negated.push_back(~l);
    return ~or_of(negated);
  }

  const Problem& pb_;
  Engine engine_;
  std::vector<Var> x_;
  std::map<std::string, Var> name_vars_;
  std::map<std::vector<int>, Var> or_cache_;
  std::vector<EncodedObjective> objectives_;
};

inline Budget make_budget(const Limits& limits) {
  Budget b;
  b.max_conflicts = limits.max_steps;
  b.deadline = std::chrono::steady_clock::now() +
               std::chrono::duration_cast<std::chrono::steady_clock::duration>(limits.wall_clock);
  return b;
}

inline Solution make_solution(const Problem& pb, const IndexSet& chosen) {
  Solution s;
  for (auto i : chosen) s.installed.insert(pb.candidates[i]);
  s.objective = evaluate(pb, chosen);
  return s;
}

}  // namespace detail

/// Size of the propositional model the search works on.
inline SolveStats model_size(const Problem& pb) {
  detail::Encoding enc(pb);
  SolveStats s;
  s.variables = enc.engine().num_vars();
  s.clauses = enc.engine().num_clauses();
  s.counting_constraints = enc.objectives().size();
  return s;
}

/// Conflict-driven search with hierarchical optimization: find a model,
/// then for each criterion from the most significant one keep demanding a
/// strictly better value until that is unsatisfiable, and freeze it.
inline SolveOutcome solve(const Problem& pb, const Limits& limits = {}) {
  auto budget = detail::make_budget(limits);
  SolveOutcome outcome;
  std::vector<std::uint64_t> frozen;

  auto enc = std::make_unique<detail::Encoding>(pb);
  outcome.stats.variables = enc->engine().num_vars();
  outcome.stats.clauses = enc->engine().num_clauses();
  outcome.stats.counting_constraints = enc->objectives().size();
  auto finish = [&](SolveOutcome::Status status) {
    outcome.status = status;
    outcome.stats.conflicts = budget.conflicts;
    outcome.stats.decisions = budget.decisions;
    return outcome;
  };

  auto first = enc->engine().solve(budget);
  if (first == detail::SearchResult::Unsat) return finish(SolveOutcome::Status::Unsat);
  if (first == detail::SearchResult::Unknown) return finish(SolveOutcome::Status::TimedOut);

  IndexSet best = enc->chosen();
  std::vector<std::uint64_t> best_values;
  for (std::size_t k = 0; k < enc->objectives().size(); ++k) best_values.push_back(enc->model_objective(k));
  outcome.solution = detail::make_solution(pb, best);

  for (std::size_t k = 0; k < best_values.size(); ++k) {
    for (;;) {
      if (!enc->bound(k, best_values[k], true)) break;
      auto r = enc->engine().solve(budget);
      if (r == detail::SearchResult::Unsat) break;
      if (r == detail::SearchResult::Unknown) return finish(SolveOutcome::Status::TimedOut);
      best = enc->chosen();
      for (std::size_t j = 0; j < best_values.size(); ++j) best_values[j] = enc->model_objective(j);
      outcome.solution = detail::make_solution(pb, best);
      ++outcome.stats.improvements;
    }
    frozen.push_back(best_values[k]);
    if (k + 1 == best_values.size()) break;
    // The failed tightening is baked into the engine; start over from the
    // frozen bounds.
    enc = std::make_unique<detail::Encoding>(pb);
    for (std::size_t j = 0; j < frozen.size(); ++j) enc->bound(j, frozen[j], false);
  }
  return finish(SolveOutcome::Status::Optimal);
}

namespace detail {

enum class Tri : std::int8_t { No, Yes, Maybe };

// Plain depth-first search with three-valued pruning.
class BranchAndBound {
public:
  BranchAndBound(const Problem& pb, const Limits& limits) : pb_(pb), budget_(make_budget(limits)) {
    for (const auto& id : pb.installed) old_names_.insert(id.name);
    assign_.assign(pb.candidates.size(), Tri::Maybe);
    for (std::size_t i = 0; i < pb.candidates.size(); ++i) by_name_[pb.candidates[i].name].push_back(i);
  }

  SolveOutcome run() {
    SolveOutcome out;
    const bool complete = search(0);
    out.stats.decisions = budget_.decisions;
    if (!complete) {
      out.status = SolveOutcome::Status::TimedOut;
    } else {
      out.status = best_ ? SolveOutcome::Status::Optimal : SolveOutcome::Status::Unsat;
    }
    if (best_) out.solution = make_solution(pb_, *best_);
    return out;
  }

private:
  bool search(std::size_t i) {
    if (++budget_.decisions % 1024 == 0 && budget_.exhausted()) return false;
    if (violated()) return true;
    if (best_ && !lex_better(optimistic(), *best_value_)) return true;
    if (i == assign_.size()) {
      IndexSet chosen;
      for (std::size_t k = 0; k < assign_.size(); ++k) {
        if (assign_[k] == Tri::Yes) chosen.push_back(k);
      }
      best_value_ = evaluate(pb_, chosen);
      best_ = std::move(chosen);
      return true;
    }
    const bool was_installed = pb_.installed.count(pb_.candidates[i]) != 0;
    for (Tri v : {was_installed ? Tri::Yes : Tri::No, was_installed ? Tri::No : Tri::Yes}) {
      assign_[i] = v;
      if (!search(i + 1)) return false;
    }
    assign_[i] = Tri::Maybe;
    return true;
  }

  [[nodiscard]] Tri any_of(const IndexSet& set) const {
    Tri r = Tri::No;
    for (auto j : set) {
      if (assign_[j] == Tri::Yes) return Tri::Yes;
      if (assign_[j] == Tri::Maybe) r = Tri::Maybe;
    }
    return r;
  }

  [[nodiscard]] bool violated() const {
    for (const auto& req : pb_.requests) {
      if (any_of(req) == Tri::No) return true;
    }
    for (std::size_t i = 0; i < assign_.size(); ++i) {
      if (assign_[i] != Tri::Yes) continue;
      for (const auto& dep : pb_.depends[i]) {
        if (any_of(dep) == Tri::No) return true;
      }
      for (const auto& forbidden : pb_.conflicts[i]) {
        if (any_of(forbidden) == Tri::Yes) return true;
      }
    }
    return false;
  }

  static Tri tri_not(Tri t) { return t == Tri::Maybe ? t : (t == Tri::Yes ? Tri::No : Tri::Yes); }
  static Tri tri_and(Tri a, Tri b) {
    if (a == Tri::No || b == Tri::No) return Tri::No;
    return (a == Tri::Yes && b == Tri::Yes) ? Tri::Yes : Tri::Maybe;
  }
  static Tri tri_or(Tri a, Tri b) { return tri_not(tri_and(tri_not(a), tri_not(b))); }

  // Best value each criterion could still reach, independently.
  [[nodiscard]] ObjectiveVector optimistic() const {
    ObjectiveVector v;
    const auto& items = pb_.criteria.items();
    for (auto it = items.rbegin(); it != items.rend(); ++it) {
      std::uint64_t sure = 0;
      std::uint64_t maybe = 0;
      auto tally = [&](Tri t, std::uint64_t w) {
        if (t == Tri::Yes) sure += w;
        if (t == Tri::Maybe) maybe += w;
      };
      std::set<std::string> names = old_names_;
      for (const auto& [name, _] : by_name_) names.insert(name);
      for (const auto& name : names) {
        auto found = by_name_.find(name);
        const Tri present = found == by_name_.end() ? Tri::No : any_of(found->second);
        const bool was_there = old_names_.count(name) != 0;
        switch (it->criterion) {
          case Criterion::NewPackage:
            if (!was_there) tally(present, 1);
            break;
          case Criterion::Removed:
            if (was_there) tally(tri_not(present), 1);
            break;
          case Criterion::Changed: {
            Tri changed = Tri::No;
            for (const auto& id : pb_.installed) {
              if (id.name != name) continue;
              auto i = pb_.index_of(id);
              changed = tri_or(changed, i ? tri_not(assign_[*i]) : Tri::Yes);
            }
            if (found != by_name_.end()) {
              for (auto i : found->second) {
                if (!pb_.installed.count(pb_.candidates[i])) changed = tri_or(changed, assign_[i]);
              }
            }
            tally(changed, 1);
            break;
          }
          case Criterion::NotUpToDate: {
            if (found == by_name_.end()) break;
            auto newest = pb_.index_of(PackageId{name, pb_.newest.at(name)});
            tally(newest ? tri_and(present, tri_not(assign_[*newest])) : present, 1);
            break;
          }
          case Criterion::UnsatRecommends:
            break;
        }
      }
      if (it->criterion == Criterion::UnsatRecommends) {
        for (std::size_t i = 0; i < assign_.size(); ++i) {
          for (const auto& g : pb_.recommends[i]) tally(tri_and(assign_[i], tri_not(any_of(g.providers))), g.multiplicity);
        }
      }
      const std::uint64_t bound = it->polarity == Polarity::Minus ? sure : sure + maybe;
      v.values.push_back({it->criterion, it->polarity, static_cast<std::size_t>(bound)});
    }
    return v;
  }

  const Problem& pb_;
  Budget budget_;
  std::set<std::string> old_names_;
  std::map<std::string, IndexSet> by_name_;
  std::vector<Tri> assign_;
  std::optional<IndexSet> best_;
  std::optional<ObjectiveVector> best_value_;
};

}  // namespace detail

/// Exhaustive depth-first search with lexicographic bounding. Slow, simple,
/// used to cross-check solve().
inline SolveOutcome solve_branch_and_bound(const Problem& pb, const Limits& limits = {}) {
  return detail::BranchAndBound(pb, limits).run();
}

class ScopeTooLarge : public Error {
public:
  explicit ScopeTooLarge(std::size_t n)
      : Error("brute force over " + std::to_string(n) + " packages exceeds the limit of 20") {}
};

/// Enumerates every subset of `scope`, keeps those passing
/// validate_solution and returns the lexicographic optimum. Ties go to the
/// smaller set, then to the lexicographically smaller one.
inline SolveOutcome brute_force(const CudfDocument& doc, const CriteriaSeq& criteria, const PackageSet& scope) {
  if (scope.size() > 20) throw ScopeTooLarge(scope.size());
  const std::vector<PackageId> items(scope.begin(), scope.end());
  SolveOutcome out;
  out.status = SolveOutcome::Status::Unsat;

  const std::uint64_t total = std::uint64_t{1} << items.size();
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    PackageSet P;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (mask >> i & 1U) P.insert(items[i]);
    }
    if (!validate_solution(doc, P).ok) continue;
    auto value = evaluate(doc, P, criteria);
    bool take = !out.solution;
    if (!take) {
      const auto& cur = *out.solution;
      if (lex_better(value, cur.objective)) {
        take = true;
      } else if (!lex_better(cur.objective, value)) {
        take = P.size() < cur.installed.size() || (P.size() == cur.installed.size() && P < cur.installed);
      }
    }
    if (take) {
      out.solution = Solution{std::move(P), std::move(value)};
      out.status = SolveOutcome::Status::Optimal;
    }
  }
  return out;
}

}  // namespace cudfopt
