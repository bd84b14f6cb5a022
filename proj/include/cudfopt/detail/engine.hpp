#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace cudfopt::detail {

using Var = int;

/// Literal as 2*var + negated.
struct Lit {
  int code = -1;

  static Lit pos(Var v) { return Lit{2 * v}; }
  static Lit neg(Var v) { return Lit{2 * v + 1}; }
  [[nodiscard]] Var var() const { return code >> 1; }
  [[nodiscard]] bool negated() const { return (code & 1) != 0; }
  Lit operator~() const { return Lit{code ^ 1}; }
  friend bool operator==(Lit, Lit) = default;
};

enum class Value : std::int8_t { False = 0, True = 1, Undef = 2 };

enum class SearchResult { Sat, Unsat, Unknown };

struct Budget {
  std::uint64_t max_conflicts = UINT64_MAX;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  std::uint64_t conflicts = 0;
  std::uint64_t decisions = 0;

  [[nodiscard]] bool exhausted() const {
    if (conflicts >= max_conflicts) return true;
    return deadline && std::chrono::steady_clock::now() >= *deadline;
  }
};

/// Conflict-driven search over clauses and weighted at-most constraints
/// (sum of weights of true literals <= bound). Learned clauses survive
/// between solve() calls, so constraints may only be added, never removed.
class Engine {
public:
  Var new_var(bool preferred = false) {
    const Var v = static_cast<Var>(values_.size());
    values_.push_back(Value::Undef);
    levels_.push_back(0);
    reasons_.push_back({});
    trail_pos_.push_back(0);
    phase_.push_back(preferred);
    activity_.push_back(0.0);
    seen_.push_back(false);
    heap_index_.push_back(-1);
    watches_.emplace_back();
    watches_.emplace_back();
    pb_watches_.emplace_back();
    pb_watches_.emplace_back();
    heap_insert(v);
    return v;
  }

  [[nodiscard]] std::size_t num_vars() const noexcept { return values_.size(); }
  [[nodiscard]] std::size_t num_clauses() const noexcept { return clauses_.size() - learnt_count_; }
  [[nodiscard]] std::size_t num_pb() const noexcept { return pbs_.size(); }
  [[nodiscard]] bool inconsistent() const noexcept { return unsat_; }

  bool add_clause(std::vector<Lit> lits) {
    if (unsat_) return false;
    backtrack(0);
    std::sort(lits.begin(), lits.end(), [](Lit a, Lit b) { return a.code < b.code; });
    std::vector<Lit> kept;
    for (std::size_t i = 0; i < lits.size(); ++i) {
      if (i + 1 < lits.size() && lits[i + 1] == ~lits[i]) return true;
      if (!kept.empty() && kept.back() == lits[i]) continue;
      const Value v = value(lits[i]);
      if (v == Value::True) return true;
      if (v == Value::False) continue;
      kept.push_back(lits[i]);
    }
    if (kept.empty()) return fail();
    if (kept.size() == 1) {
      assign(kept[0], {});
      return propagate_root();
    }
    attach(std::move(kept), false);
    return true;
  }

  /// sum(w_i * [l_i true]) <= bound
  bool add_at_most(const std::vector<std::pair<Lit, std::uint64_t>>& terms, std::uint64_t bound) {
    if (unsat_) return false;
    backtrack(0);
    if (!propagate_root()) return false;
    Pb pb;
    pb.bound = bound;
    for (const auto& [lit, w] : terms) {
      if (w == 0) continue;
      pb.lits.push_back(lit);
      pb.weights.push_back(w);
    }
    std::vector<std::size_t> order(pb.lits.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return pb.weights[a] > pb.weights[b]; });
    Pb sorted;
    sorted.bound = bound;
    for (auto i : order) {
      sorted.lits.push_back(pb.lits[i]);
      sorted.weights.push_back(pb.weights[i]);
    }
    const int idx = static_cast<int>(pbs_.size());
    for (std::size_t t = 0; t < sorted.lits.size(); ++t) {
      pb_watches_[sorted.lits[t].code].push_back({idx, static_cast<int>(t)});
      if (value(sorted.lits[t]) == Value::True) sorted.sum_true += sorted.weights[t];
    }
    pbs_.push_back(std::move(sorted));
    if (pbs_.back().sum_true > bound) return fail();
    if (!pb_imply(idx)) return fail();
    return propagate_root();
  }

  SearchResult solve(Budget& budget) {
    if (unsat_) return SearchResult::Unsat;
    backtrack(0);
    if (!propagate_root()) return SearchResult::Unsat;

    std::uint64_t restart_round = 0;
    for (;;) {
      const std::uint64_t limit = 100 * luby(restart_round++);
      std::uint64_t local = 0;
      for (;;) {
        auto conflict = propagate();
        if (conflict) {
          ++budget.conflicts;
          ++local;
          if (decision_level() == 0) return fail_result();
          std::vector<Lit> learnt;
          int back_level = 0;
          analyze(*conflict, learnt, back_level);
          backtrack(back_level);
          if (learnt.size() == 1) {
            assign(learnt[0], {});
          } else {
            const int c = attach(learnt, true);
            assign(learnt[0], Reason{Reason::Clause, c});
          }
          decay();
          continue;
        }
        if (budget.exhausted()) {
          backtrack(0);
          return SearchResult::Unknown;
        }
        if (local >= limit) {
          backtrack(0);
          if (learnt_count_ > max_learnts_) reduce_learnts();
          break;
        }
        const Var next = pick_branch();
        if (next < 0) {
          model_.assign(values_.begin(), values_.end());
          backtrack(0);
          return SearchResult::Sat;
        }
        ++budget.decisions;
        trail_lim_.push_back(trail_.size());
        assign(phase_[next] ? Lit::pos(next) : Lit::neg(next), {});
      }
    }
  }

  /// Value of `v` in the last model found.
  [[nodiscard]] bool model_value(Var v) const { return model_[v] == Value::True; }
  [[nodiscard]] bool model_value(Lit l) const { return model_value(l.var()) != l.negated(); }

private:
  struct Reason {
    enum Kind : std::int8_t { None, Clause, Pb } kind = None;
    int index = -1;
  };

  struct ClauseData {
    std::vector<Lit> lits;
    bool learnt = false;
    bool deleted = false;
    double activity = 0.0;
  };

  struct Pb {
    std::vector<Lit> lits;
    std::vector<std::uint64_t> weights;  // non-increasing
    std::uint64_t bound = 0;
    std::uint64_t sum_true = 0;  // over processed true literals
  };

  struct PbWatch {
    int pb;
    int term;
  };

  [[nodiscard]] Value value(Lit l) const {
    const Value v = values_[l.var()];
    if (v == Value::Undef) return v;
    return (v == Value::True) != l.negated() ? Value::True : Value::False;
  }

  [[nodiscard]] int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  bool fail() {
    unsat_ = true;
    return false;
  }
  SearchResult fail_result() {
    unsat_ = true;
    return SearchResult::Unsat;
  }

  void assign(Lit l, Reason r) {
    const Var v = l.var();
    values_[v] = l.negated() ? Value::False : Value::True;
    levels_[v] = decision_level();
    reasons_[v] = r;
    trail_pos_[v] = static_cast<int>(trail_.size());
    trail_.push_back(l);
  }

  int attach(std::vector<Lit> lits, bool learnt) {
    const int idx = static_cast<int>(clauses_.size());
    watches_[(~lits[0]).code].push_back(idx);
    watches_[(~lits[1]).code].push_back(idx);
    clauses_.push_back(ClauseData{std::move(lits), learnt, false, 0.0});
    if (learnt) {
      ++learnt_count_;
      bump_clause(clauses_.back());
    }
    return idx;
  }

  bool propagate_root() {
    if (propagate()) return fail();
    return true;
  }

  // Returns the literals of a falsified constraint, or nothing.
  std::optional<std::vector<Lit>> propagate() {
    while (qhead_ < trail_.size()) {
      const Lit p = trail_[qhead_++];

      for (const auto& w : pb_watches_[p.code]) pbs_[w.pb].sum_true += pbs_[w.pb].weights[w.term];
      for (const auto& w : pb_watches_[p.code]) {
        auto& pb = pbs_[w.pb];
        if (pb.sum_true > pb.bound) {
          return pb_explanation(pb, static_cast<int>(trail_.size()));
        }
      }
      for (const auto& w : pb_watches_[p.code]) {
        if (!pb_imply(w.pb)) {
          return pb_explanation(pbs_[w.pb], static_cast<int>(trail_.size()));
        }
      }

      auto& list = watches_[p.code];
      std::size_t keep = 0;
      for (std::size_t i = 0; i < list.size(); ++i) {
        const int ci = list[i];
        auto& c = clauses_[ci];
        if (c.deleted) continue;
        auto& lits = c.lits;
        const Lit false_lit = ~p;
        if (lits[0] == false_lit) std::swap(lits[0], lits[1]);
        if (value(lits[0]) == Value::True) {
          list[keep++] = ci;
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < lits.size(); ++k) {
          if (value(lits[k]) != Value::False) {
            std::swap(lits[1], lits[k]);
            watches_[(~lits[1]).code].push_back(ci);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        list[keep++] = ci;
        if (value(lits[0]) == Value::False) {
          for (std::size_t j = i + 1; j < list.size(); ++j) list[keep++] = list[j];
          list.resize(keep);
          return lits;
        }
        assign(lits[0], Reason{Reason::Clause, ci});
      }
      list.resize(keep);
    }
    return std::nullopt;
  }

  // Forces false every unassigned term that no longer fits under the bound.
  bool pb_imply(int idx) {
    auto& pb = pbs_[idx];
    if (pb.sum_true > pb.bound) return false;
    const std::uint64_t slack = pb.bound - pb.sum_true;
    for (std::size_t t = 0; t < pb.lits.size() && pb.weights[t] > slack; ++t) {
      const Value v = value(pb.lits[t]);
      if (v == Value::Undef) {
        assign(~pb.lits[t], Reason{Reason::Pb, idx});
      }
    }
    return true;
  }

  // Negations of the true terms assigned before trail position `limit`.
  std::vector<Lit> pb_explanation(const Pb& pb, int limit) const {
    std::vector<Lit> out;
    for (const auto& l : pb.lits) {
      if (value(l) == Value::True && trail_pos_[l.var()] < limit) out.push_back(~l);
    }
    return out;
  }

  std::vector<Lit> reason_lits(Var v) const {
    const auto& r = reasons_[v];
    if (r.kind == Reason::Clause) {
      const auto& lits = clauses_[r.index].lits;
      return std::vector<Lit>(lits.begin() + 1, lits.end());
    }
    return pb_explanation(pbs_[r.index], trail_pos_[v]);
  }

  void analyze(const std::vector<Lit>& conflict, std::vector<Lit>& learnt, int& back_level) {
    learnt.assign(1, Lit{});
    int pending = 0;
    Lit p{};
    int idx = static_cast<int>(trail_.size()) - 1;
    std::vector<Lit> lits = conflict;
    for (;;) {
      for (const Lit q : lits) {
        const Var v = q.var();
        if (seen_[v] || levels_[v] == 0) continue;
        seen_[v] = true;
        bump_var(v);
        if (levels_[v] >= decision_level()) {
          ++pending;
        } else {
          learnt.push_back(q);
        }
      }
      while (!seen_[trail_[idx].var()]) --idx;
      p = trail_[idx];
      --idx;
      seen_[p.var()] = false;
      --pending;
      if (pending == 0) break;
      if (reasons_[p.var()].kind == Reason::Clause) bump_clause(clauses_[reasons_[p.var()].index]);
      lits = reason_lits(p.var());
    }
    learnt[0] = ~p;
    for (std::size_t i = 1; i < learnt.size(); ++i) seen_[learnt[i].var()] = false;

    back_level = 0;
    if (learnt.size() > 1) {
      std::size_t max_i = 1;
      for (std::size_t i = 2; i < learnt.size(); ++i) {
        if (levels_[learnt[i].var()] > levels_[learnt[max_i].var()]) max_i = i;
      }
      std::swap(learnt[1], learnt[max_i]);
      back_level = levels_[learnt[1].var()];
    }
  }

  void backtrack(int level) {
    if (decision_level() <= level) return;
    const std::size_t target = trail_lim_[level];
    for (std::size_t i = trail_.size(); i-- > target;) {
      const Lit l = trail_[i];
      const Var v = l.var();
      if (i < qhead_) {
        for (const auto& w : pb_watches_[l.code]) pbs_[w.pb].sum_true -= pbs_[w.pb].weights[w.term];
      }
      phase_[v] = !l.negated();
      values_[v] = Value::Undef;
      reasons_[v] = {};
      if (heap_index_[v] < 0) heap_insert(v);
    }
    trail_.resize(target);
    trail_lim_.resize(level);
    qhead_ = std::min(qhead_, target);
  }

  Var pick_branch() {
    while (!heap_.empty()) {
      const Var v = heap_pop();
      if (values_[v] == Value::Undef) return v;
    }
    return -1;
  }

  void reduce_learnts() {
    std::vector<int> candidates;
    for (int i = 0; i < static_cast<int>(clauses_.size()); ++i) {
      const auto& c = clauses_[i];
      if (c.learnt && !c.deleted && c.lits.size() > 2) candidates.push_back(i);
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](int a, int b) { return clauses_[a].activity < clauses_[b].activity; });
    for (std::size_t k = 0; k < candidates.size() / 2; ++k) {
      auto& c = clauses_[candidates[k]];
      c.deleted = true;
      c.lits.clear();
      c.lits.shrink_to_fit();
      --learnt_count_;
    }
    for (auto& list : watches_) {
      list.erase(std::remove_if(list.begin(), list.end(), [&](int ci) { return clauses_[ci].deleted; }), list.end());
    }
    max_learnts_ += max_learnts_ / 10;
  }

  // Luby sequence 1 1 2 1 1 2 4 ..., 0-based.
  static std::uint64_t luby(std::uint64_t x) {
    std::uint64_t size = 1;
    std::uint64_t seq = 0;
    while (size < x + 1) {
      ++seq;
      size = 2 * size + 1;
    }
    while (size - 1 != x) {
      size = (size - 1) >> 1;
      --seq;
      x = x % size;
    }
    return std::uint64_t{1} << seq;
  }

  void bump_var(Var v) {
    activity_[v] += var_inc_;
    if (activity_[v] > 1e100) {
      for (auto& a : activity_) a *= 1e-100;
      var_inc_ *= 1e-100;
    }
    if (heap_index_[v] >= 0) heap_up(heap_index_[v]);
  }

  void bump_clause(ClauseData& c) {
    c.activity += clause_inc_;
    if (c.activity > 1e20) {
      for (auto& cl : clauses_) cl.activity *= 1e-20;
      clause_inc_ *= 1e-20;
    }
  }

  void decay() {
    var_inc_ /= 0.95;
    clause_inc_ /= 0.999;
  }

  // Max-heap on activity; lower variable index wins ties.
  [[nodiscard]] bool heap_less(Var a, Var b) const {
    return activity_[a] > activity_[b] || (activity_[a] == activity_[b] && a < b);
  }
  void heap_insert(Var v) {
    heap_index_[v] = static_cast<int>(heap_.size());
    heap_.push_back(v);
    heap_up(heap_index_[v]);
  }
  Var heap_pop() {
    const Var top = heap_.front();
    heap_index_[top] = -1;
    const Var last = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
      heap_[0] = last;
      heap_index_[last] = 0;
      heap_down(0);
    }
    return top;
  }
  void heap_up(int i) {
    const Var v = heap_[i];
    while (i > 0) {
      const int parent = (i - 1) / 2;
      if (!heap_less(v, heap_[parent])) break;
      heap_[i] = heap_[parent];
      heap_index_[heap_[i]] = i;
      i = parent;
    }
    heap_[i] = v;
    heap_index_[v] = i;
  }
  void heap_down(int i) {
    const Var v = heap_[i];
    const int n = static_cast<int>(heap_.size());
    for (;;) {
      int child = 2 * i + 1;
      if (child >= n) break;
      if (child + 1 < n && heap_less(heap_[child + 1], heap_[child])) ++child;
      if (!heap_less(heap_[child], v)) break;
      heap_[i] = heap_[child];
      heap_index_[heap_[i]] = i;
      i = child;
    }
    heap_[i] = v;
    heap_index_[v] = i;
  }

  std::vector<Value> values_;
  std::vector<Value> model_;
  std::vector<int> levels_;
  std::vector<Reason> reasons_;
  std::vector<int> trail_pos_;
  std::vector<bool> phase_;
  std::vector<double> activity_;
  std::vector<bool> seen_;
  std::vector<int> heap_index_;
  std::vector<Var> heap_;
  std::vector<std::vector<int>> watches_;
  std::vector<std::vector<PbWatch>> pb_watches_;
  std::vector<ClauseData> clauses_;
  std::vector<Pb> pbs_;
  std::vector<Lit> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t qhead_ = 0;
  std::size_t learnt_count_ = 0;
  std::size_t max_learnts_ = 4000;
  double var_inc_ = 1.0;
  double clause_inc_ = 1.0;
  bool unsat_ = false;
};

}  // namespace cudfopt::detail
