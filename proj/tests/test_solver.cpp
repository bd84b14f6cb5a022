#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace cudfopt;
using fixtures::pkg;

namespace {

Problem sample_problem(const CriteriaSeq& criteria) {
  const auto& doc = fixtures::upgrade_sample();
  return build_problem(doc, criteria, compute_closure(doc, criteria));
}

ObjectiveVector vec(std::initializer_list<ObjectiveEntry> e) { return ObjectiveVector{e}; }

}  // namespace

TEST(Build, SampleProblem) {
  const auto pb = sample_problem(paranoid());
  EXPECT_EQ(pb.candidates.size(), 9U);
  EXPECT_EQ(pb.requests.size(), 2U);
  const auto inst1 = *pb.index_of(pkg("inst", 1));
  ASSERT_EQ(pb.depends[inst1].size(), 1U);
  EXPECT_EQ(pb.depends[inst1][0].size(), 3U);
  for (std::size_t i = 0; i < pb.candidates.size(); ++i) {
    for (const auto& forbidden : pb.conflicts[i]) {
      EXPECT_EQ(std::count(forbidden.begin(), forbidden.end(), i), 0);
    }
  }
}

TEST(Build, EmptyProblem) {
  const auto doc = make_document({}, {});
  const auto pb = build_problem(doc, paranoid(), compute_closure(doc, paranoid()));
  EXPECT_TRUE(pb.candidates.empty());
  const auto r = solve(pb);
  ASSERT_TRUE(r.optimal());
  EXPECT_TRUE(r.solution->installed.empty());
}

TEST(Build, InfeasibleRejected) {
  const auto doc = parse_document("request:\ninstall: ghost\n");
  EXPECT_THROW(build_problem(doc, paranoid(), compute_closure(doc, paranoid())), InfeasibleInput);
}

TEST(Solve, EmptyRequestSetIsUnsat) {
  Problem pb;
  pb.requests.push_back({});
  EXPECT_EQ(solve(pb).status, SolveOutcome::Status::Unsat);
  EXPECT_EQ(solve_branch_and_bound(pb).status, SolveOutcome::Status::Unsat);
}

TEST(Solve, SampleParanoid) {
  const auto r = solve(sample_problem(paranoid()));
  ASSERT_TRUE(r.optimal());
  EXPECT_EQ(r.solution->objective,
            vec({{Criterion::Removed, Polarity::Minus, 0}, {Criterion::Changed, Polarity::Minus, 2}}));
  EXPECT_TRUE(validate_solution(fixtures::upgrade_sample(), r.solution->installed).ok);
  EXPECT_EQ(evaluate(fixtures::upgrade_sample(), r.solution->installed, paranoid()), r.solution->objective);
}

TEST(Solve, SampleTrendyAgreesWithOracle) {
  const auto& doc = fixtures::upgrade_sample();
  const auto r = solve(sample_problem(trendy()));
  const auto oracle = brute_force(doc, trendy(), doc.universe());
  ASSERT_TRUE(r.optimal());
  ASSERT_TRUE(oracle.optimal());
  EXPECT_EQ(r.solution->objective, oracle.solution->objective);
  EXPECT_TRUE(validate_solution(doc, r.solution->installed).ok);
}

TEST(Solve, BranchAndBoundAgrees) {
  for (const auto& criteria : {paranoid(), trendy(), parse_criteria("+new,-changed"), parse_criteria("+notuptodate")}) {
    const auto pb = sample_problem(criteria);
    const auto a = solve(pb);
    const auto b = solve_branch_and_bound(pb);
    ASSERT_TRUE(a.optimal());
    ASSERT_TRUE(b.optimal());
    EXPECT_EQ(a.solution->objective, b.solution->objective);
  }
}

TEST(Solve, MaximizingCriteria) {
  const auto& doc = fixtures::upgrade_sample();
  for (const auto& text : {"+new", "+changed,-removed", "+unsat_recommends", "+notuptodate,-new", "+removed"}) {
    const auto criteria = parse_criteria(text);
    const auto r = solve(build_problem(doc, criteria, compute_closure(doc, criteria)));
    const auto oracle = brute_force(doc, criteria, doc.universe());
    ASSERT_TRUE(r.optimal()) << text;
    EXPECT_EQ(r.solution->objective, oracle.solution->objective) << text;
  }
}

TEST(Solve, UnchangedInstallationWhenNothingRequested) {
  const auto doc = parse_document(
      "package: a\nversion: 1\ninstalled: true\ndepends: b\n\npackage: b\nversion: 1\ninstalled: true\n\n"
      "package: b\nversion: 2\n\npackage: c\nversion: 1\n");
  const auto criteria = parse_criteria("-changed,-removed");
  const auto r = solve(build_problem(doc, criteria, compute_closure(doc, criteria)));
  ASSERT_TRUE(r.optimal());
  EXPECT_EQ(r.solution->objective.count(Criterion::Changed), 0U);
  EXPECT_EQ(r.solution->installed, doc.installed());
}

TEST(Solve, TimeLimitReportsIncumbentOrNothing) {
  const auto pb = sample_problem(trendy());
  Limits limits;
  limits.max_steps = 0;
  const auto r = solve(pb, limits);
  EXPECT_NE(r.status, SolveOutcome::Status::Unsat);
  if (r.status == SolveOutcome::Status::TimedOut && r.solution) {
    EXPECT_TRUE(validate_solution(fixtures::upgrade_sample(), r.solution->installed).ok);
  }
}

TEST(Solve, ModelSizeShrinksWithClosure) {
  const auto& doc = fixtures::upgrade_sample();
  const auto with = model_size(build_problem(doc, paranoid(), compute_closure(doc, paranoid())));
  const auto without = model_size(build_problem(doc, paranoid(), full_scope(doc)));
  EXPECT_LT(with.variables, without.variables);
}

TEST(BruteForce, Guards) {
  PackageSet big;
  for (Version v = 1; v <= 21; ++v) big.insert(pkg("x", v));
  EXPECT_THROW(brute_force(fixtures::upgrade_sample(), paranoid(), big), ScopeTooLarge);
}

TEST(BruteForce, SampleAndTrivialCases) {
  const auto& doc = fixtures::upgrade_sample();
  const auto r = brute_force(doc, paranoid(), full_scope(doc).closure);
  ASSERT_TRUE(r.optimal());
  EXPECT_EQ(r.solution->objective,
            vec({{Criterion::Removed, Polarity::Minus, 0}, {Criterion::Changed, Polarity::Minus, 2}}));

  const auto ghost = parse_document("request:\ninstall: ghost\n");
  EXPECT_EQ(brute_force(ghost, paranoid(), {}).status, SolveOutcome::Status::Unsat);

  const auto empty = make_document({}, {});
  const auto e = brute_force(empty, paranoid(), {});
  ASSERT_TRUE(e.optimal());
  EXPECT_TRUE(e.solution->installed.empty());
}

TEST(BruteForce, TieBreakPrefersSmallestSet) {
  const auto doc = parse_document("package: a\nversion: 1\n\npackage: b\nversion: 1\n\nrequest:\ninstall: a | b\n");
  const auto r = brute_force(doc, CriteriaSeq({{Criterion::Removed, Polarity::Minus}}), doc.universe());
  ASSERT_TRUE(r.optimal());
  EXPECT_EQ(r.solution->installed, (PackageSet{pkg("a", 1)}));
}

TEST(Solve, Deterministic) {
  std::size_t checked = 0;
  for (std::uint64_t seed = 1; checked < 5 && seed < 200; ++seed) {
    GenParams params;
    params.packages = 60;
    params.depend_density = 0.3;
    params.seed = seed;
    const auto doc = generate_instance(params);
    const auto closure = compute_closure(doc, trendy());
    if (!closure.feasible) continue;
    const auto pb = build_problem(doc, trendy(), closure);
    const auto a = solve(pb);
    const auto b = solve(pb);
    ASSERT_EQ(a.status, b.status);
    if (a.solution) EXPECT_EQ(a.solution->installed, b.solution->installed);
    ++checked;
  }
  EXPECT_EQ(checked, 5U);
}
