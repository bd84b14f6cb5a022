#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cudfopt/criteria.hpp"
#include "cudfopt/factgen.hpp"
#include "cudfopt/generator.hpp"
#include "cudfopt/model.hpp"
#include "cudfopt/parser.hpp"
#include "cudfopt/preprocessor.hpp"
#include "cudfopt/semantics.hpp"
#include "cudfopt/solver.hpp"

namespace cudfopt {

enum class Subcommand { Solve, Facts, Closure, Validate, Gen };

struct CliConfig {
  Subcommand subcommand = Subcommand::Solve;
  std::string input = "-";
  std::string solution;  // validate only
  std::string criteria = "paranoid";
  std::string output;    // empty: standard output
  double timeout = 300;
  bool no_closure = false;
  bool stats = false;
  GenParams gen;
};

class UsageError : public Error {
public:
  using Error::Error;
};

/// Turns argv into a config. Help requests and bad flags surface as
/// CLI::ParseError for the caller to hand to CLI::App::exit.
inline CliConfig parse_args(CLI::App& app, int argc, const char* const* argv) {
  CliConfig cfg;
  app.description("Optimizing package installation solver for CUDF documents");
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub, bool takes_criteria) {
    sub->add_option("input", cfg.input, "CUDF document, '-' for standard input");
    sub->add_option("-o,--output", cfg.output, "Write results here instead of standard output");
    if (takes_criteria) sub->add_option("-c,--criteria", cfg.criteria, "paranoid, trendy, or e.g. -removed,-changed");
  };

  auto* solve = app.add_subcommand("solve", "Print an optimal follow-up installation, or FAIL");
  common(solve, true);
  solve->add_option("--timeout", cfg.timeout, "Wall-clock limit in seconds")->check(CLI::PositiveNumber);
  solve->add_flag("--no-closure", cfg.no_closure, "Search the whole admissible universe");
  solve->add_flag("--stats", cfg.stats, "Report objective and model size on standard error");

  auto* facts = app.add_subcommand("facts", "Print the fact compilation");
  common(facts, true);
  facts->add_flag("--no-closure", cfg.no_closure, "Compile the whole admissible universe");

  auto* closure = app.add_subcommand("closure", "Report universe, Out and closure sizes");
  common(closure, true);
  closure->add_flag("--no-closure", cfg.no_closure, "Report the whole admissible universe");

  auto* validate = app.add_subcommand("validate", "Check a solution against a document");
  common(validate, false);
  validate->add_option("solution", cfg.solution, "Solution stanzas")->required();

  auto* gen = app.add_subcommand("gen", "Emit a reproducible random instance");
  gen->add_option("-o,--output", cfg.output, "Write the instance here");
  gen->add_option("--seed", cfg.gen.seed, "Random seed");
  gen->add_option("--packages", cfg.gen.packages, "Universe size");
  gen->add_option("--depend-density", cfg.gen.depend_density)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--conflict-density", cfg.gen.conflict_density)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--provide-density", cfg.gen.provide_density)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--recommend-density", cfg.gen.recommend_density)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--installed-density", cfg.gen.installed_density)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--request-size", cfg.gen.request_size, "Number of install targets");
  gen->add_option("--upgrade-probability", cfg.gen.upgrade_probability)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--remove-probability", cfg.gen.remove_probability)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--virtuals", cfg.gen.virtuals, "Number of virtual names");

  app.parse(argc, argv);

  if (solve->parsed()) cfg.subcommand = Subcommand::Solve;
  if (facts->parsed()) cfg.subcommand = Subcommand::Facts;
  if (closure->parsed()) cfg.subcommand = Subcommand::Closure;
  if (validate->parsed()) cfg.subcommand = Subcommand::Validate;
  if (gen->parsed()) cfg.subcommand = Subcommand::Gen;
  return cfg;
}

namespace detail {

inline std::string read_source(const std::string& path, std::istream& in) {
  std::ostringstream buf;
  if (path == "-") {
    buf << in.rdbuf();
    return buf.str();
  }
  std::ifstream file(path, std::ios::binary);
  if (!file) throw UsageError("cannot open '" + path + "'");
  buf << file.rdbuf();
  return buf.str();
}

inline void write_sink(const CliConfig& cfg, std::ostream& out, const std::string& text) {
  if (cfg.output.empty()) {
    out << text;
    return;
  }
  std::ofstream file(cfg.output, std::ios::binary);
  if (!file) throw UsageError("cannot write '" + cfg.output + "'");
  file << text;
}

inline ClosureResult scope_for(const CliConfig& cfg, const CudfDocument& doc, const CriteriaSeq& criteria) {
  return cfg.no_closure ? full_scope(doc) : compute_closure(doc, criteria);
}

}  // namespace detail

/// Executes one subcommand. Returns 0 on success (a FAIL answer included),
/// 1 when validate rejects the solution, 2 on unreadable input or bad flags.
inline int run(const CliConfig& cfg, std::istream& in, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.subcommand == Subcommand::Gen) {
      detail::write_sink(cfg, out, render_document(generate_instance(cfg.gen)));
      return 0;
    }

    const auto criteria = parse_criteria(cfg.criteria);
    const auto doc = parse_document(detail::read_source(cfg.input, in), [&err](const ParseWarning& w) {
      err << "warning: line " << w.line << ": " << w.message << '\n';
    });

    switch (cfg.subcommand) {
      case Subcommand::Solve: {
        const auto scope = detail::scope_for(cfg, doc, criteria);
        if (!scope.feasible) {
          detail::write_sink(cfg, out, "FAIL\n");
          return 0;
        }
        const auto problem = build_problem(doc, criteria, scope);
        Limits limits;
        limits.wall_clock = std::chrono::duration<double>(cfg.timeout);
        const auto outcome = solve(problem, limits);
        if (outcome.status == SolveOutcome::Status::TimedOut) err << "timed out; reporting the best installation found\n";
        if (cfg.stats) {
          err << "status=" << (outcome.optimal() ? "optimal" : outcome.solution ? "incumbent" : "fail")
              << " objective=" << (outcome.solution ? to_string(outcome.solution->objective) : "none")
              << " candidates=" << problem.candidates.size() << " variables=" << outcome.stats.variables
              << " clauses=" << outcome.stats.clauses << " conflicts=" << outcome.stats.conflicts << '\n';
        }
        detail::write_sink(cfg, out, outcome.solution ? render_solution(outcome.solution->installed) : "FAIL\n");
        return 0;
      }
      case Subcommand::Facts: {
        const auto scope = detail::scope_for(cfg, doc, criteria);
        if (!scope.feasible) throw InfeasibleInput();
        detail::write_sink(cfg, out, render_facts(generate(doc, criteria, scope)));
        return 0;
      }
      case Subcommand::Closure: {
        const auto scope = detail::scope_for(cfg, doc, criteria);
        std::ostringstream report;
        report << "universe=" << doc.packages().size() << " out=" << scope.out.size()
               << " closure=" << scope.closure.size() << " feasible=" << (scope.feasible ? "true" : "false")
               << " iterations=" << scope.iterations << '\n';
        detail::write_sink(cfg, out, report.str());
        return 0;
      }
      case Subcommand::Validate: {
        const auto sol = parse_document(detail::read_source(cfg.solution, in));
        PackageSet P;
        for (const auto& p : sol.packages()) {
          if (p.installed) P.insert(p.id);
        }
        const auto report = validate_solution(doc, P);
        std::string text = report.ok ? "OK\n" : "";
        for (const auto& v : report.violations) text += describe(v) + '\n';
        detail::write_sink(cfg, out, text);
        return report.ok ? 0 : 1;
      }
      case Subcommand::Gen:
        break;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace cudfopt
