// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Tolerances are fixed below.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cudfopt/cli.hpp"
#include "fixtures.hpp"
#include "golden.hpp"
#include "random_docs.hpp"

using namespace cudfopt;
using fixtures::pkg;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kGoldenSeconds = 1.0;
constexpr std::size_t kOracleInstances = 600;  // at least 500 required
constexpr std::size_t kOracleMaxPackages = 12;
constexpr double kOracleSeconds = 300.0;
constexpr std::size_t kRoundTrips = 1000;
constexpr std::uint64_t kFuzzInputs = 1000000;
constexpr std::size_t kReductionInstances = 31;
constexpr std::size_t kReductionPackages = 1000;
constexpr double kMaxMedianClosureRatio = 0.5;
constexpr double kMinMedianVariableShrink = 2.0;

struct Verdict {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int number, const std::string& title, const Verdict& v) {
  std::cout << "ACCEPTANCE " << number << " " << (v.pass ? "PASS" : "FAIL") << " " << title << ": " << v.detail
            << std::endl;
  if (!v.pass) ++failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x, int digits = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << x;
  return s.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

// Mixed-density small instances shared by the oracle and closure checks.
GenParams oracle_params(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 104729 + 17);
  auto unit = [&] { return static_cast<double>(rng() % 1000) / 1000.0; };
  GenParams p;
  p.seed = seed;
  p.packages = 3 + rng() % (kOracleMaxPackages - 2);
  p.depend_density = 0.1 + 0.7 * unit();
  p.conflict_density = 0.5 * unit();
  p.provide_density = 0.5 * unit();
  p.recommend_density = 0.5 * unit();
  p.installed_density = 0.1 + 0.6 * unit();
  p.request_size = rng() % 4;
  p.upgrade_probability = 0.5 * unit();
  p.remove_probability = 0.5 * unit();
  p.virtuals = rng() % 3;
  return p;
}

Verdict golden_facts() {
  const auto t0 = Clock::now();
  const auto& doc = fixtures::upgrade_sample();
  const auto criteria = parse_criteria("-removed,-changed");
  const auto facts = generate(doc, criteria, compute_closure(doc, criteria));
  const auto elapsed = seconds_since(t0);

  const auto got = golden::resolved(facts);
  const auto want = golden::sample_facts();
  std::size_t missing = 0;
  for (const auto& f : want) missing += got.count(f) < want.count(f) ? 1 : 0;
  const bool equal = got == want;
  const bool ok = equal && facts.recommends.empty() && elapsed < kGoldenSeconds;
  return {ok, std::to_string(got.size()) + " facts vs " + std::to_string(want.size()) + " expected, " +
                  std::to_string(missing) + " missing, recommends=" + std::to_string(facts.recommends.size()) +
                  ", " + fmt(elapsed * 1000, 2) + " ms (limit " + fmt(kGoldenSeconds * 1000, 0) + " ms)"};
}

Verdict closure_reproduction() {
  const auto& doc = fixtures::upgrade_sample();
  const PackageSet expected{pkg("inst", 1), pkg("inst", 2), pkg("inst", 3), pkg("conf", 2), pkg("feat", 1),
                            pkg("dep", 1),  pkg("dep", 2),  pkg("dep", 3),  pkg("avail", 1)};
  bool ok = true;
  std::string detail;
  for (const auto& text : {"-removed", "-removed,-changed", "trendy"}) {
    const auto r = compute_closure(doc, parse_criteria(text));
    auto want = expected;
    if (parse_criteria(text).contains(Criterion::UnsatRecommends, Polarity::Minus)) want.insert(pkg("recomm", 1));
    const bool here = r.feasible && r.closure == want && r.out == PackageSet{pkg("conf", 1)} &&
                      !r.closure.count(pkg("option", 1));
    ok = ok && here;
    detail += std::string(text) + ": closure=" + std::to_string(r.closure.size()) +
              " out=" + std::to_string(r.out.size()) + (here ? " ok; " : " MISMATCH; ");
  }
  const auto with_r = compute_closure(doc, parse_criteria("-removed,-unsat_recommends"));
  auto plus = expected;
  plus.insert(pkg("recomm", 1));
  const bool r_ok = with_r.closure == plus && !with_r.closure.count(pkg("option", 1));
  ok = ok && r_ok;
  detail += "-removed,-unsat_recommends adds exactly (recomm,1): " + std::string(r_ok ? "yes" : "no");
  return {ok, detail};
}

struct CorpusStats {
  std::size_t instances = 0;
  std::size_t optimal = 0;
  std::size_t unsat = 0;
  std::size_t mismatches = 0;
  std::size_t invalid_witnesses = 0;
  double seconds = 0;
};

Verdict oracle_equivalence(CorpusStats& s) {
  const auto t0 = Clock::now();
  for (std::uint64_t seed = 1; seed <= kOracleInstances; ++seed) {
    const auto doc = generate_instance(oracle_params(seed));
    for (const auto& criteria : {paranoid(), trendy()}) {
      ++s.instances;
      const auto oracle = brute_force(doc, criteria, doc.universe());
      const auto closure = compute_closure(doc, criteria);
      SolveOutcome got;
      got.status = SolveOutcome::Status::Unsat;
      if (closure.feasible) got = solve(build_problem(doc, criteria, closure));

      bool same = got.status == oracle.status;
      if (same && oracle.optimal()) same = got.solution->objective == oracle.solution->objective;
      if (!same) ++s.mismatches;
      if (got.solution && !validate_solution(doc, got.solution->installed).ok) ++s.invalid_witnesses;
      if (oracle.optimal()) {
        ++s.optimal;
      } else {
        ++s.unsat;
      }
    }
  }
  s.seconds = seconds_since(t0);
  const bool ok = kOracleInstances >= 500 && s.mismatches == 0 && s.invalid_witnesses == 0 && s.seconds < kOracleSeconds;
  return {ok, std::to_string(kOracleInstances) + " documents x 2 presets = " + std::to_string(s.instances) +
                  " runs (" + std::to_string(s.optimal) + " optimal, " + std::to_string(s.unsat) +
                  " FAIL), mismatches=" + std::to_string(s.mismatches) +
                  ", invalid witnesses=" + std::to_string(s.invalid_witnesses) + ", " + fmt(s.seconds, 1) +
                  " s (limit " + fmt(kOracleSeconds, 0) + " s)"};
}

struct CliRun {
  int code;
  std::string out;
};

CliRun run_cli(const CliConfig& cfg, const std::string& input) {
  std::istringstream in(input);
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(cfg, in, out, err);
  return {code, out.str()};
}

Verdict preprocessing_soundness() {
  std::size_t runs = 0;
  std::size_t status_diff = 0;
  std::size_t objective_diff = 0;
  for (std::uint64_t seed = 1; seed <= kOracleInstances; ++seed) {
    const auto text = render_document(generate_instance(oracle_params(seed)));
    const auto doc = parse_document(text);
    for (const auto* preset : {"paranoid", "trendy"}) {
      ++runs;
      CliConfig cfg;
      cfg.subcommand = Subcommand::Solve;
      cfg.criteria = preset;
      const auto with = run_cli(cfg, text);
      cfg.no_closure = true;
      const auto without = run_cli(cfg, text);
      const bool fail_a = with.out == "FAIL\n";
      const bool fail_b = without.out == "FAIL\n";
      if (fail_a != fail_b || with.code != 0 || without.code != 0) {
        ++status_diff;
        continue;
      }
      if (fail_a) continue;
      const auto criteria = parse_criteria(preset);
      auto installed = [](const std::string& sol) {
        const auto parsed = parse_document(sol);
        PackageSet P;
        for (const auto& p : parsed.packages()) P.insert(p.id);
        return P;
      };
      if (evaluate(doc, installed(with.out), criteria) != evaluate(doc, installed(without.out), criteria)) {
        ++objective_diff;
      }
    }
  }
  return {status_diff == 0 && objective_diff == 0,
          std::to_string(runs) + " solve runs through the command layer, FAIL disagreements=" +
              std::to_string(status_diff) + ", objective disagreements=" + std::to_string(objective_diff)};
}

struct Reduction {
  double closure_ratio;
  double variable_shrink;
};

GenParams reduction_params(std::uint64_t seed, double depend_density) {
  GenParams p;
  p.seed = seed;
  p.packages = kReductionPackages;
  p.depend_density = depend_density;
  p.conflict_density = 0.1;
  p.provide_density = 0.05;
  p.recommend_density = 0.1;
  p.installed_density = 0.05;
  p.request_size = 1 + seed % 5;
  p.upgrade_probability = 0.3;
  p.remove_probability = 0.3;
  p.virtuals = 50;
  return p;
}

std::vector<Reduction> measure_reduction(double depend_density, std::size_t wanted) {
  std::vector<Reduction> out;
  for (std::uint64_t seed = 1; out.size() < wanted && seed < 50 * wanted; ++seed) {
    const auto doc = generate_instance(reduction_params(seed, depend_density));
    const auto closure = compute_closure(doc, paranoid());
    if (!closure.feasible) continue;
    const auto with = model_size(build_problem(doc, paranoid(), closure));
    const auto without = model_size(build_problem(doc, paranoid(), full_scope(doc)));
    out.push_back({static_cast<double>(closure.closure.size()) / static_cast<double>(doc.packages().size()),
                   static_cast<double>(without.variables) / static_cast<double>(std::max<std::size_t>(1, with.variables))});
  }
  return out;
}

Verdict closure_reduction() {
  constexpr double kDensity = 0.2;
  const auto main = measure_reduction(kDensity, kReductionInstances);
  std::vector<double> ratios;
  std::vector<double> shrinks;
  for (const auto& r : main) {
    ratios.push_back(r.closure_ratio);
    shrinks.push_back(r.variable_shrink);
  }
  const double ratio = median(ratios);
  const double shrink = median(shrinks);

  std::string sweep;
  for (double d : {0.1, 0.3, 0.4}) {
    const auto extra = measure_reduction(d, 11);
    std::vector<double> rr;
    std::vector<double> ss;
    for (const auto& r : extra) {
      rr.push_back(r.closure_ratio);
      ss.push_back(r.variable_shrink);
    }
    sweep += " density " + fmt(d, 1) + ": ratio " + fmt(median(rr)) + ", shrink " + fmt(median(ss), 2) + "x;";
  }
  const bool ok = main.size() == kReductionInstances && ratio <= kMaxMedianClosureRatio &&
                  shrink >= kMinMedianVariableShrink;
  return {ok, std::to_string(main.size()) + " feasible instances of " + std::to_string(kReductionPackages) +
                  " packages (dependency density " + fmt(kDensity, 1) + ", installed density 0.05, 1-5 install "
                  "targets, paranoid): median closure/universe=" + fmt(ratio) + " (limit " +
                  fmt(kMaxMedianClosureRatio, 2) + "), median variable shrink=" + fmt(shrink, 2) + "x (limit " +
                  fmt(kMinMedianVariableShrink, 1) + "x). Sweep:" + sweep};
}

Verdict sample_optimum() {
  const auto& doc = fixtures::upgrade_sample();
  const auto para = solve(build_problem(doc, paranoid(), compute_closure(doc, paranoid())));
  const ObjectiveVector expected{{{Criterion::Removed, Polarity::Minus, 0}, {Criterion::Changed, Polarity::Minus, 2}}};
  const bool para_ok = para.optimal() && para.solution->objective == expected &&
                       validate_solution(doc, para.solution->installed).ok;

  const auto trend = solve(build_problem(doc, trendy(), compute_closure(doc, trendy())));
  const auto oracle = brute_force(doc, trendy(), full_scope(doc).closure);
  const bool trend_ok = trend.optimal() && oracle.optimal() && trend.solution->objective == oracle.solution->objective &&
                        validate_solution(doc, trend.solution->installed).ok;
  return {para_ok && trend_ok,
          "paranoid " + (para.solution ? to_string(para.solution->objective) : std::string("none")) +
              " (expected -removed=0,-changed=2); trendy " +
              (trend.solution ? to_string(trend.solution->objective) : std::string("none")) + " vs oracle " +
              (oracle.solution ? to_string(oracle.solution->objective) : std::string("none"))};
}

Verdict parser_robustness() {
  std::size_t round_trip_failures = 0;
  for (std::uint64_t seed = 0; seed < kRoundTrips; ++seed) {
    const auto doc = random_docs::random_document(seed + 1000);
    const auto text = render_document(doc);
    try {
      if (parse_document(text) != doc || render_document(parse_document(text)) != text) ++round_trip_failures;
    } catch (const std::exception&) {
      ++round_trip_failures;
    }
  }

  static const char* const kTokens[] = {
      "package: ", "version: ", "depends: ", "conflicts: ", "provides: ", "recommends: ", "installed: ", "keep: ",
      "request: ", "install: ", "remove: ",  "upgrade: ",  "preamble: ",  "true",         "false!",      "true!",
      " | ",       ", ",        " = ",       " != ",       " < ",         " <= ",         " > ",         " >= ",
      "\n",        "\n\n",      "\r\n",      " ",          "#",           "a",            "b1",          "0",
      "1",         "2",         "feature",   "18446744073709551616"};
  std::mt19937_64 rng(2024);
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t unexpected = 0;
  std::string buf;
  for (std::uint64_t i = 0; i < kFuzzInputs; ++i) {
    buf.clear();
    const auto pieces = rng() % 40;
    const bool raw = i % 4 == 0;
    for (std::uint64_t k = 0; k < pieces; ++k) {
      if (raw || rng() % 3 == 0) {
        buf += static_cast<char>(rng() & 0xFF);
      } else {
        buf += kTokens[rng() % std::size(kTokens)];
      }
    }
    try {
      const auto doc = parse_document(buf);
      ++accepted;
      if (parse_document(render_document(doc)) != doc) ++unexpected;
    } catch (const ParseError&) {
      ++rejected;
    } catch (...) {
      ++unexpected;
    }
  }
  return {round_trip_failures == 0 && unexpected == 0,
          std::to_string(kRoundTrips) + " round trips, failures=" + std::to_string(round_trip_failures) + "; " +
              std::to_string(kFuzzInputs) + " fuzz inputs: " + std::to_string(accepted) + " accepted, " +
              std::to_string(rejected) + " rejected with ParseError, " + std::to_string(unexpected) +
              " crashes or other exceptions"};
}

std::string shell(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return std::to_string(rc);
}

Verdict determinism() {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "cudfopt_acceptance";
  fs::create_directories(dir);
  const std::string cli = CUDFOPT_CLI;

  std::vector<std::string> inputs{fixtures::sample_path("upgrade.cudf")};
  for (int seed : {3, 5, 8}) {
    const auto path = (dir / ("gen" + std::to_string(seed) + ".cudf")).string();
    shell(cli + " gen --seed " + std::to_string(seed) + " --packages 200 --depend-density 0.3 -o " + path);
    inputs.push_back(path);
  }

  std::vector<std::string> commands;
  for (int seed : {1, 99}) commands.push_back("gen --seed " + std::to_string(seed) + " --packages 300");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (const auto* c : {"paranoid", "trendy", "-new,+notuptodate"}) {
      commands.push_back(std::string("solve ") + inputs[i] + " -c " + c);
      commands.push_back(std::string("solve ") + inputs[i] + " -c " + c + " --no-closure");
      commands.push_back(std::string("facts ") + inputs[i] + " -c " + c);
      commands.push_back(std::string("closure ") + inputs[i] + " -c " + c);
    }
    const auto sol = (dir / ("sol" + std::to_string(i))).string();
    shell(cli + " solve " + inputs[i] + " -o " + sol);
    commands.push_back("validate " + inputs[i] + " " + sol);
  }

  std::size_t differing = 0;
  for (std::size_t k = 0; k < commands.size(); ++k) {
    std::string outputs[2];
    std::string codes[2];
    for (int r = 0; r < 2; ++r) {
      const auto file = (dir / ("out" + std::to_string(r))).string();
      codes[r] = shell(cli + " " + commands[k] + " > " + file + " 2>&1");
      outputs[r] = fixtures::read_file(file);
    }
    if (outputs[0] != outputs[1] || codes[0] != codes[1]) {
      ++differing;
      std::cout << "  nondeterministic: " << commands[k] << std::endl;
    }
  }
  fs::remove_all(dir);
  return {differing == 0, std::to_string(commands.size()) +
                              " invocations of solve/facts/closure/validate/gen, each run twice; differing=" +
                              std::to_string(differing)};
}

}  // namespace

int main(int argc, char** argv) {
  // An optional argument selects one criterion; none runs them all.
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"golden facts", golden_facts},
      {"closure reproduction", closure_reproduction},
      {"oracle equivalence", [] {
         CorpusStats stats;
         return oracle_equivalence(stats);
       }},
      {"preprocessing soundness", preprocessing_soundness},
      {"closure reduction", closure_reduction},
      {"sample optimum", sample_optimum},
      {"parser robustness", parser_robustness},
      {"determinism", determinism},
  };
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    std::cerr << "usage: acceptance [1-" << criteria.size() << "]\n";
    return 2;
  }
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only == 0 || only == static_cast<int>(i + 1)) report(static_cast<int>(i + 1), criteria[i].first, criteria[i].second());
  }
  if (only == 0) {
    std::cout << (failures == 0 ? "ALL ACCEPTANCE CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAILED")
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
