#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cudfopt/model.hpp"

namespace cudfopt {

/// Knobs for synthetic instances. Densities are per-package probabilities.
struct GenParams {
  std::size_t packages = 12;  // (name, version) pairs in the universe
  double depend_density = 0.4;
  double conflict_density = 0.15;
  double provide_density = 0.15;
  double recommend_density = 0.15;
  double installed_density = 0.3;
  std::size_t request_size = 2;  // install targets
  double upgrade_probability = 0.3;
  double remove_probability = 0.3;
  double bound_probability = 0.4;  // chance that an atom carries a version bound
  std::size_t virtuals = 2;        // virtual names v0, v1, ...
  std::uint64_t seed = 1;
};

namespace detail {

class GenRng {
public:
  explicit GenRng(std::uint64_t seed) : engine_(seed) {}

  // Modulo reduction keeps the stream identical across standard libraries.
  std::size_t below(std::size_t n) { return n <= 1 ? 0 : static_cast<std::size_t>(engine_() % n); }
  bool chance(double p) { return static_cast<double>(engine_() >> 11) * 0x1.0p-53 < p; }

private:
  std::mt19937_64 engine_;
};

}  // namespace detail

/// Random but reproducible document: names p<i> with versions 1 to 3,
/// virtual names v<j> reachable only through provides.
inline CudfDocument generate_instance(const GenParams& params) {
  detail::GenRng rng(params.seed);

  std::vector<PackageDesc> pkgs;
  for (std::size_t name = 0; pkgs.size() < params.packages; ++name) {
    const std::size_t versions = std::min<std::size_t>(1 + rng.below(3), params.packages - pkgs.size());
    std::vector<Version> pool{1, 2, 3};
    for (std::size_t k = 0; k < versions; ++k) {
      const auto pick = rng.below(pool.size());
      PackageDesc p;
      p.id = {"p" + std::to_string(name), pool[pick]};
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
      pkgs.push_back(std::move(p));
    }
  }
  std::sort(pkgs.begin(), pkgs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  std::vector<std::string> names;
  for (const auto& p : pkgs) {
    if (names.empty() || names.back() != p.id.name) names.push_back(p.id.name);
  }
  std::vector<std::string> targets = names;
  for (std::size_t j = 0; j < params.virtuals; ++j) targets.push_back("v" + std::to_string(j));

  static constexpr Op kOps[] = {Op::EQ, Op::NEQ, Op::LT, Op::LE, Op::GT, Op::GE};
  auto atom = [&](const std::vector<std::string>& from) {
    Constraint c{from[rng.below(from.size())], std::nullopt};
    if (rng.chance(params.bound_probability)) c.bound = Bound{kOps[rng.below(6)], 1 + rng.below(3)};
    return c;
  };
  auto formula = [&](std::size_t max_clauses, std::size_t max_atoms) {
    Formula f;
    const std::size_t clauses = 1 + rng.below(max_clauses);
    for (std::size_t k = 0; k < clauses; ++k) {
      Clause cl;
      const std::size_t atoms = 1 + rng.below(max_atoms);
      for (std::size_t a = 0; a < atoms; ++a) cl.atoms.push_back(atom(targets));
      f.clauses.push_back(std::move(cl));
    }
    return f;
  };

  for (auto& p : pkgs) {
    if (rng.chance(params.depend_density)) p.depends = formula(2, 2);
    if (rng.chance(params.conflict_density)) p.conflicts = formula(1, 2);
    if (rng.chance(params.recommend_density)) p.recommends = formula(2, 2);
    if (params.virtuals > 0 && rng.chance(params.provide_density)) {
      Constraint c{"v" + std::to_string(rng.below(params.virtuals)), std::nullopt};
      if (rng.chance(0.5)) c.bound = Bound{Op::EQ, 1 + rng.below(3)};
      p.provides.clauses.push_back(Clause{{c}});
    }
    p.installed = rng.chance(params.installed_density);
  }

  Request req;
  for (std::size_t k = 0; k < params.request_size; ++k) req.install.clauses.push_back(Clause{{atom(targets)}});
  if (rng.chance(params.upgrade_probability)) req.upgrade.clauses.push_back(Clause{{atom(names)}});
  if (rng.chance(params.remove_probability)) req.remove.clauses.push_back(Clause{{atom(names)}});

  return make_document(std::move(pkgs), std::move(req));
}

}  // namespace cudfopt
