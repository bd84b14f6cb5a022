#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cudfopt/cudfopt.hpp"

namespace random_docs {

// Arbitrary well-formed documents, broader than the instance generator:
// odd names, large versions, false clauses, keep flags, empty requests.
inline cudfopt::CudfDocument random_document(std::uint64_t seed) {
  using namespace cudfopt;
  std::mt19937_64 rng(seed);
  auto below = [&](std::uint64_t n) { return rng() % n; };

  static const char* kNames[] = {"a", "b", "lib.x", "gtk+2", "py-yaml", "Z_9", "c", "d"};
  auto name = [&] { return std::string(kNames[below(8)]); };
  auto version = [&]() -> Version { return below(4) == 0 ? 1 + below(UINT64_MAX - 1) : 1 + below(5); };
  static constexpr Op kOps[] = {Op::EQ, Op::NEQ, Op::LT, Op::LE, Op::GT, Op::GE};

  auto formula = [&](bool provides) {
    Formula f;
    const auto clauses = below(4);
    for (std::uint64_t c = 0; c < clauses; ++c) {
      Clause cl;
      if (!provides && below(10) == 0) {
        f.clauses.push_back(cl);
        continue;
      }
      const auto atoms = provides ? 1 : 1 + below(3);
      for (std::uint64_t a = 0; a < atoms; ++a) {
        Constraint k{name(), std::nullopt};
        if (below(2)) k.bound = Bound{provides ? Op::EQ : kOps[below(6)], version()};
        cl.atoms.push_back(k);
      }
      f.clauses.push_back(cl);
    }
    return f;
  };

  std::vector<PackageDesc> pkgs;
  std::set<PackageId> seen;
  const auto n = below(8);
  for (std::uint64_t i = 0; i < n; ++i) {
    PackageDesc p;
    p.id = {name(), version()};
    if (!seen.insert(p.id).second) continue;
    p.depends = formula(false);
    p.conflicts = formula(false);
    p.provides = formula(true);
    p.recommends = formula(false);
    p.installed = below(2) == 0;
    if (below(3) == 0) p.keep = static_cast<Keep>(below(4));
    pkgs.push_back(std::move(p));
  }
  Request r;
  r.install = formula(false);
  r.remove = formula(false);
  r.upgrade = formula(false);
  return make_document(std::move(pkgs), std::move(r));
}

}  // namespace random_docs
