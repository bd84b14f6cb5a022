#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cudfopt/model.hpp"

namespace cudfopt {

enum class Criterion { NewPackage, Removed, Changed, NotUpToDate, UnsatRecommends };
enum class Polarity { Plus, Minus };

struct SignedCriterion {
  Criterion criterion;
  Polarity polarity;

  friend bool operator==(const SignedCriterion&, const SignedCriterion&) = default;
};

class BadCriteria : public Error {
public:
  using Error::Error;
};

// Constant used for the criterion in fact output.
inline const char* fact_constant(Criterion c) {
  switch (c) {
    case Criterion::NewPackage: return "newpackage";
    case Criterion::Removed: return "remove";
    case Criterion::Changed: return "change";
    case Criterion::NotUpToDate: return "uptodate";
    case Criterion::UnsatRecommends: return "recommend";
  }
  return "?";
}

// Name used on the command line.
inline const char* cli_name(Criterion c) {
  switch (c) {
    case Criterion::NewPackage: return "new";
    case Criterion::Removed: return "removed";
    case Criterion::Changed: return "changed";
    case Criterion::NotUpToDate: return "notuptodate";
    case Criterion::UnsatRecommends: return "unsat_recommends";
  }
  return "?";
}

/// Signed objectives in increasing order of significance: the last item is
/// the most significant one.
class CriteriaSeq {
public:
  CriteriaSeq() = default;

  explicit CriteriaSeq(std::vector<SignedCriterion> least_significant_first)
      : items_(std::move(least_significant_first)) {
    for (std::size_t i = 0; i < items_.size(); ++i) {
      for (std::size_t j = i + 1; j < items_.size(); ++j) {
        if (items_[i].criterion == items_[j].criterion) {
          throw BadCriteria(std::string("criterion '") + cli_name(items_[i].criterion) + "' listed twice");
        }
      }
    }
  }

  static CriteriaSeq most_significant_first(std::vector<SignedCriterion> items) {
    return CriteriaSeq(std::vector<SignedCriterion>(items.rbegin(), items.rend()));
  }

  [[nodiscard]] const std::vector<SignedCriterion>& items() const noexcept { return items_; }
  [[nodiscard]] std::size_t size() const noexcept { return items_.size(); }
  [[nodiscard]] bool empty() const noexcept { return items_.empty(); }

  [[nodiscard]] bool contains(Criterion c, Polarity p) const {
    for (const auto& item : items_) {
      if (item.criterion == c && item.polarity == p) return true;
    }
    return false;
  }
  [[nodiscard]] bool mentions(Criterion c) const {
    return contains(c, Polarity::Plus) || contains(c, Polarity::Minus);
  }

  friend bool operator==(const CriteriaSeq&, const CriteriaSeq&) = default;

private:
  std::vector<SignedCriterion> items_;
};

/// (-C, -D): removals first, then changes.
inline CriteriaSeq paranoid() {
  return CriteriaSeq({{Criterion::Changed, Polarity::Minus}, {Criterion::Removed, Polarity::Minus}});
}

/// (-N, -R, -U, -D).
inline CriteriaSeq trendy() {
  return CriteriaSeq({{Criterion::NewPackage, Polarity::Minus},
                      {Criterion::UnsatRecommends, Polarity::Minus},
                      {Criterion::NotUpToDate, Polarity::Minus},
                      {Criterion::Removed, Polarity::Minus}});
}

/// "paranoid", "trendy", or signed names listed most significant first,
/// e.g. "-removed,-changed".
inline CriteriaSeq parse_criteria(const std::string& text) {
  if (text == "paranoid") return paranoid();
  if (text == "trendy") return trendy();

  std::vector<SignedCriterion> items;
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    const auto part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (part.size() < 2 || (part[0] != '-' && part[0] != '+')) {
      throw BadCriteria("criterion '" + part + "' needs a leading + or - and a name");
    }
    const auto name = part.substr(1);
    std::optional<Criterion> found;
    for (auto c : {Criterion::NewPackage, Criterion::Removed, Criterion::Changed, Criterion::NotUpToDate,
                   Criterion::UnsatRecommends}) {
      if (name == cli_name(c)) found = c;
    }
    if (!found) throw BadCriteria("unknown criterion '" + name + "'");
    items.push_back({*found, part[0] == '-' ? Polarity::Minus : Polarity::Plus});
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return CriteriaSeq::most_significant_first(std::move(items));
}

}  // namespace cudfopt
