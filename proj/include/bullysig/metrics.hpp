#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bullysig/corpus.hpp"
#include "bullysig/error.hpp"

namespace bullysig::metrics {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Scores on the positive class ("binary averaging").
struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  std::optional<double> auc;  // absent when only one gold class is present
  ConfusionCounts confusion;
};

// Labels are +1 / -1. Length mismatch throws ArgumentError.
ConfusionCounts confusion(std::span<const int> gold, std::span<const int> predicted);

// P = tp/(tp+fp), R = tp/(tp+fn), each 0 on a zero denominator;
// F1 = 2PR/(P+R), 0 when P+R = 0; Acc = (tp+tn)/n. Empty input throws
// EmptyInputError. auc is left unset.
EvalReport prf_accuracy(std::span<const int> gold, std::span<const int> predicted);

// Mann-Whitney statistic with average ranks for ties:
// (R_pos - n_pos (n_pos + 1) / 2) / (n_pos n_neg). Throws
// UndefinedMetricError unless both classes are present.
double auc_roc(std::span<const int> gold, std::span<const double> scores);

// Predictions are score > 0 ? +1 : -1; AUC is filled when defined.
EvalReport evaluate(std::span<const int> gold, std::span<const double> scores);

// Arithmetic mean of each field over several reports (AUC averaged over the
// reports that have one). Confusion counts are summed.
EvalReport mean_report(std::span<const EvalReport> reports);

// ---------------------------------------------------------------------------
// Agreement

// kappa = (p_o - p_e) / (1 - p_e) with p_e from the product of marginals.
// When p_e = 1, kappa is 1 if p_o = 1 and otherwise undefined.
template <typename Label>
double cohen_kappa(std::span<const Label> a, std::span<const Label> b) {
  if (a.size() != b.size()) throw ArgumentError("cohen_kappa: rater sequences differ in length");
  if (a.empty()) throw EmptyInputError("cohen_kappa: no ratings");
  std::map<Label, std::pair<std::size_t, std::size_t>> marginals;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++marginals[a[i]].first;
    ++marginals[b[i]].second;
    if (a[i] == b[i]) ++agree;
  }
  const double n = static_cast<double>(a.size());
  const double p_o = static_cast<double>(agree) / n;
  double p_e = 0.0;
  for (const auto& [label, counts] : marginals)
    p_e += (static_cast<double>(counts.first) / n) * (static_cast<double>(counts.second) / n);
  if (p_e >= 1.0) {
    if (agree == a.size()) return 1.0;
    throw UndefinedMetricError("cohen_kappa: chance agreement is 1");
  }
  return (p_o - p_e) / (1.0 - p_e);
}

template <typename Label>
double cohen_kappa(const std::vector<Label>& a, const std::vector<Label>& b) {
  return cohen_kappa(std::span<const Label>(a), std::span<const Label>(b));
}

// Fleiss' kappa on an items x categories count matrix. Every row must sum to
// the same rater count n >= 2 (ArgumentError otherwise). When the expected
// agreement is 1, kappa is 1 on perfect observed agreement and otherwise
// undefined.
double fleiss_kappa(const std::vector<std::vector<std::size_t>>& counts);

// ---------------------------------------------------------------------------
// Per-category error rates

struct CategoryRate {
  std::size_t occurrences = 0;  // posts carrying at least one span of the category
  std::size_t errors = 0;       // of those, posts whose prediction differs from gold
  double rate() const { return occurrences == 0 ? 0.0 : static_cast<double>(errors) / occurrences; }
};

struct CategoryErrorReport {
  std::map<Category, CategoryRate> categories;  // absent categories are omitted
  CategoryRate not_cyberbullying;               // false-positive rate over gold-negative posts
};

// A post with spans of several categories counts in each of them.
// Misaligned lengths throw ArgumentError.
CategoryErrorReport category_error_rates(std::span<const Post> posts, std::span<const int> predicted);

// Report-level grouping of the fine-grained categories: Curse, Defamation,
// Defense (bystander + victim), Encouragement, Insult (general, relatives,
// discrimination), Sexual (talk + harassment), Threat. "other" has no group.
std::optional<std::string_view> coarse_category(Category c);

struct CoarseErrorRow {
  std::string name;
  CategoryRate rate;
};

// One row per coarse group in the order above (a post counts once per group
// it touches), followed by "Not cyberbullying". Groups without occurrences
// are kept with n = 0.
std::vector<CoarseErrorRow> coarse_error_rates(std::span<const Post> posts, std::span<const int> predicted);

}  // namespace bullysig::metrics
