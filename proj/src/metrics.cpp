#include "bullysig/metrics.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <set>

namespace bullysig::metrics {

ConfusionCounts confusion(std::span<const int> gold, std::span<const int> predicted) {
  if (gold.size() != predicted.size()) throw ArgumentError("gold and predicted labels differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool g = gold[i] > 0;
    const bool p = predicted[i] > 0;
    if (g && p) ++c.tp;
    else if (!g && p) ++c.fp;
    else if (!g && !p) ++c.tn;
    else ++c.fn;
  }
  return c;
}

EvalReport prf_accuracy(std::span<const int> gold, std::span<const int> predicted) {
  if (gold.empty()) throw EmptyInputError("cannot evaluate an empty prediction set");
  EvalReport r;
  r.confusion = confusion(gold, predicted);
  const auto& c = r.confusion;
  const double tp = static_cast<double>(c.tp);
  r.precision = c.tp + c.fp == 0 ? 0.0 : tp / static_cast<double>(c.tp + c.fp);
  r.recall = c.tp + c.fn == 0 ? 0.0 : tp / static_cast<double>(c.tp + c.fn);
  r.f1 = r.precision + r.recall == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  return r;
}

double auc_roc(std::span<const int> gold, std::span<const double> scores) {
  if (gold.size() != scores.size()) throw ArgumentError("gold labels and scores differ in length");
  const std::size_t n = gold.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // Ranks i+1 .. j share their average.
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (gold[order[t]] > 0) {
        rank_sum_pos += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw UndefinedMetricError("AUC needs both positive and negative instances");
  const double np = static_cast<double>(n_pos);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

EvalReport evaluate(std::span<const int> gold, std::span<const double> scores) {
  if (gold.size() != scores.size()) throw ArgumentError("gold labels and scores differ in length");
  std::vector<int> predicted(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) predicted[i] = scores[i] > 0.0 ? 1 : -1;
  auto r = prf_accuracy(gold, predicted);
  const bool has_pos = std::any_of(gold.begin(), gold.end(), [](int y) { return y > 0; });
  const bool has_neg = std::any_of(gold.begin(), gold.end(), [](int y) { return y <= 0; });
  if (has_pos && has_neg) r.auc = auc_roc(gold, scores);
  return r;
}

EvalReport mean_report(std::span<const EvalReport> reports) {
  if (reports.empty()) throw EmptyInputError("cannot average zero reports");
  EvalReport m;
  double auc_sum = 0.0;
  std::size_t auc_n = 0;
  for (const auto& r : reports) {
    m.precision += r.precision;
    m.recall += r.recall;
    m.f1 += r.f1;
    m.accuracy += r.accuracy;
    if (r.auc) {
      auc_sum += *r.auc;
      ++auc_n;
    }
    m.confusion.tp += r.confusion.tp;
    m.confusion.fp += r.confusion.fp;
    m.confusion.tn += r.confusion.tn;
    m.confusion.fn += r.confusion.fn;
  }
  const double k = static_cast<double>(reports.size());
  m.precision /= k;
  m.recall /= k;
  m.f1 /= k;
  m.accuracy /= k;
  if (auc_n > 0) m.auc = auc_sum / static_cast<double>(auc_n);
  return m;
}

double fleiss_kappa(const std::vector<std::vector<std::size_t>>& counts) {
  if (counts.empty()) throw EmptyInputError("fleiss_kappa: no items");
  const std::size_t n_categories = counts.front().size();
  if (n_categories == 0) throw ArgumentError("fleiss_kappa: no categories");
  const std::size_t raters = std::accumulate(counts.front().begin(), counts.front().end(), std::size_t{0});
  if (raters < 2) throw ArgumentError("fleiss_kappa: at least two raters per item are required");

  std::vector<double> column(n_categories, 0.0);
  double p_bar = 0.0;
  const double n = static_cast<double>(raters);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto& row = counts[i];
    if (row.size() != n_categories) throw ArgumentError("fleiss_kappa: ragged count matrix");
    std::size_t sum = 0;
    double sq = 0.0;
    for (std::size_t j = 0; j < n_categories; ++j) {
      sum += row[j];
      sq += static_cast<double>(row[j]) * static_cast<double>(row[j]);
      column[j] += static_cast<double>(row[j]);
    }
    if (sum != raters)
      throw ArgumentError("fleiss_kappa: item " + std::to_string(i) + " has " + std::to_string(sum) +
                          " ratings, expected " + std::to_string(raters));
    p_bar += (sq - n) / (n * (n - 1.0));
  }
  const double items = static_cast<double>(counts.size());
  p_bar /= items;
  double p_e = 0.0;
  for (const double c : column) {
    const double p = c / (items * n);
    p_e += p * p;
  }
  if (p_e >= 1.0) {
    if (p_bar >= 1.0) return 1.0;
    throw UndefinedMetricError("fleiss_kappa: chance agreement is 1");
  }
  return (p_bar - p_e) / (1.0 - p_e);
}

CategoryErrorReport category_error_rates(std::span<const Post> posts, std::span<const int> predicted) {
  if (posts.size() != predicted.size()) throw ArgumentError("posts and predictions differ in length");
  CategoryErrorReport report;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    const Post& post = posts[i];
    const bool wrong = (predicted[i] > 0) != post.label;
    std::set<Category> seen;
    for (const auto& span : post.spans) seen.insert(span.category);
    for (const auto c : seen) {
      auto& rate = report.categories[c];
      ++rate.occurrences;
      if (wrong) ++rate.errors;
    }
    if (!post.label) {
      ++report.not_cyberbullying.occurrences;
      if (wrong) ++report.not_cyberbullying.errors;
    }
  }
  return report;
}

namespace {
constexpr std::array<std::string_view, 7> kCoarseNames = {"Curse",  "Defamation", "Defense", "Encouragement",
                                                          "Insult", "Sexual",     "Threat"};
}  // namespace

std::optional<std::string_view> coarse_category(Category c) {
  switch (c) {
    case Category::kCurseExclusion: return kCoarseNames[0];
    case Category::kDefamation: return kCoarseNames[1];
    case Category::kDefenseBystander:
    case Category::kDefenseVictim: return kCoarseNames[2];
    case Category::kEncouragement: return kCoarseNames[3];
    case Category::kInsultGeneral:
    case Category::kInsultRelatives:
    case Category::kInsultDiscrimination: return kCoarseNames[4];
    case Category::kSexualTalk:
    case Category::kSexualHarassment: return kCoarseNames[5];
    case Category::kThreatBlackmail: return kCoarseNames[6];
    case Category::kOther: return std::nullopt;
  }
  return std::nullopt;
}

std::vector<CoarseErrorRow> coarse_error_rates(std::span<const Post> posts, std::span<const int> predicted) {
  if (posts.size() != predicted.size()) throw ArgumentError("posts and predictions differ in length");
  std::vector<CoarseErrorRow> rows;
  for (const auto name : kCoarseNames) rows.push_back({std::string(name), {}});
  rows.push_back({"Not cyberbullying", {}});
  for (std::size_t i = 0; i < posts.size(); ++i) {
    const Post& post = posts[i];
    const bool wrong = (predicted[i] > 0) != post.label;
    std::set<std::string_view> seen;
    for (const auto& span : post.spans)
      if (const auto name = coarse_category(span.category)) seen.insert(*name);
    for (auto& row : rows) {
      if (!seen.contains(row.name)) continue;
      ++row.rate.occurrences;
      if (wrong) ++row.rate.errors;
    }
    if (!post.label) {
      ++rows.back().rate.occurrences;
      if (wrong) ++rows.back().rate.errors;
    }
  }
  return rows;
}

}  // namespace bullysig::metrics
