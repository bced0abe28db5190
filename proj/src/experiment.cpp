#include "bullysig/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <mutex>

#include "bullysig/error.hpp"
#include "bullysig/parallel.hpp"
#include "bullysig/random.hpp"
#include "bullysig/textprep.hpp"

namespace bullysig::experiment {

namespace {

using features::FeatureSpace;
using features::GroupSet;
using features::PostFeatures;

std::vector<int> labels_of(const std::vector<Post>& posts) {
  std::vector<int> y;
  y.reserve(posts.size());
  for (const auto& p : posts) y.push_back(p.label ? 1 : -1);
  return y;
}

template <typename T>
std::vector<T> pick(const std::vector<T>& items, const std::vector<std::size_t>& indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (const auto i : indices) out.push_back(items[i]);
  return out;
}

// Held-in positions not in `fold`, ascending.
std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& fold) {
  std::vector<bool> in_fold(n, false);
  for (const auto i : fold) in_fold[i] = true;
  std::vector<std::size_t> out;
  out.reserve(n - fold.size());
  for (std::size_t i = 0; i < n; ++i)
    if (!in_fold[i]) out.push_back(i);
  return out;
}

std::vector<SparseVector> vectorize_all(const std::vector<const PostFeatures*>& feats, const FeatureSpace& space) {
  std::vector<SparseVector> xs;
  xs.reserve(feats.size());
  for (const auto* f : feats) xs.push_back(features::vectorize(*f, space));
  return xs;
}

std::vector<const PostFeatures*> pointers(const std::vector<PostFeatures>& feats,
                                          const std::vector<std::size_t>& indices) {
  std::vector<const PostFeatures*> out;
  out.reserve(indices.size());
  for (const auto i : indices) out.push_back(&feats[i]);
  return out;
}

std::vector<const PostFeatures*> pointers(const std::vector<PostFeatures>& feats) {
  std::vector<const PostFeatures*> out;
  out.reserve(feats.size());
  for (const auto& f : feats) out.push_back(&f);
  return out;
}

bool better(const TrialResult& a, const TrialResult& b) {
  if (a.mean.f1 != b.mean.f1) return a.mean.f1 > b.mean.f1;
  return a.index < b.index;
}

std::string format_c(double c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", c);
  return buf;
}

}  // namespace

std::string TrialConfig::label() const {
  return groups.label() + " | C=" + format_c(svm.C) + " | " + std::string(linsvm::to_string(svm.loss)) + " | " +
         std::string(linsvm::to_string(svm.class_weight));
}

const std::vector<double>& standard_c_values() {
  static const std::vector<double> values = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  return values;
}

std::vector<linsvm::SvmConfig> standard_grid(const linsvm::SvmConfig& base) {
  std::vector<linsvm::SvmConfig> grid;
  for (const double c : standard_c_values())
    for (const auto loss : {linsvm::Loss::kHinge, linsvm::Loss::kSquaredHinge})
      for (const auto weight : {linsvm::ClassWeight::kNone, linsvm::ClassWeight::kBalanced}) {
        auto cfg = base;
        cfg.C = c;
        cfg.loss = loss;
        cfg.class_weight = weight;
        grid.push_back(cfg);
      }
  return grid;
}

std::vector<TrialConfig> enumerate_trials(const std::vector<GroupSet>& subsets,
                                          const std::vector<linsvm::SvmConfig>& grid) {
  std::vector<GroupSet> sorted = subsets;
  std::sort(sorted.begin(), sorted.end(), [](GroupSet a, GroupSet b) { return a.mask() < b.mask(); });
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<TrialConfig> out;
  out.reserve(sorted.size() * grid.size());
  for (const auto g : sorted) {
    if (g.empty()) throw ArgumentError("empty feature group subset in the grid");
    for (const auto& cfg : grid) out.push_back({g, cfg});
  }
  return out;
}

TrialConfig ngram_baseline_config(std::uint64_t seed) {
  linsvm::SvmConfig svm;
  svm.C = 1.0;
  svm.loss = linsvm::Loss::kSquaredHinge;
  svm.class_weight = linsvm::ClassWeight::kNone;
  svm.seed = seed;
  return {GroupSet({features::FeatureGroup::kWordNgrams}), svm};
}

std::vector<std::vector<std::size_t>> make_folds(const std::vector<Post>& held_in, std::size_t k,
                                                 std::uint64_t seed) {
  std::vector<bool> labels;
  labels.reserve(held_in.size());
  for (const auto& p : held_in) labels.push_back(p.label);
  return stratified_kfold(labels, k, derive_seed(seed, "folds"));
}

std::vector<PostFeatures> extract_all(const std::vector<Post>& posts, const features::FeatureContext& context,
                                      std::size_t workers) {
  std::vector<PostFeatures> out(posts.size());
  parallel_for(posts.size(), workers, [&](std::size_t i) { out[i] = features::extract(posts[i], context); });
  return out;
}

std::vector<TrialResult> run_grid(const std::vector<Post>& held_in, const std::vector<PostFeatures>& feats,
                                  const GridOptions& options) {
  if (held_in.size() != feats.size()) throw ArgumentError("run_grid: posts and features differ in length");
  if (options.grid.empty() || options.subsets.empty()) throw ArgumentError("run_grid: empty grid");
  if (held_in.empty()) throw EmptyInputError("run_grid: no held-in posts");
  const auto trials = enumerate_trials(options.subsets, options.grid);
  const auto folds = make_folds(held_in, options.folds, options.seed);
  const auto labels = labels_of(held_in);
  const std::size_t n_subsets = trials.size() / options.grid.size();
  const std::size_t k = folds.size();

  // Fail early, before any work, if a subset needs a missing group.
  for (std::size_t s = 0; s < n_subsets; ++s) {
    const auto groups = trials[s * options.grid.size()].groups;
    for (const auto g : groups.groups()) {
      const bool have = g == features::FeatureGroup::kSubjectivity   ? feats.front().has_subjectivity
                        : g == features::FeatureGroup::kTermLists    ? feats.front().has_term_lists
                        : g == features::FeatureGroup::kTopicModels ? feats.front().has_topics
                                                                     : true;
      if (!have)
        throw ResourceError(std::string("feature group ") + features::group_letter(g) + " (" +
                            std::string(features::group_name(g)) + ") is enabled but its resources are missing");
    }
  }

  std::vector<TrialResult> results(trials.size());
  for (std::size_t t = 0; t < trials.size(); ++t) {
    results[t].index = t;
    results[t].config = trials[t];
    results[t].folds.resize(k);
    results[t].converged.assign(k, false);
    results[t].epochs.assign(k, 0);
  }

  // Unit of work: one (subset, fold) pair; every grid configuration shares
  // its feature space and vectors.
  const std::size_t units = n_subsets * k;
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_for(units, options.workers, [&](std::size_t u) {
    const std::size_t s = u / k;
    const std::size_t f = u % k;
    const auto groups = trials[s * options.grid.size()].groups;
    const auto train_idx = complement(held_in.size(), folds[f]);
    const auto& val_idx = folds[f];

    const auto train_feats = pointers(feats, train_idx);
    const auto space = features::build_feature_space(train_feats, groups);
    const auto xs = vectorize_all(train_feats, space);
    const auto vs = vectorize_all(pointers(feats, val_idx), space);
    const auto ys = pick(labels, train_idx);
    const auto gold = pick(labels, val_idx);

    std::vector<double> scores(vs.size());
    for (std::size_t c = 0; c < options.grid.size(); ++c) {
      auto& result = results[s * options.grid.size() + c];
      const auto model = linsvm::train(xs, ys, space.dimension(), result.config.svm);
      for (std::size_t i = 0; i < vs.size(); ++i) scores[i] = linsvm::decision(model, vs[i]);
      result.folds[f] = metrics::evaluate(gold, scores);
      result.converged[f] = model.converged;
      result.epochs[f] = model.epochs;
    }
    const std::size_t finished = ++done;
    if (options.progress) {
      std::lock_guard lock(progress_mutex);
      options.progress(finished, units);
    }
  });

  for (auto& r : results) r.mean = metrics::mean_report(r.folds);
  return results;
}

std::vector<TrialResult> run_grid(const std::vector<Post>& held_in, const features::FeatureContext& context,
                                  const GridOptions& options) {
  std::uint8_t mask = 0;
  for (const auto g : options.subsets) mask |= g.mask();
  context.require(GroupSet(mask));
  return run_grid(held_in, extract_all(held_in, context, options.workers), options);
}

const TrialResult& select_winner(const std::vector<TrialResult>& results) {
  if (results.empty()) throw EmptyInputError("select_winner: no trial results");
  const TrialResult* best = &results.front();
  for (const auto& r : results)
    if (better(r, *best)) best = &r;
  return *best;
}

std::vector<std::size_t> best_per_subset(const std::vector<TrialResult>& results) {
  std::vector<std::size_t> best;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto mask = results[i].config.groups.mask();
    auto it = std::find_if(best.begin(), best.end(),
                           [&](std::size_t b) { return results[b].config.groups.mask() == mask; });
    if (it == best.end()) {
      best.push_back(i);
    } else if (better(results[i], results[*it])) {
      *it = i;
    }
  }
  std::sort(best.begin(), best.end(), [&](std::size_t a, std::size_t b) { return better(results[a], results[b]); });
  return best;
}

SystemResult finalize(const std::vector<Post>& held_in, const std::vector<PostFeatures>& held_in_features,
                      const std::vector<Post>& holdout, const std::vector<PostFeatures>& holdout_features,
                      const TrialConfig& config) {
  if (held_in.size() != held_in_features.size() || holdout.size() != holdout_features.size())
    throw ArgumentError("finalize: posts and features differ in length");
  if (holdout.empty()) throw EmptyInputError("finalize: empty holdout");
  SystemResult out;
  out.name = config.groups.label();
  out.config = config;
  const auto train_feats = pointers(held_in_features);
  out.space = features::build_feature_space(train_feats, config.groups);
  const auto xs = vectorize_all(train_feats, out.space);
  out.model = linsvm::train(xs, labels_of(held_in), out.space.dimension(), config.svm);
  out.model.feature_fingerprint = out.space.fingerprint();

  out.scores.reserve(holdout.size());
  out.predictions.reserve(holdout.size());
  for (const auto& f : holdout_features) {
    const double s = linsvm::decision(out.model, features::vectorize(f, out.space));
    out.scores.push_back(s);
    out.predictions.push_back(s > 0.0 ? 1 : -1);
  }
  out.holdout = metrics::evaluate(labels_of(holdout), out.scores);
  out.errors = metrics::category_error_rates(holdout, out.predictions);
  return out;
}

SystemResult finalize(const std::vector<Post>& held_in, const std::vector<Post>& holdout, const TrialConfig& config,
                      const features::FeatureContext& context) {
  context.require(config.groups);
  return finalize(held_in, extract_all(held_in, context), holdout, extract_all(holdout, context), config);
}

std::vector<int> keyword_baseline(const std::vector<Post>& posts, const std::set<std::string, std::less<>>& profanity,
                                  const textprep::AbbreviationMap& abbreviations) {
  if (posts.empty()) throw EmptyInputError("keyword baseline: no posts");
  if (profanity.empty()) throw EmptyInputError("keyword baseline: empty profanity list");
  std::vector<int> out;
  out.reserve(posts.size());
  for (const auto& p : posts) {
    const auto tokens = textprep::preprocess(p.text, abbreviations);
    const bool hit = std::any_of(tokens.begin(), tokens.end(), [&](const std::string& t) { return profanity.contains(t); });
    out.push_back(hit ? 1 : -1);
  }
  return out;
}

metrics::EvalReport score_predictions(const std::vector<Post>& posts, const std::vector<int>& predictions) {
  std::vector<double> scores(predictions.begin(), predictions.end());
  return metrics::evaluate(labels_of(posts), scores);
}

SystemResult ngram_baseline(const std::vector<Post>& held_in, const std::vector<Post>& holdout,
                            const features::FeatureContext& context, std::uint64_t seed) {
  auto out = finalize(held_in, holdout, ngram_baseline_config(seed), context);
  out.name = "word n-gram baseline";
  return out;
}

ProtocolResult run_protocol(const std::vector<Post>& corpus, const features::FeatureContext& context,
                            const ProtocolOptions& options) {
  if (!context.term_lists) throw ResourceError("keyword baseline: term lists (profanity) are required");
  const auto& profanity = (*context.term_lists)[features::TermList::kProfanity];
  std::uint8_t mask = features::GroupSet::parse("A").mask();
  for (const auto g : options.grid.subsets) mask |= g.mask();
  context.require(features::GroupSet(mask));

  ProtocolResult result;
  result.split = holdout_split_indices(corpus.size(), options.holdout_fraction, derive_seed(options.grid.seed, "holdout"));
  const auto held_in = pick(corpus, result.split.held_in);
  const auto holdout = pick(corpus, result.split.holdout);

  // Features depend on each post alone (plus fixed resources), so computing
  // them for every post up front leaks nothing; spaces are built from
  // held-in features only.
  const auto all_features = extract_all(corpus, context, options.grid.workers);
  const auto held_in_features = pick(all_features, result.split.held_in);
  const auto holdout_features = pick(all_features, result.split.holdout);

  result.trials = run_grid(held_in, held_in_features, options.grid);
  result.winner = select_winner(result.trials).index;

  const auto ranked = best_per_subset(result.trials);
  for (std::size_t i = 0; i < std::min(options.top_systems, ranked.size()); ++i) {
    result.top_trials.push_back(ranked[i]);
    result.top_systems.push_back(
        finalize(held_in, held_in_features, holdout, holdout_features, result.trials[ranked[i]].config));
  }
  for (const auto g : features::kAllGroups) {
    const GroupSet single({g});
    const auto it = std::find_if(ranked.begin(), ranked.end(),
                                 [&](std::size_t r) { return result.trials[r].config.groups == single; });
    if (it == ranked.end()) continue;
    result.single_group_trials.push_back(*it);
    result.single_group_systems.push_back(
        finalize(held_in, held_in_features, holdout, holdout_features, result.trials[*it].config));
  }

  // Word n-gram baseline: cross-validation from the matching grid trial when
  // the grid contains it, otherwise from a one-configuration grid on the same
  // folds.
  const auto ngram_cfg = ngram_baseline_config(options.grid.grid.front().seed);
  result.ngram.name = "word n-gram baseline";
  const auto match = std::find_if(result.trials.begin(), result.trials.end(), [&](const TrialResult& r) {
    return r.config.groups == ngram_cfg.groups && r.config.svm == ngram_cfg.svm;
  });
  if (match != result.trials.end()) {
    result.ngram.cross_validation = match->mean;
  } else {
    GridOptions one = options.grid;
    one.subsets = {ngram_cfg.groups};
    one.grid = {ngram_cfg.svm};
    one.progress = nullptr;
    result.ngram.cross_validation = run_grid(held_in, held_in_features, one).front().mean;
  }
  result.ngram_system = finalize(held_in, held_in_features, holdout, holdout_features, ngram_cfg);
  result.ngram_system.name = result.ngram.name;
  result.ngram.holdout = result.ngram_system.holdout;
  result.ngram.predictions = result.ngram_system.predictions;
  result.ngram.errors = result.ngram_system.errors;

  // Keyword baseline: no training; cross-validation scores are the mean over
  // the validation folds.
  result.keyword.name = "profanity baseline";
  const auto folds = make_folds(held_in, options.grid.folds, options.grid.seed);
  const auto held_in_kw = keyword_baseline(held_in, profanity, context.abbreviations);
  std::vector<metrics::EvalReport> fold_reports;
  for (const auto& fold : folds)
    fold_reports.push_back(score_predictions(pick(held_in, fold), pick(held_in_kw, fold)));
  result.keyword.cross_validation = metrics::mean_report(fold_reports);
  result.keyword.predictions = keyword_baseline(holdout, profanity, context.abbreviations);
  result.keyword.holdout = score_predictions(holdout, result.keyword.predictions);
  result.keyword.errors = metrics::category_error_rates(holdout, result.keyword.predictions);
  return result;
}

}  // namespace bullysig::experiment
