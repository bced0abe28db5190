#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bullysig/corpus.hpp"
#include "bullysig/features.hpp"
#include "bullysig/linsvm.hpp"
#include "bullysig/metrics.hpp"

namespace bullysig::experiment {

struct TrialConfig {
  features::GroupSet groups;
  linsvm::SvmConfig svm;

  // "A + C | C=1 | squared_hinge | none"
  std::string label() const;
};

// The C values of the standard grid: 1e-3 ... 1e3 in decade steps.
const std::vector<double>& standard_c_values();

// 7 C values x {hinge, squared_hinge} x {none, balanced} with l2
// regularization = 28 configurations, ordered by C ascending, then loss
// (hinge first), then class weight (none first). Other fields come from
// `base`.
std::vector<linsvm::SvmConfig> standard_grid(const linsvm::SvmConfig& base = {});

// Full enumeration order: subset mask ascending, then grid order.
std::vector<TrialConfig> enumerate_trials(const std::vector<features::GroupSet>& subsets,
                                          const std::vector<linsvm::SvmConfig>& grid);

// Unoptimised word n-gram system: group A, C = 1, squared hinge, no weights.
TrialConfig ngram_baseline_config(std::uint64_t seed = 42);

struct TrialResult {
  std::size_t index = 0;  // position in the enumeration order
  TrialConfig config;
  std::vector<metrics::EvalReport> folds;
  metrics::EvalReport mean;  // arithmetic means over the folds
  std::vector<bool> converged;
  std::vector<int> epochs;
};

struct GridOptions {
  std::size_t folds = 10;
  std::uint64_t seed = 42;
  std::size_t workers = 1;
  std::vector<features::GroupSet> subsets = features::all_group_subsets();
  std::vector<linsvm::SvmConfig> grid = standard_grid();
  // Called after each finished (subset, fold) unit with (done, total).
  std::function<void(std::size_t, std::size_t)> progress;
};

// Fold assignment of the held-in posts: stratified_kfold with a sub-seed of
// `seed`.
std::vector<std::vector<std::size_t>> make_folds(const std::vector<Post>& held_in, std::size_t k,
                                                 std::uint64_t seed);

// Features of every post under `context`, computed in parallel.
std::vector<features::PostFeatures> extract_all(const std::vector<Post>& posts,
                                                const features::FeatureContext& context,
                                                std::size_t workers = 1);

// Cross-validated grid search over held-in data only. For every subset and
// fold the feature space is rebuilt from the fold's training part; all grid
// configurations are then trained on it and scored on the fold's validation
// part. Results come back in enumeration order regardless of worker count.
// Throws StratificationError when the folds cannot be formed and
// ResourceError when a subset needs an unavailable resource.
std::vector<TrialResult> run_grid(const std::vector<Post>& held_in,
                                  const std::vector<features::PostFeatures>& held_in_features,
                                  const GridOptions& options);
std::vector<TrialResult> run_grid(const std::vector<Post>& held_in, const features::FeatureContext& context,
                                  const GridOptions& options);

// Highest mean F1; ties go to the lowest enumeration index. Throws
// EmptyInputError on an empty list.
const TrialResult& select_winner(const std::vector<TrialResult>& results);

// Index of the best configuration per subset, subsets ranked by mean F1
// (ties: lower enumeration index first).
std::vector<std::size_t> best_per_subset(const std::vector<TrialResult>& results);

// A configuration retrained on all held-in data and scored on the holdout.
struct SystemResult {
  std::string name;
  TrialConfig config;
  features::FeatureSpace space;
  linsvm::LinearModel model;
  metrics::EvalReport holdout;
  std::vector<double> scores;
  std::vector<int> predictions;
  metrics::CategoryErrorReport errors;
};

SystemResult finalize(const std::vector<Post>& held_in,
                      const std::vector<features::PostFeatures>& held_in_features,
                      const std::vector<Post>& holdout,
                      const std::vector<features::PostFeatures>& holdout_features, const TrialConfig& config);
SystemResult finalize(const std::vector<Post>& held_in, const std::vector<Post>& holdout,
                      const TrialConfig& config, const features::FeatureContext& context);

// +1 iff any token of the pre-processed post is in `profanity`. Throws
// EmptyInputError for an empty post list or an empty word list.
std::vector<int> keyword_baseline(const std::vector<Post>& posts,
                                  const std::set<std::string, std::less<>>& profanity,
                                  const textprep::AbbreviationMap& abbreviations = {});

// Scores a keyword-baseline prediction (AUC from the binary scores).
metrics::EvalReport score_predictions(const std::vector<Post>& posts, const std::vector<int>& predictions);

SystemResult ngram_baseline(const std::vector<Post>& held_in, const std::vector<Post>& holdout,
                            const features::FeatureContext& context, std::uint64_t seed = 42);

// ---------------------------------------------------------------------------
// End-to-end protocol

struct ProtocolOptions {
  double holdout_fraction = 0.10;
  GridOptions grid;
  std::size_t top_systems = 3;
};

struct BaselineResult {
  std::string name;
  metrics::EvalReport cross_validation;
  metrics::EvalReport holdout;
  std::vector<int> predictions;
  metrics::CategoryErrorReport errors;
};

struct ProtocolResult {
  SplitIndices split;
  std::vector<TrialResult> trials;
  std::size_t winner = 0;                  // index into trials
  std::vector<SystemResult> top_systems;   // best subsets, winner first
  std::vector<std::size_t> top_trials;     // indices into trials
  std::vector<SystemResult> single_group_systems;
  std::vector<std::size_t> single_group_trials;
  BaselineResult ngram;
  SystemResult ngram_system;
  BaselineResult keyword;
};

// Holdout split, grid search on held-in, winner retraining, the two
// baselines and the per-subset summaries. The holdout posts are only read by
// the finalize and baseline-scoring steps. The keyword baseline needs
// context.term_lists for its profanity list (ResourceError otherwise).
ProtocolResult run_protocol(const std::vector<Post>& corpus, const features::FeatureContext& context,
                            const ProtocolOptions& options);

}  // namespace bullysig::experiment
