#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bullysig/experiment.hpp"
#include "bullysig/metrics.hpp"

namespace bullysig::report {

// Insertion-ordered JSON so that every file is byte-stable.
using Json = nlohmann::ordered_json;

Json to_json(const metrics::EvalReport& report);
Json to_json(const metrics::CategoryErrorReport& report);
Json to_json(const std::vector<metrics::CoarseErrorRow>& rows);
Json to_json(const linsvm::SvmConfig& config);
Json to_json(const experiment::TrialConfig& config);
Json to_json(const experiment::TrialResult& result);  // one trials.jsonl line

// Inverse of to_json(TrialConfig); throws ParseError on malformed input.
experiment::TrialConfig trial_config_from_json(const Json& j);

// ---------------------------------------------------------------------------
// Text tables. Scores are percentages with two decimals; "-" marks a missing
// value.

struct ScoreRow {
  std::string name;
  std::optional<metrics::EvalReport> cross_validation;
  std::optional<metrics::EvalReport> holdout;
};

// Two blocks of F1 P R Acc AUC (cross-validation, holdout) per row under a
// language heading, e.g. "EN".
std::string score_table(std::string_view language, std::string_view first_column, const std::vector<ScoreRow>& rows);

struct ErrorColumn {
  std::string name;
  std::vector<metrics::CoarseErrorRow> rows;
};

// Category | Nr. occurrences in holdout | one error-rate column per system.
// All columns must list the same categories.
std::string error_table(std::string_view language, const std::vector<ErrorColumn>& columns);

// Best feature combinations followed by the two baselines.
std::vector<ScoreRow> combined_rows(const experiment::ProtocolResult& result);
// One row per single feature group, named after the group.
std::vector<ScoreRow> single_group_rows(const experiment::ProtocolResult& result);
// Keyword baseline, n-gram baseline and the winner on the holdout posts.
std::vector<ErrorColumn> error_columns(const experiment::ProtocolResult& result, const std::vector<Post>& corpus);

// Writes the protocol outputs into `dir` (created if needed):
//   trials.jsonl            one TrialResult per line, enumeration order
//   winner.json             winning configuration and its mean CV scores
//   model.json, features.json   winner retrained on all held-in posts
//   holdout_predictions.jsonl   per holdout post: gold, scores, predictions
//   results.json            every reported number
//   report_combined.txt, report_single.txt, report_errors.txt
// Returns the written file names.
std::vector<std::string> write_protocol(const std::filesystem::path& dir, const experiment::ProtocolResult& result,
                                        const std::vector<Post>& corpus, Language lang);

// Writes `content` to `path` in binary mode; throws Error on I/O failure.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace bullysig::report
