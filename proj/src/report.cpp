#include "bullysig/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "bullysig/error.hpp"
#include "bullysig/hexid.hpp"

namespace bullysig::report {

namespace {

std::string percent(std::optional<double> v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * *v);
  return buf;
}

std::string pad(std::string_view s, std::size_t width, bool right = false) {
  std::string out;
  if (right && s.size() < width) out.append(width - s.size(), ' ');
  out += s;
  if (!right && s.size() < width) out.append(width - s.size(), ' ');
  return out;
}

// Renders rows of cells with the first column left-aligned and every other
// column right-aligned; a rule follows the header rows.
std::vector<std::size_t> column_widths(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  return widths;
}

std::string render(const std::vector<std::vector<std::string>>& rows, std::size_t header_rows) {
  const auto widths = column_widths(rows);
  std::size_t total = 0;
  for (const auto w : widths) total += w + 2;
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c > 0) line += "  ";
      line += pad(rows[r][c], widths[c], c > 0);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
    if (r + 1 == header_rows) out += std::string(total - 2, '-') + "\n";
  }
  return out;
}

std::vector<std::string> score_cells(const std::optional<metrics::EvalReport>& r) {
  if (!r) return {"-", "-", "-", "-", "-"};
  return {percent(r->f1), percent(r->precision), percent(r->recall), percent(r->accuracy), percent(r->auc)};
}

std::string_view single_group_name(features::FeatureGroup g) {
  switch (g) {
    case features::FeatureGroup::kWordNgrams: return "word n-grams";
    case features::FeatureGroup::kSubjectivity: return "subjectivity lexicons";
    case features::FeatureGroup::kCharNgrams: return "character n-grams";
    case features::FeatureGroup::kTermLists: return "term lists";
    case features::FeatureGroup::kTopicModels: return "topic models";
  }
  return "?";
}

const Json& member(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(0, std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

Json to_json(const metrics::EvalReport& r) {
  Json j;
  j["f1"] = r.f1;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["accuracy"] = r.accuracy;
  j["auc"] = r.auc ? Json(*r.auc) : Json(nullptr);
  j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn}};
  return j;
}

Json to_json(const metrics::CategoryErrorReport& r) {
  Json j = Json::object();
  for (const auto& [category, rate] : r.categories)
    j[std::string(to_string(category))] = {{"n", rate.occurrences}, {"errors", rate.errors}, {"rate", rate.rate()}};
  j["not_cyberbullying"] = {{"n", r.not_cyberbullying.occurrences},
                            {"errors", r.not_cyberbullying.errors},
                            {"rate", r.not_cyberbullying.rate()}};
  return j;
}

Json to_json(const std::vector<metrics::CoarseErrorRow>& rows) {
  Json j = Json::array();
  for (const auto& row : rows)
    j.push_back({{"category", row.name},
                 {"n", row.rate.occurrences},
                 {"errors", row.rate.errors},
                 {"rate", row.rate.rate()}});
  return j;
}

Json to_json(const linsvm::SvmConfig& c) {
  Json j;
  j["C"] = c.C;
  j["loss"] = std::string(linsvm::to_string(c.loss));
  j["class_weight"] = std::string(linsvm::to_string(c.class_weight));
  j["tolerance"] = c.tolerance;
  j["max_epochs"] = c.max_epochs;
  j["seed"] = c.seed;
  j["fit_bias"] = c.fit_bias;
  return j;
}

Json to_json(const experiment::TrialConfig& c) {
  Json j;
  j["groups"] = c.groups.label();
  j["svm"] = to_json(c.svm);
  return j;
}

Json to_json(const experiment::TrialResult& r) {
  Json j;
  j["index"] = r.index;
  j["label"] = r.config.label();
  j["config"] = to_json(r.config);
  j["mean"] = to_json(r.mean);
  Json folds = Json::array();
  for (std::size_t f = 0; f < r.folds.size(); ++f) {
    Json fold = to_json(r.folds[f]);
    fold["converged"] = static_cast<bool>(r.converged[f]);
    fold["epochs"] = r.epochs[f];
    folds.push_back(std::move(fold));
  }
  j["folds"] = std::move(folds);
  return j;
}

experiment::TrialConfig trial_config_from_json(const Json& j) {
  try {
    experiment::TrialConfig c;
    c.groups = features::GroupSet::parse(member(j, "groups").get<std::string>());
    const Json& s = member(j, "svm");
    c.svm.C = member(s, "C").get<double>();
    const auto loss = linsvm::parse_loss(member(s, "loss").get<std::string>());
    const auto weight = linsvm::parse_class_weight(member(s, "class_weight").get<std::string>());
    if (!loss) throw ParseError(0, "unknown loss '" + member(s, "loss").get<std::string>() + "'");
    if (!weight) throw ParseError(0, "unknown class weight '" + member(s, "class_weight").get<std::string>() + "'");
    c.svm.loss = *loss;
    c.svm.class_weight = *weight;
    c.svm.tolerance = member(s, "tolerance").get<double>();
    c.svm.max_epochs = member(s, "max_epochs").get<int>();
    c.svm.seed = member(s, "seed").get<std::uint64_t>();
    c.svm.fit_bias = member(s, "fit_bias").get<bool>();
    c.svm.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("trial configuration: ") + e.what());
  }
}

std::string score_table(std::string_view language, std::string_view first_column, const std::vector<ScoreRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"", std::string(first_column), "F1", "P", "R", "Acc", "AUC", "F1", "P", "R", "Acc", "AUC"});
  cells.push_back({std::string(language)});
  for (const auto& row : rows) {
    std::vector<std::string> line = {"", row.name};
    for (auto& c : score_cells(row.cross_validation)) line.push_back(std::move(c));
    for (auto& c : score_cells(row.holdout)) line.push_back(std::move(c));
    cells.push_back(std::move(line));
  }
  // Block titles start at the left edge of each block's first column.
  const auto widths = column_widths(cells);
  const auto offset = [&](std::size_t column) {
    std::size_t at = 0;
    for (std::size_t c = 0; c < column; ++c) at += widths[c] + 2;
    return at;
  };
  std::string title(offset(2), ' ');
  title += "Cross-validation scores";
  title += std::string(offset(7) > title.size() ? offset(7) - title.size() : 2, ' ');
  title += "Holdout scores";
  return title + "\n" + render(cells, 1);
}

std::string error_table(std::string_view language, const std::vector<ErrorColumn>& columns) {
  if (columns.empty()) throw ArgumentError("error table: no systems");
  const auto& reference = columns.front().rows;
  for (const auto& column : columns) {
    if (column.rows.size() != reference.size()) throw ArgumentError("error table: columns list different categories");
    for (std::size_t r = 0; r < reference.size(); ++r)
      if (column.rows[r].name != reference[r].name || column.rows[r].rate.occurrences != reference[r].rate.occurrences)
        throw ArgumentError("error table: columns list different categories");
  }
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header = {"", "Category", "Nr. occurrences in holdout"};
  for (const auto& column : columns) header.push_back(column.name);
  cells.push_back(std::move(header));
  cells.push_back({std::string(language)});
  for (std::size_t r = 0; r < reference.size(); ++r) {
    std::vector<std::string> line = {"", reference[r].name, "n=" + std::to_string(reference[r].rate.occurrences)};
    for (const auto& column : columns)
      line.push_back(column.rows[r].rate.occurrences == 0 ? "-" : percent(column.rows[r].rate.rate()));
    cells.push_back(std::move(line));
  }
  return render(cells, 1);
}

std::vector<ScoreRow> combined_rows(const experiment::ProtocolResult& result) {
  std::vector<ScoreRow> rows;
  for (std::size_t i = 0; i < result.top_systems.size(); ++i)
    rows.push_back({result.top_systems[i].name, result.trials[result.top_trials[i]].mean, result.top_systems[i].holdout});
  rows.push_back({"word n-gram baseline", result.ngram.cross_validation, result.ngram.holdout});
  rows.push_back({"profanity baseline", result.keyword.cross_validation, result.keyword.holdout});
  return rows;
}

std::vector<ScoreRow> single_group_rows(const experiment::ProtocolResult& result) {
  std::vector<ScoreRow> rows;
  for (std::size_t i = 0; i < result.single_group_systems.size(); ++i) {
    const auto& system = result.single_group_systems[i];
    rows.push_back({std::string(single_group_name(system.config.groups.groups().front())),
                    result.trials[result.single_group_trials[i]].mean, system.holdout});
  }
  return rows;
}

std::vector<ErrorColumn> error_columns(const experiment::ProtocolResult& result, const std::vector<Post>& corpus) {
  std::vector<Post> holdout;
  holdout.reserve(result.split.holdout.size());
  for (const auto i : result.split.holdout) holdout.push_back(corpus.at(i));
  return {
      {"Profanity baseline", metrics::coarse_error_rates(holdout, result.keyword.predictions)},
      {"Word n-gram baseline", metrics::coarse_error_rates(holdout, result.ngram.predictions)},
      {"Best system", metrics::coarse_error_rates(holdout, result.top_systems.front().predictions)},
  };
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

std::vector<std::string> write_protocol(const std::filesystem::path& dir, const experiment::ProtocolResult& result,
                                        const std::vector<Post>& corpus, Language lang) {
  if (result.top_systems.empty()) throw ArgumentError("write_protocol: no finalized system");
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  const auto emit = [&](const std::string& name, std::string_view content) {
    write_file(dir / name, content);
    written.push_back(name);
  };

  std::string lines;
  for (const auto& trial : result.trials) lines += to_json(trial).dump() + "\n";
  emit("trials.jsonl", lines);

  const auto& winner = result.trials[result.winner];
  const auto& best = result.top_systems.front();
  Json winner_json;
  winner_json["index"] = winner.index;
  winner_json["label"] = winner.config.label();
  winner_json["config"] = to_json(winner.config);
  winner_json["cross_validation"] = to_json(winner.mean);
  emit("winner.json", winner_json.dump(2) + "\n");
  emit("model.json", best.model.to_json() + "\n");
  emit("features.json", best.space.to_json() + "\n");

  lines.clear();
  for (std::size_t h = 0; h < result.split.holdout.size(); ++h) {
    const Post& post = corpus.at(result.split.holdout[h]);
    Json j;
    j["id"] = post.id;
    j["gold"] = post.label ? 1 : -1;
    j["score"] = best.scores[h];
    j["prediction"] = best.predictions[h];
    j["ngram_prediction"] = result.ngram.predictions[h];
    j["keyword_prediction"] = result.keyword.predictions[h];
    lines += j.dump() + "\n";
  }
  emit("holdout_predictions.jsonl", lines);

  const std::string language = lang == Language::kDutch ? "NL" : "EN";
  const auto combined = combined_rows(result);
  const auto single = single_group_rows(result);
  const auto errors = error_columns(result, corpus);

  Json results;
  results["language"] = std::string(to_string(lang));
  results["n_trials"] = result.trials.size();
  results["held_in"] = result.split.held_in.size();
  results["holdout"] = result.split.holdout.size();
  results["winner"] = winner_json;
  const auto rows_json = [](const std::vector<ScoreRow>& rows) {
    Json a = Json::array();
    for (const auto& row : rows)
      a.push_back({{"name", row.name},
                   {"cross_validation", row.cross_validation ? to_json(*row.cross_validation) : Json(nullptr)},
                   {"holdout", row.holdout ? to_json(*row.holdout) : Json(nullptr)}});
    return a;
  };
  results["combined"] = rows_json(combined);
  results["single_group"] = rows_json(single);
  Json error_json = Json::object();
  for (const auto& column : errors) error_json[column.name] = to_json(column.rows);
  results["error_rates"] = std::move(error_json);
  results["fine_grained_error_rates"] = {{"profanity_baseline", to_json(result.keyword.errors)},
                                         {"word_ngram_baseline", to_json(result.ngram.errors)},
                                         {"best_system", to_json(best.errors)}};
  emit("results.json", results.dump(2) + "\n");

  emit("report_combined.txt", score_table(language, "Feature combination", combined));
  emit("report_single.txt", score_table(language, "Feature type", single));
  emit("report_errors.txt", error_table(language, errors));
  return written;
}

}  // namespace bullysig::report
