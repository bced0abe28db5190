#include "bullysig/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "bullysig/corpus.hpp"
#include "bullysig/error.hpp"
#include "bullysig/experiment.hpp"
#include "bullysig/hexid.hpp"
#include "bullysig/random.hpp"
#include "bullysig/report.hpp"
#include "bullysig/synth.hpp"
#include "bullysig/topics.hpp"

#ifndef BULLYSIG_VERSION
#define BULLYSIG_VERSION "0.0.0"
#endif

namespace bullysig::cli {

namespace {

namespace fs = std::filesystem;
using report::Json;

// A bad flag value detected after parsing; reported like a CLI11 error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string corpus;
  std::string background;
  std::string topics;
  std::string lexicons;
  std::string terms;
  std::string abbrev;
  std::string out;
  std::string config;
  std::string lang = "en";
  std::string winner;
  std::string model;
  std::string features;
  std::string ratings;
  std::string expect_lang;  // validate only
  std::optional<std::uint64_t> seed;
  std::size_t folds = 10;
  double holdout = 0.10;
  std::size_t workers = 1;
  std::vector<std::string> subsets;
  std::vector<std::size_t> ks = {20, 50, 100, 200};
  std::vector<std::string> methods = {"lda", "lsi"};
  int lda_iterations = 500;
  std::size_t posts = 2000;
  double positive_ratio = 0.05;
  double noise = 0.35;
  std::size_t background_docs = 0;
  // Grid overrides (config file only).
  std::vector<double> c_values;
  std::vector<std::string> losses;
  std::vector<std::string> class_weights;
  std::optional<double> tolerance;
  std::optional<int> max_epochs;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ResourceError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Language language(const Options& o) {
  const auto lang = parse_language(o.lang);
  if (!lang) throw UsageError("--lang must be 'en' or 'nl', got '" + o.lang + "'");
  return *lang;
}

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("BULLYSIG_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0' || env[0] == '-') throw UsageError(std::string("BULLYSIG_SEED is not a number: '") + env + "'");
    return v;
  }
  return 42;
}

// Values from the --config JSON file fill every option not given on the
// command line.
void apply_config(Options& o, const CLI::App& cmd) {
  if (o.config.empty()) return;
  Json j;
  try {
    j = Json::parse(read_file(o.config));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, o.config + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(0, o.config + ": the configuration must be a JSON object");
  const auto given = [&](const std::string& flag) { return cmd.count("--" + flag) > 0; };
  static const std::set<std::string> known = {"corpus", "background", "topics", "lexicons", "terms", "abbrev",
                                              "out", "lang", "seed", "folds", "holdout", "workers", "subsets",
                                              "ks", "methods", "lda_iterations", "grid"};
  try {
    for (const auto& [key, value] : j.items()) {
      if (!known.contains(key)) throw ParseError(0, o.config + ": unknown key '" + key + "'");
    }
    const auto str = [&](const char* key, const char* flag, std::string& target) {
      if (j.contains(key) && !given(flag)) target = j.at(key).get<std::string>();
    };
    str("corpus", "corpus", o.corpus);
    str("background", "background", o.background);
    str("topics", "topics", o.topics);
    str("lexicons", "lexicons", o.lexicons);
    str("terms", "terms", o.terms);
    str("abbrev", "abbrev", o.abbrev);
    str("out", "out", o.out);
    str("lang", "lang", o.lang);
    if (j.contains("seed") && !given("seed")) o.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("folds") && !given("folds")) o.folds = j.at("folds").get<std::size_t>();
    if (j.contains("holdout") && !given("holdout")) o.holdout = j.at("holdout").get<double>();
    if (j.contains("workers") && !given("workers")) o.workers = j.at("workers").get<std::size_t>();
    if (j.contains("subsets") && !given("subsets")) o.subsets = j.at("subsets").get<std::vector<std::string>>();
    if (j.contains("ks") && !given("ks")) o.ks = j.at("ks").get<std::vector<std::size_t>>();
    if (j.contains("methods") && !given("methods")) o.methods = j.at("methods").get<std::vector<std::string>>();
    if (j.contains("lda_iterations") && !given("lda-iterations")) o.lda_iterations = j.at("lda_iterations").get<int>();
    if (j.contains("grid")) {
      const Json& g = j.at("grid");
      for (const auto& [key, value] : g.items()) {
        if (key == "C") o.c_values = value.get<std::vector<double>>();
        else if (key == "loss") o.losses = value.get<std::vector<std::string>>();
        else if (key == "class_weight") o.class_weights = value.get<std::vector<std::string>>();
        else if (key == "tolerance") o.tolerance = value.get<double>();
        else if (key == "max_epochs") o.max_epochs = value.get<int>();
        else throw ParseError(0, o.config + ": unknown grid key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, o.config + ": " + e.what());
  }
}

void require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required");
}

std::vector<Post> read_corpus(const Options& o) {
  require(o.corpus, "--corpus");
  return load_corpus(o.corpus);
}

textprep::AbbreviationMap read_abbrev(const Options& o) {
  return o.abbrev.empty() ? textprep::AbbreviationMap{} : textprep::load_abbreviations(o.abbrev);
}

topics::TopicTrainingOptions topic_options(const Options& o, std::uint64_t seed) {
  topics::TopicTrainingOptions t;
  if (o.ks.empty()) throw UsageError("--ks needs at least one value");
  t.ks = o.ks;
  t.methods.clear();
  for (const auto& m : o.methods) {
    const auto method = topics::parse_method(m);
    if (!method) throw UsageError("unknown topic method '" + m + "' (expected lda or lsi)");
    t.methods.push_back(*method);
  }
  t.lda_iterations = o.lda_iterations;
  t.workers = o.workers;
  t.seed = derive_seed(seed, "topics");
  return t;
}

features::FeatureContext load_context(const Options& o, std::uint64_t seed) {
  features::FeatureContext ctx;
  ctx.lang = language(o);
  ctx.seed = derive_seed(seed, "topic-inference");
  ctx.abbreviations = read_abbrev(o);
  if (!o.lexicons.empty()) ctx.lexicon = features::SubjectivityLexicon::load(o.lexicons);
  if (!o.terms.empty()) ctx.term_lists = features::TermListSet::load(o.terms);
  if (!o.topics.empty()) {
    ctx.topic_models = std::make_shared<topics::TopicModelSet>(topics::TopicModelSet::load(o.topics));
  } else if (!o.background.empty()) {
    ctx.topic_models = std::make_shared<topics::TopicModelSet>(topics::TopicModelSet::train(
        topics::load_background(o.background), ctx.lang, topic_options(o, seed), ctx.abbreviations));
  }
  return ctx;
}

std::vector<features::GroupSet> parse_subsets(const std::vector<std::string>& texts) {
  if (texts.empty()) return features::all_group_subsets();
  std::vector<features::GroupSet> out;
  for (const auto& t : texts) {
    try {
      out.push_back(features::GroupSet::parse(t));
    } catch (const ArgumentError& e) {
      throw UsageError(std::string("--subsets: ") + e.what());
    }
  }
  return out;
}

std::vector<linsvm::SvmConfig> build_grid(const Options& o, std::uint64_t seed) {
  linsvm::SvmConfig base;
  base.seed = derive_seed(seed, "svm");
  if (o.tolerance) base.tolerance = *o.tolerance;
  if (o.max_epochs) base.max_epochs = *o.max_epochs;
  base.validate();
  const auto cs = o.c_values.empty() ? experiment::standard_c_values() : o.c_values;
  std::vector<linsvm::Loss> losses = {linsvm::Loss::kHinge, linsvm::Loss::kSquaredHinge};
  std::vector<linsvm::ClassWeight> weights = {linsvm::ClassWeight::kNone, linsvm::ClassWeight::kBalanced};
  if (!o.losses.empty()) {
    losses.clear();
    for (const auto& l : o.losses) {
      const auto v = linsvm::parse_loss(l);
      if (!v) throw ParseError(0, "grid: unknown loss '" + l + "'");
      losses.push_back(*v);
    }
  }
  if (!o.class_weights.empty()) {
    weights.clear();
    for (const auto& w : o.class_weights) {
      const auto v = linsvm::parse_class_weight(w);
      if (!v) throw ParseError(0, "grid: unknown class weight '" + w + "'");
      weights.push_back(*v);
    }
  }
  std::vector<linsvm::SvmConfig> grid;
  for (const double c : cs)
    for (const auto loss : losses)
      for (const auto weight : weights) {
        auto cfg = base;
        cfg.C = c;
        cfg.loss = loss;
        cfg.class_weight = weight;
        cfg.validate();
        grid.push_back(cfg);
      }
  return grid;
}

void check_split_options(const Options& o) {
  if (!(o.holdout > 0.0 && o.holdout < 1.0)) throw UsageError("--holdout must lie strictly between 0 and 1");
  if (o.folds < 2) throw UsageError("--folds must be at least 2");
  if (o.workers < 1) throw UsageError("--workers must be at least 1");
}

experiment::ProtocolOptions protocol_options(const Options& o, std::uint64_t seed) {
  check_split_options(o);
  experiment::ProtocolOptions p;
  p.holdout_fraction = o.holdout;
  p.grid.folds = o.folds;
  p.grid.seed = seed;
  p.grid.workers = o.workers;
  p.grid.subsets = parse_subsets(o.subsets);
  p.grid.grid = build_grid(o, seed);
  return p;
}

SplitIndices split_of(const std::vector<Post>& corpus, const Options& o, std::uint64_t seed) {
  check_split_options(o);
  return holdout_split_indices(corpus.size(), o.holdout, derive_seed(seed, "holdout"));
}

std::vector<Post> pick(const std::vector<Post>& posts, const std::vector<std::size_t>& indices) {
  std::vector<Post> out;
  out.reserve(indices.size());
  for (const auto i : indices) out.push_back(posts[i]);
  return out;
}

std::string corpus_text(const std::vector<Post>& posts) {
  std::ostringstream ss;
  write_corpus(ss, posts);
  return ss.str();
}

// manifest.json: tool version, command, effective seed and options, and the
// FNV-1a hash of every input file, enough to rerun the command exactly.
void write_manifest(const fs::path& dir, const std::string& command, std::uint64_t seed, const Json& options,
                    const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
  Json m;
  m["tool"] = "bullysig";
  m["version"] = BULLYSIG_VERSION;
  m["command"] = command;
  m["seed"] = seed;
  m["options"] = options;
  Json in = Json::array();
  for (const auto& path : inputs) {
    if (path.empty()) continue;
    Json entry;
    entry["path"] = path;
    if (fs::is_directory(path)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(path))
        if (e.is_regular_file()) files.push_back(e.path());
      std::sort(files.begin(), files.end());
      Json listing = Json::array();
      for (const auto& f : files) {
        const std::string bytes = read_file(f.string());
        listing.push_back({{"file", f.filename().string()}, {"bytes", bytes.size()}, {"fnv1a64", to_hex(fnv1a(bytes))}});
      }
      entry["files"] = std::move(listing);
    } else {
      const std::string bytes = read_file(path);
      entry["bytes"] = bytes.size();
      entry["fnv1a64"] = to_hex(fnv1a(bytes));
    }
    in.push_back(std::move(entry));
  }
  m["inputs"] = std::move(in);
  m["outputs"] = outputs;
  report::write_file(dir / "manifest.json", m.dump(2) + "\n");
}

Json common_options(const Options& o) {
  Json j;
  j["lang"] = o.lang;
  j["folds"] = o.folds;
  j["holdout"] = o.holdout;
  j["workers"] = o.workers;
  return j;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
  return buf;
}

void print_report(std::ostream& out, const std::string& name, const metrics::EvalReport& r) {
  char auc[32] = "-";
  if (r.auc) std::snprintf(auc, sizeof auc, "%.2f", 100.0 * *r.auc);
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s: F1=%.2f P=%.2f R=%.2f Acc=%.2f AUC=%s\n", name.c_str(), 100.0 * r.f1,
                100.0 * r.precision, 100.0 * r.recall, 100.0 * r.accuracy, auc);
  out << buf;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
  require(o.corpus, "--corpus");
  std::optional<Language> lang;
  if (!o.expect_lang.empty()) {
    lang = parse_language(o.expect_lang);
    if (!lang) throw UsageError("--lang must be 'en' or 'nl', got '" + o.expect_lang + "'");
  }
  std::vector<Post> posts;
  try {
    posts = load_corpus(o.corpus, lang);
  } catch (const Error& e) {
    err << "error: " << o.corpus << ": " << e.what() << "\n";
    return kExitFailure;
  }
  const auto warnings = validate_labels(posts);
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  const auto stats = corpus_stats(posts);
  out << "ok: " << stats.n_posts << " posts, " << stats.n_positive << " positive, " << warnings.size()
      << " label warnings\n";
  return kExitOk;
}

int cmd_stats(const Options& o, std::ostream& out) {
  const auto stats = corpus_stats(read_corpus(o));
  out << "n=" << stats.n_posts << ", positives=" << stats.n_positive << " (" << percent(stats.positive_ratio) << ")\n";
  for (const auto c : kAllCategories) {
    const auto it = stats.per_category_counts.find(c);
    if (it != stats.per_category_counts.end()) out << "  " << to_string(c) << ": " << it->second << "\n";
  }
  return kExitOk;
}

int cmd_split(const Options& o, std::ostream& out) {
  require(o.out, "--out");
  const auto seed = resolve_seed(o);
  const auto corpus = read_corpus(o);
  const auto split = split_of(corpus, o, seed);
  fs::create_directories(o.out);
  report::write_file(fs::path(o.out) / "held_in.jsonl", corpus_text(pick(corpus, split.held_in)));
  report::write_file(fs::path(o.out) / "holdout.jsonl", corpus_text(pick(corpus, split.holdout)));
  write_manifest(o.out, "split", seed, common_options(o), {o.corpus}, {"held_in.jsonl", "holdout.jsonl"});
  out << "held-in: " << split.held_in.size() << " posts, holdout: " << split.holdout.size() << " posts\n";
  return kExitOk;
}

int cmd_train_topics(const Options& o, std::ostream& out) {
  require(o.background, "--background");
  require(o.out, "--out");
  const auto seed = resolve_seed(o);
  const auto background = topics::load_background(o.background);
  const auto model_set =
      topics::TopicModelSet::train(background, language(o), topic_options(o, seed), read_abbrev(o));
  fs::create_directories(o.out);
  model_set.save((fs::path(o.out) / "topics.json").string());
  Json options = common_options(o);
  options["ks"] = o.ks;
  options["methods"] = o.methods;
  options["lda_iterations"] = o.lda_iterations;
  write_manifest(o.out, "train-topics", seed, options, {o.background, o.abbrev}, {"topics.json"});
  out << "trained " << model_set.entries().size() << " topic models, " << model_set.dimension()
      << " feature slots\n";
  return kExitOk;
}

int cmd_gridsearch(const Options& o, std::ostream& out, std::ostream& err) {
  require(o.out, "--out");
  const auto seed = resolve_seed(o);
  const auto corpus = read_corpus(o);
  const auto ctx = load_context(o, seed);
  auto options = protocol_options(o, seed);
  options.grid.progress = [&err](std::size_t done, std::size_t total) {
    if (done == total || done % 10 == 0) err << "grid: " << done << "/" << total << " units\n";
  };
  const auto result = experiment::run_protocol(corpus, ctx, options);
  auto written = report::write_protocol(o.out, result, corpus, ctx.lang);
  Json opts = common_options(o);
  Json subsets = Json::array();
  for (const auto g : options.grid.subsets) subsets.push_back(g.label());
  opts["subsets"] = std::move(subsets);
  opts["grid_size"] = options.grid.grid.size();
  if (ctx.topic_models) {
    opts["ks"] = o.ks;
    opts["methods"] = o.methods;
  }
  write_manifest(o.out, "gridsearch", seed, opts, {o.corpus, o.lexicons, o.terms, o.abbrev, o.topics, o.background},
                 written);
  std::size_t unconverged = 0;
  for (const auto& t : result.trials)
    for (const bool c : t.converged) unconverged += c ? 0 : 1;
  if (unconverged > 0) err << "warning: " << unconverged << " fold trainings stopped at the epoch limit\n";
  out << result.trials.size() << " trials; winner: " << result.trials[result.winner].config.label() << "\n";
  print_report(out, "winner (cross-validation)", result.trials[result.winner].mean);
  print_report(out, "winner (holdout)", result.top_systems.front().holdout);
  print_report(out, "word n-gram baseline (holdout)", result.ngram.holdout);
  print_report(out, "profanity baseline (holdout)", result.keyword.holdout);
  return kExitOk;
}

int cmd_finalize(const Options& o, std::ostream& out) {
  require(o.out, "--out");
  require(o.winner, "--winner");
  const auto seed = resolve_seed(o);
  Json winner;
  try {
    winner = Json::parse(read_file(o.winner));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, o.winner + ": " + e.what());
  }
  const auto config = report::trial_config_from_json(winner.contains("config") ? winner.at("config") : winner);
  const auto corpus = read_corpus(o);
  const auto ctx = load_context(o, seed);
  const auto split = split_of(corpus, o, seed);
  const auto holdout = pick(corpus, split.holdout);
  const auto system = experiment::finalize(pick(corpus, split.held_in), holdout, config, ctx);

  const fs::path dir(o.out);
  fs::create_directories(dir);
  report::write_file(dir / "model.json", system.model.to_json() + "\n");
  report::write_file(dir / "features.json", system.space.to_json() + "\n");
  Json result;
  result["config"] = report::to_json(config);
  result["label"] = config.label();
  result["dimension"] = system.model.w.size();
  result["holdout"] = report::to_json(system.holdout);
  result["error_rates"] = report::to_json(metrics::coarse_error_rates(holdout, system.predictions));
  result["fine_grained_error_rates"] = report::to_json(system.errors);
  report::write_file(dir / "holdout.json", result.dump(2) + "\n");
  write_manifest(dir, "finalize", seed, common_options(o),
                 {o.corpus, o.winner, o.lexicons, o.terms, o.abbrev, o.topics, o.background},
                 {"model.json", "features.json", "holdout.json"});
  out << config.label() << ": dimension " << system.model.w.size() << " (" << system.space.dimension()
      << " features + bias)\n";
  print_report(out, "holdout", system.holdout);
  return kExitOk;
}

int cmd_predict(const Options& o, std::ostream& out) {
  require(o.model, "--model");
  require(o.features, "--features");
  require(o.out, "--out");
  const auto seed = resolve_seed(o);
  const auto model = linsvm::LinearModel::load(o.model);
  const auto space = features::FeatureSpace::from_json(read_file(o.features));
  if (model.feature_fingerprint != space.fingerprint() || model.dimension != space.dimension())
    throw IntegrityError("model '" + o.model + "' was not trained on feature space '" + o.features + "'");
  const auto posts = read_corpus(o);
  const auto ctx = load_context(o, seed);
  ctx.require(space.groups());
  std::string lines;
  std::vector<double> scores;
  std::vector<int> gold;
  for (const auto& post : posts) {
    const double s = linsvm::decision(model, features::vectorize(post, space, ctx));
    scores.push_back(s);
    gold.push_back(post.label ? 1 : -1);
    Json j;
    j["id"] = post.id;
    j["score"] = s;
    j["prediction"] = s > 0.0 ? 1 : -1;
    lines += j.dump() + "\n";
  }
  fs::create_directories(o.out);
  report::write_file(fs::path(o.out) / "predictions.jsonl", lines);
  write_manifest(o.out, "predict", seed, common_options(o),
                 {o.model, o.features, o.corpus, o.lexicons, o.terms, o.abbrev, o.topics, o.background},
                 {"predictions.jsonl"});
  out << "predicted " << posts.size() << " posts\n";
  if (!posts.empty()) print_report(out, "against corpus labels", metrics::evaluate(gold, scores));
  return kExitOk;
}

int cmd_baseline(const Options& o, std::ostream& out) {
  require(o.out, "--out");
  require(o.terms, "--terms");
  const auto seed = resolve_seed(o);
  const auto corpus = read_corpus(o);
  const auto ctx = load_context(o, seed);
  auto options = protocol_options(o, seed);
  const auto ngram = experiment::ngram_baseline_config(derive_seed(seed, "svm"));
  options.grid.subsets = {ngram.groups};
  options.grid.grid = {ngram.svm};
  const auto result = experiment::run_protocol(corpus, ctx, options);
  const std::string language_label = ctx.lang == Language::kDutch ? "NL" : "EN";
  std::vector<report::ScoreRow> rows = {
      {"word n-gram baseline", result.ngram.cross_validation, result.ngram.holdout},
      {"profanity baseline", result.keyword.cross_validation, result.keyword.holdout},
  };
  const fs::path dir(o.out);
  fs::create_directories(dir);
  Json j;
  j["word_ngram_baseline"] = {{"cross_validation", report::to_json(result.ngram.cross_validation)},
                              {"holdout", report::to_json(result.ngram.holdout)}};
  j["profanity_baseline"] = {{"cross_validation", report::to_json(result.keyword.cross_validation)},
                             {"holdout", report::to_json(result.keyword.holdout)}};
  report::write_file(dir / "baselines.json", j.dump(2) + "\n");
  report::write_file(dir / "report_baselines.txt", report::score_table(language_label, "System", rows));
  write_manifest(dir, "baseline", seed, common_options(o), {o.corpus, o.terms, o.abbrev},
                 {"baselines.json", "report_baselines.txt"});
  print_report(out, "word n-gram baseline (holdout)", result.ngram.holdout);
  print_report(out, "profanity baseline (holdout)", result.keyword.holdout);
  return kExitOk;
}

// Ratings file: one item per line, one tab-separated label per rater; blank
// lines and '#' lines are skipped.
int cmd_agreement(const Options& o, std::ostream& out) {
  require(o.ratings, "--ratings");
  std::istringstream in(read_file(o.ratings));
  std::vector<std::vector<std::string>> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> labels;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      labels.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (!items.empty() && labels.size() != items.front().size())
      throw ParseError(line_no, "expected " + std::to_string(items.front().size()) + " ratings, found " +
                                    std::to_string(labels.size()));
    if (labels.size() < 2) throw ParseError(line_no, "at least two raters are required");
    items.push_back(std::move(labels));
  }
  if (items.empty()) throw EmptyInputError(o.ratings + ": no ratings");
  const std::size_t raters = items.front().size();
  std::map<std::string, std::size_t> categories;
  for (const auto& item : items)
    for (const auto& label : item) categories.emplace(label, 0);
  std::size_t next = 0;
  for (auto& [label, index] : categories) index = next++;

  char buf[128];
  out << "items=" << items.size() << " raters=" << raters << " categories=" << categories.size() << "\n";
  if (raters == 2) {
    std::vector<std::string> a, b;
    for (const auto& item : items) {
      a.push_back(item[0]);
      b.push_back(item[1]);
    }
    std::snprintf(buf, sizeof buf, "cohen_kappa=%.4f\n", metrics::cohen_kappa(a, b));
    out << buf;
  }
  std::vector<std::vector<std::size_t>> counts;
  for (const auto& item : items) {
    std::vector<std::size_t> row(categories.size(), 0);
    for (const auto& label : item) ++row[categories.at(label)];
    counts.push_back(std::move(row));
  }
  std::snprintf(buf, sizeof buf, "fleiss_kappa=%.4f\n", metrics::fleiss_kappa(counts));
  out << buf;
  return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
  if (!(o.positive_ratio > 0.0 && o.positive_ratio < 1.0))
    throw UsageError("--positive-ratio must lie strictly between 0 and 1");
  if (o.posts == 0) throw UsageError("--posts must be positive");
  if (!(o.noise >= 0.0 && o.noise <= 1.0)) throw UsageError("--noise must lie in [0, 1]");
  const auto seed = resolve_seed(o);
  synth::SynthOptions s;
  s.posts = o.posts;
  s.positive_ratio = o.positive_ratio;
  s.seed = seed;
  s.lang = language(o);
  s.noise = o.noise;
  const std::string corpus = corpus_text(synth::synth_corpus(s));
  if (o.out.empty()) {
    out << corpus;
    return kExitOk;
  }
  const fs::path dir(o.out);
  fs::create_directories(dir);
  report::write_file(dir / "corpus.jsonl", corpus);
  std::vector<std::string> outputs = {"corpus.jsonl"};
  if (o.background_docs > 0) {
    std::string lines;
    for (const auto& doc : synth::synth_background(s.lang, o.background_docs, seed)) {
      Json j;
      j["category"] = std::string(to_string(doc.category));
      j["text"] = doc.text;
      lines += j.dump() + "\n";
    }
    report::write_file(dir / "background.jsonl", lines);
    outputs.push_back("background.jsonl");
  }
  Json options;
  options["lang"] = o.lang;
  options["posts"] = o.posts;
  options["positive_ratio"] = o.positive_ratio;
  options["noise"] = o.noise;
  options["background_docs"] = o.background_docs;
  write_manifest(dir, "synth", seed, options, {}, outputs);
  out << "wrote " << o.posts << " posts to " << (dir / "corpus.jsonl").string() << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Detection of cyberbullying signals in social media posts", "bullysig"};
  app.set_version_flag("--version", std::string(BULLYSIG_VERSION));
  app.require_subcommand(1, 1);

  const auto add_seed = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "Seed for every stochastic step (default: $BULLYSIG_SEED or 42)");
  };
  const auto add_lang = [&](CLI::App* c) { c->add_option("--lang", o.lang, "Corpus language: en or nl")->capture_default_str(); };
  const auto add_resources = [&](CLI::App* c) {
    c->add_option("--lexicons", o.lexicons, "Directory with polarity*.tsv and categories.tsv (group B)");
    c->add_option("--terms", o.terms, "Directory with the six term lists (group D, profanity baseline)");
    c->add_option("--abbrev", o.abbrev, "Abbreviation file (abbrev<TAB>expansion)");
    c->add_option("--topics", o.topics, "Topic model file written by train-topics (group E)");
    c->add_option("--background", o.background, "Background corpus; topic models are trained on the fly (group E)");
    c->add_option("--ks", o.ks, "Topic counts when training from --background")->capture_default_str();
    c->add_option("--methods", o.methods, "Topic methods: lda, lsi")->capture_default_str();
    c->add_option("--lda-iterations", o.lda_iterations, "Gibbs sweeps for LDA training")->capture_default_str();
  };
  const auto add_protocol = [&](CLI::App* c) {
    c->add_option("--folds", o.folds, "Cross-validation folds")->capture_default_str();
    c->add_option("--holdout", o.holdout, "Holdout fraction")->capture_default_str();
    c->add_option("--workers", o.workers, "Worker threads")->capture_default_str();
    c->add_option("--config", o.config, "JSON experiment configuration (command-line flags take precedence)");
  };

  auto* validate = app.add_subcommand("validate", "Parse a corpus and report integrity errors and label warnings");
  validate->add_option("--corpus", o.corpus, "Corpus (JSON Lines)");
  validate->add_option("--lang", o.expect_lang, "Expected language (en or nl)");

  auto* stats = app.add_subcommand("stats", "Print corpus size, positive ratio and category counts");
  stats->add_option("--corpus", o.corpus, "Corpus (JSON Lines)");

  auto* split = app.add_subcommand("split", "Write the held-in / holdout split");
  split->add_option("--corpus", o.corpus, "Corpus (JSON Lines)");
  split->add_option("--out", o.out, "Output directory");
  split->add_option("--holdout", o.holdout, "Holdout fraction")->capture_default_str();
  add_seed(split);

  auto* train_topics = app.add_subcommand("train-topics", "Train per-category LDA and LSI models");
  train_topics->add_option("--out", o.out, "Output directory");
  train_topics->add_option("--workers", o.workers, "Worker threads")->capture_default_str();
  add_resources(train_topics);
  add_lang(train_topics);
  add_seed(train_topics);

  auto* gridsearch = app.add_subcommand(
      "gridsearch", "Grid search on held-in data, retrain the best systems, score baselines and write reports");
  gridsearch->add_option("--corpus", o.corpus, "Corpus (JSON Lines)");
  gridsearch->add_option("--out", o.out, "Output directory");
  gridsearch->add_option("--subsets", o.subsets, "Feature group subsets, e.g. A AC BCDE (default: all 31)");
  add_resources(gridsearch);
  add_protocol(gridsearch);
  add_lang(gridsearch);
  add_seed(gridsearch);

  auto* finalize = app.add_subcommand("finalize", "Retrain one configuration on held-in data and score the holdout");
  finalize->add_option("--corpus", o.corpus, "Corpus (JSON Lines)");
  finalize->add_option("--winner", o.winner, "winner.json from gridsearch, or a bare configuration object");
  finalize->add_option("--out", o.out, "Output directory");
  add_resources(finalize);
  add_protocol(finalize);
  add_lang(finalize);
  add_seed(finalize);

  auto* predict = app.add_subcommand("predict", "Score posts with a trained model");
  predict->add_option("--model", o.model, "model.json");
  predict->add_option("--features", o.features, "features.json belonging to the model");
  predict->add_option("--corpus", o.corpus, "Posts to score (JSON Lines)");
  predict->add_option("--out", o.out, "Output directory");
  add_resources(predict);
  add_lang(predict);
  add_seed(predict);

  auto* baseline = app.add_subcommand("baseline", "Score the profanity and word n-gram baselines");
  baseline->add_option("--corpus", o.corpus, "Corpus (JSON Lines)");
  baseline->add_option("--out", o.out, "Output directory");
  add_resources(baseline);
  add_protocol(baseline);
  add_lang(baseline);
  add_seed(baseline);

  auto* agreement = app.add_subcommand("agreement", "Cohen's and Fleiss' kappa for a ratings file");
  agreement->add_option("--ratings", o.ratings, "One item per line, one tab-separated label per rater");

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic annotated corpus");
  synth_cmd->add_option("--posts", o.posts, "Number of posts")->capture_default_str();
  synth_cmd->add_option("--positive-ratio", o.positive_ratio, "Share of positive posts")->capture_default_str();
  synth_cmd->add_option("--noise", o.noise, "Misspelling probability of insult words")->capture_default_str();
  synth_cmd->add_option("--background-docs", o.background_docs, "Also write this many background documents per category");
  synth_cmd->add_option("--out", o.out, "Output directory (default: corpus to standard output)");
  add_lang(synth_cmd);
  add_seed(synth_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << BULLYSIG_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto parsed = app.get_subcommands();
    err << (parsed.empty() ? app.help() : parsed.front()->help());
    return kExitUsage;
  }

  CLI::App* command = app.get_subcommands().front();
  try {
    apply_config(o, *command);
    const std::string name = command->get_name();
    if (name == "validate") return cmd_validate(o, out, err);
    if (name == "stats") return cmd_stats(o, out);
    if (name == "split") return cmd_split(o, out);
    if (name == "train-topics") return cmd_train_topics(o, out);
    if (name == "gridsearch") return cmd_gridsearch(o, out, err);
    if (name == "finalize") return cmd_finalize(o, out);
    if (name == "predict") return cmd_predict(o, out);
    if (name == "baseline") return cmd_baseline(o, out);
    if (name == "agreement") return cmd_agreement(o, out);
    if (name == "synth") return cmd_synth(o, out);
    err << "error: unhandled command '" << name << "'\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << command->help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace bullysig::cli
