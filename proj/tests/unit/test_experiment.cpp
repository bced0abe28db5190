#include <doctest.h>

#include <set>

#include "bullysig/error.hpp"
#include "bullysig/experiment.hpp"
#include "bullysig/synth.hpp"

using namespace bullysig;
using namespace bullysig::experiment;
using features::GroupSet;

namespace {

const std::string kData = BULLYSIG_DATA_DIR;

features::FeatureContext english_context() {
  features::FeatureContext ctx;
  ctx.abbreviations = textprep::load_abbreviations(kData + "/en/abbrev.tsv");
  ctx.lexicon = features::SubjectivityLexicon::load(kData + "/en/lexicons");
  ctx.term_lists = features::TermListSet::load(kData + "/en/terms");
  return ctx;
}

std::vector<Post> small_corpus(std::size_t n, double ratio, std::uint64_t seed) {
  synth::SynthOptions o;
  o.posts = n;
  o.positive_ratio = ratio;
  o.seed = seed;
  return synth::synth_corpus(o);
}

Post post(std::string id, std::string text, bool label) {
  Post p;
  p.id = std::move(id);
  p.text = std::move(text);
  p.label = label;
  if (label) p.role = AuthorRole::kBully;
  return p;
}

}  // namespace

TEST_CASE("grid: 28 configurations in documented order") {
  const auto grid = standard_grid();
  REQUIRE(grid.size() == 28);
  CHECK(grid[0].C == doctest::Approx(1e-3));
  CHECK(grid[0].loss == linsvm::Loss::kHinge);
  CHECK(grid[0].class_weight == linsvm::ClassWeight::kNone);
  CHECK(grid[1].class_weight == linsvm::ClassWeight::kBalanced);
  CHECK(grid[2].loss == linsvm::Loss::kSquaredHinge);
  CHECK(grid[27].C == doctest::Approx(1e3));
  std::set<std::tuple<double, int, int>> distinct;
  for (const auto& c : grid)
    distinct.insert({c.C, static_cast<int>(c.loss), static_cast<int>(c.class_weight)});
  CHECK(distinct.size() == 28);
}

TEST_CASE("grid: 31 subsets x 28 configurations = 868 trials") {
  const auto trials = enumerate_trials(features::all_group_subsets(), standard_grid());
  CHECK(trials.size() == 868);
  CHECK(trials.front().groups == GroupSet::parse("A"));
  CHECK(trials.back().groups == GroupSet::parse("ABCDE"));
  // Duplicate subsets collapse; an empty subset is rejected.
  CHECK(enumerate_trials({GroupSet::parse("A"), GroupSet::parse("A")}, standard_grid()).size() == 28);
  CHECK_THROWS_AS(enumerate_trials({GroupSet()}, standard_grid()), ArgumentError);
}

TEST_CASE("grid: n-gram baseline configuration") {
  const auto c = ngram_baseline_config();
  CHECK(c.groups == GroupSet::parse("A"));
  CHECK(c.svm.C == 1.0);
  CHECK(c.svm.loss == linsvm::Loss::kSquaredHinge);
  CHECK(c.svm.class_weight == linsvm::ClassWeight::kNone);
  CHECK(c.label() == "A | C=1 | squared_hinge | none");
}

TEST_CASE("run_grid: enumeration order, folds and worker independence") {
  const auto corpus = small_corpus(300, 0.1, 5);
  const auto ctx = english_context();
  GridOptions o;
  o.folds = 3;
  o.subsets = {GroupSet::parse("C"), GroupSet::parse("A"), GroupSet::parse("AD")};
  o.grid = {standard_grid()[0], standard_grid()[14]};
  const auto single = run_grid(corpus, ctx, o);
  REQUIRE(single.size() == 6);
  for (std::size_t i = 0; i < single.size(); ++i) {
    CHECK(single[i].index == i);
    CHECK(single[i].folds.size() == 3);
    CHECK(single[i].converged.size() == 3);
  }
  CHECK(single[0].config.groups == GroupSet::parse("A"));  // mask order: A(1) < C(4) < AD(9)
  CHECK(single[2].config.groups == GroupSet::parse("C"));
  CHECK(single[4].config.groups == GroupSet::parse("AD"));

  o.workers = 3;
  const auto threaded = run_grid(corpus, ctx, o);
  for (std::size_t i = 0; i < single.size(); ++i) {
    CHECK(threaded[i].mean.f1 == single[i].mean.f1);
    CHECK(threaded[i].mean.auc == single[i].mean.auc);
    CHECK(threaded[i].epochs == single[i].epochs);
  }
}

TEST_CASE("run_grid: missing resources fail before any training") {
  const auto corpus = small_corpus(100, 0.2, 1);
  features::FeatureContext bare;
  GridOptions o;
  o.folds = 2;
  o.subsets = {GroupSet::parse("B")};
  CHECK_THROWS_AS(run_grid(corpus, bare, o), ResourceError);
  o.subsets = {GroupSet::parse("E")};
  CHECK_THROWS_AS(run_grid(corpus, english_context(), o), ResourceError);
}

TEST_CASE("run_grid: perfectly separating profanity reaches F1 = 1 with group A") {
  std::vector<Post> corpus;
  for (int i = 0; i < 40; ++i) {
    corpus.push_back(post("p" + std::to_string(i), "you bitch number " + std::to_string(i % 7), true));
    for (int j = 0; j < 3; ++j)
      corpus.push_back(post("n" + std::to_string(i) + "_" + std::to_string(j),
                            "have a nice day number " + std::to_string((i + j) % 7), false));
  }
  GridOptions o;
  o.folds = 4;
  o.subsets = {GroupSet::parse("A")};
  const auto results = run_grid(corpus, english_context(), o);
  CHECK(select_winner(results).mean.f1 == 1.0);
}

TEST_CASE("select_winner and best_per_subset") {
  std::vector<TrialResult> results(6);
  const std::vector<double> f1 = {0.5, 0.7, 0.7, 0.2, 0.9, 0.1};
  for (std::size_t i = 0; i < results.size(); ++i) {
    results[i].index = i;
    results[i].mean.f1 = f1[i];
    results[i].config.groups = GroupSet::parse(i < 3 ? "A" : (i < 5 ? "B" : "C"));
  }
  CHECK(select_winner(results).index == 4);
  results[4].mean.f1 = 0.7;  // three-way tie: lowest index wins
  CHECK(select_winner(results).index == 1);
  const auto best = best_per_subset(results);
  REQUIRE(best.size() == 3);
  CHECK(best[0] == 1);  // A (0.7, index 1) before B (0.7, index 4)
  CHECK(best[1] == 4);
  CHECK(best[2] == 5);
  CHECK_THROWS_AS(select_winner({}), EmptyInputError);
}

TEST_CASE("finalize: term lists give 7 features plus bias; reruns are identical") {
  const auto corpus = small_corpus(200, 0.2, 9);
  const auto split = holdout_split(corpus, 0.1, 1);
  const auto ctx = english_context();
  TrialConfig config{GroupSet::parse("D"), {}};
  const auto a = finalize(split.held_in, split.holdout, config, ctx);
  CHECK(a.space.dimension() == 7);
  CHECK(a.model.w.size() == 8);
  CHECK(a.model.feature_fingerprint == a.space.fingerprint());
  const auto b = finalize(split.held_in, split.holdout, config, ctx);
  CHECK(a.scores == b.scores);
  CHECK(a.holdout.f1 == b.holdout.f1);
  CHECK(a.predictions.size() == split.holdout.size());
}

TEST_CASE("keyword baseline") {
  const std::set<std::string, std::less<>> profanity = {"bitch", "fuck"};
  const std::vector<Post> posts = {post("a", "you bitch", true), post("b", "have a nice day", false),
                                   post("c", "FUCK!!", false)};
  CHECK(keyword_baseline(posts, profanity) == std::vector<int>{1, -1, 1});
  CHECK_THROWS_AS(keyword_baseline(posts, {}), EmptyInputError);
  CHECK_THROWS_AS(keyword_baseline({}, profanity), EmptyInputError);
  const auto r = score_predictions(posts, keyword_baseline(posts, profanity));
  CHECK(r.recall == 1.0);
  CHECK(r.precision == 0.5);
  REQUIRE(r.auc);
  CHECK(*r.auc == doctest::Approx(0.75));
}

TEST_CASE("run_protocol: consistency of the reported systems") {
  const auto corpus = small_corpus(400, 0.1, 2);
  const auto ctx = english_context();
  ProtocolOptions o;
  o.grid.folds = 3;
  o.grid.subsets = {GroupSet::parse("A"), GroupSet::parse("C"), GroupSet::parse("AC"), GroupSet::parse("D")};
  o.grid.grid = {standard_grid()[6], standard_grid()[14]};  // includes C=1 squared hinge, no weights
  const auto r = run_protocol(corpus, ctx, o);
  CHECK(r.trials.size() == 8);
  CHECK(r.split.holdout.size() == 40);
  REQUIRE(r.top_systems.size() == 3);
  CHECK(r.top_trials.front() == r.winner);
  CHECK(r.top_systems.front().config.label() == r.trials[r.winner].config.label());
  CHECK(r.single_group_systems.size() == 3);  // A, C, D
  // The n-gram baseline's CV score comes from its grid trial.
  const auto it = std::find_if(r.trials.begin(), r.trials.end(), [](const TrialResult& t) {
    return t.config.groups == GroupSet::parse("A") && t.config.svm.C == 1.0 &&
           t.config.svm.loss == linsvm::Loss::kSquaredHinge;
  });
  REQUIRE(it != r.trials.end());
  CHECK(r.ngram.cross_validation.f1 == it->mean.f1);
  CHECK(r.keyword.predictions.size() == 40);
  // The holdout is disjoint from held-in.
  std::set<std::size_t> held(r.split.held_in.begin(), r.split.held_in.end());
  for (const auto h : r.split.holdout) CHECK(!held.contains(h));
}
