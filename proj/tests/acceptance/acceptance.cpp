// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Every check is computed here against an independent
// oracle or a hand-derived value; nothing is read back from earlier runs.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bullysig/cli.hpp"
#include "bullysig/corpus.hpp"
#include "bullysig/experiment.hpp"
#include "bullysig/features.hpp"
#include "bullysig/linsvm.hpp"
#include "bullysig/metrics.hpp"
#include "bullysig/random.hpp"
#include "bullysig/synth.hpp"
#include "bullysig/textprep.hpp"
#include "bullysig/topics.hpp"

using namespace bullysig;
namespace fs = std::filesystem;

namespace {

const std::string kData = BULLYSIG_DATA_DIR;

// Collects failed sub-checks of one criterion.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::ostringstream s;
    s << (total_ - failed_) << "/" << total_ << " checks";
    for (const auto& f : failures_) s << "; FAILED: " << f;
    if (failed_ > failures_.size()) s << "; ...";
    return s.str();
  }

 private:
  std::size_t total_ = 0;
  std::size_t failed_ = 0;
  std::vector<std::string> failures_;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

features::FeatureContext english_context() {
  features::FeatureContext ctx;
  ctx.lang = Language::kEnglish;
  ctx.abbreviations = textprep::load_abbreviations(kData + "/en/abbrev.tsv");
  ctx.lexicon = features::SubjectivityLexicon::load(kData + "/en/lexicons");
  ctx.term_lists = features::TermListSet::load(kData + "/en/terms");
  return ctx;
}

std::vector<int> gold_of(const std::vector<Post>& posts) {
  std::vector<int> y;
  y.reserve(posts.size());
  for (const auto& p : posts) y.push_back(p.label ? 1 : -1);
  return y;
}

// ---------------------------------------------------------------------------
// 1. Metric oracles

double pairwise_auc(const std::vector<int>& gold, const std::vector<double>& scores) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] != 1) continue;
    for (std::size_t j = 0; j < gold.size(); ++j) {
      if (gold[j] == 1) continue;
      pairs += 1.0;
      wins += scores[i] > scores[j] ? 1.0 : (scores[i] == scores[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

Outcome criterion_metrics() {
  const auto start = std::chrono::steady_clock::now();
  Checks c;
  Rng rng(derive_seed(42, "acceptance-metrics"));
  for (int set = 0; set < 200; ++set) {
    const std::size_t n = 2 + rng.below(499);
    const double positive_rate = 0.05 + 0.5 * rng.uniform01();
    std::vector<int> gold(n), pred(n);
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      gold[i] = rng.uniform01() < positive_rate ? 1 : -1;
      pred[i] = rng.uniform01() < 0.4 ? 1 : -1;
      // Half of the sets use coarse scores so that ties are common.
      scores[i] = set % 2 ? static_cast<double>(rng.below(10)) : rng.uniform01() * 4.0 - 2.0;
    }
    // Force one gold label of each class so that AUC is defined.
    const std::size_t pos = rng.below(n);
    gold[pos] = 1;
    gold[(pos + 1 + rng.below(n - 1)) % n] = -1;
    double tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (gold[i] == 1) (pred[i] == 1 ? tp : fn) += 1;
      else (pred[i] == 1 ? fp : tn) += 1;
    }
    if (tp + fn == 0 || fp + tn == 0) continue;  // cannot happen: one of each is forced
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double r = tp / (tp + fn);
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    const double acc = (tp + tn) / static_cast<double>(n);
    const auto rep = metrics::prf_accuracy(gold, pred);
    const std::string tag = "set " + std::to_string(set);
    c.expect(std::abs(rep.precision - p) <= 1e-9, tag + " precision");
    c.expect(std::abs(rep.recall - r) <= 1e-9, tag + " recall");
    c.expect(std::abs(rep.f1 - f) <= 1e-9, tag + " F1");
    c.expect(std::abs(rep.accuracy - acc) <= 1e-9, tag + " accuracy");
    c.expect(std::abs(metrics::auc_roc(gold, scores) - pairwise_auc(gold, scores)) <= 1e-9, tag + " AUC");
  }
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 5.0, "runtime " + fmt("%.2f s", elapsed));
  return {c.ok(), c.summary() + " on 200 sets, " + fmt("%.2f s", elapsed)};
}

// ---------------------------------------------------------------------------
// 2. Kappa

Outcome criterion_kappa() {
  const auto start = std::chrono::steady_clock::now();
  Checks c;
  // p_o = 3/4, p_e = 1/2 -> 0.5; p_o = 1/2, p_e = 1/2 -> 0.
  const double half = metrics::cohen_kappa(std::vector<int>{1, 1, 0, 0}, std::vector<int>{1, 0, 0, 0});
  const double zero = metrics::cohen_kappa(std::vector<int>{1, 0, 1, 0}, std::vector<int>{1, 1, 0, 0});
  c.expect(half == 0.5, "cohen 0.5 case gave " + fmt("%.17g", half));
  c.expect(zero == 0.0, "cohen 0.0 case gave " + fmt("%.17g", zero));
  const double unanimous = metrics::fleiss_kappa({{3, 0, 0}, {0, 3, 0}, {0, 0, 3}, {3, 0, 0}});
  const double unanimous2 = metrics::fleiss_kappa({{5, 0}, {0, 5}});
  const double disagree = metrics::fleiss_kappa({{1, 1}, {1, 1}});
  c.expect(unanimous == 1.0, "fleiss unanimous gave " + fmt("%.17g", unanimous));
  c.expect(unanimous2 == 1.0, "fleiss unanimous (2 categories) gave " + fmt("%.17g", unanimous2));
  c.expect(disagree == -1.0, "fleiss 2x2 disagreement gave " + fmt("%.17g", disagree));
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 1.0, "runtime");
  return {c.ok(), c.summary() + ", " + fmt("%.3f s", elapsed)};
}

// ---------------------------------------------------------------------------
// 3. SVM solver

struct Dataset {
  std::vector<SparseVector> xs;
  std::vector<int> ys;
  std::size_t dim = 0;
};

Dataset random_dataset(Rng& rng) {
  Dataset d;
  d.dim = 1 + rng.below(5);
  const std::size_t n = 4 + rng.below(17);
  for (std::size_t i = 0; i < n; ++i) {
    SparseVector x;
    for (std::size_t j = 0; j < d.dim; ++j)
      if (rng.uniform01() < 0.7) x.push_back({j, rng.uniform01() * 4 - 2});
    d.xs.push_back(x);
    d.ys.push_back(rng.below(2) ? 1 : -1);
  }
  d.ys[0] = 1;
  d.ys[1] = -1;
  return d;
}

// Maximum of the dual over the feasible box by accelerated projected
// gradient (FISTA with adaptive restart) on dense matrices, capped at 10^6
// iterations. Shares nothing with the coordinate-descent solver except the
// problem definition (upper bounds and diagonal shift).
double reference_dual_optimum(const Dataset& d, const linsvm::SvmConfig& config) {
  using Eigen::Index;
  const auto n = static_cast<Index>(d.xs.size());
  const auto dim = static_cast<Index>(d.dim + (config.fit_bias ? 1 : 0));
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, dim);
  for (Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    for (const auto& e : d.xs[ui]) z(i, static_cast<Index>(e.index)) = d.ys[ui] * e.value;
    if (config.fit_bias) z(i, static_cast<Index>(d.dim)) = d.ys[ui];
  }
  const auto terms = linsvm::dual_terms(d.ys, config);
  Eigen::MatrixXd h = z * z.transpose();
  Eigen::VectorXd upper(n);
  for (Index i = 0; i < n; ++i) {
    h(i, i) += terms.diagonal[static_cast<std::size_t>(i)];
    upper(i) = terms.upper[static_cast<std::size_t>(i)];
  }
  const double lipschitz = std::max(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues().maxCoeff(), 1e-12);
  const auto f = [&](const Eigen::VectorXd& a) { return 0.5 * a.dot(h * a) - a.sum(); };
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n), y = a;
  double t = 1.0, fa = f(a);
  for (int it = 0; it < 1000000; ++it) {
    Eigen::VectorXd next = y - (h * y - Eigen::VectorXd::Ones(n)) / lipschitz;
    for (Index i = 0; i < n; ++i) next(i) = std::clamp(next(i), 0.0, upper(i));
    const double fn = f(next);
    if (fn > fa) {
      y = a;
      t = 1.0;
      continue;
    }
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / tn) * (next - a);
    const double change = (next - a).cwiseAbs().maxCoeff();
    a = next;
    fa = fn;
    t = tn;
    if (change < 1e-15) break;
  }
  return -fa;
}

Outcome criterion_svm() {
  const auto start = std::chrono::steady_clock::now();
  Checks c;
  {
    const std::vector<SparseVector> xs = {{{0, -1.0}}, {{0, 1.0}}};
    const std::vector<int> ys = {-1, 1};
    linsvm::SvmConfig config{.C = 10.0, .loss = linsvm::Loss::kHinge, .fit_bias = false};
    const auto m = linsvm::train(xs, ys, 1, config);
    c.expect(std::abs(m.w[0] - 1.0) <= 1e-3, "1-D case w = " + fmt("%.6f", m.w[0]));
  }
  Rng rng(derive_seed(42, "acceptance-svm"));
  double worst_gap = 0.0;
  for (int set = 0; set < 50; ++set) {
    const auto d = random_dataset(rng);
    for (const auto loss : {linsvm::Loss::kHinge, linsvm::Loss::kSquaredHinge}) {
      linsvm::SvmConfig config;
      config.C = std::pow(10.0, static_cast<double>(rng.below(5)) - 2.0);
      config.loss = loss;
      config.class_weight = rng.below(2) ? linsvm::ClassWeight::kBalanced : linsvm::ClassWeight::kNone;
      config.max_epochs = 200000;
      const auto m = linsvm::train(d.xs, d.ys, d.dim, config);
      const std::string tag = "set " + std::to_string(set) + " " + std::string(linsvm::to_string(loss));
      const double ours = linsvm::dual_objective(d.xs, d.ys, d.dim, config, m.alpha);
      const double ref = reference_dual_optimum(d, config);
      const double gap = std::abs(ours - ref) / std::max(std::abs(ref), 1e-300);
      worst_gap = std::max(worst_gap, gap);
      c.expect(m.converged, tag + " converged");
      c.expect(gap <= 1e-4, tag + " dual gap " + fmt("%.2e", gap));
      // Feasibility.
      const auto terms = linsvm::dual_terms(d.ys, config);
      for (std::size_t i = 0; i < m.alpha.size(); ++i)
        c.expect(m.alpha[i] >= 0.0 && m.alpha[i] <= terms.upper[i], tag + " alpha in box");
      // Representer identity w = sum_i alpha_i y_i x_i (bias slot included).
      std::vector<double> w(d.dim + 1, 0.0);
      for (std::size_t i = 0; i < d.xs.size(); ++i) {
        for (const auto& e : d.xs[i]) w[e.index] += m.alpha[i] * d.ys[i] * e.value;
        w[d.dim] += m.alpha[i] * d.ys[i];
      }
      double diff = 0.0, norm = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j) {
        diff += (w[j] - m.w[j]) * (w[j] - m.w[j]);
        norm += w[j] * w[j];
      }
      c.expect(std::sqrt(diff) <= 1e-6 * std::max(std::sqrt(norm), 1.0), tag + " representer identity");
    }
  }
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 60.0, "runtime " + fmt("%.1f s", elapsed));
  return {c.ok(), c.summary() + ", worst relative dual gap " + fmt("%.2e", worst_gap) + ", " +
                      fmt("%.1f s", elapsed)};
}

// ---------------------------------------------------------------------------
// 4. Cost sensitivity

Outcome criterion_cost_sensitivity() {
  Checks c;
  synth::SynthOptions so;
  so.posts = 2000;
  so.positive_ratio = 0.05;
  so.seed = 42;
  const auto corpus = synth::synth_corpus(so);
  const auto ctx = english_context();
  // Term-list features (group D) keep the problem non-separable, so the
  // class weights have something to trade.
  const auto groups = features::GroupSet::parse("D");
  const auto folds = experiment::make_folds(corpus, 10, 42);
  std::vector<int> unweighted_pred(corpus.size()), balanced_pred(corpus.size());
  for (const auto& validation : folds) {
    std::set<std::size_t> held(validation.begin(), validation.end());
    std::vector<Post> train_posts, valid_posts;
    for (std::size_t i = 0; i < corpus.size(); ++i) (held.contains(i) ? valid_posts : train_posts).push_back(corpus[i]);
    const auto space = features::build_feature_space(train_posts, groups, ctx);
    std::vector<SparseVector> xs;
    for (const auto& p : train_posts) xs.push_back(features::vectorize(p, space, ctx));
    const auto ys = gold_of(train_posts);
    for (const auto mode : {linsvm::ClassWeight::kNone, linsvm::ClassWeight::kBalanced}) {
      linsvm::SvmConfig config{.C = 1.0, .loss = linsvm::Loss::kHinge, .class_weight = mode};
      const auto m = linsvm::train(xs, ys, space.dimension(), config);
      auto& out = mode == linsvm::ClassWeight::kNone ? unweighted_pred : balanced_pred;
      for (std::size_t k = 0; k < validation.size(); ++k)
        out[validation[k]] = linsvm::predict(m, features::vectorize(valid_posts[k], space, ctx));
    }
  }
  const auto gold = gold_of(corpus);
  const auto none = metrics::prf_accuracy(gold, unweighted_pred);
  const auto balanced = metrics::prf_accuracy(gold, balanced_pred);
  c.expect(balanced.recall > none.recall, "balanced recall not higher");
  return {c.ok(), c.summary() + ": pooled 10-fold recall, group D, C=1, hinge: none " + fmt("%.4f", none.recall) +
                      ", balanced " + fmt("%.4f", balanced.recall) + " (precision " + fmt("%.4f", none.precision) +
                      " vs " + fmt("%.4f", balanced.precision) + ")"};
}

// ---------------------------------------------------------------------------
// 5. Feature extraction oracles

std::set<std::string> substring_ngrams(const std::vector<std::string>& tokens) {
  std::set<std::string> out;
  for (const auto& t : tokens) {
    std::vector<std::string> cps;
    for (std::size_t i = 0; i < t.size();) {
      const auto b = static_cast<unsigned char>(t[i]);
      const std::size_t len = b >= 0xF0 ? 4 : b >= 0xE0 ? 3 : b >= 0xC0 ? 2 : 1;
      cps.push_back(t.substr(i, len));
      i += len;
    }
    for (std::size_t begin = 0; begin < cps.size(); ++begin)
      for (std::size_t n = 2; n <= 4 && begin + n <= cps.size(); ++n) {
        std::string s;
        for (std::size_t k = begin; k < begin + n; ++k) s += cps[k];
        out.insert(std::to_string(n) + ":" + s);
      }
  }
  return out;
}

Outcome criterion_features() {
  const auto start = std::chrono::steady_clock::now();
  Checks c;
  Rng rng(derive_seed(42, "acceptance-features"));
  const std::vector<std::string> alphabet = {"a", "b", "e", "o", "'", "-", "é", "ß", "€", "_", "x", "ü"};
  for (int list = 0; list < 1000; ++list) {
    std::vector<std::string> tokens;
    for (std::size_t n = rng.below(7); n > 0; --n) {
      std::string t;
      for (std::size_t m = 1 + rng.below(9); m > 0; --m) t += alphabet[rng.below(alphabet.size())];
      tokens.push_back(t);
    }
    c.expect(features::extract_char_ngrams(tokens) == substring_ngrams(tokens), "char n-grams, list " + std::to_string(list));
  }

  std::map<char, int> per_order;
  for (const auto& name : features::extract_word_ngrams(textprep::preprocess("you are ugly", {}))) ++per_order[name[0]];
  c.expect(per_order == std::map<char, int>{{'1', 3}, {'2', 2}, {'3', 1}}, "word n-gram counts {3,2,1}");

  // Person alternation: posts assembled from pronoun-free words plus optional
  // first- and second-person pronouns; the expected bit is known by
  // construction.
  const std::vector<std::string> first = {"I", "me", "my", "mine", "we", "us", "our", "myself"};
  const std::vector<std::string> second = {"you", "your", "u", "yours", "yourself", "ur"};
  const std::vector<std::string> neutral = {"hate", "the", "dog", "is", "nice", "they", "school", "went", "it", "!"};
  const auto abbrev = textprep::load_abbreviations(kData + "/en/abbrev.tsv");
  for (int i = 0; i < 50; ++i) {
    const bool with_first = i % 4 == 1 || i % 4 == 3;
    const bool with_second = i % 4 >= 2;
    std::vector<std::string> words;
    for (std::size_t n = 1 + rng.below(6); n > 0; --n) words.push_back(neutral[rng.below(neutral.size())]);
    if (with_first) words.insert(words.begin() + static_cast<long>(rng.below(words.size() + 1)), first[rng.below(first.size())]);
    if (with_second) words.insert(words.begin() + static_cast<long>(rng.below(words.size() + 1)), second[rng.below(second.size())]);
    std::string text;
    for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
    const auto bits = features::extract_termlist_features(textprep::preprocess(text, abbrev), features::TermListSet{},
                                                          Language::kEnglish);
    c.expect(bits[6] == (with_first && with_second), "person alternation on \"" + text + "\"");
  }
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 5.0, "runtime");
  return {c.ok(), c.summary() + ", " + fmt("%.2f s", elapsed)};
}

// ---------------------------------------------------------------------------
// 6. Topic models

Outcome criterion_topics() {
  const auto start = std::chrono::steady_clock::now();
  Checks c;
  Rng rng(derive_seed(42, "acceptance-topics"));
  double worst_sine = 0.0;
  for (int m = 0; m < 20; ++m) {
    topics::DenseMatrix a(20, 10);
    for (auto& v : a.data) v = rng.uniform01() * 2 - 1;
    const std::size_t k = 1 + rng.below(10);
    const auto model = topics::lsi_from_matrix(topics::SparseRowMatrix::from_dense(a), topics::Vocabulary{}, k, {});
    Eigen::MatrixXd e(20, 10);
    for (std::size_t i = 0; i < 20; ++i)
      for (std::size_t j = 0; j < 10; ++j) e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(i, j);
    Eigen::JacobiSVD<Eigen::MatrixXd> oracle(e, Eigen::ComputeFullV);
    const auto kk = static_cast<Eigen::Index>(k);
    // Projection map of the model: row r of `ours` is project(e_r), i.e.
    // V_k S_k^-1; multiplying back by S_k gives the basis whose span we compare.
    Eigen::MatrixXd ours(10, kk);
    for (std::size_t t = 0; t < 10; ++t) {
      const auto p = topics::project_lsi_vector(model, {{t, 1.0}});
      for (Eigen::Index j = 0; j < kk; ++j)
        ours(static_cast<Eigen::Index>(t), j) = p[static_cast<std::size_t>(j)] * model.singular_values[static_cast<std::size_t>(j)];
    }
    const Eigen::MatrixXd v = oracle.matrixV().leftCols(kk);
    const Eigen::MatrixXd residual = ours - v * (v.transpose() * ours);
    const double sine = Eigen::JacobiSVD<Eigen::MatrixXd>(residual).singularValues()(0);
    worst_sine = std::max(worst_sine, sine);
    c.expect(std::asin(std::min(sine, 1.0)) < 1e-6, "principal angle, matrix " + std::to_string(m));
    for (Eigen::Index j = 0; j < kk; ++j)
      c.expect(std::abs(model.singular_values[static_cast<std::size_t>(j)] - oracle.singularValues()(j)) <=
                   1e-9 * oracle.singularValues()(0),
               "singular value, matrix " + std::to_string(m));
  }

  const std::vector<std::string> fruit = {"apple", "banana", "cherry", "grape", "lemon", "mango", "peach", "plum"};
  const std::vector<std::string> cars = {"engine", "wheel", "brake", "piston", "gear", "clutch", "tyre", "exhaust"};
  std::vector<topics::Document> docs;
  for (int i = 0; i < 80; ++i) {
    const auto& fam = i % 2 == 0 ? fruit : cars;
    topics::Document d;
    for (int w = 0; w < 15; ++w) d.push_back(fam[rng.below(fam.size())]);
    docs.push_back(d);
  }
  const auto lda = topics::train_lda(docs, 2, {.seed = 42});
  const std::set<std::string> fruit_set(fruit.begin(), fruit.end());
  std::array<std::array<double, 2>, 2> mass{};  // [topic][family]
  for (std::size_t t = 0; t < 2; ++t) {
    double row = 0.0;
    for (std::size_t w = 0; w < lda.vocab.size(); ++w) {
      mass[t][fruit_set.contains(lda.vocab.words()[w]) ? 0 : 1] += lda.phi_at(t, w);
      row += lda.phi_at(t, w);
    }
    c.expect(std::abs(row - 1.0) <= 1e-9, "phi row sum");
  }
  const double purity = std::max(mass[0][0] + mass[1][1], mass[0][1] + mass[1][0]) / 2.0;
  c.expect(purity >= 0.9, "LDA purity " + fmt("%.4f", purity));
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto theta = topics::infer_lda(lda, docs[d], 50, d);
    c.expect(std::abs(std::accumulate(theta.begin(), theta.end(), 0.0) - 1.0) <= 1e-9, "theta sum");
  }
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 120.0, "runtime");
  return {c.ok(), c.summary() + ", worst principal-angle sine " + fmt("%.2e", worst_sine) + ", LDA purity " +
                      fmt("%.4f", purity) + ", " + fmt("%.2f s", elapsed)};
}

// ---------------------------------------------------------------------------
// 7. Protocol integrity

Outcome criterion_protocol() {
  const auto start = std::chrono::steady_clock::now();
  Checks c;
  synth::SynthOptions so;
  so.posts = 2000;
  so.positive_ratio = 0.05;
  so.seed = 42;
  const auto corpus = synth::synth_corpus(so);

  auto ctx = english_context();
  topics::TopicTrainingOptions topt;
  topt.ks = {10, 20};
  topt.methods = {topics::Method::kLda, topics::Method::kLsi};
  topt.workers = std::max(1U, std::thread::hardware_concurrency());
  const auto background = synth::synth_background(
      Language::kEnglish, 40, derive_seed(42, "background"),
      {Category::kInsultGeneral, Category::kCurseExclusion, Category::kThreatBlackmail});
  ctx.topic_models = std::make_shared<const topics::TopicModelSet>(
      topics::TopicModelSet::train(background, Language::kEnglish, topt, ctx.abbreviations));

  experiment::ProtocolOptions po;
  po.grid.workers = topt.workers;
  const auto r = experiment::run_protocol(corpus, ctx, po);
  const double elapsed = seconds_since(start);

  c.expect(r.trials.size() == 868, "trial count " + std::to_string(r.trials.size()));
  // Independent re-scan for the argmax of mean F1 (first index on ties).
  std::size_t best = 0;
  for (std::size_t i = 0; i < r.trials.size(); ++i) {
    c.expect(r.trials[i].index == i, "enumeration index");
    double fold_mean = 0.0;
    for (const auto& f : r.trials[i].folds) fold_mean += f.f1;
    fold_mean /= static_cast<double>(r.trials[i].folds.size());
    c.expect(std::abs(fold_mean - r.trials[i].mean.f1) <= 1e-12, "mean F1 equals fold mean");
    if (r.trials[i].mean.f1 > r.trials[best].mean.f1) best = i;
  }
  c.expect(best == r.winner, "re-scanned argmax");
  const double f_opt = r.top_systems.front().holdout.f1;
  const double f_ngram = r.ngram.holdout.f1;
  const double f_kw = r.keyword.holdout.f1;
  c.expect(f_opt >= f_ngram, "F1(optimized) >= F1(ngram)");
  c.expect(f_ngram >= f_kw, "F1(ngram) >= F1(keyword)");
  c.expect(r.keyword.holdout.recall > r.keyword.holdout.precision, "keyword recall > precision on the holdout");
  c.expect(elapsed < 900.0, "runtime " + fmt("%.0f s", elapsed));

  std::size_t unconverged = 0, trainings = 0;
  for (const auto& t : r.trials)
    for (const bool ok : t.converged) {
      ++trainings;
      unconverged += ok ? 0 : 1;
    }
  std::ostringstream d;
  d << c.summary() << "; winner " << r.trials[r.winner].config.label() << " (CV F1 "
    << fmt("%.4f", r.trials[r.winner].mean.f1) << "); holdout F1 optimized " << fmt("%.4f", f_opt) << ", ngram "
    << fmt("%.4f", f_ngram) << ", keyword " << fmt("%.4f", f_kw) << "; keyword holdout P/R "
    << fmt("%.4f", r.keyword.holdout.precision) << "/" << fmt("%.4f", r.keyword.holdout.recall) << ", CV P/R "
    << fmt("%.4f", r.keyword.cross_validation.precision) << "/" << fmt("%.4f", r.keyword.cross_validation.recall)
    << "; " << unconverged << "/" << trainings << " trainings hit max_epochs; " << fmt("%.0f s", elapsed) << " on "
    << topt.workers << " worker(s)";
  return {c.ok(), d.str()};
}

// ---------------------------------------------------------------------------
// 8. Leakage audit

Outcome criterion_leakage() {
  Checks c;
  auto ctx = english_context();
  const auto background = synth::synth_background(Language::kEnglish, 10, 7, {Category::kInsultGeneral});
  topics::TopicTrainingOptions topt;
  topt.ks = {5};
  topt.lda_iterations = 100;
  ctx.topic_models = std::make_shared<const topics::TopicModelSet>(
      topics::TopicModelSet::train(background, Language::kEnglish, topt, ctx.abbreviations));
  const auto all = features::GroupSet::parse("ABCDE");
  std::size_t dropped_total = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    synth::SynthOptions so;
    so.posts = 400;
    so.positive_ratio = 0.1;
    so.seed = seed;
    const auto corpus = synth::synth_corpus(so);
    const auto split = holdout_split(corpus, 0.1, seed);
    const auto space = features::build_feature_space(split.held_in, all, ctx);
    const auto names_before = space.names();
    const std::set<std::string> known(names_before.begin(), names_before.end());
    for (const auto& p : split.holdout) {
      const auto x = features::vectorize(p, space, ctx);
      c.expect(is_well_formed(x, space.dimension()), "holdout vector indices within the held-in space");
      // Count the holdout-only names that vectorization had to drop, to show
      // the audit is not vacuous.
      const auto f = features::extract(p, ctx);
      for (const auto* names : {&f.word_ngrams, &f.char_ngrams})
        for (const auto& n : *names)
          if (!known.contains(features::qualify(names == &f.word_ngrams ? features::FeatureGroup::kWordNgrams
                                                                      : features::FeatureGroup::kCharNgrams,
                                                n)))
            ++dropped_total;
    }
    c.expect(space.names() == names_before, "space unchanged after vectorizing the holdout");
  }
  c.expect(dropped_total > 0, "holdout-only names exist");
  return {c.ok(), c.summary() + " across 10 seeds; " + std::to_string(dropped_total) +
                      " holdout-only n-gram occurrences were dropped rather than indexed"};
}

// ---------------------------------------------------------------------------
// 9. Reproducibility

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome criterion_reproducibility() {
  Checks c;
  const auto root = fs::temp_directory_path() / "bullysig_acceptance_repro";
  fs::remove_all(root);
  std::ostringstream sink;
  const auto run = [&](const fs::path& out) {
    const auto cmd = [&](std::vector<std::string> args) {
      std::ostringstream err;
      const int code = cli::run(args, sink, err);
      c.expect(code == 0, args.front() + " exited " + std::to_string(code) + ": " + err.str());
    };
    cmd({"synth", "--posts", "400", "--positive-ratio", "0.08", "--background-docs", "12", "--seed", "7", "--out",
         (out / "data").string()});
    cmd({"train-topics", "--background", (out / "data" / "background.jsonl").string(), "--ks", "5", "--lda-iterations",
         "100", "--abbrev", kData + "/en/abbrev.tsv", "--seed", "7", "--out", (out / "topics").string()});
    cmd({"gridsearch", "--corpus", (out / "data" / "corpus.jsonl").string(), "--lexicons", kData + "/en/lexicons",
         "--terms", kData + "/en/terms", "--abbrev", kData + "/en/abbrev.tsv", "--topics",
         (out / "topics" / "topics.json").string(), "--folds", "3", "--seed", "7", "--subsets", "A", "BD", "CE",
         "ABCDE", "--out", (out / "grid").string()});
    cmd({"predict", "--model", (out / "grid" / "model.json").string(), "--features",
         (out / "grid" / "features.json").string(), "--corpus", (out / "data" / "corpus.jsonl").string(), "--lexicons",
         kData + "/en/lexicons", "--terms", kData + "/en/terms", "--abbrev", kData + "/en/abbrev.tsv", "--topics",
         (out / "topics" / "topics.json").string(), "--seed", "7", "--out", (out / "predict").string()});
  };
  // Both runs write to the same location so that the manifests, which record
  // input paths, are comparable; the first run's tree is moved aside.
  run(root / "run");
  fs::rename(root / "run", root / "first");
  run(root / "run");
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "first")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), root / "first");
    ++files;
    c.expect(slurp(entry.path()) == slurp(root / "run" / rel), "differs: " + rel.string());
  }
  std::size_t second_files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "run")) second_files += entry.is_regular_file() ? 1 : 0;
  c.expect(files == second_files && files > 0, "same file set");
  fs::remove_all(root);
  return {c.ok(), c.summary() + "; " + std::to_string(files) +
                      " files compared (synth, train-topics, gridsearch, predict)"};
}

// ---------------------------------------------------------------------------
// 10. Error-rate report

Outcome criterion_error_rates() {
  Checks c;
  std::vector<Post> posts;
  std::vector<int> pred;
  const auto add = [&](bool label, std::vector<Category> cats, int prediction) {
    Post p;
    p.id = "h" + std::to_string(posts.size());
    p.text = "text of a constructed post";
    p.label = label;
    if (label) p.role = AuthorRole::kBully;
    for (const auto cat : cats) p.spans.push_back({cat, 0, 4});
    posts.push_back(p);
    pred.push_back(prediction);
  };
  using C = Category;
  for (int i = 0; i < 4; ++i) add(true, {C::kThreatBlackmail}, i == 0 ? -1 : 1);       // 1 of 4 missed
  for (int i = 0; i < 3; ++i) add(true, {C::kInsultGeneral}, i < 2 ? -1 : 1);          // 2 of 3 missed
  add(false, {C::kInsultGeneral}, 1);                                                  // banter flagged
  add(false, {C::kInsultGeneral}, -1);                                                 // banter passed
  add(true, {C::kCurseExclusion}, 1);
  add(true, {C::kCurseExclusion}, 1);
  add(true, {C::kDefenseVictim}, -1);
  add(true, {C::kDefenseBystander}, 1);
  add(true, {C::kEncouragement}, -1);
  add(false, {C::kSexualTalk}, 1);                                                     // harmless talk flagged
  add(false, {C::kSexualTalk}, -1);
  add(true, {C::kInsultRelatives, C::kDefamation, C::kInsultRelatives}, -1);          // counts once per category
  add(true, {C::kDefamation}, 1);
  for (int i = 0; i < 12; ++i) add(false, {}, i < 3 ? 1 : -1);                         // 3 of 12 false alarms
  c.expect(posts.size() == 30, "30 posts");
  c.expect(validate_labels(posts).empty(), "holdout respects the always-positive rule");

  const auto r = metrics::category_error_rates(posts, pred);
  const std::map<Category, std::pair<std::size_t, std::size_t>> expected = {
      {C::kThreatBlackmail, {4, 1}}, {C::kInsultGeneral, {5, 3}}, {C::kCurseExclusion, {2, 0}},
      {C::kDefenseVictim, {1, 1}},   {C::kDefenseBystander, {1, 0}}, {C::kEncouragement, {1, 1}},
      {C::kSexualTalk, {2, 1}},      {C::kInsultRelatives, {1, 1}},  {C::kDefamation, {2, 1}}};
  c.expect(r.categories.size() == expected.size(), "only present categories are reported");
  for (const auto& [cat, counts] : expected) {
    const auto it = r.categories.find(cat);
    const std::string name(to_string(cat));
    if (it == r.categories.end()) {
      c.expect(false, name + " missing");
      continue;
    }
    c.expect(it->second.occurrences == counts.first && it->second.errors == counts.second, name + " counts");
    c.expect(it->second.rate() == static_cast<double>(counts.second) / static_cast<double>(counts.first),
             name + " rate");
  }
  // Gold negatives: 12 plain + 2 banter + 2 sexual talk; flagged: 3 + 1 + 1.
  c.expect(r.not_cyberbullying.occurrences == 16 && r.not_cyberbullying.errors == 5, "not_cyberbullying counts");
  c.expect(r.not_cyberbullying.rate() == 0.3125, "not_cyberbullying rate");

  // For always-positive categories every occurrence is gold positive, so the
  // error rate is the false-negative rate of those posts.
  for (const auto cat : {C::kThreatBlackmail, C::kCurseExclusion, C::kDefenseVictim, C::kEncouragement,
                         C::kInsultRelatives, C::kDefamation}) {
    std::size_t n = 0, missed = 0;
    for (std::size_t i = 0; i < posts.size(); ++i)
      if (posts[i].has_category(cat)) {
        ++n;
        missed += pred[i] == -1 ? 1 : 0;
      }
    c.expect(r.categories.at(cat).errors == missed && r.categories.at(cat).occurrences == n,
             std::string(to_string(cat)) + " error rate equals its false-negative rate");
  }
  // The rule itself: an always-positive span on a negative post is flagged,
  // a sexual-talk or general-insult span is not.
  auto broken = posts;
  broken[0].label = false;
  broken[0].role.reset();
  c.expect(validate_labels(broken).size() == 1, "threat span on a negative post flagged");

  // Report grouping: a post counts once per coarse group.
  const std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> coarse = {
      {"Curse", {2, 0}},  {"Defamation", {2, 1}}, {"Defense", {2, 1}}, {"Encouragement", {1, 1}},
      {"Insult", {6, 4}}, {"Sexual", {2, 1}},     {"Threat", {4, 1}},  {"Not cyberbullying", {16, 5}}};
  const auto rows = metrics::coarse_error_rates(posts, pred);
  c.expect(rows.size() == coarse.size(), "coarse row count");
  for (std::size_t i = 0; i < std::min(rows.size(), coarse.size()); ++i)
    c.expect(rows[i].name == coarse[i].first && rows[i].rate.occurrences == coarse[i].second.first &&
                 rows[i].rate.errors == coarse[i].second.second,
             "coarse row " + coarse[i].first);
  return {c.ok(), c.summary() + " on a 30-post holdout"};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional criterion numbers on the command line restrict the run.
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"metric oracle equivalence", criterion_metrics},
      {"kappa correctness", criterion_kappa},
      {"SVM solver", criterion_svm},
      {"cost sensitivity", criterion_cost_sensitivity},
      {"feature extraction oracles", criterion_features},
      {"topic models", criterion_topics},
      {"protocol integrity", criterion_protocol},
      {"leakage audit", criterion_leakage},
      {"reproducibility", criterion_reproducibility},
      {"error-rate report", criterion_error_rates},
  };
  bool all_pass = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!only.empty() && !only.contains(number)) continue;
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    all_pass = all_pass && outcome.pass;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " " << number << " " << criteria[i].first << ": "
              << outcome.detail << std::endl;
  }
  return all_pass ? 0 : 1;
}
