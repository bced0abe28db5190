#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "bullysig/corpus.hpp"
#include "bullysig/textprep.hpp"

namespace bullysig::topics {

using Document = std::vector<std::string>;  // stemmed tokens

enum class Method { kLda, kLsi };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view s);

struct TopicModelSpec {
  Method method = Method::kLda;
  std::size_t k = 20;
  Category category = Category::kInsultGeneral;
};

// Sorted stem list with its reverse index.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> sorted_words);
  static Vocabulary build(const std::vector<Document>& docs);

  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  std::optional<std::size_t> find(const std::string& word) const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

// ---------------------------------------------------------------------------
// LDA (collapsed Gibbs sampling)

struct LdaOptions {
  std::optional<double> alpha;  // symmetric document-topic prior; default 50 / k
  double beta = 0.01;           // symmetric topic-word prior
  int iterations = 500;
  std::uint64_t seed = 42;
};

struct LdaModel {
  std::size_t k = 0;
  double alpha = 0.0;
  double beta = 0.0;
  Vocabulary vocab;
  std::vector<double> phi;  // k x V row-major, rows sum to one

  // Collapsed log p(w | z) after every 10th sweep.
  std::vector<double> log_likelihood_trace;

  double phi_at(std::size_t topic, std::size_t word) const { return phi[topic * vocab.size() + word]; }

  // False when the second half of the trace drops by more than `tolerance`
  // (relative) below its running maximum. Monitoring only.
  bool likelihood_settled(double tolerance = 1e-2) const;
};

// Throws EmptyInputError on an empty corpus or vocabulary, ArgumentError on
// k < 1 or fewer than k documents.
LdaModel train_lda(const std::vector<Document>& docs, std::size_t k, const LdaOptions& options = {});

// Gibbs inference with phi held fixed. Unseen stems are skipped; a document
// with no known stem gets the uniform distribution. Theta is the average of
// the per-sweep estimates over the second half of the sweeps.
std::vector<double> infer_lda(const LdaModel& model, const Document& doc, int iterations = 50,
                              std::uint64_t seed = 42);

// ---------------------------------------------------------------------------
// LSI (truncated SVD of the log(1 + tf) document-term matrix)

// Row-major dense matrix.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Sparse rows (documents) over `cols` columns (terms).
struct SparseRowMatrix {
  std::size_t cols = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;

  static SparseRowMatrix from_dense(const DenseMatrix& m);
};

struct SvdOptions {
  // Gram matrices up to this order are diagonalized directly by cyclic
  // Jacobi; larger ones go through block subspace iteration with a
  // Rayleigh-Ritz step (also solved by Jacobi).
  std::size_t dense_limit = 400;
  int max_iterations = 5000;
  std::uint64_t seed = 42;
};

struct TruncatedSvd {
  std::vector<double> singular_values;  // k, descending, >= 0
  DenseMatrix right;                    // cols x k (term space)
};

// Rank-k truncated SVD A ~ U S V^T returning S and V. Singular values below
// the numerical rank tolerance (sqrt(m * eps) * s_max) are reported as 0 and
// their V columns zeroed.
TruncatedSvd truncated_svd(const SparseRowMatrix& a, std::size_t k, const SvdOptions& options = {});

// Symmetric eigen-decomposition by cyclic Jacobi rotations. Returns
// eigenvalues in descending order; `vectors` holds them column-wise.
std::vector<double> jacobi_eigen(DenseMatrix symmetric, DenseMatrix& vectors);

struct LsiModel {
  std::size_t k = 0;
  Vocabulary vocab;
  std::vector<double> singular_values;  // descending
  DenseMatrix term_vectors;             // V x k
};

// k is truncated to min(k, |V|, #docs). Throws EmptyInputError on an empty
// corpus or vocabulary, ArgumentError on k < 1.
LsiModel train_lsi(const std::vector<Document>& docs, std::size_t k, std::uint64_t seed = 42,
                   SvdOptions options = {});
LsiModel lsi_from_matrix(const SparseRowMatrix& doc_term, Vocabulary vocab, std::size_t k,
                         const SvdOptions& options);

// Folding-in: coordinate j = (d . v_j) / s_j with d = log(1 + tf); a zero
// singular value gives a zero coordinate.
std::vector<double> project_lsi(const LsiModel& model, const Document& doc);
std::vector<double> project_lsi_vector(const LsiModel& model,
                                       const std::vector<std::pair<std::size_t, double>>& term_weights);

// ---------------------------------------------------------------------------
// Background corpus and model sets

struct BackgroundDoc {
  Category category;
  std::string text;
};

// JSON Lines {"category": ..., "text": ...}; unknown fields rejected.
std::vector<BackgroundDoc> parse_background(std::istream& in);
std::vector<BackgroundDoc> load_background(const std::string& path);

struct TopicModelEntry {
  TopicModelSpec spec;
  std::variant<LdaModel, LsiModel> model;

  std::size_t dimension() const;
};

struct TopicTrainingOptions {
  std::vector<std::size_t> ks = {20, 50, 100, 200};
  std::vector<Method> methods = {Method::kLda, Method::kLsi};
  int lda_iterations = 500;
  double lda_beta = 0.01;
  int inference_iterations = 50;
  std::size_t workers = 1;
  std::uint64_t seed = 42;
};

// Fitted models, immutable once built. Feature slots are named
// "<method>:<category>:k<kkk>:t<iii>" (zero padded), in model order.
class TopicModelSet {
 public:
  TopicModelSet() = default;
  TopicModelSet(Language lang, std::vector<TopicModelEntry> entries, int inference_iterations);

  // One model per (category present in the background, k, method); each
  // model sees only the documents tagged with its category.
  static TopicModelSet train(const std::vector<BackgroundDoc>& background, Language lang,
                             const TopicTrainingOptions& options,
                             const textprep::AbbreviationMap& abbreviations = {});

  Language lang() const { return lang_; }
  const std::vector<TopicModelEntry>& entries() const { return entries_; }
  int inference_iterations() const { return inference_iterations_; }
  std::size_t dimension() const;

  // Concatenated topic features of one stemmed document.
  std::vector<std::pair<std::string, double>> embed(const Document& doc, std::uint64_t seed) const;
  std::vector<std::string> slot_names() const;

  std::string to_json() const;
  static TopicModelSet from_json(std::string_view text);
  void save(const std::string& path) const;
  static TopicModelSet load(const std::string& path);

 private:
  Language lang_ = Language::kEnglish;
  std::vector<TopicModelEntry> entries_;
  int inference_iterations_ = 50;
};

}  // namespace bullysig::topics
