#include "bullysig/topics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "bullysig/error.hpp"
#include "bullysig/parallel.hpp"
#include "bullysig/random.hpp"

namespace bullysig::topics {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

// Orthonormalizes the columns of q (rows x cols) in place by modified
// Gram-Schmidt, applied twice. Columns that collapse are replaced by fresh
// random directions.
void orthonormalize(DenseMatrix& q, Rng& rng) {
  const std::size_t n = q.rows;
  for (std::size_t j = 0; j < q.cols; ++j) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      double before = 0.0;
      for (std::size_t r = 0; r < n; ++r) before += q(r, j) * q(r, j);
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < j; ++i) {
          double d = 0.0;
          for (std::size_t r = 0; r < n; ++r) d += q(r, i) * q(r, j);
          for (std::size_t r = 0; r < n; ++r) q(r, j) -= d * q(r, i);
        }
      }
      double norm = 0.0;
      for (std::size_t r = 0; r < n; ++r) norm += q(r, j) * q(r, j);
      if (norm > 1e-20 * std::max(before, 1e-300) && norm > 1e-280) {
        const double inv = 1.0 / std::sqrt(norm);
        for (std::size_t r = 0; r < n; ++r) q(r, j) *= inv;
        break;
      }
      for (std::size_t r = 0; r < n; ++r) q(r, j) = rng.uniform01() - 0.5;
    }
  }
}

// y = G x for the Gram operator of `a` in the smaller dimension.
class GramOperator {
 public:
  GramOperator(const SparseRowMatrix& a, bool column_space) : a_(a), column_space_(column_space) {}

  std::size_t order() const { return column_space_ ? a_.cols : a_.rows.size(); }

  // Y = G X, X and Y of shape order x p.
  void apply(const DenseMatrix& x, DenseMatrix& y) const {
    const std::size_t p = x.cols;
    y = DenseMatrix(order(), p);
    std::vector<double> tmp(p);
    if (column_space_) {
      // A^T (A x): per document row, t = row . x, then y += row^T t.
      for (const auto& row : a_.rows) {
        std::fill(tmp.begin(), tmp.end(), 0.0);
        for (const auto& [c, v] : row)
          for (std::size_t j = 0; j < p; ++j) tmp[j] += v * x(c, j);
        for (const auto& [c, v] : row)
          for (std::size_t j = 0; j < p; ++j) y(c, j) += v * tmp[j];
      }
    } else {
      // A (A^T x): z = A^T x (cols x p), then y_r = row_r . z.
      DenseMatrix z(a_.cols, p);
      for (std::size_t r = 0; r < a_.rows.size(); ++r)
        for (const auto& [c, v] : a_.rows[r])
          for (std::size_t j = 0; j < p; ++j) z(c, j) += v * x(r, j);
      for (std::size_t r = 0; r < a_.rows.size(); ++r)
        for (const auto& [c, v] : a_.rows[r])
          for (std::size_t j = 0; j < p; ++j) y(r, j) += v * z(c, j);
    }
  }

  DenseMatrix explicit_matrix() const {
    const std::size_t m = order();
    DenseMatrix g(m, m);
    if (column_space_) {
      for (const auto& row : a_.rows)
        for (const auto& [ci, vi] : row)
          for (const auto& [cj, vj] : row) g(ci, cj) += vi * vj;
    } else {
      std::vector<double> dense(a_.cols, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        for (const auto& [c, v] : a_.rows[i]) dense[c] = v;
        for (std::size_t j = i; j < m; ++j) {
          double s = 0.0;
          for (const auto& [c, v] : a_.rows[j]) s += dense[c] * v;
          g(i, j) = s;
          g(j, i) = s;
        }
        for (const auto& [c, v] : a_.rows[i]) dense[c] = 0.0;
      }
    }
    return g;
  }

 private:
  const SparseRowMatrix& a_;
  bool column_space_;
};

// Top eigenpairs of the Gram operator by block subspace iteration.
std::vector<double> subspace_eigen(const GramOperator& g, std::size_t k, const SvdOptions& options,
                                   DenseMatrix& vectors) {
  const std::size_t m = g.order();
  const std::size_t p = std::min(m, k + 10);
  Rng rng(options.seed);
  DenseMatrix q(m, p);
  for (auto& v : q.data) v = rng.uniform01() - 0.5;
  orthonormalize(q, rng);

  DenseMatrix z;
  std::vector<double> theta;
  DenseMatrix y;
  for (int it = 1; it <= options.max_iterations; ++it) {
    g.apply(q, z);
    const bool check = it % 10 == 0 || it == options.max_iterations;
    if (check) {
      DenseMatrix t(p, p);
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) {
          double s = 0.0;
          for (std::size_t r = 0; r < m; ++r) s += q(r, i) * z(r, j);
          t(i, j) = s;
        }
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j) t(i, j) = t(j, i) = 0.5 * (t(i, j) + t(j, i));
      theta = jacobi_eigen(t, y);
      const double scale = std::max(std::abs(theta.front()), 1e-300);
      double worst = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        double res = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
          double gz = 0.0;
          double qy = 0.0;
          for (std::size_t i = 0; i < p; ++i) {
            gz += z(r, i) * y(i, j);
            qy += q(r, i) * y(i, j);
          }
          const double d = gz - theta[j] * qy;
          res += d * d;
        }
        worst = std::max(worst, std::sqrt(res));
      }
      if (worst <= 1e-12 * scale || it == options.max_iterations) {
        vectors = DenseMatrix(m, k);
        for (std::size_t r = 0; r < m; ++r)
          for (std::size_t j = 0; j < k; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < p; ++i) s += q(r, i) * y(i, j);
            vectors(r, j) = s;
          }
        theta.resize(k);
        return theta;
      }
    }
    q = z;
    orthonormalize(q, rng);
  }
  return theta;  // unreachable: the last iteration always returns
}

void check_docs(const std::vector<Document>& docs, std::size_t k) {
  if (k < 1) throw ArgumentError("topic count k must be at least 1");
  if (docs.empty()) throw EmptyInputError("topic model training: empty corpus");
  const bool any = std::any_of(docs.begin(), docs.end(), [](const Document& d) { return !d.empty(); });
  if (!any) throw EmptyInputError("topic model training: empty vocabulary");
}

std::map<std::size_t, double> log_tf(const Vocabulary& vocab, const Document& doc) {
  std::map<std::size_t, double> counts;
  for (const auto& w : doc) {
    if (const auto idx = vocab.find(w)) counts[*idx] += 1.0;
  }
  for (auto& [idx, c] : counts) c = std::log1p(c);
  return counts;
}

std::string pad(std::size_t v, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, v);
  return buf;
}

}  // namespace

std::string_view to_string(Method m) { return m == Method::kLda ? "lda" : "lsi"; }

std::optional<Method> parse_method(std::string_view s) {
  if (s == "lda") return Method::kLda;
  if (s == "lsi") return Method::kLsi;
  return std::nullopt;
}

Vocabulary::Vocabulary(std::vector<std::string> sorted_words) : words_(std::move(sorted_words)) {
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
}

Vocabulary Vocabulary::build(const std::vector<Document>& docs) {
  std::vector<std::string> words;
  for (const auto& d : docs) words.insert(words.end(), d.begin(), d.end());
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  return Vocabulary(std::move(words));
}

std::optional<std::size_t> Vocabulary::find(const std::string& word) const {
  const auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// LDA

bool LdaModel::likelihood_settled(double tolerance) const {
  const std::size_t n = log_likelihood_trace.size();
  if (n < 2) return true;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = n / 2; i < n; ++i) {
    const double v = log_likelihood_trace[i];
    if (v < best - tolerance * std::abs(best)) return false;
    best = std::max(best, v);
  }
  return true;
}

LdaModel train_lda(const std::vector<Document>& docs, std::size_t k, const LdaOptions& options) {
  check_docs(docs, k);
  if (docs.size() < k)
    throw ArgumentError("train_lda: " + std::to_string(docs.size()) + " documents for k = " +
                        std::to_string(k));

  LdaModel model;
  model.k = k;
  model.alpha = options.alpha.value_or(50.0 / static_cast<double>(k));
  model.beta = options.beta;
  model.vocab = Vocabulary::build(docs);
  const std::size_t n_words = model.vocab.size();
  const double v_beta = static_cast<double>(n_words) * model.beta;

  std::vector<std::vector<std::uint32_t>> words(docs.size());
  std::vector<std::vector<std::uint32_t>> z(docs.size());
  std::vector<std::uint32_t> n_dk(docs.size() * k, 0);
  std::vector<std::uint32_t> n_wk(n_words * k, 0);
  std::vector<std::uint32_t> n_k(k, 0);

  Rng rng(options.seed);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& w : docs[d]) {
      const auto wi = static_cast<std::uint32_t>(*model.vocab.find(w));
      const auto t = static_cast<std::uint32_t>(rng.below(k));
      words[d].push_back(wi);
      z[d].push_back(t);
      ++n_dk[d * k + t];
      ++n_wk[wi * k + t];
      ++n_k[t];
    }
  }

  auto log_likelihood = [&] {
    double ll = 0.0;
    const double lg_beta = std::lgamma(model.beta);
    for (std::size_t t = 0; t < k; ++t) {
      ll += std::lgamma(v_beta) - std::lgamma(static_cast<double>(n_k[t]) + v_beta);
      for (std::size_t w = 0; w < n_words; ++w) {
        const auto c = n_wk[w * k + t];
        if (c > 0) ll += std::lgamma(static_cast<double>(c) + model.beta) - lg_beta;
      }
    }
    return ll;
  };

  std::vector<double> cumulative(k);
  for (int it = 1; it <= options.iterations; ++it) {
    for (std::size_t d = 0; d < docs.size(); ++d) {
      std::uint32_t* doc_counts = &n_dk[d * k];
      for (std::size_t i = 0; i < words[d].size(); ++i) {
        const std::uint32_t w = words[d][i];
        std::uint32_t* word_counts = &n_wk[static_cast<std::size_t>(w) * k];
        const std::uint32_t old = z[d][i];
        --doc_counts[old];
        --word_counts[old];
        --n_k[old];

        double total = 0.0;
        for (std::size_t t = 0; t < k; ++t) {
          total += (word_counts[t] + model.beta) / (n_k[t] + v_beta) * (doc_counts[t] + model.alpha);
          cumulative[t] = total;
        }
        const double u = rng.uniform01() * total;
        std::size_t t = 0;
        while (t + 1 < k && cumulative[t] <= u) ++t;

        z[d][i] = static_cast<std::uint32_t>(t);
        ++doc_counts[t];
        ++word_counts[t];
        ++n_k[t];
      }
    }
    if (it % 10 == 0) model.log_likelihood_trace.push_back(log_likelihood());
  }

  model.phi.assign(k * n_words, 0.0);
  for (std::size_t t = 0; t < k; ++t) {
    const double denom = static_cast<double>(n_k[t]) + v_beta;
    double row = 0.0;
    for (std::size_t w = 0; w < n_words; ++w) {
      const double v = (n_wk[w * k + t] + model.beta) / denom;
      model.phi[t * n_words + w] = v;
      row += v;
    }
    for (std::size_t w = 0; w < n_words; ++w) model.phi[t * n_words + w] /= row;
  }
  return model;
}

std::vector<double> infer_lda(const LdaModel& model, const Document& doc, int iterations,
                              std::uint64_t seed) {
  const std::size_t k = model.k;
  std::vector<std::size_t> words;
  for (const auto& w : doc) {
    if (const auto idx = model.vocab.find(w)) words.push_back(*idx);
  }
  std::vector<double> theta(k, 1.0 / static_cast<double>(k));
  if (words.empty() || k == 0) return theta;

  Rng rng(seed);
  std::vector<std::size_t> z(words.size());
  std::vector<double> counts(k, 0.0);
  for (std::size_t i = 0; i < words.size(); ++i) {
    z[i] = static_cast<std::size_t>(rng.below(k));
    counts[z[i]] += 1.0;
  }

  iterations = std::max(iterations, 1);
  const int burn_in = iterations / 2;
  std::vector<double> acc(k, 0.0);
  std::vector<double> cumulative(k);
  const double denom = static_cast<double>(words.size()) + static_cast<double>(k) * model.alpha;
  int samples = 0;
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      counts[z[i]] -= 1.0;
      double total = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        total += model.phi_at(t, words[i]) * (counts[t] + model.alpha);
        cumulative[t] = total;
      }
      const double u = rng.uniform01() * total;
      std::size_t t = 0;
      while (t + 1 < k && cumulative[t] <= u) ++t;
      z[i] = t;
      counts[t] += 1.0;
    }
    if (it >= burn_in) {
      for (std::size_t t = 0; t < k; ++t) acc[t] += (counts[t] + model.alpha) / denom;
      ++samples;
    }
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < k; ++t) {
    theta[t] = acc[t] / samples;
    sum += theta[t];
  }
  for (auto& v : theta) v /= sum;
  return theta;
}

// ---------------------------------------------------------------------------
// SVD / LSI

SparseRowMatrix SparseRowMatrix::from_dense(const DenseMatrix& m) {
  SparseRowMatrix s;
  s.cols = m.cols;
  s.rows.resize(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c)
      if (m(r, c) != 0.0) s.rows[r].emplace_back(c, m(r, c));
  return s;
}

std::vector<double> jacobi_eigen(DenseMatrix a, DenseMatrix& vectors) {
  const std::size_t n = a.rows;
  vectors = DenseMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i) vectors(i, i) = 1.0;

  double total = 0.0;
  for (const double v : a.data) total += v * v;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off <= 1e-32 * total || off == 0.0) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double apr = a(p, r);
          const double aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = vectors(r, p);
          const double vrq = vectors(r, q);
          vectors(r, p) = c * vrp - s * vrq;
          vectors(r, q) = s * vrp + c * vrq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&a](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  std::vector<double> values(n);
  DenseMatrix sorted(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    values[j] = a(order[j], order[j]);
    for (std::size_t r = 0; r < n; ++r) sorted(r, j) = vectors(r, order[j]);
  }
  vectors = std::move(sorted);
  return values;
}

TruncatedSvd truncated_svd(const SparseRowMatrix& a, std::size_t k, const SvdOptions& options) {
  const std::size_t n_rows = a.rows.size();
  const std::size_t n_cols = a.cols;
  const bool column_space = n_cols <= n_rows;
  const GramOperator gram(a, column_space);
  const std::size_t m = gram.order();
  k = std::min(k, m);

  DenseMatrix eigvecs;
  std::vector<double> eigvals;
  if (m <= options.dense_limit) {
    eigvals = jacobi_eigen(gram.explicit_matrix(), eigvecs);
  } else {
    eigvals = subspace_eigen(gram, k, options, eigvecs);
  }

  TruncatedSvd out;
  out.singular_values.assign(k, 0.0);
  const double top = eigvals.empty() ? 0.0 : std::max(eigvals.front(), 0.0);
  const double cutoff = std::sqrt(static_cast<double>(m) * std::numeric_limits<double>::epsilon()) * std::sqrt(top);
  for (std::size_t j = 0; j < k; ++j) {
    const double s = std::sqrt(std::max(eigvals[j], 0.0));
    out.singular_values[j] = s > cutoff ? s : 0.0;
  }

  out.right = DenseMatrix(n_cols, k);
  for (std::size_t j = 0; j < k; ++j) {
    const double s = out.singular_values[j];
    if (s == 0.0) continue;
    if (column_space) {
      for (std::size_t c = 0; c < n_cols; ++c) out.right(c, j) = eigvecs(c, j);
    } else {
      // v_j = A^T u_j / s_j
      for (std::size_t r = 0; r < n_rows; ++r) {
        const double u = eigvecs(r, j);
        for (const auto& [c, v] : a.rows[r]) out.right(c, j) += v * u / s;
      }
    }
  }
  return out;
}

LsiModel lsi_from_matrix(const SparseRowMatrix& doc_term, Vocabulary vocab, std::size_t k,
                         const SvdOptions& options) {
  if (k < 1) throw ArgumentError("topic count k must be at least 1");
  if (doc_term.rows.empty()) throw EmptyInputError("train_lsi: empty corpus");
  if (doc_term.cols == 0) throw EmptyInputError("train_lsi: empty vocabulary");
  const std::size_t k_eff = std::min({k, doc_term.cols, doc_term.rows.size()});
  auto svd = truncated_svd(doc_term, k_eff, options);
  LsiModel model;
  model.k = k_eff;
  model.vocab = std::move(vocab);
  model.singular_values = std::move(svd.singular_values);
  model.term_vectors = std::move(svd.right);
  return model;
}

LsiModel train_lsi(const std::vector<Document>& docs, std::size_t k, std::uint64_t seed, SvdOptions options) {
  check_docs(docs, k);
  Vocabulary vocab = Vocabulary::build(docs);
  SparseRowMatrix m;
  m.cols = vocab.size();
  for (const auto& doc : docs) {
    const auto weights = log_tf(vocab, doc);
    m.rows.emplace_back(weights.begin(), weights.end());
  }
  options.seed = seed;
  return lsi_from_matrix(m, std::move(vocab), k, options);
}

std::vector<double> project_lsi_vector(const LsiModel& model,
                                       const std::vector<std::pair<std::size_t, double>>& term_weights) {
  std::vector<double> out(model.k, 0.0);
  for (const auto& [t, w] : term_weights)
    for (std::size_t j = 0; j < model.k; ++j) out[j] += w * model.term_vectors(t, j);
  for (std::size_t j = 0; j < model.k; ++j) {
    const double s = model.singular_values[j];
    out[j] = s > 0.0 ? out[j] / s : 0.0;
  }
  return out;
}

std::vector<double> project_lsi(const LsiModel& model, const Document& doc) {
  const auto weights = log_tf(model.vocab, doc);
  return project_lsi_vector(model, {weights.begin(), weights.end()});
}

// ---------------------------------------------------------------------------
// Background corpus and model sets

std::vector<BackgroundDoc> parse_background(std::istream& in) {
  std::vector<BackgroundDoc> docs;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw ParseError(line, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line, "record must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
      if (key != "category" && key != "text") throw ParseError(line, "unknown field '" + key + "'");
    }
    if (!obj.contains("category") || !obj["category"].is_string())
      throw ParseError(line, "field 'category' must be a string");
    if (!obj.contains("text") || !obj["text"].is_string())
      throw ParseError(line, "field 'text' must be a string");
    const auto category = parse_category(obj["category"].get<std::string>());
    if (!category) throw ParseError(line, "unknown category '" + obj["category"].get<std::string>() + "'");
    docs.push_back({*category, obj["text"].get<std::string>()});
  }
  return docs;
}

std::vector<BackgroundDoc> load_background(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open background corpus '" + path + "'");
  return parse_background(in);
}

std::size_t TopicModelEntry::dimension() const {
  return std::visit([](const auto& m) { return m.k; }, model);
}

TopicModelSet::TopicModelSet(Language lang, std::vector<TopicModelEntry> entries, int inference_iterations)
    : lang_(lang), entries_(std::move(entries)), inference_iterations_(inference_iterations) {}

TopicModelSet TopicModelSet::train(const std::vector<BackgroundDoc>& background, Language lang,
                                   const TopicTrainingOptions& options,
                                   const textprep::AbbreviationMap& abbreviations) {
  std::map<Category, std::vector<Document>> by_category;
  for (const auto& doc : background) {
    auto tokens = textprep::topic_tokens(doc.text, lang, abbreviations);
    if (!tokens.empty()) by_category[doc.category].push_back(std::move(tokens));
  }
  if (by_category.empty()) throw EmptyInputError("background corpus has no usable documents");

  std::vector<TopicModelSpec> specs;
  for (const auto& [category, docs] : by_category)
    for (const auto k : options.ks)
      for (const auto method : options.methods) specs.push_back({method, k, category});

  std::vector<std::optional<TopicModelEntry>> slots(specs.size());
  parallel_for(specs.size(), options.workers, [&](std::size_t i) {
    const auto& spec = specs[i];
    const auto& docs = by_category.at(spec.category);
    const std::string tag = std::string(to_string(spec.method)) + ":" +
                            std::string(bullysig::to_string(spec.category)) + ":" + std::to_string(spec.k);
    const std::uint64_t seed = derive_seed(options.seed, tag);
    try {
      if (spec.method == Method::kLda) {
        LdaOptions lda;
        lda.beta = options.lda_beta;
        lda.iterations = options.lda_iterations;
        lda.seed = seed;
        slots[i] = TopicModelEntry{spec, train_lda(docs, spec.k, lda)};
      } else {
        slots[i] = TopicModelEntry{spec, train_lsi(docs, spec.k, seed)};
      }
    } catch (const Error& e) {
      throw ArgumentError("topic model " + tag + ": " + e.what());
    }
  });

  std::vector<TopicModelEntry> entries;
  entries.reserve(slots.size());
  for (auto& s : slots) entries.push_back(std::move(*s));
  return TopicModelSet(lang, std::move(entries), options.inference_iterations);
}

std::size_t TopicModelSet::dimension() const {
  std::size_t d = 0;
  for (const auto& e : entries_) d += e.dimension();
  return d;
}

std::vector<std::string> TopicModelSet::slot_names() const {
  std::vector<std::string> names;
  for (const auto& e : entries_) {
    const std::string prefix = std::string(to_string(e.spec.method)) + ":" +
                               std::string(bullysig::to_string(e.spec.category)) + ":k" + pad(e.spec.k, 3) + ":t";
    for (std::size_t t = 0; t < e.dimension(); ++t) names.push_back(prefix + pad(t, 3));
  }
  return names;
}

std::vector<std::pair<std::string, double>> TopicModelSet::embed(const Document& doc, std::uint64_t seed) const {
  const auto names = slot_names();
  std::vector<std::pair<std::string, double>> out;
  out.reserve(names.size());
  std::size_t slot = 0;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    std::vector<double> values;
    if (const auto* lda = std::get_if<LdaModel>(&e.model)) {
      values = infer_lda(*lda, doc, inference_iterations_, mix_seed(seed + i));
    } else {
      values = project_lsi(std::get<LsiModel>(e.model), doc);
    }
    for (const double v : values) out.emplace_back(names[slot++], v);
  }
  return out;
}

std::string TopicModelSet::to_json() const {
  json root;
  root["format"] = "bullysig-topics";
  root["version"] = kFormatVersion;
  root["lang"] = bullysig::to_string(lang_);
  root["inference_iterations"] = inference_iterations_;
  json models = json::array();
  for (const auto& e : entries_) {
    json m;
    m["method"] = to_string(e.spec.method);
    m["category"] = bullysig::to_string(e.spec.category);
    m["k"] = e.spec.k;
    if (const auto* lda = std::get_if<LdaModel>(&e.model)) {
      m["topics"] = lda->k;
      m["alpha"] = lda->alpha;
      m["beta"] = lda->beta;
      m["vocab"] = lda->vocab.words();
      m["phi"] = lda->phi;
      m["log_likelihood"] = lda->log_likelihood_trace;
    } else {
      const auto& lsi = std::get<LsiModel>(e.model);
      m["topics"] = lsi.k;
      m["vocab"] = lsi.vocab.words();
      m["singular_values"] = lsi.singular_values;
      m["term_vectors"] = lsi.term_vectors.data;
    }
    models.push_back(std::move(m));
  }
  root["models"] = std::move(models);
  return root.dump();
}

TopicModelSet TopicModelSet::from_json(std::string_view text) {
  try {
    const json root = json::parse(text);
    if (root.value("format", "") != "bullysig-topics") throw ParseError(0, "not a topic model file");
    if (root.at("version").get<int>() != kFormatVersion) throw ParseError(0, "unsupported topic model version");
    const auto lang = parse_language(root.at("lang").get<std::string>());
    if (!lang) throw ParseError(0, "bad language in topic model file");
    std::vector<TopicModelEntry> entries;
    for (const auto& m : root.at("models")) {
      TopicModelSpec spec;
      const auto method = parse_method(m.at("method").get<std::string>());
      const auto category = parse_category(m.at("category").get<std::string>());
      if (!method || !category) throw ParseError(0, "bad model header in topic model file");
      spec.method = *method;
      spec.category = *category;
      spec.k = m.at("k").get<std::size_t>();
      Vocabulary vocab(m.at("vocab").get<std::vector<std::string>>());
      const auto topics = m.at("topics").get<std::size_t>();
      if (spec.method == Method::kLda) {
        LdaModel lda;
        lda.k = topics;
        lda.alpha = m.at("alpha").get<double>();
        lda.beta = m.at("beta").get<double>();
        lda.vocab = std::move(vocab);
        lda.phi = m.at("phi").get<std::vector<double>>();
        lda.log_likelihood_trace = m.value("log_likelihood", std::vector<double>{});
        if (lda.phi.size() != lda.k * lda.vocab.size()) throw ParseError(0, "phi has the wrong size");
        entries.push_back({spec, std::move(lda)});
      } else {
        LsiModel lsi;
        lsi.k = topics;
        lsi.vocab = std::move(vocab);
        lsi.singular_values = m.at("singular_values").get<std::vector<double>>();
        lsi.term_vectors.rows = lsi.vocab.size();
        lsi.term_vectors.cols = topics;
        lsi.term_vectors.data = m.at("term_vectors").get<std::vector<double>>();
        if (lsi.singular_values.size() != topics || lsi.term_vectors.data.size() != topics * lsi.vocab.size())
          throw ParseError(0, "LSI matrices have the wrong size");
        entries.push_back({spec, std::move(lsi)});
      }
    }
    return TopicModelSet(*lang, std::move(entries), root.at("inference_iterations").get<int>());
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("malformed topic model file: ") + e.what());
  }
}

void TopicModelSet::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << to_json() << '\n';
}

TopicModelSet TopicModelSet::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open topic model file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace bullysig::topics
