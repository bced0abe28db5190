#include "bullysig/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "bullysig/error.hpp"
#include "bullysig/random.hpp"

namespace bullysig {

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 12> kCategoryNames = {
    "threat_blackmail", "insult_general",    "insult_relatives", "insult_discrimination",
    "curse_exclusion",  "defamation",        "sexual_talk",      "sexual_harassment",
    "defense_bystander", "defense_victim",   "encouragement",    "other",
};

constexpr std::array<std::string_view, 4> kRoleNames = {
    "bully", "victim", "bystander_defender", "bystander_assistant"};

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
  });
}

const std::string& require_string(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, std::string("missing required field '") + key + "'");
  if (!it->is_string()) throw ParseError(line, std::string("field '") + key + "' must be a string");
  return it->get_ref<const std::string&>();
}

std::optional<std::string> optional_string(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParseError(line, std::string("field '") + key + "' must be a string or null");
  return it->get<std::string>();
}

std::size_t require_offset(const json& span, const char* key, std::size_t line) {
  const auto it = span.find(key);
  if (it == span.end()) throw ParseError(line, std::string("span is missing '") + key + "'");
  if (!it->is_number_integer()) throw ParseError(line, std::string("span '") + key + "' must be an integer");
  const auto v = it->get<std::int64_t>();
  if (v < 0) throw IntegrityError(line, std::string("span '") + key + "' is negative");
  return static_cast<std::size_t>(v);
}

Post parse_post(const std::string& raw, std::size_t line) {
  json obj;
  try {
    obj = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw ParseError(line, std::string("malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(line, "record must be a JSON object");

  static const std::set<std::string, std::less<>> kKnown = {
      "id", "lang", "text", "conversation_id", "label", "role", "spans"};
  for (const auto& [key, value] : obj.items()) {
    if (!kKnown.contains(key)) throw ParseError(line, "unknown field '" + key + "'");
  }

  Post post;
  post.id = require_string(obj, "id", line);
  const auto lang = parse_language(require_string(obj, "lang", line));
  if (!lang) throw ParseError(line, "field 'lang' must be \"en\" or \"nl\"");
  post.lang = *lang;
  post.text = require_string(obj, "text", line);
  post.conversation_id = optional_string(obj, "conversation_id", line);

  const auto label = obj.find("label");
  if (label == obj.end()) throw ParseError(line, "missing required field 'label'");
  if (!label->is_boolean()) throw ParseError(line, "field 'label' must be a boolean");
  post.label = label->get<bool>();

  if (auto role = optional_string(obj, "role", line)) {
    const auto parsed = parse_role(*role);
    if (!parsed) throw ParseError(line, "unknown role '" + *role + "'");
    post.role = *parsed;
  }

  if (const auto spans = obj.find("spans"); spans != obj.end()) {
    if (!spans->is_array()) throw ParseError(line, "field 'spans' must be an array");
    for (const auto& s : *spans) {
      if (!s.is_object()) throw ParseError(line, "span must be an object");
      for (const auto& [key, value] : s.items()) {
        if (key != "category" && key != "begin" && key != "end")
          throw ParseError(line, "unknown span field '" + key + "'");
      }
      const auto& name = require_string(s, "category", line);
      const auto category = parse_category(name);
      if (!category) throw ParseError(line, "unknown category '" + name + "'");
      post.spans.push_back({*category, require_offset(s, "begin", line), require_offset(s, "end", line)});
    }
  }

  if (post.id.empty()) throw IntegrityError(line, "empty id");
  if (is_blank(post.text)) throw IntegrityError(line, "post '" + post.id + "' has blank text");
  if (post.label && !post.role)
    throw IntegrityError(line, "positive post '" + post.id + "' has no author role");
  if (!post.label && post.role)
    throw IntegrityError(line, "negative post '" + post.id + "' carries an author role");
  const std::size_t length = utf8_length(post.text);
  for (const auto& span : post.spans) {
    if (span.begin >= span.end || span.end > length) {
      throw IntegrityError(line, "span [" + std::to_string(span.begin) + ", " +
                                     std::to_string(span.end) + ") out of bounds for post '" +
                                     post.id + "' of length " + std::to_string(length));
    }
  }
  return post;
}

}  // namespace

std::string_view to_string(Language lang) { return lang == Language::kDutch ? "nl" : "en"; }

std::optional<Language> parse_language(std::string_view s) {
  if (s == "en") return Language::kEnglish;
  if (s == "nl") return Language::kDutch;
  return std::nullopt;
}

std::string_view to_string(Category c) { return kCategoryNames[static_cast<std::size_t>(c)]; }

std::optional<Category> parse_category(std::string_view s) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    if (kCategoryNames[i] == s) return static_cast<Category>(i);
  }
  return std::nullopt;
}

bool always_positive(Category c) {
  switch (c) {
    case Category::kSexualTalk:
    case Category::kSexualHarassment:
    case Category::kInsultGeneral:
    case Category::kOther:
      return false;
    default:
      return true;
  }
}

std::string_view to_string(AuthorRole r) { return kRoleNames[static_cast<std::size_t>(r)]; }

std::optional<AuthorRole> parse_role(std::string_view s) {
  for (std::size_t i = 0; i < kRoleNames.size(); ++i) {
    if (kRoleNames[i] == s) return static_cast<AuthorRole>(i);
  }
  return std::nullopt;
}

bool Post::has_category(Category c) const {
  return std::any_of(spans.begin(), spans.end(),
                     [c](const AnnotatedSpan& s) { return s.category == c; });
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (const char c : s) {
    // Count every byte that is not a continuation byte.
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::vector<Post> parse_corpus(std::istream& in, std::optional<Language> expected_lang) {
  std::vector<Post> posts;
  std::unordered_set<std::string> ids;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (is_blank(raw)) continue;
    Post post = parse_post(raw, line);
    if (expected_lang && post.lang != *expected_lang) {
      throw IntegrityError(line, "post '" + post.id + "' has lang '" +
                                     std::string(to_string(post.lang)) + "', expected '" +
                                     std::string(to_string(*expected_lang)) + "'");
    }
    if (!ids.insert(post.id).second) throw IntegrityError(line, "duplicate id '" + post.id + "'");
    posts.push_back(std::move(post));
  }
  return posts;
}

std::vector<Post> load_corpus(const std::string& path, std::optional<Language> expected_lang) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file '" + path + "'");
  return parse_corpus(in, expected_lang);
}

std::string serialize_post(const Post& post) {
  nlohmann::ordered_json obj;
  obj["id"] = post.id;
  obj["lang"] = to_string(post.lang);
  obj["text"] = post.text;
  obj["conversation_id"] = post.conversation_id ? nlohmann::ordered_json(*post.conversation_id)
                                                 : nlohmann::ordered_json(nullptr);
  obj["label"] = post.label;
  obj["role"] = post.role ? nlohmann::ordered_json(to_string(*post.role))
                          : nlohmann::ordered_json(nullptr);
  auto spans = nlohmann::ordered_json::array();
  for (const auto& s : post.spans) {
    nlohmann::ordered_json span;
    span["category"] = to_string(s.category);
    span["begin"] = s.begin;
    span["end"] = s.end;
    spans.push_back(std::move(span));
  }
  obj["spans"] = std::move(spans);
  return obj.dump();
}

void write_corpus(std::ostream& out, const std::vector<Post>& posts) {
  for (const auto& post : posts) out << serialize_post(post) << '\n';
}

std::vector<std::string> validate_labels(const std::vector<Post>& posts) {
  std::vector<std::string> violations;
  for (const auto& post : posts) {
    if (post.label) continue;
    std::vector<std::string> offending;
    for (const auto& span : post.spans) {
      if (always_positive(span.category)) {
        const std::string name(to_string(span.category));
        if (std::find(offending.begin(), offending.end(), name) == offending.end())
          offending.push_back(name);
      }
    }
    if (offending.empty()) continue;
    std::string msg = "post '" + post.id + "' is labeled negative but carries always-positive span(s): ";
    for (std::size_t i = 0; i < offending.size(); ++i) {
      if (i > 0) msg += ", ";
      msg += offending[i];
    }
    violations.push_back(std::move(msg));
  }
  return violations;
}

CorpusStats corpus_stats(const std::vector<Post>& posts) {
  if (posts.empty()) throw EmptyInputError("corpus_stats: empty corpus");
  CorpusStats stats;
  stats.n_posts = posts.size();
  for (const auto& post : posts) {
    if (post.label) ++stats.n_positive;
    for (const auto& span : post.spans) ++stats.per_category_counts[span.category];
  }
  stats.positive_ratio = static_cast<double>(stats.n_positive) / static_cast<double>(stats.n_posts);
  return stats;
}

SplitIndices holdout_split_indices(std::size_t n, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw ArgumentError("holdout fraction must lie strictly between 0 and 1");
  const auto n_holdout = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
  if (n_holdout < 1) throw ArgumentError("holdout fraction selects no posts");
  if (n_holdout >= n) throw ArgumentError("holdout fraction leaves no held-in posts");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  SplitIndices split;
  split.holdout.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_holdout));
  split.held_in.assign(order.begin() + static_cast<std::ptrdiff_t>(n_holdout), order.end());
  std::sort(split.holdout.begin(), split.holdout.end());
  std::sort(split.held_in.begin(), split.held_in.end());
  return split;
}

CorpusSplit holdout_split(const std::vector<Post>& posts, double fraction, std::uint64_t seed) {
  const auto idx = holdout_split_indices(posts.size(), fraction, seed);
  CorpusSplit split;
  split.held_in.reserve(idx.held_in.size());
  split.holdout.reserve(idx.holdout.size());
  for (const auto i : idx.held_in) split.held_in.push_back(posts[i]);
  for (const auto i : idx.holdout) split.holdout.push_back(posts[i]);
  return split;
}

std::vector<std::vector<std::size_t>> stratified_kfold(const std::vector<bool>& labels,
                                                       std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ArgumentError("stratified_kfold: k must be at least 2");
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
  if (pos.size() < k)
    throw StratificationError("stratified_kfold: " + std::to_string(pos.size()) +
                              " positive instance(s) cannot fill " + std::to_string(k) + " folds");
  if (neg.size() < k)
    throw StratificationError("stratified_kfold: " + std::to_string(neg.size()) +
                              " negative instance(s) cannot fill " + std::to_string(k) + " folds");

  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(pos));
  rng.shuffle(std::span<std::size_t>(neg));
  std::size_t fold = static_cast<std::size_t>(rng.below(k));

  std::vector<std::vector<std::size_t>> folds(k);
  for (const auto i : pos) {
    folds[fold].push_back(i);
    fold = (fold + 1) % k;
  }
  for (const auto i : neg) {
    folds[fold].push_back(i);
    fold = (fold + 1) % k;
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

}  // namespace bullysig
