#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bullysig {

enum class Language { kEnglish, kDutch };

std::string_view to_string(Language lang);
std::optional<Language> parse_language(std::string_view s);

// Fine-grained annotation categories. The enumerator order is the canonical
// report order.
enum class Category {
  kThreatBlackmail,
  kInsultGeneral,
  kInsultRelatives,
  kInsultDiscrimination,
  kCurseExclusion,
  kDefamation,
  kSexualTalk,
  kSexualHarassment,
  kDefenseBystander,
  kDefenseVictim,
  kEncouragement,
  kOther,
};

inline constexpr std::array<Category, 12> kAllCategories = {
    Category::kThreatBlackmail,  Category::kInsultGeneral,    Category::kInsultRelatives,
    Category::kInsultDiscrimination, Category::kCurseExclusion, Category::kDefamation,
    Category::kSexualTalk,       Category::kSexualHarassment, Category::kDefenseBystander,
    Category::kDefenseVictim,    Category::kEncouragement,    Category::kOther,
};

std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view s);

// Categories whose presence implies a positive post. Sexual talk/harassment,
// general insults and "other" may legitimately occur in negative posts.
bool always_positive(Category c);

enum class AuthorRole { kBully, kVictim, kBystanderDefender, kBystanderAssistant };

std::string_view to_string(AuthorRole r);
std::optional<AuthorRole> parse_role(std::string_view s);

// Offsets count Unicode code points of the post text; end is exclusive.
struct AnnotatedSpan {
  Category category;
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const AnnotatedSpan&, const AnnotatedSpan&) = default;
};

struct Post {
  std::string id;
  Language lang = Language::kEnglish;
  std::string text;
  std::optional<std::string> conversation_id;
  bool label = false;
  std::optional<AuthorRole> role;
  std::vector<AnnotatedSpan> spans;

  bool has_category(Category c) const;

  friend bool operator==(const Post&, const Post&) = default;
};

struct CorpusStats {
  std::size_t n_posts = 0;
  std::size_t n_positive = 0;
  double positive_ratio = 0.0;
  std::map<Category, std::size_t> per_category_counts;
};

// Parses the JSON Lines corpus format. Blank lines are skipped; every other
// line must be one post object. When `expected_lang` is set, posts in another
// language are an integrity error.
//
// Throws ParseError (malformed JSON, wrong field types, unknown fields) and
// IntegrityError (duplicate id, bad span, label/role mismatch, blank text),
// both carrying the 1-based line number.
std::vector<Post> parse_corpus(std::istream& in,
                               std::optional<Language> expected_lang = std::nullopt);
std::vector<Post> load_corpus(const std::string& path,
                              std::optional<Language> expected_lang = std::nullopt);

// One line per post, fields in canonical order.
void write_corpus(std::ostream& out, const std::vector<Post>& posts);
std::string serialize_post(const Post& post);

// Report-only consistency check: a negative post carrying an always-positive
// category span yields one description per offending post.
std::vector<std::string> validate_labels(const std::vector<Post>& posts);

CorpusStats corpus_stats(const std::vector<Post>& posts);

// Index-level simple random split. The holdout receives round-half-up of
// fraction * n items; both parts keep input order.
struct SplitIndices {
  std::vector<std::size_t> held_in;
  std::vector<std::size_t> holdout;
};
SplitIndices holdout_split_indices(std::size_t n, double fraction, std::uint64_t seed);

struct CorpusSplit {
  std::vector<Post> held_in;
  std::vector<Post> holdout;
};
CorpusSplit holdout_split(const std::vector<Post>& posts, double fraction, std::uint64_t seed);

// Stratified k-fold assignment. Each class is shuffled separately, then
// positives and negatives are dealt round-robin into the folds in one
// continuous sweep starting at a seed-chosen fold, so fold sizes differ by at
// most one and every fold's positive count is floor or ceil of n_pos / k.
// Returns the validation index set of each fold, each sorted ascending.
std::vector<std::vector<std::size_t>> stratified_kfold(const std::vector<bool>& labels,
                                                       std::size_t k, std::uint64_t seed);

// Code point count of a UTF-8 string (invalid bytes count as one each).
std::size_t utf8_length(std::string_view s);

}  // namespace bullysig
