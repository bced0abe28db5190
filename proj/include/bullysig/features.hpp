#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bullysig/corpus.hpp"
#include "bullysig/sparse.hpp"
#include "bullysig/textprep.hpp"

namespace bullysig {

namespace topics {
class TopicModelSet;
}

namespace features {

// The five feature families. Letters are the report labels.
enum class FeatureGroup : std::uint8_t {
  kWordNgrams = 0,     // A
  kSubjectivity = 1,   // B
  kCharNgrams = 2,     // C
  kTermLists = 3,      // D
  kTopicModels = 4,    // E
};

inline constexpr std::array<FeatureGroup, 5> kAllGroups = {
    FeatureGroup::kWordNgrams, FeatureGroup::kSubjectivity, FeatureGroup::kCharNgrams,
    FeatureGroup::kTermLists, FeatureGroup::kTopicModels};

char group_letter(FeatureGroup g);
std::string_view group_name(FeatureGroup g);
std::optional<FeatureGroup> parse_group_letter(char c);

// Non-empty subset of the five groups as a bit mask (A = bit 0 ... E = bit 4).
class GroupSet {
 public:
  constexpr GroupSet() = default;
  constexpr explicit GroupSet(std::uint8_t mask) : mask_(mask & 0x1F) {}
  GroupSet(std::initializer_list<FeatureGroup> groups);

  // "A+C+E" or "ACE".
  static GroupSet parse(std::string_view text);

  constexpr std::uint8_t mask() const { return mask_; }
  constexpr bool empty() const { return mask_ == 0; }
  constexpr bool contains(FeatureGroup g) const {
    return (mask_ >> static_cast<unsigned>(g)) & 1U;
  }
  std::size_t size() const;
  std::vector<FeatureGroup> groups() const;

  // "A + B + C" (report layout).
  std::string label() const;

  friend constexpr bool operator==(GroupSet, GroupSet) = default;

 private:
  std::uint8_t mask_ = 0;
};

// All 31 non-empty subsets in ascending mask order.
std::vector<GroupSet> all_group_subsets();

// ---------------------------------------------------------------------------
// Resources

enum class TermList : std::uint8_t {
  kProperNames,
  kAllness,
  kDiminishers,
  kIntensifiers,
  kNegation,
  kProfanity,
};

inline constexpr std::array<std::string_view, 6> kTermListNames = {
    "proper_names", "allness", "diminishers", "intensifiers", "negation", "profanity"};

struct TermListSet {
  std::array<std::set<std::string, std::less<>>, 6> lists;

  const std::set<std::string, std::less<>>& operator[](TermList t) const {
    return lists[static_cast<std::size_t>(t)];
  }
  std::set<std::string, std::less<>>& operator[](TermList t) {
    return lists[static_cast<std::size_t>(t)];
  }

  // Reads `<name>.txt` for each of the six lists from `dir`; one lowercase
  // term per line, blank lines and `#` lines skipped. A missing file throws
  // ResourceError.
  static TermListSet load(const std::string& dir);
  static std::set<std::string, std::less<>> parse_list(std::istream& in);
};

enum class Polarity : std::uint8_t { kPositive, kNegative };

struct CategoryPattern {
  std::string text;
  bool prefix = false;  // trailing '*' in the lexicon file
};

class SubjectivityLexicon {
 public:
  // Merges several polarity lexicons by majority vote per word; ties are
  // dropped.
  static std::map<std::string, Polarity, std::less<>> merge_polarity(
      const std::vector<std::map<std::string, Polarity, std::less<>>>& lexicons);

  // `word<TAB>positive|negative` per line. A word listed with both
  // polarities in one file throws ParseError.
  static std::map<std::string, Polarity, std::less<>> parse_polarity(std::istream& in);

  // `%<TAB>category` lines declare categories, then `pattern<TAB>category`
  // lines assign patterns. Undeclared or duplicate categories throw.
  static std::vector<std::pair<std::string, std::vector<CategoryPattern>>> parse_categories(
      std::istream& in);

  // Loads every `polarity*.tsv` in `dir` (merged) and `categories.tsv` if present.
  static SubjectivityLexicon load(const std::string& dir);

  SubjectivityLexicon() = default;
  SubjectivityLexicon(std::map<std::string, Polarity, std::less<>> polarity,
                      std::vector<std::pair<std::string, std::vector<CategoryPattern>>> categories);

  std::optional<Polarity> polarity(std::string_view word) const;
  const std::vector<std::pair<std::string, std::vector<CategoryPattern>>>& categories() const {
    return categories_;
  }
  bool category_matches(std::size_t category, std::string_view token) const;

 private:
  std::map<std::string, Polarity, std::less<>> polarity_;
  std::vector<std::pair<std::string, std::vector<CategoryPattern>>> categories_;
};

// First- and second-person pronoun inventories shipped per language.
const std::set<std::string, std::less<>>& first_person_pronouns(Language lang);
const std::set<std::string, std::less<>>& second_person_pronouns(Language lang);

// ---------------------------------------------------------------------------
// Per-group extraction. Names carry the n-gram order as a prefix ("2:you are").

std::set<std::string> extract_word_ngrams(const std::vector<std::string>& tokens,
                                          std::initializer_list<int> orders = {1, 2, 3});

// Within-token character n-grams over Unicode code points.
std::set<std::string> extract_char_ngrams(const std::vector<std::string>& tokens,
                                          std::initializer_list<int> orders = {2, 3, 4});

// Six list-presence bits (TermList order) then the person-alternation bit.
std::array<bool, 7> extract_termlist_features(const std::vector<std::string>& tokens,
                                              const TermListSet& lists, Language lang);

inline constexpr std::array<std::string_view, 7> kTermFeatureNames = {
    "proper_names", "allness", "diminishers", "intensifiers", "negation", "profanity",
    "person_alternation"};

// pos_ratio, neg_ratio, polarity, then one relative frequency per lexicon
// category (in lexicon order). All zero for an empty token list.
std::vector<double> extract_subjectivity_features(const std::vector<std::string>& tokens,
                                                  const SubjectivityLexicon& lexicon);

// ---------------------------------------------------------------------------

// Everything one post contributes, before a vocabulary exists. Bag-of-words
// groups hold presence names; real-valued groups hold every slot, zero or not.
struct PostFeatures {
  std::vector<std::string> word_ngrams;  // sorted
  std::vector<std::string> char_ngrams;  // sorted
  std::vector<std::pair<std::string, double>> subjectivity;
  std::vector<std::pair<std::string, double>> term_lists;
  std::vector<std::pair<std::string, double>> topics;
  bool has_subjectivity = false;
  bool has_term_lists = false;
  bool has_topics = false;
};

// Immutable name -> column map. Columns are dense and follow the
// lexicographic order of (group letter, name); keys are "<letter>:<name>".
class FeatureSpace {
 public:
  FeatureSpace() = default;

  std::size_t dimension() const { return names_.size(); }
  GroupSet groups() const { return groups_; }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> index_of(std::string_view qualified_name) const;
  FeatureGroup group_of(std::size_t index) const;

  // FNV-1a over the qualified names, newline separated.
  std::uint64_t fingerprint() const;

  std::string to_json() const;
  static FeatureSpace from_json(std::string_view text);

  static FeatureSpace from_names(GroupSet groups, std::vector<std::string> qualified_names);

 private:
  GroupSet groups_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

std::string qualify(FeatureGroup g, std::string_view name);

// Resources and language for feature extraction. Members that are absent
// make the matching group unavailable; asking for an unavailable group throws
// ResourceError naming it.
struct FeatureContext {
  Language lang = Language::kEnglish;
  textprep::AbbreviationMap abbreviations;
  std::optional<SubjectivityLexicon> lexicon;
  std::optional<TermListSet> term_lists;
  std::shared_ptr<const topics::TopicModelSet> topic_models;
  std::uint64_t seed = 42;  // topic inference seed

  bool available(FeatureGroup g) const;
  void require(GroupSet groups) const;
};

// Extracts every group the context supports for one post.
PostFeatures extract(const Post& post, const FeatureContext& context);
PostFeatures extract_tokens(const std::vector<std::string>& tokens, std::string_view raw_text,
                            const FeatureContext& context);

// Vocabulary from training posts only: every bag-of-words name observed in
// the enabled groups plus the fixed real-valued slots.
FeatureSpace build_feature_space(const std::vector<const PostFeatures*>& training, GroupSet groups);
FeatureSpace build_feature_space(const std::vector<PostFeatures>& training, GroupSet groups);
FeatureSpace build_feature_space(const std::vector<Post>& training, GroupSet groups,
                                 const FeatureContext& context);

// Unseen bag-of-words names are dropped; a real-valued slot that the space
// does not know (or a known slot the post lacks) throws ResourceError.
SparseVector vectorize(const PostFeatures& features, const FeatureSpace& space);
SparseVector vectorize(const Post& post, const FeatureSpace& space, const FeatureContext& context);

}  // namespace features
}  // namespace bullysig
