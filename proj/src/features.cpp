#include "bullysig/features.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "bullysig/error.hpp"
#include "bullysig/hexid.hpp"
#include "bullysig/random.hpp"
#include "bullysig/topics.hpp"

namespace bullysig::features {

namespace {

constexpr std::array<std::string_view, 5> kGroupNames = {
    "word n-grams", "subjectivity lexicons", "character n-grams", "term lists", "topic models"};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Byte offsets of code point starts, plus the end offset.
std::vector<std::size_t> code_point_offsets(std::string_view s) {
  std::vector<std::size_t> offsets;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) offsets.push_back(i);
  }
  offsets.push_back(s.size());
  return offsets;
}

std::vector<std::string> sorted_vector(const std::set<std::string>& names, FeatureGroup g) {
  std::vector<std::string> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(qualify(g, n));
  return out;
}

const std::vector<std::pair<std::string, double>>* real_slots(const PostFeatures& f, FeatureGroup g) {
  switch (g) {
    case FeatureGroup::kSubjectivity:
      return f.has_subjectivity ? &f.subjectivity : nullptr;
    case FeatureGroup::kTermLists:
      return f.has_term_lists ? &f.term_lists : nullptr;
    case FeatureGroup::kTopicModels:
      return f.has_topics ? &f.topics : nullptr;
    default:
      return nullptr;
  }
}

const std::vector<std::string>& bag_names(const PostFeatures& f, FeatureGroup g) {
  return g == FeatureGroup::kWordNgrams ? f.word_ngrams : f.char_ngrams;
}

bool is_bag(FeatureGroup g) { return g == FeatureGroup::kWordNgrams || g == FeatureGroup::kCharNgrams; }

[[noreturn]] void missing_group(FeatureGroup g) {
  throw ResourceError(std::string("feature group ") + group_letter(g) + " (" +
                      std::string(group_name(g)) + ") is enabled but its resources are missing");
}

}  // namespace

char group_letter(FeatureGroup g) { return static_cast<char>('A' + static_cast<int>(g)); }

std::string_view group_name(FeatureGroup g) { return kGroupNames[static_cast<std::size_t>(g)]; }

std::optional<FeatureGroup> parse_group_letter(char c) {
  if (c >= 'a' && c <= 'e') c = static_cast<char>(c - 'a' + 'A');
  if (c < 'A' || c > 'E') return std::nullopt;
  return static_cast<FeatureGroup>(c - 'A');
}

GroupSet::GroupSet(std::initializer_list<FeatureGroup> groups) {
  for (const auto g : groups) mask_ |= static_cast<std::uint8_t>(1U << static_cast<unsigned>(g));
}

GroupSet GroupSet::parse(std::string_view text) {
  std::uint8_t mask = 0;
  for (const char c : text) {
    if (c == '+' || c == ' ' || c == ',') continue;
    const auto g = parse_group_letter(c);
    if (!g) throw ArgumentError("unknown feature group '" + std::string(1, c) + "'");
    mask |= static_cast<std::uint8_t>(1U << static_cast<unsigned>(*g));
  }
  if (mask == 0) throw ArgumentError("empty feature group set");
  return GroupSet(mask);
}

std::size_t GroupSet::size() const {
  std::size_t n = 0;
  for (const auto g : kAllGroups) n += contains(g) ? 1 : 0;
  return n;
}

std::vector<FeatureGroup> GroupSet::groups() const {
  std::vector<FeatureGroup> out;
  for (const auto g : kAllGroups)
    if (contains(g)) out.push_back(g);
  return out;
}

std::string GroupSet::label() const {
  std::string out;
  for (const auto g : groups()) {
    if (!out.empty()) out += " + ";
    out += group_letter(g);
  }
  return out;
}

std::vector<GroupSet> all_group_subsets() {
  std::vector<GroupSet> out;
  for (std::uint8_t m = 1; m < 32; ++m) out.emplace_back(m);
  return out;
}

std::string qualify(FeatureGroup g, std::string_view name) {
  std::string out;
  out.reserve(name.size() + 2);
  out += group_letter(g);
  out += ':';
  out += name;
  return out;
}

// ---------------------------------------------------------------------------
// Resources

std::set<std::string, std::less<>> TermListSet::parse_list(std::istream& in) {
  std::set<std::string, std::less<>> out;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    out.insert(textprep::to_lower(line));
  }
  return out;
}

TermListSet TermListSet::load(const std::string& dir) {
  TermListSet set;
  for (std::size_t i = 0; i < kTermListNames.size(); ++i) {
    const auto path = std::filesystem::path(dir) / (std::string(kTermListNames[i]) + ".txt");
    std::ifstream in(path);
    if (!in) throw ResourceError("feature group D (term lists): missing list file " + path.string());
    set.lists[i] = parse_list(in);
  }
  return set;
}

std::map<std::string, Polarity, std::less<>> SubjectivityLexicon::parse_polarity(std::istream& in) {
  std::map<std::string, Polarity, std::less<>> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(n, "polarity line needs a TAB separator");
    const std::string word = textprep::to_lower(trim(line.substr(0, tab)));
    const std::string pol = trim(line.substr(tab + 1));
    Polarity p;
    if (pol == "positive") {
      p = Polarity::kPositive;
    } else if (pol == "negative") {
      p = Polarity::kNegative;
    } else {
      throw ParseError(n, "polarity must be 'positive' or 'negative'");
    }
    const auto [it, inserted] = out.emplace(word, p);
    if (!inserted && it->second != p) throw ParseError(n, "word '" + word + "' listed with both polarities");
  }
  return out;
}

std::map<std::string, Polarity, std::less<>> SubjectivityLexicon::merge_polarity(
    const std::vector<std::map<std::string, Polarity, std::less<>>>& lexicons) {
  std::map<std::string, int, std::less<>> votes;
  for (const auto& lex : lexicons)
    for (const auto& [word, p] : lex) votes[word] += p == Polarity::kPositive ? 1 : -1;
  std::map<std::string, Polarity, std::less<>> out;
  for (const auto& [word, v] : votes) {
    if (v > 0) out.emplace(word, Polarity::kPositive);
    if (v < 0) out.emplace(word, Polarity::kNegative);
  }
  return out;
}

std::vector<std::pair<std::string, std::vector<CategoryPattern>>> SubjectivityLexicon::parse_categories(
    std::istream& in) {
  std::vector<std::pair<std::string, std::vector<CategoryPattern>>> out;
  std::map<std::string, std::size_t, std::less<>> index;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(n, "category lexicon line needs a TAB separator");
    const std::string left = trim(line.substr(0, tab));
    const std::string right = trim(line.substr(tab + 1));
    if (left == "%") {
      if (right.empty()) throw ParseError(n, "empty category name");
      if (index.contains(right)) throw ParseError(n, "duplicate category '" + right + "'");
      index.emplace(right, out.size());
      out.emplace_back(right, std::vector<CategoryPattern>{});
      continue;
    }
    const auto it = index.find(right);
    if (it == index.end()) throw ParseError(n, "undeclared category '" + right + "'");
    CategoryPattern pattern;
    pattern.text = textprep::to_lower(left);
    if (!pattern.text.empty() && pattern.text.back() == '*') {
      pattern.prefix = true;
      pattern.text.pop_back();
    }
    if (pattern.text.empty()) throw ParseError(n, "empty pattern");
    out[it->second].second.push_back(std::move(pattern));
  }
  return out;
}

SubjectivityLexicon SubjectivityLexicon::load(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ResourceError("feature group B (subjectivity lexicons): no directory " + dir);
  std::vector<fs::path> polarity_files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("polarity") && name.ends_with(".tsv"))
      polarity_files.push_back(entry.path());
  }
  std::sort(polarity_files.begin(), polarity_files.end());
  std::vector<std::map<std::string, Polarity, std::less<>>> lexicons;
  for (const auto& path : polarity_files) {
    std::ifstream in(path);
    try {
      lexicons.push_back(parse_polarity(in));
    } catch (const ParseError& e) {
      throw ParseError(e.line(), path.string() + ": " + e.what());
    }
  }
  std::vector<std::pair<std::string, std::vector<CategoryPattern>>> categories;
  const auto cat_path = fs::path(dir) / "categories.tsv";
  if (fs::exists(cat_path)) {
    std::ifstream in(cat_path);
    categories = parse_categories(in);
  }
  if (lexicons.empty() && categories.empty())
    throw ResourceError("feature group B (subjectivity lexicons): no polarity*.tsv or categories.tsv in " + dir);
  return SubjectivityLexicon(merge_polarity(lexicons), std::move(categories));
}

SubjectivityLexicon::SubjectivityLexicon(
    std::map<std::string, Polarity, std::less<>> polarity,
    std::vector<std::pair<std::string, std::vector<CategoryPattern>>> categories)
    : polarity_(std::move(polarity)), categories_(std::move(categories)) {}

std::optional<Polarity> SubjectivityLexicon::polarity(std::string_view word) const {
  const auto it = polarity_.find(word);
  if (it == polarity_.end()) return std::nullopt;
  return it->second;
}

bool SubjectivityLexicon::category_matches(std::size_t category, std::string_view token) const {
  for (const auto& p : categories_[category].second) {
    if (p.prefix ? token.starts_with(p.text) : token == p.text) return true;
  }
  return false;
}

const std::set<std::string, std::less<>>& first_person_pronouns(Language lang) {
  static const std::set<std::string, std::less<>> en = {
      "i", "me", "my", "mine", "myself", "we", "us", "our", "ours", "ourselves",
      "i'm", "i'll", "i'd", "i've", "im", "ive"};
  static const std::set<std::string, std::less<>> nl = {
      "ik", "me", "mij", "mijn", "mezelf", "mijzelf", "wij", "we", "ons", "onze", "onszelf"};
  return lang == Language::kDutch ? nl : en;
}

const std::set<std::string, std::less<>>& second_person_pronouns(Language lang) {
  static const std::set<std::string, std::less<>> en = {
      "you", "your", "yours", "yourself", "yourselves", "u", "ur", "ya", "you're",
      "you'll", "you'd", "you've", "youre", "thee", "thou"};
  static const std::set<std::string, std::less<>> nl = {
      "jij", "je", "jou", "jouw", "jezelf", "jullie", "u", "uw", "uzelf", "gij", "ge"};
  return lang == Language::kDutch ? nl : en;
}

// ---------------------------------------------------------------------------
// Extraction

std::set<std::string> extract_word_ngrams(const std::vector<std::string>& tokens,
                                          std::initializer_list<int> orders) {
  std::set<std::string> out;
  for (const int n : orders) {
    if (n < 1 || tokens.size() < static_cast<std::size_t>(n)) continue;
    const auto order = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
      std::string name = std::to_string(n) + ":" + tokens[i];
      for (std::size_t j = 1; j < order; ++j) {
        name += ' ';
        name += tokens[i + j];
      }
      out.insert(std::move(name));
    }
  }
  return out;
}

std::set<std::string> extract_char_ngrams(const std::vector<std::string>& tokens,
                                          std::initializer_list<int> orders) {
  std::set<std::string> out;
  for (const auto& token : tokens) {
    const auto offsets = code_point_offsets(token);
    const std::size_t length = offsets.size() - 1;
    for (const int n : orders) {
      if (n < 1 || length < static_cast<std::size_t>(n)) continue;
      const auto order = static_cast<std::size_t>(n);
      const std::string prefix = std::to_string(n) + ":";
      for (std::size_t i = 0; i + order <= length; ++i)
        out.insert(prefix + token.substr(offsets[i], offsets[i + order] - offsets[i]));
    }
  }
  return out;
}

std::array<bool, 7> extract_termlist_features(const std::vector<std::string>& tokens,
                                              const TermListSet& lists, Language lang) {
  std::array<bool, 7> bits{};
  const auto& first = first_person_pronouns(lang);
  const auto& second = second_person_pronouns(lang);
  bool has_first = false;
  bool has_second = false;
  for (const auto& t : tokens) {
    for (std::size_t i = 0; i < 6; ++i) bits[i] = bits[i] || lists.lists[i].contains(t);
    has_first = has_first || first.contains(t);
    has_second = has_second || second.contains(t);
  }
  bits[6] = has_first && has_second;
  return bits;
}

std::vector<double> extract_subjectivity_features(const std::vector<std::string>& tokens,
                                                  const SubjectivityLexicon& lexicon) {
  const std::size_t n_categories = lexicon.categories().size();
  std::vector<double> out(3 + n_categories, 0.0);
  if (tokens.empty()) return out;
  const double n = static_cast<double>(tokens.size());
  std::size_t pos = 0;
  std::size_t neg = 0;
  std::vector<std::size_t> hits(n_categories, 0);
  for (const auto& t : tokens) {
    if (const auto p = lexicon.polarity(t)) (*p == Polarity::kPositive ? pos : neg) += 1;
    for (std::size_t c = 0; c < n_categories; ++c)
      if (lexicon.category_matches(c, t)) ++hits[c];
  }
  out[0] = static_cast<double>(pos) / n;
  out[1] = static_cast<double>(neg) / n;
  out[2] = (static_cast<double>(pos) - static_cast<double>(neg)) / n;
  for (std::size_t c = 0; c < n_categories; ++c) out[3 + c] = static_cast<double>(hits[c]) / n;
  return out;
}

// ---------------------------------------------------------------------------

bool FeatureContext::available(FeatureGroup g) const {
  switch (g) {
    case FeatureGroup::kSubjectivity:
      return lexicon.has_value();
    case FeatureGroup::kTermLists:
      return term_lists.has_value();
    case FeatureGroup::kTopicModels:
      return topic_models != nullptr;
    default:
      return true;
  }
}

void FeatureContext::require(GroupSet groups) const {
  for (const auto g : groups.groups())
    if (!available(g)) missing_group(g);
}

PostFeatures extract_tokens(const std::vector<std::string>& tokens, std::string_view raw_text,
                            const FeatureContext& context) {
  PostFeatures f;
  f.word_ngrams = sorted_vector(extract_word_ngrams(tokens), FeatureGroup::kWordNgrams);
  f.char_ngrams = sorted_vector(extract_char_ngrams(tokens), FeatureGroup::kCharNgrams);

  if (context.lexicon) {
    const auto values = extract_subjectivity_features(tokens, *context.lexicon);
    const auto g = FeatureGroup::kSubjectivity;
    f.subjectivity.emplace_back(qualify(g, "pos_ratio"), values[0]);
    f.subjectivity.emplace_back(qualify(g, "neg_ratio"), values[1]);
    f.subjectivity.emplace_back(qualify(g, "polarity"), values[2]);
    const auto& cats = context.lexicon->categories();
    for (std::size_t c = 0; c < cats.size(); ++c)
      f.subjectivity.emplace_back(qualify(g, "category:" + cats[c].first), values[3 + c]);
    f.has_subjectivity = true;
  }

  if (context.term_lists) {
    const auto bits = extract_termlist_features(tokens, *context.term_lists, context.lang);
    for (std::size_t i = 0; i < bits.size(); ++i)
      f.term_lists.emplace_back(qualify(FeatureGroup::kTermLists, kTermFeatureNames[i]), bits[i] ? 1.0 : 0.0);
    f.has_term_lists = true;
  }

  if (context.topic_models) {
    if (context.topic_models->lang() != context.lang)
      throw ResourceError("feature group E (topic models): models were trained for another language");
    topics::Document doc;
    std::string joined;
    for (const auto& t : tokens) {
      if (textprep::is_punctuation(t)) continue;
      doc.push_back(textprep::stem(t, context.lang));
      joined += doc.back();
      joined += ' ';
    }
    // Inference seed depends on content only, so equal posts embed equally.
    const std::uint64_t seed = mix_seed(context.seed ^ fnv1a(joined));
    for (auto& [name, value] : context.topic_models->embed(doc, seed))
      f.topics.emplace_back(qualify(FeatureGroup::kTopicModels, name), value);
    f.has_topics = true;
  }
  (void)raw_text;
  return f;
}

PostFeatures extract(const Post& post, const FeatureContext& context) {
  return extract_tokens(textprep::preprocess(post.text, context.abbreviations), post.text, context);
}

// ---------------------------------------------------------------------------
// Feature space

FeatureSpace FeatureSpace::from_names(GroupSet groups, std::vector<std::string> qualified_names) {
  std::sort(qualified_names.begin(), qualified_names.end());
  qualified_names.erase(std::unique(qualified_names.begin(), qualified_names.end()), qualified_names.end());
  FeatureSpace space;
  space.groups_ = groups;
  space.names_ = std::move(qualified_names);
  space.index_.reserve(space.names_.size());
  for (std::size_t i = 0; i < space.names_.size(); ++i) {
    const auto g = parse_group_letter(space.names_[i].empty() ? '?' : space.names_[i][0]);
    if (!g || space.names_[i].size() < 2 || space.names_[i][1] != ':' || !groups.contains(*g))
      throw IntegrityError("feature name '" + space.names_[i] + "' does not belong to the space's groups");
    space.index_.emplace(space.names_[i], i);
  }
  return space;
}

std::optional<std::size_t> FeatureSpace::index_of(std::string_view qualified_name) const {
  const auto it = index_.find(std::string(qualified_name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

FeatureGroup FeatureSpace::group_of(std::size_t index) const {
  return *parse_group_letter(names_.at(index)[0]);
}

std::uint64_t FeatureSpace::fingerprint() const {
  std::uint64_t h = fnv1a("");
  for (const auto& n : names_) {
    h = fnv1a(n, h);
    h = fnv1a("\n", h);
  }
  return h;
}

std::string FeatureSpace::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "bullysig-feature-space";
  j["version"] = 1;
  j["groups"] = groups_.label();
  j["fingerprint"] = to_hex(fingerprint());
  j["names"] = names_;
  return j.dump();
}

FeatureSpace FeatureSpace::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", "") != "bullysig-feature-space" || j.value("version", 0) != 1)
      throw ParseError(0, "not a version 1 feature space file");
    auto space = from_names(GroupSet::parse(j.at("groups").get<std::string>()),
                            j.at("names").get<std::vector<std::string>>());
    if (space.fingerprint() != from_hex(j.at("fingerprint").get<std::string>()))
      throw IntegrityError("feature space fingerprint mismatch");
    return space;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("malformed feature space file: ") + e.what());
  }
}

FeatureSpace build_feature_space(const std::vector<const PostFeatures*>& training, GroupSet groups) {
  if (training.empty()) throw EmptyInputError("build_feature_space: empty training set");
  if (groups.empty()) throw ArgumentError("build_feature_space: no feature group enabled");
  std::vector<std::string> names;
  for (const auto g : groups.groups()) {
    if (is_bag(g)) {
      for (const auto* f : training) {
        const auto& bag = bag_names(*f, g);
        names.insert(names.end(), bag.begin(), bag.end());
      }
      continue;
    }
    for (const auto* f : training) {
      const auto* slots = real_slots(*f, g);
      if (!slots) missing_group(g);
      for (const auto& [name, value] : *slots) names.push_back(name);
    }
  }
  return FeatureSpace::from_names(groups, std::move(names));
}

FeatureSpace build_feature_space(const std::vector<PostFeatures>& training, GroupSet groups) {
  std::vector<const PostFeatures*> ptrs;
  ptrs.reserve(training.size());
  for (const auto& f : training) ptrs.push_back(&f);
  return build_feature_space(ptrs, groups);
}

FeatureSpace build_feature_space(const std::vector<Post>& training, GroupSet groups,
                                 const FeatureContext& context) {
  if (training.empty()) throw EmptyInputError("build_feature_space: empty training set");
  context.require(groups);
  std::vector<PostFeatures> feats;
  feats.reserve(training.size());
  for (const auto& p : training) feats.push_back(extract(p, context));
  return build_feature_space(feats, groups);
}

SparseVector vectorize(const PostFeatures& features, const FeatureSpace& space) {
  SparseVector x;
  for (const auto g : space.groups().groups()) {
    if (is_bag(g)) {
      for (const auto& name : bag_names(features, g)) {
        if (const auto idx = space.index_of(name)) x.push_back({*idx, 1.0});
      }
      continue;
    }
    const auto* slots = real_slots(features, g);
    if (!slots) missing_group(g);
    for (const auto& [name, value] : *slots) {
      const auto idx = space.index_of(name);
      if (!idx)
        throw ResourceError(std::string("feature group ") + group_letter(g) + ": slot '" + name +
                            "' is not in the feature space (dimension mismatch)");
      if (value != 0.0) x.push_back({*idx, value});
    }
  }
  std::sort(x.begin(), x.end(), [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
  return x;
}

SparseVector vectorize(const Post& post, const FeatureSpace& space, const FeatureContext& context) {
  context.require(space.groups());
  return vectorize(extract(post, context), space);
}

}  // namespace bullysig::features
