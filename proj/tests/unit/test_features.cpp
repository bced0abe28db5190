#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "bullysig/error.hpp"
#include "bullysig/features.hpp"
#include "bullysig/random.hpp"

using namespace bullysig;
using namespace bullysig::features;

namespace {

using Tokens = std::vector<std::string>;
using Names = std::set<std::string>;

// Independent oracle: enumerate every code-point substring of every token.
Names brute_force_char_ngrams(const Tokens& tokens) {
  Names out;
  for (const auto& t : tokens) {
    std::vector<std::string> cps;
    for (std::size_t i = 0; i < t.size();) {
      std::size_t len = 1;
      const auto c = static_cast<unsigned char>(t[i]);
      if (c >= 0xF0) len = 4;
      else if (c >= 0xE0) len = 3;
      else if (c >= 0xC0) len = 2;
      cps.push_back(t.substr(i, len));
      i += len;
    }
    for (std::size_t b = 0; b < cps.size(); ++b) {
      std::string s;
      for (std::size_t e = b; e < cps.size(); ++e) {
        s += cps[e];
        const std::size_t n = e - b + 1;
        if (n >= 2 && n <= 4) out.insert(std::to_string(n) + ":" + s);
      }
    }
  }
  return out;
}

Post make_post(const std::string& id, const std::string& text, bool label = false) {
  Post p;
  p.id = id;
  p.text = text;
  p.label = label;
  if (label) p.role = AuthorRole::kBully;
  return p;
}

TermListSet demo_lists() {
  TermListSet lists;
  lists[TermList::kAllness] = {"everybody", "always", "never"};
  lists[TermList::kProfanity] = {"bitch", "fuck"};
  lists[TermList::kNegation] = {"not", "no"};
  lists[TermList::kIntensifiers] = {"very"};
  lists[TermList::kDiminishers] = {"slightly"};
  lists[TermList::kProperNames] = {"tom"};
  return lists;
}

SubjectivityLexicon demo_lexicon() {
  std::istringstream cats("%\tswear\n%\tsocial\nf*\tswear\nfriend*\tsocial\nyou\tsocial\n");
  return SubjectivityLexicon({{"nice", Polarity::kPositive}, {"ugly", Polarity::kNegative}},
                             SubjectivityLexicon::parse_categories(cats));
}

}  // namespace

TEST_CASE("GroupSet parsing, labels and enumeration") {
  CHECK(GroupSet::parse("A+C+E").mask() == 0b10101);
  CHECK(GroupSet::parse("ace") == GroupSet::parse("A + C + E"));
  CHECK(GroupSet::parse("BCDE").label() == "B + C + D + E");
  CHECK_THROWS_AS(GroupSet::parse("AF"), ArgumentError);
  CHECK_THROWS_AS(GroupSet::parse(""), ArgumentError);
  const auto subsets = all_group_subsets();
  REQUIRE(subsets.size() == 31);
  for (std::size_t i = 0; i < subsets.size(); ++i) CHECK(subsets[i].mask() == i + 1);
  CHECK(GroupSet({FeatureGroup::kTermLists}).size() == 1);
}

TEST_CASE("word n-grams") {
  CHECK(extract_word_ngrams({"you", "are", "ugly"}) ==
        Names{"1:you", "1:are", "1:ugly", "2:you are", "2:are ugly", "3:you are ugly"});
  CHECK(extract_word_ngrams({}).empty());
  CHECK(extract_word_ngrams({"hi"}) == Names{"1:hi"});
  const auto three = extract_word_ngrams({"a", "b", "c"});
  std::array<int, 3> per_order{};
  for (const auto& n : three) ++per_order[static_cast<std::size_t>(n[0] - '1')];
  CHECK(per_order == std::array<int, 3>{3, 2, 1});
}

TEST_CASE("character n-grams stay inside tokens") {
  CHECK(extract_char_ngrams({"cat"}) == Names{"2:ca", "2:at", "3:cat"});
  CHECK(extract_char_ngrams({"hi", "cat"}) == Names{"2:hi", "2:ca", "2:at", "3:cat"});
  CHECK(extract_char_ngrams({"été"}) == Names{"2:ét", "2:té", "3:été"});
  CHECK(extract_char_ngrams({"a"}).empty());
}

TEST_CASE("character n-grams equal brute-force substring enumeration") {
  Rng rng(8);
  const std::vector<std::string> alphabet = {"a", "b", "c", "'", "-", "é", "ß", "€", "_", "z"};
  for (int trial = 0; trial < 1000; ++trial) {
    Tokens tokens;
    for (std::size_t n = rng.below(6); n > 0; --n) {
      std::string t;
      for (std::size_t m = 1 + rng.below(8); m > 0; --m) t += alphabet[rng.below(alphabet.size())];
      tokens.push_back(t);
    }
    CHECK(extract_char_ngrams(tokens) == brute_force_char_ngrams(tokens));
  }
}

TEST_CASE("term-list bits and person alternation") {
  const auto lists = demo_lists();
  const auto bits = extract_termlist_features({"i", "hate", "you"}, lists, Language::kEnglish);
  CHECK(bits[6]);
  CHECK(extract_termlist_features({"everybody", "knows"}, lists, Language::kEnglish)[1]);
  CHECK(extract_termlist_features({}, lists, Language::kEnglish) == std::array<bool, 7>{});
  CHECK_FALSE(extract_termlist_features({"you", "you"}, lists, Language::kEnglish)[6]);
  CHECK(extract_termlist_features({"ik", "haat", "jou"}, lists, Language::kDutch)[6]);
  CHECK_FALSE(extract_termlist_features({"ik", "haat", "jou"}, lists, Language::kEnglish)[6]);
  CHECK(extract_termlist_features({"you", "bitch"}, lists, Language::kEnglish)[5]);
}

TEST_CASE("person alternation on constructed posts") {
  const std::vector<std::string> first = {"i", "me", "my", "we", "us", "our"};
  const std::vector<std::string> second = {"you", "your", "u", "yourself"};
  const std::vector<std::string> neutral = {"hate", "the", "dog", "is", "nice", "they"};
  Rng rng(50);
  for (int i = 0; i < 50; ++i) {
    Tokens t;
    const bool with_first = rng.below(2) == 1;
    const bool with_second = rng.below(2) == 1;
    for (std::size_t n = 1 + rng.below(5); n > 0; --n) t.push_back(neutral[rng.below(neutral.size())]);
    if (with_first) t.insert(t.begin() + static_cast<long>(rng.below(t.size())), first[rng.below(first.size())]);
    if (with_second) t.push_back(second[rng.below(second.size())]);
    CHECK(extract_termlist_features(t, TermListSet{}, Language::kEnglish)[6] == (with_first && with_second));
  }
}

TEST_CASE("subjectivity features") {
  const auto lex = demo_lexicon();
  const auto v = extract_subjectivity_features({"you", "are", "ugly", "but", "nice"}, lex);
  REQUIRE(v.size() == 5);
  CHECK(v[0] == doctest::Approx(0.2));
  CHECK(v[1] == doctest::Approx(0.2));
  CHECK(v[2] == doctest::Approx(0.0));
  CHECK(v[4] == doctest::Approx(0.2));  // social: "you"
  CHECK(extract_subjectivity_features({"fun", "cat"}, lex)[3] == doctest::Approx(0.5));
  for (const double x : extract_subjectivity_features({"zzz", "qqq"}, lex)) CHECK(x == 0.0);
  for (const double x : extract_subjectivity_features({}, lex)) CHECK(x == 0.0);
}

TEST_CASE("lexicon and term-list file formats") {
  std::istringstream conflict("good\tpositive\ngood\tnegative\n");
  CHECK_THROWS_AS(SubjectivityLexicon::parse_polarity(conflict), ParseError);
  std::istringstream undeclared("%\ta\nfoo\tb\n");
  CHECK_THROWS_AS(SubjectivityLexicon::parse_categories(undeclared), ParseError);
  std::istringstream duplicate("%\ta\n%\ta\n");
  CHECK_THROWS_AS(SubjectivityLexicon::parse_categories(duplicate), ParseError);

  const auto merged = SubjectivityLexicon::merge_polarity({
      {{"a", Polarity::kPositive}, {"b", Polarity::kPositive}, {"c", Polarity::kNegative}},
      {{"a", Polarity::kPositive}, {"b", Polarity::kNegative}},
      {{"a", Polarity::kNegative}},
  });
  CHECK(merged.at("a") == Polarity::kPositive);
  CHECK_FALSE(merged.contains("b"));  // tie dropped
  CHECK(merged.at("c") == Polarity::kNegative);

  std::istringstream list("# header\nFoo\n\nbar\nfoo\n");
  CHECK(TermListSet::parse_list(list) == std::set<std::string, std::less<>>{"bar", "foo"});
  CHECK_THROWS_AS(TermListSet::load("/nonexistent/dir"), ResourceError);
  CHECK_THROWS_AS(SubjectivityLexicon::load("/nonexistent/dir"), ResourceError);
}

TEST_CASE("feature spaces") {
  FeatureContext ctx;
  ctx.term_lists = demo_lists();
  ctx.lexicon = demo_lexicon();

  SUBCASE("group D only has dimension 7") {
    const auto space = build_feature_space({make_post("a", "i hate you"), make_post("b", "hello")},
                                           GroupSet({FeatureGroup::kTermLists}), ctx);
    CHECK(space.dimension() == 7);
    CHECK(space.names().front() == "D:allness");
  }
  SUBCASE("group A on one post") {
    const auto space = build_feature_space({make_post("a", "hi there")}, GroupSet({FeatureGroup::kWordNgrams}), ctx);
    CHECK(space.dimension() == 3);
    CHECK(space.names() == std::vector<std::string>{"A:1:hi", "A:1:there", "A:2:hi there"});
  }
  SUBCASE("group B slots follow the lexicon") {
    const auto space = build_feature_space({make_post("a", "x")}, GroupSet({FeatureGroup::kSubjectivity}), ctx);
    CHECK(space.dimension() == 5);
  }
  SUBCASE("determinism, ordering and JSON round trip") {
    const std::vector<Post> posts = {make_post("a", "You are UGLY!!"), make_post("b", "have a nice day @tom")};
    const auto groups = GroupSet::parse("ABCD");
    const auto s1 = build_feature_space(posts, groups, ctx);
    const auto s2 = build_feature_space(posts, groups, ctx);
    CHECK(s1.names() == s2.names());
    CHECK(s1.fingerprint() == s2.fingerprint());
    CHECK(std::is_sorted(s1.names().begin(), s1.names().end()));
    for (std::size_t i = 0; i < s1.dimension(); ++i) {
      CHECK(s1.index_of(s1.names()[i]) == i);
      CHECK(group_letter(s1.group_of(i)) == s1.names()[i][0]);
    }
    const auto back = FeatureSpace::from_json(s1.to_json());
    CHECK(back.names() == s1.names());
    CHECK(back.groups() == s1.groups());
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(build_feature_space(std::vector<Post>{}, GroupSet::parse("A"), ctx), EmptyInputError);
    FeatureContext bare;
    try {
      build_feature_space({make_post("a", "x")}, GroupSet::parse("AE"), bare);
      FAIL("expected ResourceError");
    } catch (const ResourceError& e) {
      CHECK(std::string(e.what()).find("group E") != std::string::npos);
    }
    CHECK_THROWS_AS(build_feature_space({make_post("a", "x")}, GroupSet::parse("B"), bare), ResourceError);
  }
}

TEST_CASE("vectorize") {
  FeatureContext ctx;
  ctx.term_lists = demo_lists();
  ctx.lexicon = demo_lexicon();
  const std::vector<Post> train = {make_post("a", "you are ugly"), make_post("b", "i love my friends"),
                                   make_post("c", "you bitch, everybody knows", true)};
  const auto groups = GroupSet::parse("ABCD");
  const auto space = build_feature_space(train, groups, ctx);

  for (const auto& p : train) {
    const auto x = vectorize(p, space, ctx);
    CHECK(is_well_formed(x, space.dimension()));
    CHECK(vectorize(p, space, ctx) == x);
    for (const auto& e : x) {
      const auto g = space.group_of(e.index);
      if (g == FeatureGroup::kWordNgrams || g == FeatureGroup::kCharNgrams || g == FeatureGroup::kTermLists)
        CHECK(e.value == 1.0);
    }
  }
  FeatureContext bare;
  CHECK_THROWS_AS(vectorize(train[0], space, bare), ResourceError);

  const auto ac = build_feature_space(train, GroupSet::parse("AC"), ctx);
  CHECK(vectorize(make_post("z", "qqq zzz"), ac, ctx).empty());

  // A post whose real-valued slots do not match the space is rejected.
  auto feats = extract(train[0], ctx);
  feats.subjectivity.emplace_back("B:category:extra", 0.5);
  CHECK_THROWS_AS(vectorize(feats, space), ResourceError);
  auto missing = extract(train[0], ctx);
  missing.has_term_lists = false;
  CHECK_THROWS_AS(vectorize(missing, space), ResourceError);
}

TEST_CASE("vectorizing unseen posts never enlarges the space") {
  FeatureContext ctx;
  ctx.term_lists = demo_lists();
  Rng rng(3);
  const std::vector<std::string> words = {"you", "are", "ugly", "nice", "day", "bitch", "i", "hate", "love", "tom"};
  std::vector<Post> posts;
  for (int i = 0; i < 60; ++i) {
    std::string text;
    for (std::size_t n = 1 + rng.below(6); n > 0; --n) text += words[rng.below(words.size())] + " ";
    posts.push_back(make_post("p" + std::to_string(i), text));
  }
  const std::vector<Post> held_in(posts.begin(), posts.begin() + 40);
  const auto space = build_feature_space(held_in, GroupSet::parse("ACD"), ctx);
  const auto dim = space.dimension();
  for (std::size_t i = 40; i < posts.size(); ++i) {
    const auto x = vectorize(posts[i], space, ctx);
    CHECK(is_well_formed(x, dim));
  }
  CHECK(space.dimension() == dim);
}
