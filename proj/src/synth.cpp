#include "bullysig/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "bullysig/error.hpp"
#include "bullysig/random.hpp"

namespace bullysig::synth {

namespace {

// A template realises one optional span: the text between '[' and ']'.
// "{slot}" draws a word from the slot bank; "{slot~}" may also misspell it.
struct Template {
  Category category;
  std::string_view pattern;
};

struct Weighted {
  Category category;
  std::optional<AuthorRole> role;
  int weight;
};

struct Bank {
  std::map<std::string_view, std::vector<std::string_view>> slots;
  std::vector<Template> positive;          // by category
  std::vector<Weighted> positive_mix;      // category distribution of positives
  std::vector<std::string_view> everyday;  // negative, no span
  std::vector<std::string_view> profane;   // negative, no span, untargeted swearing
  std::vector<std::string_view> sexual;    // negative, sexual_talk span
  std::vector<std::string_view> banter;    // negative, insult_general span
  std::vector<std::string_view> openers;   // optional attack openers
  std::vector<std::string_view> fillers;   // optional tails, both classes
};

const Bank& english() {
  static const Bank bank = [] {
    Bank b;
    b.slots = {
        {"name", {"emma", "liam", "noah", "olivia", "sophie", "jake", "mia", "lucas", "zoe", "max", "ella", "ryan",
                  "chloe", "dylan", "lily", "sam", "nina", "tom"}},
        {"noun", {"loser", "idiot", "freak", "moron", "creep", "clown", "failure", "weirdo", "nobody", "joke",
                  "pig", "cow"}},
        {"adj", {"stupid", "ugly", "fat", "pathetic", "worthless", "dumb", "disgusting", "annoying"}},
        {"pf_adj", {"fucking", "fucking", "damn"}},
        {"pf_noun", {"bitch", "slut", "whore", "asshole", "bastard", "dick", "prick", "twat"}},
        {"pf_excl", {"fuck", "shit", "damn"}},
        {"food", {"pizza", "pasta", "pancakes", "soup", "curry", "lasagna"}},
        {"thing", {"pizza", "music", "football", "netflix", "summer", "school", "chocolate", "dogs", "movies",
                   "books", "games", "pasta", "coffee"}},
        {"place", {"the beach", "the mall", "school", "the park", "london", "the gym", "my grandma's"}},
        {"relative", {"mom", "dad", "sister", "brother", "family", "mother"}},
        {"him", {"him", "her"}},
        {"body", {"body", "boobs", "ass"}},
        {"group", {"nerds", "gingers", "foreigners", "fat people"}},
        {"hurt", {"kill", "hurt", "find", "beat", "destroy"}},
        {"event", {"concert", "game", "party", "match", "movie"}},
        {"feel", {"tired", "happy", "bored", "excited", "hungry"}},
    };
    using C = Category;
    b.positive = {
        {C::kThreatBlackmail, "[i will {hurt} you] {name}"},
        {C::kThreatBlackmail, "[watch your back] {pf_noun}"},
        {C::kThreatBlackmail, "[i know where you live] you {noun~}"},
        {C::kThreatBlackmail, "[if you tell anyone i will post your pics]"},
        {C::kThreatBlackmail, "[you better run] {pf_noun}"},
        {C::kThreatBlackmail, "[im gonna {hurt} you after school]"},
        {C::kInsultGeneral, "[you are such a {adj~} {noun~}]"},
        {C::kInsultGeneral, "[you {pf_adj} {noun~}]"},
        {C::kInsultGeneral, "[shut up you {adj~} {pf_noun}]"},
        {C::kInsultGeneral, "[ur a {adj~} {noun~}] lol"},
        {C::kInsultGeneral, "{name} [you are a {pf_noun}]"},
        {C::kInsultGeneral, "[what a {adj~} {noun~}] you are"},
        {C::kInsultGeneral, "[you are so {adj~}] {pf_noun}"},
        {C::kInsultRelatives, "[your {relative} is a {pf_noun}]"},
        {C::kInsultRelatives, "[your {relative} is {adj~}] just like you"},
        {C::kInsultRelatives, "[go cry to your {relative} you {noun~}]"},
        {C::kInsultDiscrimination, "[{group} like you should not exist]"},
        {C::kInsultDiscrimination, "[all {group} are {adj~}] and so are you"},
        {C::kCurseExclusion, "[go die] you {noun~}"},
        {C::kCurseExclusion, "[go die] you {pf_adj} {noun~}"},
        {C::kCurseExclusion, "[nobody wants you here] {pf_noun}"},
        {C::kCurseExclusion, "[{pf_excl} off] and never come back"},
        {C::kCurseExclusion, "[go kill yourself] {noun~}"},
        {C::kCurseExclusion, "[get lost you {noun~}]"},
        {C::kDefamation, "[{name} is a {pf_noun} who sleeps with everyone]"},
        {C::kDefamation, "[everyone knows {name} cheated on {him}] lol"},
        {C::kDefamation, "[{name} steals from everyone]"},
        {C::kSexualHarassment, "[send me nudes] or i tell everyone"},
        {C::kSexualHarassment, "[show me your {body}] {pf_noun}"},
        {C::kSexualHarassment, "[take off your shirt for me] {name}"},
        {C::kDefenseBystander, "[leave {him} alone]"},
        {C::kDefenseBystander, "[stop bullying {name}]"},
        {C::kDefenseBystander, "[why are you so mean to {him}]"},
        {C::kDefenseBystander, "[you should be ashamed of yourself] for saying that"},
        {C::kDefenseBystander, "[{name} did nothing to you] stop it"},
        {C::kDefenseVictim, "[please leave me alone]"},
        {C::kDefenseVictim, "[stop saying that about me]"},
        {C::kDefenseVictim, "[i never did anything to you]"},
        {C::kDefenseVictim, "[why do you hate me so much]"},
        {C::kDefenseVictim, "[stop talking shit about me]"},
        {C::kEncouragement, "[haha so true] {name} is a {noun~}"},
        {C::kEncouragement, "[lol {name} is right] you are {adj~}"},
        {C::kEncouragement, "[yes tell {him} again]"},
        {C::kEncouragement, "[haha so true] {name} is a {pf_noun}"},
    };
    b.everyday = {
        "what is your favourite {thing}?",
        "i love {thing} so much",
        "going to {place} with {name} tomorrow",
        "{name} is my best friend",
        "haha thanks {name}",
        "i am so {feel} today",
        "who wants to watch a {event} tonight",
        "my {relative} made {food} for dinner",
        "happy birthday {name}!!",
        "do you like {thing} or {thing}",
        "the {event} was so much fun",
        "can u help me with my homework",
        "good luck with your exams {name}",
        "you are so sweet thank you",
        "you are the best {name}",
        "what do you think about {thing}?",
        "i miss {place} already",
        "ur so funny {name}",
    };
    b.profane = {
        "{pf_excl} i forgot my homework again",
        "this {thing} is {pf_adj} amazing",
        "holy shit that {event} was insane",
        "{pf_adj} mondays",
        "damn i miss {name}",
        "that {event} was the shit",
        "i am so {pf_adj} {feel}",
        "what the fuck happened at {place}",
        "shit i am late for {place}",
    };
    b.sexual = {
        "[{name} is so hot] i want to kiss {him}",
        "[what is your type in a guy]",
        "[do you like kissing]",
    };
    b.banter = {
        "[haha you {noun~}] love you",
        "[shut up you nerd] see you tomorrow",
    };
    b.positive_mix = {
        {C::kInsultGeneral, AuthorRole::kBully, 30},
        {C::kCurseExclusion, AuthorRole::kBully, 12},
        {C::kThreatBlackmail, AuthorRole::kBully, 10},
        {C::kInsultRelatives, AuthorRole::kBully, 8},
        {C::kDefamation, AuthorRole::kBully, 8},
        {C::kSexualHarassment, AuthorRole::kBully, 8},
        {C::kInsultDiscrimination, AuthorRole::kBully, 4},
        {C::kDefenseBystander, AuthorRole::kBystanderDefender, 10},
        {C::kDefenseVictim, AuthorRole::kVictim, 6},
        {C::kEncouragement, AuthorRole::kBystanderAssistant, 4},
    };
    b.openers = {"{pf_excl} ", "{pf_excl} ", "{pf_excl} ", "{name} ", "omg "};
    b.fillers = {" lol", " haha", " tbh", " idk", " omg", " xx", " :)", "!!", " seriously", " anyway"};
    return b;
  }();
  return bank;
}

const Bank& dutch() {
  static const Bank bank = [] {
    Bank b;
    b.slots = {
        {"name", {"emma", "daan", "sem", "julia", "lotte", "bram", "tess", "luuk", "sanne", "milan", "noor",
                  "jesse"}},
        {"noun", {"loser", "idioot", "sukkel", "freak", "debiel", "varken", "mislukkeling", "nerd", "clown"}},
        {"adj", {"dom", "lelijk", "dik", "zielig", "waardeloos", "vies", "irritant"}},
        {"pf_adj", {"kut", "kanker", "tering"}},
        {"pf_noun", {"hoer", "slet", "klootzak", "trut", "lul", "eikel", "teef"}},
        {"pf_excl", {"kut", "shit", "godverdomme"}},
        {"food", {"pizza", "pannenkoeken", "soep", "lasagne", "stamppot"}},
        {"thing", {"pizza", "muziek", "voetbal", "netflix", "zomer", "school", "chocola", "honden", "films",
                   "boeken", "games"}},
        {"place", {"het strand", "de stad", "school", "het park", "amsterdam", "de sportschool"}},
        {"relative", {"moeder", "vader", "zus", "broer", "familie"}},
        {"him", {"hem", "haar"}},
        {"hurt", {"vermoorden", "slaan", "pakken", "vinden"}},
        {"event", {"concert", "wedstrijd", "feest", "film"}},
        {"feel", {"moe", "blij", "verveeld", "hongerig"}},
    };
    using C = Category;
    b.positive = {
        {C::kThreatBlackmail, "[ik ga je {hurt}] {name}"},
        {C::kThreatBlackmail, "[pas maar op] {pf_noun}"},
        {C::kThreatBlackmail, "[ik weet waar je woont] {noun~}"},
        {C::kThreatBlackmail, "[als je het vertelt zet ik je fotos online]"},
        {C::kInsultGeneral, "[je bent zo een {adj~} {noun~}]"},
        {C::kInsultGeneral, "[jij {pf_adj} {noun~}]"},
        {C::kInsultGeneral, "[hou je bek {pf_noun}]"},
        {C::kInsultGeneral, "{name} [je bent een {pf_noun}]"},
        {C::kInsultGeneral, "[wat ben jij {adj~}] {noun~}"},
        {C::kInsultRelatives, "[je {relative} is een {pf_noun}]"},
        {C::kInsultRelatives, "[je {relative} is ook {adj~}]"},
        {C::kInsultDiscrimination, "[mensen zoals jij horen hier niet]"},
        {C::kCurseExclusion, "[ga dood] {noun~}"},
        {C::kCurseExclusion, "[niemand wil je hier] {pf_noun}"},
        {C::kCurseExclusion, "[rot op] {noun~}"},
        {C::kDefamation, "[{name} is een {pf_noun} die met iedereen slaapt]"},
        {C::kDefamation, "[iedereen weet dat {name} steelt]"},
        {C::kSexualHarassment, "[stuur me naaktfotos] of ik vertel het iedereen"},
        {C::kSexualHarassment, "[laat je tieten zien] {pf_noun}"},
        {C::kDefenseBystander, "[laat {him} met rust]"},
        {C::kDefenseBystander, "[stop met pesten] {name}"},
        {C::kDefenseBystander, "[waarom doe je zo gemeen tegen {him}]"},
        {C::kDefenseVictim, "[laat me alsjeblieft met rust]"},
        {C::kDefenseVictim, "[ik heb je nooit iets gedaan]"},
        {C::kEncouragement, "[haha zo waar] {name} is een {noun~}"},
        {C::kEncouragement, "[ja zeg het nog een keer]"},
    };
    b.everyday = {
        "wat is je favoriete {thing}?",
        "ik hou zo van {thing}",
        "morgen naar {place} met {name}",
        "{name} is mijn beste vriendin",
        "haha bedankt {name}",
        "ik ben zo {feel} vandaag",
        "wie wil er vanavond een film kijken",
        "mijn {relative} heeft {food} gemaakt",
        "gefeliciteerd {name}!!",
        "hou je van {thing} of {thing}",
        "het {event} was zo leuk",
        "kan je me helpen met huiswerk",
        "succes met je examens {name}",
        "je bent zo lief dankje",
    };
    b.profane = {
        "{pf_excl} ik ben mijn huiswerk weer vergeten",
        "dit {event} is {pf_adj} goed",
        "shit ik ben te laat voor {place}",
        "{pf_adj} maandag",
        "wat een {pf_adj} weer vandaag",
    };
    b.sexual = {
        "[{name} is zo knap] ik wil {him} zoenen",
        "[wat is jouw type jongen]",
    };
    b.banter = {
        "[haha jij {noun~}] ik hou van je",
    };
    b.positive_mix = {
        {C::kInsultGeneral, AuthorRole::kBully, 30},
        {C::kCurseExclusion, AuthorRole::kBully, 12},
        {C::kThreatBlackmail, AuthorRole::kBully, 10},
        {C::kInsultRelatives, AuthorRole::kBully, 8},
        {C::kDefamation, AuthorRole::kBully, 8},
        {C::kSexualHarassment, AuthorRole::kBully, 8},
        {C::kInsultDiscrimination, AuthorRole::kBully, 4},
        {C::kDefenseBystander, AuthorRole::kBystanderDefender, 10},
        {C::kDefenseVictim, AuthorRole::kVictim, 6},
        {C::kEncouragement, AuthorRole::kBystanderAssistant, 4},
    };
    b.openers = {"{pf_excl} ", "{pf_excl} ", "{pf_excl} ", "{name} ", "haha "};
    b.fillers = {" lol", " haha", " hoor", " xx", " :)", "!!", " echt", " trouwens"};
    return b;
  }();
  return bank;
}

const Bank& bank_for(Language lang) { return lang == Language::kDutch ? dutch() : english(); }

template <typename T>
const T& choose(Rng& rng, const std::vector<T>& items) {
  return items[static_cast<std::size_t>(rng.below(items.size()))];
}

// Leetspeak substitution of one vowel or a repeated letter.
std::string misspell(std::string word, Rng& rng) {
  static constexpr std::string_view kFrom = "aeios";
  static constexpr std::string_view kTo = "43105";
  std::vector<std::size_t> vowels;
  for (std::size_t i = 0; i < word.size(); ++i)
    if (kFrom.find(word[i]) != std::string_view::npos) vowels.push_back(i);
  if (!vowels.empty() && rng.uniform01() < 0.5) {
    const std::size_t i = choose(rng, vowels);
    word[i] = kTo[kFrom.find(word[i])];
  } else if (!word.empty()) {
    const std::size_t i = static_cast<std::size_t>(rng.below(word.size()));
    word.insert(i, std::string(1 + rng.below(2), word[i]));
  }
  return word;
}

struct Realised {
  std::string text;
  std::optional<AnnotatedSpan> span;
};

// Expands slots and strips the span markers; span offsets count code points.
Realised realise(std::string_view pattern, std::optional<Category> span_category, const Bank& bank, double noise,
                 Rng& rng) {
  Realised out;
  std::size_t span_begin = 0;
  bool open = false;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const char c = pattern[i];
    if (c == '{') {
      const std::size_t close = pattern.find('}', i);
      std::string_view slot = pattern.substr(i + 1, close - i - 1);
      const bool noisy = !slot.empty() && slot.back() == '~';
      if (noisy) slot.remove_suffix(1);
      const auto it = bank.slots.find(slot);
      if (it == bank.slots.end()) throw ArgumentError("synth: unknown template slot '" + std::string(slot) + "'");
      std::string word(choose(rng, it->second));
      if (noisy && rng.uniform01() < noise) word = misspell(std::move(word), rng);
      out.text += word;
      i = close;
    } else if (c == '[') {
      span_begin = utf8_length(out.text);
      open = true;
    } else if (c == ']') {
      if (open && span_category) out.span = AnnotatedSpan{*span_category, span_begin, utf8_length(out.text)};
      open = false;
    } else {
      out.text += c;
    }
  }
  return out;
}

Post make_post(bool positive, const Bank& bank, double noise, Rng& rng) {
  Post post;
  post.label = positive;
  std::string prefix;
  Realised body;
  if (positive) {
    int total = 0;
    for (const auto& w : bank.positive_mix) total += w.weight;
    int pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(total)));
    const Weighted* chosen = &bank.positive_mix.front();
    for (const auto& w : bank.positive_mix) {
      if (pick < w.weight) {
        chosen = &w;
        break;
      }
      pick -= w.weight;
    }
    std::vector<std::string_view> patterns;
    for (const auto& t : bank.positive)
      if (t.category == chosen->category) patterns.push_back(t.pattern);
    post.role = chosen->role;
    if (chosen->role == AuthorRole::kBully && rng.uniform01() < 0.7)
      prefix = realise(choose(rng, bank.openers), std::nullopt, bank, noise, rng).text;
    body = realise(choose(rng, patterns), chosen->category, bank, noise, rng);
  } else {
    const double u = rng.uniform01();
    if (u < 0.10) {
      body = realise(choose(rng, bank.profane), std::nullopt, bank, noise, rng);
    } else if (u < 0.14) {
      body = realise(choose(rng, bank.sexual), Category::kSexualTalk, bank, noise, rng);
    } else if (u < 0.16) {
      body = realise(choose(rng, bank.banter), Category::kInsultGeneral, bank, noise, rng);
    } else {
      body = realise(choose(rng, bank.everyday), std::nullopt, bank, noise, rng);
      if (rng.uniform01() < 0.3)
        body.text += " " + realise(choose(rng, bank.everyday), std::nullopt, bank, noise, rng).text;
    }
  }
  post.text = prefix + body.text;
  if (body.span) {
    const std::size_t shift = utf8_length(prefix);
    post.spans.push_back({body.span->category, body.span->begin + shift, body.span->end + shift});
  }
  if (rng.uniform01() < 0.4) post.text += std::string(choose(rng, bank.fillers));
  return post;
}

}  // namespace

std::vector<Post> synth_corpus(const SynthOptions& options) {
  if (options.posts == 0) throw ArgumentError("synth: the number of posts must be positive");
  if (!(options.positive_ratio > 0.0 && options.positive_ratio < 1.0))
    throw ArgumentError("synth: positive ratio must lie strictly between 0 and 1");
  if (!(options.noise >= 0.0 && options.noise <= 1.0)) throw ArgumentError("synth: noise must lie in [0, 1]");

  const std::size_t n_pos =
      static_cast<std::size_t>(std::llround(static_cast<double>(options.posts) * options.positive_ratio));
  std::vector<char> labels(options.posts, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_pos), 1);
  Rng order_rng(derive_seed(options.seed, "synth-labels"));
  order_rng.shuffle(std::span<char>(labels));

  const Bank& bank = bank_for(options.lang);
  Rng rng(derive_seed(options.seed, "synth-posts"));
  std::vector<Post> posts;
  posts.reserve(options.posts);
  const std::string lang(to_string(options.lang));
  for (std::size_t i = 0; i < options.posts; ++i) {
    Post post = make_post(labels[i] != 0, bank, options.noise, rng);
    char id[32];
    std::snprintf(id, sizeof id, "%s-%06zu", lang.c_str(), i + 1);
    post.id = id;
    post.lang = options.lang;
    posts.push_back(std::move(post));
  }
  return posts;
}

const std::vector<Category>& default_background_categories() {
  static const std::vector<Category> categories = {
      Category::kThreatBlackmail, Category::kInsultGeneral,  Category::kInsultRelatives,
      Category::kCurseExclusion,  Category::kDefamation,     Category::kSexualTalk,
      Category::kSexualHarassment,
  };
  return categories;
}

std::vector<topics::BackgroundDoc> synth_background(Language lang, std::size_t docs_per_category,
                                                    std::uint64_t seed, std::vector<Category> categories) {
  if (categories.empty()) categories = default_background_categories();
  const Bank& bank = bank_for(lang);
  Rng rng(derive_seed(seed, "synth-background"));
  std::vector<topics::BackgroundDoc> docs;
  for (const auto category : categories) {
    std::vector<std::string_view> patterns;
    for (const auto& t : bank.positive)
      if (t.category == category) patterns.push_back(t.pattern);
    if (category == Category::kSexualTalk) patterns.insert(patterns.end(), bank.sexual.begin(), bank.sexual.end());
    if (patterns.empty())
      throw ArgumentError("synth: no templates for background category " + std::string(to_string(category)));
    for (std::size_t d = 0; d < docs_per_category; ++d) {
      std::string text;
      const std::size_t sentences = 6 + static_cast<std::size_t>(rng.below(7));
      for (std::size_t s = 0; s < sentences; ++s) {
        if (!text.empty()) text += ". ";
        text += realise(choose(rng, patterns), std::nullopt, bank, 0.0, rng).text;
      }
      docs.push_back({category, std::move(text)});
    }
  }
  return docs;
}

}  // namespace bullysig::synth
