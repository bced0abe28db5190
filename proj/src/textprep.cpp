#include "bullysig/textprep.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <regex>

#include "bullysig/error.hpp"

namespace bullysig::textprep {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_punct_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) && c != '_';
}

bool is_word_char(char c) { return !is_space(c) && !is_punct_char(c); }

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) words.push_back(s.substr(start, i - start));
  }
  return words;
}

std::string join(const std::vector<std::string_view>& words) {
  std::string out;
  for (const auto w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

const std::regex& url_pattern() {
  static const std::regex re(R"((?:[A-Za-z][A-Za-z0-9+.\-]*://|[Ww][Ww][Ww]\.)[^\s]+)");
  return re;
}

const std::regex& mention_pattern() {
  static const std::regex re(R"(@+\w+)");
  return re;
}

// Splits a word into leading punctuation, core, trailing punctuation.
struct PeeledWord {
  std::string_view lead;
  std::string_view core;
  std::string_view trail;
};

PeeledWord peel(std::string_view w) {
  std::size_t b = 0;
  while (b < w.size() && is_punct_char(w[b])) ++b;
  std::size_t e = w.size();
  while (e > b && is_punct_char(w[e - 1])) --e;
  return {w.substr(0, b), w.substr(b, e - b), w.substr(e)};
}

bool is_ascii_alpha_lower(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

// ---------------------------------------------------------------------------
// Porter stemmer, following the reference ANSI C implementation by M. Porter
// (including its "logi"/"bli" departures).

class Porter {
 public:
  explicit Porter(std::string word) : b_(std::move(word)), k_(static_cast<int>(b_.size()) - 1) {}

  std::string run() {
    if (k_ <= 1) return b_;
    step1ab();
    if (k_ > 0) {
      step1c();
      step2();
      step3();
      step4();
      step5();
    }
    return b_.substr(0, static_cast<std::size_t>(k_ + 1));
  }

 private:
  bool cons(int i) const {
    switch (b_[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !cons(i - 1);
      default:
        return true;
    }
  }

  // Number of VC sequences in b[0..j].
  int m() const {
    int n = 0;
    int i = 0;
    while (true) {
      if (i > j_) return n;
      if (!cons(i)) break;
      ++i;
    }
    ++i;
    while (true) {
      while (true) {
        if (i > j_) return n;
        if (cons(i)) break;
        ++i;
      }
      ++i;
      ++n;
      while (true) {
        if (i > j_) return n;
        if (!cons(i)) break;
        ++i;
      }
      ++i;
    }
  }

  bool vowel_in_stem() const {
    for (int i = 0; i <= j_; ++i)
      if (!cons(i)) return true;
    return false;
  }

  bool doublec(int j) const {
    if (j < 1) return false;
    if (b_[j] != b_[j - 1]) return false;
    return cons(j);
  }

  bool cvc(int i) const {
    if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
    const char ch = b_[i];
    return !(ch == 'w' || ch == 'x' || ch == 'y');
  }

  bool ends(std::string_view s) {
    const int len = static_cast<int>(s.size());
    if (len > k_ + 1) return false;
    if (std::string_view(b_).substr(static_cast<std::size_t>(k_ - len + 1), s.size()) != s) return false;
    j_ = k_ - len;
    return true;
  }

  void setto(std::string_view s) {
    b_.replace(static_cast<std::size_t>(j_ + 1), static_cast<std::size_t>(k_ - j_), s);
    k_ = j_ + static_cast<int>(s.size());
    b_.resize(static_cast<std::size_t>(k_ + 1));
  }

  void r(std::string_view s) {
    if (m() > 0) setto(s);
  }

  void step1ab() {
    if (b_[k_] == 's') {
      if (ends("sses")) {
        k_ -= 2;
      } else if (ends("ies")) {
        setto("i");
      } else if (b_[k_ - 1] != 's') {
        --k_;
      }
      b_.resize(static_cast<std::size_t>(k_ + 1));
    }
    if (ends("eed")) {
      if (m() > 0) {
        --k_;
        b_.resize(static_cast<std::size_t>(k_ + 1));
      }
    } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
      k_ = j_;
      b_.resize(static_cast<std::size_t>(k_ + 1));
      if (ends("at")) {
        setto("ate");
      } else if (ends("bl")) {
        setto("ble");
      } else if (ends("iz")) {
        setto("ize");
      } else if (doublec(k_)) {
        --k_;
        const char ch = b_[k_];
        if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
        b_.resize(static_cast<std::size_t>(k_ + 1));
      } else if (j_ = k_, m() == 1 && cvc(k_)) {
        setto("e");
      }
    }
  }

  void step1c() {
    if (ends("y") && vowel_in_stem()) b_[k_] = 'i';
  }

  void step2() {
    if (k_ < 1) return;
    switch (b_[k_ - 1]) {
      case 'a':
        if (ends("ational")) { r("ate"); break; }
        if (ends("tional")) { r("tion"); break; }
        break;
      case 'c':
        if (ends("enci")) { r("ence"); break; }
        if (ends("anci")) { r("ance"); break; }
        break;
      case 'e':
        if (ends("izer")) { r("ize"); break; }
        break;
      case 'l':
        if (ends("bli")) { r("ble"); break; }
        if (ends("alli")) { r("al"); break; }
        if (ends("entli")) { r("ent"); break; }
        if (ends("eli")) { r("e"); break; }
        if (ends("ousli")) { r("ous"); break; }
        break;
      case 'o':
        if (ends("ization")) { r("ize"); break; }
        if (ends("ation")) { r("ate"); break; }
        if (ends("ator")) { r("ate"); break; }
        break;
      case 's':
        if (ends("alism")) { r("al"); break; }
        if (ends("iveness")) { r("ive"); break; }
        if (ends("fulness")) { r("ful"); break; }
        if (ends("ousness")) { r("ous"); break; }
        break;
      case 't':
        if (ends("aliti")) { r("al"); break; }
        if (ends("iviti")) { r("ive"); break; }
        if (ends("biliti")) { r("ble"); break; }
        break;
      case 'g':
        if (ends("logi")) { r("log"); break; }
        break;
      default:
        break;
    }
  }

  void step3() {
    switch (b_[k_]) {
      case 'e':
        if (ends("icate")) { r("ic"); break; }
        if (ends("ative")) { r(""); break; }
        if (ends("alize")) { r("al"); break; }
        break;
      case 'i':
        if (ends("iciti")) { r("ic"); break; }
        break;
      case 'l':
        if (ends("ical")) { r("ic"); break; }
        if (ends("ful")) { r(""); break; }
        break;
      case 's':
        if (ends("ness")) { r(""); break; }
        break;
      default:
        break;
    }
  }

  void step4() {
    if (k_ < 1) return;
    switch (b_[k_ - 1]) {
      case 'a':
        if (ends("al")) break;
        return;
      case 'c':
        if (ends("ance")) break;
        if (ends("ence")) break;
        return;
      case 'e':
        if (ends("er")) break;
        return;
      case 'i':
        if (ends("ic")) break;
        return;
      case 'l':
        if (ends("able")) break;
        if (ends("ible")) break;
        return;
      case 'n':
        if (ends("ant")) break;
        if (ends("ement")) break;
        if (ends("ment")) break;
        if (ends("ent")) break;
        return;
      case 'o':
        if (ends("ion") && j_ >= 0 && (b_[j_] == 's' || b_[j_] == 't')) break;
        if (ends("ou")) break;
        return;
      case 's':
        if (ends("ism")) break;
        return;
      case 't':
        if (ends("ate")) break;
        if (ends("iti")) break;
        return;
      case 'u':
        if (ends("ous")) break;
        return;
      case 'v':
        if (ends("ive")) break;
        return;
      case 'z':
        if (ends("ize")) break;
        return;
      default:
        return;
    }
    if (m() > 1) {
      k_ = j_;
      b_.resize(static_cast<std::size_t>(k_ + 1));
    }
  }

  void step5() {
    j_ = k_;
    if (b_[k_] == 'e') {
      const int a = m();
      if (a > 1 || (a == 1 && !cvc(k_ - 1))) --k_;
    }
    if (b_[k_] == 'l' && doublec(k_) && m() > 1) --k_;
    b_.resize(static_cast<std::size_t>(k_ + 1));
  }

  std::string b_;
  int k_;
  int j_ = 0;
};

bool dutch_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

}  // namespace

AbbreviationMap parse_abbreviations(std::istream& in) {
  AbbreviationMap map;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(n, "abbreviation line needs a TAB separator");
    std::string key = to_lower(line.substr(0, tab));
    std::string full = join(split_ws(std::string_view(line).substr(tab + 1)));
    if (key.empty() || full.empty()) throw ParseError(n, "empty abbreviation or expansion");
    map[std::move(key)] = std::move(full);
  }
  check_abbreviations(map);
  return map;
}

AbbreviationMap load_abbreviations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open abbreviation file '" + path + "'");
  return parse_abbreviations(in);
}

void check_abbreviations(const AbbreviationMap& abbreviations) {
  for (const auto& [key, full] : abbreviations) {
    if (key.empty() || key != to_lower(key) || std::any_of(key.begin(), key.end(), is_space) ||
        peel(key).core != key)
      throw ArgumentError("abbreviation key '" + key + "' is not a single lowercase token");
    if (full.find('@') != std::string::npos || std::regex_search(full, url_pattern()))
      throw ArgumentError("expansion of '" + key + "' contains a mention or URL");
    for (const auto word : split_ws(full)) {
      const std::string core = to_lower(peel(word).core);
      if (abbreviations.contains(core))
        throw ArgumentError("expansion of '" + key + "' contains abbreviation '" + core + "'");
    }
  }
}

std::string clean_text(std::string_view raw, const AbbreviationMap& abbreviations) {
  std::string text = std::regex_replace(std::string(raw), url_pattern(), std::string(kUrlPlaceholder));
  text = std::regex_replace(text, mention_pattern(), std::string(kUserPlaceholder));

  const auto words = split_ws(text);
  std::string out;
  for (const auto word : words) {
    if (!out.empty()) out += ' ';
    if (abbreviations.empty()) {
      out += word;
      continue;
    }
    const auto parts = peel(word);
    const auto it = parts.core.empty() ? abbreviations.end() : abbreviations.find(to_lower(parts.core));
    if (it == abbreviations.end()) {
      out += word;
    } else {
      out += parts.lead;
      out += it->second;
      out += parts.trail;
    }
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view cleaned) {
  std::vector<std::string> tokens;
  for (const auto chunk : split_ws(cleaned)) {
    std::string word;
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const char c = chunk[i];
      if (!is_punct_char(c)) {
        word += c;
        continue;
      }
      const bool joiner = (c == '\'' || c == '-') && !word.empty() && i + 1 < chunk.size() &&
                          is_word_char(chunk[i + 1]);
      if (joiner) {
        word += c;
        continue;
      }
      if (!word.empty()) {
        tokens.push_back(to_lower(word));
        word.clear();
      }
      tokens.emplace_back(1, c);
    }
    if (!word.empty()) tokens.push_back(to_lower(word));
  }
  return tokens;
}

bool is_punctuation(std::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), is_punct_char);
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto c = static_cast<unsigned char>(out[i]);
    if (c >= 'A' && c <= 'Z') {
      out[i] = static_cast<char>(c + 32);
    } else if (c == 0xC3 && i + 1 < out.size()) {
      // U+00C0..U+00DE (except U+00D7) encode as C3 80..C3 9E.
      const auto d = static_cast<unsigned char>(out[i + 1]);
      if (d >= 0x80 && d <= 0x9E && d != 0x97) out[i + 1] = static_cast<char>(d + 0x20);
      ++i;
    }
  }
  return out;
}

std::string stem_english(std::string_view token) {
  if (!is_ascii_alpha_lower(token)) return std::string(token);
  return Porter(std::string(token)).run();
}

std::string stem_dutch(std::string_view token) {
  std::string w(token);
  if (w.size() <= 3 || !is_ascii_alpha_lower(w)) return w;

  auto ends = [&w](std::string_view s) {
    return w.size() >= s.size() && std::string_view(w).substr(w.size() - s.size()) == s;
  };

  if (ends("heden")) w.replace(w.size() - 5, 5, "heid");

  bool vowel_suffix = false;
  auto try_strip = [&](std::string_view suffix, bool allow_j) {
    if (!ends(suffix) || w.size() < suffix.size() + 3) return false;
    const char before = w[w.size() - suffix.size() - 1];
    if (dutch_vowel(before) || (!allow_j && before == 'j')) return false;
    w.resize(w.size() - suffix.size());
    return true;
  };
  if (try_strip("ene", true) || try_strip("en", true) || try_strip("e", true)) {
    vowel_suffix = true;
  } else if (!try_strip("se", false)) {
    try_strip("s", false);
  }

  if (vowel_suffix) {
    const std::size_t n = w.size();
    const bool double_consonant = n >= 2 && w[n - 1] == w[n - 2] && !dutch_vowel(w[n - 1]);
    if (double_consonant) {
      w.pop_back();
    } else if (n >= 3 && !dutch_vowel(w[n - 1]) && std::string_view("aeou").find(w[n - 2]) != std::string_view::npos &&
               !dutch_vowel(w[n - 3])) {
      w.insert(w.begin() + static_cast<std::ptrdiff_t>(n - 1), w[n - 2]);
    }
  }

  if (w.back() == 'z') w.back() = 's';
  else if (w.back() == 'v') w.back() = 'f';
  return w;
}

std::string stem(std::string_view token, Language lang) {
  return lang == Language::kDutch ? stem_dutch(token) : stem_english(token);
}

std::vector<std::string> preprocess(std::string_view raw, const AbbreviationMap& abbreviations) {
  return tokenize(clean_text(raw, abbreviations));
}

std::vector<std::string> topic_tokens(std::string_view raw, Language lang,
                                      const AbbreviationMap& abbreviations) {
  std::vector<std::string> out;
  for (const auto& token : preprocess(raw, abbreviations)) {
    if (is_punctuation(token)) continue;
    out.push_back(stem(token, lang));
  }
  return out;
}

}  // namespace bullysig::textprep
