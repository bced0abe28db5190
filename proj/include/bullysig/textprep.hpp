#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bullysig/corpus.hpp"

namespace bullysig::textprep {

inline constexpr std::string_view kUrlPlaceholder = "_url_";
inline constexpr std::string_view kUserPlaceholder = "_user_";

// Lowercase abbreviation -> full form.
using AbbreviationMap = std::map<std::string, std::string, std::less<>>;

// Reads `abbrev<TAB>full form` lines; `#` starts a comment line. Keys are
// lowercased, expansions whitespace-normalized, and the result is checked
// with check_abbreviations().
AbbreviationMap parse_abbreviations(std::istream& in);
AbbreviationMap load_abbreviations(const std::string& path);

// Rejects maps under which clean_text would not be idempotent: keys must be
// single lowercase tokens, and no expansion may contain a key, an '@', or
// URL-like text. Throws ArgumentError.
void check_abbreviations(const AbbreviationMap& abbreviations);

// URL -> _url_, @mention -> _user_, whitespace runs collapsed and trimmed,
// then whole-word case-insensitive abbreviation expansion (leading and
// trailing punctuation of a word is kept around the expansion).
std::string clean_text(std::string_view raw, const AbbreviationMap& abbreviations = {});

// Whitespace split, then every punctuation character becomes its own token
// except an apostrophe or hyphen between two word characters. '_' and all
// non-ASCII bytes are word characters. Tokens are lowercased (ASCII and
// Latin-1 upper case).
std::vector<std::string> tokenize(std::string_view cleaned);

// True when every byte is ASCII punctuation other than '_'.
bool is_punctuation(std::string_view token);

std::string to_lower(std::string_view s);

// Porter (1980) stemmer for English; rule-table stemmer for Dutch. Tokens that
// are not purely ASCII letters are returned unchanged.
std::string stem(std::string_view token, Language lang);
std::string stem_english(std::string_view token);

// Dutch rule table, applied in order to ASCII-letter tokens longer than 3:
//   1. "heden" -> "heid".
//   2. Strip the first matching suffix, keeping a stem of at least 3 letters:
//        "ene", "en", "e"  when preceded by a consonant;
//        "se", "s"         when preceded by a consonant other than 'j'.
//   3. After stripping "ene"/"en"/"e": undouble a final double consonant,
//      otherwise double a single a/e/o/u that sits between two consonants at
//      the end of the stem (open syllable: "bomen" -> "boom").
//   4. Final 'z' -> 's', final 'v' -> 'f' ("huizen" -> "huis").
std::string stem_dutch(std::string_view token);

// clean_text + tokenize, dropping nothing.
std::vector<std::string> preprocess(std::string_view raw, const AbbreviationMap& abbreviations);

// Stemmed content tokens for topic modelling (punctuation tokens dropped).
std::vector<std::string> topic_tokens(std::string_view raw, Language lang,
                                      const AbbreviationMap& abbreviations);

}  // namespace bullysig::textprep
