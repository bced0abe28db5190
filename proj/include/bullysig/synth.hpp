#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bullysig/corpus.hpp"
#include "bullysig/topics.hpp"

namespace bullysig::synth {

// Template-based stand-in for an annotated question-and-answer corpus.
//
// Positive posts realise one fine-grained category (attacks by a bully,
// defenses by a victim or bystander, encouragement by an assistant) with an
// annotated span. Negative posts are everyday chatter plus distractors: casual
// profanity without a target, harmless sexual talk and friendly banter that
// carry sexual_talk / insult_general spans. Insult words receive spelling
// noise (leetspeak, repeated letters) independently of the post's label.
struct SynthOptions {
  std::size_t posts = 2000;
  double positive_ratio = 0.05;  // exactly round(posts * ratio) positives
  std::uint64_t seed = 42;
  Language lang = Language::kEnglish;
  double noise = 0.35;           // per insult-word probability of a misspelling
};

// Throws ArgumentError unless 0 < positive_ratio < 1 and posts > 0.
std::vector<Post> synth_corpus(const SynthOptions& options);

// Category-tagged background documents, `docs_per_category` for each of the
// categories in `categories` (the defaults below when empty). Each document
// strings together several realisations of its category.
std::vector<topics::BackgroundDoc> synth_background(Language lang, std::size_t docs_per_category,
                                                    std::uint64_t seed,
                                                    std::vector<Category> categories = {});

// threat_blackmail, insult_general, insult_relatives, curse_exclusion,
// defamation, sexual_talk, sexual_harassment.
const std::vector<Category>& default_background_categories();

}  // namespace bullysig::synth
