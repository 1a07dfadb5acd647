#pragma once

#include <string_view>
#include <unordered_map>
#include <vector>

#include "charfix/confusion.hpp"
#include "charfix/core.hpp"

namespace charfix {

// Character n-gram language model with add-k smoothing, standing in for a
// masked LM behind the same fill interface. Immutable after training; safe
// to share across threads.
class CharLM {
 public:
  // Padding symbols; both are control characters, so they can never collide
  // with sentence content.
  static constexpr Char kBos = 0x2;
  static constexpr Char kEos = 0x3;

  // Counts unigrams, bigrams and trigrams over each sentence padded as
  // BOS BOS ... EOS. Deterministic.
  static CharLM train(const std::vector<Sentence>& corpus, double k = 0.01,
                      std::size_t top_k = 2000);

  // log P(c | l2 l1) under add-k smoothing. The denominator is the marginal
  // of the trigram table for the context plus k * |vocabulary|, so the
  // conditional sums to exactly 1 over the vocabulary.
  double log_cond(Char l2, Char l1, Char c) const;

  std::uint64_t unigram_count(Char c) const;
  std::uint64_t bigram_count(Char a, Char b) const;
  std::uint64_t trigram_count(Char a, Char b, Char c) const;

  // Observed characters plus the padding symbols, sorted.
  std::vector<Char> vocabulary() const;
  std::size_t vocab_size() const { return vocab_size_; }

  // Up to top_k non-padding characters by descending unigram count, ties by
  // codepoint. The default candidate pool for mask filling.
  const std::u32string& top_candidates() const { return top_candidates_; }

  double k() const { return k_; }
  std::size_t top_k() const { return top_k_; }

  std::string save_json() const;
  void save_file(const std::string& path) const;
  static CharLM load_json(const std::string& content);
  static CharLM load_file(const std::string& path);

 private:
  CharLM(double k, std::size_t top_k);
  void count_sentence(const Sentence& sentence);
  void finalize();

  double k_;
  std::size_t top_k_;
  std::unordered_map<Char, std::uint64_t> uni_;
  std::unordered_map<std::uint64_t, std::uint64_t> bi_;
  std::unordered_map<std::uint64_t, std::uint64_t> tri_;
  std::unordered_map<std::uint64_t, std::uint64_t> tri_context_;
  std::size_t vocab_size_ = 0;
  std::u32string top_candidates_;
};

// log P(c | last two of left) + log P(first of right | last of left, c).
// Missing left context is padded with BOS; the right term is omitted when
// right is empty.
double score_candidate(const CharLM& lm, std::u32string_view left, Char c,
                       std::u32string_view right);

// Fills masks left to right with a beam of the given width (1 = greedy).
// Candidates come from the confusion set of the original character for
// mistaken masks when available, otherwise from lm.top_candidates(); filled
// masks become left context for later ones. Deterministic; never fails.
Sentence fill(const CharLM& lm, const MaskedSequence& masked,
              const ConfusionSet* confusion = nullptr, int beam_width = 1);

}  // namespace charfix
