#pragma once

#include <array>
#include <optional>

#include "charfix/confusion.hpp"
#include "charfix/core.hpp"
#include "charfix/rng.hpp"

namespace charfix {

// Frequency-ranked wordlist, `word<TAB>frequency` per line. Entries are kept
// in descending frequency order (ties by word) so a top-N prefix is cheap.
class Lexicon {
 public:
  struct Entry {
    std::u32string word;
    std::uint64_t frequency = 0;
  };

  static Lexicon load_file(const std::string& path);
  static Lexicon parse(std::string_view content, const std::string& origin);

  void add(std::u32string word, std::uint64_t frequency);

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  void sort_entries();
  std::vector<Entry> entries_;
};

enum class InsertMode : std::uint8_t { kRepeat, kConfusion, kHighFreq, kRandom };
constexpr int kNumInsertModes = 4;
const char* insert_mode_name(InsertMode mode);

struct SynthConfig {
  std::uint64_t seed = 1;
  double p_delete = 0.5;
  double p_insert = 0.5;
  // repeat, confusion, high_freq, random
  std::array<double, 4> insert_mode_weights{0.35, 0.30, 0.30, 0.05};
  double p_substitute = 0.0;
  std::size_t lexicon_top_n = 1000;

  // Probabilities must lie in [0,1]; mode weights must be non-negative and
  // sum to 1 within 1e-9.
  void validate() const;
};

// What corrupt() did to one sentence, for manifest accounting.
struct CorruptOutcome {
  SentencePair pair;
  bool deleted = false;
  bool inserted = false;
  InsertMode mode = InsertMode::kRepeat;
  bool mode_fallback = false;  // confusion retries exhausted, fell to random
  bool substituted = false;
  bool skipped_short = false;
};

struct SynthManifest {
  std::uint64_t sentences = 0;
  std::uint64_t skipped_short = 0;
  std::uint64_t deletes = 0;
  std::uint64_t inserts = 0;
  std::uint64_t substitutes = 0;
  std::array<std::uint64_t, 4> mode_counts{};  // indexed by InsertMode
  std::uint64_t mode_fallbacks = 0;
  SynthConfig config;

  std::string to_json() const;
};

// Applies the corruption recipe: an independent coin per sentence for
// deleting one character, for inserting one character by a weighted mode,
// and optionally for substituting one character by a confusable. Gold labels
// are derived by alignment, so every pair satisfies the rewrite + oracle
// fill round trip.
class Synthesizer {
 public:
  Synthesizer(SynthConfig config, std::u32string vocabulary,
              const ConfusionSet* confusion = nullptr,
              const Lexicon* lexicon = nullptr);

  // One corruption under the given stream. Sentences shorter than 2
  // characters pass through unchanged and are flagged skipped_short.
  CorruptOutcome corrupt(const Sentence& clean, Rng& rng) const;

  const SynthConfig& config() const { return config_; }
  const std::u32string& vocabulary() const { return vocabulary_; }

  // Exposed pieces of the recipe, each advancing the stream like corrupt():
  // a uniformly positioned deletion and the four insertion modes.
  std::u32string apply_delete(const std::u32string& working, Rng& rng) const;
  std::u32string insert_repeat(const std::u32string& working, Rng& rng) const;
  // Nullopt when the anchor character has no confusion entry.
  std::optional<std::u32string> insert_confusion(const std::u32string& working,
                                                 Rng& rng) const;
  std::u32string insert_high_freq(const std::u32string& working, Rng& rng) const;
  std::u32string insert_random(const std::u32string& working, Rng& rng) const;

 private:
  Char sample_high_freq_char(Rng& rng) const;

  SynthConfig config_;
  std::u32string vocabulary_;
  const ConfusionSet* confusion_;
  const Lexicon* lexicon_;
  std::vector<double> lexicon_weights_;  // top-N prefix frequencies
};

// Per-sentence streams are derived from (config.seed, index), so results do
// not depend on processing order.
std::pair<std::vector<SentencePair>, SynthManifest> corrupt_corpus(
    const std::vector<Sentence>& clean, const SynthConfig& config,
    const ConfusionSet* confusion = nullptr, const Lexicon* lexicon = nullptr);

}  // namespace charfix
