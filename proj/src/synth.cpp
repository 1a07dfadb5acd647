#include "charfix/synth.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "charfix/align.hpp"
#include "charfix/io.hpp"

namespace charfix {

using nlohmann::json;

namespace {

std::vector<std::string_view> non_blank_lines(std::string_view content) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t stop = content.find('\n', start);
    if (stop == std::string_view::npos) stop = content.size();
    std::string_view line = content.substr(start, stop - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (stop == content.size()) break;
    start = stop + 1;
  }
  return lines;
}

}  // namespace

void Lexicon::sort_entries() {
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) {
              if (a.frequency != b.frequency) return a.frequency > b.frequency;
              return a.word < b.word;
            });
}

void Lexicon::add(std::u32string word, std::uint64_t frequency) {
  if (word.empty()) throw Error("lexicon: empty word");
  entries_.push_back({std::move(word), frequency});
  sort_entries();
}

Lexicon Lexicon::parse(std::string_view content, const std::string& origin) {
  Lexicon lex;
  const auto lines = non_blank_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    const std::string where = origin + ":" + std::to_string(i + 1);
    if (tab == std::string_view::npos || tab == 0) {
      throw Error(where + ": expected `word<TAB>frequency`");
    }
    const std::u32string word = utf8_decode(line.substr(0, tab));
    const std::string freq_text(line.substr(tab + 1));
    std::uint64_t freq = 0;
    try {
      std::size_t used = 0;
      freq = std::stoull(freq_text, &used);
      if (used != freq_text.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(where + ": frequency is not a non-negative integer");
    }
    lex.entries_.push_back({word, freq});
  }
  lex.sort_entries();
  return lex;
}

Lexicon Lexicon::load_file(const std::string& path) {
  return parse(read_file(path), path);
}

const char* insert_mode_name(InsertMode mode) {
  switch (mode) {
    case InsertMode::kRepeat: return "repeat";
    case InsertMode::kConfusion: return "confusion";
    case InsertMode::kHighFreq: return "high_freq";
    case InsertMode::kRandom: return "random";
  }
  return "?";
}

void SynthConfig::validate() const {
  auto probability = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(std::string("synth config: ") + name + " must be in [0,1]");
    }
  };
  probability(p_delete, "p_delete");
  probability(p_insert, "p_insert");
  probability(p_substitute, "p_substitute");
  double total = 0.0;
  for (double w : insert_mode_weights) {
    if (w < 0.0) throw Error("synth config: negative insertion-mode weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error("synth config: insertion-mode weights must sum to 1");
  }
}

Synthesizer::Synthesizer(SynthConfig config, std::u32string vocabulary,
                         const ConfusionSet* confusion, const Lexicon* lexicon)
    : config_(config),
      vocabulary_(std::move(vocabulary)),
      confusion_(confusion),
      lexicon_(lexicon) {
  config_.validate();
  std::sort(vocabulary_.begin(), vocabulary_.end());
  vocabulary_.erase(std::unique(vocabulary_.begin(), vocabulary_.end()),
                    vocabulary_.end());
  if (lexicon_ != nullptr && !lexicon_->empty()) {
    const std::size_t n =
        std::min(config_.lexicon_top_n, lexicon_->entries().size());
    lexicon_weights_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      lexicon_weights_.push_back(
          static_cast<double>(lexicon_->entries()[i].frequency));
    }
  }
}

std::u32string Synthesizer::apply_delete(const std::u32string& working,
                                         Rng& rng) const {
  std::u32string out = working;
  out.erase(rng.below(out.size()), 1);
  return out;
}

std::u32string Synthesizer::insert_repeat(const std::u32string& working,
                                          Rng& rng) const {
  std::u32string out = working;
  const std::size_t i = rng.below(out.size());
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(i) + 1, out[i]);
  return out;
}

std::optional<std::u32string> Synthesizer::insert_confusion(
    const std::u32string& working, Rng& rng) const {
  const std::size_t i = rng.below(working.size());
  if (confusion_ == nullptr) return std::nullopt;
  const std::u32string& entry = confusion_->lookup(working[i]);
  if (entry.empty()) return std::nullopt;
  std::u32string out = working;
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(i) + 1,
             entry[rng.below(entry.size())]);
  return out;
}

Char Synthesizer::sample_high_freq_char(Rng& rng) const {
  if (lexicon_weights_.empty()) {
    if (vocabulary_.empty()) throw Error("synthesizer: empty vocabulary");
    return vocabulary_[rng.below(vocabulary_.size())];
  }
  const std::size_t idx =
      rng.weighted(lexicon_weights_.data(), lexicon_weights_.size());
  const std::u32string& word = lexicon_->entries()[idx].word;
  return word[rng.below(word.size())];
}

std::u32string Synthesizer::insert_high_freq(const std::u32string& working,
                                             Rng& rng) const {
  const Char c = sample_high_freq_char(rng);
  std::u32string out = working;
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(rng.below(out.size() + 1)), c);
  return out;
}

std::u32string Synthesizer::insert_random(const std::u32string& working,
                                          Rng& rng) const {
  if (vocabulary_.empty()) throw Error("synthesizer: empty vocabulary");
  const Char c = vocabulary_[rng.below(vocabulary_.size())];
  std::u32string out = working;
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(rng.below(out.size() + 1)), c);
  return out;
}

CorruptOutcome Synthesizer::corrupt(const Sentence& clean, Rng& rng) const {
  CorruptOutcome outcome;
  if (clean.size() < 2) {
    outcome.skipped_short = true;
    outcome.pair.source = clean;
    outcome.pair.target = clean;
    outcome.pair.gold_labels = LabelSeq(clean.size() + 1);
    return outcome;
  }

  std::u32string working = clean.chars();

  if (rng.bernoulli(config_.p_delete)) {
    working = apply_delete(working, rng);
    outcome.deleted = true;
  }

  if (rng.bernoulli(config_.p_insert)) {
    outcome.inserted = true;
    int retries = 0;
    for (;;) {
      const auto mode = static_cast<InsertMode>(
          rng.weighted(config_.insert_mode_weights.data(), kNumInsertModes));
      if (mode == InsertMode::kConfusion) {
        if (auto with = insert_confusion(working, rng)) {
          working = std::move(*with);
          outcome.mode = mode;
          break;
        }
        if (++retries >= 16) {
          working = insert_random(working, rng);
          outcome.mode = InsertMode::kRandom;
          outcome.mode_fallback = true;
          break;
        }
        continue;
      }
      switch (mode) {
        case InsertMode::kRepeat: working = insert_repeat(working, rng); break;
        case InsertMode::kHighFreq: working = insert_high_freq(working, rng); break;
        case InsertMode::kRandom: working = insert_random(working, rng); break;
        case InsertMode::kConfusion: break;  // handled above
      }
      outcome.mode = mode;
      break;
    }
  }

  if (config_.p_substitute > 0.0 && rng.bernoulli(config_.p_substitute) &&
      confusion_ != nullptr) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < working.size(); ++i) {
      if (!confusion_->lookup(working[i]).empty()) eligible.push_back(i);
    }
    if (!eligible.empty()) {
      const std::size_t i = eligible[rng.below(eligible.size())];
      const std::u32string& entry = confusion_->lookup(working[i]);
      working[i] = entry[rng.below(entry.size())];
      outcome.substituted = true;
    }
  }

  outcome.pair.source = Sentence(std::move(working));
  outcome.pair.target = clean;
  outcome.pair.gold_labels = derive_labels(outcome.pair).labels;
  return outcome;
}

std::pair<std::vector<SentencePair>, SynthManifest> corrupt_corpus(
    const std::vector<Sentence>& clean, const SynthConfig& config,
    const ConfusionSet* confusion, const Lexicon* lexicon) {
  std::u32string vocab;
  for (const Sentence& s : clean) vocab.append(s.chars());
  Synthesizer synth(config, std::move(vocab), confusion, lexicon);

  std::vector<SentencePair> pairs;
  pairs.reserve(clean.size());
  SynthManifest manifest;
  manifest.config = synth.config();
  for (std::size_t i = 0; i < clean.size(); ++i) {
    Rng rng = Rng::for_index(config.seed, i);
    CorruptOutcome outcome = synth.corrupt(clean[i], rng);
    ++manifest.sentences;
    if (outcome.skipped_short) ++manifest.skipped_short;
    if (outcome.deleted) ++manifest.deletes;
    if (outcome.inserted) {
      ++manifest.inserts;
      ++manifest.mode_counts[static_cast<std::size_t>(outcome.mode)];
    }
    if (outcome.mode_fallback) ++manifest.mode_fallbacks;
    if (outcome.substituted) ++manifest.substitutes;
    pairs.push_back(std::move(outcome.pair));
  }
  return {std::move(pairs), std::move(manifest)};
}

std::string SynthManifest::to_json() const {
  const double eligible =
      static_cast<double>(sentences - skipped_short);
  auto fraction = [eligible](std::uint64_t n) {
    return eligible > 0 ? static_cast<double>(n) / eligible : 0.0;
  };
  json modes = json::object();
  json mode_fractions = json::object();
  for (int m = 0; m < kNumInsertModes; ++m) {
    const char* name = insert_mode_name(static_cast<InsertMode>(m));
    modes[name] = mode_counts[static_cast<std::size_t>(m)];
    mode_fractions[name] =
        inserts > 0 ? static_cast<double>(mode_counts[static_cast<std::size_t>(m)]) /
                          static_cast<double>(inserts)
                    : 0.0;
  }
  json obj{
      {"sentences", sentences},
      {"skipped_short", skipped_short},
      {"deletes", deletes},
      {"inserts", inserts},
      {"substitutes", substitutes},
      {"insert_modes", std::move(modes)},
      {"mode_fallbacks", mode_fallbacks},
      {"proportions",
       {{"delete", fraction(deletes)},
        {"insert", fraction(inserts)},
        {"substitute", fraction(substitutes)},
        {"insert_modes", std::move(mode_fractions)}}},
      {"config",
       {{"seed", config.seed},
        {"p_delete", config.p_delete},
        {"p_insert", config.p_insert},
        {"insert_mode_weights", config.insert_mode_weights},
        {"p_substitute", config.p_substitute},
        {"lexicon_top_n", config.lexicon_top_n}}},
  };
  return obj.dump(2) + "\n";
}

}  // namespace charfix
