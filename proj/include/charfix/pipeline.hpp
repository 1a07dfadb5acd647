#pragma once

#include <array>
#include <string>

#include "charfix/corrector.hpp"
#include "charfix/detector.hpp"

namespace charfix {

// Everything one correction produced, kept for tracing and scoring.
struct SentenceCorrection {
  Sentence output;
  LabelSeq labels;        // detector tags, |source| + 1 entries
  MaskedSequence masked;  // rewrite of the source under those tags
};

// tag -> rewrite -> fill. Models are shared read-only; safe to call
// concurrently for distinct sentences.
SentenceCorrection correct_sentence(const DetectorModel& det, const CharLM& lm,
                                    const ConfusionSet* confusion,
                                    const Sentence& source,
                                    int beam_width = 1);

struct CorpusSummary {
  std::uint64_t sentences = 0;
  std::uint64_t changed = 0;
  std::uint64_t masks_filled = 0;
  std::array<std::uint64_t, 4> tag_counts{};  // indexed by ErrorClass

  std::string to_json() const;
  std::string to_text() const;
};

struct TraceRecord {
  Sentence source;
  LabelSeq labels;
  std::string masked;  // rendering with mask placeholders
  Sentence output;
};

void write_trace_jsonl(const std::string& path,
                       const std::vector<TraceRecord>& records);
std::vector<TraceRecord> read_trace_jsonl(const std::string& path);

// Reads one sentence per line from input_path, corrects every sentence and
// writes `source<TAB>corrected` lines to output_path in input order, no
// matter how many worker threads run. An optional trace JSONL gets one
// record per sentence, same order.
CorpusSummary correct_corpus(const DetectorModel& det, const CharLM& lm,
                             const ConfusionSet* confusion,
                             const std::string& input_path,
                             const std::string& output_path, int jobs = 1,
                             int beam_width = 1,
                             const std::string& trace_path = "");

}  // namespace charfix
