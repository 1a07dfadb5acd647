#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "charfix/core.hpp"

namespace charfix {

// (1 + b^2) p r / (b^2 p + r); 0 when the denominator is 0.
double f_beta(double p, double r, double beta);

struct EvalCounts {
  std::uint64_t tp = 0;
  std::uint64_t proposed = 0;
  std::uint64_t gold = 0;

  EvalCounts& operator+=(const EvalCounts& other);
  bool operator==(const EvalCounts&) const = default;
};

// Value of p (resp. r) when proposed (resp. gold) is zero. Sentence-level
// scoring uses 0; the MaxMatch and span scorers use 1, following the
// reference MaxMatch implementation.
enum class ZeroConvention : std::uint8_t { kZero, kOne };

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  double beta = 1.0;
  EvalCounts counts;
  std::vector<EvalCounts> per_sentence;
};

EvalReport make_report(const EvalCounts& totals, double beta,
                       ZeroConvention zero);

struct SentenceLevelResult {
  EvalReport detection;
  EvalReport correction;
};

// Sentence-level scoring at beta = 1. Detection counts a true positive when
// the sentence has errors and the predicted 4-class sequence equals the gold
// one exactly; a sentence is proposed when any prediction is not Keep.
// Correction counts a true positive when the hypothesis equals the target on
// an errorful sentence; proposed means hypothesis != source. Both recalls
// are over sentences with source != target. Gold labels are derived by
// alignment when a pair does not carry them; predicted labels likewise when
// `predicted_labels` is null.
SentenceLevelResult eval_sentence_level(
    const std::vector<SentencePair>& pairs,
    const std::vector<Sentence>& hypotheses,
    const std::vector<LabelSeq>* predicted_labels = nullptr);

using EditSet = std::vector<Edit>;

// MaxMatch: over the lattice of all minimal character alignments of source
// to hypothesis, extended with merged edits spanning at most
// kM2MaxMergeSpan characters on either side, pick the system edit set with
// the most gold matches (ties: fewest edits). Edits match gold by
// (start, end, replacement). With several annotators the one giving the
// best F is scored (ties: more tp, fewer proposed, lower index).
// Conventions: proposed = 0 gives p = 1, gold = 0 gives r = 1.
constexpr int kM2MaxMergeSpan = 4;

EvalReport m2_score(const Sentence& source, const Sentence& hypothesis,
                    const std::vector<EditSet>& gold_annotations,
                    double beta = 0.5);

// Micro-average: per-sentence counts (best annotator chosen per sentence)
// are summed before computing p, r and f.
EvalReport m2_score_corpus(const std::vector<Sentence>& sources,
                           const std::vector<Sentence>& hypotheses,
                           const std::vector<std::vector<EditSet>>& gold,
                           double beta = 0.5);

// Span scorer: system edits come from extract_edits with merging on and
// match gold by span, replacement and, when type_sensitive, edit type.
// Same zero conventions as the MaxMatch scorer.
EvalReport errant_score(const Sentence& source, const Sentence& hypothesis,
                        const EditSet& gold, double beta = 0.5,
                        bool type_sensitive = true);

EvalReport errant_score_corpus(const std::vector<Sentence>& sources,
                               const std::vector<Sentence>& hypotheses,
                               const std::vector<EditSet>& gold,
                               double beta = 0.5, bool type_sensitive = true);

// Throws unless 0 <= start <= end <= source length for every edit.
void validate_edits(const Sentence& source, const EditSet& edits);

struct M2Sentence {
  Sentence source;
  std::vector<EditSet> annotations;  // at least one, possibly empty
};

// Standard M2 file layout: an `S` line with the characters space-separated,
// then `A <start> <end>|||<type>|||<correction>|||REQUIRED|||-NONE-|||<ann>`
// lines, blocks separated by a blank line. Corrections are space-separated
// characters, `-NONE-` when empty; `A -1 -1|||noop|||...` marks an
// annotator who proposed no edits. Sentences containing literal spaces
// cannot be represented and are rejected on write.
std::vector<M2Sentence> parse_m2(std::string_view content,
                                 const std::string& origin);
std::vector<M2Sentence> read_m2_file(const std::string& path);
std::string format_m2(const std::vector<M2Sentence>& sentences);
void write_m2_file(const std::string& path,
                   const std::vector<M2Sentence>& sentences);

// Report rendering used by the CLI: a JSON object keyed by section name and
// an aligned plain-text table.
std::string render_reports_json(
    const std::vector<std::pair<std::string, EvalReport>>& sections);
std::string render_reports_table(
    const std::vector<std::pair<std::string, EvalReport>>& sections);

}  // namespace charfix
