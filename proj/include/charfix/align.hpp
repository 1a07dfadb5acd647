#pragma once

#include <vector>

#include "charfix/core.hpp"

namespace charfix {

enum class OpKind : std::uint8_t { kMatch, kSubstitute, kInsert, kDelete };

// One step of a character alignment. src/tgt are the positions at which the
// op was taken: Match/Substitute consume source[src] and target[tgt], Delete
// consumes source[src] only, Insert consumes target[tgt] only (attaching
// before source position src, which may equal |source| for end insertions).
struct AlignmentOp {
  OpKind kind;
  int src = -1;
  int tgt = -1;

  bool operator==(const AlignmentOp&) const = default;
};

// Levenshtein-minimal alignment with unit costs. Ties are broken during a
// forward walk over the suffix-distance table with the fixed preference
// Match > Substitute > Delete > Insert, which makes the result deterministic.
std::vector<AlignmentOp> align(const Sentence& source, const Sentence& target);

// Edit distance only (no backtrace).
int edit_distance(const Sentence& source, const Sentence& target);

struct LabelDerivation {
  LabelSeq labels;     // source.size() + 1 entries
  int conflicts = 0;   // tokens where an insertion met a non-keep action
};

// Gold labels from the minimal alignment of pair.source to pair.target.
// Match -> Keep, Substitute -> Mistaken, Delete -> Redundant; a run of c
// Inserts becomes insert_before = c on the next surviving source token (or
// the end slot). If a token would receive both an insertion count and a
// non-keep action, the action wins, the count is dropped, and the conflict
// counter is incremented.
LabelDerivation derive_labels(const SentencePair& pair);

// Span edits from the minimal alignment of source to hypothesis. With merge
// on, maximal runs of adjacent non-match ops coalesce into one edit;
// otherwise every op becomes its own edit.
std::vector<Edit> extract_edits(const Sentence& source, const Sentence& hypothesis,
                                bool merge);

}  // namespace charfix
