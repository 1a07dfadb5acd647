#pragma once

#include "charfix/core.hpp"

namespace charfix {

// Deterministically rewrites `source` according to a label sequence of
// source.size() + 1 entries. Per token, in order: emit insert_before missing
// masks, then Keep -> the character itself, Mistaken -> one mistaken mask,
// Redundant -> nothing; finally the end slot's missing masks. The end slot's
// action is ignored (only its insertion count is meaningful).
//
// Output length = n + sum(insert_before) - #Redundant.
MaskedSequence rewrite(const Sentence& source, const LabelSeq& labels);

// Test oracle: fills each mask of a sequence produced from pair.source with
// the target characters recovered from the minimal alignment of the pair.
// Throws if the mask provenance is inconsistent with that alignment.
Sentence oracle_fill(const MaskedSequence& masked, const SentencePair& pair);

}  // namespace charfix
