#include "charfix/modlogic.hpp"

#include "charfix/align.hpp"

namespace charfix {

MaskedSequence rewrite(const Sentence& source, const LabelSeq& labels) {
  validate_labels(source, labels);
  MaskedSequence out;
  const std::size_t n = source.size();
  for (std::size_t i = 0; i <= n; ++i) {
    const TokenLabel& label = labels[i];
    for (int k = 0; k < label.insert_before; ++k) {
      out.slots.push_back(Slot::mask_missing(static_cast<int>(i)));
    }
    if (i == n) break;  // end slot carries insertions only
    switch (label.action) {
      case Action::kKeep:
        out.slots.push_back(Slot::fixed(source[i], static_cast<int>(i)));
        break;
      case Action::kMistaken:
        out.slots.push_back(Slot::mask_mistaken(source[i], static_cast<int>(i)));
        break;
      case Action::kRedundant:
        break;
    }
  }
  return out;
}

Sentence oracle_fill(const MaskedSequence& masked, const SentencePair& pair) {
  const std::vector<AlignmentOp> ops = align(pair.source, pair.target);
  const std::u32string& t = pair.target.chars();
  const std::size_t n = pair.source.size();

  // Target characters the alignment assigns to each source position:
  // inserted_before[i] feeds missing masks, substituted[i] mistaken masks.
  std::vector<std::u32string> inserted_before(n + 1);
  std::vector<Char> substituted(n, 0);
  std::vector<bool> has_substitution(n, false);
  for (const AlignmentOp& op : ops) {
    const auto i = static_cast<std::size_t>(op.src);
    if (op.kind == OpKind::kInsert) {
      inserted_before[i].push_back(t[static_cast<std::size_t>(op.tgt)]);
    } else if (op.kind == OpKind::kSubstitute) {
      substituted[i] = t[static_cast<std::size_t>(op.tgt)];
      has_substitution[i] = true;
    }
  }

  std::vector<std::size_t> missing_used(n + 1, 0);
  std::u32string out;
  out.reserve(masked.slots.size());
  for (const Slot& slot : masked.slots) {
    if (!slot.is_mask) {
      out.push_back(slot.ch);
      continue;
    }
    const auto i = static_cast<std::size_t>(slot.source_index);
    if (slot.kind == MaskKind::kMissing) {
      if (i > n || missing_used[i] >= inserted_before[i].size()) {
        throw Error("oracle_fill: missing mask at source index " +
                    std::to_string(i) + " has no aligned insertion");
      }
      out.push_back(inserted_before[i][missing_used[i]++]);
    } else {
      if (i >= n || !has_substitution[i]) {
        throw Error("oracle_fill: mistaken mask at source index " +
                    std::to_string(i) + " has no aligned substitution");
      }
      out.push_back(substituted[i]);
    }
  }
  return Sentence(out);
}

}  // namespace charfix
