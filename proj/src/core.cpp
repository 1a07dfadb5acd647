#include "charfix/core.hpp"

#include "charfix/io.hpp"

namespace charfix {

namespace {

void check_no_controls(const std::u32string& chars) {
  for (Char c : chars) {
    if (is_control_char(c)) {
      throw Error("sentence contains control character U+" +
                  std::to_string(static_cast<std::uint32_t>(c)));
    }
  }
}

}  // namespace

Sentence::Sentence(std::u32string chars) : chars_(std::move(chars)) {
  check_no_controls(chars_);
}

Sentence Sentence::from_utf8(std::string_view text) {
  return Sentence(utf8_decode(text));
}

std::string Sentence::to_utf8() const { return utf8_encode(chars_); }

ErrorClass project_label(const TokenLabel& label) {
  if (label.action == Action::kMistaken) return ErrorClass::kMistaken;
  if (label.action == Action::kRedundant) return ErrorClass::kRedundant;
  return label.insert_before > 0 ? ErrorClass::kMissing : ErrorClass::kKeep;
}

TokenLabel label_from_class(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::kKeep: return {0, Action::kKeep};
    case ErrorClass::kMistaken: return {0, Action::kMistaken};
    case ErrorClass::kMissing: return {1, Action::kKeep};
    case ErrorClass::kRedundant: return {0, Action::kRedundant};
  }
  throw Error("unknown error class");
}

const char* class_name(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::kKeep: return "keep";
    case ErrorClass::kMistaken: return "mistaken";
    case ErrorClass::kMissing: return "missing";
    case ErrorClass::kRedundant: return "redundant";
  }
  return "?";
}

const char* action_name(Action a) {
  switch (a) {
    case Action::kKeep: return "keep";
    case Action::kMistaken: return "mistaken";
    case Action::kRedundant: return "redundant";
  }
  return "?";
}

Action action_from_name(std::string_view name) {
  if (name == "keep") return Action::kKeep;
  if (name == "mistaken") return Action::kMistaken;
  if (name == "redundant") return Action::kRedundant;
  throw Error("unknown action name: " + std::string(name));
}

void validate_labels(const Sentence& sentence, const LabelSeq& labels) {
  if (labels.size() != sentence.size() + 1) {
    throw Error("label sequence has " + std::to_string(labels.size()) +
                " entries, expected " + std::to_string(sentence.size() + 1) +
                " (sentence length + end slot)");
  }
  for (const TokenLabel& l : labels) {
    if (l.insert_before < 0) throw Error("negative insert_before count");
  }
}

Slot Slot::fixed(Char c, int source_index) {
  Slot s;
  s.is_mask = false;
  s.ch = c;
  s.source_index = source_index;
  return s;
}

Slot Slot::mask_mistaken(Char original, int source_index) {
  Slot s;
  s.is_mask = true;
  s.kind = MaskKind::kMistaken;
  s.source_index = source_index;
  s.original = original;
  s.has_original = true;
  return s;
}

Slot Slot::mask_missing(int source_index) {
  Slot s;
  s.is_mask = true;
  s.kind = MaskKind::kMissing;
  s.source_index = source_index;
  return s;
}

std::size_t MaskedSequence::mask_count() const {
  std::size_t n = 0;
  for (const Slot& s : slots) n += s.is_mask ? 1 : 0;
  return n;
}

std::string MaskedSequence::to_utf8(Char mask_symbol) const {
  std::u32string out;
  out.reserve(slots.size());
  for (const Slot& s : slots) out.push_back(s.is_mask ? mask_symbol : s.ch);
  return utf8_encode(out);
}

EditType classify_edit(int start, int end, const std::u32string& replacement) {
  if (start == end) return EditType::kMissing;
  if (replacement.empty()) return EditType::kUnnecessary;
  return EditType::kReplacement;
}

Edit make_edit(int start, int end, std::u32string replacement) {
  Edit e;
  e.start = start;
  e.end = end;
  e.etype = classify_edit(start, end, replacement);
  e.replacement = std::move(replacement);
  return e;
}

std::u32string apply_edits(const std::u32string& source,
                           const std::vector<Edit>& edits) {
  std::u32string out = source;
  for (auto it = edits.rbegin(); it != edits.rend(); ++it) {
    if (it->etype == EditType::kNoop) continue;
    if (it->start < 0 || it->end < it->start ||
        it->end > static_cast<int>(out.size())) {
      throw Error("edit span out of range");
    }
    out.replace(static_cast<std::size_t>(it->start),
                static_cast<std::size_t>(it->end - it->start),
                it->replacement);
  }
  return out;
}

const char* edit_type_name(EditType t) {
  switch (t) {
    case EditType::kMissing: return "M";
    case EditType::kReplacement: return "R";
    case EditType::kUnnecessary: return "U";
    case EditType::kNoop: return "noop";
  }
  return "?";
}

}  // namespace charfix
