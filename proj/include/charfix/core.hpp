#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace charfix {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Char = char32_t;

// Unicode Cc category: C0 controls, DEL, C1 controls. Tab and newline are
// corpus delimiters and never occur inside a sentence.
inline bool is_control_char(Char c) {
  return c < 0x20 || (c >= 0x7f && c <= 0x9f);
}

// A sentence is an ordered sequence of Unicode scalar values, one token per
// character. Immutable after construction; round-trips losslessly through
// UTF-8.
class Sentence {
 public:
  Sentence() = default;
  explicit Sentence(std::u32string chars);

  static Sentence from_utf8(std::string_view text);
  std::string to_utf8() const;

  std::size_t size() const { return chars_.size(); }
  bool empty() const { return chars_.empty(); }
  Char operator[](std::size_t i) const { return chars_[i]; }
  const std::u32string& chars() const { return chars_; }

  auto begin() const { return chars_.begin(); }
  auto end() const { return chars_.end(); }

  bool operator==(const Sentence&) const = default;

 private:
  std::u32string chars_;
};

// Per-token edit instruction. insert_before counts characters missing
// immediately before this token; the paper's four classes correspond to
// (0,Keep), (0,Mistaken), (1,Keep), (0,Redundant).
enum class Action : std::uint8_t { kKeep, kMistaken, kRedundant };

struct TokenLabel {
  int insert_before = 0;
  Action action = Action::kKeep;

  bool operator==(const TokenLabel&) const = default;
};

// A label sequence for a sentence of length n has n+1 entries; the last is
// the end slot, which carries only an insert_before count.
using LabelSeq = std::vector<TokenLabel>;

enum class ErrorClass : std::uint8_t {
  kKeep = 0,
  kMistaken = 1,
  kMissing = 2,
  kRedundant = 3,
};

constexpr int kNumClasses = 4;

// 4-class projection of a generalized label. An insertion count collapses to
// kMissing; a non-keep action wins over a pending insertion.
ErrorClass project_label(const TokenLabel& label);
TokenLabel label_from_class(ErrorClass cls);

const char* class_name(ErrorClass cls);
const char* action_name(Action a);
Action action_from_name(std::string_view name);

// Throws unless labels.size() == sentence.size() + 1.
void validate_labels(const Sentence& sentence, const LabelSeq& labels);

struct SentencePair {
  Sentence source;
  Sentence target;
  std::optional<LabelSeq> gold_labels;
};

enum class MaskKind : std::uint8_t { kMistaken, kMissing };

// One slot of a rewritten sequence: either a fixed character carried over
// from the source or a mask to be filled by the corrector. Masks remember
// where they came from so candidates can be restricted by kind.
struct Slot {
  bool is_mask = false;
  Char ch = 0;                 // fixed character when !is_mask
  MaskKind kind = MaskKind::kMissing;
  int source_index = -1;       // source token (== n for the end slot)
  Char original = 0;           // replaced character, mistaken masks only
  bool has_original = false;

  static Slot fixed(Char c, int source_index);
  static Slot mask_mistaken(Char original, int source_index);
  static Slot mask_missing(int source_index);
};

struct MaskedSequence {
  std::vector<Slot> slots;

  std::size_t mask_count() const;
  // Debug/trace rendering; masks shown as mask_symbol.
  std::string to_utf8(Char mask_symbol = U'□') const;
};

enum class EditType : std::uint8_t { kMissing, kReplacement, kUnnecessary, kNoop };

// Span-level edit against a source sentence: replace [start,end) with
// `replacement`. start == end is a pure insertion (kMissing); an empty
// replacement over a non-empty span is a deletion (kUnnecessary).
struct Edit {
  int start = 0;
  int end = 0;
  std::u32string replacement;
  EditType etype = EditType::kNoop;

  bool operator==(const Edit&) const = default;
};

EditType classify_edit(int start, int end, const std::u32string& replacement);
Edit make_edit(int start, int end, std::u32string replacement);

// Applies non-overlapping edits right-to-left; edits must be sorted by start.
std::u32string apply_edits(const std::u32string& source,
                           const std::vector<Edit>& edits);

const char* edit_type_name(EditType t);

}  // namespace charfix
