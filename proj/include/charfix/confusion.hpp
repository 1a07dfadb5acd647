#pragma once

#include <unordered_map>

#include "charfix/core.hpp"

namespace charfix {

// Per-character set of confusable characters. Self-mappings are dropped on
// construction so no character maps to itself.
class ConfusionSet {
 public:
  ConfusionSet() = default;

  void add(Char key, Char confusable);

  // File format: one entry per line, `char<TAB>confusables`, where the
  // confusables field is the concatenated characters with no separators.
  static ConfusionSet load_file(const std::string& path);
  static ConfusionSet parse(std::string_view content, const std::string& origin);
  std::string serialize() const;

  bool has(Char key) const;
  // Empty view when the character has no entry.
  const std::u32string& lookup(Char key) const;
  std::vector<Char> keys() const;  // sorted
  bool empty() const { return map_.empty(); }

 private:
  std::unordered_map<Char, std::u32string> map_;
};

}  // namespace charfix
