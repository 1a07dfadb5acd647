#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "charfix/core.hpp"

namespace charfix {

// Strict UTF-8: rejects overlong forms, surrogates, values above U+10FFFF
// and truncated sequences.
std::u32string utf8_decode(std::string_view text);
std::string utf8_encode(std::u32string_view chars);
std::string utf8_encode(Char c);

// One pair per line as `source<TAB>target`; blank lines are skipped and
// order is preserved. gold_labels are absent in the result.
std::vector<SentencePair> read_parallel_tsv(const std::string& path);
void write_parallel_tsv(const std::string& path,
                        const std::vector<SentencePair>& pairs);

// One sentence per line; blank lines are skipped.
std::vector<Sentence> read_sentence_lines(const std::string& path);
void write_sentence_lines(const std::string& path,
                          const std::vector<Sentence>& sentences);

// One JSON object per line:
//   {"source":...,"target":...,
//    "labels":[{"ins":k,"act":"keep|mistaken|redundant"},...],"end_ins":k}
// Reading is the exact inverse of writing. Writing requires gold_labels.
void write_labels_jsonl(const std::string& path,
                        const std::vector<SentencePair>& pairs);
std::vector<SentencePair> read_labels_jsonl(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace charfix
