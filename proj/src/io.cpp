#include "charfix/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace charfix {

using nlohmann::json;

std::u32string utf8_decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  const auto fail = [&](const char* what) {
    throw Error("invalid UTF-8 at byte " + std::to_string(i) + ": " + what);
  };
  while (i < text.size()) {
    const unsigned char b0 = static_cast<unsigned char>(text[i]);
    std::uint32_t cp = 0;
    std::size_t len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xe0) == 0xc0) {
      cp = b0 & 0x1f;
      len = 2;
    } else if ((b0 & 0xf0) == 0xe0) {
      cp = b0 & 0x0f;
      len = 3;
    } else if ((b0 & 0xf8) == 0xf0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      fail("bad leading byte");
    }
    if (i + len > text.size()) fail("truncated sequence");
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char b = static_cast<unsigned char>(text[i + k]);
      if ((b & 0xc0) != 0x80) fail("bad continuation byte");
      cp = (cp << 6) | (b & 0x3f);
    }
    static constexpr std::uint32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (len > 1 && cp < kMin[len]) fail("overlong encoding");
    if (cp >= 0xd800 && cp <= 0xdfff) fail("surrogate code point");
    if (cp > 0x10ffff) fail("code point above U+10FFFF");
    out.push_back(static_cast<Char>(cp));
    i += len;
  }
  return out;
}

std::string utf8_encode(Char c) {
  std::string out;
  const std::uint32_t cp = static_cast<std::uint32_t>(c);
  if (cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) {
    throw Error("cannot encode invalid scalar value");
  }
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  } else {
    out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
  }
  return out;
}

std::string utf8_encode(std::u32string_view chars) {
  std::string out;
  out.reserve(chars.size());
  for (Char c : chars) out += utf8_encode(c);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed: " + path);
}

namespace {

// Splits file content into lines (LF or CRLF); keeps empty lines so callers
// can report 1-based line numbers.
std::vector<std::string> split_lines(const std::string& content) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t nl = content.find('\n', start);
    if (nl == std::string::npos) {
      if (start < content.size()) lines.push_back(content.substr(start));
      break;
    }
    std::string line = content.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = nl + 1;
  }
  return lines;
}

Sentence decode_sentence(const std::string& text, const std::string& path,
                         std::size_t lineno) {
  try {
    return Sentence::from_utf8(text);
  } catch (const Error& e) {
    throw Error(path + ":" + std::to_string(lineno) + ": " + e.what());
  }
}

}  // namespace

std::vector<SentencePair> read_parallel_tsv(const std::string& path) {
  const std::string content = read_file(path);
  std::vector<SentencePair> pairs;
  const std::vector<std::string> lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw Error(path + ":" + std::to_string(i + 1) +
                  ": expected 2 tab-separated fields");
    }
    SentencePair p;
    p.source = decode_sentence(line.substr(0, tab), path, i + 1);
    p.target = decode_sentence(line.substr(tab + 1), path, i + 1);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

void write_parallel_tsv(const std::string& path,
                        const std::vector<SentencePair>& pairs) {
  std::string out;
  for (const SentencePair& p : pairs) {
    out += p.source.to_utf8();
    out += '\t';
    out += p.target.to_utf8();
    out += '\n';
  }
  write_file(path, out);
}

std::vector<Sentence> read_sentence_lines(const std::string& path) {
  const std::string content = read_file(path);
  std::vector<Sentence> sentences;
  const std::vector<std::string> lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    sentences.push_back(decode_sentence(lines[i], path, i + 1));
  }
  return sentences;
}

void write_sentence_lines(const std::string& path,
                          const std::vector<Sentence>& sentences) {
  std::string out;
  for (const Sentence& s : sentences) {
    out += s.to_utf8();
    out += '\n';
  }
  write_file(path, out);
}

namespace {

json labels_to_json(const Sentence& source, const LabelSeq& labels) {
  json arr = json::array();
  for (std::size_t i = 0; i < source.size(); ++i) {
    arr.push_back({{"ins", labels[i].insert_before},
                   {"act", action_name(labels[i].action)}});
  }
  return arr;
}

}  // namespace

void write_labels_jsonl(const std::string& path,
                        const std::vector<SentencePair>& pairs) {
  std::string out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const SentencePair& p = pairs[i];
    if (!p.gold_labels) {
      throw Error("pair " + std::to_string(i + 1) + " has no gold labels");
    }
    validate_labels(p.source, *p.gold_labels);
    json obj;
    obj["source"] = p.source.to_utf8();
    obj["target"] = p.target.to_utf8();
    obj["labels"] = labels_to_json(p.source, *p.gold_labels);
    obj["end_ins"] = p.gold_labels->back().insert_before;
    out += obj.dump();
    out += '\n';
  }
  write_file(path, out);
}

std::vector<SentencePair> read_labels_jsonl(const std::string& path) {
  const std::string content = read_file(path);
  std::vector<SentencePair> pairs;
  const std::vector<std::string> lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    json obj;
    try {
      obj = json::parse(lines[i]);
    } catch (const json::exception& e) {
      throw Error(path + ":" + std::to_string(i + 1) + ": " + e.what());
    }
    SentencePair p;
    p.source = decode_sentence(obj.at("source").get<std::string>(), path, i + 1);
    p.target = decode_sentence(obj.at("target").get<std::string>(), path, i + 1);
    LabelSeq labels;
    for (const json& l : obj.at("labels")) {
      TokenLabel t;
      t.insert_before = l.at("ins").get<int>();
      t.action = action_from_name(l.at("act").get<std::string>());
      labels.push_back(t);
    }
    TokenLabel end_slot;
    end_slot.insert_before = obj.at("end_ins").get<int>();
    labels.push_back(end_slot);
    if (labels.size() != p.source.size() + 1) {
      throw Error(path + ":" + std::to_string(i + 1) + ": label sequence has " +
                  std::to_string(labels.size() - 1) + " entries for a " +
                  std::to_string(p.source.size()) + "-character source");
    }
    p.gold_labels = std::move(labels);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace charfix
