#include "charfix/corrector.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "charfix/io.hpp"

namespace charfix {

using nlohmann::json;

namespace {

std::uint64_t pack2(Char a, Char b) {
  return (static_cast<std::uint64_t>(a) << 21) | static_cast<std::uint64_t>(b);
}

std::uint64_t pack3(Char a, Char b, Char c) {
  return (static_cast<std::uint64_t>(a) << 42) |
         (static_cast<std::uint64_t>(b) << 21) | static_cast<std::uint64_t>(c);
}

std::uint64_t lookup(const std::unordered_map<std::uint64_t, std::uint64_t>& m,
                     std::uint64_t key) {
  auto it = m.find(key);
  return it == m.end() ? 0 : it->second;
}

}  // namespace

CharLM::CharLM(double k, std::size_t top_k) : k_(k), top_k_(top_k) {
  if (k <= 0.0) throw Error("charlm: smoothing constant must be positive");
}

void CharLM::count_sentence(const Sentence& sentence) {
  std::u32string padded;
  padded.reserve(sentence.size() + 3);
  padded.push_back(kBos);
  padded.push_back(kBos);
  padded.append(sentence.chars());
  padded.push_back(kEos);

  for (Char c : sentence.chars()) ++uni_[c];
  for (std::size_t i = 0; i + 1 < padded.size(); ++i) {
    ++bi_[pack2(padded[i], padded[i + 1])];
  }
  for (std::size_t i = 0; i + 2 < padded.size(); ++i) {
    ++tri_[pack3(padded[i], padded[i + 1], padded[i + 2])];
    ++tri_context_[pack2(padded[i], padded[i + 1])];
  }
}

void CharLM::finalize() {
  vocab_size_ = uni_.size() + 2;  // observed plus BOS and EOS

  std::u32string chars;
  chars.reserve(uni_.size());
  for (const auto& [c, count] : uni_) chars.push_back(c);
  std::sort(chars.begin(), chars.end(), [this](Char a, Char b) {
    const std::uint64_t ca = uni_.at(a);
    const std::uint64_t cb = uni_.at(b);
    if (ca != cb) return ca > cb;
    return a < b;
  });
  if (chars.size() > top_k_) chars.resize(top_k_);
  top_candidates_ = std::move(chars);
}

CharLM CharLM::train(const std::vector<Sentence>& corpus, double k,
                     std::size_t top_k) {
  if (corpus.empty()) throw Error("train_lm: empty corpus");
  CharLM lm(k, top_k);
  for (const Sentence& s : corpus) lm.count_sentence(s);
  lm.finalize();
  return lm;
}

double CharLM::log_cond(Char l2, Char l1, Char c) const {
  const double num = static_cast<double>(lookup(tri_, pack3(l2, l1, c))) + k_;
  const double den = static_cast<double>(lookup(tri_context_, pack2(l2, l1))) +
                     k_ * static_cast<double>(vocab_size_);
  return std::log(num) - std::log(den);
}

std::uint64_t CharLM::unigram_count(Char c) const {
  auto it = uni_.find(c);
  return it == uni_.end() ? 0 : it->second;
}

std::uint64_t CharLM::bigram_count(Char a, Char b) const {
  return lookup(bi_, pack2(a, b));
}

std::uint64_t CharLM::trigram_count(Char a, Char b, Char c) const {
  return lookup(tri_, pack3(a, b, c));
}

std::vector<Char> CharLM::vocabulary() const {
  std::vector<Char> out;
  out.reserve(vocab_size_);
  out.push_back(kBos);
  out.push_back(kEos);
  for (const auto& [c, count] : uni_) out.push_back(c);
  std::sort(out.begin(), out.end());
  return out;
}

double score_candidate(const CharLM& lm, std::u32string_view left, Char c,
                       std::u32string_view right) {
  const Char l1 = left.empty() ? CharLM::kBos : left.back();
  const Char l2 = left.size() < 2 ? CharLM::kBos : left[left.size() - 2];
  double score = lm.log_cond(l2, l1, c);
  if (!right.empty()) score += lm.log_cond(l1, c, right.front());
  return score;
}

namespace {

struct BeamItem {
  std::u32string out;
  double score = 0.0;
};

// Candidate pool for one mask slot. Falls back so that filling always
// produces some character.
std::u32string candidates_for(const CharLM& lm, const Slot& slot,
                              const ConfusionSet* confusion) {
  if (slot.kind == MaskKind::kMistaken && confusion != nullptr &&
      slot.has_original) {
    const std::u32string& set = confusion->lookup(slot.original);
    if (!set.empty()) return set;
  }
  if (!lm.top_candidates().empty()) return lm.top_candidates();
  if (slot.has_original) return std::u32string(1, slot.original);
  return U"?";
}

}  // namespace

Sentence fill(const CharLM& lm, const MaskedSequence& masked,
              const ConfusionSet* confusion, int beam_width) {
  const std::size_t width = beam_width < 1 ? 1 : static_cast<std::size_t>(beam_width);
  const std::vector<Slot>& slots = masked.slots;

  std::vector<BeamItem> beam{BeamItem{}};
  std::vector<BeamItem> expanded;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const Slot& slot = slots[i];
    if (!slot.is_mask) {
      for (BeamItem& item : beam) item.out.push_back(slot.ch);
      continue;
    }
    std::u32string right;
    if (i + 1 < slots.size()) {
      if (!slots[i + 1].is_mask) right.push_back(slots[i + 1].ch);
    } else {
      right.push_back(CharLM::kEos);
    }
    const std::u32string cands = candidates_for(lm, slot, confusion);
    expanded.clear();
    for (const BeamItem& item : beam) {
      for (Char c : cands) {
        BeamItem next = item;
        next.out.push_back(c);
        next.score += score_candidate(lm, item.out, c, right);
        expanded.push_back(std::move(next));
      }
    }
    std::sort(expanded.begin(), expanded.end(),
              [](const BeamItem& a, const BeamItem& b) {
                if (a.score != b.score) return a.score > b.score;
                return a.out < b.out;
              });
    if (expanded.size() > width) expanded.resize(width);
    beam = expanded;
  }
  return Sentence(std::move(beam.front().out));
}

std::string CharLM::save_json() const {
  json obj;
  obj["kind"] = "charlm.v1";
  obj["k"] = k_;
  obj["topk"] = top_k_;
  json uni = json::object();
  for (const auto& [c, count] : uni_) uni[utf8_encode(c)] = count;
  json bi = json::object();
  for (const auto& [key, count] : bi_) {
    const Char a = static_cast<Char>(key >> 21);
    const Char b = static_cast<Char>(key & 0x1fffff);
    bi[utf8_encode(a) + utf8_encode(b)] = count;
  }
  json tri = json::object();
  for (const auto& [key, count] : tri_) {
    const Char a = static_cast<Char>(key >> 42);
    const Char b = static_cast<Char>((key >> 21) & 0x1fffff);
    const Char c = static_cast<Char>(key & 0x1fffff);
    tri[utf8_encode(a) + utf8_encode(b) + utf8_encode(c)] = count;
  }
  obj["counts"] = {{"uni", std::move(uni)},
                   {"bi", std::move(bi)},
                   {"tri", std::move(tri)}};
  return obj.dump();
}

void CharLM::save_file(const std::string& path) const {
  write_file(path, save_json());
}

CharLM CharLM::load_json(const std::string& content) {
  json obj;
  try {
    obj = json::parse(content);
  } catch (const json::exception& e) {
    throw Error(std::string("charlm: ") + e.what());
  }
  if (obj.value("kind", "") != "charlm.v1") {
    throw Error("charlm: expected kind charlm.v1, got \"" +
                obj.value("kind", "") + "\"");
  }
  CharLM lm(obj.at("k").get<double>(), obj.at("topk").get<std::size_t>());
  const json& counts = obj.at("counts");
  for (const auto& [key, value] : counts.at("uni").items()) {
    const std::u32string s = utf8_decode(key);
    if (s.size() != 1) throw Error("charlm: bad uni key");
    lm.uni_[s[0]] = value.get<std::uint64_t>();
  }
  for (const auto& [key, value] : counts.at("bi").items()) {
    const std::u32string s = utf8_decode(key);
    if (s.size() != 2) throw Error("charlm: bad bi key");
    lm.bi_[pack2(s[0], s[1])] = value.get<std::uint64_t>();
  }
  for (const auto& [key, value] : counts.at("tri").items()) {
    const std::u32string s = utf8_decode(key);
    if (s.size() != 3) throw Error("charlm: bad tri key");
    const std::uint64_t count = value.get<std::uint64_t>();
    lm.tri_[pack3(s[0], s[1], s[2])] = count;
    lm.tri_context_[pack2(s[0], s[1])] += count;
  }
  lm.finalize();
  return lm;
}

CharLM CharLM::load_file(const std::string& path) {
  try {
    return load_json(read_file(path));
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

}  // namespace charfix
