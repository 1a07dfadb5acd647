#include "charfix/confusion.hpp"

#include <algorithm>

#include "charfix/io.hpp"

namespace charfix {

namespace {
const std::u32string kEmpty;
}

void ConfusionSet::add(Char key, Char confusable) {
  if (key == confusable) return;
  std::u32string& entry = map_[key];
  if (entry.find(confusable) == std::u32string::npos) entry.push_back(confusable);
}

ConfusionSet ConfusionSet::load_file(const std::string& path) {
  return parse(read_file(path), path);
}

ConfusionSet ConfusionSet::parse(std::string_view content, const std::string& origin) {
  ConfusionSet set;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t nl = content.find('\n', start);
    std::string_view line = content.substr(
        start, nl == std::string_view::npos ? content.size() - start : nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++lineno;
    if (!line.empty()) {
      const std::size_t tab = line.find('\t');
      if (tab == std::string_view::npos) {
        throw Error(origin + ":" + std::to_string(lineno) +
                    ": expected `char<TAB>confusables`");
      }
      const std::u32string key = utf8_decode(line.substr(0, tab));
      const std::u32string confusables = utf8_decode(line.substr(tab + 1));
      if (key.size() != 1) {
        throw Error(origin + ":" + std::to_string(lineno) +
                    ": key must be a single character");
      }
      for (Char c : confusables) set.add(key[0], c);
    }
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return set;
}

std::string ConfusionSet::serialize() const {
  std::string out;
  for (Char key : keys()) {
    out += utf8_encode(key);
    out += '\t';
    out += utf8_encode(map_.at(key));
    out += '\n';
  }
  return out;
}

bool ConfusionSet::has(Char key) const { return map_.count(key) > 0; }

const std::u32string& ConfusionSet::lookup(Char key) const {
  auto it = map_.find(key);
  return it == map_.end() ? kEmpty : it->second;
}

std::vector<Char> ConfusionSet::keys() const {
  std::vector<Char> out;
  out.reserve(map_.size());
  for (const auto& [k, v] : map_) out.push_back(k);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace charfix
