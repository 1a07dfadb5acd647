#include "charfix/align.hpp"

#include <algorithm>

namespace charfix {

namespace {

// Suffix distances: cost[i][j] = edit distance between source[i..) and
// target[j..), flattened row-major over (n+1) x (m+1).
std::vector<int> suffix_costs(const std::u32string& s, const std::u32string& t) {
  const std::size_t n = s.size();
  const std::size_t m = t.size();
  if ((n + 1) * (m + 1) > (std::size_t{1} << 26)) {
    throw Error("align: sentences too long (" + std::to_string(n) + " x " +
                std::to_string(m) + ")");
  }
  std::vector<int> cost((n + 1) * (m + 1));
  const auto at = [&](std::size_t i, std::size_t j) -> int& {
    return cost[i * (m + 1) + j];
  };
  for (std::size_t j = 0; j <= m; ++j) at(n, j) = static_cast<int>(m - j);
  for (std::size_t i = n; i-- > 0;) {
    at(i, m) = static_cast<int>(n - i);
    for (std::size_t j = m; j-- > 0;) {
      const int diag = at(i + 1, j + 1) + (s[i] == t[j] ? 0 : 1);
      const int del = at(i + 1, j) + 1;
      const int ins = at(i, j + 1) + 1;
      at(i, j) = std::min({diag, del, ins});
    }
  }
  return cost;
}

}  // namespace

int edit_distance(const Sentence& source, const Sentence& target) {
  return suffix_costs(source.chars(), target.chars())[0];
}

std::vector<AlignmentOp> align(const Sentence& source, const Sentence& target) {
  const std::u32string& s = source.chars();
  const std::u32string& t = target.chars();
  const std::size_t n = s.size();
  const std::size_t m = t.size();
  const std::vector<int> cost = suffix_costs(s, t);
  const auto at = [&](std::size_t i, std::size_t j) {
    return cost[i * (m + 1) + j];
  };

  std::vector<AlignmentOp> ops;
  ops.reserve(std::max(n, m));
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    const int here = at(i, j);
    if (i < n && j < m && s[i] == t[j] && at(i + 1, j + 1) == here) {
      ops.push_back({OpKind::kMatch, static_cast<int>(i), static_cast<int>(j)});
      ++i, ++j;
    } else if (i < n && j < m && s[i] != t[j] && at(i + 1, j + 1) + 1 == here) {
      ops.push_back({OpKind::kSubstitute, static_cast<int>(i), static_cast<int>(j)});
      ++i, ++j;
    } else if (i < n && at(i + 1, j) + 1 == here) {
      ops.push_back({OpKind::kDelete, static_cast<int>(i), static_cast<int>(j)});
      ++i;
    } else {
      ops.push_back({OpKind::kInsert, static_cast<int>(i), static_cast<int>(j)});
      ++j;
    }
  }
  return ops;
}

LabelDerivation derive_labels(const SentencePair& pair) {
  const std::vector<AlignmentOp> ops = align(pair.source, pair.target);
  LabelDerivation out;
  out.labels.assign(pair.source.size() + 1, TokenLabel{});
  for (const AlignmentOp& op : ops) {
    TokenLabel& label = out.labels[static_cast<std::size_t>(op.src)];
    switch (op.kind) {
      case OpKind::kMatch:
        label.action = Action::kKeep;
        break;
      case OpKind::kSubstitute:
        label.action = Action::kMistaken;
        break;
      case OpKind::kDelete:
        label.action = Action::kRedundant;
        break;
      case OpKind::kInsert:
        label.insert_before += 1;
        break;
    }
  }
  // A non-keep action wins over a pending insertion on the same token. The
  // 4-class classifier is single-label per token, so these cannot coexist.
  for (std::size_t i = 0; i < pair.source.size(); ++i) {
    TokenLabel& label = out.labels[i];
    if (label.insert_before > 0 && label.action != Action::kKeep) {
      label.insert_before = 0;
      ++out.conflicts;
    }
  }
  return out;
}

std::vector<Edit> extract_edits(const Sentence& source, const Sentence& hypothesis,
                                bool merge) {
  const std::vector<AlignmentOp> ops = align(source, hypothesis);
  const std::u32string& h = hypothesis.chars();
  std::vector<Edit> edits;
  std::size_t k = 0;
  while (k < ops.size()) {
    if (ops[k].kind == OpKind::kMatch) {
      ++k;
      continue;
    }
    std::size_t end = k + 1;
    if (merge) {
      while (end < ops.size() && ops[end].kind != OpKind::kMatch) ++end;
    }
    const int src_start = ops[k].src;
    int src_end = src_start;
    std::u32string replacement;
    for (std::size_t q = k; q < end; ++q) {
      if (ops[q].kind != OpKind::kInsert) src_end = ops[q].src + 1;
      if (ops[q].kind != OpKind::kDelete)
        replacement.push_back(h[static_cast<std::size_t>(ops[q].tgt)]);
    }
    edits.push_back(make_edit(src_start, src_end, std::move(replacement)));
    k = end;
  }
  return edits;
}

}  // namespace charfix
