#include "charfix/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <string_view>

#include <json.hpp>

#include "charfix/align.hpp"
#include "charfix/io.hpp"

namespace charfix {

using nlohmann::json;

double f_beta(double p, double r, double beta) {
  const double b2 = beta * beta;
  const double den = b2 * p + r;
  if (den <= 0.0) return 0.0;
  return (1.0 + b2) * p * r / den;
}

EvalCounts& EvalCounts::operator+=(const EvalCounts& other) {
  tp += other.tp;
  proposed += other.proposed;
  gold += other.gold;
  return *this;
}

EvalReport make_report(const EvalCounts& totals, double beta,
                       ZeroConvention zero) {
  const double empty = zero == ZeroConvention::kOne ? 1.0 : 0.0;
  EvalReport report;
  report.beta = beta;
  report.counts = totals;
  report.precision = totals.proposed > 0
                         ? static_cast<double>(totals.tp) /
                               static_cast<double>(totals.proposed)
                         : empty;
  report.recall = totals.gold > 0 ? static_cast<double>(totals.tp) /
                                        static_cast<double>(totals.gold)
                                  : empty;
  report.f_score = f_beta(report.precision, report.recall, beta);
  return report;
}

void validate_edits(const Sentence& source, const EditSet& edits) {
  const int n = static_cast<int>(source.size());
  for (const Edit& e : edits) {
    if (e.start < 0 || e.start > e.end || e.end > n) {
      throw Error("edit span [" + std::to_string(e.start) + "," +
                  std::to_string(e.end) + ") out of range for length " +
                  std::to_string(n));
    }
  }
}

SentenceLevelResult eval_sentence_level(
    const std::vector<SentencePair>& pairs,
    const std::vector<Sentence>& hypotheses,
    const std::vector<LabelSeq>* predicted_labels) {
  if (pairs.size() != hypotheses.size()) {
    throw Error("sentence-level eval: " + std::to_string(pairs.size()) +
                " pairs vs " + std::to_string(hypotheses.size()) +
                " hypotheses");
  }
  if (predicted_labels != nullptr && predicted_labels->size() != pairs.size()) {
    throw Error("sentence-level eval: predicted label count mismatch");
  }

  SentenceLevelResult result;
  EvalCounts det_total;
  EvalCounts corr_total;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const SentencePair& pair = pairs[i];
    const Sentence& hyp = hypotheses[i];

    LabelSeq gold_labels = pair.gold_labels
                               ? *pair.gold_labels
                               : derive_labels(pair).labels;
    validate_labels(pair.source, gold_labels);
    LabelSeq pred_labels =
        predicted_labels != nullptr
            ? (*predicted_labels)[i]
            : derive_labels({pair.source, hyp, std::nullopt}).labels;
    validate_labels(pair.source, pred_labels);

    bool any_pred = false;
    bool exact = true;
    for (std::size_t k = 0; k < gold_labels.size(); ++k) {
      const ErrorClass g = project_label(gold_labels[k]);
      const ErrorClass p = project_label(pred_labels[k]);
      if (p != ErrorClass::kKeep) any_pred = true;
      if (p != g) exact = false;
    }
    const bool has_error = pair.source != pair.target;

    EvalCounts det;
    det.proposed = any_pred ? 1 : 0;
    det.gold = has_error ? 1 : 0;
    det.tp = (has_error && exact) ? 1 : 0;

    EvalCounts corr;
    corr.proposed = hyp != pair.source ? 1 : 0;
    corr.gold = has_error ? 1 : 0;
    corr.tp = (has_error && hyp == pair.target) ? 1 : 0;

    det_total += det;
    corr_total += corr;
    result.detection.per_sentence.push_back(det);
    result.correction.per_sentence.push_back(corr);
  }

  auto det_diag = std::move(result.detection.per_sentence);
  auto corr_diag = std::move(result.correction.per_sentence);
  result.detection = make_report(det_total, 1.0, ZeroConvention::kZero);
  result.correction = make_report(corr_total, 1.0, ZeroConvention::kZero);
  result.detection.per_sentence = std::move(det_diag);
  result.correction.per_sentence = std::move(corr_diag);
  return result;
}

namespace {

// Prefix (from the top-left) or suffix (to the bottom-right) unit-cost edit
// distances over the (n+1) x (m+1) alignment grid.
std::vector<int> prefix_costs(const std::u32string& s, const std::u32string& t) {
  const std::size_t n = s.size();
  const std::size_t m = t.size();
  std::vector<int> g((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> int& {
    return g[i * (m + 1) + j];
  };
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    at(i, 0) = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const int diag = at(i - 1, j - 1) + (s[i - 1] == t[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }
  return g;
}

std::vector<int> suffix_costs(const std::u32string& s, const std::u32string& t) {
  const std::size_t n = s.size();
  const std::size_t m = t.size();
  std::vector<int> h((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> int& {
    return h[i * (m + 1) + j];
  };
  for (std::size_t j = 0; j <= m; ++j) at(n, j) = static_cast<int>(m - j);
  for (std::size_t i = n; i-- > 0;) {
    at(i, m) = static_cast<int>(n - i);
    for (std::size_t j = m; j-- > 0;) {
      const int diag = at(i + 1, j + 1) + (s[i] == t[j] ? 0 : 1);
      at(i, j) = std::min({diag, at(i + 1, j) + 1, at(i, j + 1) + 1});
    }
  }
  return h;
}

// Path search over the lattice of minimal alignments: maximizes gold matches,
// then minimizes the number of proposed edits.
EvalCounts m2_match_counts(const Sentence& source, const Sentence& hypothesis,
                           const EditSet& gold) {
  const std::u32string& s = source.chars();
  const std::u32string& t = hypothesis.chars();
  const std::size_t n = s.size();
  const std::size_t m = t.size();
  const std::vector<int> g = prefix_costs(s, t);
  const std::vector<int> h = suffix_costs(s, t);
  const std::size_t cols = m + 1;
  const int dist = g[n * cols + m];

  auto on_path = [&](std::size_t i, std::size_t j) {
    return g[i * cols + j] + h[i * cols + j] == dist;
  };

  auto is_gold = [&gold](std::size_t start, std::size_t end,
                         std::u32string_view replacement) {
    for (const Edit& e : gold) {
      if (static_cast<std::size_t>(e.start) == start &&
          static_cast<std::size_t>(e.end) == end &&
          e.replacement == replacement) {
        return true;
      }
    }
    return false;
  };

  constexpr std::int64_t kUnreachable = -1;
  std::vector<std::int64_t> best_tp((n + 1) * cols, kUnreachable);
  std::vector<std::int64_t> best_ne((n + 1) * cols, 0);
  best_tp[0] = 0;

  auto relax = [&](std::size_t node, std::int64_t tp, std::int64_t ne) {
    if (tp > best_tp[node] || (tp == best_tp[node] && ne < best_ne[node])) {
      best_tp[node] = tp;
      best_ne[node] = ne;
    }
  };

  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= m; ++j) {
      const std::size_t u = i * cols + j;
      if (best_tp[u] == kUnreachable) continue;
      if (!on_path(i, j)) continue;

      // Free traversal along a character match on some minimal alignment.
      if (i < n && j < m && s[i] == t[j] &&
          g[(i + 1) * cols + j + 1] == g[u] && on_path(i + 1, j + 1)) {
        relax((i + 1) * cols + j + 1, best_tp[u], best_ne[u]);
      }

      // Merged edits: replace s[i..i2) with t[j..j2). Admissible when both
      // endpoints lie on minimal alignments and the segment is itself
      // optimally aligned, i.e. its edit distance accounts exactly for the
      // cost difference.
      const std::size_t i_max = std::min(n, i + kM2MaxMergeSpan);
      const std::size_t j_max = std::min(m, j + kM2MaxMergeSpan);
      for (std::size_t i2 = i; i2 <= i_max; ++i2) {
        for (std::size_t j2 = j; j2 <= j_max; ++j2) {
          if (i2 == i && j2 == j) continue;
          const std::size_t v = i2 * cols + j2;
          if (!on_path(i2, j2)) continue;
          const std::u32string_view src_seg(s.data() + i, i2 - i);
          const std::u32string_view rep_seg(t.data() + j, j2 - j);
          if (src_seg == rep_seg) continue;  // a noop is not an edit
          const Sentence seg_s{std::u32string(src_seg)};
          const Sentence seg_t{std::u32string(rep_seg)};
          if (g[v] - g[u] != edit_distance(seg_s, seg_t)) continue;
          const std::int64_t tp =
              best_tp[u] + (is_gold(i, i2, rep_seg) ? 1 : 0);
          relax(v, tp, best_ne[u] + 1);
        }
      }
    }
  }

  EvalCounts counts;
  counts.tp = static_cast<std::uint64_t>(best_tp[n * cols + m]);
  counts.proposed = static_cast<std::uint64_t>(best_ne[n * cols + m]);
  counts.gold = gold.size();
  return counts;
}

// Best annotator for one sentence: highest F, then more matches, then fewer
// proposed edits, then lowest index.
EvalCounts m2_best_annotator(const Sentence& source, const Sentence& hypothesis,
                             const std::vector<EditSet>& annotations,
                             double beta) {
  if (annotations.empty()) {
    throw Error("m2: sentence without gold annotations");
  }
  EvalCounts best;
  double best_f = -1.0;
  for (const EditSet& gold : annotations) {
    validate_edits(source, gold);
    const EvalCounts counts = m2_match_counts(source, hypothesis, gold);
    const double f =
        make_report(counts, beta, ZeroConvention::kOne).f_score;
    const bool better =
        f > best_f ||
        (f == best_f &&
         (counts.tp > best.tp ||
          (counts.tp == best.tp && counts.proposed < best.proposed)));
    if (better) {
      best_f = f;
      best = counts;
    }
  }
  return best;
}

}  // namespace

EvalReport m2_score(const Sentence& source, const Sentence& hypothesis,
                    const std::vector<EditSet>& gold_annotations, double beta) {
  const EvalCounts counts =
      m2_best_annotator(source, hypothesis, gold_annotations, beta);
  EvalReport report = make_report(counts, beta, ZeroConvention::kOne);
  report.per_sentence.push_back(counts);
  return report;
}

EvalReport m2_score_corpus(const std::vector<Sentence>& sources,
                           const std::vector<Sentence>& hypotheses,
                           const std::vector<std::vector<EditSet>>& gold,
                           double beta) {
  if (sources.size() != hypotheses.size() || sources.size() != gold.size()) {
    throw Error("m2: sources, hypotheses and gold must have equal counts");
  }
  EvalCounts total;
  std::vector<EvalCounts> per_sentence;
  per_sentence.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const EvalCounts counts =
        m2_best_annotator(sources[i], hypotheses[i], gold[i], beta);
    total += counts;
    per_sentence.push_back(counts);
  }
  EvalReport report = make_report(total, beta, ZeroConvention::kOne);
  report.per_sentence = std::move(per_sentence);
  return report;
}

namespace {

EvalCounts errant_counts(const Sentence& source, const Sentence& hypothesis,
                         const EditSet& gold, bool type_sensitive) {
  validate_edits(source, gold);
  const std::vector<Edit> system = extract_edits(source, hypothesis, true);
  std::vector<bool> used(gold.size(), false);
  EvalCounts counts;
  counts.proposed = system.size();
  counts.gold = gold.size();
  for (const Edit& e : system) {
    for (std::size_t k = 0; k < gold.size(); ++k) {
      if (used[k]) continue;
      const Edit& g = gold[k];
      if (g.start != e.start || g.end != e.end ||
          g.replacement != e.replacement) {
        continue;
      }
      if (type_sensitive && g.etype != e.etype) continue;
      used[k] = true;
      ++counts.tp;
      break;
    }
  }
  return counts;
}

}  // namespace

EvalReport errant_score(const Sentence& source, const Sentence& hypothesis,
                        const EditSet& gold, double beta, bool type_sensitive) {
  const EvalCounts counts =
      errant_counts(source, hypothesis, gold, type_sensitive);
  EvalReport report = make_report(counts, beta, ZeroConvention::kOne);
  report.per_sentence.push_back(counts);
  return report;
}

EvalReport errant_score_corpus(const std::vector<Sentence>& sources,
                               const std::vector<Sentence>& hypotheses,
                               const std::vector<EditSet>& gold, double beta,
                               bool type_sensitive) {
  if (sources.size() != hypotheses.size() || sources.size() != gold.size()) {
    throw Error("errant: sources, hypotheses and gold must have equal counts");
  }
  EvalCounts total;
  std::vector<EvalCounts> per_sentence;
  per_sentence.reserve(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const EvalCounts counts =
        errant_counts(sources[i], hypotheses[i], gold[i], type_sensitive);
    total += counts;
    per_sentence.push_back(counts);
  }
  EvalReport report = make_report(total, beta, ZeroConvention::kOne);
  report.per_sentence = std::move(per_sentence);
  return report;
}

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t stop = text.find(sep, start);
    if (stop == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, stop - start));
    start = stop + 1;
  }
}

std::vector<std::string_view> split_fields(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t stop = text.find("|||", start);
    if (stop == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, stop - start));
    start = stop + 3;
  }
}

int parse_int(std::string_view text, const std::string& where) {
  try {
    std::size_t used = 0;
    const int value = std::stoi(std::string(text), &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return value;
  } catch (const std::exception&) {
    throw Error(where + ": expected an integer, got \"" + std::string(text) +
                "\"");
  }
}

// Space-separated single characters; the empty string yields no characters.
std::u32string parse_char_tokens(std::string_view text,
                                 const std::string& where) {
  std::u32string out;
  if (text.empty()) return out;
  for (std::string_view token : split(text, ' ')) {
    const std::u32string decoded = utf8_decode(token);
    if (decoded.size() != 1) {
      throw Error(where + ": token \"" + std::string(token) +
                  "\" is not a single character");
    }
    out.push_back(decoded[0]);
  }
  return out;
}

EditType edit_type_from_m2(std::string_view text, int start, int end,
                           const std::u32string& replacement) {
  if (text == "M") return EditType::kMissing;
  if (text == "R") return EditType::kReplacement;
  if (text == "U") return EditType::kUnnecessary;
  return classify_edit(start, end, replacement);
}

}  // namespace

std::vector<M2Sentence> parse_m2(std::string_view content,
                                 const std::string& origin) {
  std::vector<M2Sentence> out;
  bool in_block = false;
  bool have_source = false;
  std::vector<std::pair<int, Edit>> edits;    // annotator, edit
  std::vector<int> noop_annotators;
  Sentence source;

  auto flush = [&](const std::string& where) {
    if (!in_block) return;
    if (!have_source) throw Error(where + ": block without an S line");
    M2Sentence sentence;
    sentence.source = source;
    std::vector<int> ids;
    for (const auto& [ann, edit] : edits) ids.push_back(ann);
    for (int ann : noop_annotators) ids.push_back(ann);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.empty()) {
      sentence.annotations.emplace_back();
    } else {
      for (int ann : ids) {
        EditSet set;
        for (const auto& [a, edit] : edits) {
          if (a == ann) set.push_back(edit);
        }
        sentence.annotations.push_back(std::move(set));
      }
    }
    out.push_back(std::move(sentence));
    in_block = false;
    have_source = false;
    edits.clear();
    noop_annotators.clear();
    source = Sentence();
  };

  const auto lines = split(content, '\n');
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::string_view line = lines[ln];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::string where = origin + ":" + std::to_string(ln + 1);
    if (line.empty()) {
      flush(where);
      continue;
    }
    if (line == "S" || line.substr(0, 2) == "S ") {
      if (have_source) throw Error(where + ": second S line in one block");
      in_block = true;
      have_source = true;
      source = Sentence(line == "S" ? std::u32string()
                                    : parse_char_tokens(line.substr(2), where));
      continue;
    }
    if (line.substr(0, 2) == "A ") {
      if (!have_source) throw Error(where + ": A line before S line");
      const auto fields = split_fields(line.substr(2));
      if (fields.size() < 6) {
        throw Error(where + ": expected 6 |||-separated fields");
      }
      const auto range = split(fields[0], ' ');
      if (range.size() != 2) {
        throw Error(where + ": expected `start end` before the first |||");
      }
      const int start = parse_int(range[0], where);
      const int end = parse_int(range[1], where);
      const int annotator = parse_int(fields[5], where);
      if (annotator < 0) throw Error(where + ": negative annotator id");
      if (fields[1] == "noop") {
        noop_annotators.push_back(annotator);
        continue;
      }
      std::u32string replacement;
      if (fields[2] != "-NONE-") {
        replacement = parse_char_tokens(fields[2], where);
      }
      if (start < 0 || start > end ||
          end > static_cast<int>(source.size())) {
        throw Error(where + ": edit span out of range");
      }
      Edit edit;
      edit.start = start;
      edit.end = end;
      edit.replacement = std::move(replacement);
      edit.etype = edit_type_from_m2(fields[1], start, end, edit.replacement);
      edits.emplace_back(annotator, std::move(edit));
      continue;
    }
    throw Error(where + ": expected an S line, an A line or a blank line");
  }
  flush(origin + ":end");
  return out;
}

std::vector<M2Sentence> read_m2_file(const std::string& path) {
  return parse_m2(read_file(path), path);
}

namespace {

std::string join_chars(const std::u32string& chars) {
  std::string out;
  for (std::size_t i = 0; i < chars.size(); ++i) {
    if (i > 0) out.push_back(' ');
    if (chars[i] == U' ') {
      throw Error("m2 format cannot represent a literal space character");
    }
    out += utf8_encode(chars[i]);
  }
  return out;
}

}  // namespace

std::string format_m2(const std::vector<M2Sentence>& sentences) {
  std::string out;
  for (const M2Sentence& sentence : sentences) {
    if (!out.empty()) out.push_back('\n');
    out.push_back('S');
    const std::string chars = join_chars(sentence.source.chars());
    if (!chars.empty()) {
      out.push_back(' ');
      out += chars;
    }
    out.push_back('\n');
    for (std::size_t ann = 0; ann < sentence.annotations.size(); ++ann) {
      const EditSet& set = sentence.annotations[ann];
      if (set.empty()) {
        if (sentence.annotations.size() > 1) {
          out += "A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||" +
                 std::to_string(ann) + "\n";
        }
        continue;
      }
      for (const Edit& edit : set) {
        validate_edits(sentence.source, {edit});
        out += "A " + std::to_string(edit.start) + " " +
               std::to_string(edit.end) + "|||" + edit_type_name(edit.etype) +
               "|||" +
               (edit.replacement.empty() ? "-NONE-"
                                         : join_chars(edit.replacement)) +
               "|||REQUIRED|||-NONE-|||" + std::to_string(ann) + "\n";
      }
    }
  }
  return out;
}

void write_m2_file(const std::string& path,
                   const std::vector<M2Sentence>& sentences) {
  write_file(path, format_m2(sentences));
}

namespace {

json report_json(const EvalReport& report) {
  json per = json::array();
  for (const EvalCounts& c : report.per_sentence) {
    per.push_back({{"tp", c.tp}, {"proposed", c.proposed}, {"gold", c.gold}});
  }
  return json{{"beta", report.beta},
              {"precision", report.precision},
              {"recall", report.recall},
              {"f", report.f_score},
              {"tp", report.counts.tp},
              {"proposed", report.counts.proposed},
              {"gold", report.counts.gold},
              {"per_sentence", std::move(per)}};
}

}  // namespace

std::string render_reports_json(
    const std::vector<std::pair<std::string, EvalReport>>& sections) {
  json obj = json::object();
  for (const auto& [name, report] : sections) {
    obj[name] = report_json(report);
  }
  return obj.dump(2) + "\n";
}

std::string render_reports_table(
    const std::vector<std::pair<std::string, EvalReport>>& sections) {
  std::size_t name_width = 4;
  for (const auto& [name, report] : sections) {
    name_width = std::max(name_width, name.size());
  }
  char line[256];
  std::snprintf(line, sizeof line, "%-*s %9s %9s %9s %8s %9s %7s\n",
                static_cast<int>(name_width), "", "prec", "rec", "f", "tp",
                "propose", "gold");
  std::string out = line;
  for (const auto& [name, report] : sections) {
    std::snprintf(line, sizeof line,
                  "%-*s %9.4f %9.4f %9.4f %8llu %9llu %7llu\n",
                  static_cast<int>(name_width), name.c_str(), report.precision,
                  report.recall, report.f_score,
                  static_cast<unsigned long long>(report.counts.tp),
                  static_cast<unsigned long long>(report.counts.proposed),
                  static_cast<unsigned long long>(report.counts.gold));
    out += line;
  }
  return out;
}

}  // namespace charfix
