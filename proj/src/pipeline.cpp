#include "charfix/pipeline.hpp"

#include <thread>

#include <json.hpp>

#include "charfix/io.hpp"
#include "charfix/modlogic.hpp"

namespace charfix {

using nlohmann::json;

SentenceCorrection correct_sentence(const DetectorModel& det, const CharLM& lm,
                                    const ConfusionSet* confusion,
                                    const Sentence& source, int beam_width) {
  SentenceCorrection result;
  result.labels = det.tag(source);
  result.masked = rewrite(source, result.labels);
  result.output = fill(lm, result.masked, confusion, beam_width);
  return result;
}

std::string CorpusSummary::to_json() const {
  json tags = json::object();
  for (int k = 0; k < kNumClasses; ++k) {
    tags[class_name(static_cast<ErrorClass>(k))] =
        tag_counts[static_cast<std::size_t>(k)];
  }
  json obj{{"sentences", sentences},
           {"changed", changed},
           {"masks_filled", masks_filled},
           {"tags", std::move(tags)}};
  return obj.dump(2) + "\n";
}

std::string CorpusSummary::to_text() const {
  std::string out;
  out += "sentences    " + std::to_string(sentences) + "\n";
  out += "changed      " + std::to_string(changed) + "\n";
  out += "masks filled " + std::to_string(masks_filled) + "\n";
  out += "tags        ";
  for (int k = 0; k < kNumClasses; ++k) {
    out += " ";
    out += class_name(static_cast<ErrorClass>(k));
    out += "=" + std::to_string(tag_counts[static_cast<std::size_t>(k)]);
  }
  out += "\n";
  return out;
}

void write_trace_jsonl(const std::string& path,
                       const std::vector<TraceRecord>& records) {
  std::string out;
  for (const TraceRecord& r : records) {
    validate_labels(r.source, r.labels);
    json labels = json::array();
    for (std::size_t i = 0; i < r.source.size(); ++i) {
      labels.push_back({{"ins", r.labels[i].insert_before},
                        {"act", action_name(r.labels[i].action)}});
    }
    json obj{{"source", r.source.to_utf8()},
             {"labels", std::move(labels)},
             {"end_ins", r.labels.back().insert_before},
             {"masked", r.masked},
             {"output", r.output.to_utf8()}};
    out += obj.dump();
    out += '\n';
  }
  write_file(path, out);
}

std::vector<TraceRecord> read_trace_jsonl(const std::string& path) {
  const std::string content = read_file(path);
  std::vector<TraceRecord> records;
  std::size_t start = 0;
  std::size_t lineno = 0;
  while (start <= content.size()) {
    std::size_t stop = content.find('\n', start);
    if (stop == std::string::npos) stop = content.size();
    std::string line = content.substr(start, stop - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++lineno;
    const std::string where = path + ":" + std::to_string(lineno);
    if (!line.empty()) {
      json obj;
      try {
        obj = json::parse(line);
      } catch (const json::exception& e) {
        throw Error(where + ": " + e.what());
      }
      try {
        TraceRecord r;
        r.source = Sentence::from_utf8(obj.at("source").get<std::string>());
        for (const json& l : obj.at("labels")) {
          TokenLabel t;
          t.insert_before = l.at("ins").get<int>();
          t.action = action_from_name(l.at("act").get<std::string>());
          r.labels.push_back(t);
        }
        TokenLabel end_slot;
        end_slot.insert_before = obj.at("end_ins").get<int>();
        r.labels.push_back(end_slot);
        validate_labels(r.source, r.labels);
        r.masked = obj.value("masked", "");
        r.output = Sentence::from_utf8(obj.at("output").get<std::string>());
        records.push_back(std::move(r));
      } catch (const json::exception& e) {
        throw Error(where + ": " + e.what());
      } catch (const Error& e) {
        throw Error(where + ": " + e.what());
      }
    }
    if (stop == content.size()) break;
    start = stop + 1;
  }
  return records;
}

CorpusSummary correct_corpus(const DetectorModel& det, const CharLM& lm,
                             const ConfusionSet* confusion,
                             const std::string& input_path,
                             const std::string& output_path, int jobs,
                             int beam_width, const std::string& trace_path) {
  const std::vector<Sentence> sources = read_sentence_lines(input_path);
  std::vector<SentenceCorrection> results(sources.size());

  const std::size_t workers = std::max(
      std::size_t{1},
      std::min(static_cast<std::size_t>(jobs < 1 ? 1 : jobs), sources.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < sources.size(); ++i) {
      results[i] = correct_sentence(det, lm, confusion, sources[i], beam_width);
    }
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> failures(workers);
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < sources.size(); i += workers) {
            results[i] =
                correct_sentence(det, lm, confusion, sources[i], beam_width);
          }
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
    for (std::thread& t : threads) t.join();
    for (const std::exception_ptr& failure : failures) {
      if (failure) std::rethrow_exception(failure);
    }
  }

  std::string out;
  CorpusSummary summary;
  std::vector<TraceRecord> traces;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const SentenceCorrection& r = results[i];
    out += sources[i].to_utf8();
    out += '\t';
    out += r.output.to_utf8();
    out += '\n';
    ++summary.sentences;
    if (r.output != sources[i]) ++summary.changed;
    summary.masks_filled += r.masked.mask_count();
    for (const TokenLabel& label : r.labels) {
      ++summary.tag_counts[static_cast<std::size_t>(project_label(label))];
    }
    if (!trace_path.empty()) {
      traces.push_back(
          {sources[i], r.labels, r.masked.to_utf8(), r.output});
    }
  }
  write_file(output_path, out);
  if (!trace_path.empty()) write_trace_jsonl(trace_path, traces);
  return summary;
}

}  // namespace charfix
