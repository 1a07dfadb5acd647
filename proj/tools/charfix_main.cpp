#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "charfix/align.hpp"
#include "charfix/corrector.hpp"
#include "charfix/detector.hpp"
#include "charfix/eval.hpp"
#include "charfix/io.hpp"
#include "charfix/pipeline.hpp"
#include "charfix/synth.hpp"

namespace {

using namespace charfix;

std::array<double, 4> parse_mode_weights(const std::string& text) {
  std::array<double, 4> weights{};
  std::size_t start = 0;
  for (int i = 0; i < 4; ++i) {
    const std::size_t stop = text.find(',', start);
    const bool last = i == 3;
    if (last != (stop == std::string::npos)) {
      throw Error("--mode-weights needs 4 comma-separated numbers");
    }
    const std::string field =
        text.substr(start, last ? std::string::npos : stop - start);
    try {
      std::size_t used = 0;
      weights[static_cast<std::size_t>(i)] = std::stod(field, &used);
      if (used != field.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error("--mode-weights: \"" + field + "\" is not a number");
    }
    start = stop + 1;
  }
  return weights;
}

// Hypothesis files are either plain sentence lines or the
// `source<TAB>corrected` TSV written by `correct`; the first non-blank line
// decides.
std::vector<Sentence> read_hypotheses(const std::string& path,
                                      std::vector<Sentence>* tsv_sources) {
  const std::string content = read_file(path);
  bool tsv = false;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t stop = content.find('\n', start);
    if (stop == std::string::npos) stop = content.size();
    if (stop > start) {
      tsv = content.substr(start, stop - start).find('\t') != std::string::npos;
      break;
    }
    start = stop + 1;
  }
  std::vector<Sentence> hyps;
  if (tsv) {
    for (SentencePair& p : read_parallel_tsv(path)) {
      if (tsv_sources != nullptr) tsv_sources->push_back(std::move(p.source));
      hyps.push_back(std::move(p.target));
    }
  } else {
    hyps = read_sentence_lines(path);
  }
  return hyps;
}

void require_equal_counts(std::size_t a, const char* what_a, std::size_t b,
                          const char* what_b) {
  if (a != b) {
    throw Error(std::string(what_a) + " has " + std::to_string(a) +
                " sentences but " + what_b + " has " + std::to_string(b));
  }
}

void require_same_sources(const std::vector<Sentence>& expected,
                          const std::vector<Sentence>& actual,
                          const char* where) {
  require_equal_counts(expected.size(), "--src", actual.size(), where);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected[i] != actual[i]) {
      throw Error(std::string(where) + ": sentence " + std::to_string(i + 1) +
                  " does not match --src");
    }
  }
}

bool has_suffix(const std::string& text, std::string_view suffix) {
  return text.size() >= suffix.size() &&
         text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct SynthesizeArgs {
  std::string in;
  std::string out_dir;
  std::uint64_t seed = 1;
  double p_delete = 0.5;
  double p_insert = 0.5;
  double p_substitute = 0.0;
  std::string mode_weights;
  std::string confusion;
  std::string lexicon;
  std::size_t top_n = 1000;
};

int run_synthesize(const SynthesizeArgs& args) {
  SynthConfig config;
  config.seed = args.seed;
  config.p_delete = args.p_delete;
  config.p_insert = args.p_insert;
  config.p_substitute = args.p_substitute;
  config.lexicon_top_n = args.top_n;
  if (!args.mode_weights.empty()) {
    config.insert_mode_weights = parse_mode_weights(args.mode_weights);
  }
  config.validate();

  const std::vector<Sentence> clean = read_sentence_lines(args.in);
  ConfusionSet confusion;
  if (!args.confusion.empty()) confusion = ConfusionSet::load_file(args.confusion);
  Lexicon lexicon;
  if (!args.lexicon.empty()) lexicon = Lexicon::load_file(args.lexicon);

  auto [pairs, manifest] =
      corrupt_corpus(clean, config, args.confusion.empty() ? nullptr : &confusion,
                     args.lexicon.empty() ? nullptr : &lexicon);

  std::filesystem::create_directories(args.out_dir);
  const std::string dir = args.out_dir + "/";
  write_parallel_tsv(dir + "pairs.tsv", pairs);
  write_labels_jsonl(dir + "labels.jsonl", pairs);
  write_file(dir + "manifest.json", manifest.to_json());
  std::vector<Sentence> sources;
  std::vector<Sentence> targets;
  sources.reserve(pairs.size());
  targets.reserve(pairs.size());
  for (const SentencePair& p : pairs) {
    sources.push_back(p.source);
    targets.push_back(p.target);
  }
  write_sentence_lines(dir + "sources.txt", sources);
  write_sentence_lines(dir + "targets.txt", targets);

  std::printf("synthesized %llu pairs into %s\n",
              static_cast<unsigned long long>(manifest.sentences),
              args.out_dir.c_str());
  std::printf("deletes %llu  inserts %llu  substitutes %llu  skipped %llu\n",
              static_cast<unsigned long long>(manifest.deletes),
              static_cast<unsigned long long>(manifest.inserts),
              static_cast<unsigned long long>(manifest.substitutes),
              static_cast<unsigned long long>(manifest.skipped_short));
  return 0;
}

int run_derive_tags(const std::string& pairs_path, const std::string& out) {
  std::vector<SentencePair> pairs = read_parallel_tsv(pairs_path);
  std::uint64_t conflicts = 0;
  for (SentencePair& p : pairs) {
    LabelDerivation derivation = derive_labels(p);
    conflicts += static_cast<std::uint64_t>(derivation.conflicts);
    p.gold_labels = std::move(derivation.labels);
  }
  write_labels_jsonl(out, pairs);
  std::printf("tagged %zu pairs (%llu insert/action conflicts)\n", pairs.size(),
              static_cast<unsigned long long>(conflicts));
  return 0;
}

struct TrainDetectorArgs {
  std::string labels;
  std::string out;
  std::uint32_t dim = 262144;
  int epochs = 5;
  double lr = 1e-3;
  double l2 = 1e-6;
  int batch = 32;
  std::uint64_t seed = 1;
  std::string confusion;
};

int run_train_detector(const TrainDetectorArgs& args) {
  const std::vector<SentencePair> corpus = read_labels_jsonl(args.labels);
  DetectorHyper hyper;
  hyper.learning_rate = args.lr;
  hyper.l2 = args.l2;
  hyper.epochs = args.epochs;
  hyper.batch_size = args.batch;
  hyper.seed = args.seed;
  ConfusionSet confusion;
  if (!args.confusion.empty()) confusion = ConfusionSet::load_file(args.confusion);

  const TrainResult result = train_detector(
      corpus, args.dim, hyper, args.confusion.empty() ? nullptr : &confusion);
  result.model.save_file(args.out);

  std::printf("trained on %zu sentences, d=%u\n", corpus.size(), args.dim);
  std::printf("loss %.6f -> %.6f over %d epochs\n", result.initial_loss,
              result.final_loss, args.epochs);
  return 0;
}

int run_train_lm(const std::string& in, const std::string& out, double k,
                 std::size_t topk) {
  const std::vector<Sentence> corpus = read_sentence_lines(in);
  const CharLM lm = CharLM::train(corpus, k, topk);
  lm.save_file(out);
  std::printf("trained charlm on %zu sentences, vocabulary %zu\n",
              corpus.size(), lm.vocab_size());
  return 0;
}

struct CorrectArgs {
  std::string det;
  std::string lm;
  std::string in;
  std::string out;
  std::string confusion;
  std::string trace;
  int beam = 1;
  int jobs = 1;
};

int run_correct(const CorrectArgs& args) {
  const DetectorModel det = DetectorModel::load_file(args.det);
  const CharLM lm = CharLM::load_file(args.lm);
  ConfusionSet confusion;
  if (!args.confusion.empty()) confusion = ConfusionSet::load_file(args.confusion);

  const CorpusSummary summary = correct_corpus(
      det, lm, args.confusion.empty() ? nullptr : &confusion, args.in, args.out,
      args.jobs, args.beam, args.trace);
  std::fputs(summary.to_text().c_str(), stdout);
  return 0;
}

struct EvaluateArgs {
  std::string mode;
  std::string src;
  std::string hyp;
  std::string gold;
  std::string out;
  std::string trace;
  double beta = 0.5;
  bool type_insensitive = false;
};

int run_evaluate(const EvaluateArgs& args) {
  const std::vector<Sentence> sources = read_sentence_lines(args.src);
  std::vector<Sentence> hyp_sources;
  const std::vector<Sentence> hypotheses =
      read_hypotheses(args.hyp, &hyp_sources);
  require_equal_counts(sources.size(), "--src", hypotheses.size(), "--hyp");
  if (!hyp_sources.empty()) {
    require_same_sources(sources, hyp_sources, "--hyp");
  }

  std::vector<std::pair<std::string, EvalReport>> sections;
  if (args.mode == "sighan") {
    if (has_suffix(args.gold, ".m2")) {
      throw Error("sighan mode needs a source<TAB>target gold file");
    }
    std::vector<SentencePair> pairs = read_parallel_tsv(args.gold);
    require_equal_counts(sources.size(), "--src", pairs.size(), "--gold");
    std::vector<Sentence> gold_sources;
    gold_sources.reserve(pairs.size());
    for (const SentencePair& p : pairs) gold_sources.push_back(p.source);
    require_same_sources(sources, gold_sources, "--gold");

    std::vector<LabelSeq> predicted;
    if (!args.trace.empty()) {
      const std::vector<TraceRecord> traces = read_trace_jsonl(args.trace);
      std::vector<Sentence> trace_sources;
      trace_sources.reserve(traces.size());
      for (const TraceRecord& t : traces) trace_sources.push_back(t.source);
      require_same_sources(sources, trace_sources, "--trace");
      predicted.reserve(traces.size());
      for (const TraceRecord& t : traces) predicted.push_back(t.labels);
    }
    const SentenceLevelResult result = eval_sentence_level(
        pairs, hypotheses, args.trace.empty() ? nullptr : &predicted);
    sections.emplace_back("detection", result.detection);
    sections.emplace_back("correction", result.correction);
  } else {
    // Gold edits: either an .m2 file or a source<TAB>target TSV whose edits
    // are derived by alignment.
    std::vector<std::vector<EditSet>> gold;
    if (has_suffix(args.gold, ".m2")) {
      const std::vector<M2Sentence> m2 = read_m2_file(args.gold);
      require_equal_counts(sources.size(), "--src", m2.size(), "--gold");
      std::vector<Sentence> gold_sources;
      gold_sources.reserve(m2.size());
      for (const M2Sentence& s : m2) gold_sources.push_back(s.source);
      require_same_sources(sources, gold_sources, "--gold");
      for (const M2Sentence& s : m2) gold.push_back(s.annotations);
    } else {
      const std::vector<SentencePair> pairs = read_parallel_tsv(args.gold);
      require_equal_counts(sources.size(), "--src", pairs.size(), "--gold");
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].source != sources[i]) {
          throw Error("--gold: sentence " + std::to_string(i + 1) +
                      " does not match --src");
        }
        gold.push_back({extract_edits(pairs[i].source, pairs[i].target, true)});
      }
    }
    if (args.mode == "m2") {
      sections.emplace_back(
          "m2", m2_score_corpus(sources, hypotheses, gold, args.beta));
    } else {
      std::vector<EditSet> first;
      first.reserve(gold.size());
      for (const auto& sets : gold) first.push_back(sets.front());
      sections.emplace_back(
          "errant", errant_score_corpus(sources, hypotheses, first, args.beta,
                                        !args.type_insensitive));
    }
  }

  if (!args.out.empty()) write_file(args.out, render_reports_json(sections));
  std::fputs(render_reports_table(sections).c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"character-level error correction toolkit"};
  app.require_subcommand(1);

  SynthesizeArgs syn;
  CLI::App* syn_cmd =
      app.add_subcommand("synthesize", "corrupt a clean corpus into a labeled parallel corpus");
  syn_cmd->add_option("--in", syn.in, "clean corpus, one sentence per line")->required();
  syn_cmd->add_option("--out-dir", syn.out_dir, "output directory")->required();
  syn_cmd->add_option("--seed", syn.seed, "rng seed");
  syn_cmd->add_option("--p-delete", syn.p_delete, "per-sentence deletion probability");
  syn_cmd->add_option("--p-insert", syn.p_insert, "per-sentence insertion probability");
  syn_cmd->add_option("--p-substitute", syn.p_substitute,
                      "per-sentence confusable-substitution probability");
  syn_cmd->add_option("--mode-weights", syn.mode_weights,
                      "repeat,confusion,high_freq,random weights");
  syn_cmd->add_option("--confusion", syn.confusion, "confusion set file");
  syn_cmd->add_option("--lexicon", syn.lexicon, "word<TAB>frequency lexicon file");
  syn_cmd->add_option("--top-n", syn.top_n, "lexicon entries used for high_freq inserts");

  std::string tags_pairs;
  std::string tags_out;
  CLI::App* tags_cmd =
      app.add_subcommand("derive-tags", "derive gold tags from a parallel TSV by alignment");
  tags_cmd->add_option("--pairs", tags_pairs, "source<TAB>target corpus")->required();
  tags_cmd->add_option("--out", tags_out, "labels JSONL output")->required();

  TrainDetectorArgs det_args;
  CLI::App* det_cmd = app.add_subcommand("train-detector", "train the 4-class error tagger");
  det_cmd->add_option("--labels", det_args.labels, "labels JSONL")->required();
  det_cmd->add_option("--out", det_args.out, "model output (JSON)")->required();
  det_cmd->add_option("--dim", det_args.dim, "hashed feature dimension");
  det_cmd->add_option("--epochs", det_args.epochs, "training epochs");
  det_cmd->add_option("--lr", det_args.lr, "Adam learning rate");
  det_cmd->add_option("--l2", det_args.l2, "L2 regularization strength");
  det_cmd->add_option("--batch", det_args.batch, "minibatch size");
  det_cmd->add_option("--seed", det_args.seed, "shuffle seed");
  det_cmd->add_option("--confusion", det_args.confusion,
                      "confusion set file (adds a membership feature)");

  std::string lm_in;
  std::string lm_out;
  double lm_k = 0.01;
  std::size_t lm_topk = 2000;
  CLI::App* lm_cmd = app.add_subcommand("train-lm", "count a character trigram language model");
  lm_cmd->add_option("--in", lm_in, "clean corpus, one sentence per line")->required();
  lm_cmd->add_option("--out", lm_out, "model output (JSON)")->required();
  lm_cmd->add_option("--k", lm_k, "add-k smoothing constant");
  lm_cmd->add_option("--topk", lm_topk, "candidate cap for mask filling");

  CorrectArgs corr;
  CLI::App* corr_cmd = app.add_subcommand("correct", "run detect -> rewrite -> fill over a corpus");
  corr_cmd->add_option("--det", corr.det, "detector model")->required();
  corr_cmd->add_option("--lm", corr.lm, "language model")->required();
  corr_cmd->add_option("--in", corr.in, "sentences to correct, one per line")->required();
  corr_cmd->add_option("--out", corr.out, "output TSV `source<TAB>corrected`")->required();
  corr_cmd->add_option("--confusion", corr.confusion, "confusion set file");
  corr_cmd->add_option("--beam", corr.beam, "fill beam width");
  corr_cmd->add_option("--trace", corr.trace, "trace JSONL output");
  corr_cmd->add_option("--jobs", corr.jobs, "worker threads");

  EvaluateArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "score hypotheses against gold");
  eval_cmd->add_option("--mode", eval_args.mode, "sighan, m2 or errant")
      ->required()
      ->check(CLI::IsMember({"sighan", "m2", "errant"}));
  eval_cmd->add_option("--src", eval_args.src, "source sentences")->required();
  eval_cmd->add_option("--hyp", eval_args.hyp, "hypotheses (lines or TSV)")->required();
  eval_cmd->add_option("--gold", eval_args.gold,
                       "gold: source<TAB>target TSV, or .m2 for m2/errant")
      ->required();
  eval_cmd->add_option("--beta", eval_args.beta, "F beta for m2/errant (sighan is F1)");
  eval_cmd->add_option("--out", eval_args.out, "JSON report output");
  eval_cmd->add_option("--trace", eval_args.trace,
                       "trace JSONL with predicted tags (sighan detection)");
  eval_cmd->add_flag("--type-insensitive", eval_args.type_insensitive,
                     "errant: ignore edit types when matching");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*syn_cmd) return run_synthesize(syn);
    if (*tags_cmd) return run_derive_tags(tags_pairs, tags_out);
    if (*det_cmd) return run_train_detector(det_args);
    if (*lm_cmd) return run_train_lm(lm_in, lm_out, lm_k, lm_topk);
    if (*corr_cmd) return run_correct(corr);
    if (*eval_cmd) return run_evaluate(eval_args);
  } catch (const std::exception& e) {
    std::cerr << "charfix: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
