// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every check is seeded and deterministic.
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "charfix/align.hpp"
#include "charfix/confusion.hpp"
#include "charfix/core.hpp"
#include "charfix/corrector.hpp"
#include "charfix/detector.hpp"
#include "charfix/eval.hpp"
#include "charfix/io.hpp"
#include "charfix/modlogic.hpp"
#include "charfix/pipeline.hpp"
#include "charfix/rng.hpp"
#include "charfix/synth.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace charfix;

namespace {

int g_failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s  C%d %s%s%s\n", ok ? "PASS" : "FAIL", id, name,
              detail.empty() ? "" : ": ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

void run(int id, const char* name,
         const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  report(id, name, ok, detail);
}

std::string fmt(const char* format, double a, double b = 0, double c = 0) {
  char buffer[160];
  std::snprintf(buffer, sizeof buffer, format, a, b, c);
  return buffer;
}

// ---------------------------------------------------------------------------
// C1: F-beta arithmetic against reference scoreboard rows. Rows whose printed
// score disagrees with their own precision/recall by more than the tolerance
// are reported and excluded rather than asserted.

struct ScoreRow {
  const char* name;
  double p, r, beta, printed;
  bool expect_consistent;
};

bool criterion1(std::string& detail) {
  constexpr double kTol = 0.05;  // percent scale
  const ScoreRow rows[] = {
      {"hybrid-det", 56.6, 69.4, 1.0, 62.3, true},
      {"faspell-det", 67.6, 60.0, 1.0, 63.5, false},
      {"faspell-corr", 66.6, 59.1, 1.0, 62.6, true},
      {"confusionset-det", 66.8, 73.1, 1.0, 69.8, true},
      {"confusionset-corr", 71.5, 59.5, 1.0, 64.9, false},
      {"softmasked-det", 73.7, 73.2, 1.0, 73.5, false},
      {"softmasked-corr", 66.7, 66.2, 1.0, 66.4, true},
      {"pie-f05", 22.3, 10.0, 0.5, 17.9, true},
      {"pipeline-f05", 29.71, 22.03, 0.5, 27.77, true},
  };
  bool ok = true;
  int checked = 0;
  int excluded = 0;
  for (const ScoreRow& row : rows) {
    const double computed = f_beta(row.p, row.r, row.beta);
    const double delta = std::abs(computed - row.printed);
    const bool consistent = delta <= kTol;
    std::printf("      %-18s computed %8.4f  reported %6.2f  delta %.4f  %s\n",
                row.name, computed, row.printed, delta,
                consistent ? "ok"
                           : "excluded (reported value conflicts with its own "
                             "p/r)");
    if (consistent != row.expect_consistent) ok = false;
    if (consistent) ++checked; else ++excluded;
  }
  detail = fmt("%.0f rows within 0.05, %.0f excluded as self-inconsistent",
               checked, excluded);
  return ok && checked == 6 && excluded == 3;
}

// ---------------------------------------------------------------------------
// Shared corpus generators.

std::u32string desk_vocab() {
  std::u32string vocab;
  for (Char c = U'a'; c <= U'z'; ++c) vocab.push_back(c);
  for (Char c = U'A'; c <= U'X'; ++c) vocab.push_back(c);
  return vocab;
}

// Order-2 Markov source over a 50-character vocabulary with 4 continuations
// per context, so a trigram model has real structure to learn.
class MarkovSource {
 public:
  MarkovSource() : vocab_(desk_vocab()) {
    table_.resize(vocab_.size() * vocab_.size());
    for (std::size_t i = 0; i < table_.size(); ++i) {
      Rng rng = Rng::for_index(900, i);
      for (int k = 0; k < 4; ++k) {
        table_[i][static_cast<std::size_t>(k)] =
            vocab_[rng.below(vocab_.size())];
      }
    }
  }

  Sentence generate(Rng& rng) const {
    const std::size_t len = 12 + rng.below(21);
    std::u32string out;
    out.push_back(vocab_[rng.below(vocab_.size())]);
    out.push_back(vocab_[rng.below(vocab_.size())]);
    while (out.size() < len) {
      const std::size_t a = index_of(out[out.size() - 2]);
      const std::size_t b = index_of(out[out.size() - 1]);
      out.push_back(table_[a * vocab_.size() + b][rng.below(4)]);
    }
    return Sentence(out);
  }

  std::vector<Sentence> corpus(std::uint64_t seed, std::size_t count) const {
    std::vector<Sentence> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      Rng rng = Rng::for_index(seed, i);
      out.push_back(generate(rng));
    }
    return out;
  }

  const std::u32string& vocab() const { return vocab_; }

 private:
  std::size_t index_of(Char c) const { return vocab_.find(c); }

  std::u32string vocab_;
  std::vector<std::array<Char, 4>> table_;
};

ConfusionSet desk_confusion(const std::u32string& vocab) {
  ConfusionSet confusion;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    confusion.add(vocab[i], vocab[(i + 1) % vocab.size()]);
    confusion.add(vocab[i], vocab[(i + 7) % vocab.size()]);
    confusion.add(vocab[i], vocab[(i + 13) % vocab.size()]);
  }
  return confusion;
}

// ---------------------------------------------------------------------------
// C2: synthesis round trip, 10,000 pairs.

bool criterion2(std::string& detail) {
  const MarkovSource source;
  const std::vector<Sentence> clean = source.corpus(910, 10000);
  const ConfusionSet confusion = desk_confusion(source.vocab());
  SynthConfig config;
  config.seed = 911;
  config.p_substitute = 0.3;  // exercise all three error kinds
  const auto [pairs, manifest] = corrupt_corpus(clean, config, &confusion);

  std::uint64_t conflicts = 0;
  std::uint64_t mismatches = 0;
  for (const SentencePair& pair : pairs) {
    const LabelDerivation derived = derive_labels(pair);
    conflicts += static_cast<std::uint64_t>(derived.conflicts);
    const MaskedSequence masked = rewrite(pair.source, derived.labels);
    if (!(oracle_fill(masked, pair) == pair.target)) ++mismatches;
  }
  detail = fmt("%.0f pairs, %.0f round-trip mismatches, %.0f conflicts",
               static_cast<double>(pairs.size()), static_cast<double>(mismatches),
               static_cast<double>(conflicts));
  return pairs.size() == 10000 && mismatches == 0 && conflicts == 0;
}

// ---------------------------------------------------------------------------
// C3: analytic gradient vs central finite differences.

bool criterion3(std::string& detail) {
  Rng rng(920);
  const std::u32string alphabet = U"abcd";
  double worst = 0.0;
  int instances = 0;
  for (int it = 0; it < 100; ++it) {
    Featurizer featurizer(64);
    featurizer.add_background(Sentence(oracles::random_string(rng, 12, alphabet)));
    DetectorHyper hyper;
    hyper.l2 = 1e-3;
    DetectorModel model(std::move(featurizer), hyper);
    for (int k = 0; k < kNumClasses; ++k) {
      for (std::uint32_t j = 0; j < 64; ++j) {
        model.weight_at(static_cast<ErrorClass>(k), j) =
            (rng.next_double() - 0.5) * 0.6;
      }
      model.bias_at(static_cast<ErrorClass>(k)) = (rng.next_double() - 0.5) * 0.6;
    }

    std::vector<ClassifiedSentence> batch;
    const std::size_t sentences = 1 + rng.below(4);
    for (std::size_t s = 0; s < sentences; ++s) {
      ClassifiedSentence cs;
      std::u32string text = oracles::random_string(rng, 8, alphabet);
      if (text.empty()) text = U"a";
      cs.sentence = Sentence(text);
      for (std::size_t i = 0; i <= cs.sentence.size(); ++i) {
        cs.classes.push_back(static_cast<ErrorClass>(rng.below(4)));
      }
      batch.push_back(std::move(cs));
    }

    const auto [loss, grad] = loss_and_gradient(model, batch);
    if (!std::isfinite(loss)) return false;

    // coordinates in the feature support plus every bias
    std::vector<std::pair<int, std::uint32_t>> coords;
    for (const ClassifiedSentence& cs : batch) {
      const FeatureVector f =
          model.featurizer().featurize(cs.sentence, rng.below(cs.sentence.size() + 1));
      for (std::uint32_t idx : f.indices) {
        coords.push_back({static_cast<int>(rng.below(4)), idx});
      }
    }
    const double h = 1e-6;
    int sampled = 0;
    for (std::size_t pick = 0; pick < coords.size() && sampled < 6; ++pick) {
      const auto [k, j] = coords[rng.below(coords.size())];
      const double analytic = grad.weights[static_cast<std::size_t>(k) * 64 + j];
      if (std::abs(analytic) < 1e-3) continue;
      double& w = model.weight_at(static_cast<ErrorClass>(k), j);
      const double saved = w;
      w = saved + h;
      const double up = detector_loss(model, batch);
      w = saved - h;
      const double down = detector_loss(model, batch);
      w = saved;
      const double numeric = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(analytic - numeric) /
                                  std::max(std::abs(analytic), std::abs(numeric)));
      ++sampled;
    }
    for (int k = 0; k < kNumClasses; ++k) {
      const double analytic = grad.bias[static_cast<std::size_t>(k)];
      if (std::abs(analytic) < 1e-3) continue;
      double& b = model.bias_at(static_cast<ErrorClass>(k));
      const double saved = b;
      b = saved + h;
      const double up = detector_loss(model, batch);
      b = saved - h;
      const double down = detector_loss(model, batch);
      b = saved;
      const double numeric = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(analytic - numeric) /
                                  std::max(std::abs(analytic), std::abs(numeric)));
    }
    ++instances;
  }
  detail = fmt("%.0f instances, worst relative error %.3g",
               static_cast<double>(instances), worst);
  return instances == 100 && worst <= 1e-4;
}

// ---------------------------------------------------------------------------
// C4: softmax normalization at every position of 1,000 random sentences.

bool criterion4(std::string& detail) {
  Rng rng(930);
  Featurizer featurizer(1 << 10);
  const std::u32string alphabet = U"abcdefghijklmnopqrst";
  featurizer.add_background(Sentence(oracles::random_string(rng, 20, alphabet)));
  DetectorModel model(std::move(featurizer), DetectorHyper{});
  for (int k = 0; k < kNumClasses; ++k) {
    for (std::uint32_t j = 0; j < model.dim(); ++j) {
      model.weight_at(static_cast<ErrorClass>(k), j) =
          (rng.next_double() - 0.5) * 10.0;
    }
  }

  double worst = 0.0;
  std::uint64_t positions = 0;
  for (int it = 0; it < 1000; ++it) {
    const Sentence s(oracles::random_string(rng, 20, alphabet));
    for (const LabelDistribution& dist : model.predict(s)) {
      double total = 0.0;
      for (double p : dist) {
        if (p < 0.0 || !std::isfinite(p)) return false;
        total += p;
      }
      worst = std::max(worst, std::abs(total - 1.0));
      ++positions;
    }
  }
  detail = fmt("%.0f positions, worst |sum-1| = %.3g",
               static_cast<double>(positions), worst);
  return worst <= 1e-9;
}

// ---------------------------------------------------------------------------
// C5: realized corruption proportions over 20,000 sentences.

bool criterion5(std::string& detail) {
  const MarkovSource source;
  const std::vector<Sentence> clean = source.corpus(940, 20000);
  const ConfusionSet confusion = desk_confusion(source.vocab());
  Lexicon lexicon;
  for (Char c : source.vocab()) lexicon.add(std::u32string(1, c), 10);

  SynthConfig config;
  config.seed = 941;
  const auto [pairs, manifest] = corrupt_corpus(clean, config, &confusion, &lexicon);

  const double eligible =
      static_cast<double>(manifest.sentences - manifest.skipped_short);
  const double delete_fraction = static_cast<double>(manifest.deletes) / eligible;
  const double insert_fraction = static_cast<double>(manifest.inserts) / eligible;
  bool ok = manifest.skipped_short == 0 && manifest.mode_fallbacks == 0;
  ok = ok && std::abs(delete_fraction - config.p_delete) <= 0.015;
  ok = ok && std::abs(insert_fraction - config.p_insert) <= 0.015;

  std::printf("      delete %.4f (want %.2f)  insert %.4f (want %.2f)\n",
              delete_fraction, config.p_delete, insert_fraction,
              config.p_insert);
  double worst_mode = 0.0;
  for (int m = 0; m < kNumInsertModes; ++m) {
    const double realized =
        static_cast<double>(manifest.mode_counts[static_cast<std::size_t>(m)]) /
        static_cast<double>(manifest.inserts);
    const double want = config.insert_mode_weights[static_cast<std::size_t>(m)];
    std::printf("      mode %-9s %.4f (want %.2f)\n",
                insert_mode_name(static_cast<InsertMode>(m)), realized, want);
    worst_mode = std::max(worst_mode, std::abs(realized - want));
    ok = ok && std::abs(realized - want) <= 0.015;
  }
  detail = fmt("delete %.4f, insert %.4f, worst mode deviation %.4f",
               delete_fraction, insert_fraction, worst_mode);
  return ok;
}

// ---------------------------------------------------------------------------
// C6: edit-lattice search vs exhaustive path enumeration.

bool criterion6(std::string& detail) {
  Rng rng(950);
  const std::u32string alphabet = U"abcd";
  int cases = 0;
  int tp_mismatch = 0;
  int edit_mismatch = 0;
  while (cases < 500) {
    const std::u32string src = oracles::random_string(rng, 8, alphabet);
    const std::u32string hyp = oracles::random_string(rng, 8, alphabet);
    const std::u32string tgt = oracles::random_string(rng, 8, alphabet);
    const EditSet gold =
        extract_edits(Sentence(src), Sentence(tgt), /*merge=*/true);
    if (gold.size() > 3) continue;
    ++cases;

    const EvalReport lattice = m2_score(Sentence(src), Sentence(hyp), {gold});
    const oracles::RefMaxMatch ref =
        oracles::ref_m2_counts(src, hyp, gold, kM2MaxMergeSpan);
    if (lattice.counts.tp != static_cast<std::uint64_t>(ref.tp)) ++tp_mismatch;
    if (lattice.counts.proposed != static_cast<std::uint64_t>(ref.edits)) {
      ++edit_mismatch;
    }
  }
  detail = fmt("%.0f cases, %.0f tp mismatches, %.0f edit-count mismatches",
               static_cast<double>(cases), static_cast<double>(tp_mismatch),
               static_cast<double>(edit_mismatch));
  return tp_mismatch == 0 && edit_mismatch == 0;
}

// ---------------------------------------------------------------------------
// C7: end-to-end desk experiment against copy and random-fill baselines.

// Regression anchor for the deterministic desk experiment; update only with
// a reasoned change to the pipeline or the experiment setup.
constexpr double kDeskAnchor = 0.3530;
constexpr double kDeskAnchorTol = 0.02;

Sentence random_fill(const MaskedSequence& masked, const std::u32string& vocab,
                     Rng& rng) {
  std::u32string out;
  out.reserve(masked.slots.size());
  for (const Slot& slot : masked.slots) {
    out.push_back(slot.is_mask ? vocab[rng.below(vocab.size())] : slot.ch);
  }
  return Sentence(out);
}

bool criterion7(std::string& detail) {
  const MarkovSource source;
  const std::vector<Sentence> train_clean = source.corpus(960, 5000);
  const std::vector<Sentence> test_clean = source.corpus(961, 1000);
  const ConfusionSet confusion = desk_confusion(source.vocab());

  SynthConfig config;
  config.seed = 962;
  const auto [train_pairs, train_manifest] =
      corrupt_corpus(train_clean, config, &confusion);
  SynthConfig test_config = config;
  test_config.seed = 963;
  const auto [test_pairs, test_manifest] =
      corrupt_corpus(test_clean, test_config, &confusion);

  DetectorHyper hyper;
  hyper.epochs = 40;
  hyper.learning_rate = 3e-3;
  hyper.batch_size = 8;
  hyper.seed = 964;
  // keep dominates 95% of positions; a small tag-time bias toward the two
  // realized error classes trades precision for recall at the f0.5 optimum
  hyper.class_bias = {0.0, 0.0, 0.5, 0.5};
  const TrainResult trained =
      train_detector(train_pairs, 1 << 16, hyper, &confusion);
  const CharLM lm = CharLM::train(train_clean);

  std::vector<Sentence> sources;
  std::vector<Sentence> hypotheses;
  std::vector<Sentence> ablation;
  std::vector<std::vector<EditSet>> gold;
  for (std::size_t i = 0; i < test_pairs.size(); ++i) {
    const SentencePair& pair = test_pairs[i];
    const SentenceCorrection c =
        correct_sentence(trained.model, lm, &confusion, pair.source);
    sources.push_back(pair.source);
    hypotheses.push_back(c.output);
    Rng rng = Rng::for_index(965, i);
    ablation.push_back(random_fill(c.masked, source.vocab(), rng));
    gold.push_back({extract_edits(pair.source, pair.target, /*merge=*/true)});
  }

  const EvalReport system = m2_score_corpus(sources, hypotheses, gold);
  const EvalReport copy = m2_score_corpus(sources, sources, gold);
  const EvalReport random = m2_score_corpus(sources, ablation, gold);

  std::printf(
      "      train loss %.4f -> %.4f; system f0.5 %.4f (tp %llu / proposed "
      "%llu / gold %llu)\n",
      trained.initial_loss, trained.final_loss, system.f_score,
      static_cast<unsigned long long>(system.counts.tp),
      static_cast<unsigned long long>(system.counts.proposed),
      static_cast<unsigned long long>(system.counts.gold));
  std::printf("      copy f0.5 %.4f, random-fill f0.5 %.4f\n", copy.f_score,
              random.f_score);

  bool ok = system.f_score > copy.f_score && system.f_score > random.f_score;
  if (kDeskAnchor >= 0.0) {
    ok = ok && std::abs(system.f_score - kDeskAnchor) <= kDeskAnchorTol;
    detail = fmt("f0.5 %.4f (anchor %.4f), copy %.4f", system.f_score,
                 kDeskAnchor, copy.f_score) +
             fmt(", random %.4f", random.f_score);
  } else {
    detail = fmt("f0.5 %.4f, copy %.4f, random %.4f", system.f_score,
                 copy.f_score, random.f_score) +
             " (anchor not yet frozen)";
  }
  return ok;
}

// ---------------------------------------------------------------------------
// C8: CLI determinism; identical invocations produce byte-identical files.

bool run_cli(const std::string& bin, const std::string& args,
             const std::string& log) {
  const std::string cmd = bin + " " + args + " >> " + log + " 2>&1";
  return std::system(cmd.c_str()) == 0;
}

bool criterion8(std::string& detail) {
  const char* bin_env = std::getenv("CHARFIX_BIN");
  if (bin_env == nullptr || std::string(bin_env).empty()) {
    detail = "CHARFIX_BIN is not set; run through ctest or export it";
    return false;
  }
  const std::string bin = bin_env;
  const fs::path dir = fs::temp_directory_path() / "charfix_accept_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto at = [&dir](const std::string& name) {
    return (dir / name).string();
  };

  const MarkovSource source;
  const std::vector<Sentence> clean = source.corpus(970, 200);
  write_sentence_lines(at("clean.txt"), clean);
  write_file(at("confusion.tsv"), desk_confusion(source.vocab()).serialize());
  std::string lexicon_text;
  for (Char c : source.vocab()) {
    lexicon_text += utf8_encode(c) + "\t10\n";
  }
  write_file(at("lexicon.tsv"), lexicon_text);

  const std::vector<std::string> commands = {
      "synthesize --in " + at("clean.txt") + " --out-dir " + at("synth") +
          " --seed 7 --p-delete 0.5 --p-insert 0.5 --p-substitute 0.2"
          " --confusion " + at("confusion.tsv") + " --lexicon " +
          at("lexicon.tsv"),
      "derive-tags --pairs " + at("synth/pairs.tsv") + " --out " +
          at("tags.jsonl"),
      "train-lm --in " + at("synth/targets.txt") + " --out " + at("lm.json"),
      "train-detector --labels " + at("tags.jsonl") + " --out " +
          at("det.json") + " --dim 4096 --epochs 2 --seed 3 --confusion " +
          at("confusion.tsv"),
      "correct --det " + at("det.json") + " --lm " + at("lm.json") + " --in " +
          at("synth/sources.txt") + " --out " + at("corrected.tsv") +
          " --confusion " + at("confusion.tsv") + " --trace " +
          at("trace.jsonl") + " --jobs 4",
      "evaluate --mode sighan --src " + at("synth/sources.txt") + " --hyp " +
          at("corrected.tsv") + " --gold " + at("synth/pairs.tsv") +
          " --out " + at("report_sighan.json"),
      "evaluate --mode m2 --src " + at("synth/sources.txt") + " --hyp " +
          at("corrected.tsv") + " --gold " + at("synth/pairs.tsv") +
          " --out " + at("report_m2.json"),
      "evaluate --mode errant --src " + at("synth/sources.txt") + " --hyp " +
          at("corrected.tsv") + " --gold " + at("synth/pairs.tsv") +
          " --out " + at("report_errant.json"),
  };
  const std::vector<std::string> artifacts = {
      "synth/pairs.tsv",  "synth/labels.jsonl", "synth/manifest.json",
      "synth/sources.txt", "synth/targets.txt", "tags.jsonl",
      "lm.json",          "det.json",           "corrected.tsv",
      "trace.jsonl",      "report_sighan.json", "report_m2.json",
      "report_errant.json",
  };

  for (int round = 0; round < 2; ++round) {
    for (const std::string& args : commands) {
      if (!run_cli(bin, args, at("cli.log"))) {
        detail = "command failed on round " + std::to_string(round + 1) +
                 ": " + args.substr(0, args.find(' '));
        return false;
      }
    }
    if (round == 0) {
      for (const std::string& name : artifacts) {
        fs::copy_file(at(name), at(name) + ".first",
                      fs::copy_options::overwrite_existing);
      }
    }
  }

  int compared = 0;
  for (const std::string& name : artifacts) {
    if (read_file(at(name)) != read_file(at(name) + ".first")) {
      detail = "artifact differs between identical runs: " + name;
      return false;
    }
    ++compared;
  }
  fs::remove_all(dir);
  detail = fmt("%.0f commands x2, %.0f artifacts byte-identical",
               static_cast<double>(commands.size()),
               static_cast<double>(compared));
  return true;
}

}  // namespace

int main() {
  run(1, "score arithmetic reproduces consistent reference rows", criterion1);
  run(2, "synthesis round trip over 10k pairs", criterion2);
  run(3, "detector gradient matches finite differences", criterion3);
  run(4, "softmax rows normalized within 1e-9", criterion4);
  run(5, "corruption proportions within 0.015 over 20k", criterion5);
  run(6, "edit-lattice search equals exhaustive maxmatch", criterion6);
  run(7, "desk pipeline beats copy and random-fill baselines", criterion7);
  run(8, "repeated cli runs are byte-identical", criterion8);

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
