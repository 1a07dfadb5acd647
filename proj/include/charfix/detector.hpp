#pragma once

#include <array>
#include <span>
#include <unordered_map>
#include <unordered_set>

#include "charfix/confusion.hpp"
#include "charfix/core.hpp"

namespace charfix {

// Sparse indices into a hashed feature space; every index carries weight 1.0
// and duplicates sum.
struct FeatureVector {
  std::vector<std::uint32_t> indices;
};

enum class FeatureTag : std::uint8_t {
  kCur,
  kPrev,
  kNext,
  kBigramPrevCur,
  kBigramCurNext,
  kTrigram,
  kCharFreqBucket,
  kBigramPrevCurFreqBucket,
  kBigramCurNextFreqBucket,
  kConfusionMember,
  kBegin,
  kEnd,
};

// Deterministic hashed feature map standing in for a learned token encoder.
// Context characters, their bigrams/trigram, log-frequency buckets against a
// background count table, confusion-set membership, and position flags.
class Featurizer {
 public:
  explicit Featurizer(std::uint32_t dim);

  // Counts characters and padded bigrams of a reference sentence into the
  // background table.
  void add_background(const Sentence& sentence);
  void set_confusion_keys(const ConfusionSet& confusion);

  // Features for token i of the sentence; i == sentence.size() addresses the
  // end slot, whose current character is a sentinel.
  FeatureVector featurize(const Sentence& sentence, std::size_t i) const;

  // Stable hash of one named feature; exposed so persisted models remain
  // valid across builds.
  std::uint32_t feature_index(FeatureTag tag, Char a = 0, Char b = 0,
                              Char c = 0, std::uint64_t bucket = 0) const;

  std::uint32_t dim() const { return dim_; }

  static constexpr Char kBos = 0x110000;
  static constexpr Char kEos = 0x110001;
  static constexpr Char kEndSlot = 0x110002;

  friend class DetectorModel;

 private:
  std::uint64_t char_count(Char c) const;
  std::uint64_t bigram_count(Char a, Char b) const;

  std::uint32_t dim_;
  std::unordered_map<Char, std::uint64_t> char_counts_;
  std::unordered_map<std::uint64_t, std::uint64_t> bigram_counts_;
  std::unordered_set<Char> confusion_keys_;
};

using LabelDistribution = std::array<double, 4>;

struct DetectorHyper {
  double learning_rate = 1e-3;
  double l2 = 1e-6;
  int epochs = 5;
  int batch_size = 32;
  std::uint64_t seed = 1;
  std::array<double, 4> class_bias{};  // added to logits at tag time
};

// Sentence with a gold 4-class label per position (n+1 entries).
struct ClassifiedSentence {
  Sentence sentence;
  std::vector<ErrorClass> classes;
};

std::vector<ErrorClass> project_labels(const LabelSeq& labels);

// Linear 4-class softmax tagger over the hashed feature map.
class DetectorModel {
 public:
  DetectorModel(Featurizer featurizer, DetectorHyper hyper);

  // Per-position softmax distributions, sentence.size() + 1 entries.
  std::vector<LabelDistribution> predict(const Sentence& sentence) const;

  // Argmax tagging with the configured class bias; ties resolve to the
  // lowest class index. End-slot tags other than missing are normalized to
  // keep, since only an insertion count is meaningful there.
  LabelSeq tag(const Sentence& sentence) const;

  const Featurizer& featurizer() const { return featurizer_; }
  const DetectorHyper& hyper() const { return hyper_; }
  std::uint32_t dim() const { return featurizer_.dim(); }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> bias() const { return bias_; }
  double& weight_at(ErrorClass cls, std::uint32_t index);
  double& bias_at(ErrorClass cls);

  std::string save_json() const;
  void save_file(const std::string& path) const;
  static DetectorModel load_json(const std::string& content);
  static DetectorModel load_file(const std::string& path);

  std::array<double, 4> logits(const FeatureVector& features) const;

 private:
  friend struct DetectorTrainer;
  Featurizer featurizer_;
  DetectorHyper hyper_;
  std::vector<double> weights_;  // kNumClasses x dim, row-major by class
  std::array<double, 4> bias_{};
};

struct DetectorGradient {
  std::vector<double> weights;
  std::array<double, 4> bias{};
};

// Mean (over all positions of the batch) negative log-probability of the
// gold class plus 0.5 * l2 * ||w||^2, with the exact gradient.
std::pair<double, DetectorGradient> loss_and_gradient(
    const DetectorModel& model, std::span<const ClassifiedSentence> batch);

double detector_loss(const DetectorModel& model,
                     std::span<const ClassifiedSentence> batch);

struct TrainResult {
  DetectorModel model;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> epoch_losses;
};

// Adam (alpha 1e-3, beta1 0.9, beta2 0.999, eps 1e-8) over shuffled
// minibatches for a fixed epoch count; shuffling is deterministic under
// hyper.seed. Pairs must carry gold labels. The featurizer background table
// is built from the target side of the corpus; confusion keys are taken
// from `confusion` when given.
TrainResult train_detector(const std::vector<SentencePair>& corpus,
                           std::uint32_t dim, const DetectorHyper& hyper,
                           const ConfusionSet* confusion = nullptr);

}  // namespace charfix
