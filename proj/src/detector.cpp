#include "charfix/detector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <json.hpp>

#include "charfix/adam.hpp"
#include "charfix/io.hpp"
#include "charfix/rng.hpp"

namespace charfix {

using nlohmann::json;

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv_byte(std::uint64_t h, std::uint8_t b) {
  return (h ^ b) * kFnvPrime;
}

std::uint64_t fnv_u32(std::uint64_t h, std::uint32_t v) {
  h = fnv_byte(h, static_cast<std::uint8_t>(v));
  h = fnv_byte(h, static_cast<std::uint8_t>(v >> 8));
  h = fnv_byte(h, static_cast<std::uint8_t>(v >> 16));
  return fnv_byte(h, static_cast<std::uint8_t>(v >> 24));
}

std::uint64_t pack_bigram(Char a, Char b) {
  return (static_cast<std::uint64_t>(a) << 21) | static_cast<std::uint64_t>(b);
}

std::uint64_t freq_bucket(std::uint64_t count) {
  return static_cast<std::uint64_t>(std::bit_width(count + 1) - 1);
}

}  // namespace

Featurizer::Featurizer(std::uint32_t dim) : dim_(dim) {
  if (dim == 0) throw Error("featurizer dimension must be positive");
}

void Featurizer::add_background(const Sentence& sentence) {
  const std::u32string& s = sentence.chars();
  Char prev = kBos;
  for (Char c : s) {
    ++char_counts_[c];
    ++bigram_counts_[pack_bigram(prev, c)];
    prev = c;
  }
  ++bigram_counts_[pack_bigram(prev, kEos)];
}

void Featurizer::set_confusion_keys(const ConfusionSet& confusion) {
  confusion_keys_.clear();
  for (Char c : confusion.keys()) confusion_keys_.insert(c);
}

std::uint64_t Featurizer::char_count(Char c) const {
  auto it = char_counts_.find(c);
  return it == char_counts_.end() ? 0 : it->second;
}

std::uint64_t Featurizer::bigram_count(Char a, Char b) const {
  auto it = bigram_counts_.find(pack_bigram(a, b));
  return it == bigram_counts_.end() ? 0 : it->second;
}

std::uint32_t Featurizer::feature_index(FeatureTag tag, Char a, Char b, Char c,
                                        std::uint64_t bucket) const {
  std::uint64_t h = kFnvOffset;
  h = fnv_byte(h, static_cast<std::uint8_t>(tag));
  h = fnv_u32(h, static_cast<std::uint32_t>(a));
  h = fnv_u32(h, static_cast<std::uint32_t>(b));
  h = fnv_u32(h, static_cast<std::uint32_t>(c));
  h = fnv_u32(h, static_cast<std::uint32_t>(bucket));
  return static_cast<std::uint32_t>(h % dim_);
}

FeatureVector Featurizer::featurize(const Sentence& sentence,
                                    std::size_t i) const {
  const std::u32string& s = sentence.chars();
  const std::size_t n = s.size();
  if (i > n) throw Error("featurize: position out of range");

  const bool end_slot = (i == n);
  const Char cur = end_slot ? kEndSlot : s[i];
  const Char prev = i > 0 ? s[i - 1] : kBos;
  const Char next = (i + 1 < n) ? s[i + 1] : kEos;

  FeatureVector f;
  f.indices.reserve(12);
  f.indices.push_back(feature_index(FeatureTag::kCur, cur));
  f.indices.push_back(feature_index(FeatureTag::kPrev, prev));
  f.indices.push_back(feature_index(FeatureTag::kNext, next));
  f.indices.push_back(feature_index(FeatureTag::kBigramPrevCur, prev, cur));
  f.indices.push_back(feature_index(FeatureTag::kBigramCurNext, cur, next));
  f.indices.push_back(feature_index(FeatureTag::kTrigram, prev, cur, next));
  f.indices.push_back(feature_index(FeatureTag::kCharFreqBucket, 0, 0, 0,
                                    freq_bucket(char_count(cur))));
  f.indices.push_back(feature_index(FeatureTag::kBigramPrevCurFreqBucket, 0, 0, 0,
                                    freq_bucket(bigram_count(prev, cur))));
  f.indices.push_back(feature_index(FeatureTag::kBigramCurNextFreqBucket, 0, 0, 0,
                                    freq_bucket(bigram_count(cur, next))));
  if (!end_slot && confusion_keys_.count(cur) > 0) {
    f.indices.push_back(feature_index(FeatureTag::kConfusionMember));
  }
  if (i == 0) f.indices.push_back(feature_index(FeatureTag::kBegin));
  if (end_slot) f.indices.push_back(feature_index(FeatureTag::kEnd));
  return f;
}

std::vector<ErrorClass> project_labels(const LabelSeq& labels) {
  std::vector<ErrorClass> out;
  out.reserve(labels.size());
  for (const TokenLabel& l : labels) out.push_back(project_label(l));
  return out;
}

DetectorModel::DetectorModel(Featurizer featurizer, DetectorHyper hyper)
    : featurizer_(std::move(featurizer)),
      hyper_(hyper),
      weights_(static_cast<std::size_t>(kNumClasses) * featurizer_.dim(), 0.0) {}

double& DetectorModel::weight_at(ErrorClass cls, std::uint32_t index) {
  return weights_[static_cast<std::size_t>(cls) * dim() + index];
}

double& DetectorModel::bias_at(ErrorClass cls) {
  return bias_[static_cast<std::size_t>(cls)];
}

std::array<double, 4> DetectorModel::logits(const FeatureVector& features) const {
  std::array<double, 4> out = bias_;
  const std::size_t d = dim();
  for (std::uint32_t idx : features.indices) {
    for (int k = 0; k < kNumClasses; ++k) {
      out[static_cast<std::size_t>(k)] +=
          weights_[static_cast<std::size_t>(k) * d + idx];
    }
  }
  return out;
}

namespace {

LabelDistribution softmax(const std::array<double, 4>& logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  LabelDistribution p;
  double total = 0.0;
  for (int k = 0; k < 4; ++k) {
    p[static_cast<std::size_t>(k)] = std::exp(logits[static_cast<std::size_t>(k)] - mx);
    total += p[static_cast<std::size_t>(k)];
  }
  for (double& v : p) v /= total;
  return p;
}

}  // namespace

std::vector<LabelDistribution> DetectorModel::predict(const Sentence& sentence) const {
  std::vector<LabelDistribution> out;
  out.reserve(sentence.size() + 1);
  for (std::size_t i = 0; i <= sentence.size(); ++i) {
    out.push_back(softmax(logits(featurizer_.featurize(sentence, i))));
  }
  return out;
}

LabelSeq DetectorModel::tag(const Sentence& sentence) const {
  LabelSeq labels;
  labels.reserve(sentence.size() + 1);
  for (std::size_t i = 0; i <= sentence.size(); ++i) {
    std::array<double, 4> z = logits(featurizer_.featurize(sentence, i));
    for (int k = 0; k < 4; ++k) {
      z[static_cast<std::size_t>(k)] += hyper_.class_bias[static_cast<std::size_t>(k)];
    }
    int best = 0;
    for (int k = 1; k < 4; ++k) {
      if (z[static_cast<std::size_t>(k)] > z[static_cast<std::size_t>(best)]) best = k;
    }
    auto cls = static_cast<ErrorClass>(best);
    if (i == sentence.size() && cls != ErrorClass::kMissing) {
      cls = ErrorClass::kKeep;
    }
    labels.push_back(label_from_class(cls));
  }
  return labels;
}

namespace {

// Forward pass, and when grad_w/grad_b are non-null the unregularized mean
// NLL gradient accumulated into them.
double mean_nll(const DetectorModel& model,
                std::span<const ClassifiedSentence> batch,
                std::vector<double>* grad_w, std::array<double, 4>* grad_b) {
  std::size_t positions = 0;
  for (const ClassifiedSentence& cs : batch) positions += cs.sentence.size() + 1;
  if (positions == 0) throw Error("detector batch has no positions");

  const double inv = 1.0 / static_cast<double>(positions);
  const std::size_t d = model.dim();
  double loss = 0.0;
  for (const ClassifiedSentence& cs : batch) {
    if (cs.classes.size() != cs.sentence.size() + 1) {
      throw Error("classified sentence has wrong label count");
    }
    for (std::size_t i = 0; i <= cs.sentence.size(); ++i) {
      const FeatureVector f = model.featurizer().featurize(cs.sentence, i);
      const std::array<double, 4> z = model.logits(f);
      const double mx = *std::max_element(z.begin(), z.end());
      double total = 0.0;
      std::array<double, 4> p;
      for (int k = 0; k < 4; ++k) {
        p[static_cast<std::size_t>(k)] = std::exp(z[static_cast<std::size_t>(k)] - mx);
        total += p[static_cast<std::size_t>(k)];
      }
      const auto gold = static_cast<std::size_t>(cs.classes[i]);
      // log p_gold = z_gold - mx - log(total)
      loss -= (z[gold] - mx - std::log(total)) * inv;
      if (grad_w != nullptr) {
        for (int k = 0; k < 4; ++k) {
          const auto ks = static_cast<std::size_t>(k);
          const double delta =
              (p[ks] / total - (ks == gold ? 1.0 : 0.0)) * inv;
          (*grad_b)[ks] += delta;
          for (std::uint32_t idx : f.indices) {
            (*grad_w)[ks * d + idx] += delta;
          }
        }
      }
    }
  }
  return loss;
}

double l2_term(const DetectorModel& model) {
  const double l2 = model.hyper().l2;
  if (l2 == 0.0) return 0.0;
  double sq = 0.0;
  for (double w : model.weights()) sq += w * w;
  return 0.5 * l2 * sq;
}

}  // namespace

double detector_loss(const DetectorModel& model,
                     std::span<const ClassifiedSentence> batch) {
  return mean_nll(model, batch, nullptr, nullptr) + l2_term(model);
}

std::pair<double, DetectorGradient> loss_and_gradient(
    const DetectorModel& model, std::span<const ClassifiedSentence> batch) {
  DetectorGradient grad;
  grad.weights.assign(model.weights().size(), 0.0);
  double loss = mean_nll(model, batch, &grad.weights, &grad.bias);
  const double l2 = model.hyper().l2;
  if (l2 != 0.0) {
    const std::span<const double> w = model.weights();
    double sq = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      sq += w[i] * w[i];
      grad.weights[i] += l2 * w[i];
    }
    loss += 0.5 * l2 * sq;
  }
  return {loss, std::move(grad)};
}

struct DetectorTrainer {
  static TrainResult run(const std::vector<SentencePair>& corpus,
                         std::uint32_t dim, const DetectorHyper& hyper,
                         const ConfusionSet* confusion) {
    if (corpus.empty()) throw Error("train_detector: empty corpus");
    if (hyper.batch_size <= 0) {
      throw Error("train_detector: batch size must be positive");
    }

    Featurizer featurizer(dim);
    for (const SentencePair& p : corpus) featurizer.add_background(p.target);
    if (confusion != nullptr) featurizer.set_confusion_keys(*confusion);

    std::vector<ClassifiedSentence> data;
    data.reserve(corpus.size());
    for (const SentencePair& p : corpus) {
      if (!p.gold_labels) throw Error("train_detector: pair without gold labels");
      validate_labels(p.source, *p.gold_labels);
      data.push_back({p.source, project_labels(*p.gold_labels)});
    }

    TrainResult result{DetectorModel(std::move(featurizer), hyper)};
    DetectorModel& model = result.model;
    result.initial_loss = detector_loss(model, data);

    const std::size_t wsize = model.weights_.size();
    std::vector<double> params(wsize + 4, 0.0);
    std::vector<double> grad(wsize + 4, 0.0);
    AdamOptimizer adam({hyper.learning_rate, 0.9, 0.999, 1e-8});

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<ClassifiedSentence> batch;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
      Rng rng = Rng::for_index(hyper.seed, static_cast<std::uint64_t>(epoch));
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
      }
      for (std::size_t start = 0; start < order.size();
           start += static_cast<std::size_t>(hyper.batch_size)) {
        const std::size_t stop = std::min(
            order.size(), start + static_cast<std::size_t>(hyper.batch_size));
        batch.clear();
        for (std::size_t k = start; k < stop; ++k) batch.push_back(data[order[k]]);

        std::fill(grad.begin(), grad.end(), 0.0);
        std::array<double, 4> gb{};
        mean_nll(model, batch, &grad, &gb);
        for (int k = 0; k < 4; ++k) {
          grad[wsize + static_cast<std::size_t>(k)] = gb[static_cast<std::size_t>(k)];
        }
        if (hyper.l2 != 0.0) {
          for (std::size_t i = 0; i < wsize; ++i) {
            grad[i] += hyper.l2 * model.weights_[i];
          }
        }
        std::copy(model.weights_.begin(), model.weights_.end(), params.begin());
        std::copy(model.bias_.begin(), model.bias_.end(),
                  params.begin() + static_cast<std::ptrdiff_t>(wsize));
        adam.step(params, grad);
        std::copy(params.begin(),
                  params.begin() + static_cast<std::ptrdiff_t>(wsize),
                  model.weights_.begin());
        std::copy(params.begin() + static_cast<std::ptrdiff_t>(wsize),
                  params.end(), model.bias_.begin());
      }
      result.epoch_losses.push_back(detector_loss(model, data));
    }
    result.final_loss = result.epoch_losses.empty() ? result.initial_loss
                                                    : result.epoch_losses.back();
    return result;
  }
};

TrainResult train_detector(const std::vector<SentencePair>& corpus,
                           std::uint32_t dim, const DetectorHyper& hyper,
                           const ConfusionSet* confusion) {
  return DetectorTrainer::run(corpus, dim, hyper, confusion);
}

std::string DetectorModel::save_json() const {
  json obj;
  obj["kind"] = "detector.v1";
  obj["d"] = dim();
  obj["weights"] = weights_;
  obj["bias"] = bias_;
  obj["hyper"] = {
      {"lr", hyper_.learning_rate}, {"l2", hyper_.l2},
      {"epochs", hyper_.epochs},    {"batch", hyper_.batch_size},
      {"seed", hyper_.seed},        {"class_bias", hyper_.class_bias},
  };
  // Keys are decimal code points ("a,b" for bigrams) because the background
  // table contains the BOS/EOS sentinels, which lie outside Unicode.
  json chars = json::object();
  for (const auto& [c, count] : featurizer_.char_counts_) {
    chars[std::to_string(static_cast<std::uint32_t>(c))] = count;
  }
  json bigrams = json::object();
  for (const auto& [packed, count] : featurizer_.bigram_counts_) {
    const auto a = static_cast<std::uint32_t>(packed >> 21);
    const auto b = static_cast<std::uint32_t>(packed & ((1u << 21) - 1));
    bigrams[std::to_string(a) + "," + std::to_string(b)] = count;
  }
  std::u32string keys;
  for (Char c : featurizer_.confusion_keys_) keys.push_back(c);
  std::sort(keys.begin(), keys.end());
  obj["featurizer"] = {{"char_counts", std::move(chars)},
                       {"bigram_counts", std::move(bigrams)},
                       {"confusion_keys", utf8_encode(keys)}};
  return obj.dump();
}

void DetectorModel::save_file(const std::string& path) const {
  write_file(path, save_json());
}

DetectorModel DetectorModel::load_json(const std::string& content) {
  json obj;
  try {
    obj = json::parse(content);
  } catch (const json::exception& e) {
    throw Error(std::string("detector model: ") + e.what());
  }
  if (obj.value("kind", "") != "detector.v1") {
    throw Error("detector model: expected kind detector.v1, got \"" +
                obj.value("kind", "") + "\"");
  }
  const auto dim = obj.at("d").get<std::uint32_t>();
  Featurizer featurizer(dim);
  const json& fz = obj.at("featurizer");
  auto parse_cp = [](const std::string& text) -> Char {
    try {
      std::size_t used = 0;
      const unsigned long cp = std::stoul(text, &used);
      if (used != text.size() || cp > Featurizer::kEndSlot) {
        throw std::invalid_argument("range");
      }
      return static_cast<Char>(cp);
    } catch (const std::exception&) {
      throw Error("detector model: bad code point key \"" + text + "\"");
    }
  };
  for (const auto& [key, value] : fz.at("char_counts").items()) {
    featurizer.char_counts_[parse_cp(key)] = value.get<std::uint64_t>();
  }
  for (const auto& [key, value] : fz.at("bigram_counts").items()) {
    const std::size_t comma = key.find(',');
    if (comma == std::string::npos) {
      throw Error("detector model: bad bigram_counts key");
    }
    featurizer.bigram_counts_[pack_bigram(parse_cp(key.substr(0, comma)),
                                          parse_cp(key.substr(comma + 1)))] =
        value.get<std::uint64_t>();
  }
  for (Char c : utf8_decode(fz.at("confusion_keys").get<std::string>())) {
    featurizer.confusion_keys_.insert(c);
  }

  const json& hy = obj.at("hyper");
  DetectorHyper hyper;
  hyper.learning_rate = hy.at("lr").get<double>();
  hyper.l2 = hy.at("l2").get<double>();
  hyper.epochs = hy.at("epochs").get<int>();
  hyper.batch_size = hy.at("batch").get<int>();
  hyper.seed = hy.at("seed").get<std::uint64_t>();
  hyper.class_bias = hy.at("class_bias").get<std::array<double, 4>>();

  DetectorModel model(std::move(featurizer), hyper);
  model.weights_ = obj.at("weights").get<std::vector<double>>();
  model.bias_ = obj.at("bias").get<std::array<double, 4>>();
  if (model.weights_.size() != static_cast<std::size_t>(kNumClasses) * dim) {
    throw Error("detector model: weight matrix size does not match d");
  }
  for (double w : model.weights_) {
    if (!std::isfinite(w)) throw Error("detector model: non-finite weight");
  }
  return model;
}

DetectorModel DetectorModel::load_file(const std::string& path) {
  try {
    return load_json(read_file(path));
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

}  // namespace charfix
