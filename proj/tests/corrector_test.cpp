#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "charfix/corrector.hpp"
#include "charfix/modlogic.hpp"

using namespace charfix;

namespace {

Sentence sent(const char* utf8) { return Sentence::from_utf8(utf8); }

std::vector<Sentence> abc_corpus(int copies = 100) {
  return std::vector<Sentence>(copies, sent("abc"));
}

MaskedSequence masked_from(const char* utf8, std::initializer_list<int> masks) {
  // Masks at the listed indices become missing masks; originals elsewhere.
  const Sentence s = Sentence::from_utf8(utf8);
  MaskedSequence out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool is_mask =
        std::find(masks.begin(), masks.end(), static_cast<int>(i)) != masks.end();
    if (is_mask) {
      out.slots.push_back(Slot::mask_missing(static_cast<int>(i)));
    } else {
      out.slots.push_back(Slot::fixed(s[i], static_cast<int>(i)));
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("corrector") {

TEST_CASE("n-gram counts over padded sentences") {
  const CharLM lm = CharLM::train({sent("abc"), sent("ab")});
  CHECK(lm.unigram_count(U'a') == 2);
  CHECK(lm.unigram_count(U'b') == 2);
  CHECK(lm.unigram_count(U'c') == 1);
  CHECK(lm.unigram_count(U'z') == 0);
  CHECK(lm.bigram_count(U'a', U'b') == 2);
  CHECK(lm.bigram_count(CharLM::kBos, U'a') == 2);
  CHECK(lm.bigram_count(U'c', CharLM::kEos) == 1);
  CHECK(lm.bigram_count(U'b', CharLM::kEos) == 1);
  CHECK(lm.trigram_count(CharLM::kBos, CharLM::kBos, U'a') == 2);
  CHECK(lm.trigram_count(U'a', U'b', U'c') == 1);
  CHECK(lm.trigram_count(U'b', U'c', CharLM::kEos) == 1);

  // vocabulary: a, b, c plus the two padding symbols
  CHECK(lm.vocab_size() == 5);
  const std::vector<Char> vocab = lm.vocabulary();
  REQUIRE(vocab.size() == 5);
  CHECK(vocab[0] == CharLM::kBos);
  CHECK(vocab[1] == CharLM::kEos);
  CHECK(vocab[2] == U'a');
}

TEST_CASE("log_cond matches closed-form add-k arithmetic") {
  // 100 copies of "abc": trigram (a,b,c) count 100, context (a,b) marginal
  // 100, vocab 5, k 0.01 -> P(c|a,b) = 100.01 / 100.05.
  const CharLM lm = CharLM::train(abc_corpus());
  CHECK(lm.log_cond(U'a', U'b', U'c') ==
        doctest::Approx(std::log(100.01 / 100.05)).epsilon(1e-12));
  // unseen continuation in a seen context
  CHECK(lm.log_cond(U'a', U'b', U'a') ==
        doctest::Approx(std::log(0.01 / 100.05)).epsilon(1e-12));
  // unseen context is uniform over the vocabulary
  CHECK(lm.log_cond(U'c', U'a', U'b') ==
        doctest::Approx(std::log(1.0 / 5.0)).epsilon(1e-12));
}

TEST_CASE("conditionals sum to one over the vocabulary") {
  const CharLM lm = CharLM::train({sent("abcab"), sent("bca"), sent("aa")});
  const std::vector<Char> vocab = lm.vocabulary();
  const std::vector<std::pair<Char, Char>> contexts = {
      {U'a', U'b'},                    // seen
      {CharLM::kBos, CharLM::kBos},    // sentence start
      {U'z', U'q'},                    // unseen
      {U'b', U'c'},
  };
  for (const auto& [l2, l1] : contexts) {
    double total = 0.0;
    for (Char c : vocab) total += std::exp(lm.log_cond(l2, l1, c));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("score_candidate combines both directions") {
  const CharLM lm = CharLM::train(abc_corpus());
  const double left_only = score_candidate(lm, U"ab", U'c', U"");
  CHECK(left_only == doctest::Approx(lm.log_cond(U'a', U'b', U'c')));
  const double both = score_candidate(lm, U"a", U'b', U"c");
  CHECK(both == doctest::Approx(lm.log_cond(CharLM::kBos, U'a', U'b') +
                                lm.log_cond(U'a', U'b', U'c')));
  // empty left context pads with BOS
  const double start = score_candidate(lm, U"", U'a', U"b");
  CHECK(start == doctest::Approx(lm.log_cond(CharLM::kBos, CharLM::kBos, U'a') +
                                 lm.log_cond(CharLM::kBos, U'a', U'b')));
  CHECK(std::isfinite(score_candidate(lm, U"zz", U'q', U"z")));
}

TEST_CASE("the right continuation outscores alternatives") {
  const CharLM lm = CharLM::train(abc_corpus());
  const double good = score_candidate(lm, U"a", U'b', U"c");
  for (Char c : {U'a', U'c'}) {
    CHECK(good > score_candidate(lm, U"a", c, U"c"));
  }
}

TEST_CASE("top_candidates ranks by count then codepoint") {
  const CharLM lm = CharLM::train({sent("bbba"), sent("ccca"), sent("ca")});
  // counts: a 3, c 4, b 3 -> c, then a before b on the tie
  const std::u32string& top = lm.top_candidates();
  REQUIRE(top.size() == 3);
  CHECK(top[0] == U'c');
  CHECK(top[1] == U'a');
  CHECK(top[2] == U'b');

  const CharLM capped = CharLM::train({sent("bbba"), sent("ccca"), sent("ca")},
                                      0.01, 2);
  CHECK(capped.top_candidates() == U"ca");
  // padding symbols never appear as candidates
  for (Char c : lm.top_candidates()) {
    CHECK(c != CharLM::kBos);
    CHECK(c != CharLM::kEos);
  }
}

TEST_CASE("fill completes a missing character from context") {
  const CharLM lm = CharLM::train(abc_corpus());
  CHECK(fill(lm, masked_from("ab?", {2})).to_utf8() == "abc");
  CHECK(fill(lm, masked_from("?bc", {0})).to_utf8() == "abc");
  CHECK(fill(lm, masked_from("a?c", {1})).to_utf8() == "abc");
}

TEST_CASE("fill leaves unmasked sequences untouched") {
  const CharLM lm = CharLM::train(abc_corpus());
  CHECK(fill(lm, masked_from("cab", {})).to_utf8() == "cab");
  CHECK(fill(lm, MaskedSequence{}).to_utf8() == "");
}

TEST_CASE("confusion sets restrict mistaken-mask candidates") {
  const CharLM lm = CharLM::train(abc_corpus());
  ConfusionSet confusion;
  confusion.add(U'x', U'b');

  MaskedSequence m;
  m.slots.push_back(Slot::fixed(U'a', 0));
  m.slots.push_back(Slot::mask_mistaken(U'x', 1));
  m.slots.push_back(Slot::fixed(U'c', 2));
  CHECK(fill(lm, m, &confusion).to_utf8() == "abc");

  // without the set the LM pool is used and still picks 'b' from context
  CHECK(fill(lm, m).to_utf8() == "abc");

  // a confusion set without the key falls back to the LM pool
  ConfusionSet other;
  other.add(U'q', U'z');
  CHECK(fill(lm, m, &other).to_utf8() == "abc");
}

TEST_CASE("multiple masks fill left to right with updated context") {
  const CharLM lm = CharLM::train(abc_corpus());
  CHECK(fill(lm, masked_from("a??", {1, 2})).to_utf8() == "abc");
  CHECK(fill(lm, masked_from("??c", {0, 1})).to_utf8() == "abc");
  CHECK(fill(lm, masked_from("???", {0, 1, 2})).to_utf8() == "abc");
}

TEST_CASE("a wider beam recovers from a greedy first step") {
  // 'y' is the most likely first character but has no good continuation;
  // greedy commits to it, while the beam keeps "x" alive and wins with "xq".
  std::vector<Sentence> corpus;
  for (int i = 0; i < 6; ++i) corpus.push_back(sent("y"));
  for (int i = 0; i < 5; ++i) corpus.push_back(sent("xq"));
  const CharLM lm = CharLM::train(corpus);

  MaskedSequence m;
  m.slots.push_back(Slot::mask_missing(0));
  m.slots.push_back(Slot::mask_missing(0));
  const Sentence greedy = fill(lm, m, nullptr, 1);
  const Sentence beamed = fill(lm, m, nullptr, 8);
  CHECK(greedy[0] == U'y');
  CHECK(beamed.to_utf8() == "xq");

  const auto total = [&](const Sentence& s) {
    return score_candidate(lm, U"", s[0], U"") +
           score_candidate(lm, std::u32string(1, s[0]), s[1], U"");
  };
  CHECK(total(beamed) > total(greedy));
  // beams wider than the hypothesis space change nothing
  CHECK(fill(lm, m, nullptr, 64) == fill(lm, m, nullptr, 65));
}

TEST_CASE("fill never fails even with a candidate-free model") {
  CHECK_THROWS_AS(CharLM::train({}), Error);
  // a corpus of one empty sentence trains, but yields no fill candidates
  const CharLM lm = CharLM::train({sent("")});
  CHECK(lm.top_candidates().empty());
  MaskedSequence m;
  m.slots.push_back(Slot::mask_missing(0));
  // no candidates anywhere: the placeholder keeps the output well formed
  CHECK(fill(lm, m).to_utf8() == "?");

  MaskedSequence mistaken;
  mistaken.slots.push_back(Slot::mask_mistaken(U'x', 0));
  // the original character is the last resort before the placeholder
  CHECK(fill(lm, mistaken).to_utf8() == "x");
}

TEST_CASE("fill output length equals slot count") {
  const CharLM lm = CharLM::train({sent("ab")});
  for (int masks = 0; masks <= 3; ++masks) {
    MaskedSequence m;
    for (int i = 0; i < 3; ++i) {
      if (i < masks) {
        m.slots.push_back(Slot::mask_missing(i));
      } else {
        m.slots.push_back(Slot::fixed(U'a', i));
      }
    }
    CHECK(fill(lm, m).size() == 3);
  }
}

TEST_CASE("model save and load round trip") {
  const CharLM lm = CharLM::train({sent("abc"), sent("ab"), sent("a\xe4\xbd\xa0")},
                                  0.05, 100);
  const std::string path =
      (std::filesystem::temp_directory_path() / "charfix_lm.json").string();
  lm.save_file(path);
  const CharLM loaded = CharLM::load_file(path);
  CHECK(loaded.k() == lm.k());
  CHECK(loaded.top_k() == lm.top_k());
  CHECK(loaded.vocab_size() == lm.vocab_size());
  CHECK(loaded.top_candidates() == lm.top_candidates());
  const std::vector<Char> vocab = lm.vocabulary();
  for (Char l2 : vocab) {
    for (Char l1 : vocab) {
      for (Char c : vocab) {
        CHECK(loaded.log_cond(l2, l1, c) == lm.log_cond(l2, l1, c));
      }
    }
  }
  std::filesystem::remove(path);

  CHECK_THROWS_AS(CharLM::load_json("{}"), Error);
  CHECK_THROWS_AS(CharLM::load_json("nope"), Error);
}

TEST_CASE("rewrite then fill corrects a simple sentence") {
  const CharLM lm = CharLM::train(abc_corpus());
  LabelSeq labels{{0, Action::kKeep},
                  {0, Action::kMistaken},
                  {1, Action::kKeep}};
  const MaskedSequence m = rewrite(sent("ax"), labels);
  // 'x' is masked as mistaken, one missing mask before the end slot
  REQUIRE(m.slots.size() == 3);
  CHECK(fill(lm, m).to_utf8() == "abc");
}

}  // TEST_SUITE
