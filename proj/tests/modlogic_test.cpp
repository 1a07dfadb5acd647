#include <doctest.h>

#include "charfix/align.hpp"
#include "charfix/core.hpp"
#include "charfix/modlogic.hpp"
#include "charfix/rng.hpp"
#include "oracles.hpp"

using namespace charfix;

namespace {

Sentence sent(const char* utf8) { return Sentence::from_utf8(utf8); }

LabelSeq keeps(std::size_t n_plus_1) { return LabelSeq(n_plus_1); }

}  // namespace

TEST_SUITE("modlogic") {

TEST_CASE("all keep is the identity") {
  const Sentence s = sent("abc");
  const MaskedSequence m = rewrite(s, keeps(4));
  REQUIRE(m.slots.size() == 3);
  CHECK(m.mask_count() == 0);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(!m.slots[i].is_mask);
    CHECK(m.slots[i].ch == s[i]);
    CHECK(m.slots[i].source_index == static_cast<int>(i));
  }
}

TEST_CASE("mistaken becomes a mask that remembers the original") {
  LabelSeq labels = keeps(4);
  labels[1].action = Action::kMistaken;
  const MaskedSequence m = rewrite(sent("abc"), labels);
  REQUIRE(m.slots.size() == 3);
  CHECK(m.mask_count() == 1);
  CHECK(m.slots[1].is_mask);
  CHECK(m.slots[1].kind == MaskKind::kMistaken);
  CHECK(m.slots[1].has_original);
  CHECK(m.slots[1].original == U'b');
  CHECK(m.slots[1].source_index == 1);
}

TEST_CASE("redundant removes the token") {
  LabelSeq labels = keeps(4);
  labels[2].action = Action::kRedundant;
  const MaskedSequence m = rewrite(sent("abc"), labels);
  REQUIRE(m.slots.size() == 2);
  CHECK(m.to_utf8(U'_') == "ab");
}

TEST_CASE("insert_before emits masks ahead of the token") {
  LabelSeq labels = keeps(3);
  labels[1].insert_before = 2;
  const MaskedSequence m = rewrite(sent("ab"), labels);
  REQUIRE(m.slots.size() == 4);
  CHECK(m.to_utf8(U'_') == "a__b");
  CHECK(m.slots[1].kind == MaskKind::kMissing);
  CHECK(!m.slots[1].has_original);
  CHECK(m.slots[1].source_index == 1);
  CHECK(m.slots[2].kind == MaskKind::kMissing);
}

TEST_CASE("end slot inserts masks after the last token") {
  LabelSeq labels = keeps(3);
  labels[2].insert_before = 1;
  const MaskedSequence m = rewrite(sent("ab"), labels);
  REQUIRE(m.slots.size() == 3);
  CHECK(m.to_utf8(U'_') == "ab_");
  CHECK(m.slots[2].source_index == 2);
}

TEST_CASE("end slot action is ignored") {
  LabelSeq labels = keeps(3);
  labels[2].action = Action::kRedundant;
  const MaskedSequence a = rewrite(sent("ab"), labels);
  CHECK(a.slots.size() == 2);
  CHECK(a.to_utf8(U'_') == "ab");

  labels[2].action = Action::kMistaken;
  labels[2].insert_before = 1;
  const MaskedSequence b = rewrite(sent("ab"), labels);
  CHECK(b.slots.size() == 3);
  CHECK(b.to_utf8(U'_') == "ab_");
}

TEST_CASE("combined edits follow token order") {
  // source "abcd": insert before 'a', mistake 'b', drop 'c', keep 'd',
  // one trailing insertion.
  LabelSeq labels = keeps(5);
  labels[0].insert_before = 1;
  labels[1].action = Action::kMistaken;
  labels[2].action = Action::kRedundant;
  labels[4].insert_before = 1;
  const MaskedSequence m = rewrite(sent("abcd"), labels);
  CHECK(m.to_utf8(U'_') == "_a_d_");
  CHECK(m.mask_count() == 3);
  CHECK(m.slots[2].kind == MaskKind::kMistaken);
  CHECK(m.slots[2].original == U'b');
  CHECK(m.slots[4].kind == MaskKind::kMissing);
}

TEST_CASE("rewrite validates the label count") {
  CHECK_THROWS_AS(rewrite(sent("ab"), keeps(2)), Error);
  CHECK_THROWS_AS(rewrite(sent("ab"), keeps(4)), Error);
  CHECK_THROWS_AS(rewrite(sent(""), keeps(0)), Error);
  CHECK_NOTHROW(rewrite(sent(""), keeps(1)));
}

TEST_CASE("output length law holds on random label sequences") {
  Rng rng(11);
  for (int it = 0; it < 400; ++it) {
    const Sentence s(oracles::random_string(rng, 10, U"abc"));
    LabelSeq labels(s.size() + 1);
    int inserts = 0;
    int redundant = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
      labels[i].insert_before = static_cast<int>(rng.below(3));
      inserts += labels[i].insert_before;
      if (i < s.size()) {
        switch (rng.below(4)) {
          case 0:
            labels[i].action = Action::kMistaken;
            break;
          case 1:
            labels[i].action = Action::kRedundant;
            ++redundant;
            break;
          default:
            break;
        }
      }
    }
    const MaskedSequence m = rewrite(s, labels);
    CHECK(static_cast<int>(m.slots.size()) ==
          static_cast<int>(s.size()) + inserts - redundant);
  }
}

TEST_CASE("oracle_fill recovers the target from derived labels") {
  Rng rng(12);
  for (int it = 0; it < 400; ++it) {
    SentencePair pair;
    pair.source = Sentence(oracles::random_string(rng, 10, U"abcd"));
    pair.target = Sentence(oracles::random_string(rng, 10, U"abcd"));
    const LabelDerivation d = derive_labels(pair);
    const MaskedSequence m = rewrite(pair.source, d.labels);
    CHECK(oracle_fill(m, pair) == pair.target);
  }
}

TEST_CASE("oracle_fill rejects masks that do not match the pair") {
  SentencePair pair;
  pair.source = sent("abc");
  pair.target = sent("abc");
  LabelSeq labels = keeps(4);
  labels[1].action = Action::kMistaken;  // claims 'b' is wrong, but target keeps it
  const MaskedSequence m = rewrite(pair.source, labels);
  CHECK_THROWS_AS(oracle_fill(m, pair), Error);
}

}  // TEST_SUITE
