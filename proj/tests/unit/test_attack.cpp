#include <gtest/gtest.h>

#include "rtransfer/attack.hpp"
#include "rtransfer/corpus.hpp"
#include "support/fixtures.hpp"

namespace rt = rtransfer;

namespace {

rt::EmbeddingStore tiny_store() {
  return rt::EmbeddingStore({{"cat", {1, 0, 0}}, {"dog", {0.9, 0.1, 0}}, {"car", {0, 1, 0}}, {"bus", {0, 0.9, 0.1}}});
}

std::vector<std::string> letters(std::string_view s) { return rt::unicode::graphemes(s); }

}  // namespace

TEST(AttackCount, RoundsHalfUpAndClamps) {
  EXPECT_EQ(rt::select_attack_count(1, 0.1), 1u);
  EXPECT_EQ(rt::select_attack_count(4, 0.1), 1u);
  EXPECT_EQ(rt::select_attack_count(15, 0.1), 2u);
  EXPECT_EQ(rt::select_attack_count(25, 0.1), 3u);
  EXPECT_EQ(rt::select_attack_count(10, 0.05), 1u);
  EXPECT_EQ(rt::select_attack_count(30, 0.05), 2u);
  EXPECT_EQ(rt::select_attack_count(5, 1.0), 5u);
  EXPECT_THROW(rt::select_attack_count(0, 0.1), rt::Error);
}

TEST(Tokens, SpaceRunsCollapse) {
  EXPECT_EQ(rt::tokenize("  a  b c "), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(rt::detokenize({"a", "b"}), "a b");
}

TEST(Config, Validation) {
  auto c = rt::AttackConfig::for_level(rt::AttackLevel::Multi);
  EXPECT_NO_THROW(c.validate());
  c.proportion = 0.0;
  EXPECT_THROW(c.validate(), rt::Error);
  c = rt::AttackConfig::for_level(rt::AttackLevel::Char);
  c.weights[rt::op_index(rt::NoiseOp::WordSwap)] = 0.1;
  EXPECT_THROW(c.validate(), rt::Error);
  EXPECT_FALSE(rt::AttackConfig::for_level(rt::AttackLevel::Char).uses_word_ops());
  EXPECT_TRUE(rt::AttackConfig::for_level(rt::AttackLevel::Word).uses_word_ops());
}

TEST(Alphabet, SortedUniqueWithoutSpace) {
  const auto a = rt::Alphabet::from_string("cba a");
  EXPECT_EQ(a.clusters(), (std::vector<std::string>{"a", "b", "c"}));
  rt::Rng rng(1);
  for (int i = 0; i < 50; ++i) EXPECT_NE(a.draw_excluding("b", rng), "b");
  EXPECT_EQ(a.alternatives("b"), 2u);
  EXPECT_EQ(a.alternatives("z"), 3u);
}

TEST(CharOps, InsertAddsOneCluster) {
  const auto a = rt::Alphabet::from_string("xyz");
  rt::Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto out = rt::char_insert("héllo", a, rng);
    EXPECT_EQ(rt::unicode::grapheme_count(out), 6u);
  }
}

TEST(CharOps, DeleteRemovesOneCluster) {
  rt::Rng rng(5);
  EXPECT_FALSE(rt::char_delete_legal("a"));
  for (int i = 0; i < 50; ++i) EXPECT_EQ(rt::unicode::grapheme_count(rt::char_delete("e\xCC\x81t\xC3\xA9", rng)), 2u);
}

TEST(CharOps, SubstituteChangesExactlyOneCluster) {
  const auto a = rt::Alphabet::from_string("abc");
  rt::Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    const auto before = letters("abca");
    const auto after = letters(rt::char_substitute("abca", a, rng));
    ASSERT_EQ(after.size(), before.size());
    int diff = 0;
    for (std::size_t j = 0; j < before.size(); ++j) diff += before[j] != after[j];
    EXPECT_EQ(diff, 1);
  }
  EXPECT_FALSE(rt::char_substitute_legal("aa", rt::Alphabet::from_string("a")));
}

TEST(CharOps, SwapExchangesDistinctNeighbours) {
  rt::Rng rng(3);
  EXPECT_FALSE(rt::char_swap_legal("aa"));
  EXPECT_FALSE(rt::char_swap_legal("a"));
  for (int i = 0; i < 20; ++i) EXPECT_EQ(rt::char_swap_adjacent("aab", rng), "aba");
}

TEST(WordOps, SwapDeleteInsertReplace) {
  rt::Rng rng(2);
  const std::vector<std::string> toks = {"cat", "sat", "car"};
  auto swapped = rt::word_swap(toks, rng);
  EXPECT_EQ(swapped.size(), 3u);
  EXPECT_TRUE(std::is_permutation(swapped.begin(), swapped.end(), toks.begin()));
  EXPECT_NE(swapped, toks);
  EXPECT_EQ(rt::word_delete(toks, rng).size(), 2u);

  const auto store = tiny_store();
  for (int i = 0; i < 20; ++i) {
    auto ins = rt::word_insert(toks, store, 1, rng);
    ASSERT_EQ(ins.size(), 4u);
    auto rep = rt::word_replace(toks, store, 1, rng);
    ASSERT_EQ(rep.size(), 3u);
    // With k = 1 the only neighbour of cat is dog and of car is bus.
    EXPECT_TRUE(rep == (std::vector<std::string>{"dog", "sat", "car"}) ||
                rep == (std::vector<std::string>{"cat", "sat", "bus"}));
  }
}

TEST(Sentence, EventCountAndDeterminism) {
  const auto cfg = rt::AttackConfig::for_level(rt::AttackLevel::Char);
  const auto alphabet = rt::Alphabet::from_string("abcdefghij");
  const rt::AttackContext ctx{cfg, alphabet, nullptr};
  const auto toks = rt::tokenize("one two three four five six seven eight nine ten eleven twelve thirteen fourteen fifteen");
  const auto a = rt::attack_sentence(toks, ctx, "en-fr", 4);
  const auto b = rt::attack_sentence(toks, ctx, "en-fr", 4);
  EXPECT_EQ(a.events.size(), 2u);
  EXPECT_EQ(a.tokens, b.tokens);
  EXPECT_EQ(a.tokens.size(), toks.size());
  EXPECT_NE(a.tokens, toks);
  // Targets are distinct tokens.
  EXPECT_NE(a.events[0].position, a.events[1].position);
}

TEST(Sentence, SingleTokenWordOpsFallBackToCharacters) {
  auto cfg = rt::AttackConfig::for_level(rt::AttackLevel::Word);
  cfg.weights = {};
  cfg.weights[rt::op_index(rt::NoiseOp::WordSwap)] = 0.5;
  cfg.weights[rt::op_index(rt::NoiseOp::WordDelete)] = 0.5;
  const auto alphabet = rt::Alphabet::from_string("xyz");
  const auto store = tiny_store();
  const rt::AttackContext ctx{cfg, alphabet, &store};
  for (std::uint64_t line = 0; line < 20; ++line) {
    const auto r = rt::attack_sentence({"word"}, ctx, "en-fr", line);
    ASSERT_EQ(r.events.size(), 1u);
    EXPECT_TRUE(rt::is_char_op(r.events[0].applied));
    EXPECT_EQ(r.tokens.size(), 1u);
  }
}

TEST(Sentence, OutOfVocabularyTargetsAreRetargeted) {
  auto cfg = rt::AttackConfig::for_level(rt::AttackLevel::Word);
  cfg.weights = {};
  cfg.weights[rt::op_index(rt::NoiseOp::WordReplace)] = 1.0;
  cfg.top_k = 1;
  cfg.proportion = 1.0;
  const auto alphabet = rt::Alphabet::from_string("xyz");
  const auto store = tiny_store();
  const rt::AttackContext ctx{cfg, alphabet, &store};
  const auto r = rt::attack_sentence({"zzz", "cat"}, ctx, "en-fr", 0);
  ASSERT_EQ(r.events.size(), 2u);
  for (const auto& e : r.events) EXPECT_EQ(e.applied, rt::NoiseOp::WordReplace);
  // Both events land on "cat": cat -> dog, then dog -> cat.
  EXPECT_EQ(r.tokens, (std::vector<std::string>{"zzz", "cat"}));

  // No in-vocabulary token at all: WordSwap when possible.
  const auto s = rt::attack_sentence({"zzz", "yyy"}, ctx, "en-fr", 0);
  for (const auto& e : s.events) EXPECT_EQ(e.applied, rt::NoiseOp::WordSwap);
  const auto c = rt::attack_sentence({"zzz"}, ctx, "en-fr", 0);
  EXPECT_TRUE(rt::is_char_op(c.events[0].applied));
}

TEST(Lines, EmptyLinesPassThroughAndStatsAddUp) {
  rt::AttackResources res{rt::AttackConfig::for_level(rt::AttackLevel::Char), {}, 2};
  const std::vector<std::string> lines = {"the cat sat", "", "a dog"};
  rt::AttackStats stats;
  std::vector<std::vector<rt::AttackEvent>> events;
  const auto out = rt::attack_lines(lines, rt::Direction("en", "fr"), res, &stats, &events);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[1], "");
  EXPECT_EQ(stats.sentences, 2u);
  EXPECT_EQ(stats.events, 2u);
  EXPECT_EQ(events[1].size(), 0u);
}

TEST(Lines, WordLevelNeedsEmbeddings) {
  rt::AttackResources res{rt::AttackConfig::for_level(rt::AttackLevel::Word), {}, 1};
  EXPECT_THROW(rt::attack_lines({"a b"}, rt::Direction("en", "fr"), res), rt::Error);
}

TEST(Lines, ParallelMatchesSerial) {
  const auto lines = rt::testing::synthetic_lines(300, 1);
  rt::AttackResources one{rt::AttackConfig::for_level(rt::AttackLevel::Char), {}, 1};
  rt::AttackResources four = one;
  four.jobs = 4;
  const rt::Direction d("en", "de");
  EXPECT_EQ(rt::attack_lines(lines, d, one), rt::attack_lines(lines, d, four));
}

TEST(Lines, EditingOneLineLeavesOthersUntouched) {
  auto lines = rt::testing::synthetic_lines(50, 2);
  rt::AttackResources res{rt::AttackConfig::for_level(rt::AttackLevel::Char), {}, 1};
  // A fixed pool: the corpus-local one would change with the edit.
  res.config.alphabet = "abcdefghijklmnopqrstuvwxyz";
  const rt::Direction d("en", "de");
  const auto before = rt::attack_lines(lines, d, res);
  lines[10] = "completely different words here";
  const auto after = rt::attack_lines(lines, d, res);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i != 10) {
      EXPECT_EQ(before[i], after[i]);
    }
  }
}
