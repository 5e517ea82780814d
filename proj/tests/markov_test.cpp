#include "melcomp/markov.h"

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <string>

#include "melcomp/error.h"

namespace melcomp {
namespace {

// Letters A.. map to symbols 0.. of a pitch alphabet; onsets 0, 1, 2, ...
TrainingSequence letters(const std::string& doc) {
  TrainingSequence seq;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    seq.push_back({static_cast<Symbol>(doc[i] - 'A'), RationalTime(static_cast<std::int64_t>(i))});
  }
  return seq;
}

StateAlphabet abcd() { return StateAlphabet::for_pitches({0, 1, 2, 3}); }

TransitionModel table_model() {
  const std::vector<TrainingSequence> docs = {letters("ABBA"), letters("ACDC"), letters("ACAB")};
  return train(docs, 2, abcd());
}

std::vector<Symbol> ctx(const std::string& s) {
  std::vector<Symbol> out;
  for (char c : s) out.push_back(c == '_' ? kBlank : static_cast<Symbol>(c - 'A'));
  return out;
}

TEST(TrainTest, BigramCountTable) {
  const TransitionModel m = table_model();
  const std::map<std::string, std::vector<std::uint64_t>> expected = {
      {"__", {3, 0, 0, 0}}, {"_A", {0, 1, 2, 0}}, {"AB", {0, 1, 0, 0}}, {"BB", {1, 0, 0, 0}},
      {"AC", {1, 0, 0, 1}}, {"CD", {0, 0, 1, 0}}, {"CA", {0, 1, 0, 0}},
  };
  std::size_t second_order_rows = 0;
  for (const auto& [key, row] : m.rows()) {
    EXPECT_EQ(key.offbeat, RationalTime(0));
    if (key.context.size() == 2) ++second_order_rows;
  }
  EXPECT_EQ(second_order_rows, expected.size());
  for (const auto& [c, counts] : expected) {
    const TransitionRow* row = m.find(RationalTime(0), ctx(c));
    ASSERT_NE(row, nullptr) << c;
    EXPECT_EQ(row->counts, counts) << c;
    const auto total = row->total();
    for (std::size_t i = 0; i < counts.size(); ++i) {
      EXPECT_EQ(row->probabilities[i], static_cast<double>(counts[i]) / static_cast<double>(total)) << c;
    }
  }
}

TEST(TrainTest, TableQueries) {
  const TransitionModel m = table_model();
  const RationalTime zero(0);
  EXPECT_EQ(m.transition_vector(zero, ctx("_A")), (std::vector<double>{0.0, 1.0 / 3.0, 2.0 / 3.0, 0.0}));
  EXPECT_EQ(m.transition_vector(zero, ctx("AB")), (std::vector<double>{0, 1, 0, 0}));
  EXPECT_EQ(m.transition_vector(zero, ctx("BA")), (std::vector<double>{0, 0, 0, 0}));
  EXPECT_EQ(m.transition_vector(zero, ctx("__")), (std::vector<double>{1, 0, 0, 0}));
  EXPECT_EQ(m.transition_vector(zero, ctx("DD")), (std::vector<double>{0, 0, 0, 0}));
  EXPECT_EQ(m.transition_vector(RationalTime(1, 2), ctx("__")), (std::vector<double>{0, 0, 0, 0}));
}

TEST(TrainTest, BadQueriesThrow) {
  const TransitionModel m = table_model();
  const std::vector<Symbol> out_of_range = {0, 4};
  EXPECT_THROW(m.transition_vector(RationalTime(0), out_of_range), ModelQueryError);
  EXPECT_THROW(m.transition_vector(RationalTime(0), ctx("AAA")), ModelQueryError);
  EXPECT_THROW(m.transition_vector(RationalTime(1), ctx("AA")), ModelQueryError);
}

TEST(TrainTest, EmptyTrainingSetGivesEmptyModel) {
  const TransitionModel m = train({}, 3, abcd());
  EXPECT_TRUE(m.rows().empty());
  EXPECT_EQ(m.transition_vector(RationalTime(0), ctx("___")), (std::vector<double>(4, 0.0)));
}

TEST(TrainTest, OffbeatSelectsSlice) {
  // Two notes: an eighth at 0 then a note at 1/2.
  const std::vector<TrainingSequence> seqs = {{{0, RationalTime(0)}, {1, RationalTime(1, 2)}}};
  const TransitionModel m = train(seqs, 1, StateAlphabet::for_pitches({60, 62}));
  EXPECT_EQ(m.transition_vector(RationalTime(1, 2), std::vector<Symbol>{0}), (std::vector<double>{0, 1}));
  EXPECT_EQ(m.transition_vector(RationalTime(0), std::vector<Symbol>{0}), (std::vector<double>{0, 0}));
  EXPECT_EQ(m.transition_vector(RationalTime(0), std::vector<Symbol>{kBlank}), (std::vector<double>{1, 0}));
}

// Independent recount: for each position, each context length k, look back
// k symbols through an explicit blank-padded copy of the sequence.
std::map<ContextKey, std::vector<std::uint64_t>> brute_force(const std::vector<TrainingSequence>& seqs, int order,
                                                             std::size_t n) {
  std::map<ContextKey, std::vector<std::uint64_t>> table;
  for (const auto& seq : seqs) {
    std::vector<Symbol> padded(static_cast<std::size_t>(order), kBlank);
    for (const auto& e : seq) padded.push_back(e.symbol);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const std::size_t pos = i + static_cast<std::size_t>(order);
      for (int k = 1; k <= order; ++k) {
        ContextKey key{seq[i].onset.mod1(), std::vector<Symbol>(padded.begin() + static_cast<std::ptrdiff_t>(pos) - k,
                                                                padded.begin() + static_cast<std::ptrdiff_t>(pos))};
        auto& row = table[key];
        row.resize(n);
        ++row[static_cast<std::size_t>(seq[i].symbol)];
      }
    }
  }
  return table;
}

std::vector<TrainingSequence> random_sequences(std::mt19937_64& rng, std::size_t alphabet) {
  const RationalTime steps[] = {RationalTime(1, 2), RationalTime(1), RationalTime(1, 3), RationalTime(3, 2)};
  std::vector<TrainingSequence> seqs(1 + rng() % 6);
  for (auto& seq : seqs) {
    RationalTime t(static_cast<std::int64_t>(rng() % 4));
    const std::size_t len = rng() % 12;
    for (std::size_t i = 0; i < len; ++i) {
      seq.push_back({static_cast<Symbol>(rng() % alphabet), t});
      t += steps[rng() % 4];
    }
  }
  return seqs;
}

TEST(TrainTest, MatchesBruteForceRecount) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 4;
    const int order = 1 + static_cast<int>(rng() % 4);
    const auto seqs = random_sequences(rng, n);
    std::vector<int> pitches;
    for (std::size_t i = 0; i < n; ++i) pitches.push_back(60 + static_cast<int>(i));
    const TransitionModel m = train(seqs, order, StateAlphabet::for_pitches(pitches));
    const auto expected = brute_force(seqs, order, n);
    ASSERT_EQ(m.rows().size(), expected.size()) << "trial " << trial;
    for (const auto& [key, counts] : expected) {
      const auto it = m.rows().find(key);
      ASSERT_NE(it, m.rows().end());
      EXPECT_EQ(it->second.counts, counts);
      double sum = 0.0;
      for (double p : it->second.probabilities) sum += p;
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(TrainTest, LowerOrderRowsAreNested) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const auto seqs = random_sequences(rng, 3);
    const auto alphabet = StateAlphabet::for_pitches({60, 62, 64});
    const TransitionModel high = train(seqs, 4, alphabet);
    for (int order = 1; order < 4; ++order) {
      const TransitionModel low = train(seqs, order, alphabet);
      for (const auto& [key, row] : low.rows()) {
        const TransitionRow* same = high.find(key.offbeat, key.context);
        ASSERT_NE(same, nullptr);
        EXPECT_EQ(*same, row);
      }
    }
  }
}

TEST(TrainTest, Deterministic) {
  std::mt19937_64 a(5), b(5);
  const auto sa = random_sequences(a, 4);
  const auto sb = random_sequences(b, 4);
  const auto alphabet = StateAlphabet::for_pitches({1, 2, 3, 4});
  EXPECT_EQ(train(sa, 3, alphabet), train(sb, 3, alphabet));
}

TEST(TrainTest, CollapseOffbeatsMergesCounts) {
  const std::vector<TrainingSequence> seqs = {{{0, RationalTime(0)}, {1, RationalTime(1, 2)}, {0, RationalTime(1)}}};
  const TransitionModel m = train(seqs, 1, StateAlphabet::for_pitches({60, 62})).collapse_offbeats();
  for (const auto& [key, row] : m.rows()) EXPECT_EQ(key.offbeat, RationalTime(0));
  EXPECT_EQ(m.transition_vector(RationalTime(0), std::vector<Symbol>{0}), (std::vector<double>{0, 1}));
  EXPECT_EQ(m.transition_vector(RationalTime(0), std::vector<Symbol>{1}), (std::vector<double>{1, 0}));
}

TEST(StateAlphabetTest, SortedWithRestFirst) {
  const auto a = StateAlphabet::for_pitches({64, kRestPitch, 60, 64});
  EXPECT_EQ(a.pitches(), (std::vector<int>{kRestPitch, 60, 64}));
  EXPECT_TRUE(a.is_rest(0));
  EXPECT_EQ(a.find_pitch(std::nullopt), 0);
  EXPECT_EQ(a.find_pitch(64), 2);
  EXPECT_FALSE(a.find_pitch(62).has_value());
  EXPECT_TRUE(std::isnan(a.value(0)));
  EXPECT_EQ(a.value(1), 60.0);

  const auto d = StateAlphabet::for_durations({RationalTime(1), RationalTime(1, 4), RationalTime(1)});
  EXPECT_EQ(d.durations(), (std::vector<RationalTime>{RationalTime(1, 4), RationalTime(1)}));
  EXPECT_EQ(d.value(0), 0.25);
}

TEST(ModelSizeTest, Examples) {
  EXPECT_EQ(model_size(29, 4), 732540u);
  for (std::uint64_t n : {1u, 7u, 29u, 1000u}) EXPECT_EQ(model_size(n, 1), n);
  EXPECT_EQ(model_size(2, 3), 14u);
  EXPECT_THROW(model_size(1u << 20, 4), std::overflow_error);
}

}  // namespace
}  // namespace melcomp
