#include <gtest/gtest.h>

#include <algorithm>

#include "drq/caption_metrics.hpp"

using namespace drq;

namespace {

Corpus make(const std::vector<std::pair<std::string, std::vector<std::string>>>& rows) {
  Corpus c;
  for (const auto& [cand, refs] : rows) {
    CorpusEntry e{tokenize(cand), {}};
    for (const auto& r : refs) e.references.push_back(tokenize(r));
    c.entries.push_back(std::move(e));
  }
  return c;
}

// Candidates replaced by their first reference.
Corpus identical(Corpus c) {
  for (auto& e : c.entries) e.candidate = e.references.front();
  return c;
}

// Same corpora as tests/oracles/caption_oracle.py; goldens printed by it.
const Corpus kBleu = make({
    {"the vehicle in front of the ego is moving slowly", {"the vehicle in front of the ego is stopped now"}},
    {"a pedestrian stands at the left side of the road",
     {"a pedestrian is standing on the left side of the road", "there is a pedestrian to the left"}},
});

const Corpus kRouge = make({
    {"the car ahead will turn left soon", {"the car in front will turn left"}},
    {"the cyclist is parked on the right", {"a cyclist on the right is parked"}},
});

const Corpus kCider = make({
    {"the vehicle ahead is moving towards the ego", {"the vehicle in front is approaching the ego"}},
    {"a pedestrian is standing at the left side", {"the pedestrian is waiting on the left side"}},
    {"the ego vehicle should slow down for safety now", {"the ego vehicle will slow down because of risk"}},
});

}  // namespace

TEST(Bleu, MatchesReferenceImplementation) { EXPECT_NEAR(bleu4(kBleu), 0.641115056895, 1e-6); }

TEST(Bleu, IdenticalIsOne) { EXPECT_NEAR(bleu4(identical(kBleu)), 1.0, 1e-12); }

TEST(Bleu, DisjointIsNearZero) {
  EXPECT_LT(bleu4(make({{"alpha beta gamma delta", {"one two three four"}}})), 1e-6);
}

TEST(Bleu, ReferenceOrderDoesNotMatter) {
  Corpus c = kBleu;
  std::reverse(c.entries[1].references.begin(), c.entries[1].references.end());
  EXPECT_EQ(bleu4(c), bleu4(kBleu));
}

TEST(Rouge, MatchesReferenceImplementation) {
  EXPECT_NEAR(rouge_l(kRouge), 0.642857142857, 1e-6);
  EXPECT_NEAR(rouge_l(make({{"a b c d", {"a c d e"}}})), 0.75, 1e-12);
}

TEST(Rouge, Bounds) {
  EXPECT_NEAR(rouge_l(identical(kRouge)), 1.0, 1e-12);
  EXPECT_EQ(rouge_l(make({{"alpha beta", {"one two"}}})), 0.0);
  EXPECT_EQ(rouge_l(Tokens{}, {Tokens{"a"}}), 0.0);
}

TEST(Rouge, BestReferenceWins) {
  const auto one = rouge_l(tokenize("the car stops"), {tokenize("the car stops")});
  const auto both = rouge_l(tokenize("the car stops"), {tokenize("nothing here"), tokenize("the car stops")});
  EXPECT_EQ(one, both);
}

TEST(Cider, MatchesReferenceImplementation) {
  const auto r = cider_detailed(kCider);
  EXPECT_NEAR(r.score, 1.886185287110, 1e-6);
  ASSERT_EQ(r.per_entry.size(), 3u);
  EXPECT_NEAR(r.per_entry[0], 0.762620938049, 1e-6);
  EXPECT_NEAR(r.per_entry[1], 2.884700982367, 1e-6);
  EXPECT_NEAR(r.per_entry[2], 2.011233940913, 1e-6);
}

TEST(Cider, IdenticalIsTen) { EXPECT_NEAR(cider(identical(kCider)), 10.0, 1e-9); }

TEST(Cider, DisjointIsZero) {
  EXPECT_EQ(cider(make({{"alpha beta gamma delta", {"one two three four"}}, {"x y z w", {"p q r s"}}})), 0.0);
}

TEST(Cider, NeedsTwoEntries) {
  try {
    cider(make({{"a b", {"a b"}}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorpusTooSmall);
  }
}

TEST(Corpus, RejectsMissingReferences) {
  Corpus c = kBleu;
  c.entries[0].references.clear();
  EXPECT_THROW(bleu4(c), Error);
  EXPECT_THROW(bleu4(Corpus{}), Error);
}
