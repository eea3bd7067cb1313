#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "perseval/errors.hpp"
#include "perseval/metrics.hpp"

namespace m = perseval::metrics;
using Seq = std::vector<std::string>;

TEST(RougeL, WorkedExampleAndEndpoints) {
  EXPECT_NEAR(m::rouge_l_distance(Seq{"the", "cat"}, Seq{"the", "cat", "sat"}), 0.2, 1e-15);
  EXPECT_EQ(m::rouge_l_distance(Seq{"a", "b", "c"}, Seq{"a", "b", "c"}), 0.0);
  EXPECT_EQ(m::rouge_l_distance(Seq{"a", "b"}, Seq{"c", "d"}), 1.0);
}

TEST(RougeL, IsDirectionalOnlyThroughLengths) {
  // F1 is symmetric in P and R, so swapping arguments gives the same value.
  const Seq a{"x", "y", "z", "w"};
  const Seq b{"y", "w", "q"};
  EXPECT_DOUBLE_EQ(m::rouge_l_distance(a, b), m::rouge_l_distance(b, a));
}

TEST(RougeSU4, SkipBigramEnumeration) {
  // candidate units {a, b, c, ab, ac, bc}; reference units {a, c, ac}; 3 shared.
  // P = 3/6, R = 3/3, F1 = 2/3.
  EXPECT_NEAR(m::rouge_su4_distance(Seq{"a", "b", "c"}, Seq{"a", "c"}), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(m::rouge_su4_distance(Seq{"a", "b", "c"}, Seq{"a", "b", "c"}), 0.0);
  EXPECT_EQ(m::rouge_su4_distance(Seq{"a", "b"}, Seq{"c", "d"}), 1.0);
}

TEST(RougeSU4, GapLimitIsFourTokens) {
  // "a" and "z" are separated by 4 tokens in the first sequence (kept) and by
  // 5 in the second (dropped), so only the first shares the skip-bigram a-z.
  const Seq four{"a", "p", "q", "r", "s", "z"};
  const Seq five{"a", "p", "q", "r", "s", "t", "z"};
  const Seq ref{"a", "z"};
  // four: 6 unigrams + all 15 pairs = 21 units, 3 shared (a, z, a-z)
  // five: 7 unigrams + 20 of the 21 pairs (a-z is out of range) = 27 units, 2 shared
  const double f_four = 2.0 * (3.0 / 21) * 1.0 / (3.0 / 21 + 1.0);
  const double f_five = 2.0 * (2.0 / 27) * (2.0 / 3) / (2.0 / 27 + 2.0 / 3);
  EXPECT_NEAR(m::rouge_su4_distance(four, ref), 1.0 - f_four, 1e-15);
  EXPECT_NEAR(m::rouge_su4_distance(five, ref), 1.0 - f_five, 1e-15);
}

TEST(Bleu1, ClippingAndBrevityPenalty) {
  EXPECT_NEAR(m::bleu1_distance(Seq{"the", "the", "the"}, Seq{"the", "cat"}), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(m::bleu1_distance(Seq{"a", "b"}, Seq{"a", "b"}), 0.0);
  EXPECT_EQ(m::bleu1_distance(Seq{"a", "b"}, Seq{"c", "d"}), 1.0);
  // short candidate: precision 1, BP = exp(1 - 4/2)
  EXPECT_NEAR(m::bleu1_distance(Seq{"a", "b"}, Seq{"a", "b", "c", "d"}), 1.0 - std::exp(-1.0),
              1e-15);
}

TEST(Meteor, IdentityNoMatchAndHandExample) {
  EXPECT_EQ(m::meteor_distance(Seq{"the", "cat", "sat"}, Seq{"the", "cat", "sat"}), 0.0);
  EXPECT_EQ(m::meteor_distance(Seq{"a", "b"}, Seq{"c", "d"}), 1.0);
  // matches 2, chunks 1, P = 2/3, R = 1, F = 10PR/(R + 9P) = 20/21,
  // penalty 0.5 (1/2)^3 = 1/16 -> score 20/21 * 15/16
  EXPECT_NEAR(m::meteor_distance(Seq{"the", "cat", "sat"}, Seq{"the", "cat"}),
              1.0 - 20.0 / 21.0 * 15.0 / 16.0, 1e-15);
}

TEST(Meteor, StemStageMatchesInflections) {
  const auto a = m::meteor_align(Seq{"cats", "running"}, Seq{"cat", "runs"});
  EXPECT_EQ(a.matches, 2u);
  EXPECT_EQ(a.chunks, 1u);
}

TEST(Meteor, PrefersAlignmentThatContinuesAChunk) {
  // "the" appears twice in the reference; the second occurrence continues the
  // chunk started by "cat".
  const auto a = m::meteor_align(Seq{"cat", "the"}, Seq{"the", "cat", "the"});
  EXPECT_EQ(a.matches, 2u);
  EXPECT_EQ(a.chunks, 1u);
}

namespace {

// Brute force over sequences whose tokens are distinct within each sequence:
// the alignment is forced, chunks are maximal runs that are contiguous in
// both sequences.
double brute_meteor(const Seq& cand, const Seq& ref) {
  std::vector<int> pos;  // reference position of each matched candidate token, in candidate order
  std::vector<std::size_t> cand_pos;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    auto it = std::find(ref.begin(), ref.end(), cand[i]);
    if (it != ref.end()) {
      pos.push_back(static_cast<int>(it - ref.begin()));
      cand_pos.push_back(i);
    }
  }
  if (pos.empty()) return 1.0;
  double chunks = 1;
  for (std::size_t i = 1; i < pos.size(); ++i)
    if (!(pos[i] == pos[i - 1] + 1 && cand_pos[i] == cand_pos[i - 1] + 1)) chunks += 1;
  const double mm = pos.size();
  const double p = mm / cand.size();
  const double r = mm / ref.size();
  const double f = 10 * p * r / (r + 9 * p);
  const bool whole = mm == cand.size() && mm == ref.size() && chunks == 1;
  const double frag = whole ? 0 : chunks / mm;
  return 1 - f * (1 - 0.5 * frag * frag * frag);
}

}  // namespace

TEST(Meteor, MatchesBruteForceOnDistinctTokens) {
  const Seq vocab{"cat", "dog", "sun", "map", "pen", "box", "cup", "hat"};
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    Seq a = vocab;
    Seq b = vocab;
    std::shuffle(a.begin(), a.end(), rng);
    std::shuffle(b.begin(), b.end(), rng);
    a.resize(1 + rng() % 5);
    b.resize(1 + rng() % 5);
    EXPECT_NEAR(m::meteor_distance(a, b), brute_meteor(a, b), 1e-15);
  }
}

TEST(StringMetrics, EmptyInputThrows) {
  const Seq empty;
  const Seq one{"a"};
  EXPECT_THROW(m::rouge_l_distance(empty, one), perseval::NumericError);
  EXPECT_THROW(m::rouge_su4_distance(one, empty), perseval::NumericError);
  EXPECT_THROW(m::bleu1_distance(empty, one), perseval::NumericError);
  EXPECT_THROW(m::meteor_distance(one, empty), perseval::NumericError);
  EXPECT_THROW(m::jsd_distance(Seq{}, one), perseval::NumericError);
}

// ---------------------------------------------------------------------------

TEST(Jsd, EndpointsAndDirectSummation) {
  const auto p = m::make_distribution({0, 1}, {0.5, 0.5});
  const auto q = m::make_distribution({0}, {1.0});
  EXPECT_EQ(m::jsd_distance(p, p), 0.0);
  EXPECT_NEAR(m::jsd_distance(m::make_distribution({0}, {1.0}), m::make_distribution({1}, {1.0})),
              1.0, 1e-15);

  const double m0 = 0.75;
  const double m1 = 0.25;
  const double js = 0.5 * (0.5 * std::log2(0.5 / m0) + 0.5 * std::log2(0.5 / m1)) +
                    0.5 * (1.0 * std::log2(1.0 / m0));
  EXPECT_NEAR(m::jsd_distance(p, q), std::sqrt(js), 1e-15);
  EXPECT_DOUBLE_EQ(m::jsd_distance(p, q), m::jsd_distance(q, p));
}

TEST(Jsd, TokenFormUsesUnionVocabularyFrequencies) {
  // {a: 2/3, b: 1/3} vs {a: 1/3, c: 2/3}
  const double pa = 2.0 / 3, pb = 1.0 / 3, qa = 1.0 / 3, qc = 2.0 / 3;
  const double ma = (pa + qa) / 2;
  const double js = 0.5 * (pa * std::log2(pa / ma) + pb * std::log2(pb / (pb / 2))) +
                    0.5 * (qa * std::log2(qa / ma) + qc * std::log2(qc / (qc / 2)));
  EXPECT_NEAR(m::jsd_distance(Seq{"a", "b", "a"}, Seq{"c", "a", "c"}), std::sqrt(js), 1e-15);
  EXPECT_EQ(m::jsd_distance(Seq{"x", "y"}, Seq{"y", "x"}), 0.0);
}

TEST(Jsd, TriangleInequalityOnRandomTriples) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto draw = [&] {
    std::vector<double> w(5);
    double s = 0;
    for (auto& x : w) s += (x = u(rng) < 0.2 ? 0.0 : u(rng));
    if (s == 0) w[0] = s = 1;
    for (auto& x : w) x /= s;
    return m::make_distribution({0, 1, 2, 3, 4}, w);
  };
  for (int i = 0; i < 2000; ++i) {
    const auto a = draw();
    const auto b = draw();
    const auto c = draw();
    EXPECT_LE(m::jsd_distance(a, c), m::jsd_distance(a, b) + m::jsd_distance(b, c) + 1e-12);
  }
}

TEST(Distribution, ValidationRejectsBadInput) {
  EXPECT_THROW(m::validate({{0, 1}, {0.5, 0.6}}), perseval::NumericError);
  EXPECT_THROW(m::validate({{1, 0}, {0.5, 0.5}}), perseval::NumericError);
  EXPECT_THROW(m::validate({{0, 1}, {-0.5, 1.5}}), perseval::NumericError);
  EXPECT_THROW(m::validate({{}, {}}), perseval::NumericError);
  EXPECT_NO_THROW(m::validate({{0, 1}, {0.5, 0.5 + 5e-7}}));
}

TEST(Distribution, MakeDistributionSortsAndMerges) {
  const auto d = m::make_distribution({3, 1, 3}, {0.25, 0.5, 0.25});
  EXPECT_EQ(d.support, (std::vector<std::int64_t>{1, 3}));
  EXPECT_EQ(d.mass, (std::vector<double>{0.5, 0.5}));
}

// ---------------------------------------------------------------------------

namespace {

double direct_ab(std::vector<double> p, std::vector<double> q, double a, double b) {
  double sp = 0, sq = 0;
  for (auto& x : p) sp += (x += m::kSmoothing);
  for (auto& x : q) sq += (x += m::kSmoothing);
  double t1 = 0, t2 = 0, t3 = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p[i] / sp;
    const double qi = q[i] / sq;
    t1 += std::pow(pi, a + b);
    t2 += std::pow(qi, a + b);
    t3 += std::pow(pi, a) * std::pow(qi, b);
  }
  return std::log(t1) / (b * (a + b)) + std::log(t2) / (a + b) - std::log(t3) / b;
}

}  // namespace

TEST(AbDivergence, IdentityIsZero) {
  const auto u = m::make_distribution({0, 1, 2, 3}, {0.25, 0.25, 0.25, 0.25});
  const auto p = m::make_distribution({0, 1, 2}, {0.7, 0.2, 0.1});
  EXPECT_NEAR(m::ab_divergence(u, u), 0.0, 1e-12);
  EXPECT_NEAR(m::ab_divergence(p, p), 0.0, 1e-12);
}

TEST(AbDivergence, DisjointSupportsAreLargeAndMatchDirectEvaluation) {
  const auto p = m::make_distribution({0}, {1.0});
  const auto q = m::make_distribution({1}, {1.0});
  const double d = m::ab_divergence(p, q);
  EXPECT_GT(d, 20.0);
  EXPECT_NEAR(d, direct_ab({1, 0}, {0, 1}, 1, 1), 1e-9);
}

TEST(AbDivergence, MatchesDirectEvaluationForOtherParameters) {
  const auto p = m::make_distribution({0, 1, 2}, {0.6, 0.3, 0.1});
  const auto q = m::make_distribution({1, 2, 3}, {0.2, 0.5, 0.3});
  for (auto [a, b] : {std::pair{1.0, 1.0}, std::pair{0.5, 1.5}, std::pair{2.0, 0.5}})
    EXPECT_NEAR(m::ab_divergence(p, q, a, b),
                direct_ab({0.6, 0.3, 0.1, 0}, {0, 0.2, 0.5, 0.3}, a, b), 1e-12);
}

TEST(AbDivergence, RejectsDegenerateParameters) {
  const auto p = m::make_distribution({0}, {1.0});
  EXPECT_THROW(m::ab_divergence(p, p, 1.0, 0.0), perseval::NumericError);
  EXPECT_THROW(m::ab_divergence(p, p, 1.0, -1.0), perseval::NumericError);
}

TEST(InfoLm, MapsDivergenceThroughOneMinusExp) {
  const auto p = m::make_distribution({0, 1, 2, 3}, {0.25, 0.25, 0.25, 0.25});
  const auto q = m::make_distribution({0}, {1.0});
  // sum p^2 = 1/4, sum q^2 = 1, sum pq = 1/4 -> D = 0.5 ln 4 = ln 2
  EXPECT_NEAR(m::ab_divergence(p, q), std::log(2.0), 1e-9);
  EXPECT_NEAR(m::infolm_distance(p, q), 0.5, 1e-9);
  EXPECT_NEAR(m::infolm_distance(p, p), 0.0, 1e-12);
}
