#include <gtest/gtest.h>

#include <memory>
#include <random>
#include <sstream>

#include "oracle/oracle.hpp"
#include "perseval/corpus.hpp"
#include "perseval/errors.hpp"
#include "perseval/human_judgment.hpp"
#include "support/fixtures.hpp"

using namespace perseval;
using namespace perseval::hj;
using testing_support::fixture;

TEST(HumanRatings, AveragesAnnotatorsAndOrders) {
  HumanRatings r;
  r.add("d", "a", "b", 2, "x");
  r.add("d", "b", "a", 5, "y");
  EXPECT_DOUBLE_EQ(r.mean_rating("d", "a", "b"), 3.5);
  EXPECT_DOUBLE_EQ(r.mean_rating("d", "b", "a"), 3.5);
  EXPECT_EQ(r.pair_count(), 1u);
  EXPECT_DOUBLE_EQ(r.divergence("d", "a", "b"), 1.0 - 2.5 / 5.0);
  EXPECT_EQ(r.divergence("d", "a", "a"), 0.0);
}

TEST(HumanRatings, ScaleEndpoints) {
  HumanRatings r(1, 6);
  r.add("d", "a", "b", 1);
  r.add("d", "a", "c", 6);
  EXPECT_EQ(r.divergence("d", "a", "b"), 1.0);
  EXPECT_EQ(r.divergence("d", "a", "c"), 0.0);
}

TEST(HumanRatings, Errors) {
  HumanRatings r;
  EXPECT_THROW(r.add("d", "a", "b", 0), DataError);
  EXPECT_THROW(r.add("d", "a", "b", 7), DataError);
  EXPECT_THROW(r.add("d", "a", "a", 3), DataError);
  EXPECT_THROW(r.mean_rating("d", "a", "b"), ReferentialError);
  EXPECT_THROW(HumanRatings(3, 3), DataError);
}

TEST(HumanRatings, ReadsJsonl) {
  const auto r = load_ratings(fixture("tiny_ratings.jsonl"));
  EXPECT_EQ(r.pair_count(), 2u);
  EXPECT_DOUBLE_EQ(r.mean_rating("d1", "gold:d1:u1", "gold:d1:u2"), 2.5);
  EXPECT_DOUBLE_EQ(r.mean_rating("d1", "gen:m:d1:u1", "gen:m:d1:u2"), 4.5);
  std::istringstream bad(R"({"doc_id":"d","left_id":"a","right_id":"b","rating":9})");
  EXPECT_THROW(read_ratings(bad), DataError);
  std::istringstream missing(R"({"doc_id":"d","left_id":"a","rating":3})");
  EXPECT_THROW(read_ratings(missing), ParseError);
}

TEST(PersevalHj, MetricSourceReproducesStandardPipeline) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 10; ++i) {
    const auto rc = testing_support::random_case(rng);
    std::shared_ptr<const DistanceMetric> metric = make_metric(MetricKind::rouge_l);
    const MetricDivergence source(metric);
    const auto hj = perseval_hj(rc.corpus, "m", source, *metric);
    const auto std_scores = score_model(rc.corpus, "m", *metric, {});
    EXPECT_EQ(hj.system.perseval, std_scores.system.perseval);
    EXPECT_EQ(hj.system.degress, std_scores.system.degress);
    EXPECT_EQ(hj.system.p_acc, std_scores.system.p_acc);
  }
}

TEST(PersevalHj, RatingSourceMatchesOracle) {
  const auto corpus = load_corpus(fixture("tiny_corpus.jsonl"));
  auto ratings = std::make_shared<const HumanRatings>(load_ratings(fixture("tiny_ratings.jsonl")));
  const RatingDivergence source(ratings);
  const auto metric = make_metric(MetricKind::rouge_l);
  const auto scores = perseval_hj(corpus, "m", source, *metric);

  oracle::Doc d;
  d.text = corpus.document("d1").text;
  d.golds = {"schools closed by storm", "roads shut across region"};
  d.gens = {"storm closes schools", "region roads closed"};
  // gold pair rated 2 and 3 -> 1 - 1.5/5; summary pair rated 4 and 5 -> 1 - 3.5/5
  const oracle::Distance sigma = [&](const std::string& a, const std::string& b) {
    auto is = [&](const std::vector<std::string>& v, const std::string& s) {
      return std::find(v.begin(), v.end(), s) != v.end();
    };
    if (is(d.golds, a) && is(d.golds, b)) return 0.7;
    if (is(d.gens, a) && is(d.gens, b)) return 0.3;
    return oracle::rouge_l(a, b);
  };
  const auto expected = oracle::system({d}, sigma, {});
  EXPECT_NEAR(scores.system.degress, expected.degress, 1e-12);
  EXPECT_NEAR(scores.system.perseval, expected.perseval, 1e-12);
}

TEST(PersevalHj, MissingRatingIsReferentialError) {
  const auto corpus = load_corpus(fixture("tiny_corpus.jsonl"));
  auto ratings = std::make_shared<HumanRatings>();
  ratings->add("d1", "gold:d1:u1", "gold:d1:u2", 3);
  const RatingDivergence source(ratings);
  const auto metric = make_metric(MetricKind::rouge_l);
  EXPECT_THROW(perseval_hj(corpus, "m", source, *metric), ReferentialError);
}

TEST(PersevalHj, TopRatedSummariesScoreTheFloor) {
  // Every summary pair rated at the top of the scale: no responsiveness at all.
  const auto corpus = load_corpus(fixture("tiny_corpus.jsonl"));
  auto ratings = std::make_shared<HumanRatings>();
  ratings->add("d1", "gold:d1:u1", "gold:d1:u2", 2);
  ratings->add("d1", "gen:m:d1:u1", "gen:m:d1:u2", 6);
  const RatingDivergence source(ratings);
  const auto metric = make_metric(MetricKind::rouge_l);
  const auto scores = perseval_hj(corpus, "m", source, *metric);
  // Only the self term survives: ((0+e)/(0+e) + e/(x+e)) / 2 -> one half.
  EXPECT_NEAR(scores.system.degress, 0.5, 1e-6);
  EXPECT_LE(scores.system.perseval, scores.system.degress);
}

TEST(RatingDifference, RatingsAndDivergences) {
  const auto pool = load_rated_pool(fixture("rated_pool.jsonl"));
  const RatingDifferenceDivergence source(pool, 6);
  EXPECT_EQ(source.rating_of("gen:p1:post1:a1"), 7);
  EXPECT_EQ(source.rating_of("gen:p2:post1:a2"), 7);
  EXPECT_EQ(source.rating_of("gold:post1:a1"), 7);
  EXPECT_THROW(source.rating_of("gold:post1:a3"), ReferentialError);
  const PreparedText a{"gen:p1:post1:a1", {}};
  const PreparedText b{"gen:p1:post1:a2", {}};
  EXPECT_DOUBLE_EQ(source.divergence("post1", a, b), 3.0 / 6.0);
  EXPECT_EQ(source.divergence("post1", a, a), 0.0);

  const auto build = build_surrogates(pool, 6);
  const auto metric = make_metric(MetricKind::rouge_l);
  const auto p1 = perseval_hj(build.corpus, "p1", source, *metric);
  ASSERT_EQ(p1.documents.size(), 1u);
  const auto& t = p1.documents[0];
  EXPECT_EQ(t.summaries.size(), 2u);
  EXPECT_GE(p1.system.perseval, 0.0);
  EXPECT_LE(p1.system.perseval, 1.0);
}
