#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "perseval/corpus.hpp"
#include "perseval/errors.hpp"
#include "support/fixtures.hpp"

using namespace perseval;
using testing_support::fixture;

namespace {

EvaluationCorpus parse(const std::string& text) {
  std::istringstream in(text);
  return read_corpus(in, "mem");
}

const char* kMinimal = R"({"kind":"doc","doc_id":"d1","text":"some article text"}
{"kind":"gold","doc_id":"d1","user_id":"u1","text":"article"}
{"kind":"gold","doc_id":"d1","user_id":"u2","text":"some text"}
{"kind":"gen","model_id":"m","doc_id":"d1","user_id":"u1","text":"article text"}
{"kind":"gen","model_id":"m","doc_id":"d1","user_id":"u2","text":"text"}
)";

}  // namespace

TEST(LoadCorpus, MinimalWellFormedInput) {
  const auto c = parse(kMinimal);
  EXPECT_EQ(c.documents().size(), 1u);
  EXPECT_EQ(c.user_count("d1"), 2u);
  EXPECT_EQ(c.models(), (std::vector<ModelId>{"m"}));
  EXPECT_EQ(c.summary("m", "d1", "u2")->text, "text");
  EXPECT_EQ(c.summary("m", "d1", "u3"), nullptr);
  EXPECT_EQ(c.scorable_documents(), (std::vector<DocId>{"d1"}));
  EXPECT_TRUE(c.flagged_documents().empty());
}

TEST(LoadCorpus, FixtureFileFlagsSingleUserDocuments) {
  const auto c = load_corpus(fixture("minimal_corpus.jsonl"));
  EXPECT_EQ(c.documents().size(), 3u);
  EXPECT_EQ(c.scorable_documents(), (std::vector<DocId>{"d1", "d2"}));
  EXPECT_EQ(c.flagged_documents(), (std::vector<DocId>{"d3"}));
  EXPECT_EQ(c.models(), (std::vector<ModelId>{"alpha", "beta"}));
}

TEST(LoadCorpus, GeneratedWithoutGoldNamesTheKey) {
  try {
    parse(std::string(kMinimal) +
          R"({"kind":"gen","model_id":"m","doc_id":"d1","user_id":"u9","text":"x"})" "\n");
    FAIL() << "expected ReferentialError";
  } catch (const ReferentialError& e) {
    EXPECT_NE(std::string(e.what()).find("u9"), std::string::npos) << e.what();
  }
}

TEST(LoadCorpus, GoldWithoutDocumentIsReferentialError) {
  EXPECT_THROW(parse(R"({"kind":"gold","doc_id":"dx","user_id":"u1","text":"x"})"),
               ReferentialError);
}

TEST(LoadCorpus, DocumentWithoutGoldIsRejected) {
  EXPECT_THROW(parse(R"({"kind":"doc","doc_id":"d1","text":"x"})"), DataError);
}

TEST(LoadCorpus, DuplicatesAreRejectedWithLineNumber) {
  try {
    parse(std::string(kMinimal) + R"({"kind":"gold","doc_id":"d1","user_id":"u1","text":"again"})");
    FAIL() << "expected DuplicateKeyError";
  } catch (const DuplicateKeyError& e) {
    EXPECT_NE(std::string(e.what()).find("mem:6"), std::string::npos) << e.what();
  }
}

TEST(LoadCorpus, MalformedLinesReportTheirLine) {
  try {
    parse("{\"kind\":\"doc\",\"doc_id\":\"d1\",\"text\":\"x\"}\n{broken\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse(R"({"kind":"mystery"})"), ParseError);
  EXPECT_THROW(parse(R"({"kind":"doc","doc_id":"d1"})"), ParseError);
  EXPECT_THROW(parse(R"({"kind":"doc","doc_id":"d1","text":""})"), DataError);
  EXPECT_THROW(parse("[1, 2]"), ParseError);
}

TEST(LoadCorpus, MissingFileIsDataError) {
  EXPECT_THROW(load_corpus("/nonexistent/corpus.jsonl"), DataError);
}

TEST(LoadCorpus, SerializeAndReloadIsIdentity) {
  const auto c = load_corpus(fixture("minimal_corpus.jsonl"));
  std::stringstream ss;
  write_corpus(ss, c);
  const auto back = read_corpus(ss);
  EXPECT_EQ(back, c);
}

TEST(LoadCorpus, UnicodeTextSurvivesRoundTrip) {
  CorpusBuilder b;
  b.add(Document{"d", "Größe \"quoted\" 東京"});
  b.add(GoldReference{"d", "u", "Größe"});
  const auto c = std::move(b).build();
  std::stringstream ss;
  write_corpus(ss, c);
  EXPECT_EQ(read_corpus(ss), c);
}

// ---------------------------------------------------------------------------

TEST(Surrogates, RepeatCountFormula) {
  EXPECT_EQ(surrogate_repeat_count(2, 7, 5), 4);
  EXPECT_EQ(surrogate_repeat_count(1, 7, 7), 1);
  for (int k = 1; k <= 4; ++k) {
    for (int r = 1; r < 7; ++r)
      EXPECT_GT(surrogate_repeat_count(k, 7, r), surrogate_repeat_count(k, 7, r + 1));
    EXPECT_EQ(surrogate_repeat_count(k, 7, 7), k);
  }
}

namespace {

int occurrences(const std::string& text, const std::string& piece) {
  int n = 0;
  for (auto pos = text.find(piece); pos != std::string::npos; pos = text.find(piece, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST(Surrogates, HandEnumeratedTwoByTwoPool) {
  // a1: p1=7, p2=5 -> k=1, p1 x(1+0)=1, p2 x(1+2)=3
  // a2: p1=4, p2=7 -> k=1, p1 x(1+3)=4, p2 x(1+0)=1
  const auto built = build_surrogates(load_rated_pool(fixture("rated_pool.jsonl")));
  const auto& c = built.corpus;
  EXPECT_TRUE(built.warnings.empty());
  EXPECT_EQ(c.models(), (std::vector<ModelId>{"p1", "p2"}));
  EXPECT_EQ(c.user_count("post1"), 2u);
  EXPECT_EQ(c.golds_for("post1").at("a1").text, "landlord will not fix heating");
  EXPECT_EQ(c.golds_for("post1").at("a2").text, "tenant asks what to do about broken heating");
  EXPECT_EQ(occurrences(c.summary("p1", "post1", "a1")->text, "landlord"), 1);
  EXPECT_EQ(occurrences(c.summary("p2", "post1", "a1")->text, "winter"), 3);
  EXPECT_EQ(occurrences(c.summary("p1", "post1", "a2")->text, "landlord"), 4);
  EXPECT_EQ(occurrences(c.summary("p2", "post1", "a2")->text, "tenant"), 1);
}

TEST(Surrogates, CombinedGoldAndWorkedRepeat) {
  RatedSummaryPool pool;
  pool.r_max = 7;
  pool.documents["d"] = "source";
  pool.records = {{"a", "d", "p1", "alpha", 7},
                  {"a", "d", "p2", "beta", 7},
                  {"a", "d", "p3", "gamma", 5}};
  const auto c = build_surrogates(pool).corpus;
  EXPECT_EQ(c.golds_for("d").at("a").text, "alpha beta");
  // k = 2, rating 5 -> 2 + (7 - 5) = 4 copies
  EXPECT_EQ(c.summary("p3", "d", "a")->text, "gamma gamma gamma gamma");
  EXPECT_EQ(c.summary("p1", "d", "a")->text, "alpha alpha");
}

TEST(Surrogates, ThresholdIsExclusiveAndEmptyPairsAreDropped) {
  RatedSummaryPool pool;
  pool.r_max = 7;
  pool.documents["d"] = "source";
  pool.records = {{"a", "d", "p1", "alpha", 7}, {"b", "d", "p1", "alpha", 6}};
  const auto built = build_surrogates(pool);
  EXPECT_EQ(built.warnings.size(), 1u);
  EXPECT_EQ(built.corpus.user_count("d"), 1u);
  EXPECT_THROW(build_surrogates(pool, 7), DataError);
  EXPECT_EQ(build_surrogates(pool, 5).corpus.user_count("d"), 2u);
}

TEST(RatedPool, ValidatesRatingsAndHeader) {
  std::istringstream no_meta(
      R"({"kind":"rated","annotator_id":"a","doc_id":"d","policy_id":"p","text":"t","rating":3})");
  EXPECT_THROW(read_rated_pool(no_meta), DataError);
  std::istringstream out_of_range(R"({"kind":"meta","r_max":7}
{"kind":"rated","annotator_id":"a","doc_id":"d","policy_id":"p","text":"t","rating":8})");
  EXPECT_THROW(read_rated_pool(out_of_range), DataError);
}

// ---------------------------------------------------------------------------

namespace {

EvaluationCorpus ten_docs() {
  CorpusBuilder b;
  for (int i = 0; i < 10; ++i) {
    const auto d = "d" + std::to_string(i);
    b.add(Document{d, "text " + d});
    b.add(GoldReference{d, "u1", "gold one"});
    b.add(GoldReference{d, "u2", "gold two"});
  }
  return std::move(b).build();
}

}  // namespace

TEST(Sampling, SizesFollowFractions) {
  const auto c = ten_docs();
  const auto one = sample_collections(c, {0.5}, 1, 3);
  ASSERT_EQ(one.samples.size(), 1u);
  EXPECT_EQ(one.samples[0].doc_ids.size(), 5u);

  const auto all = sample_collections(c);
  EXPECT_EQ(all.samples.size(), 40u);
  const std::vector<std::size_t> sizes = {8, 6, 4, 2};
  for (std::size_t i = 0; i < all.samples.size(); ++i) {
    EXPECT_EQ(all.samples[i].doc_ids.size(), sizes[i / 10]);
    EXPECT_EQ(all.samples[i].set_index, static_cast<int>(i % 10));
  }
}

TEST(Sampling, DeterministicGivenSeed) {
  const auto c = ten_docs();
  EXPECT_EQ(sample_collections(c, {0.8, 0.2}, 10, 42).samples,
            sample_collections(c, {0.8, 0.2}, 10, 42).samples);
  EXPECT_NE(sample_collections(c, {0.8, 0.2}, 10, 42).samples,
            sample_collections(c, {0.8, 0.2}, 10, 43).samples);
}

TEST(Sampling, DrawsWithReplacementFromScorableDocuments) {
  const auto c = load_corpus(fixture("minimal_corpus.jsonl"));
  bool repeated = false;
  for (const auto& s : sample_collections(c, {1.0}, 20, 5).samples) {
    std::set<DocId> seen;
    for (const auto& d : s.doc_ids) {
      EXPECT_NE(d, "d3");
      repeated |= !seen.insert(d).second;
    }
  }
  EXPECT_TRUE(repeated);
}

TEST(Sampling, RejectsBadArguments) {
  const auto c = ten_docs();
  EXPECT_THROW(sample_collections(c, {0.0}), DataError);
  EXPECT_THROW(sample_collections(c, {1.5}), DataError);
  EXPECT_THROW(sample_collections(c, {0.5}, 0), DataError);
}
