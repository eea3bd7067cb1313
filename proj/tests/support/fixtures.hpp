#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "oracle/oracle.hpp"
#include "perseval/corpus.hpp"

namespace testing_support {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(PERSEVAL_FIXTURE_DIR) / name;
}

// Small vocabulary so random texts share words often enough to exercise
// partial overlaps.
inline std::string random_text(std::mt19937_64& rng, int min_words, int max_words) {
  static const std::vector<std::string> vocab = {
      "city",  "council", "budget", "park",   "water", "ice",   "moon",  "team",  "match",
      "storm", "school",  "road",   "tax",    "vote",  "fuel",  "ship",  "crew",  "trade",
      "bank",  "rate",    "price",  "market", "law",   "court", "game",  "final", "goal"};
  std::uniform_int_distribution<int> len(min_words, max_words);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::string out;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += vocab[pick(rng)];
  }
  return out;
}

struct RandomCase {
  perseval::EvaluationCorpus corpus;
  std::vector<oracle::Doc> docs;  // scorable documents in id order
};

// docs in [1, max_docs], users in [2, max_users], one model "m".
inline RandomCase random_case(std::mt19937_64& rng, int max_docs = 3, int max_users = 4,
                              int min_words = 5, int max_words = 20) {
  std::uniform_int_distribution<int> ndocs(1, max_docs);
  std::uniform_int_distribution<int> nusers(2, max_users);
  perseval::CorpusBuilder b;
  RandomCase rc;
  const int d = ndocs(rng);
  for (int i = 0; i < d; ++i) {
    const std::string doc = "d" + std::to_string(i);
    oracle::Doc od;
    od.text = random_text(rng, min_words * 2, max_words * 2);
    b.add(perseval::Document{doc, od.text});
    const int u = nusers(rng);
    for (int j = 0; j < u; ++j) {
      const std::string user = "u" + std::to_string(j);
      od.golds.push_back(random_text(rng, min_words, max_words));
      od.gens.push_back(random_text(rng, min_words, max_words));
      b.add(perseval::GoldReference{doc, user, od.golds.back()});
      b.add(perseval::GeneratedSummary{"m", doc, user, od.gens.back()});
    }
    rc.docs.push_back(std::move(od));
  }
  rc.corpus = std::move(b).build();
  return rc;
}

// Every generated summary equals its gold.
inline perseval::EvaluationCorpus oracle_corpus() {
  perseval::CorpusBuilder b;
  const std::vector<std::string> docs = {
      "the city council approved a new budget for parks and public transport",
      "scientists found water ice near the lunar south pole"};
  const std::vector<std::vector<std::string>> golds = {
      {"council approves budget for parks", "budget funds public transport",
       "new budget approved by the city"},
      {"water ice found at lunar pole", "scientists find ice on the moon"}};
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const std::string doc = "d" + std::to_string(i + 1);
    b.add(perseval::Document{doc, docs[i]});
    for (std::size_t j = 0; j < golds[i].size(); ++j) {
      const std::string user = "u" + std::to_string(j + 1);
      b.add(perseval::GoldReference{doc, user, golds[i][j]});
      b.add(perseval::GeneratedSummary{"oracle", doc, user, golds[i][j]});
    }
  }
  return std::move(b).build();
}

// Two models on one document with two readers whose golds share no words with
// each other or the document.
//   A: every summary disjoint from everything -> perfectly responsive, but
//      maximally inaccurate.
//   B: hands reader 1's gold to both readers -> unresponsive, half accurate.
inline perseval::EvaluationCorpus paradox_corpus() {
  perseval::CorpusBuilder b;
  b.add(perseval::Document{"d1", "markets rallied after the central bank held interest rates"});
  b.add(perseval::GoldReference{"d1", "u1", "stocks climb"});
  b.add(perseval::GoldReference{"d1", "u2", "mortgage costs unchanged"});
  b.add(perseval::GeneratedSummary{"A", "d1", "u1", "weather sunny tomorrow"});
  b.add(perseval::GeneratedSummary{"A", "d1", "u2", "football season opens"});
  b.add(perseval::GeneratedSummary{"B", "d1", "u1", "stocks climb"});
  b.add(perseval::GeneratedSummary{"B", "d1", "u2", "stocks climb"});
  return std::move(b).build();
}

}  // namespace testing_support
