#include "perseval/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <set>

#include <json.hpp>

#include "perseval/errors.hpp"
#include "jsonl.hpp"

namespace perseval {

using nlohmann::json;

std::string doc_key(const DocId& doc) { return "doc:" + doc; }

std::string gold_key(const DocId& doc, const UserId& user) {
  return "gold:" + doc + ":" + user;
}

std::string gen_key(const ModelId& model, const DocId& doc, const UserId& user) {
  return "gen:" + model + ":" + doc + ":" + user;
}

// ---------------------------------------------------------------------------
// EvaluationCorpus

const Document& EvaluationCorpus::document(const DocId& doc) const {
  auto it = documents_.find(doc);
  if (it == documents_.end()) throw ReferentialError("unknown document '" + doc + "'");
  return it->second;
}

const EvaluationCorpus::GoldMap& EvaluationCorpus::golds_for(const DocId& doc) const {
  auto it = golds_.find(doc);
  if (it == golds_.end()) throw ReferentialError("no gold references for document '" + doc + "'");
  return it->second;
}

const GeneratedSummary* EvaluationCorpus::summary(const ModelId& model, const DocId& doc,
                                                  const UserId& user) const {
  auto m = generated_.find(model);
  if (m == generated_.end()) return nullptr;
  auto s = m->second.find({doc, user});
  return s == m->second.end() ? nullptr : &s->second;
}

std::vector<ModelId> EvaluationCorpus::models() const {
  std::vector<ModelId> out;
  out.reserve(generated_.size());
  for (const auto& [model, _] : generated_) out.push_back(model);
  return out;
}

std::size_t EvaluationCorpus::user_count(const DocId& doc) const {
  auto it = golds_.find(doc);
  return it == golds_.end() ? 0 : it->second.size();
}

std::vector<DocId> EvaluationCorpus::scorable_documents() const {
  std::vector<DocId> out;
  for (const auto& [doc, users] : golds_)
    if (users.size() >= 2) out.push_back(doc);
  return out;
}

std::vector<DocId> EvaluationCorpus::flagged_documents() const {
  std::vector<DocId> out;
  for (const auto& [doc, _] : documents_)
    if (user_count(doc) < 2) out.push_back(doc);
  return out;
}

// ---------------------------------------------------------------------------
// CorpusBuilder

CorpusBuilder& CorpusBuilder::add(Document doc) {
  if (doc.text.empty()) throw DataError("document '" + doc.doc_id + "' has empty text");
  auto key = doc.doc_id;
  if (!corpus_.documents_.emplace(key, std::move(doc)).second)
    throw DuplicateKeyError("duplicate document '" + key + "'");
  return *this;
}

CorpusBuilder& CorpusBuilder::add(GoldReference gold) {
  if (gold.text.empty())
    throw DataError("gold (" + gold.doc_id + ", " + gold.user_id + ") has empty text");
  auto doc = gold.doc_id;
  auto user = gold.user_id;
  if (!corpus_.golds_[doc].emplace(user, std::move(gold)).second)
    throw DuplicateKeyError("duplicate gold (" + doc + ", " + user + ")");
  return *this;
}

CorpusBuilder& CorpusBuilder::add(GeneratedSummary summary) {
  if (summary.text.empty())
    throw DataError("generated (" + summary.model_id + ", " + summary.doc_id + ", " +
                    summary.user_id + ") has empty text");
  std::pair<DocId, UserId> key{summary.doc_id, summary.user_id};
  auto model = summary.model_id;
  if (!corpus_.generated_[model].emplace(key, std::move(summary)).second)
    throw DuplicateKeyError("duplicate generated summary (" + model + ", " + key.first + ", " +
                            key.second + ")");
  return *this;
}

EvaluationCorpus CorpusBuilder::build() && {
  const auto& c = corpus_;
  for (const auto& [doc, users] : c.golds_) {
    if (!c.documents_.contains(doc))
      throw ReferentialError("gold references document '" + doc + "' which does not exist");
  }
  for (const auto& [doc, _] : c.documents_) {
    if (c.user_count(doc) == 0)
      throw DataError("document '" + doc + "' has no gold references");
  }
  for (const auto& [model, summaries] : c.generated_) {
    for (const auto& [key, _] : summaries) {
      auto g = c.golds_.find(key.first);
      if (g == c.golds_.end() || !g->second.contains(key.second))
        throw ReferentialError("generated summary (" + model + ", " + key.first + ", " +
                               key.second + ") has no matching gold reference");
    }
  }
  return std::move(corpus_);
}

// ---------------------------------------------------------------------------
// JSONL I/O

using detail::for_each_json_line;
using detail::required_int;
using detail::required_string;

EvaluationCorpus read_corpus(std::istream& in, const std::string& source_name) {
  CorpusBuilder builder;
  for_each_json_line(in, source_name, [&](const json& obj, std::size_t line) {
    const auto kind = required_string(obj, "kind", source_name, line);
    if (kind == "doc") {
      builder.add(Document{required_string(obj, "doc_id", source_name, line),
                           required_string(obj, "text", source_name, line)});
    } else if (kind == "gold") {
      builder.add(GoldReference{required_string(obj, "doc_id", source_name, line),
                                required_string(obj, "user_id", source_name, line),
                                required_string(obj, "text", source_name, line)});
    } else if (kind == "gen") {
      builder.add(GeneratedSummary{required_string(obj, "model_id", source_name, line),
                                   required_string(obj, "doc_id", source_name, line),
                                   required_string(obj, "user_id", source_name, line),
                                   required_string(obj, "text", source_name, line)});
    } else {
      throw ParseError(source_name, line, "unknown record kind '" + kind + "'");
    }
  });
  return std::move(builder).build();
}

EvaluationCorpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file '" + path.string() + "'");
  return read_corpus(in, path.string());
}

void write_corpus(std::ostream& out, const EvaluationCorpus& corpus) {
  for (const auto& [id, doc] : corpus.documents())
    out << json{{"kind", "doc"}, {"doc_id", id}, {"text", doc.text}}.dump() << '\n';
  for (const auto& [doc, users] : corpus.golds())
    for (const auto& [user, gold] : users)
      out << json{{"kind", "gold"}, {"doc_id", doc}, {"user_id", user}, {"text", gold.text}}
                 .dump()
          << '\n';
  for (const auto& [model, summaries] : corpus.generated())
    for (const auto& [key, s] : summaries)
      out << json{{"kind", "gen"},
                  {"model_id", model},
                  {"doc_id", key.first},
                  {"user_id", key.second},
                  {"text", s.text}}
                 .dump()
          << '\n';
}

RatedSummaryPool read_rated_pool(std::istream& in, const std::string& source_name) {
  RatedSummaryPool pool;
  bool have_meta = false;
  std::size_t meta_line = 0;
  for_each_json_line(in, source_name, [&](const json& obj, std::size_t line) {
    const auto kind = required_string(obj, "kind", source_name, line);
    if (kind == "meta") {
      if (have_meta) throw ParseError(source_name, line, "second meta header");
      pool.r_max = required_int(obj, "r_max", source_name, line);
      if (pool.r_max < 2) throw ParseError(source_name, line, "r_max must be at least 2");
      have_meta = true;
      meta_line = line;
    } else if (kind == "rated") {
      RatedRecord r{required_string(obj, "annotator_id", source_name, line),
                    required_string(obj, "doc_id", source_name, line),
                    required_string(obj, "policy_id", source_name, line),
                    required_string(obj, "text", source_name, line),
                    required_int(obj, "rating", source_name, line)};
      if (r.text.empty()) throw DataError("rated summary has empty text");
      pool.records.push_back(std::move(r));
    } else if (kind == "doc") {
      auto id = required_string(obj, "doc_id", source_name, line);
      auto text = required_string(obj, "text", source_name, line);
      if (text.empty()) throw DataError("document '" + id + "' has empty text");
      if (!pool.documents.emplace(id, std::move(text)).second)
        throw DuplicateKeyError("duplicate document '" + id + "'");
    } else {
      throw ParseError(source_name, line, "unknown record kind '" + kind + "'");
    }
  });
  if (!have_meta) throw ParseError(source_name, 1, "missing {\"kind\":\"meta\",\"r_max\":...} header");
  for (const auto& r : pool.records) {
    if (r.rating < 1 || r.rating > pool.r_max)
      throw DataError(source_name + ": rating " + std::to_string(r.rating) + " of (" +
                      r.annotator_id + ", " + r.doc_id + ", " + r.policy_id +
                      ") outside [1, " + std::to_string(pool.r_max) + "] declared on line " +
                      std::to_string(meta_line));
  }
  return pool;
}

RatedSummaryPool load_rated_pool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open rated pool file '" + path.string() + "'");
  return read_rated_pool(in, path.string());
}

// ---------------------------------------------------------------------------
// Surrogates

int surrogate_repeat_count(int k, int r_max, int rating) { return k + (r_max - rating); }

namespace {

std::string repeat_text(const std::string& text, int times) {
  std::string out;
  out.reserve((text.size() + 1) * static_cast<std::size_t>(times));
  for (int i = 0; i < times; ++i) {
    if (i) out += ' ';
    out += text;
  }
  return out;
}

}  // namespace

SurrogateBuild build_surrogates(const RatedSummaryPool& pool, int threshold) {
  if (pool.records.empty()) throw DataError("rated pool is empty");
  if (threshold >= pool.r_max)
    throw DataError("surrogate threshold " + std::to_string(threshold) +
                    " must be below r_max " + std::to_string(pool.r_max));

  // (annotator, doc) -> policy -> record
  std::map<std::pair<std::string, DocId>, std::map<std::string, const RatedRecord*>> groups;
  for (const auto& r : pool.records) {
    auto& by_policy = groups[{r.annotator_id, r.doc_id}];
    if (!by_policy.emplace(r.policy_id, &r).second)
      throw DuplicateKeyError("annotator '" + r.annotator_id + "' rated policy '" + r.policy_id +
                              "' twice on document '" + r.doc_id + "'");
  }

  SurrogateBuild result;
  CorpusBuilder builder;
  std::set<DocId> used_docs;
  for (const auto& [key, by_policy] : groups) {
    const auto& [annotator, doc] = key;
    std::string gold;
    int k = 0;
    for (const auto& [policy, rec] : by_policy) {
      if (rec->rating > threshold) {
        if (k++) gold += ' ';
        gold += rec->text;
      }
    }
    if (k == 0) {
      result.warnings.push_back("annotator '" + annotator + "' rated nothing above " +
                                std::to_string(threshold) + " on document '" + doc +
                                "'; pair dropped");
      continue;
    }
    used_docs.insert(doc);
    builder.add(GoldReference{doc, annotator, std::move(gold)});
    for (const auto& [policy, rec] : by_policy) {
      builder.add(GeneratedSummary{
          policy, doc, annotator,
          repeat_text(rec->text, surrogate_repeat_count(k, pool.r_max, rec->rating))});
    }
  }
  if (used_docs.empty())
    throw DataError("no annotator rated any summary above " + std::to_string(threshold));
  for (const auto& doc : used_docs) {
    auto it = pool.documents.find(doc);
    if (it == pool.documents.end())
      throw ReferentialError("rated pool has no text for document '" + doc + "'");
    builder.add(Document{doc, it->second});
  }
  result.corpus = std::move(builder).build();
  return result;
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

// Unbiased draw in [0, n); independent of the standard library's distribution
// implementation so samples are reproducible across toolchains.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x < threshold);
  return x % n;
}

}  // namespace

SampleCollections sample_collections(const EvaluationCorpus& corpus, std::vector<double> fractions,
                                     int sets_per_fraction, std::uint64_t seed) {
  const auto pool = corpus.scorable_documents();
  if (pool.empty()) throw DataError("corpus has no scorable documents to sample from");
  if (sets_per_fraction < 1) throw DataError("sets_per_fraction must be positive");

  SampleCollections out;
  out.fractions = std::move(fractions);
  out.sets_per_fraction = sets_per_fraction;
  out.seed = seed;

  std::mt19937_64 rng(seed);
  for (double f : out.fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw DataError("sampling fraction must lie in (0, 1]");
    const auto size = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(f * static_cast<double>(pool.size()))));
    for (int set = 0; set < sets_per_fraction; ++set) {
      CorpusSample sample{f, set, {}};
      sample.doc_ids.reserve(size);
      for (std::size_t i = 0; i < size; ++i)
        sample.doc_ids.push_back(pool[bounded_draw(rng, pool.size())]);
      out.samples.push_back(std::move(sample));
    }
  }
  return out;
}

}  // namespace perseval
