#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace perseval {

using DocId = std::string;
using UserId = std::string;
using ModelId = std::string;

struct Document {
  DocId doc_id;
  std::string text;

  friend bool operator==(const Document&, const Document&) = default;
};

/// A reader's expected summary of a document.
struct GoldReference {
  DocId doc_id;
  UserId user_id;
  std::string text;

  friend bool operator==(const GoldReference&, const GoldReference&) = default;
};

struct GeneratedSummary {
  ModelId model_id;
  DocId doc_id;
  UserId user_id;
  std::string text;

  friend bool operator==(const GeneratedSummary&, const GeneratedSummary&) = default;
};

// Keys naming individual texts. Distance-matrix, distribution, and rating files
// refer to texts through these.
std::string doc_key(const DocId& doc);
std::string gold_key(const DocId& doc, const UserId& user);
std::string gen_key(const ModelId& model, const DocId& doc, const UserId& user);

/// Immutable evaluation corpus. All maps are ordered so every traversal is
/// deterministic. Build one with CorpusBuilder or load_corpus().
class EvaluationCorpus {
 public:
  using GoldMap = std::map<UserId, GoldReference>;
  using SummaryMap = std::map<std::pair<DocId, UserId>, GeneratedSummary>;

  const std::map<DocId, Document>& documents() const noexcept { return documents_; }
  const std::map<DocId, GoldMap>& golds() const noexcept { return golds_; }
  const std::map<ModelId, SummaryMap>& generated() const noexcept { return generated_; }

  const Document& document(const DocId& doc) const;
  const GoldMap& golds_for(const DocId& doc) const;
  /// nullptr when the model produced no summary for (doc, user).
  const GeneratedSummary* summary(const ModelId& model, const DocId& doc,
                                  const UserId& user) const;

  std::vector<ModelId> models() const;
  std::size_t user_count(const DocId& doc) const;

  /// Documents with at least two gold users, in id order.
  std::vector<DocId> scorable_documents() const;
  /// Documents with fewer than two gold users; they cannot contribute to DEGRESS.
  std::vector<DocId> flagged_documents() const;

  friend bool operator==(const EvaluationCorpus&, const EvaluationCorpus&) = default;

 private:
  friend class CorpusBuilder;

  std::map<DocId, Document> documents_;
  std::map<DocId, GoldMap> golds_;
  std::map<ModelId, SummaryMap> generated_;
};

/// Collects records and validates every corpus invariant in build().
class CorpusBuilder {
 public:
  CorpusBuilder& add(Document doc);
  CorpusBuilder& add(GoldReference gold);
  CorpusBuilder& add(GeneratedSummary summary);

  /// Throws ReferentialError or DataError when an invariant does not hold.
  EvaluationCorpus build() &&;

 private:
  EvaluationCorpus corpus_;
};

EvaluationCorpus read_corpus(std::istream& in, const std::string& source_name = "<stream>");
EvaluationCorpus load_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, const EvaluationCorpus& corpus);

// ---------------------------------------------------------------------------
// Rating-only datasets and surrogate construction

struct RatedRecord {
  std::string annotator_id;
  DocId doc_id;
  std::string policy_id;
  std::string text;
  int rating = 0;
};

struct RatedSummaryPool {
  int r_max = 7;
  std::vector<RatedRecord> records;
  /// Source texts of the rated documents, keyed by doc id.
  std::map<DocId, std::string> documents;
};

RatedSummaryPool read_rated_pool(std::istream& in, const std::string& source_name = "<stream>");
RatedSummaryPool load_rated_pool(const std::filesystem::path& path);

struct SurrogateBuild {
  EvaluationCorpus corpus;
  std::vector<std::string> warnings;
};

/// Number of times a policy summary with `rating` is repeated when the annotator
/// rated `k` summaries above the threshold: k + (r_max - rating).
int surrogate_repeat_count(int k, int r_max, int rating);

/// Builds a corpus from a rated pool. For every (annotator, doc) the gold is the
/// concatenation of the k summaries rated strictly above `threshold`, and each
/// rated policy summary becomes a surrogate repeated k + (r_max - rating) times.
/// Pairs with k = 0 are dropped and reported in `warnings`.
SurrogateBuild build_surrogates(const RatedSummaryPool& pool, int threshold = 6);

// ---------------------------------------------------------------------------
// Stability sampling

/// One sub-corpus: a multiset of scorable documents drawn with replacement.
struct CorpusSample {
  double fraction = 0.0;
  int set_index = 0;
  std::vector<DocId> doc_ids;

  friend bool operator==(const CorpusSample&, const CorpusSample&) = default;
};

struct SampleCollections {
  std::vector<double> fractions{0.8, 0.6, 0.4, 0.2};
  int sets_per_fraction = 10;
  std::uint64_t seed = 0;
  /// Ordered by fraction (as given), then set index.
  std::vector<CorpusSample> samples;
};

SampleCollections sample_collections(const EvaluationCorpus& corpus,
                                     std::vector<double> fractions = {0.8, 0.6, 0.4, 0.2},
                                     int sets_per_fraction = 10, std::uint64_t seed = 0);

}  // namespace perseval
