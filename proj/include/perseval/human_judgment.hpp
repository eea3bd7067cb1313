#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <utility>

#include "perseval/corpus.hpp"
#include "perseval/distance_metric.hpp"
#include "perseval/engine.hpp"

namespace perseval::hj {

/// Pairwise similarity ratings, averaged over annotators and over both orders
/// of each pair. Text ids are corpus keys (gold_key / gen_key).
class HumanRatings {
 public:
  HumanRatings(int scale_min = 1, int scale_max = 6);

  /// Throws DataError for a rating outside the scale or a self-pair.
  void add(const DocId& doc, const std::string& left, const std::string& right, int rating,
           const std::string& annotator = {});

  int scale_min() const noexcept { return scale_min_; }
  int scale_max() const noexcept { return scale_max_; }

  /// Mean rating of the unordered pair; throws ReferentialError when unrated.
  double mean_rating(const DocId& doc, const std::string& left, const std::string& right) const;
  /// 1 - (rating - scale_min) / (scale_max - scale_min): the top of the scale
  /// maps to 0, the bottom to 1.
  double divergence(const DocId& doc, const std::string& left, const std::string& right) const;

  std::size_t pair_count() const noexcept { return sums_.size(); }

 private:
  using PairKey = std::pair<std::string, std::string>;
  struct Sum {
    double total = 0.0;
    int count = 0;
  };

  int scale_min_;
  int scale_max_;
  std::map<std::pair<DocId, PairKey>, Sum> sums_;
};

/// Records: {"doc_id", "left_id", "right_id", "rating", "annotator"}.
HumanRatings read_ratings(std::istream& in, const std::string& source_name = "<stream>",
                          int scale_min = 1, int scale_max = 6);
HumanRatings load_ratings(const std::filesystem::path& path, int scale_min = 1, int scale_max = 6);

/// Supplies the text-to-text divergences (uu and ss) of the HJ pipeline.
class PairDivergenceSource {
 public:
  virtual ~PairDivergenceSource() = default;
  virtual double divergence(const DocId& doc, const PreparedText& left,
                            const PreparedText& right) const = 0;
};

/// Divergences from normalized human similarity ratings.
class RatingDivergence : public PairDivergenceSource {
 public:
  explicit RatingDivergence(std::shared_ptr<const HumanRatings> ratings);
  double divergence(const DocId& doc, const PreparedText& left,
                    const PreparedText& right) const override;

 private:
  std::shared_ptr<const HumanRatings> ratings_;
};

/// Divergences from a distance metric; reproduces the standard pipeline.
class MetricDivergence : public PairDivergenceSource {
 public:
  explicit MetricDivergence(std::shared_ptr<const DistanceMetric> metric);
  double divergence(const DocId& doc, const PreparedText& left,
                    const PreparedText& right) const override;

 private:
  std::shared_ptr<const DistanceMetric> metric_;
};

/// Indirect variant for rating-only datasets: each surrogate text carries the
/// rating its annotator gave (a combined gold carries the mean rating of its
/// parts) and two texts diverge by |r_a - r_b| / (r_max - 1).
class RatingDifferenceDivergence : public PairDivergenceSource {
 public:
  RatingDifferenceDivergence(const RatedSummaryPool& pool, int threshold = 6);
  double divergence(const DocId& doc, const PreparedText& left,
                    const PreparedText& right) const override;

  /// Throws ReferentialError for a key without a rating.
  double rating_of(const std::string& key) const;

 private:
  int r_max_;
  std::map<std::string, double> ratings_;
};

/// Builds each document's tensors with uu and ss from `source` and ud, sd, su
/// from `accuracy_metric`, then scores them with the standard engine.
ModelScores perseval_hj(const EvaluationCorpus& corpus, const ModelId& model,
                        const PairDivergenceSource& source, const DistanceMetric& accuracy_metric,
                        const PenaltyConfig& config = {}, const PAccConfig& pacc = {},
                        bool include_self_term = true);

}  // namespace perseval::hj
