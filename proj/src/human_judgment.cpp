#include "perseval/human_judgment.hpp"

#include <cmath>
#include <fstream>

#include "jsonl.hpp"
#include "perseval/errors.hpp"

namespace perseval::hj {

HumanRatings::HumanRatings(int scale_min, int scale_max)
    : scale_min_(scale_min), scale_max_(scale_max) {
  if (scale_max <= scale_min) throw DataError("rating scale must have scale_max > scale_min");
}

void HumanRatings::add(const DocId& doc, const std::string& left, const std::string& right,
                       int rating, const std::string& annotator) {
  if (rating < scale_min_ || rating > scale_max_)
    throw DataError("rating " + std::to_string(rating) + " outside [" +
                    std::to_string(scale_min_) + ", " + std::to_string(scale_max_) + "]" +
                    (annotator.empty() ? "" : " from annotator '" + annotator + "'"));
  if (left == right) throw DataError("rating pairs '" + left + "' with itself");
  auto key = left < right ? PairKey{left, right} : PairKey{right, left};
  auto& s = sums_[{doc, std::move(key)}];
  s.total += rating;
  ++s.count;
}

double HumanRatings::mean_rating(const DocId& doc, const std::string& left,
                                 const std::string& right) const {
  auto key = left < right ? PairKey{left, right} : PairKey{right, left};
  auto it = sums_.find({doc, key});
  if (it == sums_.end())
    throw ReferentialError("no rating for (" + left + ", " + right + ") on document '" + doc + "'");
  return it->second.total / it->second.count;
}

double HumanRatings::divergence(const DocId& doc, const std::string& left,
                                const std::string& right) const {
  if (left == right) return 0.0;
  const double r = mean_rating(doc, left, right);
  return 1.0 - (r - scale_min_) / static_cast<double>(scale_max_ - scale_min_);
}

HumanRatings read_ratings(std::istream& in, const std::string& source_name, int scale_min,
                          int scale_max) {
  HumanRatings ratings(scale_min, scale_max);
  detail::for_each_json_line(in, source_name, [&](const detail::json& obj, std::size_t line) {
    std::string annotator;
    if (auto it = obj.find("annotator"); it != obj.end()) {
      if (it->is_string()) annotator = it->get<std::string>();
      else if (it->is_number_integer()) annotator = std::to_string(it->get<long long>());
      else throw ParseError(source_name, line, "field 'annotator' must be a string or integer");
    }
    ratings.add(detail::required_string(obj, "doc_id", source_name, line),
                detail::required_string(obj, "left_id", source_name, line),
                detail::required_string(obj, "right_id", source_name, line),
                detail::required_int(obj, "rating", source_name, line), annotator);
  });
  return ratings;
}

HumanRatings load_ratings(const std::filesystem::path& path, int scale_min, int scale_max) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ratings file " + path.string());
  return read_ratings(in, path.string(), scale_min, scale_max);
}

// ---------------------------------------------------------------------------

RatingDivergence::RatingDivergence(std::shared_ptr<const HumanRatings> ratings)
    : ratings_(std::move(ratings)) {}

double RatingDivergence::divergence(const DocId& doc, const PreparedText& left,
                                    const PreparedText& right) const {
  return ratings_->divergence(doc, left.key, right.key);
}

MetricDivergence::MetricDivergence(std::shared_ptr<const DistanceMetric> metric)
    : metric_(std::move(metric)) {}

double MetricDivergence::divergence(const DocId&, const PreparedText& left,
                                    const PreparedText& right) const {
  return metric_->distance(left, right);
}

RatingDifferenceDivergence::RatingDifferenceDivergence(const RatedSummaryPool& pool,
                                                       int threshold)
    : r_max_(pool.r_max) {
  if (r_max_ < 2) throw DataError("r_max must be at least 2");
  std::map<std::pair<std::string, DocId>, std::vector<const RatedRecord*>> groups;
  for (const auto& rec : pool.records) groups[{rec.annotator_id, rec.doc_id}].push_back(&rec);
  for (const auto& [key, records] : groups) {
    const auto& [annotator, doc] = key;
    double high = 0.0;
    int k = 0;
    for (const auto* rec : records) {
      ratings_[gen_key(rec->policy_id, doc, annotator)] = rec->rating;
      if (rec->rating > threshold) {
        high += rec->rating;
        ++k;
      }
    }
    if (k > 0) ratings_[gold_key(doc, annotator)] = high / k;
  }
}

double RatingDifferenceDivergence::rating_of(const std::string& key) const {
  auto it = ratings_.find(key);
  if (it == ratings_.end()) throw ReferentialError("no rating for text '" + key + "'");
  return it->second;
}

double RatingDifferenceDivergence::divergence(const DocId&, const PreparedText& left,
                                              const PreparedText& right) const {
  if (left.key == right.key) return 0.0;
  return std::abs(rating_of(left.key) - rating_of(right.key)) / (r_max_ - 1);
}

// ---------------------------------------------------------------------------

ModelScores perseval_hj(const EvaluationCorpus& corpus, const ModelId& model,
                        const PairDivergenceSource& source, const DistanceMetric& accuracy_metric,
                        const PenaltyConfig& config, const PAccConfig& pacc,
                        bool include_self_term) {
  std::vector<DivergenceTensors> tensors;
  for (const auto& doc : corpus.scorable_documents()) {
    auto t = document_divergences(corpus, model, doc, accuracy_metric);
    const auto& golds = corpus.golds_for(doc);
    std::vector<PreparedText> gold_texts;
    std::vector<PreparedText> gen_texts;
    for (const auto& user : t.users) {
      gold_texts.push_back({gold_key(doc, user), text::tokenize(golds.at(user).text)});
      gen_texts.push_back(
          {gen_key(model, doc, user), text::tokenize(corpus.summary(model, doc, user)->text)});
    }
    for (std::size_t j = 0; j < t.size(); ++j) {
      for (std::size_t k = 0; k < t.size(); ++k) {
        if (j == k) continue;
        t.uu[j][k] = source.divergence(doc, gold_texts[j], gold_texts[k]);
        t.ss[j][k] = source.divergence(doc, gen_texts[j], gen_texts[k]);
      }
    }
    t.validate();
    tensors.push_back(std::move(t));
  }
  return score_tensors(model, accuracy_metric.kind(), tensors, corpus.flagged_documents(), config,
                       pacc, include_self_term);
}

}  // namespace perseval::hj
