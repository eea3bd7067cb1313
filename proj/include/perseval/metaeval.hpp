#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "perseval/corpus.hpp"
#include "perseval/engine.hpp"

namespace perseval::metaeval {

// ---------------------------------------------------------------------------
// Correlation

/// Product-moment correlation. Throws NumericError on length mismatch, n < 2,
/// or zero variance in either argument.
double pearson(std::span<const double> x, std::span<const double> y);

/// 1-based ranks, ties receive the average of the positions they span.
std::vector<double> average_ranks(std::span<const double> values);

/// 1 - 6 sum d^2 / (n (n^2 - 1)) on tie-free data; Pearson on average ranks
/// when ties are present.
double spearman(std::span<const double> x, std::span<const double> y);

/// Tau-a: (concordant - discordant) / (n (n - 1) / 2). Tied pairs count as
/// neither.
double kendall(std::span<const double> x, std::span<const double> y);

struct CorrelationResult {
  double pearson = 0.0;
  double spearman = 0.0;
  double kendall = 0.0;
  /// Two-sided permutation p-values. Exact enumeration for n <= 10, otherwise
  /// Monte Carlo over `kMonteCarloPermutations` seeded shuffles.
  double spearman_p = 1.0;
  double kendall_p = 1.0;
  bool exact_p = true;
};

inline constexpr int kExactPermutationLimit = 10;
inline constexpr int kMonteCarloPermutations = 20000;

CorrelationResult correlate(std::span<const double> x, std::span<const double> y,
                            std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Rankings

enum class Direction { higher_is_better, lower_is_better };

struct RankEntry {
  ModelId model_id;
  int rank = 0;        // 1-based position
  double score = 0.0;  // the value the ranking was built from
  bool tied = false;   // score equals a neighbour's; order among ties is by model id

  friend bool operator==(const RankEntry&, const RankEntry&) = default;
};

struct Ranking {
  std::vector<RankEntry> entries;  // in rank order

  std::vector<ModelId> order() const;
  /// Throws DataError when the model is absent.
  int rank_of(const ModelId& model) const;

  friend bool operator==(const Ranking&, const Ranking&) = default;
};

/// Sorts by score in the given direction; equal scores are annotated as tied
/// and ordered by model id.
Ranking rank_by_score(const std::map<ModelId, double>& scores, Direction direction);

/// Borda-Kendall consensus: sums each model's rank across the rankings and
/// sorts ascending by the sum. Entry scores hold the rank sums. Throws
/// DataError when the rankings cover different model sets.
Ranking borda_kendall(std::span<const Ranking> rankings);

enum class Measure { perseval, degress, egises, adp, acp, edp, accuracy, p_acc };

std::string_view to_string(Measure m);
Measure parse_measure(std::string_view name);
double measure_value(const SystemScore& s, Measure m);
/// PerSEval, DEGRESS, accuracy, and P-Acc rank higher-first; EGISES and the
/// penalties rank lower-first.
Direction direction_of(Measure m);

/// Ranks every model scored under `metric` by `measure`.
Ranking leaderboard(const ScoreTable& table, MetricKind metric, Measure measure = Measure::perseval);

// ---------------------------------------------------------------------------
// Stability

/// Population standard deviation and variance.
struct BiasVariance {
  double bias = 0.0;
  double variance = 0.0;
};
BiasVariance bias_variance(std::span<const double> values);

struct ModelStability {
  ModelId model_id;
  double full_score = 0.0;
  std::vector<double> fraction_means;  // parallel to StabilityReport::fractions
  double bias = 0.0;                   // std of {full_score} + fraction_means
  double variance = 0.0;
};

struct SampleAgreement {
  double fraction = 0.0;
  int set_index = 0;
  double spearman = 0.0;  // vs. the full-corpus ranking
  double kendall = 0.0;
  Ranking ranking;
};

struct StabilityReport {
  std::vector<double> fractions;
  Ranking full_ranking;
  std::vector<ModelStability> models;  // in full-ranking order
  std::vector<SampleAgreement> samples;
  double epsilon_spearman = 1.0;  // minimum over samples
  double epsilon_kendall = 1.0;
  double delta_stability = 0.0;   // max over models of max(bias, variance)
};

struct SampleScores {
  double fraction = 0.0;
  int set_index = 0;
  std::map<ModelId, double> scores;
};

/// Builds a report from already-computed scores. Throws DataError when a sample
/// lacks a model, NumericError when fewer than two models are ranked.
StabilityReport stability_from_scores(const std::map<ModelId, double>& full,
                                      std::span<const SampleScores> samples,
                                      std::span<const double> fractions,
                                      Direction direction = Direction::higher_is_better);

/// Maps a multiset of document ids to one score per model. Must be safe to
/// call concurrently.
using SystemScorer = std::function<std::map<ModelId, double>(std::span<const DocId>)>;

/// Scores the full scorable corpus and every sample, then builds the report.
/// Samples are scored in parallel across `jobs` threads (0 = OpenMP default).
StabilityReport stability_report(const EvaluationCorpus& corpus,
                                 const SampleCollections& collections, const SystemScorer& scorer,
                                 Direction direction = Direction::higher_is_better, int jobs = 0);

}  // namespace perseval::metaeval
