#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "perseval/corpus.hpp"
#include "perseval/distance_metric.hpp"

namespace perseval {

/// Hyperparameters of the accuracy penalties. Exponents are base-10:
/// the EDP shift is 10^alpha, its slope 10^beta, the ADP/ACP shift 10^gamma.
struct PenaltyConfig {
  double alpha = 3.0;
  double beta = 1.7;
  double gamma = 4.0;
  double epsilon = 1e-8;

  /// Throws DataError unless alpha >= 3, beta >= 1, gamma >= 4, epsilon > 0.
  void validate() const;
};

/// Weights of the P-Acc baseline: acc - alpha * logistic(beta * egises).
struct PAccConfig {
  double alpha = 0.5;
  double beta = 1.0;

  /// Throws DataError unless alpha in [0, 1] and beta in (0, 1].
  void validate() const;
};

struct EngineOptions {
  /// Keep the k = j term in the per-summary DEGRESS average. It always
  /// contributes 1, so every summary has a floor of 1/|U_d|.
  bool include_self_term = true;
  /// Worker threads for per-document scoring; 0 uses the OpenMP default.
  int jobs = 0;
};

/// Every distance one document's scoring consumes. Index j runs over the
/// document's gold users in id order.
///   uu[j][k] = sigma(u_j, u_k)      ss[j][k] = sigma(s_j, s_k)
///   ud[j]    = sigma(u_j, d)        sd[j]    = sigma(s_j, d)
///   su[j]    = sigma(s_j, u_j)
struct DivergenceTensors {
  DocId doc_id;
  std::vector<UserId> users;
  std::vector<std::vector<double>> uu;
  std::vector<std::vector<double>> ss;
  std::vector<double> ud;
  std::vector<double> sd;
  std::vector<double> su;

  std::size_t size() const noexcept { return users.size(); }
  /// Throws NumericError on shape mismatch, nonzero diagonals, or entries outside [0, 1].
  void validate() const;
};

/// Computes the tensors of one document for one model. Throws ReferentialError
/// naming (model, doc, user) when a generated summary is missing.
DivergenceTensors document_divergences(const EvaluationCorpus& corpus, const ModelId& model,
                                       const DocId& doc, const DistanceMetric& metric);

struct DivergenceSet {
  std::vector<DivergenceTensors> documents;  // scorable documents, id order
  std::vector<DocId> skipped;                // fewer than two gold users
};

DivergenceSet pairwise_divergences(const EvaluationCorpus& corpus, const ModelId& model,
                                   const DistanceMetric& metric);

// ---------------------------------------------------------------------------
// Scalar kernels

/// Responsiveness of summary j: mean over k of (min(X, Y) + eps) / (max(X, Y) + eps),
/// where X and Y are softmax-weighted divergences of the golds and of the
/// generated summaries, each weight normalised by the text's distance to the
/// document. Lies in (0, 1].
double degress_summary(const DivergenceTensors& t, std::size_t j, double epsilon,
                       bool include_self_term = true);

/// 1 / (1 + 10^gamma * exp(-10 * best / ((1 - best) + eps)))
double accuracy_drop_penalty(double best, const PenaltyConfig& config);

/// 1 / (1 + 10^gamma * exp(-10 * (value - best) / ((mean - best) + eps)))
double accuracy_inconsistency_penalty(double value, double best, double mean,
                                      const PenaltyConfig& config);

/// 1 - 1 / (1 + 10^alpha * exp(-10^beta * dgp))
double effective_degress_penalty(double dgp, const PenaltyConfig& config);

/// Document-level ADP from the best (smallest) su.
double adp(const DivergenceTensors& t, const PenaltyConfig& config);
/// Summary-level ACP of summary j.
double acp(const DivergenceTensors& t, std::size_t j, const PenaltyConfig& config);
double edp(double dgp, const PenaltyConfig& config);

double perseval_summary(const DivergenceTensors& t, std::size_t j, const PenaltyConfig& config,
                        bool include_self_term = true);

/// acc - alpha * logistic(beta * egises). Negative values are possible.
double p_accuracy(double accuracy, double egises, const PAccConfig& config);

// ---------------------------------------------------------------------------
// Document and system scores

struct SummaryScore {
  UserId user_id;
  double degress = 0.0;
  double acp = 0.0;
  double dgp = 0.0;
  double edp = 0.0;
  double perseval = 0.0;
  double accuracy_distance = 0.0;  // su[j]
};

struct DocumentScore {
  DocId doc_id;
  double adp = 0.0;
  std::vector<SummaryScore> summaries;
  // Means over the document's users.
  double degress = 0.0;
  double acp = 0.0;
  double edp = 0.0;
  double perseval = 0.0;
  double accuracy = 0.0;  // mean of 1 - su
};

DocumentScore score_document(const DivergenceTensors& t, const PenaltyConfig& config,
                             bool include_self_term = true);

struct SystemScore {
  double degress = 0.0;
  double egises = 0.0;
  double adp = 0.0;
  double acp = 0.0;
  double edp = 0.0;
  double perseval = 0.0;
  double accuracy = 0.0;
  double p_acc = 0.0;
};

/// Scores of one model under one metric.
struct ModelScores {
  ModelId model_id;
  MetricKind metric = MetricKind::rouge_l;
  std::vector<DocumentScore> documents;  // scorable documents, id order
  std::vector<DocId> skipped;
  SystemScore system;

  /// Throws DataError if the document was not scored.
  const DocumentScore& document(const DocId& doc) const;
};

/// Averages document scores; documents may repeat.
SystemScore aggregate(std::span<const DocumentScore* const> documents, const PAccConfig& pacc);

/// System score over a multiset of document ids (e.g. a stability sample).
SystemScore aggregate_over(const ModelScores& scores, std::span<const DocId> doc_ids,
                           const PAccConfig& pacc);

/// Per-document scoring runs in parallel across `options.jobs` OpenMP threads;
/// results are identical for any thread count.
ModelScores score_model(const EvaluationCorpus& corpus, const ModelId& model,
                        const DistanceMetric& metric, const PenaltyConfig& config,
                        const PAccConfig& pacc = {}, const EngineOptions& options = {});

/// Single-threaded reference path; must agree bit-for-bit with score_model.
ModelScores score_model_serial(const EvaluationCorpus& corpus, const ModelId& model,
                               const DistanceMetric& metric, const PenaltyConfig& config,
                               const PAccConfig& pacc = {}, const EngineOptions& options = {});

/// Scores from precomputed tensors (used by the human-judgment pipeline).
ModelScores score_tensors(const ModelId& model, MetricKind metric,
                          std::span<const DivergenceTensors> tensors, std::vector<DocId> skipped,
                          const PenaltyConfig& config, const PAccConfig& pacc,
                          bool include_self_term = true);

double degress_system(const EvaluationCorpus& corpus, const ModelId& model,
                      const DistanceMetric& metric, const PenaltyConfig& config = {});
double egises_system(const EvaluationCorpus& corpus, const ModelId& model,
                     const DistanceMetric& metric, const PenaltyConfig& config = {});
double perseval_system(const EvaluationCorpus& corpus, const ModelId& model,
                       const DistanceMetric& metric, const PenaltyConfig& config = {});

/// Results for every (model, metric) pair of a run.
using ScoreTable = std::map<std::pair<ModelId, MetricKind>, ModelScores>;

}  // namespace perseval
