#include "perseval/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include <omp.h>

#include "perseval/errors.hpp"

namespace perseval {

void PenaltyConfig::validate() const {
  if (!(alpha >= 3.0)) throw DataError("alpha must be >= 3");
  if (!(beta >= 1.0)) throw DataError("beta must be >= 1");
  if (!(gamma >= 4.0)) throw DataError("gamma must be >= 4");
  if (!(epsilon > 0.0)) throw DataError("epsilon must be positive");
}

void PAccConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DataError("P-Acc alpha must lie in [0, 1]");
  if (!(beta > 0.0 && beta <= 1.0)) throw DataError("P-Acc beta must lie in (0, 1]");
}

void DivergenceTensors::validate() const {
  const auto n = users.size();
  if (uu.size() != n || ss.size() != n || ud.size() != n || sd.size() != n || su.size() != n)
    throw NumericError("divergence tensors of '" + doc_id + "' have inconsistent sizes");
  auto check = [&](double v) {
    if (!(v >= 0.0 && v <= 1.0))
      throw NumericError("divergence of '" + doc_id + "' outside [0, 1]: " + std::to_string(v));
  };
  for (std::size_t j = 0; j < n; ++j) {
    if (uu[j].size() != n || ss[j].size() != n)
      throw NumericError("divergence tensors of '" + doc_id + "' are not square");
    if (uu[j][j] != 0.0 || ss[j][j] != 0.0)
      throw NumericError("divergence tensors of '" + doc_id + "' have a nonzero diagonal");
    for (std::size_t k = 0; k < n; ++k) {
      check(uu[j][k]);
      check(ss[j][k]);
    }
    check(ud[j]);
    check(sd[j]);
    check(su[j]);
  }
}

DivergenceTensors document_divergences(const EvaluationCorpus& corpus, const ModelId& model,
                                       const DocId& doc, const DistanceMetric& metric) {
  const auto& golds = corpus.golds_for(doc);
  const PreparedText doc_text{doc_key(doc), text::tokenize(corpus.document(doc).text)};

  DivergenceTensors t;
  t.doc_id = doc;
  std::vector<PreparedText> gold_texts;
  std::vector<PreparedText> gen_texts;
  for (const auto& [user, gold] : golds) {
    const auto* s = corpus.summary(model, doc, user);
    if (s == nullptr)
      throw ReferentialError("model '" + model + "' has no summary for (" + doc + ", " + user + ")");
    t.users.push_back(user);
    gold_texts.push_back({gold_key(doc, user), text::tokenize(gold.text)});
    gen_texts.push_back({gen_key(model, doc, user), text::tokenize(s->text)});
  }

  const auto n = t.users.size();
  t.uu.assign(n, std::vector<double>(n, 0.0));
  t.ss.assign(n, std::vector<double>(n, 0.0));
  t.ud.resize(n);
  t.sd.resize(n);
  t.su.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      if (j == k) continue;
      t.uu[j][k] = metric.distance(gold_texts[j], gold_texts[k]);
      t.ss[j][k] = metric.distance(gen_texts[j], gen_texts[k]);
    }
    t.ud[j] = metric.distance(gold_texts[j], doc_text);
    t.sd[j] = metric.distance(gen_texts[j], doc_text);
    t.su[j] = metric.distance(gen_texts[j], gold_texts[j]);
  }
  return t;
}

DivergenceSet pairwise_divergences(const EvaluationCorpus& corpus, const ModelId& model,
                                   const DistanceMetric& metric) {
  DivergenceSet out;
  out.skipped = corpus.flagged_documents();
  for (const auto& doc : corpus.scorable_documents())
    out.documents.push_back(document_divergences(corpus, model, doc, metric));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Softmax over a row, shifted by its maximum so large weights cannot overflow.
std::vector<double> softmax(const std::vector<double>& w) {
  const double top = *std::max_element(w.begin(), w.end());
  std::vector<double> out(w.size());
  double z = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    out[i] = std::exp(w[i] - top);
    z += out[i];
  }
  for (auto& v : out) v /= z;
  return out;
}

}  // namespace

double degress_summary(const DivergenceTensors& t, std::size_t j, double epsilon,
                       bool include_self_term) {
  const auto n = t.size();
  std::vector<double> wu(n);
  std::vector<double> ws(n);
  for (std::size_t l = 0; l < n; ++l) {
    wu[l] = t.uu[j][l] / (t.ud[j] + epsilon);
    ws[l] = t.ss[j][l] / (t.sd[j] + epsilon);
  }
  const auto pu = softmax(wu);
  const auto ps = softmax(ws);

  double sum = 0.0;
  std::size_t terms = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == j && !include_self_term) continue;
    const double x = pu[k] * t.uu[j][k];
    const double y = ps[k] * t.ss[j][k];
    sum += (std::min(x, y) + epsilon) / (std::max(x, y) + epsilon);
    ++terms;
  }
  return sum / static_cast<double>(terms);
}

double accuracy_drop_penalty(double best, const PenaltyConfig& c) {
  return 1.0 / (1.0 + std::pow(10.0, c.gamma) * std::exp(-10.0 * best / ((1.0 - best) + c.epsilon)));
}

double accuracy_inconsistency_penalty(double value, double best, double mean,
                                      const PenaltyConfig& c) {
  return 1.0 / (1.0 + std::pow(10.0, c.gamma) *
                          std::exp(-10.0 * (value - best) / ((mean - best) + c.epsilon)));
}

double effective_degress_penalty(double dgp, const PenaltyConfig& c) {
  return 1.0 - 1.0 / (1.0 + std::pow(10.0, c.alpha) * std::exp(-std::pow(10.0, c.beta) * dgp));
}

namespace {

double best_of(const std::vector<double>& su) { return *std::min_element(su.begin(), su.end()); }

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double adp(const DivergenceTensors& t, const PenaltyConfig& config) {
  return accuracy_drop_penalty(best_of(t.su), config);
}

double acp(const DivergenceTensors& t, std::size_t j, const PenaltyConfig& config) {
  return accuracy_inconsistency_penalty(t.su[j], best_of(t.su), mean_of(t.su), config);
}

double edp(double dgp, const PenaltyConfig& config) { return effective_degress_penalty(dgp, config); }

double perseval_summary(const DivergenceTensors& t, std::size_t j, const PenaltyConfig& config,
                        bool include_self_term) {
  const double dgp = adp(t, config) + acp(t, j, config);
  return degress_summary(t, j, config.epsilon, include_self_term) * edp(dgp, config);
}

double p_accuracy(double accuracy, double egises, const PAccConfig& config) {
  const double logistic = 1.0 / (1.0 + std::exp(-config.beta * egises));
  return accuracy - config.alpha * logistic;
}

DocumentScore score_document(const DivergenceTensors& t, const PenaltyConfig& config,
                             bool include_self_term) {
  const auto n = t.size();
  if (n < 2) throw DataError("document '" + t.doc_id + "' has fewer than two users");
  const double best = best_of(t.su);
  const double mean = mean_of(t.su);

  DocumentScore d;
  d.doc_id = t.doc_id;
  d.adp = accuracy_drop_penalty(best, config);
  d.summaries.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    SummaryScore s;
    s.user_id = t.users[j];
    s.degress = degress_summary(t, j, config.epsilon, include_self_term);
    s.acp = accuracy_inconsistency_penalty(t.su[j], best, mean, config);
    s.dgp = d.adp + s.acp;
    s.edp = effective_degress_penalty(s.dgp, config);
    s.perseval = s.degress * s.edp;
    s.accuracy_distance = t.su[j];
    d.summaries.push_back(std::move(s));
  }
  double accuracy = 0.0;
  for (const auto& s : d.summaries) {
    d.degress += s.degress;
    d.acp += s.acp;
    d.edp += s.edp;
    d.perseval += s.perseval;
    accuracy += 1.0 - s.accuracy_distance;
  }
  const double count = static_cast<double>(n);
  d.degress /= count;
  d.acp /= count;
  d.edp /= count;
  d.perseval /= count;
  d.accuracy = accuracy / count;
  return d;
}

// ---------------------------------------------------------------------------

const DocumentScore& ModelScores::document(const DocId& doc) const {
  auto it = std::lower_bound(documents.begin(), documents.end(), doc,
                             [](const DocumentScore& d, const DocId& id) { return d.doc_id < id; });
  if (it == documents.end() || it->doc_id != doc)
    throw DataError("document '" + doc + "' was not scored for model '" + model_id + "'");
  return *it;
}

SystemScore aggregate(std::span<const DocumentScore* const> documents, const PAccConfig& pacc) {
  if (documents.empty()) throw DataError("no scorable documents");
  SystemScore s;
  for (const auto* d : documents) {
    s.degress += d->degress;
    s.adp += d->adp;
    s.acp += d->acp;
    s.edp += d->edp;
    s.perseval += d->perseval;
    s.accuracy += d->accuracy;
  }
  const double count = static_cast<double>(documents.size());
  s.degress /= count;
  s.adp /= count;
  s.acp /= count;
  s.edp /= count;
  s.perseval /= count;
  s.accuracy /= count;
  s.egises = 1.0 - s.degress;
  s.p_acc = p_accuracy(s.accuracy, s.egises, pacc);
  return s;
}

SystemScore aggregate_over(const ModelScores& scores, std::span<const DocId> doc_ids,
                           const PAccConfig& pacc) {
  std::vector<const DocumentScore*> picked;
  picked.reserve(doc_ids.size());
  for (const auto& id : doc_ids) picked.push_back(&scores.document(id));
  return aggregate(picked, pacc);
}

namespace {

SystemScore aggregate_all(const std::vector<DocumentScore>& docs, const PAccConfig& pacc) {
  std::vector<const DocumentScore*> ptrs;
  ptrs.reserve(docs.size());
  for (const auto& d : docs) ptrs.push_back(&d);
  return aggregate(ptrs, pacc);
}

ModelScores prepare(const EvaluationCorpus& corpus, const ModelId& model,
                    const DistanceMetric& metric, const PenaltyConfig& config,
                    const PAccConfig& pacc) {
  config.validate();
  pacc.validate();
  ModelScores out;
  out.model_id = model;
  out.metric = metric.kind();
  out.skipped = corpus.flagged_documents();
  return out;
}

}  // namespace

ModelScores score_model_serial(const EvaluationCorpus& corpus, const ModelId& model,
                               const DistanceMetric& metric, const PenaltyConfig& config,
                               const PAccConfig& pacc, const EngineOptions& options) {
  auto out = prepare(corpus, model, metric, config, pacc);
  for (const auto& doc : corpus.scorable_documents()) {
    out.documents.push_back(score_document(document_divergences(corpus, model, doc, metric),
                                           config, options.include_self_term));
  }
  out.system = aggregate_all(out.documents, pacc);
  return out;
}

ModelScores score_model(const EvaluationCorpus& corpus, const ModelId& model,
                        const DistanceMetric& metric, const PenaltyConfig& config,
                        const PAccConfig& pacc, const EngineOptions& options) {
  auto out = prepare(corpus, model, metric, config, pacc);
  const auto docs = corpus.scorable_documents();
  const auto count = static_cast<std::ptrdiff_t>(docs.size());
  out.documents.resize(docs.size());
  // One slot per document so the reported failure does not depend on scheduling.
  std::vector<std::exception_ptr> errors(docs.size());
  const int threads = options.jobs > 0 ? options.jobs : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      out.documents[i] = score_document(document_divergences(corpus, model, docs[i], metric),
                                        config, options.include_self_term);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }

  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  out.system = aggregate_all(out.documents, pacc);
  return out;
}

ModelScores score_tensors(const ModelId& model, MetricKind metric,
                          std::span<const DivergenceTensors> tensors, std::vector<DocId> skipped,
                          const PenaltyConfig& config, const PAccConfig& pacc,
                          bool include_self_term) {
  config.validate();
  pacc.validate();
  ModelScores out;
  out.model_id = model;
  out.metric = metric;
  out.skipped = std::move(skipped);
  for (const auto& t : tensors) {
    t.validate();
    out.documents.push_back(score_document(t, config, include_self_term));
  }
  std::sort(out.documents.begin(), out.documents.end(),
            [](const DocumentScore& a, const DocumentScore& b) { return a.doc_id < b.doc_id; });
  out.system = aggregate_all(out.documents, pacc);
  return out;
}

double degress_system(const EvaluationCorpus& corpus, const ModelId& model,
                      const DistanceMetric& metric, const PenaltyConfig& config) {
  return score_model(corpus, model, metric, config).system.degress;
}

double egises_system(const EvaluationCorpus& corpus, const ModelId& model,
                     const DistanceMetric& metric, const PenaltyConfig& config) {
  return score_model(corpus, model, metric, config).system.egises;
}

double perseval_system(const EvaluationCorpus& corpus, const ModelId& model,
                       const DistanceMetric& metric, const PenaltyConfig& config) {
  return score_model(corpus, model, metric, config).system.perseval;
}

}  // namespace perseval
