#include "perseval/metaeval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>

#include <omp.h>

#include "perseval/errors.hpp"

namespace perseval::metaeval {

namespace {

void require_pair(std::span<const double> x, std::span<const double> y, const char* what) {
  if (x.size() != y.size())
    throw NumericError(std::string(what) + ": inputs differ in length (" +
                       std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
  if (x.size() < 2) throw NumericError(std::string(what) + ": needs at least two observations");
}

bool has_ties(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return std::adjacent_find(s.begin(), s.end()) != s.end();
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  require_pair(x, y, "pearson");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericError("pearson: degenerate (zero) variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  require_pair(x, y, "spearman");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  if (has_ties(x) || has_ties(y)) return pearson(rx, ry);
  const double n = static_cast<double>(x.size());
  double d2 = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

double kendall(std::span<const double> x, std::span<const double> y) {
  require_pair(x, y, "kendall");
  long long concordant = 0;
  long long discordant = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double s = (x[i] - x[j]) * (y[i] - y[j]);
      if (s > 0) ++concordant;
      else if (s < 0) ++discordant;
    }
  }
  const auto n = static_cast<long long>(x.size());
  return static_cast<double>(concordant - discordant) / static_cast<double>(n * (n - 1) / 2);
}

// ---------------------------------------------------------------------------

namespace {

// Rank-level statistics evaluated on a permutation of y's ranks; the
// permutation leaves the marginal rank sums of squares unchanged.
struct PermutationStats {
  std::vector<double> rx;
  std::vector<double> ry;
  double mean = 0.0;
  double denom = 0.0;

  PermutationStats(std::span<const double> x, std::span<const double> y)
      : rx(average_ranks(x)), ry(average_ranks(y)) {
    const double n = static_cast<double>(rx.size());
    mean = (n + 1.0) / 2.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
      sxx += (rx[i] - mean) * (rx[i] - mean);
      syy += (ry[i] - mean) * (ry[i] - mean);
    }
    denom = std::sqrt(sxx * syy);
  }

  double rho(const std::vector<std::size_t>& perm) const {
    double s = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) s += (rx[i] - mean) * (ry[perm[i]] - mean);
    return s / denom;
  }

  double tau(const std::vector<std::size_t>& perm) const {
    long long c = 0;
    for (std::size_t i = 0; i < rx.size(); ++i)
      for (std::size_t j = i + 1; j < rx.size(); ++j) {
        const double s = (rx[i] - rx[j]) * (ry[perm[i]] - ry[perm[j]]);
        c += (s > 0) - (s < 0);
      }
    const auto n = static_cast<long long>(rx.size());
    return static_cast<double>(c) / static_cast<double>(n * (n - 1) / 2);
  }
};

std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x < threshold);
  return x % n;
}

constexpr double kPTolerance = 1e-12;

}  // namespace

CorrelationResult correlate(std::span<const double> x, std::span<const double> y,
                            std::uint64_t seed) {
  CorrelationResult r;
  r.pearson = pearson(x, y);
  r.spearman = spearman(x, y);
  r.kendall = kendall(x, y);

  const PermutationStats stats(x, y);
  const double obs_rho = std::abs(stats.rho([&] {
    std::vector<std::size_t> id(x.size());
    std::iota(id.begin(), id.end(), 0);
    return id;
  }()));
  const double obs_tau = std::abs(r.kendall);

  std::vector<std::size_t> perm(x.size());
  std::iota(perm.begin(), perm.end(), 0);
  long long extreme_rho = 0;
  long long extreme_tau = 0;
  long long total = 0;
  auto tally = [&] {
    if (std::abs(stats.rho(perm)) >= obs_rho - kPTolerance) ++extreme_rho;
    if (std::abs(stats.tau(perm)) >= obs_tau - kPTolerance) ++extreme_tau;
    ++total;
  };

  if (x.size() <= static_cast<std::size_t>(kExactPermutationLimit)) {
    do {
      tally();
    } while (std::next_permutation(perm.begin(), perm.end()));
    r.spearman_p = static_cast<double>(extreme_rho) / static_cast<double>(total);
    r.kendall_p = static_cast<double>(extreme_tau) / static_cast<double>(total);
    r.exact_p = true;
  } else {
    std::mt19937_64 rng(seed);
    for (int it = 0; it < kMonteCarloPermutations; ++it) {
      for (std::size_t i = perm.size() - 1; i > 0; --i)
        std::swap(perm[i], perm[bounded_draw(rng, i + 1)]);
      tally();
    }
    r.spearman_p = static_cast<double>(extreme_rho + 1) / static_cast<double>(total + 1);
    r.kendall_p = static_cast<double>(extreme_tau + 1) / static_cast<double>(total + 1);
    r.exact_p = false;
  }
  return r;
}

// ---------------------------------------------------------------------------

std::vector<ModelId> Ranking::order() const {
  std::vector<ModelId> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.model_id);
  return out;
}

int Ranking::rank_of(const ModelId& model) const {
  for (const auto& e : entries)
    if (e.model_id == model) return e.rank;
  throw DataError("model '" + model + "' is not ranked");
}

namespace {

Ranking finish_ranking(std::vector<std::pair<ModelId, double>> items, Direction direction) {
  std::sort(items.begin(), items.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second)
      return direction == Direction::higher_is_better ? a.second > b.second : a.second < b.second;
    return a.first < b.first;
  });
  Ranking r;
  for (std::size_t i = 0; i < items.size(); ++i) {
    RankEntry e{items[i].first, static_cast<int>(i + 1), items[i].second, false};
    e.tied = (i > 0 && items[i - 1].second == items[i].second) ||
             (i + 1 < items.size() && items[i + 1].second == items[i].second);
    r.entries.push_back(std::move(e));
  }
  return r;
}

}  // namespace

Ranking rank_by_score(const std::map<ModelId, double>& scores, Direction direction) {
  return finish_ranking({scores.begin(), scores.end()}, direction);
}

Ranking borda_kendall(std::span<const Ranking> rankings) {
  if (rankings.empty()) throw DataError("borda_kendall needs at least one ranking");
  auto models_of = [](const Ranking& r) {
    auto m = r.order();
    std::sort(m.begin(), m.end());
    return m;
  };
  const auto reference = models_of(rankings.front());
  if (std::adjacent_find(reference.begin(), reference.end()) != reference.end())
    throw DataError("ranking lists a model twice");
  std::map<ModelId, double> sums;
  for (const auto& r : rankings) {
    if (models_of(r) != reference) throw DataError("rankings cover different model sets");
    for (const auto& e : r.entries) sums[e.model_id] += e.rank;
  }
  return finish_ranking({sums.begin(), sums.end()}, Direction::lower_is_better);
}

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::perseval: return "perseval";
    case Measure::degress: return "degress";
    case Measure::egises: return "egises";
    case Measure::adp: return "adp";
    case Measure::acp: return "acp";
    case Measure::edp: return "edp";
    case Measure::accuracy: return "accuracy";
    case Measure::p_acc: return "p_acc";
  }
  return "unknown";
}

Measure parse_measure(std::string_view name) {
  for (auto m : {Measure::perseval, Measure::degress, Measure::egises, Measure::adp, Measure::acp,
                 Measure::edp, Measure::accuracy, Measure::p_acc})
    if (to_string(m) == name) return m;
  throw DataError("unknown measure '" + std::string(name) + "'");
}

double measure_value(const SystemScore& s, Measure m) {
  switch (m) {
    case Measure::perseval: return s.perseval;
    case Measure::degress: return s.degress;
    case Measure::egises: return s.egises;
    case Measure::adp: return s.adp;
    case Measure::acp: return s.acp;
    case Measure::edp: return s.edp;
    case Measure::accuracy: return s.accuracy;
    case Measure::p_acc: return s.p_acc;
  }
  return 0.0;
}

Direction direction_of(Measure m) {
  switch (m) {
    case Measure::egises:
    case Measure::adp:
    case Measure::acp:
      return Direction::lower_is_better;
    default:
      return Direction::higher_is_better;
  }
}

Ranking leaderboard(const ScoreTable& table, MetricKind metric, Measure measure) {
  std::map<ModelId, double> scores;
  for (const auto& [key, s] : table)
    if (key.second == metric) scores[key.first] = measure_value(s.system, measure);
  if (scores.empty()) throw DataError("no model scored under metric " + std::string(to_string(metric)));
  return rank_by_score(scores, direction_of(measure));
}

// ---------------------------------------------------------------------------

BiasVariance bias_variance(std::span<const double> values) {
  if (values.empty()) throw NumericError("bias_variance of an empty set");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  BiasVariance out;
  out.variance = ss / n;
  out.bias = std::sqrt(out.variance);
  return out;
}

StabilityReport stability_from_scores(const std::map<ModelId, double>& full,
                                      std::span<const SampleScores> samples,
                                      std::span<const double> fractions, Direction direction) {
  if (full.size() < 2) throw NumericError("stability needs at least two models");
  StabilityReport report;
  report.fractions.assign(fractions.begin(), fractions.end());
  report.full_ranking = rank_by_score(full, direction);

  std::vector<double> full_vec;
  for (const auto& [_, v] : full) full_vec.push_back(v);

  for (const auto& s : samples) {
    std::vector<double> sample_vec;
    for (const auto& [model, _] : full) {
      auto it = s.scores.find(model);
      if (it == s.scores.end())
        throw DataError("sample (" + std::to_string(s.fraction) + ", " +
                        std::to_string(s.set_index) + ") has no score for model '" + model + "'");
      sample_vec.push_back(it->second);
    }
    SampleAgreement a;
    a.fraction = s.fraction;
    a.set_index = s.set_index;
    a.spearman = spearman(sample_vec, full_vec);
    a.kendall = kendall(sample_vec, full_vec);
    a.ranking = rank_by_score(s.scores, direction);
    report.epsilon_spearman = std::min(report.epsilon_spearman, a.spearman);
    report.epsilon_kendall = std::min(report.epsilon_kendall, a.kendall);
    report.samples.push_back(std::move(a));
  }

  for (const auto& entry : report.full_ranking.entries) {
    ModelStability m;
    m.model_id = entry.model_id;
    m.full_score = full.at(entry.model_id);
    std::vector<double> values{m.full_score};
    for (double f : fractions) {
      double sum = 0.0;
      int count = 0;
      for (const auto& s : samples) {
        if (s.fraction != f) continue;
        sum += s.scores.at(entry.model_id);
        ++count;
      }
      if (count == 0) throw DataError("no samples for fraction " + std::to_string(f));
      m.fraction_means.push_back(sum / count);
      values.push_back(m.fraction_means.back());
    }
    const auto bv = bias_variance(values);
    m.bias = bv.bias;
    m.variance = bv.variance;
    report.delta_stability = std::max({report.delta_stability, m.bias, m.variance});
    report.models.push_back(std::move(m));
  }
  return report;
}

StabilityReport stability_report(const EvaluationCorpus& corpus,
                                 const SampleCollections& collections, const SystemScorer& scorer,
                                 Direction direction, int jobs) {
  const auto all_docs = corpus.scorable_documents();
  const auto full = scorer(all_docs);

  std::vector<SampleScores> scored(collections.samples.size());
  std::vector<std::exception_ptr> errors(scored.size());
  const auto count = static_cast<std::ptrdiff_t>(scored.size());
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto& sample = collections.samples[i];
    try {
      scored[i] = SampleScores{sample.fraction, sample.set_index, scorer(sample.doc_ids)};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  return stability_from_scores(full, scored, collections.fractions, direction);
}

}  // namespace perseval::metaeval
