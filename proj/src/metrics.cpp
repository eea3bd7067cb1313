#include "perseval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string_view>
#include <unordered_map>

#include "perseval/errors.hpp"
#include "perseval/text.hpp"

namespace perseval::metrics {

namespace {

void require_non_empty(Tokens a, Tokens b, const char* metric) {
  if (a.empty() || b.empty())
    throw NumericError(std::string(metric) + ": both token sequences must be non-empty");
}

double f1_distance(double matches, double candidate_units, double reference_units) {
  if (matches <= 0.0) return 1.0;
  const double p = matches / candidate_units;
  const double r = matches / reference_units;
  return 1.0 - 2.0 * p * r / (p + r);
}

std::map<std::string_view, int> unigram_counts(Tokens tokens) {
  std::map<std::string_view, int> counts;
  for (const auto& t : tokens) ++counts[t];
  return counts;
}

constexpr std::size_t kMaxSkipGap = 4;

std::map<std::pair<std::string_view, std::string_view>, int> skip_bigram_counts(Tokens tokens) {
  std::map<std::pair<std::string_view, std::string_view>, int> counts;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto last = std::min(tokens.size() - 1, i + kMaxSkipGap + 1);
    for (std::size_t j = i + 1; j <= last; ++j) ++counts[{tokens[i], tokens[j]}];
  }
  return counts;
}

template <typename Map>
std::pair<long, long> clipped_overlap(const Map& a, const Map& b) {
  long overlap = 0;
  long total_a = 0;
  for (const auto& [key, n] : a) {
    total_a += n;
    if (auto it = b.find(key); it != b.end()) overlap += std::min(n, it->second);
  }
  return {overlap, total_a};
}

}  // namespace

double rouge_l_distance(Tokens candidate, Tokens reference) {
  require_non_empty(candidate, reference, "rouge_l");
  std::vector<std::size_t> prev(reference.size() + 1, 0);
  std::vector<std::size_t> cur(reference.size() + 1, 0);
  for (const auto& c : candidate) {
    for (std::size_t j = 1; j <= reference.size(); ++j)
      cur[j] = (c == reference[j - 1]) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  const auto lcs = static_cast<double>(prev.back());
  return f1_distance(lcs, static_cast<double>(candidate.size()),
                     static_cast<double>(reference.size()));
}

double rouge_su4_distance(Tokens candidate, Tokens reference) {
  require_non_empty(candidate, reference, "rouge_su4");
  const auto bi_r = skip_bigram_counts(reference);
  const auto [uni_overlap, uni_c] =
      clipped_overlap(unigram_counts(candidate), unigram_counts(reference));
  const auto [bi_overlap, bi_c] = clipped_overlap(skip_bigram_counts(candidate), bi_r);
  long bi_r_total = 0;
  for (const auto& [_, n] : bi_r) bi_r_total += n;
  const double units_c = static_cast<double>(uni_c + bi_c);
  const double units_r = static_cast<double>(static_cast<long>(reference.size()) + bi_r_total);
  return f1_distance(static_cast<double>(uni_overlap + bi_overlap), units_c, units_r);
}

double bleu1_distance(Tokens candidate, Tokens reference) {
  require_non_empty(candidate, reference, "bleu1");
  const auto [clipped, total] = clipped_overlap(unigram_counts(candidate), unigram_counts(reference));
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double brevity = c >= r ? 1.0 : std::exp(1.0 - r / c);
  return 1.0 - brevity * static_cast<double>(clipped) / static_cast<double>(total);
}

MeteorAlignment meteor_align(Tokens candidate, Tokens reference) {
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> cand_to_ref(candidate.size(), kNone);
  std::vector<bool> ref_used(reference.size(), false);

  // Greedy stage matcher: prefer the reference slot that extends the previous
  // match into the same chunk, otherwise the first unused equal slot.
  auto run_stage = [&](const std::vector<std::string>& cand_forms,
                       const std::vector<std::string>& ref_forms) {
    std::size_t prev_ref = kNone;
    for (std::size_t i = 0; i < cand_forms.size(); ++i) {
      if (cand_to_ref[i] != kNone) {
        prev_ref = cand_to_ref[i];
        continue;
      }
      std::size_t pick = kNone;
      const std::size_t next = prev_ref == kNone ? kNone : prev_ref + 1;
      if (next != kNone && next < ref_forms.size() && !ref_used[next] &&
          ref_forms[next] == cand_forms[i]) {
        pick = next;
      } else {
        for (std::size_t j = 0; j < ref_forms.size(); ++j) {
          if (!ref_used[j] && ref_forms[j] == cand_forms[i]) {
            pick = j;
            break;
          }
        }
      }
      if (pick != kNone) {
        cand_to_ref[i] = pick;
        ref_used[pick] = true;
      }
      prev_ref = pick;
    }
  };

  run_stage({candidate.begin(), candidate.end()}, {reference.begin(), reference.end()});

  std::vector<std::string> cand_stems;
  std::vector<std::string> ref_stems;
  cand_stems.reserve(candidate.size());
  ref_stems.reserve(reference.size());
  for (const auto& t : candidate) cand_stems.push_back(text::porter_stem(t));
  for (const auto& t : reference) ref_stems.push_back(text::porter_stem(t));
  run_stage(cand_stems, ref_stems);

  MeteorAlignment out;
  std::size_t prev_ref = kNone;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    const auto j = cand_to_ref[i];
    if (j == kNone) {
      prev_ref = kNone;
      continue;
    }
    ++out.matches;
    if (prev_ref == kNone || j != prev_ref + 1) ++out.chunks;
    prev_ref = j;
  }
  return out;
}

double meteor_distance(Tokens candidate, Tokens reference) {
  require_non_empty(candidate, reference, "meteor");
  const auto [matches, chunks] = meteor_align(candidate, reference);
  if (matches == 0) return 1.0;
  const double m = static_cast<double>(matches);
  const double p = m / static_cast<double>(candidate.size());
  const double r = m / static_cast<double>(reference.size());
  const double f_mean = 10.0 * p * r / (r + 9.0 * p);
  const bool whole = matches == candidate.size() && matches == reference.size() && chunks == 1;
  const double frag = whole ? 0.0 : static_cast<double>(chunks) / m;
  const double penalty = 0.5 * frag * frag * frag;
  return 1.0 - f_mean * (1.0 - penalty);
}

// ---------------------------------------------------------------------------

void validate(const ProbabilityDistribution& p) {
  if (p.support.size() != p.mass.size())
    throw NumericError("distribution support and mass lengths differ");
  if (p.support.empty()) throw NumericError("distribution is empty");
  double total = 0.0;
  for (std::size_t i = 0; i < p.mass.size(); ++i) {
    if (!std::isfinite(p.mass[i]) || p.mass[i] < 0.0)
      throw NumericError("distribution mass must be finite and nonnegative");
    if (i > 0 && p.support[i] <= p.support[i - 1])
      throw NumericError("distribution support must be strictly increasing");
    total += p.mass[i];
  }
  if (std::abs(total - 1.0) > kDistributionTolerance)
    throw NumericError("distribution mass sums to " + std::to_string(total) + ", not 1");
}

ProbabilityDistribution make_distribution(std::vector<std::int64_t> support,
                                          std::vector<double> mass) {
  if (support.size() != mass.size())
    throw NumericError("distribution support and mass lengths differ");
  std::map<std::int64_t, double> merged;
  for (std::size_t i = 0; i < support.size(); ++i) merged[support[i]] += mass[i];
  ProbabilityDistribution out;
  out.support.reserve(merged.size());
  out.mass.reserve(merged.size());
  for (const auto& [id, m] : merged) {
    out.support.push_back(id);
    out.mass.push_back(m);
  }
  return out;
}

std::pair<ProbabilityDistribution, ProbabilityDistribution> unigram_distributions(Tokens a,
                                                                                  Tokens b) {
  if (a.empty() || b.empty()) throw NumericError("unigram distribution of an empty text");
  std::unordered_map<std::string_view, std::pair<long, long>> counts;
  counts.reserve(a.size() + b.size());
  for (const auto& t : a) ++counts[t].first;
  for (const auto& t : b) ++counts[t].second;

  std::vector<std::string_view> vocab;
  vocab.reserve(counts.size());
  for (const auto& [tok, _] : counts) vocab.push_back(tok);
  std::sort(vocab.begin(), vocab.end());

  ProbabilityDistribution p;
  ProbabilityDistribution q;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    const auto [ca, cb] = counts[vocab[id]];
    if (ca > 0) {
      p.support.push_back(static_cast<std::int64_t>(id));
      p.mass.push_back(static_cast<double>(ca) / na);
    }
    if (cb > 0) {
      q.support.push_back(static_cast<std::int64_t>(id));
      q.mass.push_back(static_cast<double>(cb) / nb);
    }
  }
  return {std::move(p), std::move(q)};
}

std::pair<std::vector<double>, std::vector<double>> align(const ProbabilityDistribution& p,
                                                          const ProbabilityDistribution& q) {
  std::vector<double> dp;
  std::vector<double> dq;
  dp.reserve(p.support.size() + q.support.size());
  dq.reserve(p.support.size() + q.support.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < p.support.size() || j < q.support.size()) {
    if (j == q.support.size() || (i < p.support.size() && p.support[i] < q.support[j])) {
      dp.push_back(p.mass[i++]);
      dq.push_back(0.0);
    } else if (i == p.support.size() || q.support[j] < p.support[i]) {
      dp.push_back(0.0);
      dq.push_back(q.mass[j++]);
    } else {
      dp.push_back(p.mass[i++]);
      dq.push_back(q.mass[j++]);
    }
  }
  return {std::move(dp), std::move(dq)};
}

double jsd_distance(const ProbabilityDistribution& p, const ProbabilityDistribution& q) {
  validate(p);
  validate(q);
  const auto [dp, dq] = align(p, q);
  double js = 0.0;
  for (std::size_t i = 0; i < dp.size(); ++i) {
    const double m = 0.5 * (dp[i] + dq[i]);
    if (dp[i] > 0.0) js += 0.5 * dp[i] * std::log2(dp[i] / m);
    if (dq[i] > 0.0) js += 0.5 * dq[i] * std::log2(dq[i] / m);
  }
  return std::clamp(std::sqrt(std::max(js, 0.0)), 0.0, 1.0);
}

double jsd_distance(Tokens a, Tokens b) {
  const auto [p, q] = unigram_distributions(a, b);
  return jsd_distance(p, q);
}

double ab_divergence(const ProbabilityDistribution& p, const ProbabilityDistribution& q,
                     double a_param, double b_param) {
  if (a_param == 0.0 || b_param == 0.0 || a_param + b_param == 0.0)
    throw NumericError("ab_divergence requires alpha, beta, and alpha + beta to be nonzero");
  validate(p);
  validate(q);
  auto [dp, dq] = align(p, q);
  const double norm = 1.0 + static_cast<double>(dp.size()) * kSmoothing;
  for (auto& v : dp) v = (v + kSmoothing) / norm;
  for (auto& v : dq) v = (v + kSmoothing) / norm;

  const double ab = a_param + b_param;
  double sum_p = 0.0;
  double sum_q = 0.0;
  double sum_cross = 0.0;
  for (std::size_t i = 0; i < dp.size(); ++i) {
    sum_p += std::pow(dp[i], ab);
    sum_q += std::pow(dq[i], ab);
    sum_cross += std::pow(dp[i], a_param) * std::pow(dq[i], b_param);
  }
  if (!(sum_p > 0.0) || !(sum_q > 0.0) || !(sum_cross > 0.0) || !std::isfinite(sum_p) ||
      !std::isfinite(sum_q) || !std::isfinite(sum_cross))
    throw NumericError("ab_divergence: log argument out of domain");
  return std::log(sum_p) / (b_param * ab) + std::log(sum_q) / ab - std::log(sum_cross) / b_param;
}

double infolm_distance(const ProbabilityDistribution& p, const ProbabilityDistribution& q) {
  const double d = ab_divergence(p, q, 1.0, 1.0);
  return 1.0 - std::exp(-std::max(d, 0.0));
}

}  // namespace perseval::metrics
