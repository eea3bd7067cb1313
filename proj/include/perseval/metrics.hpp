#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace perseval::metrics {

using Tokens = std::span<const std::string>;

// String-space distances. Each converts a similarity score to a distance as
// 1 - score and throws NumericError when either input is empty. The first
// argument is always the candidate, the second the reference.

/// 1 - F1 of the longest common subsequence.
double rouge_l_distance(Tokens candidate, Tokens reference);

/// 1 - F1 over the pooled multiset of unigrams and skip-bigrams with at most
/// four gap tokens between the pair.
double rouge_su4_distance(Tokens candidate, Tokens reference);

/// 1 - BP * clipped unigram precision, BP = min(1, exp(1 - |ref|/|cand|)).
double bleu1_distance(Tokens candidate, Tokens reference);

/// 1 - METEOR with exact then Porter-stem matching, F_mean = 10PR/(R+9P) and
/// fragmentation penalty 0.5 (chunks/matches)^3. A candidate that matches the
/// reference completely in a single chunk gets no fragmentation penalty.
double meteor_distance(Tokens candidate, Tokens reference);

/// Unigram alignment statistics behind meteor_distance.
struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
};
MeteorAlignment meteor_align(Tokens candidate, Tokens reference);

// ---------------------------------------------------------------------------
// Probability-space distances

/// Sparse distribution; `support` is strictly increasing and parallel to `mass`.
struct ProbabilityDistribution {
  std::vector<std::int64_t> support;
  std::vector<double> mass;

  friend bool operator==(const ProbabilityDistribution&, const ProbabilityDistribution&) = default;
};

inline constexpr double kDistributionTolerance = 1e-6;
inline constexpr double kSmoothing = 1e-12;

/// Throws NumericError unless masses are finite, nonnegative, and sum to 1
/// within kDistributionTolerance, and the support is strictly increasing.
void validate(const ProbabilityDistribution& p);

/// Sorts by support id and merges duplicate ids.
ProbabilityDistribution make_distribution(std::vector<std::int64_t> support,
                                          std::vector<double> mass);

/// Relative unigram frequencies of both texts over their union vocabulary.
std::pair<ProbabilityDistribution, ProbabilityDistribution> unigram_distributions(Tokens a,
                                                                                  Tokens b);

/// Dense vectors of both distributions over the union support.
std::pair<std::vector<double>, std::vector<double>> align(const ProbabilityDistribution& p,
                                                          const ProbabilityDistribution& q);

/// Square root of the base-2 Jensen-Shannon divergence; 0 log 0 = 0.
double jsd_distance(const ProbabilityDistribution& p, const ProbabilityDistribution& q);
double jsd_distance(Tokens a, Tokens b);

/// AB-divergence
///   1/(b(a+b)) log sum p^(a+b) + 1/(a+b) log sum q^(a+b) - 1/b log sum p^a q^b
/// on the union support after adding kSmoothing to every entry and renormalising.
double ab_divergence(const ProbabilityDistribution& p, const ProbabilityDistribution& q,
                     double a_param = 1.0, double b_param = 1.0);

/// 1 - exp(-ab_divergence(p, q, 1, 1)).
double infolm_distance(const ProbabilityDistribution& p, const ProbabilityDistribution& q);

}  // namespace perseval::metrics
