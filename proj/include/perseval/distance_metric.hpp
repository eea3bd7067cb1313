#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "perseval/metrics.hpp"
#include "perseval/text.hpp"

namespace perseval {

enum class MetricKind { rouge_l, rouge_su4, bleu1, meteor, jsd, bscore, infolm };

std::string_view to_string(MetricKind kind);
/// Throws DataError for an unknown name.
MetricKind parse_metric_kind(std::string_view name);
std::span<const MetricKind> all_metric_kinds();

/// A text as a metric sees it: its corpus key (see doc_key/gold_key/gen_key)
/// and its tokens.
struct PreparedText {
  std::string key;
  text::TokenSequence tokens;
};

/// Dense symmetric matrix of precomputed distances, addressed by text key.
/// Carries BERTScore-style distances produced offline.
class DistanceMatrix {
 public:
  /// `values` is row-major n x n. Throws DataError unless the matrix is
  /// symmetric, has a zero diagonal, and every entry lies in [0, 1].
  DistanceMatrix(std::string metric, std::vector<std::string> ids, std::vector<double> values);

  const std::string& metric() const noexcept { return metric_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::size_t size() const noexcept { return ids_.size(); }
  double at(std::size_t row, std::size_t col) const { return values_[row * ids_.size() + col]; }

  /// Throws ReferentialError when either id is absent.
  double lookup(std::string_view a, std::string_view b) const;

 private:
  std::string metric_;
  std::vector<std::string> ids_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Accepts either a JSON header line followed by n*n little-endian float64
/// values, or a single JSON object with a "matrix" field (nested rows or a flat
/// row-major array).
DistanceMatrix read_distance_matrix(std::istream& in, const std::string& source_name = "<stream>");
DistanceMatrix load_distance_matrix(const std::filesystem::path& path);
void write_distance_matrix_binary(std::ostream& out, const DistanceMatrix& matrix);
void write_distance_matrix_json(std::ostream& out, const DistanceMatrix& matrix);

/// Per-text averaged masked-LM distributions, keyed by text key.
class DistributionStore {
 public:
  /// Validates the distribution; throws DuplicateKeyError on a repeated id.
  void insert(std::string id, metrics::ProbabilityDistribution dist);
  /// Throws ReferentialError when absent.
  const metrics::ProbabilityDistribution& at(std::string_view id) const;
  std::size_t size() const noexcept { return dists_.size(); }
  const std::map<std::string, metrics::ProbabilityDistribution, std::less<>>& entries() const noexcept {
    return dists_;
  }

 private:
  std::map<std::string, metrics::ProbabilityDistribution, std::less<>> dists_;
};

DistributionStore read_distributions(std::istream& in, const std::string& source_name = "<stream>");
DistributionStore load_distributions(const std::filesystem::path& path);
void write_distributions(std::ostream& out, const DistributionStore& store);

/// sigma(candidate, reference) in [0, 1]. Implementations are stateless after
/// construction and safe to call concurrently.
class DistanceMetric {
 public:
  virtual ~DistanceMetric() = default;
  virtual MetricKind kind() const noexcept = 0;
  virtual double distance(const PreparedText& candidate, const PreparedText& reference) const = 0;
};

struct MetricResources {
  std::shared_ptr<const DistanceMatrix> bscore_matrix;
  std::shared_ptr<const DistributionStore> infolm_distributions;
};

/// Throws DataError when an embedding-backed metric is requested without its
/// resource file.
std::unique_ptr<DistanceMetric> make_metric(MetricKind kind, const MetricResources& resources = {});

}  // namespace perseval
