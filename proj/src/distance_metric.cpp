#include "perseval/distance_metric.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "perseval/errors.hpp"

namespace perseval {

using nlohmann::json;

namespace {

constexpr std::array kAllKinds{MetricKind::rouge_l, MetricKind::rouge_su4, MetricKind::bleu1,
                               MetricKind::meteor,  MetricKind::jsd,       MetricKind::bscore,
                               MetricKind::infolm};

constexpr double kMatrixTolerance = 1e-12;

}  // namespace

std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::rouge_l: return "rouge_l";
    case MetricKind::rouge_su4: return "rouge_su4";
    case MetricKind::bleu1: return "bleu1";
    case MetricKind::meteor: return "meteor";
    case MetricKind::jsd: return "jsd";
    case MetricKind::bscore: return "bscore";
    case MetricKind::infolm: return "infolm";
  }
  return "unknown";
}

MetricKind parse_metric_kind(std::string_view name) {
  for (auto kind : kAllKinds)
    if (to_string(kind) == name) return kind;
  throw DataError("unknown metric '" + std::string(name) +
                  "' (expected rouge_l, rouge_su4, bleu1, meteor, jsd, bscore, infolm)");
}

std::span<const MetricKind> all_metric_kinds() { return kAllKinds; }

// ---------------------------------------------------------------------------
// DistanceMatrix

DistanceMatrix::DistanceMatrix(std::string metric, std::vector<std::string> ids,
                               std::vector<double> values)
    : metric_(std::move(metric)), ids_(std::move(ids)), values_(std::move(values)) {
  const std::size_t n = ids_.size();
  if (values_.size() != n * n)
    throw DataError("distance matrix has " + std::to_string(values_.size()) +
                    " entries, expected " + std::to_string(n * n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!index_.emplace(ids_[i], i).second)
      throw DuplicateKeyError("distance matrix repeats id '" + ids_[i] + "'");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(at(i, i)) > kMatrixTolerance)
      throw DataError("distance matrix diagonal is nonzero at '" + ids_[i] + "'");
    for (std::size_t j = 0; j < n; ++j) {
      const double v = at(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw DataError("distance matrix entry (" + ids_[i] + ", " + ids_[j] + ") outside [0, 1]");
      if (std::abs(v - at(j, i)) > kMatrixTolerance)
        throw DataError("distance matrix is not symmetric at (" + ids_[i] + ", " + ids_[j] + ")");
    }
  }
}

double DistanceMatrix::lookup(std::string_view a, std::string_view b) const {
  auto ia = index_.find(std::string(a));
  if (ia == index_.end()) throw ReferentialError("distance matrix has no id '" + std::string(a) + "'");
  auto ib = index_.find(std::string(b));
  if (ib == index_.end()) throw ReferentialError("distance matrix has no id '" + std::string(b) + "'");
  if (ia->second == ib->second) return 0.0;
  return at(ia->second, ib->second);
}

namespace {

std::vector<std::string> parse_ids(const json& header, const std::string& source) {
  if (!header.contains("metric") || !header["metric"].is_string())
    throw ParseError(source, 1, "distance matrix header lacks a string 'metric'");
  if (!header.contains("ids") || !header["ids"].is_array())
    throw ParseError(source, 1, "distance matrix header lacks an 'ids' array");
  std::vector<std::string> ids;
  for (const auto& id : header["ids"]) {
    if (!id.is_string()) throw ParseError(source, 1, "distance matrix ids must be strings");
    ids.push_back(id.get<std::string>());
  }
  return ids;
}

double decode_le_double(const char* bytes) {
  std::array<char, 8> buf;
  std::memcpy(buf.data(), bytes, 8);
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf.begin(), buf.end());
  double v;
  std::memcpy(&v, buf.data(), 8);
  return v;
}

void encode_le_double(std::ostream& out, double v) {
  std::array<char, 8> buf;
  std::memcpy(buf.data(), &v, 8);
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf.begin(), buf.end());
  out.write(buf.data(), 8);
}

}  // namespace

DistanceMatrix read_distance_matrix(std::istream& in, const std::string& source_name) {
  const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto newline = content.find('\n');
  const std::string first_line = content.substr(0, newline);

  json header = json::parse(first_line, nullptr, /*allow_exceptions=*/false);
  if (!header.is_discarded() && header.is_object() && !header.contains("matrix")) {
    auto ids = parse_ids(header, source_name);
    const std::size_t n = ids.size();
    const std::size_t offset = newline == std::string::npos ? content.size() : newline + 1;
    const std::size_t payload = content.size() - offset;
    if (payload != n * n * 8)
      throw ParseError(source_name, 2,
                       "binary payload has " + std::to_string(payload) + " bytes, expected " +
                           std::to_string(n * n * 8));
    std::vector<double> values(n * n);
    for (std::size_t i = 0; i < n * n; ++i) values[i] = decode_le_double(content.data() + offset + 8 * i);
    return DistanceMatrix(header["metric"].get<std::string>(), std::move(ids), std::move(values));
  }

  json doc = json::parse(content, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("matrix"))
    throw ParseError(source_name, 1, "neither a binary-header nor a JSON distance matrix");
  auto ids = parse_ids(doc, source_name);
  std::vector<double> values;
  for (const auto& row : doc["matrix"]) {
    if (row.is_array()) {
      for (const auto& v : row) {
        if (!v.is_number()) throw ParseError(source_name, 1, "matrix entries must be numbers");
        values.push_back(v.get<double>());
      }
    } else if (row.is_number()) {
      values.push_back(row.get<double>());
    } else {
      throw ParseError(source_name, 1, "matrix entries must be numbers");
    }
  }
  return DistanceMatrix(doc["metric"].get<std::string>(), std::move(ids), std::move(values));
}

DistanceMatrix load_distance_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open distance matrix '" + path.string() + "'");
  return read_distance_matrix(in, path.string());
}

void write_distance_matrix_binary(std::ostream& out, const DistanceMatrix& matrix) {
  out << json{{"metric", matrix.metric()}, {"ids", matrix.ids()}}.dump() << '\n';
  for (std::size_t i = 0; i < matrix.size(); ++i)
    for (std::size_t j = 0; j < matrix.size(); ++j) encode_le_double(out, matrix.at(i, j));
}

void write_distance_matrix_json(std::ostream& out, const DistanceMatrix& matrix) {
  json rows = json::array();
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < matrix.size(); ++j) row.push_back(matrix.at(i, j));
    rows.push_back(std::move(row));
  }
  out << json{{"metric", matrix.metric()}, {"ids", matrix.ids()}, {"matrix", rows}}.dump() << '\n';
}

// ---------------------------------------------------------------------------
// DistributionStore

void DistributionStore::insert(std::string id, metrics::ProbabilityDistribution dist) {
  metrics::validate(dist);
  if (dists_.contains(id)) throw DuplicateKeyError("duplicate distribution id '" + id + "'");
  dists_.emplace(std::move(id), std::move(dist));
}

const metrics::ProbabilityDistribution& DistributionStore::at(std::string_view id) const {
  auto it = dists_.find(id);
  if (it == dists_.end())
    throw ReferentialError("no distribution for text '" + std::string(id) + "'");
  return it->second;
}

DistributionStore read_distributions(std::istream& in, const std::string& source_name) {
  DistributionStore store;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) throw ParseError(source_name, number, "malformed JSON");
    if (!obj.contains("id") || !obj["id"].is_string() || !obj.contains("support") ||
        !obj["support"].is_array() || !obj.contains("mass") || !obj["mass"].is_array())
      throw ParseError(source_name, number, "expected {\"id\", \"support\", \"mass\"}");
    std::vector<std::int64_t> support;
    std::vector<double> mass;
    try {
      support = obj["support"].get<std::vector<std::int64_t>>();
      mass = obj["mass"].get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ParseError(source_name, number, e.what());
    }
    try {
      store.insert(obj["id"].get<std::string>(),
                   metrics::make_distribution(std::move(support), std::move(mass)));
    } catch (const NumericError& e) {
      throw DataError(source_name + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return store;
}

DistributionStore load_distributions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open distributions file '" + path.string() + "'");
  return read_distributions(in, path.string());
}

void write_distributions(std::ostream& out, const DistributionStore& store) {
  for (const auto& [id, d] : store.entries())
    out << json{{"id", id}, {"support", d.support}, {"mass", d.mass}}.dump() << '\n';
}

// ---------------------------------------------------------------------------
// Metric implementations

namespace {

using TokenDistance = double (*)(metrics::Tokens, metrics::Tokens);

class TokenMetric final : public DistanceMetric {
 public:
  TokenMetric(MetricKind kind, TokenDistance fn) : kind_(kind), fn_(fn) {}
  MetricKind kind() const noexcept override { return kind_; }
  double distance(const PreparedText& candidate, const PreparedText& reference) const override {
    return fn_(candidate.tokens, reference.tokens);
  }

 private:
  MetricKind kind_;
  TokenDistance fn_;
};

double jsd_tokens(metrics::Tokens a, metrics::Tokens b) { return metrics::jsd_distance(a, b); }

class MatrixMetric final : public DistanceMetric {
 public:
  explicit MatrixMetric(std::shared_ptr<const DistanceMatrix> m) : matrix_(std::move(m)) {}
  MetricKind kind() const noexcept override { return MetricKind::bscore; }
  double distance(const PreparedText& candidate, const PreparedText& reference) const override {
    return matrix_->lookup(candidate.key, reference.key);
  }

 private:
  std::shared_ptr<const DistanceMatrix> matrix_;
};

class InfoLmMetric final : public DistanceMetric {
 public:
  explicit InfoLmMetric(std::shared_ptr<const DistributionStore> s) : store_(std::move(s)) {}
  MetricKind kind() const noexcept override { return MetricKind::infolm; }
  double distance(const PreparedText& candidate, const PreparedText& reference) const override {
    return metrics::infolm_distance(store_->at(candidate.key), store_->at(reference.key));
  }

 private:
  std::shared_ptr<const DistributionStore> store_;
};

}  // namespace

std::unique_ptr<DistanceMetric> make_metric(MetricKind kind, const MetricResources& resources) {
  switch (kind) {
    case MetricKind::rouge_l:
      return std::make_unique<TokenMetric>(kind, &metrics::rouge_l_distance);
    case MetricKind::rouge_su4:
      return std::make_unique<TokenMetric>(kind, &metrics::rouge_su4_distance);
    case MetricKind::bleu1:
      return std::make_unique<TokenMetric>(kind, &metrics::bleu1_distance);
    case MetricKind::meteor:
      return std::make_unique<TokenMetric>(kind, &metrics::meteor_distance);
    case MetricKind::jsd:
      return std::make_unique<TokenMetric>(kind, &jsd_tokens);
    case MetricKind::bscore:
      if (!resources.bscore_matrix) throw DataError("metric bscore needs a distance matrix file");
      return std::make_unique<MatrixMetric>(resources.bscore_matrix);
    case MetricKind::infolm:
      if (!resources.infolm_distributions)
        throw DataError("metric infolm needs a distributions file");
      return std::make_unique<InfoLmMetric>(resources.infolm_distributions);
  }
  throw DataError("unsupported metric");
}

}  // namespace perseval
