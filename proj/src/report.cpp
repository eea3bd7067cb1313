#include "perseval/report.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "perseval/errors.hpp"

namespace perseval::report {

using nlohmann::json;
using metaeval::RankEntry;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  if (quoted) throw DataError("unterminated quoted CSV field");
  return fields;
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

namespace {

std::string num(double v) { return fmt::format("{}", v); }

struct Row {
  std::string doc;
  std::string user;
  std::string degress, egises, adp, acp, edp, perseval, accuracy, p_acc;
};

void emit(std::ostream& out, const ModelScores& s, const std::string& level, const Row& r) {
  out << csv_field(s.model_id) << ',' << to_string(s.metric) << ',' << level << ','
      << csv_field(r.doc) << ',' << csv_field(r.user) << ',' << r.degress << ',' << r.egises << ','
      << r.adp << ',' << r.acp << ',' << r.edp << ',' << r.perseval << ',' << r.accuracy << ','
      << r.p_acc << '\n';
}

// Reads the header and data rows of a CSV stream, skipping blank lines.
std::vector<std::vector<std::string>> read_rows(std::istream& in, const std::string& source,
                                                std::vector<std::string>& header) {
  std::string line;
  std::size_t number = 0;
  std::vector<std::vector<std::string>> rows;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields;
    try {
      fields = split_csv_line(line);
    } catch (const DataError& e) {
      throw ParseError(source, number, e.what());
    }
    if (!have_header) {
      header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != header.size())
      throw ParseError(source, number,
                       fmt::format("expected {} fields, found {}", header.size(), fields.size()));
    rows.push_back(std::move(fields));
  }
  if (!have_header) throw DataError(source + ": empty CSV file");
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name,
                   const std::string& source) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError(source + ": missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

double parse_double(const std::string& s, const std::string& source) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(source + ": not a number: '" + s + "'");
  }
}

}  // namespace

void write_scores_csv(std::ostream& out, const ScoreTable& table) {
  out << "model,metric,level,doc_id,user_id,degress,egises,adp,acp,edp,perseval,accuracy,p_acc\n";
  for (const auto& [key, s] : table) {
    const auto& sys = s.system;
    emit(out, s, "system",
         {"", "", num(sys.degress), num(sys.egises), num(sys.adp), num(sys.acp), num(sys.edp),
          num(sys.perseval), num(sys.accuracy), num(sys.p_acc)});
    for (const auto& d : s.documents) {
      emit(out, s, "document",
           {d.doc_id, "", num(d.degress), num(1.0 - d.degress), num(d.adp), num(d.acp),
            num(d.edp), num(d.perseval), num(d.accuracy), ""});
      for (const auto& u : d.summaries) {
        emit(out, s, "summary",
             {d.doc_id, u.user_id, num(u.degress), num(1.0 - u.degress), num(d.adp), num(u.acp),
              num(u.edp), num(u.perseval), num(1.0 - u.accuracy_distance), ""});
      }
    }
  }
}

void write_scores_json(std::ostream& out, const ScoreTable& table) {
  json all = json::array();
  for (const auto& [key, s] : table) {
    json docs = json::array();
    for (const auto& d : s.documents) {
      json users = json::array();
      for (const auto& u : d.summaries)
        users.push_back({{"user_id", u.user_id},
                         {"degress", u.degress},
                         {"acp", u.acp},
                         {"dgp", u.dgp},
                         {"edp", u.edp},
                         {"perseval", u.perseval},
                         {"accuracy_distance", u.accuracy_distance}});
      docs.push_back({{"doc_id", d.doc_id},
                      {"degress", d.degress},
                      {"adp", d.adp},
                      {"acp", d.acp},
                      {"edp", d.edp},
                      {"perseval", d.perseval},
                      {"accuracy", d.accuracy},
                      {"summaries", std::move(users)}});
    }
    const auto& sys = s.system;
    all.push_back({{"model", s.model_id},
                   {"metric", std::string(to_string(s.metric))},
                   {"system",
                    {{"degress", sys.degress},
                     {"egises", sys.egises},
                     {"adp", sys.adp},
                     {"acp", sys.acp},
                     {"edp", sys.edp},
                     {"perseval", sys.perseval},
                     {"accuracy", sys.accuracy},
                     {"p_acc", sys.p_acc}}},
                   {"skipped", s.skipped},
                   {"documents", std::move(docs)}});
  }
  out << all.dump(2) << '\n';
}

void write_skip_csv(std::ostream& out, const ScoreTable& table) {
  out << "model,metric,doc_id\n";
  for (const auto& [key, s] : table)
    for (const auto& doc : s.skipped)
      out << csv_field(s.model_id) << ',' << to_string(s.metric) << ',' << csv_field(doc) << '\n';
}

void write_ranking_csv(std::ostream& out, const Ranking& ranking) {
  out << "rank,model,score,tied\n";
  for (const auto& e : ranking.entries)
    out << e.rank << ',' << csv_field(e.model_id) << ',' << num(e.score) << ','
        << (e.tied ? "true" : "false") << '\n';
}

Ranking read_ranking_csv(std::istream& in, const std::string& source_name) {
  std::vector<std::string> header;
  const auto rows = read_rows(in, source_name, header);
  const auto c_rank = column(header, "rank", source_name);
  const auto c_model = column(header, "model", source_name);
  const auto c_score = std::find(header.begin(), header.end(), "score") - header.begin();
  const auto c_tied = std::find(header.begin(), header.end(), "tied") - header.begin();

  Ranking r;
  for (const auto& row : rows) {
    RankEntry e;
    e.model_id = row[c_model];
    const double rank = parse_double(row[c_rank], source_name);
    if (rank != std::floor(rank)) throw DataError(source_name + ": rank must be an integer");
    e.rank = static_cast<int>(rank);
    if (static_cast<std::size_t>(c_score) < header.size())
      e.score = parse_double(row[c_score], source_name);
    if (static_cast<std::size_t>(c_tied) < header.size()) e.tied = row[c_tied] == "true";
    r.entries.push_back(std::move(e));
  }
  std::stable_sort(r.entries.begin(), r.entries.end(),
                   [](const RankEntry& a, const RankEntry& b) { return a.rank < b.rank; });
  for (std::size_t i = 0; i < r.entries.size(); ++i)
    if (r.entries[i].rank != static_cast<int>(i + 1))
      throw DataError(source_name + ": ranks must be 1.." + std::to_string(r.entries.size()));
  return r;
}

std::map<ModelId, double> read_score_csv(std::istream& in, const std::string& source_name) {
  std::vector<std::string> header;
  const auto rows = read_rows(in, source_name, header);
  const auto c_model = column(header, "model", source_name);
  const auto c_score = column(header, "score", source_name);
  std::map<ModelId, double> out;
  for (const auto& row : rows)
    if (!out.emplace(row[c_model], parse_double(row[c_score], source_name)).second)
      throw DuplicateKeyError(source_name + ": model '" + row[c_model] + "' listed twice");
  if (out.empty()) throw DataError(source_name + ": no scores");
  return out;
}

void write_score_csv(std::ostream& out, const std::map<ModelId, double>& scores) {
  out << "model,score\n";
  for (const auto& [model, score] : scores) out << csv_field(model) << ',' << num(score) << '\n';
}

void write_stability_table_csv(std::ostream& out, const metaeval::StabilityReport& report) {
  out << "model,full";
  for (double f : report.fractions) out << ',' << num(f);
  out << ",bias,variance\n";
  for (const auto& m : report.models) {
    out << csv_field(m.model_id) << ',' << num(m.full_score);
    for (double v : m.fraction_means) out << ',' << num(v);
    out << ',' << num(m.bias) << ',' << num(m.variance) << '\n';
  }
}

void write_stability_samples_csv(std::ostream& out, const metaeval::StabilityReport& report) {
  out << "fraction,set,spearman,kendall\n";
  for (const auto& s : report.samples)
    out << num(s.fraction) << ',' << s.set_index << ',' << num(s.spearman) << ','
        << num(s.kendall) << '\n';
}

void write_sample_rankings_csv(std::ostream& out, const metaeval::StabilityReport& report) {
  out << "fraction,set,rank,model,score,tied\n";
  for (const auto& s : report.samples)
    for (const auto& e : s.ranking.entries)
      out << num(s.fraction) << ',' << s.set_index << ',' << e.rank << ',' << csv_field(e.model_id)
          << ',' << num(e.score) << ',' << (e.tied ? "true" : "false") << '\n';
}

void write_stability_json(std::ostream& out, const metaeval::StabilityReport& report) {
  json models = json::array();
  for (const auto& m : report.models)
    models.push_back({{"model", m.model_id},
                      {"full", m.full_score},
                      {"fraction_means", m.fraction_means},
                      {"bias", m.bias},
                      {"variance", m.variance}});
  json j = {{"fractions", report.fractions},
            {"epsilon_spearman", report.epsilon_spearman},
            {"epsilon_kendall", report.epsilon_kendall},
            {"delta_stability", report.delta_stability},
            {"full_ranking", report.full_ranking.order()},
            {"models", std::move(models)}};
  out << j.dump(2) << '\n';
}

void write_correlation_csv(std::ostream& out, const metaeval::CorrelationResult& r) {
  const char* exact = r.exact_p ? "true" : "false";
  out << "statistic,value,p_value,exact\n";
  out << "pearson," << num(r.pearson) << ",,\n";
  out << "spearman," << num(r.spearman) << ',' << num(r.spearman_p) << ',' << exact << '\n';
  out << "kendall," << num(r.kendall) << ',' << num(r.kendall_p) << ',' << exact << '\n';
}

}  // namespace perseval::report
