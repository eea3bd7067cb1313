#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "perseval/engine.hpp"
#include "perseval/metaeval.hpp"

namespace perseval::report {

using metaeval::Ranking;

/// Splits one CSV record; understands double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line);
std::string csv_field(const std::string& value);

/// One row per (model, metric, level, doc, user); level is system, document,
/// or summary. Fields that do not apply at a level are left empty. Numbers use
/// the shortest representation that round-trips.
void write_scores_csv(std::ostream& out, const ScoreTable& table);
void write_scores_json(std::ostream& out, const ScoreTable& table);
/// Documents skipped for having fewer than two users: model,metric,doc_id.
void write_skip_csv(std::ostream& out, const ScoreTable& table);

/// rank,model,score,tied
void write_ranking_csv(std::ostream& out, const Ranking& ranking);
/// Reads the format written by write_ranking_csv. Ranks must be 1..N.
Ranking read_ranking_csv(std::istream& in, const std::string& source_name = "<stream>");

/// Reads any CSV with "model" and "score" columns (ranking files qualify).
std::map<ModelId, double> read_score_csv(std::istream& in,
                                         const std::string& source_name = "<stream>");
/// model,score
void write_score_csv(std::ostream& out, const std::map<ModelId, double>& scores);

/// Model rows in full-ranking order: model,full,<one column per fraction>,bias,variance
void write_stability_table_csv(std::ostream& out, const metaeval::StabilityReport& report);
/// fraction,set,spearman,kendall
void write_stability_samples_csv(std::ostream& out, const metaeval::StabilityReport& report);
/// fraction,set,rank,model,score,tied
void write_sample_rankings_csv(std::ostream& out, const metaeval::StabilityReport& report);
void write_stability_json(std::ostream& out, const metaeval::StabilityReport& report);

/// statistic,value,p_value,exact
void write_correlation_csv(std::ostream& out, const metaeval::CorrelationResult& result);

}  // namespace perseval::report
