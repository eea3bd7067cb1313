#include "perseval/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "perseval/corpus.hpp"
#include "perseval/distance_metric.hpp"
#include "perseval/engine.hpp"
#include "perseval/errors.hpp"
#include "perseval/human_judgment.hpp"
#include "perseval/metaeval.hpp"
#include "perseval/report.hpp"

namespace perseval::cli {

namespace fs = std::filesystem;
using metaeval::leaderboard;
using metaeval::Measure;
using metaeval::Ranking;

std::map<std::string, std::string> parse_config(std::istream& in, const std::string& source_name) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t number = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source_name, number, "expected key = value");
    auto key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw ParseError(source_name, number, "empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

namespace {

struct Options {
  std::string config;
  std::string corpus;
  std::string models;
  std::string metrics = "rouge_l";
  std::string out;
  std::string bscore_matrix;
  std::string infolm_dists;
  double alpha = 3.0;
  double beta = 1.7;
  double gamma = 4.0;
  double epsilon = 1e-8;
  double pacc_alpha = 0.5;
  double pacc_beta = 1.0;
  bool no_self_term = false;
  std::uint64_t seed = 0;
  int jobs = 0;

  // stability
  std::string metric = "rouge_l";
  std::string measure = "perseval";
  std::string fractions = "0.8,0.6,0.4,0.2";
  int sets = 10;

  // correlate / aggregate
  std::vector<std::string> inputs;

  // surrogates / hj
  std::string pool;
  int threshold = 6;
  std::string ratings;
  std::string source = "ratings";
  std::string accuracy_metric = "rouge_l";
  std::string compare_metric;
  int scale_min = 1;
  int scale_max = 6;
  std::string beta_grid;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw DataError(what + ": not a number: '" + item + "'");
    }
  }
  if (out.empty()) throw DataError(what + " is empty");
  return out;
}

std::vector<MetricKind> parse_metrics(const std::string& s) {
  if (s == "all") return {all_metric_kinds().begin(), all_metric_kinds().end()};
  std::vector<MetricKind> out;
  for (const auto& name : split_list(s)) {
    const auto kind = parse_metric_kind(name);
    if (std::find(out.begin(), out.end(), kind) == out.end()) out.push_back(kind);
  }
  if (out.empty()) throw DataError("no metrics selected");
  return out;
}

int resolve_jobs(int flag) {
  if (const char* env = std::getenv("PERSEVAL_JOBS"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const int v = std::stoi(env, &used);
      if (used == std::string(env).size() && v >= 0) return v;
    } catch (const std::exception&) {
    }
    throw DataError(std::string("PERSEVAL_JOBS must be a non-negative integer, got '") + env + "'");
  }
  if (flag < 0) throw DataError("--jobs must be non-negative");
  return flag;
}

PenaltyConfig penalty(const Options& o) {
  PenaltyConfig c{o.alpha, o.beta, o.gamma, o.epsilon};
  c.validate();
  return c;
}

PAccConfig pacc(const Options& o) {
  PAccConfig c{o.pacc_alpha, o.pacc_beta};
  c.validate();
  return c;
}

MetricResources resources(const Options& o) {
  MetricResources r;
  if (!o.bscore_matrix.empty())
    r.bscore_matrix = std::make_shared<DistanceMatrix>(load_distance_matrix(o.bscore_matrix));
  if (!o.infolm_dists.empty())
    r.infolm_distributions = std::make_shared<DistributionStore>(load_distributions(o.infolm_dists));
  return r;
}

std::vector<ModelId> select_models(const EvaluationCorpus& corpus, const std::string& filter) {
  auto all = corpus.models();
  if (filter.empty()) {
    if (all.empty()) throw DataError("corpus contains no generated summaries");
    return all;
  }
  std::vector<ModelId> out;
  for (const auto& m : split_list(filter)) {
    if (std::find(all.begin(), all.end(), m) == all.end())
      throw ReferentialError("model '" + m + "' has no summaries in the corpus");
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  std::sort(out.begin(), out.end());
  return out;
}

fs::path output_dir(const Options& o) {
  if (o.out.empty()) throw DataError("--out is required");
  fs::path dir(o.out);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& fn) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  fn(f);
  if (!f) throw DataError("failed writing " + path.string());
}

// Echoes every option of the subcommand with its resolved value so the run can
// be repeated with --config.
void write_resolved_config(const fs::path& dir, const CLI::App& sub, int jobs) {
  write_file(dir / "resolved_config.txt", [&](std::ostream& f) {
    for (const auto* opt : sub.get_options()) {
      if (opt->get_lnames().empty()) continue;
      const auto& name = opt->get_lnames().front();
      if (name == "help" || name == "config") continue;
      std::string value;
      if (name == "jobs") {
        value = std::to_string(jobs);
      } else if (!opt->results().empty()) {
        const auto r = opt->reduced_results();
        for (std::size_t i = 0; i < r.size(); ++i) value += (i ? "," : "") + r[i];
      } else {
        value = opt->get_default_str();
      }
      if (value.empty() && opt->get_expected_min() == 0) value = "false";
      if (value.empty()) continue;
      f << name << " = " << value << '\n';
    }
  });
}

void add_corpus_options(CLI::App* sub, Options& o) {
  sub->add_option("--corpus", o.corpus, "corpus JSONL file")->required();
  sub->add_option("--models", o.models, "comma-separated model filter (default: all)");
  sub->add_option("--bscore-matrix", o.bscore_matrix, "precomputed bscore distance matrix")
      ;
  sub->add_option("--infolm-dists", o.infolm_dists, "precomputed infolm token distributions")
      ;
}

void add_penalty_options(CLI::App* sub, Options& o) {
  sub->add_option("--alpha", o.alpha, "EDP shift exponent (>= 3)");
  sub->add_option("--beta", o.beta, "EDP slope exponent (>= 1)");
  sub->add_option("--gamma", o.gamma, "ADP/ACP shift exponent (>= 4)");
  sub->add_option("--epsilon", o.epsilon, "stabilising constant");
  sub->add_option("--pacc-alpha", o.pacc_alpha, "P-Acc penalty weight in [0, 1]");
  sub->add_option("--pacc-beta", o.pacc_beta, "P-Acc logistic slope in (0, 1]");
  sub->add_flag("--no-self-term", o.no_self_term, "drop the k = j term from DEGRESS");
}

void add_run_options(CLI::App* sub, Options& o, bool out_required = true) {
  auto* out = sub->add_option("--out", o.out, "output directory");
  if (out_required) out->required();
  sub->add_option("--seed", o.seed, "random seed");
  sub->add_option("--jobs", o.jobs, "worker threads (0 = all cores; PERSEVAL_JOBS overrides)");
  sub->add_option("--config", o.config, "flat key = value file of option defaults");
}

std::string leaderboard_line(const Ranking& r) {
  std::string s;
  for (const auto& e : r.entries)
    s += fmt::format("  {:>3}{} {:<24} {}\n", e.rank, e.tied ? "=" : " ", e.model_id, e.score);
  return s;
}

// ---------------------------------------------------------------------------

int cmd_evaluate(const Options& o, const CLI::App& sub, std::ostream& out) {
  const int jobs = resolve_jobs(o.jobs);
  const auto config = penalty(o);
  const auto pc = pacc(o);
  const auto metrics = parse_metrics(o.metrics);
  const auto corpus = load_corpus(o.corpus);
  const auto models = select_models(corpus, o.models);
  const auto res = resources(o);
  const EngineOptions engine{!o.no_self_term, jobs};

  ScoreTable table;
  for (auto kind : metrics) {
    const auto metric = make_metric(kind, res);
    for (const auto& model : models)
      table.emplace(std::pair{model, kind},
                    score_model(corpus, model, *metric, config, pc, engine));
  }

  const auto dir = output_dir(o);
  write_file(dir / "scores.csv", [&](std::ostream& f) { report::write_scores_csv(f, table); });
  write_file(dir / "scores.json", [&](std::ostream& f) { report::write_scores_json(f, table); });
  write_file(dir / "skipped.csv", [&](std::ostream& f) { report::write_skip_csv(f, table); });
  for (auto kind : metrics) {
    const auto name = std::string(to_string(kind));
    const auto pse = leaderboard(table, kind, Measure::perseval);
    const auto egises = leaderboard(table, kind, Measure::egises);
    write_file(dir / ("leaderboard_" + name + ".csv"),
               [&](std::ostream& f) { report::write_ranking_csv(f, pse); });
    write_file(dir / ("leaderboard_" + name + "_egises.csv"),
               [&](std::ostream& f) { report::write_ranking_csv(f, egises); });
    out << "PerSEval (" << name << ")\n" << leaderboard_line(pse);
  }
  const auto skipped = corpus.flagged_documents();
  if (!skipped.empty())
    out << skipped.size() << " document(s) with fewer than two users skipped; see skipped.csv\n";
  write_resolved_config(dir, sub, jobs);
  return kExitOk;
}

int cmd_stability(const Options& o, const CLI::App& sub, std::ostream& out) {
  const int jobs = resolve_jobs(o.jobs);
  const auto config = penalty(o);
  const auto pc = pacc(o);
  const auto kind = parse_metric_kind(o.metric);
  const auto measure = metaeval::parse_measure(o.measure);
  const auto fractions = parse_doubles(o.fractions, "--fractions");
  if (o.sets < 1) throw DataError("--sets must be positive");
  const auto corpus = load_corpus(o.corpus);
  const auto models = select_models(corpus, o.models);
  const auto metric = make_metric(kind, resources(o));
  const EngineOptions engine{!o.no_self_term, jobs};

  // Each document is scored once; samples re-aggregate the cached scores.
  std::map<ModelId, ModelScores> cache;
  for (const auto& model : models)
    cache.emplace(model, score_model(corpus, model, *metric, config, pc, engine));
  const metaeval::SystemScorer scorer = [&](std::span<const DocId> docs) {
    std::map<ModelId, double> scores;
    for (const auto& [model, ms] : cache)
      scores[model] = metaeval::measure_value(aggregate_over(ms, docs, pc), measure);
    return scores;
  };

  const auto collections = sample_collections(corpus, fractions, o.sets, o.seed);
  const auto rep = metaeval::stability_report(corpus, collections, scorer,
                                              metaeval::direction_of(measure), jobs);

  const auto dir = output_dir(o);
  write_file(dir / "stability_table.csv",
             [&](std::ostream& f) { report::write_stability_table_csv(f, rep); });
  write_file(dir / "stability_samples.csv",
             [&](std::ostream& f) { report::write_stability_samples_csv(f, rep); });
  write_file(dir / "sample_rankings.csv",
             [&](std::ostream& f) { report::write_sample_rankings_csv(f, rep); });
  write_file(dir / "full_ranking.csv",
             [&](std::ostream& f) { report::write_ranking_csv(f, rep.full_ranking); });
  write_file(dir / "stability.json",
             [&](std::ostream& f) { report::write_stability_json(f, rep); });
  out << fmt::format("epsilon_spearman {}\nepsilon_kendall {}\ndelta_stability {}\n",
                     rep.epsilon_spearman, rep.epsilon_kendall, rep.delta_stability);
  write_resolved_config(dir, sub, jobs);
  return kExitOk;
}

std::map<ModelId, double> load_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return report::read_score_csv(in, path);
}

int cmd_correlate(const Options& o, const CLI::App& sub, std::ostream& out) {
  if (o.inputs.size() != 2) throw DataError("correlate takes exactly two score files");
  const auto a = load_scores(o.inputs[0]);
  const auto b = load_scores(o.inputs[1]);
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& [model, v] : a) {
    auto it = b.find(model);
    if (it == b.end()) throw ReferentialError("model '" + model + "' missing from " + o.inputs[1]);
    x.push_back(v);
    y.push_back(it->second);
  }
  if (b.size() != a.size()) throw ReferentialError("score files cover different model sets");
  const auto r = metaeval::correlate(x, y, o.seed);
  report::write_correlation_csv(out, r);
  if (!o.out.empty()) {
    const auto dir = output_dir(o);
    write_file(dir / "correlation.csv", [&](std::ostream& f) { report::write_correlation_csv(f, r); });
    write_resolved_config(dir, sub, resolve_jobs(o.jobs));
  }
  return kExitOk;
}

int cmd_aggregate(const Options& o, const CLI::App& sub, std::ostream& out) {
  if (o.inputs.empty()) throw DataError("aggregate needs at least one ranking file");
  std::vector<Ranking> rankings;
  for (const auto& path : o.inputs) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    rankings.push_back(report::read_ranking_csv(in, path));
  }
  const auto agg = metaeval::borda_kendall(rankings);
  report::write_ranking_csv(out, agg);
  if (!o.out.empty()) {
    const auto dir = output_dir(o);
    write_file(dir / "aggregated_ranking.csv",
               [&](std::ostream& f) { report::write_ranking_csv(f, agg); });
    write_resolved_config(dir, sub, resolve_jobs(o.jobs));
  }
  return kExitOk;
}

int cmd_surrogates(const Options& o, const CLI::App& sub, std::ostream& out, std::ostream& err) {
  const auto pool = load_rated_pool(o.pool);
  const auto built = build_surrogates(pool, o.threshold);
  for (const auto& w : built.warnings) err << "warning: " << w << '\n';
  const auto dir = output_dir(o);
  write_file(dir / "corpus.jsonl", [&](std::ostream& f) { write_corpus(f, built.corpus); });
  out << fmt::format("{} documents, {} users, {} models\n", built.corpus.documents().size(),
                     [&] {
                       std::set<UserId> users;
                       for (const auto& [doc, golds] : built.corpus.golds())
                         for (const auto& [user, g] : golds) users.insert(user);
                       return users.size();
                     }(),
                     built.corpus.models().size());
  write_resolved_config(dir, sub, resolve_jobs(o.jobs));
  return kExitOk;
}

int cmd_hj(const Options& o, const CLI::App& sub, std::ostream& out) {
  const int jobs = resolve_jobs(o.jobs);
  const auto config = penalty(o);
  const auto pc = pacc(o);
  const auto corpus = load_corpus(o.corpus);
  const auto models = select_models(corpus, o.models);
  const auto res = resources(o);
  const auto accuracy_kind = parse_metric_kind(o.accuracy_metric);
  const auto compare_kind =
      o.compare_metric.empty() ? accuracy_kind : parse_metric_kind(o.compare_metric);
  const auto accuracy = make_metric(accuracy_kind, res);
  const auto compare = make_metric(compare_kind, res);
  const bool self = !o.no_self_term;

  std::unique_ptr<hj::PairDivergenceSource> source;
  if (o.source == "ratings") {
    if (o.ratings.empty()) throw DataError("--ratings is required for --source ratings");
    source = std::make_unique<hj::RatingDivergence>(std::make_shared<hj::HumanRatings>(
        hj::load_ratings(o.ratings, o.scale_min, o.scale_max)));
  } else if (o.source == "rating-difference") {
    if (o.pool.empty()) throw DataError("--pool is required for --source rating-difference");
    source = std::make_unique<hj::RatingDifferenceDivergence>(load_rated_pool(o.pool), o.threshold);
  } else {
    throw DataError("unknown divergence source '" + o.source + "'");
  }

  auto run_at = [&](const PenaltyConfig& c, ScoreTable* hj_table) {
    std::vector<double> hj_scores;
    std::vector<double> metric_scores;
    for (const auto& model : models) {
      auto hs = hj::perseval_hj(corpus, model, *source, *accuracy, c, pc, self);
      hj_scores.push_back(hs.system.perseval);
      metric_scores.push_back(
          score_model(corpus, model, *compare, c, pc, {self, jobs}).system.perseval);
      if (hj_table) hj_table->emplace(std::pair{model, accuracy_kind}, std::move(hs));
    }
    return std::pair{hj_scores, metric_scores};
  };

  ScoreTable table;
  const auto [hj_scores, metric_scores] = run_at(config, &table);
  const auto dir = output_dir(o);
  write_file(dir / "hj_scores.csv", [&](std::ostream& f) { report::write_scores_csv(f, table); });
  const auto board = leaderboard(table, accuracy_kind, Measure::perseval);
  write_file(dir / "hj_leaderboard.csv",
             [&](std::ostream& f) { report::write_ranking_csv(f, board); });
  out << "PerSEval-HJ\n" << leaderboard_line(board);

  if (models.size() >= 2) {
    const auto r = metaeval::correlate(hj_scores, metric_scores, o.seed);
    write_file(dir / "hj_correlation.csv",
               [&](std::ostream& f) { report::write_correlation_csv(f, r); });
    out << fmt::format("vs PerSEval ({}): r={} rho={} tau={}\n", to_string(compare_kind),
                       r.pearson, r.spearman, r.kendall);
  }

  if (!o.beta_grid.empty()) {
    if (models.size() < 2) throw NumericError("--beta-grid needs at least two models");
    const auto grid = parse_doubles(o.beta_grid, "--beta-grid");
    write_file(dir / "hj_beta_ablation.csv", [&](std::ostream& f) {
      f << "beta,pearson,spearman,kendall\n";
      for (double b : grid) {
        auto c = config;
        c.beta = b;
        c.validate();
        const auto [h, m] = run_at(c, nullptr);
        const auto r = metaeval::correlate(h, m, o.seed);
        f << fmt::format("{},{},{},{}\n", b, r.pearson, r.spearman, r.kendall);
      }
    });
  }
  write_resolved_config(dir, sub, jobs);
  return kExitOk;
}

// Splices `--key=value` pairs from the --config file in front of the user's
// own arguments so explicit flags win.
std::vector<std::string> expand_config(std::vector<std::string> args,
                                       const std::vector<std::string>& subcommands) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  const auto entries = parse_config(in, path);
  auto pos = std::find_first_of(args.begin(), args.end(), subcommands.begin(), subcommands.end());
  if (pos == args.end()) return args;
  std::vector<std::string> injected;
  for (const auto& [key, value] : entries)
    if (key != "config") injected.push_back("--" + key + "=" + value);
  args.insert(pos + 1, injected.begin(), injected.end());
  return args;
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Personalization-aware evaluation of summarization models", "perseval"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  app.require_subcommand(1);

  auto* evaluate = app.add_subcommand("evaluate", "score models and write leaderboards");
  add_corpus_options(evaluate, o);
  evaluate->add_option("--metrics", o.metrics, "comma-separated metrics, or 'all'");
  add_penalty_options(evaluate, o);
  add_run_options(evaluate, o);

  auto* stability = app.add_subcommand("stability", "rank stability over sampled sub-corpora");
  add_corpus_options(stability, o);
  stability->add_option("--metric", o.metric, "distance metric");
  stability->add_option("--measure", o.measure, "system measure to rank by");
  stability->add_option("--fractions", o.fractions, "comma-separated sampling fractions");
  stability->add_option("--sets", o.sets, "sample sets per fraction");
  add_penalty_options(stability, o);
  add_run_options(stability, o);

  auto* correlate = app.add_subcommand("correlate", "correlate two model,score files");
  correlate->add_option("files", o.inputs, "two score CSV files")->required()->expected(2)
      ;
  add_run_options(correlate, o, false);

  auto* aggregate = app.add_subcommand("aggregate", "Borda-Kendall consensus of rankings");
  aggregate->add_option("files", o.inputs, "ranking CSV files")->required()->expected(1, -1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  add_run_options(aggregate, o, false);

  auto* surrogates = app.add_subcommand("surrogates", "build a corpus from a rated pool");
  surrogates->add_option("--pool", o.pool, "rated pool JSONL")->required();
  surrogates->add_option("--threshold", o.threshold, "ratings strictly above this form the gold");
  add_run_options(surrogates, o);

  auto* hj = app.add_subcommand("hj", "PerSEval from human similarity ratings");
  add_corpus_options(hj, o);
  hj->add_option("--ratings", o.ratings, "ratings JSONL");
  hj->add_option("--source", o.source, "divergence source: ratings or rating-difference");
  hj->add_option("--pool", o.pool, "rated pool for --source rating-difference")
      ;
  hj->add_option("--threshold", o.threshold, "surrogate threshold of the rated pool");
  hj->add_option("--accuracy-metric", o.accuracy_metric, "metric for document/gold distances");
  hj->add_option("--compare-metric", o.compare_metric, "metric of the PerSEval compared against");
  hj->add_option("--scale-min", o.scale_min, "lowest rating");
  hj->add_option("--scale-max", o.scale_max, "highest rating");
  hj->add_option("--beta-grid", o.beta_grid, "comma-separated beta values for an ablation CSV");
  add_penalty_options(hj, o);
  add_run_options(hj, o);

  try {
    std::vector<std::string> names;
    for (const auto* s : app.get_subcommands({})) names.push_back(s->get_name());
    args = expand_config(std::move(args), names);
    std::reverse(args.begin(), args.end());
    try {
      app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
      return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    if (evaluate->parsed()) return cmd_evaluate(o, *evaluate, out);
    if (stability->parsed()) return cmd_stability(o, *stability, out);
    if (correlate->parsed()) return cmd_correlate(o, *correlate, out);
    if (aggregate->parsed()) return cmd_aggregate(o, *aggregate, out);
    if (surrogates->parsed()) return cmd_surrogates(o, *surrogates, out, err);
    if (hj->parsed()) return cmd_hj(o, *hj, out);
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace perseval::cli
