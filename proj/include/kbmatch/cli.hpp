#pragma once

// Command-line front end. `run_cli` is the whole program; the executable in
// tools/ only forwards argv, so tests drive it in-process.
//
// Exit codes: 0 success, 1 internal error, 2 usage error, 3 missing or
// unreadable file, 4 invalid parameter, 5 unparsable config file.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kbmatch/baseline.hpp"
#include "kbmatch/blocking.hpp"
#include "kbmatch/error.hpp"
#include "kbmatch/evaluation.hpp"
#include "kbmatch/matching.hpp"
#include "kbmatch/parallel.hpp"
#include "kbmatch/synthetic.hpp"
#include "kbmatch/triples.hpp"

namespace kbmatch {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitMissingFile = 3,
  kExitInvalidParameter = 4,
  kExitBadConfig = 5,
};

struct RunConfig {
  std::string kb1;
  std::string kb2;
  std::string truth;
  MatcherConfig matcher;
  std::size_t workers = 1;
  std::string out = "out";
  std::string command;

  // sweep
  std::string sweep_param = "all";
  bool full_grid = false;

  // match
  bool dump_graph = false;

  // generate
  std::size_t entities = 10000;
  std::uint64_t seed = 42;
};

namespace detail {

struct Inputs {
  KnowledgeBase first;
  KnowledgeBase second;
  std::optional<ResolvedTruth> truth;
};

inline Inputs load_inputs(const RunConfig& cfg, std::ostream& err, bool need_truth) {
  if (cfg.kb1.empty() || cfg.kb2.empty()) throw ConfigError("--kb1 and --kb2 are required");
  if (need_truth && cfg.truth.empty()) throw ConfigError("--truth is required for " + cfg.command);
  Inputs in;
  auto a = load_triples(cfg.kb1, Side::kFirst);
  auto b = load_triples(cfg.kb2, Side::kSecond);
  if (a.malformed_lines) err << "warning: " << a.malformed_lines << " malformed lines skipped in " << cfg.kb1 << "\n";
  if (b.malformed_lines) err << "warning: " << b.malformed_lines << " malformed lines skipped in " << cfg.kb2 << "\n";
  in.first = std::move(a.kb);
  in.second = std::move(b.kb);
  if (!cfg.truth.empty()) {
    auto t = load_ground_truth(cfg.truth);
    if (t.malformed_lines) err << "warning: " << t.malformed_lines << " malformed ground-truth lines skipped\n";
    if (t.conflicting_pairs) err << "warning: " << t.conflicting_pairs << " non 1-to-1 ground-truth pairs skipped\n";
    in.truth = resolve(t.truth, in.first, in.second);
  }
  return in;
}

inline std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const auto path = (std::filesystem::path(dir) / name).string();
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  return os;
}

inline nlohmann::json config_json(const MatcherConfig& m) {
  return {{"k", m.k}, {"K", m.K}, {"N", m.N}, {"theta", m.theta}, {"purge_fraction", m.purge_fraction}};
}

inline int cmd_match(const RunConfig& cfg, WorkerPool& pool, std::ostream& out, std::ostream& err) {
  cfg.matcher.validate();
  const auto in = load_inputs(cfg, err, false);
  const auto run = run_pipeline(in.first, in.second, cfg.matcher, pool);

  auto mf = open_out(cfg.out, "matches.tsv");
  write_matches(mf, run.matches, in.first, in.second);
  auto tf = open_out(cfg.out, "timings.tsv");
  for (const auto& t : run.timings) tf << t.stage << '\t' << t.seconds << '\n';
  if (cfg.dump_graph) {
    auto gf = open_out(cfg.out, "graph.tsv");
    write_graph(gf, run.graph, in.first, in.second);
  }

  nlohmann::json j;
  j["config"] = config_json(cfg.matcher);
  j["entities"] = {{"kb1", in.first.size()}, {"kb2", in.second.size()}};
  j["matches"] = run.matches.size();
  j["graph_edges"] = run.graph.edge_count();
  std::ostringstream text;
  if (in.truth) {
    const auto report = evaluate(run, *in.truth);
    j["evaluation"] = to_json(report);
    write_report_text(text, report);
  } else {
    nlohmann::json timings = nlohmann::json::object();
    for (const auto& t : run.timings) timings[t.stage] = t.seconds;
    j["timings"] = timings;
    text << "matches " << run.matches.size() << "\n";
  }
  auto jf = open_out(cfg.out, "report.json");
  jf << j.dump(2) << '\n';
  auto rf = open_out(cfg.out, "report.txt");
  rf << text.str();
  out << text.str();
  return kExitOk;
}

inline int cmd_blocks(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  cfg.matcher.validate();
  const auto in = load_inputs(cfg, err, true);
  const auto blocks = build_blocks(in.first, in.second, cfg.matcher.k, cfg.matcher.purge_fraction);
  const auto stats = block_stats(blocks, in.first, in.second, *in.truth);
  const auto j = to_json(stats);
  auto jf = open_out(cfg.out, "blocks.json");
  jf << j.dump(2) << '\n';
  std::ostringstream text;
  text << "name blocks    " << stats.name_blocks << "  comparisons " << stats.name_comparisons << "\n"
       << "token blocks   " << stats.token_blocks << "  comparisons " << stats.token_comparisons << "  purged "
       << stats.purged_blocks << "\n"
       << "precision      " << format_percent(stats.precision) << "\n"
       << "recall         " << format_percent(stats.recall) << "\n"
       << "f1             " << format_percent(stats.f1) << "\n";
  auto rf = open_out(cfg.out, "report.txt");
  rf << text.str();
  out << text.str();
  return kExitOk;
}

inline int cmd_bsl(const RunConfig& cfg, WorkerPool& pool, std::ostream& out, std::ostream& err) {
  cfg.matcher.validate();
  const auto in = load_inputs(cfg, err, true);
  const auto blocks = build_blocks(in.first, in.second, cfg.matcher.k, cfg.matcher.purge_fraction);
  const auto grid = bsl_grid_search(in.first, in.second, blocks, *in.truth, pool);

  auto cf = open_out(cfg.out, "bsl.csv");
  cf << "ngram,weighting,similarity,threshold,precision,recall,f1\n";
  for (const auto& r : grid.results) {
    cf << r.config.variant.ngram << ',' << weighting_name(r.config.variant.weighting) << ','
       << similarity_name(r.config.variant.similarity) << ',' << format_percent(r.config.threshold) << ','
       << format_percent(r.metrics.precision) << ',' << format_percent(r.metrics.recall) << ','
       << format_percent(r.metrics.f1) << '\n';
  }
  const auto& best = grid.best_result();
  nlohmann::json j;
  j["configurations"] = grid.results.size();
  j["candidate_pairs"] = grid.candidates;
  j["best"] = {{"ngram", best.config.variant.ngram},
               {"weighting", weighting_name(best.config.variant.weighting)},
               {"similarity", similarity_name(best.config.variant.similarity)},
               {"threshold", best.config.threshold},
               {"metrics", to_json(best.metrics)}};
  auto jf = open_out(cfg.out, "report.json");
  jf << j.dump(2) << '\n';
  std::ostringstream text;
  text << "configurations " << grid.results.size() << "\n"
       << "best           n=" << best.config.variant.ngram << " " << weighting_name(best.config.variant.weighting)
       << " " << similarity_name(best.config.variant.similarity) << " t=" << format_percent(best.config.threshold)
       << "\n"
       << "precision      " << format_percent(best.metrics.precision) << "\n"
       << "recall         " << format_percent(best.metrics.recall) << "\n"
       << "f1             " << format_percent(best.metrics.f1) << "\n";
  auto rf = open_out(cfg.out, "report.txt");
  rf << text.str();
  out << text.str();
  return kExitOk;
}

inline int cmd_ablate(const RunConfig& cfg, WorkerPool& pool, std::ostream& out, std::ostream& err) {
  cfg.matcher.validate();
  const auto in = load_inputs(cfg, err, true);
  const auto rows = rule_ablation(in.first, in.second, cfg.matcher, *in.truth, pool);
  nlohmann::json j = nlohmann::json::object();
  for (const auto& row : rows) j[row.name] = to_json(row.report);
  auto jf = open_out(cfg.out, "ablation.json");
  jf << j.dump(2) << '\n';
  std::ostringstream text;
  write_ablation_text(text, rows);
  auto rf = open_out(cfg.out, "ablation.txt");
  rf << text.str();
  out << text.str();
  return kExitOk;
}

/// Parameter ranges of the sensitivity analysis.
inline std::vector<MatcherConfig> sweep_configs(const MatcherConfig& base, const std::string& param, bool full_grid) {
  const std::vector<std::size_t> ks = {1, 2, 3, 4, 5};
  const std::vector<std::size_t> big_ks = {5, 10, 15, 20, 25};
  const std::vector<std::size_t> ns = {1, 2, 3, 4, 5};
  const std::vector<double> thetas = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  std::vector<MatcherConfig> out;
  if (full_grid) {
    for (auto k : ks)
      for (auto K : big_ks)
        for (auto n : ns)
          for (auto t : thetas) {
            auto c = base;
            c.k = k;
            c.K = K;
            c.N = n;
            c.theta = t;
            out.push_back(c);
          }
    return out;
  }
  const bool all = param == "all";
  if (!all && param != "k" && param != "K" && param != "N" && param != "theta") {
    throw ConfigError("unknown sweep parameter: " + param);
  }
  if (all || param == "k") {
    for (auto v : ks) { auto c = base; c.k = v; out.push_back(c); }
  }
  if (all || param == "K") {
    for (auto v : big_ks) { auto c = base; c.K = v; out.push_back(c); }
  }
  if (all || param == "N") {
    for (auto v : ns) { auto c = base; c.N = v; out.push_back(c); }
  }
  if (all || param == "theta") {
    for (auto v : thetas) { auto c = base; c.theta = v; out.push_back(c); }
  }
  return out;
}

inline int cmd_sweep(const RunConfig& cfg, WorkerPool& pool, std::ostream& out, std::ostream& err) {
  cfg.matcher.validate();
  const auto configs = sweep_configs(cfg.matcher, cfg.sweep_param, cfg.full_grid);
  const auto in = load_inputs(cfg, err, true);
  auto cf = open_out(cfg.out, "sweep.csv");
  cf << "k,K,N,theta,precision,recall,f1\n";
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : configs) {
    const auto run = run_pipeline(in.first, in.second, c, pool);
    const auto report = evaluate(run, *in.truth);
    cf << c.k << ',' << c.K << ',' << c.N << ',' << c.theta << ',' << format_percent(report.metrics.precision)
       << ',' << format_percent(report.metrics.recall) << ',' << format_percent(report.metrics.f1) << '\n';
    j.push_back({{"config", config_json(c)}, {"evaluation", to_json(report)}});
  }
  auto jf = open_out(cfg.out, "sweep.json");
  jf << j.dump(2) << '\n';
  out << "runs " << configs.size() << "\n";
  return kExitOk;
}

inline int cmd_generate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.entities < 10) throw ConfigError("--entities must be >= 10");
  SyntheticConfig sc;
  sc.entities = cfg.entities;
  sc.seed = cfg.seed;
  const auto ds = generate_synthetic(sc);
  auto a = open_out(cfg.out, "kb1.tsv");
  write_triples(a, ds.first);
  auto b = open_out(cfg.out, "kb2.tsv");
  write_triples(b, ds.second);
  auto t = open_out(cfg.out, "truth.tsv");
  write_ground_truth(t, ds.truth);
  out << "entities " << ds.first.size() << "+" << ds.second.size() << "  pairs " << ds.truth.size() << "\n";
  return kExitOk;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Schema-agnostic entity resolution for pairs of knowledge bases"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Flat key = value file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);

  RunConfig cfg;
  app.add_option("--kb1", cfg.kb1, "First KB (triples)");
  app.add_option("--kb2", cfg.kb2, "Second KB (triples)");
  app.add_option("--truth", cfg.truth, "Ground truth (two ids per line)");
  app.add_option("--k", cfg.matcher.k, "Name attributes per KB")->capture_default_str();
  app.add_option("--big-k", cfg.matcher.K, "Candidates per node and evidence type")->capture_default_str();
  app.add_option("--n", cfg.matcher.N, "Top relations per entity")->capture_default_str();
  app.add_option("--theta", cfg.matcher.theta, "Value-rank weight in rank aggregation")->capture_default_str();
  app.add_option("--purge-fraction", cfg.matcher.purge_fraction, "Token-block comparison budget, fraction of |E1||E2|")
      ->capture_default_str();
  app.add_flag("!--name-discriminability", cfg.matcher.name_discriminability,
               "Rank name attributes by support only");
  app.add_option("--workers", cfg.workers, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--out", cfg.out, "Output directory")->capture_default_str();

  app.add_subcommand("match", "Run the full pipeline")
      ->add_flag("--dump-graph", cfg.dump_graph, "Also write the pruned graph");
  app.add_subcommand("bsl", "Grid search of the value-only baseline");
  app.add_subcommand("blocks", "Block statistics");
  app.add_subcommand("ablate", "Per-rule evaluation");
  auto* sweep = app.add_subcommand("sweep", "Sensitivity sweep");
  sweep->add_option("--param", cfg.sweep_param, "k, K, N, theta or all (one at a time)")->capture_default_str();
  sweep->add_flag("--full-grid", cfg.full_grid, "Cartesian product of all four ranges");
  auto* gen = app.add_subcommand("generate", "Write a synthetic KB pair with ground truth");
  gen->add_option("--entities", cfg.entities, "Entities per KB")->capture_default_str();
  gen->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ConfigError& e) {
    err << "error: unparsable config file: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const CLI::FileError& e) {
    err << "error: " << e.what() << "\n";
    return kExitMissingFile;
  } catch (const CLI::ValidationError& e) {
    err << "error: invalid parameter: " << e.what() << "\n";
    return kExitInvalidParameter;
  } catch (const CLI::ConversionError& e) {
    err << "error: invalid parameter: " << e.what() << "\n";
    return kExitInvalidParameter;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    WorkerPool pool(cfg.workers);
    if (cfg.command == "match") return detail::cmd_match(cfg, pool, out, err);
    if (cfg.command == "blocks") return detail::cmd_blocks(cfg, out, err);
    if (cfg.command == "bsl") return detail::cmd_bsl(cfg, pool, out, err);
    if (cfg.command == "ablate") return detail::cmd_ablate(cfg, pool, out, err);
    if (cfg.command == "sweep") return detail::cmd_sweep(cfg, pool, out, err);
    if (cfg.command == "generate") return detail::cmd_generate(cfg, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitMissingFile;
  } catch (const ConfigError& e) {
    err << "error: invalid parameter: " << e.what() << "\n";
    return kExitInvalidParameter;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace kbmatch
