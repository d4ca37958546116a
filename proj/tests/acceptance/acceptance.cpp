// Acceptance runner. Prints one PASS/FAIL line per criterion.
//
//   kbmatch_acceptance [--only <id>] [--list]
//
// Exit status: 0 when every selected criterion passes, 77 when the only
// failures come from the host (missing dataset, too few cores), 1 otherwise.
// Real datasets are looked up under $KBMATCH_DATA_DIR/<name>/ as
// kb1.nt|kb1.tsv, kb2.nt|kb2.tsv and truth.tsv.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "kbmatch/kbmatch.hpp"
#include "support.hpp"

using namespace kbmatch;
namespace fs = std::filesystem;

namespace {

// Tolerances, pinned.
constexpr double kRestaurantMinPrf = 98.0;
constexpr double kRestaurantMaxSeconds = 120.0;
constexpr double kRestaurantNameBlocks = 83, kRestaurantTokenBlocks = 625, kBlockCountTolerance = 0.10;
constexpr double kRestaurantMinBlockingRecall = 99.0;
constexpr double kRestaurantR1F1 = 81.33, kRestaurantR1Tolerance = 3.0;
constexpr double kRestaurantR2F1 = 100.0, kRestaurantR2Tolerance = 2.0;
constexpr double kBbcF1 = 89.97, kBbcNoNeighborsF1 = 87.25, kBbcTolerance = 3.0;
constexpr std::size_t kSyntheticEntities = 50000;
constexpr double kMinRatioToBaseline = 0.95;
constexpr double kMinR3RecallShare = 20.0;  // recall points
constexpr double kMinRSquared = 0.95;
constexpr double kMinSpeedup = 3.0;
constexpr std::size_t kSpeedupWorkers = 8;
constexpr int kTimingRepeats = 9;

struct Outcome {
  bool pass = false;
  bool environmental = false;  // failure caused by the host, not the code
  std::string detail;
};

std::string fmt(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Dataset {
  KnowledgeBase first, second;
  ResolvedTruth truth;
};

std::optional<fs::path> find_file(const fs::path& dir, const char* stem) {
  for (auto ext : {".nt", ".tsv", ".txt"}) {
    auto p = dir / (std::string(stem) + ext);
    if (fs::exists(p)) return p;
  }
  return std::nullopt;
}

std::optional<Dataset> load_dataset(const char* name) {
  const char* root = std::getenv("KBMATCH_DATA_DIR");
  if (!root) return std::nullopt;
  const fs::path dir = fs::path(root) / name;
  auto a = find_file(dir, "kb1"), b = find_file(dir, "kb2"), t = find_file(dir, "truth");
  if (!a || !b || !t) return std::nullopt;
  Dataset d;
  d.first = load_triples(a->string(), Side::kFirst).kb;
  d.second = load_triples(b->string(), Side::kSecond).kb;
  d.truth = resolve(load_ground_truth(t->string()).truth, d.first, d.second);
  return d;
}

Outcome missing(const char* name) {
  return {false, true,
          std::string("dataset '") + name + "' not found under $KBMATCH_DATA_DIR; not evaluated on this host"};
}

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol + 1e-9; }

// ---------------------------------------------------------------------------

Outcome restaurant_end_to_end() {
  auto d = load_dataset("restaurant");
  if (!d) return missing("restaurant");
  WorkerPool pool(0);
  detail::Stopwatch clock;
  const auto run = run_pipeline(d->first, d->second, MatcherConfig{}, pool);
  const double secs = clock.lap();
  const auto m = evaluate(run, d->truth).metrics;
  const bool ok = m.precision >= kRestaurantMinPrf && m.recall >= kRestaurantMinPrf && m.f1 >= kRestaurantMinPrf &&
                  secs < kRestaurantMaxSeconds;
  return {ok, false,
          "P=" + fmt(m.precision) + " R=" + fmt(m.recall) + " F1=" + fmt(m.f1) + " time=" + fmt(secs) + "s"};
}

Outcome restaurant_blocks() {
  auto d = load_dataset("restaurant");
  if (!d) return missing("restaurant");
  const MatcherConfig c;
  const auto blocks = build_blocks(d->first, d->second, c.k, c.purge_fraction);
  const auto s = block_stats(blocks, d->first, d->second, d->truth);
  const bool ok = within(double(s.name_blocks), kRestaurantNameBlocks, kRestaurantNameBlocks * kBlockCountTolerance) &&
                  within(double(s.token_blocks), kRestaurantTokenBlocks, kRestaurantTokenBlocks * kBlockCountTolerance) &&
                  s.recall >= kRestaurantMinBlockingRecall;
  return {ok, false,
          "|B_N|=" + std::to_string(s.name_blocks) + " |B_T|=" + std::to_string(s.token_blocks) +
              " blocking recall=" + fmt(s.recall)};
}

Outcome restaurant_ablation() {
  auto d = load_dataset("restaurant");
  if (!d) return missing("restaurant");
  WorkerPool pool(0);
  const auto rows = rule_ablation(d->first, d->second, {}, d->truth, pool);
  const double r1 = rows[0].report.metrics.f1, r2 = rows[1].report.metrics.f1;
  const bool ok = within(r1, kRestaurantR1F1, kRestaurantR1Tolerance) && within(r2, kRestaurantR2F1, kRestaurantR2Tolerance);
  return {ok, false, "R1 F1=" + fmt(r1) + " R2 F1=" + fmt(r2)};
}

Outcome bbcmusic() {
  auto d = load_dataset("bbcmusic");
  if (!d) return missing("bbcmusic");
  WorkerPool pool(0);
  const auto rows = rule_ablation(d->first, d->second, {}, d->truth, pool);
  double full = 0, no_ngb = 0;
  for (const auto& r : rows) {
    if (r.name == "full") full = r.report.metrics.f1;
    if (r.name == "no_neighbors") no_ngb = r.report.metrics.f1;
  }
  const bool ok = within(full, kBbcF1, kBbcTolerance) && within(no_ngb, kBbcNoNeighborsF1, kBbcTolerance);
  return {ok, false, "F1=" + fmt(full) + " no_neighbors F1=" + fmt(no_ngb)};
}

Outcome synthetic_benchmark() {
  SyntheticConfig cfg;
  cfg.entities = kSyntheticEntities;
  const auto ds = generate_synthetic(cfg);
  const auto truth = resolve(ds.truth, ds.first, ds.second);

  // value similarity of every "near" planted pair must stay below 1
  double near_cap = 0;
  for (const auto& [uri, kind] : ds.kinds) {
    if (kind != PlantedKind::kNear) continue;
    const auto i = *ds.first.find(uri);
    near_cap = std::max(near_cap, value_sim(ds.first, i, ds.second, *truth.partner_of_first[i]));
  }

  WorkerPool pool(0);
  const auto run = run_pipeline(ds.first, ds.second, {}, pool);
  const auto report = evaluate(run, truth);
  const MatcherConfig c;
  const auto grid = bsl_grid_search(ds.first, ds.second, build_blocks(ds.first, ds.second, c.k, c.purge_fraction),
                                    truth, pool);
  const auto& best = grid.best_result();
  const double r3_share = 100.0 * double(report.rule(Rule::kR3).true_positives) / double(truth.size());
  const bool ok = near_cap < 1.0 && report.metrics.f1 >= kMinRatioToBaseline * best.metrics.f1 &&
                  r3_share >= kMinR3RecallShare;
  return {ok, false,
          "F1=" + fmt(report.metrics.f1) + " best BSL F1=" + fmt(best.metrics.f1) + " (n=" +
              std::to_string(best.config.variant.ngram) + " " + std::string(weighting_name(best.config.variant.weighting)) +
              " " + std::string(similarity_name(best.config.variant.similarity)) + " t=" + fmt(best.config.threshold) +
              ") ratio=" + fmt(report.metrics.f1 / std::max(best.metrics.f1, 1e-9), 3) + " R3 recall share=" +
              fmt(r3_share) + " near-pair max valueSim=" + fmt(near_cap, 3)};
}

// ---------------------------------------------------------------------------
// Property suites

struct Checker {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok) ++count;
  }
  std::size_t count = 0;
};

void check_value_sim_metric(Checker& c) {
  std::mt19937_64 rng(2024);
  const auto kb = kbtest::random_kb(rng, Side::kFirst, {.entities = 60, .vocabulary = 25, .max_values = 4});
  std::uniform_int_distribution<EntityIndex> pick(0, static_cast<EntityIndex>(kb.size() - 1));
  for (int trial = 0; trial < 1000; ++trial) {
    const auto i = pick(rng), j = pick(rng), z = pick(rng);
    const double ij = value_sim(kb, i, kb, j);
    c.expect(value_sim(kb, i, kb, i) >= 0.0, "non-negativity");
    c.expect(ij == value_sim(kb, j, kb, i), "symmetry");
    c.expect(value_sim(kb, i, kb, i) + 1e-12 >= ij, "self-similarity dominance");
    c.expect(ij + value_sim(kb, j, kb, z) <= value_sim(kb, i, kb, z) + value_sim(kb, j, kb, j) + 1e-12,
             "triangle inequality");
    c.expect(std::abs(ij - kbtest::oracle_value_sim(kb, i, kb, j)) < 1e-12, "oracle agreement");
  }
}

void check_gamma_brute_force(Checker& c) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 rng(100 + seed);
    const kbtest::RandomKbSpec spec{.entities = 20, .vocabulary = 30, .relations = 3, .link_probability = 0.6};
    auto s1 = spec, s2 = spec;
    s1.prefix = "a";
    s2.prefix = "b";
    const auto a = kbtest::random_kb(rng, Side::kFirst, s1);
    const auto b = kbtest::random_kb(rng, Side::kSecond, s2);
    const auto st1 = relation_stats(a), st2 = relation_stats(b);
    const std::size_t N = 2;
    const auto tn = top_in_neighbors(a, b, st1, st2, N);
    const auto blocks = token_blocking(a, b);
    const TokenBlockIndex index(a, b, blocks);
    const NodeSpace space{a.size(), b.size()};
    WorkerPool pool(1);
    const auto beta = beta_weights(a, b, index, 15, std::vector<bool>(space.size(), true), pool);
    const auto rows = gamma_rows(beta.rows, tn, space, pool);
    for (EntityIndex i = 0; i < a.size(); ++i) {
      std::vector<double> got(b.size(), 0.0);
      for (const auto& x : rows[space.node(Side::kFirst, i)]) got[space.index(x.node)] = x.weight;
      const auto ni = top_n_neighbors(a, i, st1, N);
      for (EntityIndex j = 0; j < b.size(); ++j) {
        double expect = 0;
        for (auto x : ni)
          for (auto y : top_n_neighbors(b, j, st2, N)) expect += kbtest::oracle_value_sim(a, x, b, y);
        c.expect(std::abs(got[j] - expect) < 1e-9, "gamma mismatch seed " + std::to_string(seed));
      }
    }
  }
}

void check_degree(Checker& c, const BlockingGraph& g, std::size_t K, const std::string& tag) {
  for (NodeId v = 0; v < g.node_count(); ++v) {
    c.expect(g.value_cands[v].size() <= K, tag + ": value out-degree > K");
    c.expect(g.ngb_cands[v].size() <= K, tag + ": neighbor out-degree > K");
    for (const auto& e : g.out[v]) c.expect(!e.label.trivial(), tag + ": trivial edge");
  }
}

void check_unique(Checker& c, const MatchSet& m, const std::string& tag) {
  std::set<EntityIndex> f, s;
  for (const auto& x : m.matches) {
    c.expect(f.insert(x.first).second && s.insert(x.second).second, tag + ": unique mapping violated");
  }
}

std::string match_bytes(const MatchSet& m, const KnowledgeBase& a, const KnowledgeBase& b) {
  std::ostringstream os;
  write_matches(os, m, a, b);
  return os.str();
}

Outcome property_suites() {
  Checker c;
  check_value_sim_metric(c);
  check_gamma_brute_force(c);

  if (bsl_grid().size() != 420) c.expect(false, "BSL grid has " + std::to_string(bsl_grid().size()) + " entries");

  struct Named {
    std::string name;
    KnowledgeBase first, second;
    MatcherConfig config;
  };
  std::vector<Named> sets;
  {
    MatcherConfig sample_cfg;
    sample_cfg.purge_fraction = 1.0;
    sets.push_back({"sample", kbtest::sample("kb1.tsv", Side::kFirst), kbtest::sample("kb2.tsv", Side::kSecond),
                    sample_cfg});
  }
  for (std::size_t n : {2000u, 10000u}) {
    SyntheticConfig sc;
    sc.entities = n;
    sc.seed = 7 + n;
    auto ds = generate_synthetic(sc);
    sets.push_back({"synthetic" + std::to_string(n), std::move(ds.first), std::move(ds.second), {}});
  }
  for (const char* name : {"restaurant", "bbcmusic"}) {
    if (auto d = load_dataset(name)) sets.push_back({name, std::move(d->first), std::move(d->second), {}});
  }

  const std::size_t max_workers = std::max<std::size_t>(4, std::thread::hardware_concurrency());
  WorkerPool one(1), many(max_workers);
  std::string names;
  for (const auto& s : sets) {
    names += (names.empty() ? "" : ",") + s.name;
    for (std::size_t K : {s.config.K, std::size_t{3}}) {
      auto cfg = s.config;
      cfg.K = K;
      const auto a = run_pipeline(s.first, s.second, cfg, one);
      const auto b = run_pipeline(s.first, s.second, cfg, many);
      check_degree(c, a.graph, K, s.name);
      check_unique(c, a.matches, s.name);
      check_unique(c, b.matches, s.name);
      c.expect(match_bytes(a.matches, s.first, s.second) == match_bytes(b.matches, s.first, s.second),
               s.name + ": output differs between 1 and " + std::to_string(max_workers) + " workers");
    }
  }

  std::string detail = "value_sim metric (1000 triples), gamma oracle (10 KB pairs), degree<=K, unique mapping, "
                       "420 BSL configs, 1 vs " + std::to_string(max_workers) + " workers on " + names;
  if (c.count) {
    detail += "; " + std::to_string(c.count) + " violations, first: ";
    for (const auto& f : c.failures) detail += f + "; ";
  }
  return {c.count == 0, false, detail};
}

// ---------------------------------------------------------------------------
// Scaling

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
}

Outcome scaling() {
  std::vector<double> sizes, times;
  std::optional<SyntheticDataset> largest;
  WorkerPool one(1);
  for (std::size_t n : {10000u, 20000u, 40000u}) {
    SyntheticConfig sc;
    sc.entities = n;
    auto ds = generate_synthetic(sc);
    const MatcherConfig cfg;
    const auto built = build_graph(ds.first, ds.second, cfg, one);
    std::vector<double> t;
    for (int r = 0; r < kTimingRepeats; ++r) {
      std::vector<StageTiming> stages;
      apply_rules(built.graph, cfg.theta, {}, one, &stages);
      double s = 0;
      for (const auto& st : stages) s += st.seconds;
      t.push_back(s);
    }
    sizes.push_back(double(2 * n));
    times.push_back(median(t));
    if (n == 40000) largest = std::move(ds);
  }
  const double r2 = r_squared(sizes, times);
  std::string detail = "matching stage median over |E1|+|E2|";
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    detail += " " + std::to_string(std::size_t(sizes[i])) + ":" + fmt(times[i] * 1e3, 1) + "ms";
  }
  detail += " R^2=" + fmt(r2, 4);

  // Speedup of the whole pipeline on the 40k instance.
  auto pipeline_seconds = [&](std::size_t workers) {
    WorkerPool pool(workers);
    std::vector<double> t;
    for (int r = 0; r < 3; ++r) {
      detail::Stopwatch clock;
      run_pipeline(largest->first, largest->second, MatcherConfig{}, pool);
      t.push_back(clock.lap());
    }
    return median(t);
  };
  const double t1 = pipeline_seconds(1), t8 = pipeline_seconds(kSpeedupWorkers);
  const double speedup = t1 / t8;
  const unsigned cores = std::thread::hardware_concurrency();
  detail += "; 40k pipeline 1 worker " + fmt(t1) + "s, " + std::to_string(kSpeedupWorkers) + " workers " + fmt(t8) +
            "s, speedup=" + fmt(speedup) + "x on " + std::to_string(cores) + " core(s)";

  const bool linear = r2 >= kMinRSquared;
  const bool fast = speedup >= kMinSpeedup;
  if (linear && fast) return {true, false, detail};
  if (linear && cores < kSpeedupWorkers) {
    return {false, true, detail + "; speedup not attainable with fewer than " + std::to_string(kSpeedupWorkers) +
                             " cores"};
  }
  return {false, false, detail};
}

struct Criterion {
  const char* id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"restaurant_end_to_end", "Restaurant P/R/F1 >= 98, runtime < 2 min", restaurant_end_to_end},
      {"restaurant_blocks", "Restaurant |B_N|, |B_T| within 10%, blocking recall >= 99", restaurant_blocks},
      {"restaurant_ablation", "Restaurant R1-alone and R2-alone F1", restaurant_ablation},
      {"bbcmusic", "BBCmusic-DBpedia F1 and no-neighbors F1", bbcmusic},
      {"synthetic_benchmark", "50k+50k synthetic: F1 >= 0.95 x best BSL, R3 >= 20 recall points", synthetic_benchmark},
      {"property_suites", "Property suites", property_suites},
      {"scaling", "Linear matching time (R^2 >= 0.95) and 1->8 worker speedup >= 3x", scaling},
  };

  std::string only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only = argv[++i];
    } else if (a == "--list") {
      for (const auto& c : criteria) std::cout << c.id << "\n";
      return 0;
    } else {
      std::cerr << "usage: kbmatch_acceptance [--only <id>] [--list]\n";
      return 2;
    }
  }

  bool any = false, real_failure = false, env_failure = false;
  for (const auto& c : criteria) {
    if (!only.empty() && only != c.id) continue;
    any = true;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.id << "  " << c.title << "  [" << o.detail << "]"
              << std::endl;
    if (!o.pass) (o.environmental ? env_failure : real_failure) = true;
  }
  if (!any) {
    std::cerr << "unknown criterion: " << only << "\n";
    return 2;
  }
  if (real_failure) return 1;
  return env_failure ? 77 : 0;
}
