// Acceptance run: one PASS/FAIL line per primary criterion, exit status 1 if
// any criterion fails. Tolerances and runtime limits are pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coldstart/catalog.hpp"
#include "coldstart/contentsim.hpp"
#include "coldstart/copurchase.hpp"
#include "coldstart/evaluation.hpp"
#include "coldstart/propagation.hpp"
#include "coldstart/synthetic.hpp"
#include "oracles/dense_propagation.hpp"
#include "oracles/least_squares.hpp"
#include "oracles/random_instances.hpp"
#include "oracles/reference_weights.hpp"
#include "oracles/revenue_bruteforce.hpp"

namespace fs = std::filesystem;
using namespace coldstart;
using copurchase::WeightKind;

namespace {

constexpr int kRandomIndices = 250;           // >= 200
constexpr double kWeightTolerance = 1e-12;
constexpr double kPropagationTolerance = 1e-9;
constexpr double kGradientRelTolerance = 1e-6;
constexpr double kCoefficientTolerance = 1e-2;
constexpr double kMaxTrainingMse = 1e-4;
constexpr int kRevenueInstances = 2000;        // >= 1000
constexpr int kBaselineTrials = 100;
constexpr double kWeightSeconds = 10, kPropagationSeconds = 5, kRegressionSeconds = 10, kEndToEndSeconds = 300;

int failures = 0;

struct Outcome {
  bool ok = true;
  std::string detail;
  void require(bool condition, const std::string& why) {
    if (!condition && ok) {
      ok = false;
      detail = why;
    }
  }
};

void criterion(const std::string& name, double limit_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = body();
  } catch (const std::exception& e) {
    outcome.ok = false;
    outcome.detail = std::string("exception: ") + e.what();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limit_seconds > 0 && seconds >= limit_seconds) {
    outcome.require(false, "runtime limit exceeded");
    if (outcome.detail.empty()) outcome.detail = "runtime limit exceeded";
  }
  if (!outcome.ok) ++failures;
  char timing[64];
  std::snprintf(timing, sizeof timing, "%.2fs", seconds);
  std::cout << (outcome.ok ? "PASS" : "FAIL") << "  " << name << "  [" << timing
            << (limit_seconds > 0 ? " < " + std::to_string(static_cast<int>(limit_seconds)) + "s" : std::string())
            << "]  " << outcome.detail << std::endl;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool within_ulps(double a, double b, int ulps) {
  double x = a;
  for (int i = 0; i < ulps && x != b; ++i) x = std::nextafter(x, b);
  return x == b;
}

std::vector<std::vector<catalog::Transaction>> random_indices() {
  std::mt19937_64 rng(20240601);
  std::vector<std::vector<catalog::Transaction>> out;
  for (int i = 0; i < kRandomIndices; ++i) out.push_back(oracle::random_transactions(rng, 8, 10));
  return out;
}

std::vector<catalog::Transaction> toy() {
  return {{"u1", "A", 1, 0}, {"u1", "B", 1, 0}, {"u2", "A", 1, 0}, {"u2", "B", 1, 0},
          {"u2", "C", 1, 0}, {"u3", "B", 1, 0}, {"u3", "C", 1, 0}, {"u4", "D", 1, 0}};
}

Outcome weight_oracle_suite() {
  Outcome o;
  double worst = 0;
  std::size_t graphs = 0;
  for (const auto& t : random_indices()) {
    const auto index = catalog::InteractionIndex::build(t);
    const oracle::Purchases purchases(oracle::user_show_pairs(t));
    for (const auto kind : copurchase::all_kinds()) {
      worst = std::max(worst, oracle::max_graph_deviation(kind, purchases, copurchase::build_graph(index, kind)));
      ++graphs;
    }
  }
  o.require(worst <= kWeightTolerance, "max deviation " + fmt(worst));

  // Toy hand values. "Exact" means within 4 ulp of the closed-form expression.
  const auto index = catalog::InteractionIndex::build(toy());
  auto w = [&index](WeightKind k) { return copurchase::weight(k, "A", "B", index); };
  const std::vector<std::tuple<const char*, double, double>> hand{
      {"Jaccard", w(WeightKind::kJaccard), 2.0 / 3.0},
      {"NBI", w(WeightKind::kNBI), 5.0 / 12.0},
      {"MDW", w(WeightKind::kMDW), 0.5},
      {"MDW-asym", w(WeightKind::kMDWAsym), 0.75},
      {"BP", w(WeightKind::kBP), 0.5 / std::sqrt(0.75)},
      {"Amazon", w(WeightKind::kAmazon), (2.0 - 63.0 / 64.0) / std::sqrt(2.0)},
  };
  std::string values;
  for (const auto& [name, got, expected] : hand) {
    o.require(within_ulps(got, expected, 4), std::string(name) + " = " + fmt(got) + ", expected " + fmt(expected));
    values += std::string(name) + "=" + fmt(got) + " ";
  }
  if (o.ok) {
    o.detail = std::to_string(kRandomIndices) + " indices x 7 kinds, max deviation " + fmt(worst) + "; toy " + values;
  }
  return o;
}

Outcome algebraic_identities() {
  Outcome o;
  std::size_t pairs = 0;
  double worst = 0;
  for (const auto& t : random_indices()) {
    const auto index = catalog::InteractionIndex::build(t);
    for (const auto& [a, b] : copurchase::candidate_pairs(index)) {
      ++pairs;
      const auto ua = index.buyers_of(a);
      const auto ub = index.buyers_of(b);
      std::vector<catalog::UserId> both;
      std::set_intersection(ua.begin(), ua.end(), ub.begin(), ub.end(), std::back_inserter(both));
      auto w = [&](WeightKind k, auto x, auto y) { return copurchase::weight(k, x, y, index); };
      const double d1 = std::abs(w(WeightKind::kJaccardAsym, a, b) * static_cast<double>(index.show_degree(a)) -
                                 static_cast<double>(both.size()));
      const double d2 = std::abs(w(WeightKind::kMDW, a, b) -
                                 std::min(w(WeightKind::kMDWAsym, a, b), w(WeightKind::kMDWAsym, b, a)));
      const double d3 = w(WeightKind::kNBI, a, b) - w(WeightKind::kMDWAsym, a, b);  // must be <= tol
      worst = std::max({worst, d1, d2, d3});
      o.require(d1 <= kWeightTolerance, "JaccardAsym*k_a != |U(a,b)|");
      o.require(d2 <= kWeightTolerance, "MDW != min(MDWAsym)");
      o.require(d3 <= kWeightTolerance, "MDWAsym < NBI");
    }
  }
  o.require(pairs > 0, "no candidate pairs generated");
  if (o.ok) o.detail = std::to_string(pairs) + " candidate pairs, worst residual " + fmt(worst);
  return o;
}

Outcome propagation_suite() {
  Outcome o;
  std::mt19937_64 rng(777);
  double worst_norm = 0, worst_oracle = 0;
  const int graphs = 2000;
  for (int trial = 0; trial < graphs; ++trial) {
    const auto g = oracle::random_graph(rng, 10, 0.1 + 0.1 * static_cast<double>(trial % 5));
    const std::size_t length = 1 + rng() % 6;
    const auto source = static_cast<copurchase::NodeId>(rng() % g.node_count());
    const auto state = propagation::propagate(g, source, length);
    const auto dense = oracle::dense_propagate(oracle::dense_weights(g), source, length);
    for (std::size_t i = 0; i <= length; ++i) {
      if (!state.step(i).empty()) worst_norm = std::max(worst_norm, std::abs(state.step_total(i) - 1.0));
      for (copurchase::NodeId s = 0; s < g.node_count(); ++s) {
        worst_oracle = std::max(worst_oracle, std::abs(state.value(i, s) - dense[i][s]));
        o.require(state.value(i, s) >= 0.0, "negative similarity");
      }
    }
  }
  o.require(worst_norm <= kPropagationTolerance, "normalization residual " + fmt(worst_norm));
  o.require(worst_oracle <= kPropagationTolerance, "dense oracle deviation " + fmt(worst_oracle));

  copurchase::ItemGraph pair({"new", "A"});
  pair.add_edge(0, 1, 1.0);
  pair.add_edge(1, 0, 1.0);
  const auto alt = propagation::propagate(pair, "new", 4);
  for (std::size_t i = 1; i <= 4; ++i) {
    const copurchase::NodeId hot = i % 2 == 1 ? 1 : 0;
    o.require(alt.step(i) == propagation::SparseVector{{hot, 1.0}}, "alternation differs at step " + std::to_string(i));
  }

  copurchase::ItemGraph chain({"new", "A", "B"});
  chain.add_edge(0, 1, 1.0);
  chain.add_edge(1, 0, 1.0);
  chain.add_edge(1, 2, 1.0);
  chain.add_edge(2, 1, 1.0);
  const auto c = propagation::propagate(chain, "new", 2);
  o.require(c.step(1) == propagation::SparseVector{{1, 1.0}}, "chain t_1 differs");
  o.require(c.value(2, 0) == 0.5 && c.value(2, 2) == 0.5 && c.step(2).size() == 2, "chain t_2 differs");
  o.require(std::vector<double>(c.summed().begin(), c.summed().end()) == std::vector<double>{0.5, 1.0, 0.5},
            "chain summed differs");
  if (o.ok) {
    o.detail = std::to_string(graphs) + " graphs, normalization " + fmt(worst_norm) + ", oracle " +
               fmt(worst_oracle) + "; alternation and chain exact";
  }
  return o;
}

Outcome regression_suite() {
  Outcome o;
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> wide(-3.0, 3.0);
  double worst_gradient = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    contentsim::LinearModel model;
    for (auto& c : model.coefficients) c = wide(rng);
    model.intercept = wide(rng);
    contentsim::FeatureSimilarity f;
    for (auto& v : f.values) v = unit(rng);
    const double target = wide(rng);
    const auto grad = contentsim::row_gradient(model, f, target);
    for (std::size_t p = 0; p <= contentsim::kCategoryCount; ++p) {
      const double h = 1e-5;
      auto up = model, down = model;
      (p < contentsim::kCategoryCount ? up.coefficients[p] : up.intercept) += h;
      (p < contentsim::kCategoryCount ? down.coefficients[p] : down.intercept) -= h;
      const double numeric =
          (contentsim::row_loss(up, f, target) - contentsim::row_loss(down, f, target)) / (2 * h);
      worst_gradient = std::max(worst_gradient, std::abs(numeric - grad[p]) / std::max(1.0, std::abs(grad[p])));
    }
  }
  o.require(worst_gradient <= kGradientRelTolerance, "gradient relative error " + fmt(worst_gradient));

  // target = 0.3 city + 0.1 venue, 1000 rows.
  contentsim::TrainingSet ts;
  std::bernoulli_distribution coin(0.5);
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (int i = 0; i < 1000; ++i) {
    contentsim::TrainingRow row;
    row.features.values = {coin(rng) ? 1.0 : 0.0, coin(rng) ? 1.0 : 0.0, unit(rng), unit(rng)};
    row.target_weight = 0.3 * row.features.values[0] + 0.1 * row.features.values[1];
    x.emplace_back(row.features.values.begin(), row.features.values.end());
    y.push_back(row.target_weight);
    ts.rows.push_back(row);
  }
  ts.positive_count = ts.rows.size();
  const auto beta = oracle::least_squares(x, y);
  const auto model = contentsim::train_sgd(ts, {.shuffle_seed = 3});  // default lr and epochs
  double worst_coef = std::abs(model.intercept - beta[0]);
  for (std::size_t c = 0; c < contentsim::kCategoryCount; ++c)
    worst_coef = std::max(worst_coef, std::abs(model.coefficients[c] - beta[c + 1]));
  o.require(worst_coef <= kCoefficientTolerance, "coefficient deviation " + fmt(worst_coef));
  o.require(model.final_mse <= kMaxTrainingMse, "training MSE " + fmt(model.final_mse));
  if (o.ok) {
    o.detail = "gradient rel err " + fmt(worst_gradient) + "; coef deviation " + fmt(worst_coef) + ", MSE " +
               fmt(model.final_mse) + " (default lr 0.01, 20 epochs)";
  }
  return o;
}

Outcome revenue_suite() {
  Outcome o;
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < kRevenueInstances; ++trial) {
    std::vector<double> spend(rng() % 60);
    // Spends and cost are multiples of 1/4 so every partial sum is exact.
    for (auto& s : spend) s = rng() % 3 == 0 ? static_cast<double>(rng() % 200) / 4.0 : 0.0;
    const double cost = static_cast<double>(rng() % 12) / 4.0;
    const auto [revenue, k] = oracle::reverse_scan_revenue(spend, cost);
    const auto got = evaluation::optimal_revenue(spend, {cost});
    o.require(got.revenue == revenue && got.k_star == k, "instance " + std::to_string(trial) + " differs");
  }
  propagation::AudienceRanking ranking{{{"u1", 3}, {"u2", 2}, {"u3", 1}}};
  const auto worked = evaluation::optimal_revenue(ranking, {{"u1", 10}, {"u2", 0}, {"u3", 2}}, {0.05});
  o.require(worked.k_star == 3 && worked.revenue == 12.0 - 3 * 0.05,
            "worked example gave " + fmt(worked.revenue) + " at k=" + std::to_string(worked.k_star));
  o.require(std::abs(worked.revenue - 11.85) <= 1e-12, "worked example is not 11.85");
  if (o.ok) {
    o.detail = std::to_string(kRevenueInstances) + " instances exact; worked example " + fmt(worked.revenue) +
               " at k=" + std::to_string(worked.k_star);
  }
  return o;
}

Outcome end_to_end() {
  Outcome o;
  const evaluation::SyntheticSpec spec;  // 5000 users, 500 shows, 4 communities, noise 0.1
  const auto data = evaluation::generate_synthetic(spec);
  const auto split = catalog::split_holdout(
      data.transactions,
      {.cutoff = catalog::cutoff_at_fraction(data.transactions, 0.8), .test_sample = 96, .sample_seed = 3});
  evaluation::PipelineOptions options;
  options.negative_seed = 1;
  options.sgd.shuffle_seed = 2;
  options.threads = 0;
  const std::vector<std::size_t> lengths{1, 2, 3, 4, 5};
  const auto kinds = copurchase::all_kinds();
  const auto grid = evaluation::grid_search(split.train_index, data.catalog, split.test, lengths, kinds, options);
  const double baseline =
      evaluation::random_baseline(split.train_index, split.test, options.revenue, kBaselineTrials, 11);

  o.require(grid.mean_revenue.size() == 5, "grid has " + std::to_string(grid.mean_revenue.size()) + " rows");
  std::ostringstream table;
  table << "baseline " << fmt(baseline) << "; best per kind:";
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    double best = -1;
    std::size_t best_l = 0;
    for (std::size_t l = 0; l < grid.mean_revenue.size(); ++l) {
      o.require(grid.mean_revenue[l].size() == 7, "grid row is not 7 wide");
      o.require(std::isfinite(grid.mean_revenue[l][k]), "non-finite cell");
      if (grid.mean_revenue[l][k] > best) {
        best = grid.mean_revenue[l][k];
        best_l = lengths[l];
      }
    }
    o.require(best > baseline, std::string(copurchase::kind_name(kinds[k])) + " best " + fmt(best) +
                                   " does not beat baseline " + fmt(baseline));
    table << ' ' << copurchase::kind_name(kinds[k]) << '=' << fmt(best) << "@l" << best_l;
  }
  std::cout << "      grid (rows l=1..5, columns Amazon BP Jaccard Jaccard-asym MDW MDW-asym NBI):\n";
  evaluation::write_grid_tsv(std::cout, grid);
  if (o.ok) o.detail = std::to_string(split.test.size()) + " test shows; " + table.str();
  else o.detail += " (" + table.str() + ")";
  return o;
}

Outcome determinism() {
  Outcome o;
  const std::string cli = COLDSTART_CLI_PATH;
  const fs::path root = fs::temp_directory_path() / "coldstart-acceptance";
  fs::remove_all(root);
  const std::vector<std::string> artifacts{"transactions.csv", "shows.jsonl", "index.cache", "graph.tsv", "model.json",
                                           "audience.csv", "report.json", "grid.tsv", "grid.json"};
  for (const char* run : {"a", "b"}) {
    const fs::path dir = root / run;
    fs::create_directories(dir);
    const std::string d = dir.string();
    std::ofstream(dir / "pipeline.cfg") << "output_dir = " << d << "\ncache_dir = " << d
                                         << "\ntransactions = " << d << "/transactions.csv\nshows = " << d
                                         << "/shows.jsonl\nsynth_users = 2000\nsynth_shows = 200\n"
                                            "weight_function = MDW-asym\npropagation_length = 2\n"
                                            "negative_seed = 1\nsgd_seed = 2\nsynthetic_seed = 7\n"
                                            "test_sample = 20\ntest_sample_seed = 3\nl_values = 1..3\n"
                                            "baseline_trials = 10\n";
    std::ofstream(dir / "new.json") << R"({"show_id":"fresh","city":"city-2","types":["genre-2-0"]})" << '\n';
    const std::string cfg = " --config " + d + "/pipeline.cfg";
    const std::vector<std::string> steps{
        "synth" + cfg,
        "ingest" + cfg,
        "build-graph" + cfg + " --index " + d + "/index.cache",
        "train-model" + cfg + " --index " + d + "/index.cache --graph " + d + "/graph.tsv",
        "predict" + cfg + " --index " + d + "/index.cache --show " + d + "/new.json --graph " + d +
            "/graph.tsv --model " + d + "/model.json",
        "evaluate" + cfg,
        "grid-search" + cfg + " --kinds all --report " + d + "/grid.json",
    };
    for (const auto& step : steps) {
      const std::string command = "\"" + cli + "\" " + step + " > " + d + "/stdout.log 2>> " + d + "/stderr.log";
      const int status = std::system(command.c_str());
      o.require(status == 0, "step failed: " + step);
      if (status != 0) return o;
    }
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  std::size_t bytes = 0;
  for (const auto& name : artifacts) {
    const auto a = slurp(root / "a" / name);
    o.require(!a.empty(), name + " missing");
    o.require(a == slurp(root / "b" / name), name + " differs between runs");
    bytes += a.size();
  }
  if (o.ok) o.detail = std::to_string(artifacts.size()) + " artifacts, " + std::to_string(bytes) + " bytes identical";
  return o;
}

}  // namespace

int main() {
  criterion("weight-function oracle suite", kWeightSeconds, weight_oracle_suite);
  criterion("algebraic identities", 0, algebraic_identities);
  criterion("propagation", kPropagationSeconds, propagation_suite);
  criterion("regression", kRegressionSeconds, regression_suite);
  criterion("revenue metric", 0, revenue_suite);
  criterion("end-to-end synthetic grid vs random baseline", kEndToEndSeconds, end_to_end);
  criterion("determinism", 0, determinism);
  std::cout << (failures == 0 ? "ALL PRIMARY CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAILED") << '\n';
  return failures == 0 ? 0 : 1;
}
