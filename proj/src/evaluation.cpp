/**
 * @file evaluation.cpp
 * @brief Holdout evaluation with the optimal-revenue metric
 */

#include "coldstart/evaluation.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "coldstart/error.hpp"
#include "coldstart/parallel.hpp"
#include "io_util.hpp"

namespace coldstart::evaluation {

namespace {

constexpr const char* kModule = "evaluation";

using detail::format_double;

std::map<std::string, std::string> describe(const TrainedPipeline& trained, std::size_t length,
                                            const PipelineOptions& options) {
  const auto& model = trained.model;
  std::map<std::string, std::string> config;
  config["weight_function"] = std::string(kind_name(trained.kind));
  config["propagation_length"] = std::to_string(length);
  config["learning_rate"] = format_double(model.params.learning_rate);
  config["epochs"] = std::to_string(model.params.epochs);
  config["l2"] = format_double(model.params.l2);
  config["fit_intercept"] = model.params.fit_intercept ? "true" : "false";
  config["sgd_seed"] = std::to_string(model.params.shuffle_seed);
  config["negative_seed"] = std::to_string(options.negative_seed);
  config["insertion_mode"] =
      options.insertion.mode == contentsim::InsertionPolicy::Mode::kTopK ? "top-k" : "keep-positive";
  config["insertion_k"] = std::to_string(options.insertion.k);
  config["symmetric_insertion"] = options.insertion.symmetric ? "true" : "false";
  config["communication_cost"] = format_double(options.revenue.communication_cost);
  config["model_intercept"] = format_double(model.intercept);
  for (std::size_t c = 0; c < contentsim::kCategoryCount; ++c) {
    config["model_coef_" + std::string(contentsim::kCategoryNames[c])] = format_double(model.coefficients[c]);
  }
  config["model_final_mse"] = format_double(model.final_mse);
  config["training_positive_rows"] = std::to_string(trained.positive_rows);
  config["training_negative_rows"] = std::to_string(trained.negative_rows);
  return config;
}

/// Evaluates every test show at several lengths with one insertion and one propagation per show.
std::vector<EvaluationReport> evaluate_lengths(const TrainedPipeline& trained, const InteractionIndex& index,
                                               const Catalog& catalog, std::span<const TestShow> test,
                                               std::span<const std::size_t> lengths, const PipelineOptions& options) {
  if (test.empty()) throw ConfigError(kModule, "no test shows to evaluate");
  if (lengths.empty()) throw ConfigError(kModule, "no propagation lengths given");
  if (options.revenue.communication_cost < 0.0) throw ConfigError(kModule, "communication cost must be >= 0");
  for (const auto l : lengths) {
    if (l < 1) throw ConfigError(kModule, "propagation length must be at least 1");
  }
  const std::size_t max_length = *std::max_element(lengths.begin(), lengths.end());

  std::vector<std::size_t> order(test.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&test](auto a, auto b) { return test[a].show_id < test[b].show_id; });

  // outcomes[length slot][show slot]
  std::vector<std::vector<ShowOutcome>> outcomes(lengths.size(), std::vector<ShowOutcome>(test.size()));
  parallel_for(test.size(), options.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t slot = begin; slot < end; ++slot) {
      const auto& show = test[order[slot]];
      for (auto& per_length : outcomes) per_length[slot].show_id = show.show_id;
      try {
        const auto* record = catalog.find(show.show_id);
        if (record == nullptr) throw LookupError(kModule, "test show '" + show.show_id + "' has no catalog record");
        const auto augmented =
            contentsim::insert_new_show(trained.graph, trained.model, catalog, *record, options.insertion);
        const auto node = *augmented.find(show.show_id);
        const auto state = propagation::propagate(augmented, node, max_length);
        const auto inserted = augmented.out_edges(node).size();
        for (std::size_t li = 0; li < lengths.size(); ++li) {
          const auto summed = state.summed_through(lengths[li]);
          const auto ranking = propagation::rank_users(index, augmented, summed, node);
          const auto result = optimal_revenue(ranking, show.spend, options.revenue);
          auto& outcome = outcomes[li][slot];
          outcome.revenue = result.revenue;
          outcome.k_star = result.k_star;
          outcome.inserted_edges = inserted;
        }
      } catch (const Error& e) {
        for (auto& per_length : outcomes) per_length[slot].error = e.what();
      }
    }
  });

  std::vector<EvaluationReport> reports;
  for (std::size_t li = 0; li < lengths.size(); ++li) {
    EvaluationReport report;
    report.per_show = std::move(outcomes[li]);
    double total = 0.0;
    for (const auto& outcome : report.per_show) {
      if (outcome.error) {
        ++report.failed;
        if (li == 0) std::cerr << "warning: " << *outcome.error << " (excluded from the mean)\n";
        continue;
      }
      total += outcome.revenue;
      ++report.evaluated;
    }
    if (report.evaluated == 0) {
      throw EvaluationError(kModule, "none of the " + std::to_string(test.size()) + " test shows could be evaluated");
    }
    report.mean_revenue = total / static_cast<double>(report.evaluated);
    report.config = describe(trained, lengths[li], options);
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace

RevenueResult optimal_revenue(std::span<const double> spend_in_rank_order, const RevenueConfig& config) {
  RevenueResult best;  // k = 0 is always admissible
  double spent = 0.0;
  for (std::size_t k = 1; k <= spend_in_rank_order.size(); ++k) {
    spent += spend_in_rank_order[k - 1];
    const double revenue = spent - config.communication_cost * static_cast<double>(k);
    if (revenue > best.revenue) best = {revenue, k};
  }
  return best;
}

RevenueResult optimal_revenue(const propagation::AudienceRanking& ranking, const std::map<std::string, double>& truth,
                              const RevenueConfig& config) {
  std::vector<double> spends;
  spends.reserve(ranking.users.size());
  for (const auto& user : ranking.users) {
    const auto it = truth.find(user.user_id);
    spends.push_back(it == truth.end() ? 0.0 : it->second);
  }
  return optimal_revenue(spends, config);
}

TrainedPipeline train_pipeline(const InteractionIndex& index, const Catalog& catalog, WeightKind kind,
                               const PipelineOptions& options) {
  TrainedPipeline trained;
  trained.kind = kind;
  trained.graph = copurchase::build_graph(index, kind, options.threads);
  const auto ts = contentsim::assemble_training_set(index, trained.graph, kind, options.negative_seed, catalog);
  trained.positive_rows = ts.positive_count;
  trained.negative_rows = ts.negative_count;
  trained.negative_shortfall = ts.negative_shortfall;
  trained.model = contentsim::train_sgd(ts, options.sgd);
  trained.model.kind = kind;
  return trained;
}

EvaluationReport evaluate_trained(const TrainedPipeline& trained, const InteractionIndex& index,
                                  const Catalog& catalog, std::span<const TestShow> test, std::size_t length,
                                  const PipelineOptions& options) {
  const std::size_t lengths[] = {length};
  return std::move(evaluate_lengths(trained, index, catalog, test, lengths, options).front());
}

EvaluationReport evaluate(const InteractionIndex& index, const Catalog& catalog, std::span<const TestShow> test,
                          WeightKind kind, std::size_t length, const PipelineOptions& options) {
  if (test.empty()) throw ConfigError(kModule, "no test shows to evaluate");
  const auto trained = train_pipeline(index, catalog, kind, options);
  return evaluate_trained(trained, index, catalog, test, length, options);
}

GridResult grid_search(const InteractionIndex& index, const Catalog& catalog, std::span<const TestShow> test,
                       std::span<const std::size_t> lengths, std::span<const WeightKind> kinds,
                       const PipelineOptions& options) {
  if (lengths.empty() || kinds.empty()) throw ConfigError(kModule, "grid search needs lengths and weight functions");
  if (test.empty()) throw ConfigError(kModule, "no test shows to evaluate");

  GridResult grid;
  grid.lengths.assign(lengths.begin(), lengths.end());
  grid.kinds.assign(kinds.begin(), kinds.end());
  grid.mean_revenue.assign(lengths.size(), std::vector<double>(kinds.size(), 0.0));
  grid.reports.assign(lengths.size(), std::vector<EvaluationReport>(kinds.size()));

  for (std::size_t ki = 0; ki < kinds.size(); ++ki) {
    const auto trained = train_pipeline(index, catalog, kinds[ki], options);
    auto reports = evaluate_lengths(trained, index, catalog, test, lengths, options);
    for (std::size_t li = 0; li < lengths.size(); ++li) {
      grid.mean_revenue[li][ki] = reports[li].mean_revenue;
      grid.reports[li][ki] = std::move(reports[li]);
    }
  }
  return grid;
}

double random_baseline(const InteractionIndex& index, std::span<const TestShow> test, const RevenueConfig& config,
                       std::size_t trials, std::uint64_t seed) {
  if (test.empty() || trials == 0) throw ConfigError(kModule, "random baseline needs test shows and trials");
  std::vector<std::vector<double>> spend_by_user(test.size(), std::vector<double>(index.user_count(), 0.0));
  for (std::size_t t = 0; t < test.size(); ++t) {
    for (const auto& [user, amount] : test[t].spend) {
      if (const auto u = index.find_user(user)) spend_by_user[t][*u] = amount;
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<catalog::UserId> order(index.user_count());
  std::vector<double> spends(index.user_count());
  double total = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    double trial_total = 0.0;
    for (std::size_t t = 0; t < test.size(); ++t) {
      std::iota(order.begin(), order.end(), catalog::UserId{0});
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t i = 0; i < order.size(); ++i) spends[i] = spend_by_user[t][order[i]];
      trial_total += optimal_revenue(spends, config).revenue;
    }
    total += trial_total / static_cast<double>(test.size());
  }
  return total / static_cast<double>(trials);
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json report_json(const EvaluationReport& report) {
  nlohmann::ordered_json obj;
  obj["format"] = kReportFormatVersion;
  nlohmann::ordered_json per_show = nlohmann::ordered_json::array();
  for (const auto& outcome : report.per_show) {
    nlohmann::ordered_json row;
    row["show_id"] = outcome.show_id;
    if (outcome.error) {
      row["error"] = *outcome.error;
    } else {
      row["revenue"] = outcome.revenue;
      row["k_star"] = outcome.k_star;
      row["inserted_edges"] = outcome.inserted_edges;
    }
    per_show.push_back(std::move(row));
  }
  obj["per_show"] = std::move(per_show);
  obj["mean_revenue"] = report.mean_revenue;
  obj["evaluated"] = report.evaluated;
  obj["failed"] = report.failed;
  obj["config"] = report.config;
  return obj;
}

}  // namespace

std::string report_to_json(const EvaluationReport& report) { return report_json(report).dump(2) + "\n"; }

void write_report_file(const std::string& path, const EvaluationReport& report) {
  auto out = detail::open_output(path, kModule);
  out << report_to_json(report);
  detail::finish_output(out, path, kModule);
}

void write_grid_tsv(std::ostream& out, const GridResult& grid, std::string_view fingerprint) {
  if (!fingerprint.empty()) out << "# config=" << fingerprint << '\n';
  out << 'l';
  for (const auto kind : grid.kinds) out << '\t' << kind_name(kind);
  out << '\n';
  for (std::size_t li = 0; li < grid.lengths.size(); ++li) {
    out << grid.lengths[li];
    for (const double value : grid.mean_revenue[li]) out << '\t' << format_double(value);
    out << '\n';
  }
}

void write_grid_file(const std::string& path, const GridResult& grid, std::string_view fingerprint) {
  auto out = detail::open_output(path, kModule);
  write_grid_tsv(out, grid, fingerprint);
  detail::finish_output(out, path, kModule);
}

std::string grid_to_json(const GridResult& grid, const std::map<std::string, std::string>& config) {
  nlohmann::ordered_json obj;
  obj["format"] = kReportFormatVersion;
  obj["lengths"] = grid.lengths;
  std::vector<std::string> kinds;
  for (const auto kind : grid.kinds) kinds.emplace_back(kind_name(kind));
  obj["kinds"] = kinds;
  obj["mean_revenue"] = grid.mean_revenue;
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (std::size_t li = 0; li < grid.lengths.size(); ++li) {
    for (std::size_t ki = 0; ki < grid.kinds.size(); ++ki) {
      auto cell = report_json(grid.reports[li][ki]);
      cell.erase("format");
      cells.push_back(std::move(cell));
    }
  }
  obj["cells"] = std::move(cells);
  obj["config"] = config;
  return obj.dump(2) + "\n";
}

}  // namespace coldstart::evaluation
