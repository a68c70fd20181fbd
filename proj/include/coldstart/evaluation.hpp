/**
 * @file evaluation.hpp
 * @brief Optimal-revenue metric, holdout evaluation and grid search
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coldstart/catalog.hpp"
#include "coldstart/contentsim.hpp"
#include "coldstart/copurchase.hpp"
#include "coldstart/propagation.hpp"

namespace coldstart::evaluation {

using catalog::Catalog;
using catalog::InteractionIndex;
using catalog::TestShow;
using copurchase::WeightKind;

struct RevenueConfig {
  double communication_cost = 0.05;  // euros per contacted user
};

struct RevenueResult {
  double revenue = 0.0;
  std::size_t k_star = 0;

  bool operator==(const RevenueResult&) const = default;
};

/**
 * Best prefix of the ranking: max over k in [0, N] of
 * (spend of the top k) - cost * k, with the smallest maximizing k.
 * Users missing from `truth` spend 0.
 */
RevenueResult optimal_revenue(const propagation::AudienceRanking& ranking, const std::map<std::string, double>& truth,
                              const RevenueConfig& config);
/// Same metric over spends already listed in rank order.
RevenueResult optimal_revenue(std::span<const double> spend_in_rank_order, const RevenueConfig& config);

struct PipelineOptions {
  contentsim::SgdParams sgd;
  std::uint64_t negative_seed = 0;
  contentsim::InsertionPolicy insertion;
  RevenueConfig revenue;
  unsigned threads = 1;  // 0 = all cores
};

/// Training-side artifacts shared by every propagation length.
struct TrainedPipeline {
  WeightKind kind = WeightKind::kJaccard;
  copurchase::ItemGraph graph;
  contentsim::LinearModel model;
  std::size_t positive_rows = 0;
  std::size_t negative_rows = 0;
  std::size_t negative_shortfall = 0;
};

/// Builds the graph for `kind`, assembles the training set and fits the model.
TrainedPipeline train_pipeline(const InteractionIndex& index, const Catalog& catalog, WeightKind kind,
                               const PipelineOptions& options);

struct ShowOutcome {
  std::string show_id;
  double revenue = 0.0;
  std::size_t k_star = 0;
  std::size_t inserted_edges = 0;
  std::optional<std::string> error;  // set when the show could not be evaluated

  bool operator==(const ShowOutcome&) const = default;
};

struct EvaluationReport {
  std::vector<ShowOutcome> per_show;  // sorted by show_id
  double mean_revenue = 0.0;          // over shows without error
  std::size_t evaluated = 0;
  std::size_t failed = 0;
  std::map<std::string, std::string> config;

  bool operator==(const EvaluationReport&) const = default;
};

/**
 * Inserts, propagates, ranks and scores every test show against a trained
 * pipeline. Per-show failures are recorded and excluded from the mean.
 * Throws ConfigError for an empty test list and EvaluationError when no
 * show could be evaluated.
 */
EvaluationReport evaluate_trained(const TrainedPipeline& trained, const InteractionIndex& index,
                                  const Catalog& catalog, std::span<const TestShow> test, std::size_t length,
                                  const PipelineOptions& options);

/// train_pipeline followed by evaluate_trained.
EvaluationReport evaluate(const InteractionIndex& index, const Catalog& catalog, std::span<const TestShow> test,
                          WeightKind kind, std::size_t length, const PipelineOptions& options);

struct GridResult {
  std::vector<std::size_t> lengths;
  std::vector<WeightKind> kinds;
  std::vector<std::vector<double>> mean_revenue;  // [length][kind]
  std::vector<std::vector<EvaluationReport>> reports;
};

/// One evaluation per (length, kind); the pipeline is trained once per kind.
GridResult grid_search(const InteractionIndex& index, const Catalog& catalog, std::span<const TestShow> test,
                       std::span<const std::size_t> lengths, std::span<const WeightKind> kinds,
                       const PipelineOptions& options);

/// Mean revenue of uniformly shuffled rankings of the index users, averaged over trials.
double random_baseline(const InteractionIndex& index, std::span<const TestShow> test, const RevenueConfig& config,
                       std::size_t trials, std::uint64_t seed);

inline constexpr int kReportFormatVersion = 1;

std::string report_to_json(const EvaluationReport& report);
void write_report_file(const std::string& path, const EvaluationReport& report);

/**
 * Grid layout: header `l<TAB><kind>...`, then one row per length with the
 * mean revenue of each kind at 17 significant digits. A leading
 * `# config=` comment is written when a fingerprint is given.
 */
void write_grid_tsv(std::ostream& out, const GridResult& grid, std::string_view fingerprint = {});
void write_grid_file(const std::string& path, const GridResult& grid, std::string_view fingerprint = {});
std::string grid_to_json(const GridResult& grid, const std::map<std::string, std::string>& config);

}  // namespace coldstart::evaluation
