/**
 * @file cli.hpp
 * @brief Pipeline configuration and command-line dispatch
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coldstart/catalog.hpp"
#include "coldstart/copurchase.hpp"

namespace coldstart::cli {

inline constexpr const char* kVersion = "0.1.0";

/**
 * @brief Every experiment parameter after resolution.
 *
 * Resolution order is defaults, then the config file, then flags. Keys of
 * the config file are the names returned by to_entries().
 */
struct PipelineConfig {
  // paths
  std::string transactions;
  std::string shows;
  std::string index;
  std::string cache_dir = ".";
  std::string output_dir = ".";

  copurchase::WeightKind weight_function = copurchase::WeightKind::kJaccard;
  std::size_t propagation_length = 1;

  std::string insertion_mode = "keep-positive";  // or "top-k"
  std::size_t insertion_k = 0;
  bool symmetric_insertion = true;

  double learning_rate = 0.01;
  std::size_t epochs = 20;
  double l2 = 0.0;
  bool fit_intercept = true;

  double communication_cost = 0.05;

  std::uint64_t negative_seed = 1;
  std::uint64_t sgd_seed = 2;
  std::uint64_t synthetic_seed = 7;
  std::uint64_t test_sample_seed = 3;

  std::optional<catalog::Timestamp> cutoff;
  double cutoff_fraction = 0.8;
  std::optional<std::size_t> test_sample;

  std::vector<std::size_t> l_values{1, 2, 3, 4, 5};
  std::vector<copurchase::WeightKind> kinds;  // empty = all
  std::size_t baseline_trials = 0;

  std::size_t synth_users = 5000;
  std::size_t synth_shows = 500;
  std::size_t synth_communities = 4;
  double synth_feature_noise = 0.1;
  double synth_purchases_per_user = 3.0;
  double synth_in_community_rate = 0.9;

  unsigned threads = 0;  // 0 = machine parallelism
};

/// Applies one `key = value` setting. Throws ConfigError for unknown keys or bad values.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value);

/// Reads `key = value` lines; blank lines and `#` comments are ignored.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Throws ConfigError when an invariant (l >= 1, cost >= 0, ...) is violated.
void validate(const PipelineConfig& config);

/// Parameters in canonical text form. Paths and the thread count are excluded.
std::map<std::string, std::string> to_entries(const PipelineConfig& config);

/// 16 hex digits of FNV-1a over the canonical `key=value` lines.
std::string fingerprint(const PipelineConfig& config);

std::vector<std::size_t> parse_lengths(const std::string& text);
std::vector<copurchase::WeightKind> parse_kinds(const std::string& text);

/**
 * Runs one subcommand (ingest, build-graph, train-model, predict, evaluate,
 * grid-search, synth). Prints a one-line JSON summary to `out`, diagnostics
 * to `err`. Returns 0 on success, 2 on usage errors, 1 on any other failure.
 */
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace coldstart::cli
