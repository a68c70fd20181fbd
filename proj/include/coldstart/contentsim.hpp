/**
 * @file contentsim.hpp
 * @brief Content similarity, training-set assembly, SGD linear regression and
 *        insertion of a new show into the item-item network
 */

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coldstart/catalog.hpp"
#include "coldstart/copurchase.hpp"

namespace coldstart::contentsim {

using catalog::Catalog;
using catalog::InteractionIndex;
using catalog::ShowId;
using catalog::ShowRecord;
using copurchase::ItemGraph;
using copurchase::WeightKind;

enum class Category : std::size_t { kCity = 0, kVenue = 1, kTypes = 2, kStakeholders = 3 };
inline constexpr std::size_t kCategoryCount = 4;
inline constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {"city", "venue", "types",
                                                                                "stakeholders"};

struct FeatureSimilarity {
  std::array<double, kCategoryCount> values{};  // each in [0, 1]
  std::array<bool, kCategoryCount> missing{};

  double operator[](Category c) const { return values[static_cast<std::size_t>(c)]; }
  bool is_missing(Category c) const { return missing[static_cast<std::size_t>(c)]; }
  bool operator==(const FeatureSimilarity&) const = default;
};

/**
 * City and venue are exact-match indicators; types and stakeholders use set
 * Jaccard. A category absent (or an empty set) on either side scores 0 and
 * is flagged missing.
 */
FeatureSimilarity pair_features(const ShowRecord& a, const ShowRecord& b);

struct TrainingRow {
  ShowId source = 0;
  ShowId target = 0;
  FeatureSimilarity features;
  double target_weight = 0.0;

  bool operator==(const TrainingRow&) const = default;
};

struct TrainingSet {
  std::vector<TrainingRow> rows;  // positives first, then negatives
  std::size_t positive_count = 0;
  std::size_t negative_count = 0;
  /// Positives minus negatives when the negative universe ran short.
  std::size_t negative_shortfall = 0;

  bool operator==(const TrainingSet&) const = default;
};

/**
 * Positives are every stored edge of `graph`; negatives are a seeded uniform
 * sample, of the same size, of ordered pairs with no edge in either
 * direction. A row's target is the pair's weight, or for asymmetric kinds
 * the larger of its two directed weights. Shows without a catalog record get
 * all-missing features.
 *
 * Throws TrainingError when the graph has no edges.
 */
TrainingSet assemble_training_set(const InteractionIndex& index, const ItemGraph& graph, WeightKind kind,
                                  std::uint64_t negative_seed, const Catalog& catalog);

struct SgdParams {
  double learning_rate = 0.01;
  std::size_t epochs = 20;
  std::uint64_t shuffle_seed = 0;
  double l2 = 0.0;
  bool fit_intercept = true;

  bool operator==(const SgdParams&) const = default;
};

struct LinearModel {
  std::array<double, kCategoryCount> coefficients{};
  double intercept = 0.0;
  SgdParams params;
  double final_mse = 0.0;
  std::optional<WeightKind> kind;

  bool operator==(const LinearModel&) const = default;
};

/// Squared-error loss 0.5 * (prediction - target)^2 of one row.
double row_loss(const LinearModel& model, const FeatureSimilarity& f, double target);

/// Gradient of row_loss; element kCategoryCount is d/d(intercept).
std::array<double, kCategoryCount + 1> row_gradient(const LinearModel& model, const FeatureSimilarity& f,
                                                    double target);

/**
 * Per-row gradient descent over `params.epochs` shuffled passes. Throws
 * TrainingError on an empty set and DivergenceError (naming the epoch) when
 * the loss or a parameter becomes non-finite.
 */
LinearModel train_sgd(const TrainingSet& training_set, const SgdParams& params);

double predict_weight(const LinearModel& model, const FeatureSimilarity& f);

inline constexpr int kModelFormatVersion = 1;

/**
 * JSON object with keys coefficients (by category name), intercept,
 * hyperparameters, seed, final_mse, weight_function_kind, format, and config
 * when a fingerprint is given.
 */
std::string model_to_json(const LinearModel& model, std::string_view fingerprint = {});
LinearModel model_from_json(std::string_view text);
void write_model_file(const std::string& path, const LinearModel& model, std::string_view fingerprint = {});
LinearModel read_model_file(const std::string& path);

struct InsertionPolicy {
  enum class Mode { kKeepPositive, kTopK };
  Mode mode = Mode::kKeepPositive;
  std::size_t k = 0;  // >= 1 in top-K mode
  /// Also add edges from existing shows toward the new show.
  bool symmetric = true;

  static InsertionPolicy keep_positive() { return {}; }
  static InsertionPolicy top_k(std::size_t k) { return {Mode::kTopK, k, true}; }
};

/**
 * Returns a copy of `graph` with `new_show` added as a node linked to the
 * existing shows with positive predicted weight (or the K largest of them).
 * Edges run new_show -> s, plus s -> new_show when the policy is symmetric.
 * Ties in top-K mode go to the smaller node id. Existing edges are untouched.
 *
 * Throws ConflictError if the show is already a node.
 */
ItemGraph insert_new_show(const ItemGraph& graph, const LinearModel& model, const Catalog& catalog,
                          const ShowRecord& new_show, const InsertionPolicy& policy = {});

}  // namespace coldstart::contentsim
