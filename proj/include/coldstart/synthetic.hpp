/**
 * @file synthetic.hpp
 * @brief Planted-community transaction and catalog generator
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "coldstart/catalog.hpp"

namespace coldstart::evaluation {

struct SyntheticSpec {
  std::size_t num_users = 5000;
  std::size_t num_shows = 500;
  std::size_t num_communities = 4;
  /// Probability that a show feature ignores its community profile.
  double feature_noise = 0.1;
  /// Mean number of distinct shows bought per user (at least 1).
  double purchases_per_user = 3.0;
  /// Probability a purchase stays inside the user's community.
  double in_community_rate = 0.9;
  /// Probability a purchase comes with a second ticket (a repeated transaction).
  double second_ticket_rate = 0.25;
  double min_price = 15.0;
  double max_price = 90.0;
  catalog::Timestamp start = 1'500'000'000;
  catalog::Timestamp duration = 365 * 86'400;
  std::uint64_t seed = 7;
};

struct SyntheticDataset {
  std::vector<catalog::Transaction> transactions;
  catalog::Catalog catalog;
  /// Planted ground truth, indexed like the generated ids (s0000.., u00000..).
  std::vector<std::size_t> show_community;
  std::vector<std::size_t> user_community;
};

/**
 * Shows are spread over communities; each community has a home city, venue
 * pool, genre pool and artist pool, and every show feature follows its
 * community profile with probability 1 - feature_noise. Users belong to a
 * community and buy mostly inside it, with popularity skewed within each
 * community. Purchases happen shortly after a show's first sale date.
 *
 * Throws ArgumentError for zero shows or communities, more communities than
 * shows, or rates outside [0, 1].
 */
SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace coldstart::evaluation
