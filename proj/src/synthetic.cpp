/**
 * @file synthetic.cpp
 * @brief Planted-community data generator
 */

#include "coldstart/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "coldstart/error.hpp"

namespace coldstart::evaluation {

namespace {

constexpr const char* kModule = "synthetic";
constexpr std::size_t kVenuesPerCommunity = 3;
constexpr std::size_t kGenresPerCommunity = 3;
constexpr std::size_t kArtistsPerCommunity = 15;
constexpr std::size_t kExtraCities = 4;
constexpr double kMissingVenueRate = 0.02;
constexpr catalog::Timestamp kSalesWindow = 30 * 86'400;

std::string padded(char prefix, std::size_t value, std::size_t count) {
  const auto width = std::to_string(count == 0 ? 0 : count - 1).size();
  std::string digits = std::to_string(value);
  return std::string(1, prefix) + std::string(width - std::min(width, digits.size()), '0') + digits;
}

std::string label(const char* kind, std::size_t community, std::size_t j) {
  return std::string(kind) + "-" + std::to_string(community) + "-" + std::to_string(j);
}

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.num_shows == 0) throw ArgumentError(kModule, "num_shows must be positive");
  if (spec.num_communities == 0) throw ArgumentError(kModule, "num_communities must be positive");
  if (spec.num_communities > spec.num_shows) {
    throw ArgumentError(kModule, "more communities (" + std::to_string(spec.num_communities) + ") than shows (" +
                                     std::to_string(spec.num_shows) + ")");
  }
  for (const double rate : {spec.feature_noise, spec.in_community_rate, spec.second_ticket_rate}) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw ArgumentError(kModule, "rates must lie in [0, 1]");
  }
  if (!(spec.purchases_per_user >= 1.0)) throw ArgumentError(kModule, "purchases_per_user must be >= 1");
  if (!(spec.min_price >= 0.0 && spec.max_price >= spec.min_price)) throw ArgumentError(kModule, "bad price range");
  if (spec.duration <= 0) throw ArgumentError(kModule, "duration must be positive");

  const std::size_t communities = spec.num_communities;
  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution noisy(spec.feature_noise);
  auto uniform_index = [&rng](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  SyntheticDataset data;
  data.show_community.resize(spec.num_shows);
  data.user_community.resize(spec.num_users);

  // Shows and their descriptions.
  std::vector<catalog::Timestamp> first_sale(spec.num_shows);
  std::vector<double> price(spec.num_shows);
  std::vector<std::vector<std::size_t>> members(communities);
  std::uniform_int_distribution<catalog::Timestamp> release(spec.start, spec.start + spec.duration - 1);
  std::uniform_real_distribution<double> price_draw(spec.min_price, spec.max_price);
  std::bernoulli_distribution venue_missing(kMissingVenueRate);

  for (std::size_t s = 0; s < spec.num_shows; ++s) {
    const std::size_t c = s % communities;
    data.show_community[s] = c;
    members[c].push_back(s);
    first_sale[s] = release(rng);
    price[s] = std::round(price_draw(rng) * 100.0) / 100.0;

    catalog::ShowRecord record;
    record.show_id = padded('s', s, spec.num_shows);
    record.first_sale = first_sale[s];
    record.city = noisy(rng) ? "city-" + std::to_string(uniform_index(communities + kExtraCities))
                             : "city-" + std::to_string(c);
    if (!venue_missing(rng)) {
      record.venue = noisy(rng) ? label("venue", uniform_index(communities), uniform_index(kVenuesPerCommunity))
                                : label("venue", c, uniform_index(kVenuesPerCommunity));
    }
    while (record.types.size() < 2) {
      record.types.insert(noisy(rng) ? label("genre", uniform_index(communities), uniform_index(kGenresPerCommunity))
                                     : label("genre", c, uniform_index(kGenresPerCommunity)));
    }
    const std::size_t artists = 1 + uniform_index(2);
    while (record.stakeholders.size() < artists) {
      record.stakeholders.insert(noisy(rng)
                                     ? label("artist", uniform_index(communities), uniform_index(kArtistsPerCommunity))
                                     : label("artist", c, uniform_index(kArtistsPerCommunity)));
    }
    data.catalog.add(std::move(record));
  }

  // Within-community popularity follows a Zipf-like profile.
  std::vector<std::discrete_distribution<std::size_t>> popularity;
  for (const auto& shows : members) {
    std::vector<double> w(shows.size());
    for (std::size_t r = 0; r < w.size(); ++r) w[r] = 1.0 / std::sqrt(static_cast<double>(r + 1));
    popularity.emplace_back(w.begin(), w.end());
  }

  std::poisson_distribution<std::size_t> extra_purchases(spec.purchases_per_user - 1.0);
  std::bernoulli_distribution stay_inside(spec.in_community_rate);
  std::bernoulli_distribution second_ticket(spec.second_ticket_rate);
  std::uniform_int_distribution<catalog::Timestamp> delay(0, kSalesWindow);

  for (std::size_t u = 0; u < spec.num_users; ++u) {
    const std::size_t c = u % communities;
    data.user_community[u] = c;
    const std::string user = padded('u', u, spec.num_users);
    const std::size_t wanted = std::min(spec.num_shows, 1 + extra_purchases(rng));

    std::set<std::size_t> bought;
    for (std::size_t attempt = 0; bought.size() < wanted && attempt < 50 * wanted; ++attempt) {
      bought.insert(stay_inside(rng) ? members[c][popularity[c](rng)] : uniform_index(spec.num_shows));
    }
    for (const auto s : bought) {
      const std::string show = padded('s', s, spec.num_shows);
      const auto when = first_sale[s] + delay(rng);
      data.transactions.push_back({user, show, price[s], when});
      if (second_ticket(rng)) data.transactions.push_back({user, show, price[s], when + 60});
    }
  }

  std::stable_sort(data.transactions.begin(), data.transactions.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return data;
}

}  // namespace coldstart::evaluation
