/**
 * @file propagation.hpp
 * @brief Similarity propagation from a new show and audience ranking
 */

#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coldstart/catalog.hpp"
#include "coldstart/copurchase.hpp"

namespace coldstart::propagation {

using catalog::InteractionIndex;
using copurchase::ItemGraph;
using copurchase::NodeId;

/// Non-zero entries of a similarity vector, sorted by node id.
using SparseVector = std::vector<std::pair<NodeId, double>>;

/**
 * @brief Per-step similarity vectors t_0..t_l and their sum over steps 1..l.
 */
class PropagationState {
 public:
  NodeId source() const { return source_; }
  std::size_t node_count() const { return summed_.size(); }
  /// Number of propagation steps l.
  std::size_t length() const { return steps_.size() - 1; }

  /// Step 0 is the indicator of the source.
  const SparseVector& step(std::size_t i) const { return steps_[i]; }
  double value(std::size_t step, NodeId node) const;
  double step_total(std::size_t step) const;

  /// Sum of t_1..t_l per node.
  std::span<const double> summed() const { return summed_; }
  /// Sum of t_1..t_steps per node, for steps <= length().
  std::vector<double> summed_through(std::size_t steps) const;

 private:
  friend PropagationState propagate(const ItemGraph& graph, NodeId source, std::size_t length);

  NodeId source_ = 0;
  std::vector<SparseVector> steps_;
  std::vector<double> summed_;
};

/**
 * Runs `length` steps of t_{i+1}(s) = flow(s) / sum(flow), where
 * flow(s) = sum over edges s'->s of t_i(s') * w(s', s). A step with zero
 * total flow yields the zero vector, and so do all later steps.
 *
 * Throws LookupError for an unknown source, ArgumentError when length < 1.
 */
PropagationState propagate(const ItemGraph& graph, NodeId source, std::size_t length);
PropagationState propagate(const ItemGraph& graph, std::string_view source, std::size_t length);

struct RankedUser {
  std::string user_id;
  double score = 0.0;

  bool operator==(const RankedUser&) const = default;
};

/// Users by descending score, ascending user_id among equal scores.
struct AudienceRanking {
  static constexpr const char* kTieBreak = "score-desc,user_id-asc";
  std::vector<RankedUser> users;
};

/**
 * Scores each index user by the maximum summed similarity over the shows
 * they bought. Shows that are not graph nodes score 0; the source node never
 * counts. Every user of the index appears, zero scores included.
 */
AudienceRanking rank_users(const InteractionIndex& index, const ItemGraph& graph, const PropagationState& state);
/// Ranking from an explicit per-node similarity profile.
AudienceRanking rank_users(const InteractionIndex& index, const ItemGraph& graph, std::span<const double> summed,
                           NodeId source);

/// CSV `rank,user_id,score`, rank starting at 1, score at 17 significant digits.
void write_ranking_csv(std::ostream& out, const AudienceRanking& ranking, std::size_t limit = 0);
void write_ranking_file(const std::string& path, const AudienceRanking& ranking, std::size_t limit = 0);

}  // namespace coldstart::propagation
