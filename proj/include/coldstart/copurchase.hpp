/**
 * @file copurchase.hpp
 * @brief Co-purchase weight functions and the sparse item-item network
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "coldstart/catalog.hpp"

namespace coldstart::copurchase {

using catalog::InteractionIndex;
using catalog::ShowId;
using NodeId = std::uint32_t;

/// Declared in the column order of the grid-search matrix.
enum class WeightKind {
  kAmazon,
  kBP,
  kJaccard,
  kJaccardAsym,
  kMDW,
  kMDWAsym,
  kNBI,
};

std::span<const WeightKind> all_kinds();
std::string_view kind_name(WeightKind kind);
/// Accepts the display names ("Jaccard-asym") and the enum spelling ("JaccardAsym"), case-insensitively.
WeightKind parse_kind(std::string_view name);
/// True for Jaccard, MDW and BP.
bool is_symmetric(WeightKind kind);

/**
 * Ordered pairs (s1, s2), s1 != s2, sharing at least one buyer, sorted.
 * Enumerated from each user's purchase list, never over all show pairs.
 */
std::vector<std::pair<ShowId, ShowId>> candidate_pairs(const InteractionIndex& index);

/**
 * Table value w(s1, s2) for the given kind. Returns 0 when the shows share
 * no buyer, and 0 for BP when a variance factor vanishes.
 */
double weight(WeightKind kind, ShowId s1, ShowId s2, const InteractionIndex& index);
/// Name-based overload; throws LookupError for unknown shows.
double weight(WeightKind kind, std::string_view s1, std::string_view s2, const InteractionIndex& index);

struct Edge {
  NodeId target = 0;
  double weight = 0.0;

  bool operator==(const Edge&) const = default;
};

/**
 * @brief Directed weighted graph of shows with positive-weight edges only.
 *
 * Out-adjacency is kept sorted by target id. Graphs built from an index use
 * the index show ids as node ids.
 */
class ItemGraph {
 public:
  ItemGraph() = default;
  explicit ItemGraph(std::vector<std::string> node_names);

  std::size_t node_count() const { return names_.size(); }
  std::size_t edge_count() const { return edge_count_; }

  const std::string& name(NodeId node) const { return names_[node]; }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<NodeId> find(std::string_view name) const;

  std::span<const Edge> out_edges(NodeId node) const { return out_[node]; }
  std::optional<double> edge_weight(NodeId source, NodeId target) const;

  /// Throws ConflictError if the name is taken.
  NodeId add_node(std::string name);
  /// Requires weight > 0, no self-loop and no existing (source, target) edge.
  void add_edge(NodeId source, NodeId target, double weight);
  /// Replaces a node's adjacency; edges must be sorted, positive and loop-free.
  void set_out_edges(NodeId source, std::vector<Edge> edges);

  std::optional<WeightKind> kind() const { return kind_; }
  void set_kind(std::optional<WeightKind> kind) { kind_ = kind; }

  bool operator==(const ItemGraph& other) const {
    return names_ == other.names_ && out_ == other.out_ && kind_ == other.kind_;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> lookup_;
  std::vector<std::vector<Edge>> out_;
  std::size_t edge_count_ = 0;
  std::optional<WeightKind> kind_;
};

/**
 * Builds the network with an edge for every candidate pair whose weight is
 * positive. Sources are partitioned across `threads` workers (0 = all
 * cores); the result does not depend on the thread count.
 */
ItemGraph build_graph(const InteractionIndex& index, WeightKind kind, unsigned threads = 1);

inline constexpr int kGraphFormatVersion = 1;

/**
 * TSV layout:
 *   # weight_function=<kind>           (first line)
 *   # format=<version>
 *   # config=<fingerprint>             (only when non-empty)
 *   #node<TAB><name>                   one per node, in id order
 *   <source><TAB><target><TAB><weight> weight at 17 significant digits
 * Edge-only files without #node lines are accepted; nodes are then created in
 * order of first appearance.
 */
void write_graph_tsv(std::ostream& out, const ItemGraph& graph, std::string_view fingerprint = {});
ItemGraph read_graph_tsv(std::istream& in);
void write_graph_file(const std::string& path, const ItemGraph& graph, std::string_view fingerprint = {});
ItemGraph read_graph_file(const std::string& path);

}  // namespace coldstart::copurchase
