/**
 * @file copurchase.cpp
 * @brief Weight functions and sparse graph construction
 */

#include "coldstart/copurchase.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "coldstart/error.hpp"
#include "coldstart/parallel.hpp"
#include "io_util.hpp"

namespace coldstart::copurchase {

namespace {

constexpr const char* kModule = "copurchase";

constexpr std::array<WeightKind, 7> kAllKinds = {
    WeightKind::kAmazon, WeightKind::kBP,      WeightKind::kJaccard, WeightKind::kJaccardAsym,
    WeightKind::kMDW,    WeightKind::kMDWAsym, WeightKind::kNBI,
};

/// Buyer-overlap statistics of an ordered show pair.
struct PairStats {
  std::size_t common = 0;           // |U(s1, s2)|
  double inverse_degree_sum = 0.0;  // sum over U(s1, s2) of 1/k_u
  double inverse_excess_sum = 0.0;  // sum over U(s1, s2) of 1/(k_u - 1)
  std::size_t k1 = 0;
  std::size_t k2 = 0;
};

/// Buyers of s1 grouped by |S(u) \ s1| = k_u - 1, ascending.
using ExponentHistogram = std::vector<std::pair<std::size_t, std::size_t>>;

ExponentHistogram exponent_histogram(const InteractionIndex& index, ShowId s1) {
  std::vector<std::size_t> exponents;
  exponents.reserve(index.show_degree(s1));
  for (const auto u : index.buyers_of(s1)) exponents.push_back(index.user_degree(u) - 1);
  std::sort(exponents.begin(), exponents.end());
  ExponentHistogram histogram;
  for (const auto e : exponents) {
    if (!histogram.empty() && histogram.back().first == e) {
      ++histogram.back().second;
    } else {
      histogram.emplace_back(e, 1);
    }
  }
  return histogram;
}

/// Expected co-purchases of s2 among buyers of s1 if purchases were independent.
double amazon_expected(const ExponentHistogram& histogram, double probability) {
  const double log_miss = std::log1p(-probability);
  double expected = 0.0;
  for (const auto& [exponent, count] : histogram) {
    if (exponent == 0) continue;
    // 1 - (1-p)^e in log space
    const double hit = probability >= 1.0 ? 1.0 : -std::expm1(static_cast<double>(exponent) * log_miss);
    expected += static_cast<double>(count) * hit;
  }
  return expected;
}

double weight_from_stats(WeightKind kind, const PairStats& st, const InteractionIndex& index,
                         const ExponentHistogram* histogram) {
  if (st.common == 0) return 0.0;
  const double common = static_cast<double>(st.common);
  const double k1 = static_cast<double>(st.k1);
  const double k2 = static_cast<double>(st.k2);
  switch (kind) {
    case WeightKind::kJaccard:
      return common / (k1 + k2 - common);
    case WeightKind::kJaccardAsym:
      return common / k1;
    case WeightKind::kNBI:
      return st.inverse_degree_sum / k1;
    case WeightKind::kMDW:
      return st.inverse_excess_sum / std::max(k1, k2);
    case WeightKind::kMDWAsym:
      return st.inverse_excess_sum / k1;
    case WeightKind::kBP: {
      // Factors in a fixed order so that BP(a,b) and BP(b,a) agree bit for bit.
      const double shows = static_cast<double>(index.show_count());
      const double lo = std::min(k1, k2);
      const double hi = std::max(k1, k2);
      const double numerator = common - lo * hi / shows;
      const double variance = lo * (1.0 - lo / shows) * hi * (1.0 - hi / shows);
      if (!(variance > 0.0)) return 0.0;
      return numerator / std::sqrt(variance);
    }
    case WeightKind::kAmazon: {
      assert(histogram != nullptr);
      const double probability = k2 / static_cast<double>(index.degree_sum());
      return (common - amazon_expected(*histogram, probability)) / std::sqrt(common);
    }
  }
  return 0.0;
}

std::string lowercase_alnum(std::string_view text) {
  std::string out;
  for (const char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

}  // namespace

std::span<const WeightKind> all_kinds() { return kAllKinds; }

std::string_view kind_name(WeightKind kind) {
  switch (kind) {
    case WeightKind::kAmazon: return "Amazon";
    case WeightKind::kBP: return "BP";
    case WeightKind::kJaccard: return "Jaccard";
    case WeightKind::kJaccardAsym: return "Jaccard-asym";
    case WeightKind::kMDW: return "MDW";
    case WeightKind::kMDWAsym: return "MDW-asym";
    case WeightKind::kNBI: return "NBI";
  }
  return "?";
}

WeightKind parse_kind(std::string_view name) {
  const auto key = lowercase_alnum(name);
  for (const auto kind : kAllKinds) {
    if (lowercase_alnum(kind_name(kind)) == key) return kind;
  }
  throw ArgumentError(kModule, "unknown weight function '" + std::string(name) +
                                   "' (expected Amazon, BP, Jaccard, Jaccard-asym, MDW, MDW-asym or NBI)");
}

bool is_symmetric(WeightKind kind) {
  return kind == WeightKind::kJaccard || kind == WeightKind::kMDW || kind == WeightKind::kBP;
}

std::vector<std::pair<ShowId, ShowId>> candidate_pairs(const InteractionIndex& index) {
  std::vector<std::pair<ShowId, ShowId>> pairs;
  for (catalog::UserId u = 0; u < index.user_count(); ++u) {
    const auto shows = index.shows_of(u);
    for (const auto a : shows) {
      for (const auto b : shows) {
        if (a != b) pairs.emplace_back(a, b);
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

double weight(WeightKind kind, ShowId s1, ShowId s2, const InteractionIndex& index) {
  if (s1 >= index.show_count() || s2 >= index.show_count()) {
    throw LookupError(kModule, "show id out of range");
  }
  if (s1 == s2) throw ArgumentError(kModule, "weight is undefined for a show paired with itself");

  PairStats st;
  st.k1 = index.show_degree(s1);
  st.k2 = index.show_degree(s2);
  const auto a = index.buyers_of(s1);
  const auto b = index.buyers_of(s2);
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      const auto ku = index.user_degree(*ia);
      assert(ku >= 2);
      ++st.common;
      st.inverse_degree_sum += 1.0 / static_cast<double>(ku);
      st.inverse_excess_sum += 1.0 / static_cast<double>(ku - 1);
      ++ia;
      ++ib;
    }
  }
  if (kind == WeightKind::kAmazon) {
    const auto histogram = exponent_histogram(index, s1);
    return weight_from_stats(kind, st, index, &histogram);
  }
  return weight_from_stats(kind, st, index, nullptr);
}

double weight(WeightKind kind, std::string_view s1, std::string_view s2, const InteractionIndex& index) {
  return weight(kind, index.show_id(s1), index.show_id(s2), index);
}

// ---------------------------------------------------------------------------
// ItemGraph
// ---------------------------------------------------------------------------

ItemGraph::ItemGraph(std::vector<std::string> node_names) {
  out_.resize(node_names.size());
  lookup_.reserve(node_names.size());
  for (NodeId i = 0; i < node_names.size(); ++i) {
    if (!lookup_.emplace(node_names[i], i).second) {
      throw ConflictError(kModule, "duplicate node name '" + node_names[i] + "'");
    }
  }
  names_ = std::move(node_names);
}

std::optional<NodeId> ItemGraph::find(std::string_view name) const {
  const auto it = lookup_.find(std::string(name));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> ItemGraph::edge_weight(NodeId source, NodeId target) const {
  const auto& edges = out_[source];
  const auto it = std::lower_bound(edges.begin(), edges.end(), target,
                                   [](const Edge& e, NodeId t) { return e.target < t; });
  if (it == edges.end() || it->target != target) return std::nullopt;
  return it->weight;
}

NodeId ItemGraph::add_node(std::string name) {
  const auto id = static_cast<NodeId>(names_.size());
  if (!lookup_.emplace(name, id).second) {
    throw ConflictError(kModule, "show '" + name + "' is already a node of the graph");
  }
  names_.push_back(std::move(name));
  out_.emplace_back();
  return id;
}

void ItemGraph::add_edge(NodeId source, NodeId target, double weight) {
  if (source >= node_count() || target >= node_count()) throw LookupError(kModule, "edge endpoint out of range");
  if (source == target) throw ArgumentError(kModule, "self-loop on '" + names_[source] + "'");
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw ArgumentError(kModule, "edge weight must be positive and finite");
  }
  auto& edges = out_[source];
  const auto it = std::lower_bound(edges.begin(), edges.end(), target,
                                   [](const Edge& e, NodeId t) { return e.target < t; });
  if (it != edges.end() && it->target == target) {
    throw ConflictError(kModule, "edge " + names_[source] + " -> " + names_[target] + " already exists");
  }
  edges.insert(it, Edge{target, weight});
  ++edge_count_;
}

void ItemGraph::set_out_edges(NodeId source, std::vector<Edge> edges) {
  for (std::size_t i = 0; i < edges.size(); ++i) {
    assert(edges[i].target != source && edges[i].weight > 0.0);
    assert(i == 0 || edges[i - 1].target < edges[i].target);
  }
  edge_count_ -= out_[source].size();
  edge_count_ += edges.size();
  out_[source] = std::move(edges);
}

ItemGraph build_graph(const InteractionIndex& index, WeightKind kind, unsigned threads) {
  const std::size_t n = index.show_count();
  std::vector<std::vector<Edge>> rows(n);

  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> common(n, 0);
    std::vector<double> inverse_degree(n, 0.0);
    std::vector<double> inverse_excess(n, 0.0);
    std::vector<ShowId> touched;

    for (std::size_t source = begin; source < end; ++source) {
      const auto s1 = static_cast<ShowId>(source);
      // Buyers are visited in ascending id order, which matches weight()'s
      // merge order and keeps the sums bit-identical to it.
      for (const auto u : index.buyers_of(s1)) {
        const auto ku = index.user_degree(u);
        for (const auto s2 : index.shows_of(u)) {
          if (s2 == s1) continue;
          if (common[s2]++ == 0) touched.push_back(s2);
          inverse_degree[s2] += 1.0 / static_cast<double>(ku);
          inverse_excess[s2] += 1.0 / static_cast<double>(ku - 1);
        }
      }
      std::sort(touched.begin(), touched.end());

      ExponentHistogram histogram;
      if (kind == WeightKind::kAmazon) histogram = exponent_histogram(index, s1);

      auto& row = rows[source];
      for (const auto s2 : touched) {
        const PairStats st{common[s2], inverse_degree[s2], inverse_excess[s2], index.show_degree(s1),
                           index.show_degree(s2)};
        const double w = weight_from_stats(kind, st, index, &histogram);
        if (w > 0.0) row.push_back({s2, w});
        common[s2] = 0;
        inverse_degree[s2] = 0.0;
        inverse_excess[s2] = 0.0;
      }
      touched.clear();
    }
  });

  ItemGraph graph(index.show_names());
  graph.set_kind(kind);
  for (NodeId s = 0; s < n; ++s) graph.set_out_edges(s, std::move(rows[s]));
  return graph;
}

// ---------------------------------------------------------------------------
// TSV persistence
// ---------------------------------------------------------------------------

void write_graph_tsv(std::ostream& out, const ItemGraph& graph, std::string_view fingerprint) {
  out << "# weight_function=" << (graph.kind() ? kind_name(*graph.kind()) : std::string_view("none")) << '\n';
  out << "# format=" << kGraphFormatVersion << '\n';
  if (!fingerprint.empty()) out << "# config=" << fingerprint << '\n';
  for (const auto& name : graph.names()) out << "#node\t" << name << '\n';
  for (NodeId s = 0; s < graph.node_count(); ++s) {
    for (const auto& e : graph.out_edges(s)) {
      out << graph.name(s) << '\t' << graph.name(e.target) << '\t' << detail::format_double(e.weight) << '\n';
    }
  }
}

ItemGraph read_graph_tsv(std::istream& in) {
  ItemGraph graph;
  std::string line;
  std::size_t line_no = 0;
  auto node_of = [&graph](const std::string& name) {
    if (const auto id = graph.find(name)) return *id;
    return graph.add_node(name);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    if (view.rfind("#node\t", 0) == 0) {
      const std::string name(view.substr(6));
      if (graph.find(name)) throw FormatError(kModule, "graph line " + std::to_string(line_no) + ": duplicate node");
      graph.add_node(name);
      continue;
    }
    if (view.front() == '#') {
      constexpr std::string_view kKindKey = "# weight_function=";
      if (view.rfind(kKindKey, 0) == 0) {
        const auto value = view.substr(kKindKey.size());
        if (value != "none") graph.set_kind(parse_kind(value));
      }
      continue;
    }
    const auto tab1 = view.find('\t');
    const auto tab2 = tab1 == std::string_view::npos ? tab1 : view.find('\t', tab1 + 1);
    if (tab2 == std::string_view::npos) {
      throw FormatError(kModule, "graph line " + std::to_string(line_no) + ": expected source<TAB>target<TAB>weight");
    }
    const std::string source(view.substr(0, tab1));
    const std::string target(view.substr(tab1 + 1, tab2 - tab1 - 1));
    const auto weight_text = view.substr(tab2 + 1);
    double w = 0.0;
    const auto [ptr, ec] = std::from_chars(weight_text.data(), weight_text.data() + weight_text.size(), w);
    if (ec != std::errc() || ptr != weight_text.data() + weight_text.size()) {
      throw FormatError(kModule, "graph line " + std::to_string(line_no) + ": bad weight");
    }
    try {
      graph.add_edge(node_of(source), node_of(target), w);
    } catch (const Error& e) {
      throw FormatError(kModule, "graph line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (in.bad()) throw IoError(kModule, "read failure in graph file");
  return graph;
}

void write_graph_file(const std::string& path, const ItemGraph& graph, std::string_view fingerprint) {
  auto out = detail::open_output(path, kModule);
  write_graph_tsv(out, graph, fingerprint);
  detail::finish_output(out, path, kModule);
}

ItemGraph read_graph_file(const std::string& path) {
  auto in = detail::open_input(path, kModule);
  return read_graph_tsv(in);
}

}  // namespace coldstart::copurchase
