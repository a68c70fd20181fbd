/**
 * @file propagation.cpp
 * @brief Step-normalized similarity propagation and user ranking
 */

#include "coldstart/propagation.hpp"

#include <algorithm>
#include <ostream>

#include "coldstart/error.hpp"
#include "io_util.hpp"

namespace coldstart::propagation {

namespace {

constexpr const char* kModule = "propagation";

}  // namespace

double PropagationState::value(std::size_t step, NodeId node) const {
  const auto& entries = steps_[step];
  const auto it = std::lower_bound(entries.begin(), entries.end(), node,
                                   [](const auto& entry, NodeId n) { return entry.first < n; });
  return it != entries.end() && it->first == node ? it->second : 0.0;
}

double PropagationState::step_total(std::size_t step) const {
  double total = 0.0;
  for (const auto& [node, v] : steps_[step]) total += v;
  return total;
}

std::vector<double> PropagationState::summed_through(std::size_t steps) const {
  if (steps > length()) throw ArgumentError(kModule, "requested more steps than were propagated");
  std::vector<double> total(summed_.size(), 0.0);
  for (std::size_t i = 1; i <= steps; ++i) {
    for (const auto& [node, v] : steps_[i]) total[node] += v;
  }
  return total;
}

PropagationState propagate(const ItemGraph& graph, NodeId source, std::size_t length) {
  if (source >= graph.node_count()) throw LookupError(kModule, "source node out of range");
  if (length < 1) throw ArgumentError(kModule, "propagation length must be at least 1");

  const std::size_t n = graph.node_count();
  PropagationState state;
  state.source_ = source;
  state.steps_.reserve(length + 1);
  state.steps_.push_back({{source, 1.0}});
  state.summed_.assign(n, 0.0);

  std::vector<double> flow(n, 0.0);
  std::vector<char> seen(n, 0);
  std::vector<NodeId> touched;
  for (std::size_t step = 0; step < length; ++step) {
    const auto& current = state.steps_.back();
    // Wide supports scan the dense accumulator; narrow ones track touched nodes.
    const bool dense = current.size() > n / 8;

    for (const auto& [from, mass] : current) {
      for (const auto& e : graph.out_edges(from)) {
        if (!dense && !seen[e.target]) {
          seen[e.target] = 1;
          touched.push_back(e.target);
        }
        flow[e.target] += mass * e.weight;
      }
    }
    if (dense) {
      touched.clear();
      for (NodeId v = 0; v < n; ++v) {
        if (flow[v] != 0.0) touched.push_back(v);
      }
    } else {
      std::sort(touched.begin(), touched.end());
    }

    double total = 0.0;
    for (const auto v : touched) total += flow[v];

    SparseVector next;
    if (total > 0.0) {
      next.reserve(touched.size());
      for (const auto v : touched) {
        if (flow[v] == 0.0) continue;
        const double t = flow[v] / total;
        next.emplace_back(v, t);
        state.summed_[v] += t;
      }
    }
    for (const auto v : touched) {
      flow[v] = 0.0;
      seen[v] = 0;
    }
    touched.clear();
    state.steps_.push_back(std::move(next));
  }
  return state;
}

PropagationState propagate(const ItemGraph& graph, std::string_view source, std::size_t length) {
  const auto node = graph.find(source);
  if (!node) throw LookupError(kModule, "show '" + std::string(source) + "' is not a node of the graph");
  return propagate(graph, *node, length);
}

AudienceRanking rank_users(const InteractionIndex& index, const ItemGraph& graph, const PropagationState& state) {
  return rank_users(index, graph, state.summed(), state.source());
}

AudienceRanking rank_users(const InteractionIndex& index, const ItemGraph& graph, std::span<const double> summed,
                           NodeId source) {
  std::vector<double> show_score(index.show_count(), 0.0);
  for (catalog::ShowId s = 0; s < index.show_count(); ++s) {
    const auto node = graph.find(index.show_name(s));
    if (node && *node != source && *node < summed.size()) show_score[s] = summed[*node];
  }

  std::vector<std::pair<double, catalog::UserId>> scored(index.user_count());
  for (catalog::UserId u = 0; u < index.user_count(); ++u) {
    double best = 0.0;
    for (const auto s : index.shows_of(u)) best = std::max(best, show_score[s]);
    scored[u] = {best, u};
  }
  // User ids follow name order, so ascending id is ascending user_id.
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });

  AudienceRanking ranking;
  ranking.users.reserve(scored.size());
  for (const auto& [score, u] : scored) ranking.users.push_back({index.user_name(u), score});
  return ranking;
}

void write_ranking_csv(std::ostream& out, const AudienceRanking& ranking, std::size_t limit) {
  out << "rank,user_id,score\n";
  const std::size_t n = limit == 0 ? ranking.users.size() : std::min(limit, ranking.users.size());
  for (std::size_t i = 0; i < n; ++i) {
    out << (i + 1) << ',' << ranking.users[i].user_id << ',' << detail::format_double(ranking.users[i].score)
        << '\n';
  }
}

void write_ranking_file(const std::string& path, const AudienceRanking& ranking, std::size_t limit) {
  auto out = detail::open_output(path, kModule);
  write_ranking_csv(out, ranking, limit);
  detail::finish_output(out, path, kModule);
}

}  // namespace coldstart::propagation
