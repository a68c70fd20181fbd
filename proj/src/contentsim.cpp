/**
 * @file contentsim.cpp
 * @brief Content similarity and the content-to-collaborative regression
 */

#include "coldstart/contentsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_set>

#include <json.hpp>

#include "coldstart/error.hpp"
#include "io_util.hpp"

namespace coldstart::contentsim {

namespace {

constexpr const char* kModule = "contentsim";

using copurchase::Edge;
using copurchase::NodeId;

template <typename T>
double set_jaccard(const std::set<T>& a, const std::set<T>& b) {
  std::size_t shared = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++shared;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(shared) / static_cast<double>(a.size() + b.size() - shared);
}

FeatureSimilarity all_missing() {
  FeatureSimilarity f;
  f.missing.fill(true);
  return f;
}

FeatureSimilarity features_by_name(const Catalog& catalog, const std::string& a, const std::string& b) {
  const auto* ra = catalog.find(a);
  const auto* rb = catalog.find(b);
  if (ra == nullptr || rb == nullptr) return all_missing();
  return pair_features(*ra, *rb);
}

double prediction(const LinearModel& model, const FeatureSimilarity& f) {
  double p = model.intercept;
  for (std::size_t c = 0; c < kCategoryCount; ++c) p += model.coefficients[c] * f.values[c];
  return p;
}

double training_mse(const LinearModel& model, const TrainingSet& ts) {
  double total = 0.0;
  for (const auto& row : ts.rows) {
    const double err = prediction(model, row.features) - row.target_weight;
    total += err * err;
  }
  return total / static_cast<double>(ts.rows.size());
}

}  // namespace

FeatureSimilarity pair_features(const ShowRecord& a, const ShowRecord& b) {
  FeatureSimilarity f;
  auto indicator = [&f](Category c, const std::optional<std::string>& x, const std::optional<std::string>& y) {
    const auto i = static_cast<std::size_t>(c);
    if (!x || !y) {
      f.missing[i] = true;
      return;
    }
    f.values[i] = *x == *y ? 1.0 : 0.0;
  };
  auto jaccard = [&f](Category c, const std::set<std::string>& x, const std::set<std::string>& y) {
    const auto i = static_cast<std::size_t>(c);
    if (x.empty() || y.empty()) {
      f.missing[i] = true;
      return;
    }
    f.values[i] = set_jaccard(x, y);
  };
  indicator(Category::kCity, a.city, b.city);
  indicator(Category::kVenue, a.venue, b.venue);
  jaccard(Category::kTypes, a.types, b.types);
  jaccard(Category::kStakeholders, a.stakeholders, b.stakeholders);
  return f;
}

TrainingSet assemble_training_set(const InteractionIndex& index, const ItemGraph& graph, WeightKind kind,
                                  std::uint64_t negative_seed, const Catalog& catalog) {
  const std::size_t n = graph.node_count();
  std::vector<ShowId> show_of(n);
  for (NodeId v = 0; v < n; ++v) {
    const auto id = index.find_show(graph.name(v));
    if (!id) throw TrainingError(kModule, "graph node '" + graph.name(v) + "' is not a show of the index");
    show_of[v] = *id;
  }

  TrainingSet ts;
  std::size_t blocked = 0;  // ordered pairs with an edge in either direction
  for (NodeId s = 0; s < n; ++s) {
    for (const auto& e : graph.out_edges(s)) {
      double target = e.weight;
      const auto reverse = graph.edge_weight(e.target, s);
      if (!reverse) ++blocked;
      if (!is_symmetric(kind) && reverse) target = std::max(target, *reverse);
      ts.rows.push_back({show_of[s], show_of[e.target],
                         features_by_name(catalog, graph.name(s), graph.name(e.target)), target});
      ++blocked;
    }
  }
  ts.positive_count = ts.rows.size();
  if (ts.positive_count == 0) throw TrainingError(kModule, "graph has no edges; nothing to learn from");

  auto is_blocked = [&graph](NodeId a, NodeId b) {
    return graph.edge_weight(a, b).has_value() || graph.edge_weight(b, a).has_value();
  };

  const std::size_t universe = n * (n - 1);
  const std::size_t available = universe - blocked;
  const std::size_t wanted = ts.positive_count;

  std::vector<std::pair<NodeId, NodeId>> negatives;
  std::mt19937_64 rng(negative_seed);
  if (available <= 2 * wanted) {
    std::vector<std::pair<NodeId, NodeId>> all;
    all.reserve(available);
    for (NodeId a = 0; a < n; ++a) {
      for (NodeId b = 0; b < n; ++b) {
        if (a != b && !is_blocked(a, b)) all.emplace_back(a, b);
      }
    }
    if (all.size() <= wanted) {
      negatives = std::move(all);
    } else {
      std::sample(all.begin(), all.end(), std::back_inserter(negatives), wanted, rng);
    }
  } else {
    // Rejection sampling without replacement; at least half the draws succeed.
    std::unordered_set<std::uint64_t> chosen;
    std::uniform_int_distribution<NodeId> pick_a(0, static_cast<NodeId>(n - 1));
    std::uniform_int_distribution<NodeId> pick_b(0, static_cast<NodeId>(n - 2));
    while (negatives.size() < wanted) {
      const NodeId a = pick_a(rng);
      NodeId b = pick_b(rng);
      if (b >= a) ++b;
      if (is_blocked(a, b)) continue;
      if (!chosen.insert((static_cast<std::uint64_t>(a) << 32) | b).second) continue;
      negatives.emplace_back(a, b);
    }
    std::sort(negatives.begin(), negatives.end());
  }

  for (const auto& [a, b] : negatives) {
    double target = copurchase::weight(kind, show_of[a], show_of[b], index);
    if (!is_symmetric(kind)) target = std::max(target, copurchase::weight(kind, show_of[b], show_of[a], index));
    ts.rows.push_back({show_of[a], show_of[b], features_by_name(catalog, graph.name(a), graph.name(b)), target});
  }
  ts.negative_count = negatives.size();
  ts.negative_shortfall = wanted - ts.negative_count;
  return ts;
}

double row_loss(const LinearModel& model, const FeatureSimilarity& f, double target) {
  const double err = prediction(model, f) - target;
  return 0.5 * err * err;
}

std::array<double, kCategoryCount + 1> row_gradient(const LinearModel& model, const FeatureSimilarity& f,
                                                    double target) {
  const double err = prediction(model, f) - target;
  std::array<double, kCategoryCount + 1> grad{};
  for (std::size_t c = 0; c < kCategoryCount; ++c) grad[c] = err * f.values[c];
  grad[kCategoryCount] = err;
  return grad;
}

LinearModel train_sgd(const TrainingSet& training_set, const SgdParams& params) {
  if (training_set.rows.empty()) throw TrainingError(kModule, "cannot train on an empty training set");
  if (!(params.learning_rate > 0.0) || !std::isfinite(params.learning_rate)) {
    throw ArgumentError(kModule, "learning rate must be positive");
  }
  if (params.l2 < 0.0) throw ArgumentError(kModule, "L2 penalty must be non-negative");

  LinearModel model;
  model.params = params;
  std::vector<std::size_t> order(training_set.rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(params.shuffle_seed);

  for (std::size_t epoch = 1; epoch <= params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (const auto i : order) {
      const auto& row = training_set.rows[i];
      const auto grad = row_gradient(model, row.features, row.target_weight);
      epoch_loss += grad[kCategoryCount] * grad[kCategoryCount];
      for (std::size_t c = 0; c < kCategoryCount; ++c) {
        model.coefficients[c] -= params.learning_rate * (grad[c] + params.l2 * model.coefficients[c]);
      }
      if (params.fit_intercept) model.intercept -= params.learning_rate * grad[kCategoryCount];
    }
    const bool finite = std::isfinite(epoch_loss) && std::isfinite(model.intercept) &&
                        std::all_of(model.coefficients.begin(), model.coefficients.end(),
                                    [](double v) { return std::isfinite(v); });
    if (!finite) {
      throw DivergenceError(kModule, "SGD diverged in epoch " + std::to_string(epoch) + " (learning rate " +
                                         detail::format_double(params.learning_rate) + ")");
    }
  }
  model.final_mse = training_mse(model, training_set);
  if (!std::isfinite(model.final_mse)) throw DivergenceError(kModule, "SGD produced a non-finite training error");
  return model;
}

double predict_weight(const LinearModel& model, const FeatureSimilarity& f) { return prediction(model, f); }

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

std::string model_to_json(const LinearModel& model, std::string_view fingerprint) {
  nlohmann::ordered_json obj;
  obj["format"] = kModelFormatVersion;
  obj["weight_function_kind"] = model.kind ? nlohmann::ordered_json(std::string(kind_name(*model.kind)))
                                           : nlohmann::ordered_json(nullptr);
  nlohmann::ordered_json coefficients;
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    coefficients[std::string(kCategoryNames[c])] = model.coefficients[c];
  }
  obj["coefficients"] = coefficients;
  obj["intercept"] = model.intercept;
  obj["hyperparameters"] = {
      {"learning_rate", model.params.learning_rate},
      {"epochs", model.params.epochs},
      {"l2", model.params.l2},
      {"fit_intercept", model.params.fit_intercept},
  };
  obj["seed"] = model.params.shuffle_seed;
  obj["final_mse"] = model.final_mse;
  if (!fingerprint.empty()) obj["config"] = std::string(fingerprint);
  return obj.dump(2) + "\n";
}

LinearModel model_from_json(std::string_view text) {
  using nlohmann::json;
  try {
    const auto obj = json::parse(text);
    LinearModel model;
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      model.coefficients[c] = obj.at("coefficients").at(std::string(kCategoryNames[c])).get<double>();
    }
    model.intercept = obj.at("intercept").get<double>();
    const auto& hyper = obj.at("hyperparameters");
    model.params.learning_rate = hyper.at("learning_rate").get<double>();
    model.params.epochs = hyper.at("epochs").get<std::size_t>();
    model.params.l2 = hyper.value("l2", 0.0);
    model.params.fit_intercept = hyper.value("fit_intercept", true);
    model.params.shuffle_seed = obj.at("seed").get<std::uint64_t>();
    model.final_mse = obj.at("final_mse").get<double>();
    if (const auto it = obj.find("weight_function_kind"); it != obj.end() && !it->is_null()) {
      model.kind = copurchase::parse_kind(it->get<std::string>());
    }
    return model;
  } catch (const json::exception& e) {
    throw FormatError(kModule, std::string("invalid model JSON: ") + e.what());
  }
}

void write_model_file(const std::string& path, const LinearModel& model, std::string_view fingerprint) {
  auto out = detail::open_output(path, kModule);
  out << model_to_json(model, fingerprint);
  detail::finish_output(out, path, kModule);
}

LinearModel read_model_file(const std::string& path) {
  auto in = detail::open_input(path, kModule);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return model_from_json(text);
}

// ---------------------------------------------------------------------------
// Insertion
// ---------------------------------------------------------------------------

ItemGraph insert_new_show(const ItemGraph& graph, const LinearModel& model, const Catalog& catalog,
                          const ShowRecord& new_show, const InsertionPolicy& policy) {
  if (graph.find(new_show.show_id)) {
    throw ConflictError(kModule, "show '" + new_show.show_id + "' is already in the graph");
  }
  if (policy.mode == InsertionPolicy::Mode::kTopK && policy.k == 0) {
    throw ArgumentError(kModule, "top-K insertion needs K >= 1");
  }

  std::vector<Edge> links;
  for (NodeId s = 0; s < graph.node_count(); ++s) {
    const auto* record = catalog.find(graph.name(s));
    const auto f = record ? pair_features(new_show, *record) : all_missing();
    const double p = predict_weight(model, f);
    if (p > 0.0 && std::isfinite(p)) links.push_back({s, p});
  }
  if (policy.mode == InsertionPolicy::Mode::kTopK && links.size() > policy.k) {
    std::partial_sort(links.begin(), links.begin() + static_cast<std::ptrdiff_t>(policy.k), links.end(),
                      [](const Edge& a, const Edge& b) {
                        return a.weight != b.weight ? a.weight > b.weight : a.target < b.target;
                      });
    links.resize(policy.k);
    std::sort(links.begin(), links.end(), [](const Edge& a, const Edge& b) { return a.target < b.target; });
  }

  ItemGraph augmented = graph;
  const NodeId node = augmented.add_node(new_show.show_id);
  if (policy.symmetric) {
    for (const auto& e : links) augmented.add_edge(e.target, node, e.weight);
  }
  augmented.set_out_edges(node, std::move(links));
  return augmented;
}

}  // namespace coldstart::contentsim
