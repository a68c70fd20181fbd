/**
 * @file cli.cpp
 * @brief Subcommand dispatch and configuration resolution
 */

#include "coldstart/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "coldstart/contentsim.hpp"
#include "coldstart/error.hpp"
#include "coldstart/evaluation.hpp"
#include "coldstart/propagation.hpp"
#include "coldstart/synthetic.hpp"
#include "io_util.hpp"

namespace coldstart::cli {

namespace {

constexpr const char* kModule = "cli";

using detail::format_double;

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto text = detail::trim(value);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(kModule, "bad value '" + value + "' for '" + key + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const auto text = detail::trim(value);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(kModule, "bad boolean '" + value + "' for '" + key + "'");
}

std::string join_lengths(const std::vector<std::size_t>& values) {
  std::string out;
  for (const auto v : values) out += (out.empty() ? "" : ",") + std::to_string(v);
  return out;
}

std::string join_kinds(const std::vector<copurchase::WeightKind>& kinds) {
  if (kinds.empty()) return "all";
  std::string out;
  for (const auto k : kinds) out += (out.empty() ? "" : ",") + std::string(kind_name(k));
  return out;
}

std::string path_in(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

void ensure_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(parent, ec);
  if (ec) throw IoError(kModule, "cannot create directory '" + parent.string() + "': " + ec.message());
}

// ---------------------------------------------------------------------------
// Option plumbing
// ---------------------------------------------------------------------------

/// Flags bound to config keys; values are applied after the config file.
class OptionBinder {
 public:
  explicit OptionBinder(CLI::App* app) : app_(app) {}

  void setting(const std::string& flag, const std::string& key, const std::string& help) {
    auto& slot = storage_.emplace_back();
    bound_.push_back({app_->add_option(flag, slot, help), key, &slot, {}});
  }
  /// A value-less flag that sets `key` to `value`.
  void toggle(const std::string& flag, const std::string& key, const std::string& value, const std::string& help) {
    bound_.push_back({app_->add_flag(flag, help), key, nullptr, value});
  }
  /// A command-local string (output paths and the like), not part of the config.
  template <typename T>
  CLI::Option* local(const std::string& flag, T& target, const std::string& help) {
    return app_->add_option(flag, target, help);
  }
  void config_file(std::string& target) {
    app_->add_option("--config", target, "key = value configuration file; flags override it");
  }
  void threads() { setting("--threads", "threads", "worker threads (0 = machine parallelism)"); }

  void apply(PipelineConfig& config) const {
    for (const auto& b : bound_) {
      if (b.option->count() == 0) continue;
      apply_setting(config, b.key, b.slot ? *b.slot : b.fixed_value);
    }
  }

 private:
  struct Bound {
    CLI::Option* option;
    std::string key;
    const std::string* slot;
    std::string fixed_value;
  };
  CLI::App* app_;
  std::deque<std::string> storage_;
  std::vector<Bound> bound_;
};

void add_training_options(OptionBinder& b) {
  b.setting("--lr", "learning_rate", "SGD learning rate");
  b.setting("--epochs", "epochs", "SGD epochs");
  b.setting("--l2", "l2", "L2 penalty on coefficients");
  b.toggle("--no-intercept", "fit_intercept", "false", "fit without an intercept");
  b.setting("--negative-seed", "negative_seed", "seed of the negative-pair sample");
  b.setting("--sgd-seed", "sgd_seed", "seed of the per-epoch shuffle");
}

void add_insertion_options(OptionBinder& b) {
  b.setting("--insertion", "insertion_mode", "keep-positive or top-k");
  b.setting("--k", "insertion_k", "K for top-k insertion");
  b.toggle("--asymmetric-insertion", "symmetric_insertion", "false", "only link the new show outward");
}

void add_holdout_options(OptionBinder& b) {
  b.setting("--cutoff", "cutoff", "holdout cutoff (UTC seconds)");
  b.setting("--cutoff-fraction", "cutoff_fraction", "cutoff as a fraction of the time range (when --cutoff is unset)");
  b.setting("--test-sample", "test_sample", "number of test shows to sample");
  b.setting("--test-sample-seed", "test_sample_seed", "seed for the test-show sample");
  b.setting("--cost", "communication_cost", "communication cost per contacted user (euros)");
}

// ---------------------------------------------------------------------------
// Shared pipeline steps
// ---------------------------------------------------------------------------

std::vector<catalog::Transaction> load_transactions(const PipelineConfig& config, std::ostream& err,
                                                    std::size_t* malformed = nullptr) {
  if (config.transactions.empty()) throw ConfigError(kModule, "no transaction file given (--transactions)");
  auto result = catalog::read_transactions_file(config.transactions);
  if (result.malformed_count > 0) {
    err << "catalog: " << result.malformed_count << " malformed row(s) in '" << config.transactions << "'\n";
    for (const auto& row : result.malformed_samples) err << "  line " << row.line << ": " << row.reason << '\n';
  }
  if (malformed) *malformed = result.malformed_count;
  return std::move(result.transactions);
}

catalog::InteractionIndex load_index(const PipelineConfig& config, std::ostream& err) {
  if (!config.index.empty()) return catalog::load_index_file(config.index);
  if (config.transactions.empty()) throw ConfigError(kModule, "need --transactions or --index");
  const auto transactions = load_transactions(config, err);
  return catalog::InteractionIndex::build(transactions);
}

catalog::Catalog load_catalog(const PipelineConfig& config) {
  if (config.shows.empty()) throw ConfigError(kModule, "no show catalog given (--shows)");
  return catalog::read_shows_file(config.shows);
}

evaluation::PipelineOptions pipeline_options(const PipelineConfig& config) {
  evaluation::PipelineOptions options;
  options.sgd.learning_rate = config.learning_rate;
  options.sgd.epochs = config.epochs;
  options.sgd.l2 = config.l2;
  options.sgd.fit_intercept = config.fit_intercept;
  options.sgd.shuffle_seed = config.sgd_seed;
  options.negative_seed = config.negative_seed;
  if (config.insertion_mode == "top-k") {
    options.insertion = contentsim::InsertionPolicy::top_k(config.insertion_k);
  }
  options.insertion.symmetric = config.symmetric_insertion;
  options.revenue.communication_cost = config.communication_cost;
  options.threads = config.threads;
  return options;
}

struct Split {
  catalog::HoldoutSplit split;
  catalog::Catalog catalog;
};

Split load_split(PipelineConfig& config, std::ostream& err) {
  const auto transactions = load_transactions(config, err);
  Split s{{}, load_catalog(config)};
  if (!config.cutoff) config.cutoff = catalog::cutoff_at_fraction(transactions, config.cutoff_fraction);
  catalog::HoldoutOptions holdout;
  holdout.cutoff = *config.cutoff;
  holdout.test_sample = config.test_sample;
  holdout.sample_seed = config.test_sample_seed;
  s.split = catalog::split_holdout(transactions, holdout);
  err << "catalog: cutoff " << *config.cutoff << ", " << s.split.train_index.show_count() << " train shows, "
      << s.split.test.size() << " of " << s.split.test_candidates << " test shows\n";
  return s;
}

std::map<std::string, std::string> artifact_config(const PipelineConfig& config) {
  auto entries = to_entries(config);
  entries["fingerprint"] = fingerprint(config);
  return entries;
}

void emit(std::ostream& out, nlohmann::ordered_json summary) { out << summary.dump() << std::endl; }

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct Locals {
  std::string out;
  std::string report;
  std::string graph;
  std::string model;
  std::string show;
  std::size_t limit = 0;
};

void run_synth(const PipelineConfig& config, const Locals&, std::ostream& out, std::ostream& err) {
  evaluation::SyntheticSpec spec;
  spec.num_users = config.synth_users;
  spec.num_shows = config.synth_shows;
  spec.num_communities = config.synth_communities;
  spec.feature_noise = config.synth_feature_noise;
  spec.purchases_per_user = config.synth_purchases_per_user;
  spec.in_community_rate = config.synth_in_community_rate;
  spec.seed = config.synthetic_seed;
  const auto data = evaluation::generate_synthetic(spec);

  const auto transactions_path = path_in(config.output_dir, "transactions.csv");
  const auto shows_path = path_in(config.output_dir, "shows.jsonl");
  ensure_parent(transactions_path);
  catalog::write_transactions_file(transactions_path, data.transactions);
  catalog::write_shows_file(shows_path, data.catalog);
  err << "synth: wrote " << transactions_path << " and " << shows_path << '\n';
  emit(out, {{"command", "synth"},
             {"transactions", data.transactions.size()},
             {"users", spec.num_users},
             {"shows", data.catalog.size()},
             {"transactions_path", transactions_path},
             {"shows_path", shows_path},
             {"fingerprint", fingerprint(config)}});
}

void run_ingest(const PipelineConfig& config, const Locals& locals, std::ostream& out, std::ostream& err) {
  std::size_t malformed = 0;
  const auto transactions = load_transactions(config, err, &malformed);
  std::size_t shows_described = 0;
  if (!config.shows.empty()) shows_described = load_catalog(config).size();
  const auto index = catalog::InteractionIndex::build(transactions);
  const auto path = locals.out.empty() ? path_in(config.cache_dir, "index.cache") : locals.out;
  ensure_parent(path);
  catalog::save_index_file(path, index);
  emit(out, {{"command", "ingest"},
             {"rows", transactions.size()},
             {"malformed", malformed},
             {"users", index.user_count()},
             {"shows", index.show_count()},
             {"memberships", index.degree_sum()},
             {"catalog_shows", shows_described},
             {"index", path}});
}

void run_build_graph(const PipelineConfig& config, const Locals& locals, std::ostream& out, std::ostream& err) {
  const auto index = load_index(config, err);
  const auto graph = copurchase::build_graph(index, config.weight_function, config.threads);
  const auto path = locals.out.empty() ? path_in(config.output_dir, "graph.tsv") : locals.out;
  ensure_parent(path);
  copurchase::write_graph_file(path, graph, fingerprint(config));
  emit(out, {{"command", "build-graph"},
             {"weight_function", kind_name(config.weight_function)},
             {"nodes", graph.node_count()},
             {"edges", graph.edge_count()},
             {"graph", path},
             {"fingerprint", fingerprint(config)}});
}

void run_train_model(const PipelineConfig& config, const Locals& locals, std::ostream& out, std::ostream& err) {
  const auto index = load_index(config, err);
  const auto shows = load_catalog(config);
  const auto graph = locals.graph.empty() ? copurchase::build_graph(index, config.weight_function, config.threads)
                                          : copurchase::read_graph_file(locals.graph);
  if (graph.kind() && *graph.kind() != config.weight_function) {
    throw ConfigError(kModule, "graph was built with " + std::string(kind_name(*graph.kind())) +
                                   " but the weight function is " + std::string(kind_name(config.weight_function)));
  }
  const auto ts = contentsim::assemble_training_set(index, graph, config.weight_function, config.negative_seed, shows);
  if (ts.negative_shortfall > 0) {
    err << "contentsim: only " << ts.negative_count << " negative pairs available for " << ts.positive_count
        << " positives\n";
  }
  auto model = contentsim::train_sgd(ts, pipeline_options(config).sgd);
  model.kind = config.weight_function;
  const auto path = locals.out.empty() ? path_in(config.output_dir, "model.json") : locals.out;
  ensure_parent(path);
  contentsim::write_model_file(path, model, fingerprint(config));
  emit(out, {{"command", "train-model"},
             {"weight_function", kind_name(config.weight_function)},
             {"positive_rows", ts.positive_count},
             {"negative_rows", ts.negative_count},
             {"final_mse", model.final_mse},
             {"model", path},
             {"fingerprint", fingerprint(config)}});
}

void run_predict(const PipelineConfig& config, const Locals& locals, std::ostream& out, std::ostream& err) {
  auto show_in = detail::open_input(locals.show, kModule);
  const std::string show_text((std::istreambuf_iterator<char>(show_in)), std::istreambuf_iterator<char>());
  const auto new_show = catalog::parse_show(show_text);
  const auto graph = copurchase::read_graph_file(locals.graph);
  const auto model = contentsim::read_model_file(locals.model);
  const auto shows = load_catalog(config);
  const auto index = load_index(config, err);

  const auto augmented =
      contentsim::insert_new_show(graph, model, shows, new_show, pipeline_options(config).insertion);
  const auto node = *augmented.find(new_show.show_id);
  const auto state = propagation::propagate(augmented, node, config.propagation_length);
  const auto ranking = propagation::rank_users(index, augmented, state);

  const auto path = locals.out.empty() ? path_in(config.output_dir, "audience.csv") : locals.out;
  ensure_parent(path);
  propagation::write_ranking_file(path, ranking, locals.limit);
  emit(out, {{"command", "predict"},
             {"show_id", new_show.show_id},
             {"inserted_edges", augmented.out_edges(node).size()},
             {"propagation_length", config.propagation_length},
             {"ranked_users", ranking.users.size()},
             {"top_score", ranking.users.empty() ? 0.0 : ranking.users.front().score},
             {"ranking", path},
             {"fingerprint", fingerprint(config)}});
}

void run_evaluate(PipelineConfig config, const Locals& locals, std::ostream& out, std::ostream& err) {
  const auto data = load_split(config, err);
  auto report = evaluation::evaluate(data.split.train_index, data.catalog, data.split.test, config.weight_function,
                                     config.propagation_length, pipeline_options(config));
  for (auto& [key, value] : artifact_config(config)) report.config[key] = value;
  const auto path = locals.out.empty() ? path_in(config.output_dir, "report.json") : locals.out;
  ensure_parent(path);
  evaluation::write_report_file(path, report);
  emit(out, {{"command", "evaluate"},
             {"weight_function", kind_name(config.weight_function)},
             {"propagation_length", config.propagation_length},
             {"test_shows", report.per_show.size()},
             {"failed", report.failed},
             {"mean_revenue", report.mean_revenue},
             {"report", path},
             {"fingerprint", fingerprint(config)}});
}

void run_grid_search(PipelineConfig config, const Locals& locals, std::ostream& out, std::ostream& err) {
  const auto data = load_split(config, err);
  std::vector<copurchase::WeightKind> kinds = config.kinds;
  if (kinds.empty()) kinds.assign(copurchase::all_kinds().begin(), copurchase::all_kinds().end());
  const auto options = pipeline_options(config);
  const auto grid =
      evaluation::grid_search(data.split.train_index, data.catalog, data.split.test, config.l_values, kinds, options);

  const auto print = fingerprint(config);
  const auto path = locals.out.empty() ? path_in(config.output_dir, "grid.tsv") : locals.out;
  ensure_parent(path);
  evaluation::write_grid_file(path, grid, print);

  nlohmann::ordered_json summary = {{"command", "grid-search"},
                                    {"rows", grid.lengths.size()},
                                    {"columns", grid.kinds.size()},
                                    {"grid", path}};
  auto config_entries = artifact_config(config);
  if (config.baseline_trials > 0) {
    const double baseline = evaluation::random_baseline(data.split.train_index, data.split.test, options.revenue,
                                                        config.baseline_trials, config.test_sample_seed);
    config_entries["random_baseline_mean_revenue"] = format_double(baseline);
    summary["random_baseline"] = baseline;
  }
  if (!locals.report.empty()) {
    ensure_parent(locals.report);
    auto report_out = detail::open_output(locals.report, kModule);
    report_out << evaluation::grid_to_json(grid, config_entries);
    detail::finish_output(report_out, locals.report, kModule);
    summary["report"] = locals.report;
  }
  summary["fingerprint"] = print;
  emit(out, summary);
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

void apply_setting(PipelineConfig& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key(detail::trim(raw_key));
  const std::string value(detail::trim(raw_value));
  try {
    if (key == "transactions") c.transactions = value;
    else if (key == "shows") c.shows = value;
    else if (key == "index") c.index = value;
    else if (key == "cache_dir") c.cache_dir = value;
    else if (key == "output_dir") c.output_dir = value;
    else if (key == "weight_function") c.weight_function = copurchase::parse_kind(value);
    else if (key == "propagation_length") c.propagation_length = parse_number<std::size_t>(key, value);
    else if (key == "insertion_mode") {
      if (value != "keep-positive" && value != "top-k") {
        throw ConfigError(kModule, "insertion_mode must be keep-positive or top-k");
      }
      c.insertion_mode = value;
    } else if (key == "insertion_k") c.insertion_k = parse_number<std::size_t>(key, value);
    else if (key == "symmetric_insertion") c.symmetric_insertion = parse_bool(key, value);
    else if (key == "learning_rate") c.learning_rate = parse_number<double>(key, value);
    else if (key == "epochs") c.epochs = parse_number<std::size_t>(key, value);
    else if (key == "l2") c.l2 = parse_number<double>(key, value);
    else if (key == "fit_intercept") c.fit_intercept = parse_bool(key, value);
    else if (key == "communication_cost") c.communication_cost = parse_number<double>(key, value);
    else if (key == "negative_seed") c.negative_seed = parse_number<std::uint64_t>(key, value);
    else if (key == "sgd_seed") c.sgd_seed = parse_number<std::uint64_t>(key, value);
    else if (key == "synthetic_seed") c.synthetic_seed = parse_number<std::uint64_t>(key, value);
    else if (key == "test_sample_seed") c.test_sample_seed = parse_number<std::uint64_t>(key, value);
    else if (key == "cutoff") {
      if (value.empty() || value == "auto") c.cutoff.reset();
      else c.cutoff = parse_number<catalog::Timestamp>(key, value);
    } else if (key == "cutoff_fraction") c.cutoff_fraction = parse_number<double>(key, value);
    else if (key == "test_sample") {
      if (value.empty() || value == "all") c.test_sample.reset();
      else c.test_sample = parse_number<std::size_t>(key, value);
    } else if (key == "l_values") c.l_values = parse_lengths(value);
    else if (key == "kinds") c.kinds = parse_kinds(value);
    else if (key == "baseline_trials") c.baseline_trials = parse_number<std::size_t>(key, value);
    else if (key == "synth_users") c.synth_users = parse_number<std::size_t>(key, value);
    else if (key == "synth_shows") c.synth_shows = parse_number<std::size_t>(key, value);
    else if (key == "synth_communities") c.synth_communities = parse_number<std::size_t>(key, value);
    else if (key == "synth_feature_noise") c.synth_feature_noise = parse_number<double>(key, value);
    else if (key == "synth_purchases_per_user") c.synth_purchases_per_user = parse_number<double>(key, value);
    else if (key == "synth_in_community_rate") c.synth_in_community_rate = parse_number<double>(key, value);
    else if (key == "threads") c.threads = parse_number<unsigned>(key, value);
    else throw ConfigError(kModule, "unknown configuration key '" + key + "'");
  } catch (const ArgumentError& e) {
    throw ConfigError(kModule, "bad value for '" + key + "': " + e.what());
  }
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  auto in = detail::open_input(path, kModule);
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(kModule, path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    entries[std::string(detail::trim(text.substr(0, eq)))] = std::string(detail::trim(text.substr(eq + 1)));
  }
  return entries;
}

void validate(const PipelineConfig& c) {
  if (c.propagation_length < 1) throw ConfigError(kModule, "propagation_length must be >= 1");
  if (c.l_values.empty()) throw ConfigError(kModule, "l_values must not be empty");
  for (const auto l : c.l_values) {
    if (l < 1) throw ConfigError(kModule, "every l value must be >= 1");
  }
  if (!(c.communication_cost >= 0.0)) throw ConfigError(kModule, "communication_cost must be >= 0");
  if (c.insertion_mode == "top-k" && c.insertion_k < 1) throw ConfigError(kModule, "top-k insertion needs insertion_k >= 1");
  if (!(c.learning_rate > 0.0)) throw ConfigError(kModule, "learning_rate must be > 0");
  if (!(c.cutoff_fraction >= 0.0 && c.cutoff_fraction <= 1.0)) {
    throw ConfigError(kModule, "cutoff_fraction must lie in [0, 1]");
  }
  if (c.test_sample && *c.test_sample == 0) throw ConfigError(kModule, "test_sample must be positive");
}

std::map<std::string, std::string> to_entries(const PipelineConfig& c) {
  return {
      {"weight_function", std::string(kind_name(c.weight_function))},
      {"propagation_length", std::to_string(c.propagation_length)},
      {"insertion_mode", c.insertion_mode},
      {"insertion_k", std::to_string(c.insertion_k)},
      {"symmetric_insertion", c.symmetric_insertion ? "true" : "false"},
      {"learning_rate", format_double(c.learning_rate)},
      {"epochs", std::to_string(c.epochs)},
      {"l2", format_double(c.l2)},
      {"fit_intercept", c.fit_intercept ? "true" : "false"},
      {"communication_cost", format_double(c.communication_cost)},
      {"negative_seed", std::to_string(c.negative_seed)},
      {"sgd_seed", std::to_string(c.sgd_seed)},
      {"synthetic_seed", std::to_string(c.synthetic_seed)},
      {"test_sample_seed", std::to_string(c.test_sample_seed)},
      {"cutoff", c.cutoff ? std::to_string(*c.cutoff) : "auto"},
      {"cutoff_fraction", format_double(c.cutoff_fraction)},
      {"test_sample", c.test_sample ? std::to_string(*c.test_sample) : "all"},
      {"l_values", join_lengths(c.l_values)},
      {"kinds", join_kinds(c.kinds)},
      {"baseline_trials", std::to_string(c.baseline_trials)},
      {"synth_users", std::to_string(c.synth_users)},
      {"synth_shows", std::to_string(c.synth_shows)},
      {"synth_communities", std::to_string(c.synth_communities)},
      {"synth_feature_noise", format_double(c.synth_feature_noise)},
      {"synth_purchases_per_user", format_double(c.synth_purchases_per_user)},
      {"synth_in_community_rate", format_double(c.synth_in_community_rate)},
  };
}

std::string fingerprint(const PipelineConfig& config) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (const auto& [key, value] : to_entries(config)) {
    for (const char ch : key + "=" + value + "\n") {
      hash ^= static_cast<unsigned char>(ch);
      hash *= 1099511628211ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::vector<std::size_t> parse_lengths(const std::string& text) {
  std::vector<std::size_t> values;
  const auto range = text.find("..");
  if (range != std::string::npos) {
    const auto lo = parse_number<std::size_t>("l", text.substr(0, range));
    const auto hi = parse_number<std::size_t>("l", text.substr(range + 2));
    if (lo < 1 || hi < lo) throw ConfigError(kModule, "bad length range '" + text + "'");
    for (auto l = lo; l <= hi; ++l) values.push_back(l);
    return values;
  }
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) values.push_back(parse_number<std::size_t>("l", item));
  if (values.empty()) throw ConfigError(kModule, "empty length list");
  return values;
}

std::vector<copurchase::WeightKind> parse_kinds(const std::string& text) {
  if (detail::trim(text) == "all") return {};
  std::vector<copurchase::WeightKind> kinds;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      kinds.push_back(copurchase::parse_kind(detail::trim(item)));
    } catch (const ArgumentError& e) {
      throw ConfigError(kModule, e.what());
    }
  }
  if (kinds.empty()) throw ConfigError(kModule, "empty weight-function list");
  return kinds;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cold-start audience ranking for new shows", "coldstart"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("coldstart ") + kVersion + " (index format " +
                                        std::to_string(catalog::kIndexFormatVersion) + ", graph format " +
                                        std::to_string(copurchase::kGraphFormatVersion) + ", model format " +
                                        std::to_string(contentsim::kModelFormatVersion) + ", report format " +
                                        std::to_string(evaluation::kReportFormatVersion) + ")");

  std::string config_path;
  Locals locals;
  std::vector<std::pair<CLI::App*, std::unique_ptr<OptionBinder>>> commands;
  auto command = [&](const char* name, const char* description) -> OptionBinder& {
    auto* sub = app.add_subcommand(name, description);
    commands.emplace_back(sub, std::make_unique<OptionBinder>(sub));
    auto& binder = *commands.back().second;
    binder.config_file(config_path);
    binder.threads();
    return binder;
  };

  {
    auto& b = command("synth", "generate a planted-community dataset");
    b.setting("--out-dir", "output_dir", "directory for transactions.csv and shows.jsonl");
    b.setting("--users", "synth_users", "number of users");
    b.setting("--num-shows", "synth_shows", "number of shows");
    b.setting("--communities", "synth_communities", "number of planted communities");
    b.setting("--noise", "synth_feature_noise", "feature noise in [0, 1]");
    b.setting("--purchases", "synth_purchases_per_user", "mean distinct shows per user");
    b.setting("--in-community", "synth_in_community_rate", "probability a purchase stays in-community");
    b.setting("--seed", "synthetic_seed", "generator seed");
  }
  {
    auto& b = command("ingest", "parse transactions and write the index cache");
    b.setting("--transactions", "transactions", "transaction CSV");
    b.setting("--shows", "shows", "show JSON-lines catalog (validated only)");
    b.setting("--cache-dir", "cache_dir", "directory for index.cache");
    b.local("--out", locals.out, "index cache path (overrides --cache-dir)");
  }
  {
    auto& b = command("build-graph", "build the item-item network");
    b.setting("--transactions", "transactions", "transaction CSV");
    b.setting("--index", "index", "index cache (instead of --transactions)");
    b.setting("--kind", "weight_function", "weight function");
    b.setting("--out-dir", "output_dir", "output directory");
    b.local("--out", locals.out, "graph TSV path");
  }
  {
    auto& b = command("train-model", "fit the content-to-weight regression");
    b.setting("--transactions", "transactions", "transaction CSV");
    b.setting("--index", "index", "index cache (instead of --transactions)");
    b.setting("--shows", "shows", "show catalog");
    b.setting("--kind", "weight_function", "weight function");
    b.setting("--out-dir", "output_dir", "output directory");
    add_training_options(b);
    b.local("--graph", locals.graph, "prebuilt graph TSV (built from the index when absent)");
    b.local("--out", locals.out, "model JSON path");
  }
  {
    auto& b = command("predict", "rank users for a new show");
    b.setting("--transactions", "transactions", "transaction CSV");
    b.setting("--index", "index", "index cache (instead of --transactions)");
    b.setting("--shows", "shows", "show catalog");
    b.setting("--l", "propagation_length", "propagation length");
    b.setting("--out-dir", "output_dir", "output directory");
    add_insertion_options(b);
    b.local("--show", locals.show, "JSON description of the new show")->required();
    b.local("--graph", locals.graph, "graph TSV")->required();
    b.local("--model", locals.model, "model JSON")->required();
    b.local("--top", locals.out, "ranking CSV path");
    b.local("--limit", locals.limit, "write only the first N users (0 = all)");
  }
  {
    auto& b = command("evaluate", "holdout evaluation for one weight function and length");
    b.setting("--transactions", "transactions", "transaction CSV");
    b.setting("--shows", "shows", "show catalog");
    b.setting("--kind", "weight_function", "weight function");
    b.setting("--l", "propagation_length", "propagation length");
    b.setting("--out-dir", "output_dir", "output directory");
    add_training_options(b);
    add_insertion_options(b);
    add_holdout_options(b);
    b.local("--out", locals.out, "report JSON path");
  }
  {
    auto& b = command("grid-search", "mean revenue over lengths x weight functions");
    b.setting("--transactions", "transactions", "transaction CSV");
    b.setting("--shows", "shows", "show catalog");
    b.setting("--l", "l_values", "lengths, e.g. 1..5 or 1,2,4");
    b.setting("--kinds", "kinds", "weight functions, comma-separated, or all");
    b.setting("--baseline-trials", "baseline_trials", "random rankings to average as a baseline (0 = skip)");
    b.setting("--out-dir", "output_dir", "output directory");
    add_training_options(b);
    add_insertion_options(b);
    add_holdout_options(b);
    b.local("--out", locals.out, "grid TSV path");
    b.local("--report", locals.report, "optional grid JSON report path");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << "run with --help for usage\n";
    return 2;
  }

  try {
    for (const auto& [sub, binder] : commands) {
      if (!sub->parsed()) continue;
      PipelineConfig config;
      if (!config_path.empty()) {
        for (const auto& [key, value] : read_config_file(config_path)) apply_setting(config, key, value);
      }
      binder->apply(config);
      validate(config);

      const std::string name = sub->get_name();
      if (name == "synth") run_synth(config, locals, out, err);
      else if (name == "ingest") run_ingest(config, locals, out, err);
      else if (name == "build-graph") run_build_graph(config, locals, out, err);
      else if (name == "train-model") run_train_model(config, locals, out, err);
      else if (name == "predict") run_predict(config, locals, out, err);
      else if (name == "evaluate") run_evaluate(config, locals, out, err);
      else if (name == "grid-search") run_grid_search(config, locals, out, err);
    }
  } catch (const Error& e) {
    err << "error [" << to_string(e.category()) << "] " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error [internal] " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace coldstart::cli
