/**
 * @file catalog.cpp
 * @brief Ingestion, indexing and holdout splitting
 */

#include "coldstart/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "coldstart/error.hpp"
#include "io_util.hpp"

namespace coldstart::catalog {

namespace {

constexpr const char* kModule = "catalog";

using detail::trim;

std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    auto field = trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (field.size() >= 2 && field.front() == '"' && field.back() == '"') {
      field = field.substr(1, field.size() - 2);
    }
    fields.push_back(field);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

bool parse_amount(std::string_view text, double& out) {
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

bool parse_timestamp(std::string_view text, Timestamp& out) {
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

template <typename T>
T sorted_position(const std::vector<std::string>& names, std::string_view name) {
  const auto it = std::lower_bound(names.begin(), names.end(), name,
                                   [](const std::string& a, std::string_view b) { return a < b; });
  return static_cast<T>(it - names.begin());
}

}  // namespace

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

void Catalog::add(ShowRecord record) {
  const auto it = std::lower_bound(records_.begin(), records_.end(), record.show_id,
                                   [](const ShowRecord& r, const std::string& id) { return r.show_id < id; });
  if (it != records_.end() && it->show_id == record.show_id) {
    throw FormatError(kModule, "duplicate show_id '" + record.show_id + "' in catalog");
  }
  records_.insert(it, std::move(record));
}

const ShowRecord* Catalog::find(std::string_view show_id) const {
  const auto it = std::lower_bound(records_.begin(), records_.end(), show_id,
                                   [](const ShowRecord& r, std::string_view id) { return r.show_id < id; });
  if (it == records_.end() || it->show_id != show_id) return nullptr;
  return &*it;
}

// ---------------------------------------------------------------------------
// Transactions
// ---------------------------------------------------------------------------

IngestResult read_transactions(std::istream& in, const TransactionFormat& format) {
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError(kModule, "transaction file has no header line");
  }
  const auto header = split_fields(line, format.delimiter);
  auto column_of = [&header](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };

  const auto user_col = column_of(format.user_column);
  const auto show_col = column_of(format.show_column);
  const auto amount_col = column_of(format.amount_column);
  const auto time_col = column_of(format.timestamp_column);
  std::string missing;
  for (const auto& [col, name] : {std::pair{user_col, &format.user_column}, std::pair{show_col, &format.show_column},
                                  std::pair{amount_col, &format.amount_column},
                                  std::pair{time_col, &format.timestamp_column}}) {
    if (!col) missing += (missing.empty() ? "" : ", ") + *name;
  }
  if (!missing.empty()) {
    throw FormatError(kModule, "transaction header '" + std::string(trim(line)) + "' lacks column(s): " + missing);
  }
  const std::size_t needed = std::max({*user_col, *show_col, *amount_col, *time_col}) + 1;

  IngestResult result;
  auto reject = [&result](std::size_t line_no, std::string reason) {
    ++result.malformed_count;
    if (result.malformed_samples.size() < IngestResult::kMaxMalformedSamples) {
      result.malformed_samples.push_back({line_no, std::move(reason)});
    }
  };

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, format.delimiter);
    if (fields.size() < needed) {
      reject(line_no, "expected at least " + std::to_string(needed) + " fields");
      continue;
    }
    Transaction t;
    t.user_id = std::string(fields[*user_col]);
    t.show_id = std::string(fields[*show_col]);
    if (t.user_id.empty() || t.show_id.empty()) {
      reject(line_no, "empty identifier");
      continue;
    }
    if (!parse_amount(fields[*amount_col], t.amount)) {
      reject(line_no, "unparseable amount '" + std::string(fields[*amount_col]) + "'");
      continue;
    }
    if (t.amount < 0.0) {
      reject(line_no, "negative amount '" + std::string(fields[*amount_col]) + "'");
      continue;
    }
    if (!parse_timestamp(fields[*time_col], t.timestamp)) {
      reject(line_no, "unparseable timestamp '" + std::string(fields[*time_col]) + "'");
      continue;
    }
    result.transactions.push_back(std::move(t));
  }
  if (in.bad()) throw IoError(kModule, "read failure at line " + std::to_string(line_no));
  return result;
}

IngestResult read_transactions_file(const std::string& path, const TransactionFormat& format) {
  auto in = detail::open_input(path, kModule);
  return read_transactions(in, format);
}

void write_transactions(std::ostream& out, std::span<const Transaction> transactions) {
  out << "user_id,show_id,amount,timestamp\n";
  for (const auto& t : transactions) {
    out << t.user_id << ',' << t.show_id << ',' << detail::format_double(t.amount) << ',' << t.timestamp << '\n';
  }
}

void write_transactions_file(const std::string& path, std::span<const Transaction> transactions) {
  auto out = detail::open_output(path, kModule);
  write_transactions(out, transactions);
  detail::finish_output(out, path, kModule);
}

// ---------------------------------------------------------------------------
// Shows
// ---------------------------------------------------------------------------

ShowRecord parse_show(std::string_view json_line) {
  using nlohmann::json;
  json obj;
  try {
    obj = json::parse(json_line);
  } catch (const json::parse_error& e) {
    throw FormatError(kModule, std::string("invalid show JSON: ") + e.what());
  }
  if (!obj.is_object()) throw FormatError(kModule, "show line is not a JSON object");

  auto optional_string = [&obj](const char* key) -> std::optional<std::string> {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw FormatError(kModule, std::string("key '") + key + "' must be a string");
    return it->get<std::string>();
  };
  auto string_set = [&obj](const char* key) {
    std::set<std::string> values;
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return values;
    if (!it->is_array()) throw FormatError(kModule, std::string("key '") + key + "' must be an array");
    for (const auto& v : *it) {
      if (!v.is_string()) throw FormatError(kModule, std::string("key '") + key + "' must hold strings");
      values.insert(v.get<std::string>());
    }
    return values;
  };

  ShowRecord record;
  auto id = optional_string("show_id");
  if (!id || id->empty()) throw FormatError(kModule, "show object lacks 'show_id'");
  record.show_id = std::move(*id);
  record.city = optional_string("city");
  record.venue = optional_string("venue");
  record.types = string_set("types");
  record.stakeholders = string_set("stakeholders");
  if (const auto it = obj.find("first_sale"); it != obj.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw FormatError(kModule, "key 'first_sale' must be an integer");
    record.first_sale = it->get<Timestamp>();
  }
  return record;
}

Catalog read_shows(std::istream& in) {
  Catalog catalog;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      catalog.add(parse_show(line));
    } catch (const FormatError& e) {
      throw FormatError(kModule, "shows line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (in.bad()) throw IoError(kModule, "read failure at shows line " + std::to_string(line_no));
  return catalog;
}

Catalog read_shows_file(const std::string& path) {
  auto in = detail::open_input(path, kModule);
  return read_shows(in);
}

std::string format_show(const ShowRecord& record) {
  nlohmann::ordered_json obj;
  obj["show_id"] = record.show_id;
  if (record.city) obj["city"] = *record.city;
  if (record.venue) obj["venue"] = *record.venue;
  obj["types"] = std::vector<std::string>(record.types.begin(), record.types.end());
  obj["stakeholders"] = std::vector<std::string>(record.stakeholders.begin(), record.stakeholders.end());
  if (record.first_sale) obj["first_sale"] = *record.first_sale;
  return obj.dump();
}

void write_shows(std::ostream& out, const Catalog& catalog) {
  for (const auto& record : catalog) out << format_show(record) << '\n';
}

void write_shows_file(const std::string& path, const Catalog& catalog) {
  auto out = detail::open_output(path, kModule);
  write_shows(out, catalog);
  detail::finish_output(out, path, kModule);
}

// ---------------------------------------------------------------------------
// InteractionIndex
// ---------------------------------------------------------------------------

InteractionIndex InteractionIndex::from_memberships(std::vector<std::string> users, std::vector<std::string> shows,
                                                    std::vector<std::pair<UserId, ShowId>> memberships) {
  std::sort(memberships.begin(), memberships.end());
  memberships.erase(std::unique(memberships.begin(), memberships.end()), memberships.end());

  InteractionIndex index;
  index.user_names_ = std::move(users);
  index.show_names_ = std::move(shows);

  index.user_offsets_.assign(index.user_names_.size() + 1, 0);
  index.show_offsets_.assign(index.show_names_.size() + 1, 0);
  for (const auto& [u, s] : memberships) {
    ++index.user_offsets_[u + 1];
    ++index.show_offsets_[s + 1];
  }
  for (std::size_t i = 1; i < index.user_offsets_.size(); ++i) index.user_offsets_[i] += index.user_offsets_[i - 1];
  for (std::size_t i = 1; i < index.show_offsets_.size(); ++i) index.show_offsets_[i] += index.show_offsets_[i - 1];

  // memberships are sorted by (user, show): user rows come out sorted, and
  // filling show rows in the same order keeps buyers sorted by user id.
  index.user_shows_.resize(memberships.size());
  index.show_users_.resize(memberships.size());
  std::vector<std::size_t> show_fill(index.show_offsets_.begin(), index.show_offsets_.end() - 1);
  for (std::size_t i = 0; i < memberships.size(); ++i) {
    const auto [u, s] = memberships[i];
    index.user_shows_[i] = s;
    index.show_users_[show_fill[s]++] = u;
  }
  return index;
}

InteractionIndex InteractionIndex::build(std::span<const Transaction> transactions) {
  std::vector<std::string> users;
  std::vector<std::string> shows;
  users.reserve(transactions.size());
  shows.reserve(transactions.size());
  for (const auto& t : transactions) {
    users.push_back(t.user_id);
    shows.push_back(t.show_id);
  }
  for (auto* names : {&users, &shows}) {
    std::sort(names->begin(), names->end());
    names->erase(std::unique(names->begin(), names->end()), names->end());
    names->shrink_to_fit();
  }

  std::vector<std::pair<UserId, ShowId>> memberships;
  memberships.reserve(transactions.size());
  for (const auto& t : transactions) {
    memberships.emplace_back(sorted_position<UserId>(users, t.user_id), sorted_position<ShowId>(shows, t.show_id));
  }
  return from_memberships(std::move(users), std::move(shows), std::move(memberships));
}

std::optional<UserId> InteractionIndex::find_user(std::string_view name) const {
  const auto pos = sorted_position<UserId>(user_names_, name);
  if (pos == user_names_.size() || user_names_[pos] != name) return std::nullopt;
  return pos;
}

std::optional<ShowId> InteractionIndex::find_show(std::string_view name) const {
  const auto pos = sorted_position<ShowId>(show_names_, name);
  if (pos == show_names_.size() || show_names_[pos] != name) return std::nullopt;
  return pos;
}

ShowId InteractionIndex::show_id(std::string_view name) const {
  if (const auto id = find_show(name)) return *id;
  throw LookupError(kModule, "unknown show '" + std::string(name) + "'");
}

void save_index(std::ostream& out, const InteractionIndex& index) {
  out << "coldstart-index " << kIndexFormatVersion << '\n';
  out << "users " << index.user_count() << '\n';
  for (const auto& name : index.user_names()) out << name << '\n';
  out << "shows " << index.show_count() << '\n';
  for (const auto& name : index.show_names()) out << name << '\n';
  out << "memberships " << index.degree_sum() << '\n';
  for (UserId u = 0; u < index.user_count(); ++u) {
    for (const ShowId s : index.shows_of(u)) out << u << ' ' << s << '\n';
  }
}

InteractionIndex load_index(std::istream& in) {
  std::string line;
  auto expect_count = [&](const std::string& keyword) -> std::size_t {
    if (!std::getline(in, line)) throw FormatError(kModule, "index cache truncated before '" + keyword + "'");
    std::istringstream fields(line);
    std::string word;
    std::size_t count = 0;
    if (!(fields >> word >> count) || word != keyword) {
      throw FormatError(kModule, "index cache: expected '" + keyword + " <count>', got '" + line + "'");
    }
    return count;
  };

  if (!std::getline(in, line)) throw FormatError(kModule, "index cache is empty");
  {
    std::istringstream fields(line);
    std::string tag;
    int version = 0;
    if (!(fields >> tag >> version) || tag != "coldstart-index") {
      throw FormatError(kModule, "not an index cache (bad tag line '" + line + "')");
    }
    if (version != kIndexFormatVersion) {
      throw FormatError(kModule, "unsupported index cache version " + std::to_string(version));
    }
  }

  auto read_names = [&](const std::string& keyword) {
    const auto n = expect_count(keyword);
    std::vector<std::string> names(n);
    for (auto& name : names) {
      if (!std::getline(in, name)) throw FormatError(kModule, "index cache truncated in '" + keyword + "'");
    }
    if (!std::is_sorted(names.begin(), names.end()) ||
        std::adjacent_find(names.begin(), names.end()) != names.end()) {
      throw FormatError(kModule, "index cache '" + keyword + "' names are not strictly sorted");
    }
    return names;
  };
  auto users = read_names("users");
  auto shows = read_names("shows");
  const auto n = expect_count("memberships");
  std::vector<std::pair<UserId, ShowId>> memberships(n);
  for (auto& [u, s] : memberships) {
    if (!(in >> u >> s) || u >= users.size() || s >= shows.size()) {
      throw FormatError(kModule, "index cache has a bad membership entry");
    }
  }
  return InteractionIndex::from_memberships(std::move(users), std::move(shows), std::move(memberships));
}

void save_index_file(const std::string& path, const InteractionIndex& index) {
  auto out = detail::open_output(path, kModule);
  save_index(out, index);
  detail::finish_output(out, path, kModule);
}

InteractionIndex load_index_file(const std::string& path) {
  auto in = detail::open_input(path, kModule);
  return load_index(in);
}

// ---------------------------------------------------------------------------
// Holdout
// ---------------------------------------------------------------------------

Timestamp cutoff_at_fraction(std::span<const Transaction> transactions, double fraction) {
  if (transactions.empty()) throw ConfigError(kModule, "cannot place a cutoff in an empty transaction list");
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError(kModule, "cutoff fraction must lie in [0, 1]");
  const auto [lo, hi] = std::minmax_element(transactions.begin(), transactions.end(),
                                            [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  const double span = static_cast<double>(hi->timestamp - lo->timestamp);
  return lo->timestamp + static_cast<Timestamp>(std::floor(span * fraction));
}

HoldoutSplit split_holdout(std::span<const Transaction> transactions, const HoldoutOptions& options) {
  std::unordered_map<std::string, Timestamp> first_sale;
  for (const auto& t : transactions) {
    const auto [it, inserted] = first_sale.emplace(t.show_id, t.timestamp);
    if (!inserted) it->second = std::min(it->second, t.timestamp);
  }

  std::vector<std::string> candidates;
  for (const auto& [show, first] : first_sale) {
    if (first > options.cutoff) candidates.push_back(show);
  }
  std::sort(candidates.begin(), candidates.end());
  if (candidates.empty()) {
    throw ConfigError(kModule, "cutoff " + std::to_string(options.cutoff) + " leaves an empty test set");
  }
  if (candidates.size() == first_sale.size()) {
    throw ConfigError(kModule, "cutoff " + std::to_string(options.cutoff) + " leaves an empty training set");
  }

  HoldoutSplit split;
  split.test_candidates = candidates.size();
  const std::unordered_set<std::string> excluded(candidates.begin(), candidates.end());

  std::vector<std::string> selected = candidates;
  if (options.test_sample) {
    if (*options.test_sample == 0) throw ConfigError(kModule, "test sample size must be positive");
    if (*options.test_sample < candidates.size()) {
      selected.clear();
      std::mt19937_64 rng(options.sample_seed);
      std::sample(candidates.begin(), candidates.end(), std::back_inserter(selected), *options.test_sample, rng);
    }
  }

  std::unordered_map<std::string, std::size_t> test_slot;
  split.test.reserve(selected.size());
  for (auto& show : selected) {
    test_slot.emplace(show, split.test.size());
    split.test.push_back({std::move(show), {}});
  }

  for (const auto& t : transactions) {
    if (!excluded.contains(t.show_id)) {
      split.train_transactions.push_back(t);
    } else if (const auto it = test_slot.find(t.show_id); it != test_slot.end()) {
      split.test[it->second].spend[t.user_id] += t.amount;
    }
  }
  split.train_index = InteractionIndex::build(split.train_transactions);
  return split;
}

}  // namespace coldstart::catalog
