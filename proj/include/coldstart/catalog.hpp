/**
 * @file catalog.hpp
 * @brief Transactions, show descriptions, the user/show interaction index and
 *        the temporal holdout split
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coldstart::catalog {

using UserId = std::uint32_t;
using ShowId = std::uint32_t;
using Timestamp = std::int64_t;  // UTC seconds

struct Transaction {
  std::string user_id;
  std::string show_id;
  double amount = 0.0;  // euros, >= 0
  Timestamp timestamp = 0;

  bool operator==(const Transaction&) const = default;
};

struct ShowRecord {
  std::string show_id;
  std::optional<std::string> city;
  std::optional<std::string> venue;
  std::set<std::string> types;
  std::set<std::string> stakeholders;
  std::optional<Timestamp> first_sale;

  bool operator==(const ShowRecord&) const = default;
};

/// Show descriptions keyed by show_id, iterated in id order.
class Catalog {
 public:
  Catalog() = default;

  /// Throws FormatError if the id is already present.
  void add(ShowRecord record);
  const ShowRecord* find(std::string_view show_id) const;
  bool contains(std::string_view show_id) const { return find(show_id) != nullptr; }

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  auto begin() const { return records_.begin(); }
  auto end() const { return records_.end(); }

 private:
  std::vector<ShowRecord> records_;  // sorted by show_id
};

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

/// Column mapping for a delimited transaction file.
struct TransactionFormat {
  char delimiter = ',';
  std::string user_column = "user_id";
  std::string show_column = "show_id";
  std::string amount_column = "amount";
  std::string timestamp_column = "timestamp";
};

struct MalformedRow {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string reason;
};

struct IngestResult {
  std::vector<Transaction> transactions;
  std::size_t malformed_count = 0;
  std::vector<MalformedRow> malformed_samples;  // first kMaxMalformedSamples only

  static constexpr std::size_t kMaxMalformedSamples = 32;
};

IngestResult read_transactions(std::istream& in, const TransactionFormat& format = {});
IngestResult read_transactions_file(const std::string& path, const TransactionFormat& format = {});

/// Writes the canonical `user_id,show_id,amount,timestamp` form.
void write_transactions(std::ostream& out, std::span<const Transaction> transactions);
void write_transactions_file(const std::string& path, std::span<const Transaction> transactions);

/// Reads one JSON object per line. Absent or null keys are missing values.
Catalog read_shows(std::istream& in);
Catalog read_shows_file(const std::string& path);
ShowRecord parse_show(std::string_view json_line);

void write_shows(std::ostream& out, const Catalog& catalog);
void write_shows_file(const std::string& path, const Catalog& catalog);
std::string format_show(const ShowRecord& record);

// ---------------------------------------------------------------------------
// Interaction index
// ---------------------------------------------------------------------------

/**
 * @brief Deduplicated bipartite purchase structure with degree caches.
 *
 * Users and shows are mapped to dense ids in lexicographic order of their
 * names, so the index is independent of transaction order. Adjacency lists
 * are sorted by id. Immutable once built.
 */
class InteractionIndex {
 public:
  InteractionIndex() = default;

  static InteractionIndex build(std::span<const Transaction> transactions);

  std::size_t user_count() const { return user_names_.size(); }
  std::size_t show_count() const { return show_names_.size(); }
  /// Sum of show degrees, equal to the sum of user degrees.
  std::size_t degree_sum() const { return show_users_.size(); }

  std::span<const ShowId> shows_of(UserId user) const {
    return {user_shows_.data() + user_offsets_[user], user_shows_.data() + user_offsets_[user + 1]};
  }
  std::span<const UserId> buyers_of(ShowId show) const {
    return {show_users_.data() + show_offsets_[show], show_users_.data() + show_offsets_[show + 1]};
  }
  std::size_t user_degree(UserId user) const { return user_offsets_[user + 1] - user_offsets_[user]; }
  std::size_t show_degree(ShowId show) const { return show_offsets_[show + 1] - show_offsets_[show]; }

  const std::string& user_name(UserId user) const { return user_names_[user]; }
  const std::string& show_name(ShowId show) const { return show_names_[show]; }
  const std::vector<std::string>& show_names() const { return show_names_; }
  const std::vector<std::string>& user_names() const { return user_names_; }

  std::optional<UserId> find_user(std::string_view name) const;
  std::optional<ShowId> find_show(std::string_view name) const;
  /// Throws LookupError for unknown names.
  ShowId show_id(std::string_view name) const;

  bool operator==(const InteractionIndex&) const = default;

 private:
  std::vector<std::string> user_names_;
  std::vector<std::string> show_names_;
  std::vector<std::size_t> user_offsets_{0};
  std::vector<ShowId> user_shows_;
  std::vector<std::size_t> show_offsets_{0};
  std::vector<UserId> show_users_;

  friend InteractionIndex load_index(std::istream& in);
  static InteractionIndex from_memberships(std::vector<std::string> users, std::vector<std::string> shows,
                                           std::vector<std::pair<UserId, ShowId>> memberships);
};

/// Version tag written on the first line of an index cache.
inline constexpr int kIndexFormatVersion = 1;

/**
 * Text cache layout:
 *   coldstart-index <version>
 *   users <N>        followed by N lines, one user name each
 *   shows <M>        followed by M lines, one show name each
 *   memberships <E>  followed by E lines "<user id> <show id>"
 */
void save_index(std::ostream& out, const InteractionIndex& index);
InteractionIndex load_index(std::istream& in);
void save_index_file(const std::string& path, const InteractionIndex& index);
InteractionIndex load_index_file(const std::string& path);

// ---------------------------------------------------------------------------
// Temporal holdout
// ---------------------------------------------------------------------------

struct HoldoutOptions {
  Timestamp cutoff = 0;
  /// Keep only this many test shows, drawn uniformly with sample_seed.
  std::optional<std::size_t> test_sample;
  std::uint64_t sample_seed = 0;
};

struct TestShow {
  std::string show_id;
  std::map<std::string, double> spend;  // user_id -> total amount on this show
};

struct HoldoutSplit {
  std::vector<Transaction> train_transactions;
  InteractionIndex train_index;
  std::vector<TestShow> test;          // sorted by show_id
  std::size_t test_candidates = 0;     // shows first sold after the cutoff
};

/**
 * A show is a test show iff its first transaction is strictly after the
 * cutoff. Train transactions exclude every purchase of a test candidate,
 * sampled or not. Throws ConfigError when either side would be empty.
 */
HoldoutSplit split_holdout(std::span<const Transaction> transactions, const HoldoutOptions& options);

/// Cutoff at the given fraction of the [min, max] timestamp range.
Timestamp cutoff_at_fraction(std::span<const Transaction> transactions, double fraction);

}  // namespace coldstart::catalog
