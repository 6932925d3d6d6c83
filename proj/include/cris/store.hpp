#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cris/model.hpp"
#include "cris/serde.hpp"

namespace cris {

/// UTC seconds since the epoch.
using Timestamp = std::int64_t;

Timestamp now_utc();
/// YYYY-MM-DDTHH:MM:SSZ
std::string format_utc(Timestamp t);
/// Inverse of format_utc. Throws Error on malformed input.
Timestamp parse_utc(std::string_view text);

/// Where a triple came from: a document URL or the reserved token `local`.
class SourceId {
 public:
  static SourceId local() { return SourceId("local"); }
  static SourceId from(const Iri& url) { return SourceId(url.str()); }
  /// Accepts `local` or an absolute IRI. Throws MalformedIri.
  static SourceId parse(std::string_view text);

  const std::string& str() const noexcept { return value_; }
  bool is_local() const noexcept { return value_ == "local"; }

  friend bool operator==(const SourceId&, const SourceId&) = default;
  friend std::strong_ordering operator<=>(const SourceId&, const SourceId&) = default;

 private:
  explicit SourceId(std::string value) : value_(std::move(value)) {}
  std::string value_;
};

struct Provenance {
  SourceId source;
  Timestamp fetched_at;

  friend bool operator==(const Provenance&, const Provenance&) = default;
  friend std::strong_ordering operator<=>(const Provenance&, const Provenance&) = default;
};

struct SourceStats {
  SourceId source;
  std::size_t triples;
  Timestamp latest_fetch;
};

struct StoreStats {
  std::size_t triples = 0;
  std::size_t subjects = 0;
  std::size_t predicates = 0;
  std::vector<SourceStats> sources;  // ordered by source
};

enum class MergeMode {
  kReplaceSource,  // drop the source's previous contribution first
  kAccumulate,
};

struct MergeResult {
  std::size_t added = 0;
  std::size_t duplicate = 0;
  /// Triples dropped because the replaced source was their only provenance.
  std::size_t removed = 0;
};

enum class IndexOrder { kSubjectFirst, kPredicateFirst, kObjectFirst };

namespace detail {
struct StoreState;
}

/// Immutable view of a Store at one instant.
class Snapshot {
 public:
  std::size_t size() const noexcept;
  bool empty() const noexcept { return size() == 0; }
  bool contains(const Triple& t) const;

  /// Triples agreeing with every bound position, in canonical order.
  std::vector<Triple> match(const std::optional<Term>& subject, const std::optional<Term>& predicate,
                            const std::optional<Term>& object) const;

  /// All triples in canonical (subject, predicate, object) order.
  const std::set<Triple>& triples() const noexcept;
  /// Enumerates one index in its own order.
  std::vector<Triple> scan(IndexOrder order) const;

  /// Provenance entries of t; empty if t is absent.
  std::vector<Provenance> provenance(const Triple& t) const;

  StoreStats stats() const;
  /// Increases with every committed write.
  std::uint64_t version() const noexcept;

 private:
  friend class Store;
  explicit Snapshot(std::shared_ptr<const detail::StoreState> state) : state_(std::move(state)) {}
  std::shared_ptr<const detail::StoreState> state_;
};

/// Deduplicated triple set with subject-, predicate- and object-first
/// indexes and per-source provenance. Writers are serialized; readers work
/// on snapshots and never observe a partial write.
class Store {
 public:
  Store();
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  /// Returns true iff t was not present. Records provenance either way.
  bool insert(const Triple& t, const SourceId& source, Timestamp at);
  /// Inserts every parsed triple with blank labels scoped to the parse.
  MergeResult merge(const ParseOutcome& parsed, const SourceId& source, Timestamp at,
                    MergeMode mode = MergeMode::kReplaceSource);

  Snapshot snapshot() const;

  /// Writes store.nt and store.prov into dir.
  void save(const std::filesystem::path& dir) const;
  /// Replaces the contents with store.nt / store.prov from dir (missing
  /// files mean an empty store).
  void load(const std::filesystem::path& dir);
  /// After every committed write, save into dir.
  void persist_to(std::filesystem::path dir);

 private:
  template <typename Fn>
  auto write(Fn&& fn);

  mutable std::mutex state_mutex_;  // guards the state_ pointer
  std::mutex write_mutex_;          // serializes writers
  std::shared_ptr<const detail::StoreState> state_;
  std::optional<std::filesystem::path> persist_dir_;
};

/// Scoped relabeling of a blank label: label + "x" + 16 hex digits.
std::string scoped_blank_label(std::string_view label, std::string_view scope);

// Free-function forms.
bool insert(Store& store, const Triple& t, const SourceId& source, Timestamp at);
std::vector<Triple> match(const Snapshot& snap, const std::optional<Term>& subject,
                          const std::optional<Term>& predicate, const std::optional<Term>& object);
MergeResult merge(Store& store, const ParseOutcome& parsed, const SourceId& source, Timestamp at,
                  MergeMode mode = MergeMode::kReplaceSource);
StoreStats stats(const Snapshot& snap);

void write_snapshot(const Snapshot& snap, const std::filesystem::path& dir);

inline constexpr std::string_view kStoreFile = "store.nt";
inline constexpr std::string_view kProvenanceFile = "store.prov";

}  // namespace cris
