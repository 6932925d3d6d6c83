#pragma once

#include <memory>
#include <mutex>
#include <string_view>
#include <vector>

#include "cris/query.hpp"
#include "cris/schema.hpp"
#include "cris/store.hpp"

namespace cris {

/// Schema in effect for one snapshot: the base schema plus every schema
/// declaration harvested into the store.
struct SchemaView {
  std::uint64_t version = 0;
  Schema schema;
  ClosureTable closure;
  /// Harvested schema assertions that were malformed and ignored.
  std::vector<Triple> rejected;
};

/// A store together with the base ontology; the unit the CLI and the HTTP
/// server operate on.
class Repository {
 public:
  explicit Repository(std::vector<Triple> base_schema, PrefixMap prefixes = PrefixMap::bundled());

  Store& store() noexcept { return store_; }
  const Store& store() const noexcept { return store_; }
  const std::vector<Triple>& base_schema() const noexcept { return base_schema_; }
  const PrefixMap& prefixes() const noexcept { return prefixes_; }

  std::shared_ptr<const SchemaView> schema_for(const Snapshot& snap) const;

  /// Parses and evaluates against a fresh snapshot.
  BindingTable query(std::string_view text) const;

 private:
  Store store_;
  std::vector<Triple> base_schema_;
  PrefixMap prefixes_;
  mutable std::mutex cache_mutex_;
  mutable std::shared_ptr<const SchemaView> cache_;
};

}  // namespace cris
