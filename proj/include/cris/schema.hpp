#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cris/model.hpp"

namespace cris {

/// Classes, properties, their hierarchies and domain/range declarations.
struct Schema {
  std::set<Iri> classes;
  std::set<std::pair<Iri, Iri>> subclass_edges;  // (child, parent)
  std::set<Iri> properties;
  std::set<std::pair<Iri, Iri>> subproperty_edges;  // (child, parent)
  std::map<Iri, Iri> domain;
  /// Class-valued, or rdfs:Literal for literal-valued properties.
  std::map<Iri, Iri> range;
  std::map<Iri, std::string> labels;

  bool literal_ranged(const Iri& property) const;
  /// Direct subclasses of c, sorted.
  std::vector<Iri> direct_subclasses(const Iri& c) const;
  std::vector<Iri> direct_superclasses(const Iri& c) const;
};

enum class SchemaLoadMode {
  kStrict,       // throw InvalidSchemaTriple on a malformed schema assertion
  kSkipInvalid,  // ignore malformed schema assertions
};

/// Extracts schema declarations (rdf:type rdfs:Class / rdf:Property,
/// subClassOf, subPropertyOf, domain, range, label) from a dataset. Edge
/// endpoints are implicitly declared.
Schema load_schema(std::span<const Triple> dataset, SchemaLoadMode mode = SchemaLoadMode::kStrict,
                   std::vector<Triple>* rejected = nullptr);
Schema load_schema(const std::set<Triple>& dataset, SchemaLoadMode mode = SchemaLoadMode::kStrict,
                   std::vector<Triple>* rejected = nullptr);

/// Reflexive-transitive reachability over one edge relation.
class Hierarchy {
 public:
  Hierarchy() = default;
  Hierarchy(const std::set<Iri>& nodes, const std::set<std::pair<Iri, Iri>>& edges);

  /// All ancestors of node including itself. Undeclared nodes reach only
  /// themselves.
  std::vector<Iri> ancestors(const Iri& node) const;
  /// All descendants of node including itself.
  std::vector<Iri> descendants(const Iri& node) const;
  bool reaches(const Iri& child, const Iri& parent) const;
  /// Nodes lying on a cycle (including self-loops), sorted.
  const std::vector<Iri>& cyclic() const noexcept { return cyclic_; }
  const std::map<Iri, std::set<Iri>>& table() const noexcept { return up_; }

 private:
  std::map<Iri, std::set<Iri>> up_;
  std::map<Iri, std::set<Iri>> down_;
  std::vector<Iri> cyclic_;
};

struct ClosureTable {
  Hierarchy classes;
  Hierarchy properties;
};

ClosureTable closure(const Schema& schema);

bool is_subclass(const ClosureTable& ct, const Iri& child, const Iri& parent);
bool is_subproperty(const ClosureTable& ct, const Iri& child, const Iri& parent);

enum class Severity { kWarning, kError };

struct Finding {
  Severity severity;
  Triple triple;
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool empty() const noexcept { return findings.empty(); }
  std::size_t error_count() const noexcept;
};

/// Open-world domain/range and undeclared-type checks. Only warnings.
ValidationReport validate(std::span<const Triple> dataset, const Schema& schema, const ClosureTable& ct);

/// The shipped encoding of the CERIF research ontology.
std::vector<Triple> bundled_cerif_schema();
std::string_view bundled_cerif_schema_text();

}  // namespace cris
