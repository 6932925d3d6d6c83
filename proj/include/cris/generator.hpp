#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cris/model.hpp"
#include "cris/schema.hpp"

namespace cris {

/// `{"@id": "..."}`: a record id in the same file or an absolute IRI.
struct RecordRef {
  std::string id;
  friend bool operator==(const RecordRef&, const RecordRef&) = default;
};

using RecordValue = std::variant<std::string, RecordRef>;

struct Record {
  std::string id;
  std::string type;
  std::map<std::string, std::vector<RecordValue>> properties;
};

/// Structured research records, e.g.
///   {"base_uri": "http://ex.org/auris#",
///    "records": [{"id": "p1", "type": "Researcher",
///                 "properties": {"expertise_skill": ["Semantic Web"]}}]}
struct RecordFile {
  std::string base_uri;
  std::vector<Record> records;
};

/// Parses and structurally checks a record file. Throws RecordFileError.
RecordFile parse_record_file(std::string_view json_text);

struct GeneratorOptions {
  /// Unknown properties are errors instead of warnings.
  bool strict = false;
};

struct GeneratedAnnotation {
  std::set<Triple> triples;
  std::map<std::string, Iri> subject_uris;
  std::vector<std::string> warnings;
};

/// Turns records into annotation triples. Subject URIs are base_uri + id.
/// Throws UnknownType, DanglingReference, RecordFileError, and in strict
/// mode UnknownProperty.
GeneratedAnnotation generate(const RecordFile& records, const Schema& schema, const ClosureTable& ct,
                             const GeneratorOptions& options = {});

/// Inserts (or replaces) the embedded annotation block before </head>, or
/// at the start of the page when there is no head.
std::string embed(const GeneratedAnnotation& annotation, std::string_view html);
std::string embed(const std::set<Triple>& triples, std::string_view html);

}  // namespace cris
