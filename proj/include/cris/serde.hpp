#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cris/model.hpp"

namespace cris {

struct ParseError {
  std::size_t line;  // 1-based
  std::string message;

  friend bool operator==(const ParseError&, const ParseError&) = default;
};

struct ParseOutcome {
  std::vector<Triple> triples;
  std::vector<ParseError> errors;
  /// Identifies the parsed document; blank labels are relative to it.
  std::string blank_scope;
};

/// Parses the line-oriented triple format. Malformed lines are reported and
/// skipped; parsing never fails as a whole.
ParseOutcome parse_triples(std::string_view text, std::string scope);

/// Parses a single triple line (no comments). Throws InvalidTriple.
Triple parse_triple_line(std::string_view line);

/// Canonical form: sorted, deduplicated, one `S P O .` line per triple.
std::string serialize(std::vector<Triple> triples);
std::string serialize(const std::set<Triple>& triples);

struct InlineBlock {
  std::size_t index;
  std::string text;
  /// Byte span of the whole script element in the page.
  std::size_t element_begin = 0;
  std::size_t element_end = 0;
};

struct AnnotationExtract {
  std::vector<InlineBlock> inline_blocks;
  std::vector<Iri> linked_refs;
  std::vector<Iri> outbound_links;
  /// References that could not be resolved to an absolute IRI.
  std::size_t dropped = 0;
};

inline constexpr std::string_view kTriplesMediaType = "text/x-cris-triples";
inline constexpr std::string_view kMetaLinkRel = "cris-meta";

/// Tag scan of an HTML page for embedded and linked annotations and for
/// outbound anchors.
AnnotationExtract extract_annotations(std::string_view html, const Iri& base_url);

/// Embedded annotation blocks only (no link resolution).
std::vector<InlineBlock> find_inline_blocks(std::string_view html);

/// RFC 3986 reference resolution. Returns nullopt when the base is not
/// hierarchical and the reference is relative.
std::optional<std::string> resolve_reference(std::string_view base, std::string_view reference);

std::string strip_fragment(std::string_view url);

}  // namespace cris
