#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cris/error.hpp"

namespace cris {

/// Absolute IRI, kept verbatim. Construct through make_iri().
class Iri {
 public:
  const std::string& str() const noexcept { return value_; }

  friend bool operator==(const Iri&, const Iri&) = default;
  friend std::strong_ordering operator<=>(const Iri&, const Iri&) = default;

 private:
  friend Iri make_iri(std::string_view text);
  explicit Iri(std::string value) : value_(std::move(value)) {}

  std::string value_;
};

/// Validates text as an absolute IRI (scheme required, no whitespace, no
/// angle brackets or double quotes). Throws MalformedIri.
Iri make_iri(std::string_view text);

bool is_valid_iri(std::string_view text) noexcept;

/// Plain string literal with an optional lowercase language tag.
class Literal {
 public:
  explicit Literal(std::string lexical, std::string language = {});

  const std::string& lexical() const noexcept { return lexical_; }
  const std::string& language() const noexcept { return language_; }

  friend bool operator==(const Literal&, const Literal&) = default;

 private:
  std::string lexical_;
  std::string language_;
};

bool is_valid_language_tag(std::string_view tag) noexcept;

class BlankNode {
 public:
  explicit BlankNode(std::string label);

  const std::string& label() const noexcept { return label_; }

  friend bool operator==(const BlankNode&, const BlankNode&) = default;

 private:
  std::string label_;
};

bool is_valid_blank_label(std::string_view label) noexcept;

/// One of Iri, BlankNode or Literal. Carries its serialized form, which
/// defines both equality and the within-kind ordering.
class Term {
 public:
  enum class Kind : std::uint8_t { kIri = 0, kBlank = 1, kLiteral = 2 };

  Term(const Iri& iri);           // NOLINT(google-explicit-constructor)
  Term(const BlankNode& blank);   // NOLINT(google-explicit-constructor)
  Term(const Literal& literal);   // NOLINT(google-explicit-constructor)

  Kind kind() const noexcept { return kind_; }
  bool is_iri() const noexcept { return kind_ == Kind::kIri; }
  bool is_blank() const noexcept { return kind_ == Kind::kBlank; }
  bool is_literal() const noexcept { return kind_ == Kind::kLiteral; }

  /// IRI text, blank label, or literal lexical form.
  const std::string& value() const noexcept { return value_; }
  /// Language tag of a literal; empty otherwise.
  const std::string& language() const noexcept { return language_; }
  /// Serialized form in the line-oriented triple format.
  const std::string& str() const noexcept { return repr_; }

  Iri as_iri() const;
  BlankNode as_blank() const;
  Literal as_literal() const;

  friend bool operator==(const Term& a, const Term& b) noexcept {
    return a.kind_ == b.kind_ && a.repr_ == b.repr_;
  }
  friend std::strong_ordering operator<=>(const Term& a, const Term& b) noexcept;

 private:
  Kind kind_;
  std::string value_;
  std::string language_;
  std::string repr_;
};

/// Total order: every Iri < every BlankNode < every Literal; within a kind,
/// lexicographic by serialized form.
std::strong_ordering compare_terms(const Term& a, const Term& b) noexcept;

/// Escapes \" \\ \n \t \r for the literal grammar.
std::string escape_literal(std::string_view lexical);

/// (subject, predicate, object). The subject is never a literal and the
/// predicate is always an Iri.
class Triple {
 public:
  Triple(Term subject, const Iri& predicate, Term object);
  /// Checked variant: throws InvalidTriple if predicate is not an Iri.
  Triple(Term subject, Term predicate, Term object);

  const Term& subject() const noexcept { return subject_; }
  const Term& predicate() const noexcept { return predicate_; }
  const Term& object() const noexcept { return object_; }

  /// Canonical line without the trailing newline: `S P O .`
  std::string str() const;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend std::strong_ordering operator<=>(const Triple& a, const Triple& b) noexcept;

 private:
  Term subject_;
  Term predicate_;
  Term object_;
};

/// Namespace table for query and record shorthand.
class PrefixMap {
 public:
  explicit PrefixMap(Iri default_namespace);

  /// CERIF default namespace plus `rdf`, `rdfs` and `cerif` prefixes.
  static PrefixMap bundled();

  void add(std::string prefix, Iri ns);
  const Iri* find(std::string_view prefix) const;
  const Iri& default_namespace() const noexcept { return default_; }

 private:
  std::map<std::string, Iri, std::less<>> entries_;
  Iri default_;
};

/// Resolves `<IRI>`, `prefix:name` or `#name` to an Iri.
Iri expand(std::string_view token, const PrefixMap& prefixes);

namespace vocab {

inline constexpr std::string_view kType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view kProperty = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Property";
inline constexpr std::string_view kClass = "http://www.w3.org/2000/01/rdf-schema#Class";
inline constexpr std::string_view kSubClassOf = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
inline constexpr std::string_view kSubPropertyOf = "http://www.w3.org/2000/01/rdf-schema#subPropertyOf";
inline constexpr std::string_view kDomain = "http://www.w3.org/2000/01/rdf-schema#domain";
inline constexpr std::string_view kRange = "http://www.w3.org/2000/01/rdf-schema#range";
inline constexpr std::string_view kLabel = "http://www.w3.org/2000/01/rdf-schema#label";
inline constexpr std::string_view kLiteral = "http://www.w3.org/2000/01/rdf-schema#Literal";

inline constexpr std::string_view kRdfNamespace = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view kRdfsNamespace = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view kCerifNamespace = "http://derpi.tuwien.ac.at/~andrei/cerif.rdfs#";

/// CERIF namespace + name.
Iri cerif(std::string_view name);
Iri iri(std::string_view reserved);

}  // namespace vocab

}  // namespace cris

template <>
struct std::hash<cris::Iri> {
  std::size_t operator()(const cris::Iri& iri) const noexcept {
    return std::hash<std::string>{}(iri.str());
  }
};

template <>
struct std::hash<cris::Term> {
  std::size_t operator()(const cris::Term& term) const noexcept {
    return std::hash<std::string>{}(term.str());
  }
};

template <>
struct std::hash<cris::Triple> {
  std::size_t operator()(const cris::Triple& t) const noexcept {
    std::size_t h = std::hash<cris::Term>{}(t.subject());
    h = h * 1000003u ^ std::hash<cris::Term>{}(t.predicate());
    h = h * 1000003u ^ std::hash<cris::Term>{}(t.object());
    return h;
  }
};
