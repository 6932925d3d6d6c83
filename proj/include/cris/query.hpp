#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cris/model.hpp"
#include "cris/schema.hpp"
#include "cris/store.hpp"

namespace cris {

/// A class reference; strict (`^`) matches only instances asserted with
/// exactly this class.
struct ClassRef {
  Iri iri;
  bool strict = false;
  friend bool operator==(const ClassRef&, const ClassRef&) = default;
};

/// A property reference; strict (`^`) disables subproperty inclusion.
struct PropertyRef {
  Iri iri;
  bool strict = false;
  friend bool operator==(const PropertyRef&, const PropertyRef&) = default;
};

struct PathStep {
  PropertyRef property;
  std::string var;
  friend bool operator==(const PathStep&, const PathStep&) = default;
};

/// `Class {X} . prop {Y} . prop {Z}`: each step follows a property from the
/// previous variable.
struct PathPattern {
  ClassRef head;
  std::string head_var;
  std::vector<PathStep> steps;

  std::vector<std::string> vars() const;
  friend bool operator==(const PathPattern&, const PathPattern&) = default;
};

struct VarEqVar {
  std::string left;
  std::string right;
  friend bool operator==(const VarEqVar&, const VarEqVar&) = default;
};

/// Literal equality on the lexical form; case-sensitive.
struct VarEqLiteral {
  std::string var;
  std::string text;
  friend bool operator==(const VarEqLiteral&, const VarEqLiteral&) = default;
};

/// `*` in the pattern matches any (possibly empty) substring.
struct VarLikeLiteral {
  std::string var;
  std::string pattern;
  friend bool operator==(const VarLikeLiteral&, const VarLikeLiteral&) = default;
};

using Condition = std::variant<VarEqVar, VarEqLiteral, VarLikeLiteral>;

struct ClassQuery {
  ClassRef class_ref;
  friend bool operator==(const ClassQuery&, const ClassQuery&) = default;
};

struct SelectQuery {
  std::vector<std::string> projection;
  std::vector<PathPattern> patterns;
  std::vector<Condition> filter;
  friend bool operator==(const SelectQuery&, const SelectQuery&) = default;
};

using QueryAst = std::variant<ClassQuery, SelectQuery>;

/// Column name of a class query's single result column.
inline constexpr std::string_view kClassQueryColumn = "X0";

/// Projected result rows, deduplicated and sorted column by column.
struct BindingTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Term>> rows;
  friend bool operator==(const BindingTable&, const BindingTable&) = default;
};

/// Parses the query surface syntax. Throws SyntaxError, UnknownPrefix,
/// MalformedIri or UnboundVariable.
QueryAst parse_query(std::string_view text, const PrefixMap& prefixes);

/// Renders an AST back into surface syntax with `<IRI>` references.
std::string format_query(const QueryAst& ast);

/// Evaluates over one snapshot. Unknown classes and properties simply match
/// nothing beyond their own asserted instances; evaluation never fails.
BindingTable evaluate(const QueryAst& ast, const Snapshot& snap, const Schema& schema, const ClosureTable& ct);

bool like_match(std::string_view text, std::string_view pattern);

}  // namespace cris
