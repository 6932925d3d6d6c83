#include "cris/model.hpp"

#include <algorithm>

namespace cris {

namespace {

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_lower_alnum(char c) { return (c >= 'a' && c <= 'z') || is_digit(c); }

bool is_forbidden_iri_char(unsigned char c) {
  return c <= 0x20 || c == 0x7f || c == '<' || c == '>' || c == '"';
}

}  // namespace

bool is_valid_iri(std::string_view text) noexcept {
  if (text.empty() || !is_alpha(text.front())) return false;
  std::size_t i = 1;
  while (i < text.size() && (is_alpha(text[i]) || is_digit(text[i]) || text[i] == '+' ||
                             text[i] == '-' || text[i] == '.')) {
    ++i;
  }
  if (i >= text.size() || text[i] != ':') return false;
  if (i + 1 == text.size()) return false;
  return std::none_of(text.begin(), text.end(),
                      [](char c) { return is_forbidden_iri_char(static_cast<unsigned char>(c)); });
}

Iri make_iri(std::string_view text) {
  if (!is_valid_iri(text)) {
    throw MalformedIri("malformed IRI '" + std::string(text) + "'");
  }
  return Iri(std::string(text));
}

bool is_valid_language_tag(std::string_view tag) noexcept {
  // [a-z]{1,8}(-[a-z0-9]{1,8})*
  std::size_t i = 0;
  std::size_t run = 0;
  while (i < tag.size() && tag[i] >= 'a' && tag[i] <= 'z') {
    ++i;
    ++run;
  }
  if (run < 1 || run > 8) return false;
  while (i < tag.size()) {
    if (tag[i] != '-') return false;
    ++i;
    run = 0;
    while (i < tag.size() && is_lower_alnum(tag[i])) {
      ++i;
      ++run;
    }
    if (run < 1 || run > 8) return false;
  }
  return true;
}

bool is_valid_blank_label(std::string_view label) noexcept {
  return !label.empty() &&
         std::all_of(label.begin(), label.end(), [](char c) { return is_alpha(c) || is_digit(c); });
}

Literal::Literal(std::string lexical, std::string language)
    : lexical_(std::move(lexical)), language_(std::move(language)) {
  if (!language_.empty() && !is_valid_language_tag(language_)) {
    throw InvalidTriple("invalid language tag '" + language_ + "'");
  }
}

BlankNode::BlankNode(std::string label) : label_(std::move(label)) {
  if (!is_valid_blank_label(label_)) {
    throw InvalidTriple("invalid blank node label '" + label_ + "'");
  }
}

std::string escape_literal(std::string_view lexical) {
  std::string out;
  out.reserve(lexical.size() + 2);
  for (char c : lexical) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

Term::Term(const Iri& iri) : kind_(Kind::kIri), value_(iri.str()), repr_("<" + iri.str() + ">") {}

Term::Term(const BlankNode& blank)
    : kind_(Kind::kBlank), value_(blank.label()), repr_("_:" + blank.label()) {}

Term::Term(const Literal& literal)
    : kind_(Kind::kLiteral), value_(literal.lexical()), language_(literal.language()) {
  repr_ = "\"" + escape_literal(value_) + "\"";
  if (!language_.empty()) repr_ += "@" + language_;
}

Iri Term::as_iri() const {
  if (!is_iri()) throw InvalidTriple("term " + repr_ + " is not an IRI");
  return make_iri(value_);
}

BlankNode Term::as_blank() const {
  if (!is_blank()) throw InvalidTriple("term " + repr_ + " is not a blank node");
  return BlankNode(value_);
}

Literal Term::as_literal() const {
  if (!is_literal()) throw InvalidTriple("term " + repr_ + " is not a literal");
  return Literal(value_, language_);
}

std::strong_ordering operator<=>(const Term& a, const Term& b) noexcept {
  return compare_terms(a, b);
}

std::strong_ordering compare_terms(const Term& a, const Term& b) noexcept {
  if (a.kind() != b.kind()) return a.kind() <=> b.kind();
  return a.str().compare(b.str()) <=> 0;
}

Triple::Triple(Term subject, const Iri& predicate, Term object)
    : Triple(std::move(subject), Term(predicate), std::move(object)) {}

Triple::Triple(Term subject, Term predicate, Term object)
    : subject_(std::move(subject)), predicate_(std::move(predicate)), object_(std::move(object)) {
  if (subject_.is_literal()) throw InvalidTriple("literal subject " + subject_.str());
  if (!predicate_.is_iri()) throw InvalidTriple("non-IRI predicate " + predicate_.str());
}

std::string Triple::str() const {
  return subject_.str() + " " + predicate_.str() + " " + object_.str() + " .";
}

std::strong_ordering operator<=>(const Triple& a, const Triple& b) noexcept {
  if (auto c = compare_terms(a.subject_, b.subject_); c != 0) return c;
  if (auto c = compare_terms(a.predicate_, b.predicate_); c != 0) return c;
  return compare_terms(a.object_, b.object_);
}

PrefixMap::PrefixMap(Iri default_namespace) : default_(std::move(default_namespace)) {}

PrefixMap PrefixMap::bundled() {
  PrefixMap map(vocab::iri(vocab::kCerifNamespace));
  map.add("rdf", vocab::iri(vocab::kRdfNamespace));
  map.add("rdfs", vocab::iri(vocab::kRdfsNamespace));
  map.add("cerif", vocab::iri(vocab::kCerifNamespace));
  return map;
}

void PrefixMap::add(std::string prefix, Iri ns) {
  entries_.insert_or_assign(std::move(prefix), std::move(ns));
}

const Iri* PrefixMap::find(std::string_view prefix) const {
  auto it = entries_.find(prefix);
  return it == entries_.end() ? nullptr : &it->second;
}

Iri expand(std::string_view token, const PrefixMap& prefixes) {
  if (token.size() >= 2 && token.front() == '<' && token.back() == '>') {
    return make_iri(token.substr(1, token.size() - 2));
  }
  if (!token.empty() && token.front() == '#') {
    std::string_view base = prefixes.default_namespace().str();
    if (!base.empty() && base.back() == '#') base.remove_suffix(1);
    return make_iri(std::string(base) + std::string(token));
  }
  auto colon = token.find(':');
  if (colon == std::string_view::npos) {
    throw MalformedIri("cannot expand '" + std::string(token) + "'");
  }
  std::string_view prefix = token.substr(0, colon);
  const Iri* ns = prefixes.find(prefix);
  if (ns == nullptr) throw UnknownPrefix(std::string(prefix));
  return make_iri(ns->str() + std::string(token.substr(colon + 1)));
}

namespace vocab {

Iri cerif(std::string_view name) { return make_iri(std::string(kCerifNamespace) + std::string(name)); }
Iri iri(std::string_view reserved) { return make_iri(reserved); }

}  // namespace vocab

}  // namespace cris
