#include <cctype>
#include <set>

#include "cris/query.hpp"

namespace cris {

namespace {

enum class Tok { kCaret, kIriRef, kHashName, kPrefixed, kLBrace, kRBrace, kDot, kComma, kEq, kString, kIdent, kEnd };

struct Token {
  Tok kind;
  std::string text;  // raw token text; decoded contents for strings
  std::size_t pos;
};

const char* describe(Tok kind) {
  switch (kind) {
    case Tok::kCaret: return "'^'";
    case Tok::kIriRef: return "<IRI>";
    case Tok::kHashName: return "#name";
    case Tok::kPrefixed: return "prefix:name";
    case Tok::kLBrace: return "'{'";
    case Tok::kRBrace: return "'}'";
    case Tok::kDot: return "'.'";
    case Tok::kComma: return "','";
    case Tok::kEq: return "'='";
    case Tok::kString: return "string";
    case Tok::kIdent: return "identifier";
    case Tok::kEnd: return "end of query";
  }
  return "?";
}

bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-'; }
bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      ++i;
      continue;
    }
    std::size_t start = i;
    switch (c) {
      case '^': out.push_back({Tok::kCaret, "^", i++}); continue;
      case '{': out.push_back({Tok::kLBrace, "{", i++}); continue;
      case '}': out.push_back({Tok::kRBrace, "}", i++}); continue;
      case '.': out.push_back({Tok::kDot, ".", i++}); continue;
      case ',': out.push_back({Tok::kComma, ",", i++}); continue;
      case '=': out.push_back({Tok::kEq, "=", i++}); continue;
      default: break;
    }
    if (c == '<') {
      auto close = text.find('>', i);
      if (close == std::string_view::npos) throw SyntaxError(i, "unterminated <IRI>");
      out.push_back({Tok::kIriRef, std::string(text.substr(i, close - i + 1)), start});
      i = close + 1;
    } else if (c == '#') {
      ++i;
      while (i < text.size() && is_name_char(text[i])) ++i;
      if (i == start + 1) throw SyntaxError(start, "expected name after '#'");
      out.push_back({Tok::kHashName, std::string(text.substr(start, i - start)), start});
    } else if (c == '"') {
      ++i;
      std::string value;
      for (;;) {
        if (i >= text.size()) throw SyntaxError(start, "unterminated string");
        char ch = text[i++];
        if (ch == '"') break;
        if (ch != '\\') {
          value += ch;
          continue;
        }
        if (i >= text.size()) throw SyntaxError(start, "unterminated string");
        char e = text[i++];
        switch (e) {
          case '"': value += '"'; break;
          case '\\': value += '\\'; break;
          case 'n': value += '\n'; break;
          case 't': value += '\t'; break;
          case 'r': value += '\r'; break;
          default: throw SyntaxError(i - 2, std::string("unknown escape '\\") + e + "'");
        }
      }
      out.push_back({Tok::kString, std::move(value), start});
    } else if (is_ident_start(c)) {
      while (i < text.size() && is_ident_char(text[i])) ++i;
      if (i < text.size() && text[i] == ':') {
        ++i;
        std::size_t local = i;
        while (i < text.size() && is_name_char(text[i])) ++i;
        if (i == local) throw SyntaxError(local, "expected name after ':'");
        out.push_back({Tok::kPrefixed, std::string(text.substr(start, i - start)), start});
      } else {
        out.push_back({Tok::kIdent, std::string(text.substr(start, i - start)), start});
      }
    } else {
      throw SyntaxError(i, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::kEnd, "", text.size()});
  return out;
}

bool is_keyword(std::string_view word) {
  return word == "select" || word == "from" || word == "where" || word == "and" || word == "like";
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, const PrefixMap& prefixes)
      : tokens_(std::move(tokens)), prefixes_(prefixes) {}

  QueryAst parse() {
    QueryAst ast = peek_keyword("select") ? QueryAst(select()) : QueryAst(ClassQuery{class_ref()});
    expect(Tok::kEnd);
    return ast;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }

  bool peek_keyword(std::string_view word) const {
    return peek().kind == Tok::kIdent && peek().text == word;
  }

  [[noreturn]] void unexpected(const std::string& expected) const {
    std::string found = peek().kind == Tok::kEnd ? "end of query" : "'" + peek().text + "'";
    throw SyntaxError(peek().pos, "expected " + expected + ", found " + found);
  }

  const Token& expect(Tok kind) {
    if (peek().kind != kind) unexpected(describe(kind));
    return next();
  }

  void expect_keyword(std::string_view word) {
    if (!peek_keyword(word)) unexpected("'" + std::string(word) + "'");
    next();
  }

  const Token& var() {
    if (peek().kind != Tok::kIdent || is_keyword(peek().text)) unexpected("variable");
    return next();
  }

  std::pair<Iri, bool> ref() {
    bool strict = false;
    if (peek().kind == Tok::kCaret) {
      next();
      strict = true;
    }
    const Token& tok = peek();
    if (tok.kind != Tok::kIriRef && tok.kind != Tok::kHashName && tok.kind != Tok::kPrefixed) {
      unexpected("class or property reference");
    }
    next();
    try {
      return {expand(tok.text, prefixes_), strict};
    } catch (const MalformedIri& e) {
      throw SyntaxError(tok.pos, e.what());
    }
  }

  ClassRef class_ref() {
    auto [iri, strict] = ref();
    return ClassRef{std::move(iri), strict};
  }

  std::string braced_var(std::set<std::string>& seen) {
    expect(Tok::kLBrace);
    const Token& v = var();
    if (!seen.insert(v.text).second) {
      throw SyntaxError(v.pos, "variable " + v.text + " repeated within one pattern");
    }
    expect(Tok::kRBrace);
    return v.text;
  }

  PathPattern pattern() {
    std::set<std::string> seen;
    ClassRef head = class_ref();
    std::string head_var = braced_var(seen);
    PathPattern p{std::move(head), std::move(head_var), {}};
    while (peek().kind == Tok::kDot) {
      next();
      auto [iri, strict] = ref();
      p.steps.push_back({PropertyRef{std::move(iri), strict}, braced_var(seen)});
    }
    return p;
  }

  Condition condition(std::vector<std::pair<std::string, std::size_t>>& used) {
    const Token& v = var();
    used.emplace_back(v.text, v.pos);
    if (peek_keyword("like")) {
      next();
      return VarLikeLiteral{v.text, expect(Tok::kString).text};
    }
    expect(Tok::kEq);
    if (peek().kind == Tok::kString) return VarEqLiteral{v.text, next().text};
    const Token& other = var();
    used.emplace_back(other.text, other.pos);
    return VarEqVar{v.text, other.text};
  }

  SelectQuery select() {
    expect_keyword("select");
    SelectQuery q;
    std::vector<std::pair<std::string, std::size_t>> used;
    std::set<std::string> projected;
    do {
      if (!q.projection.empty()) next();
      const Token& v = var();
      if (!projected.insert(v.text).second) throw SyntaxError(v.pos, "duplicate projection variable " + v.text);
      q.projection.push_back(v.text);
      used.emplace_back(v.text, v.pos);
    } while (peek().kind == Tok::kComma);

    expect_keyword("from");
    q.patterns.push_back(pattern());
    while (peek().kind == Tok::kComma) {
      next();
      q.patterns.push_back(pattern());
    }
    if (peek_keyword("where")) {
      next();
      q.filter.push_back(condition(used));
      while (peek_keyword("and")) {
        next();
        q.filter.push_back(condition(used));
      }
    }

    std::set<std::string> bound;
    for (const auto& p : q.patterns) {
      for (auto& v : p.vars()) bound.insert(std::move(v));
    }
    // Report the leftmost unbound variable once the whole query is known to parse.
    if (peek().kind == Tok::kEnd) {
      for (const auto& [name, pos] : used) {
        if (!bound.contains(name)) throw UnboundVariable(name, pos);
      }
    }
    return q;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const PrefixMap& prefixes_;
};

std::string escape_string(std::string_view s) { return "\"" + escape_literal(s) + "\""; }

std::string format_ref(const Iri& iri, bool strict) { return (strict ? "^<" : "<") + iri.str() + ">"; }

}  // namespace

std::vector<std::string> PathPattern::vars() const {
  std::vector<std::string> out{head_var};
  for (const auto& s : steps) out.push_back(s.var);
  return out;
}

QueryAst parse_query(std::string_view text, const PrefixMap& prefixes) {
  return Parser(tokenize(text), prefixes).parse();
}

std::string format_query(const QueryAst& ast) {
  if (const auto* cq = std::get_if<ClassQuery>(&ast)) {
    return format_ref(cq->class_ref.iri, cq->class_ref.strict);
  }
  const auto& q = std::get<SelectQuery>(ast);
  std::string out = "select ";
  for (std::size_t i = 0; i < q.projection.size(); ++i) {
    if (i > 0) out += ", ";
    out += q.projection[i];
  }
  out += " from ";
  for (std::size_t i = 0; i < q.patterns.size(); ++i) {
    const auto& p = q.patterns[i];
    if (i > 0) out += ", ";
    out += format_ref(p.head.iri, p.head.strict) + " {" + p.head_var + "}";
    for (const auto& s : p.steps) {
      out += " . " + format_ref(s.property.iri, s.property.strict) + " {" + s.var + "}";
    }
  }
  for (std::size_t i = 0; i < q.filter.size(); ++i) {
    out += i == 0 ? " where " : " and ";
    std::visit(
        [&](const auto& c) {
          using C = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<C, VarEqVar>) {
            out += c.left + " = " + c.right;
          } else if constexpr (std::is_same_v<C, VarEqLiteral>) {
            out += c.var + " = " + escape_string(c.text);
          } else {
            out += c.var + " like " + escape_string(c.pattern);
          }
        },
        q.filter[i]);
  }
  return out;
}

}  // namespace cris
