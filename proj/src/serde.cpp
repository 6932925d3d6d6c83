#include "cris/serde.hpp"

#include <algorithm>
#include <cctype>

namespace cris {

namespace {

bool is_ws(char c) { return c == ' ' || c == '\t'; }

class LineCursor {
 public:
  explicit LineCursor(std::string_view text) : text_(text) {}

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }
  std::size_t pos() const { return pos_; }

  std::size_t skip_ws() {
    std::size_t start = pos_;
    while (!done() && is_ws(text_[pos_])) ++pos_;
    return pos_ - start;
  }

  Term term(bool allow_blank, bool allow_literal) {
    char c = peek();
    if (c == '<') return iri();
    if (c == '_' && allow_blank) return blank();
    if (c == '"' && allow_literal) return literal();
    fail("unexpected " + describe_here());
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw InvalidTriple(message + " at column " + std::to_string(pos_ + 1));
  }

  std::string describe_here() const {
    if (done()) return "end of line";
    return "'" + std::string(1, text_[pos_]) + "'";
  }

  void expect(char c, const char* what) {
    if (peek() != c) fail(std::string("expected ") + what + ", found " + describe_here());
    ++pos_;
  }

 private:
  Term iri() {
    ++pos_;
    auto close = text_.find('>', pos_);
    if (close == std::string_view::npos) fail("unterminated IRI");
    std::string_view body = text_.substr(pos_, close - pos_);
    if (!is_valid_iri(body)) fail("malformed IRI <" + std::string(body) + ">");
    pos_ = close + 1;
    return Term(make_iri(body));
  }

  Term blank() {
    if (text_.substr(pos_, 2) != "_:") fail("expected '_:'");
    pos_ += 2;
    std::size_t start = pos_;
    while (!done() && std::isalnum(static_cast<unsigned char>(text_[pos_])) != 0) ++pos_;
    if (pos_ == start) fail("empty blank node label");
    return Term(BlankNode(std::string(text_.substr(start, pos_ - start))));
  }

  Term literal() {
    ++pos_;
    std::string lexical;
    for (;;) {
      if (done()) fail("unterminated literal");
      char c = text_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        lexical += c;
        continue;
      }
      if (done()) fail("unterminated escape");
      char e = text_[pos_++];
      switch (e) {
        case '"': lexical += '"'; break;
        case '\\': lexical += '\\'; break;
        case 'n': lexical += '\n'; break;
        case 't': lexical += '\t'; break;
        case 'r': lexical += '\r'; break;
        default: --pos_; fail(std::string("unknown escape '\\") + e + "'");
      }
    }
    std::string language;
    if (peek() == '@') {
      ++pos_;
      std::size_t start = pos_;
      while (!done() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) != 0 ||
                         text_[pos_] == '-')) {
        ++pos_;
      }
      language = std::string(text_.substr(start, pos_ - start));
      if (!is_valid_language_tag(language)) fail("invalid language tag '" + language + "'");
    }
    return Term(Literal(std::move(lexical), std::move(language)));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

Triple parse_triple_body(LineCursor& cur) {
  Term subject = cur.term(true, false);
  if (cur.skip_ws() == 0) cur.fail("expected whitespace after subject");
  if (cur.peek() != '<') cur.fail("predicate must be an IRI, found " + cur.describe_here());
  Term predicate = cur.term(false, false);
  if (cur.skip_ws() == 0) cur.fail("expected whitespace after predicate");
  Term object = cur.term(true, true);
  cur.skip_ws();
  cur.expect('.', "'.'");
  cur.skip_ws();
  if (!cur.done()) cur.fail("trailing content " + cur.describe_here());
  return Triple(std::move(subject), std::move(predicate), std::move(object));
}

}  // namespace

Triple parse_triple_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  LineCursor cur(line);
  cur.skip_ws();
  return parse_triple_body(cur);
}

ParseOutcome parse_triples(std::string_view text, std::string scope) {
  ParseOutcome out;
  out.blank_scope = std::move(scope);
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    LineCursor cur(line);
    cur.skip_ws();
    if (cur.done() || cur.peek() == '#') continue;
    try {
      out.triples.push_back(parse_triple_body(cur));
    } catch (const Error& e) {
      out.errors.push_back({line_no, e.what()});
    }
  }
  return out;
}

std::string serialize(std::vector<Triple> triples) {
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());
  std::string out;
  for (const auto& t : triples) {
    out += t.str();
    out += '\n';
  }
  return out;
}

std::string serialize(const std::set<Triple>& triples) {
  std::string out;
  for (const auto& t : triples) {
    out += t.str();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// URL resolution

namespace {

struct UrlParts {
  std::string_view scheme;
  std::optional<std::string_view> authority;
  std::string_view path;
  std::optional<std::string_view> query;
};

std::optional<std::size_t> scheme_length(std::string_view s) {
  if (s.empty() || std::isalpha(static_cast<unsigned char>(s[0])) == 0) return std::nullopt;
  for (std::size_t i = 1; i < s.size(); ++i) {
    char c = s[i];
    if (c == ':') return i;
    if (std::isalnum(static_cast<unsigned char>(c)) == 0 && c != '+' && c != '-' && c != '.') {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

UrlParts split_url(std::string_view s) {
  UrlParts parts;
  if (auto n = scheme_length(s)) {
    parts.scheme = s.substr(0, *n);
    s.remove_prefix(*n + 1);
  }
  if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
  if (s.substr(0, 2) == "//") {
    s.remove_prefix(2);
    auto end = s.find_first_of("/?");
    parts.authority = s.substr(0, end);
    s = end == std::string_view::npos ? std::string_view{} : s.substr(end);
  }
  auto q = s.find('?');
  parts.path = s.substr(0, q);
  if (q != std::string_view::npos) parts.query = s.substr(q + 1);
  return parts;
}

std::string remove_dot_segments(std::string_view input) {
  std::string in(input);
  std::string out;
  while (!in.empty()) {
    if (in.rfind("../", 0) == 0) {
      in.erase(0, 3);
    } else if (in.rfind("./", 0) == 0) {
      in.erase(0, 2);
    } else if (in.rfind("/./", 0) == 0) {
      in.replace(0, 3, "/");
    } else if (in == "/.") {
      in = "/";
    } else if (in.rfind("/../", 0) == 0 || in == "/..") {
      if (in == "/..") {
        in = "/";
      } else {
        in.replace(0, 4, "/");
      }
      auto cut = out.rfind('/');
      out.erase(cut == std::string::npos ? 0 : cut);
    } else if (in == "." || in == "..") {
      in.clear();
    } else {
      std::size_t next = in.find('/', in[0] == '/' ? 1 : 0);
      if (next == std::string::npos) next = in.size();
      out += in.substr(0, next);
      in.erase(0, next);
    }
  }
  return out;
}

std::string compose(std::string_view scheme, const std::optional<std::string>& authority,
                    const std::string& path, const std::optional<std::string_view>& query) {
  std::string out(scheme);
  out += ':';
  if (authority) out += "//" + *authority;
  out += path;
  if (query) {
    out += '?';
    out += *query;
  }
  return out;
}

}  // namespace

std::string strip_fragment(std::string_view url) {
  return std::string(url.substr(0, url.find('#')));
}

std::optional<std::string> resolve_reference(std::string_view base, std::string_view reference) {
  UrlParts b = split_url(base);
  if (b.scheme.empty()) return std::nullopt;
  std::string_view fragmentless = reference.substr(0, reference.find('#'));
  UrlParts r = split_url(fragmentless);
  std::string fragment =
      reference.find('#') == std::string_view::npos ? "" : std::string(reference.substr(reference.find('#')));

  std::string result;
  if (!r.scheme.empty()) {
    std::optional<std::string> auth;
    if (r.authority) auth = std::string(*r.authority);
    result = compose(r.scheme, auth, remove_dot_segments(r.path), r.query);
  } else {
    bool hierarchical = b.authority.has_value() || (!b.path.empty() && b.path.front() == '/');
    if (!hierarchical) return std::nullopt;
    std::optional<std::string> auth;
    if (b.authority) auth = std::string(*b.authority);
    if (r.authority) {
      result = compose(b.scheme, std::string(*r.authority), remove_dot_segments(r.path), r.query);
    } else if (r.path.empty()) {
      result = compose(b.scheme, auth, std::string(b.path), r.query ? r.query : b.query);
    } else if (r.path.front() == '/') {
      result = compose(b.scheme, auth, remove_dot_segments(r.path), r.query);
    } else {
      std::string merged;
      if (b.authority && b.path.empty()) {
        merged = "/" + std::string(r.path);
      } else {
        auto slash = b.path.rfind('/');
        merged = std::string(slash == std::string_view::npos ? std::string_view{}
                                                             : b.path.substr(0, slash + 1)) +
                 std::string(r.path);
      }
      result = compose(b.scheme, auth, remove_dot_segments(merged), r.query);
    }
  }
  return result + fragment;
}

// ---------------------------------------------------------------------------
// HTML tag scan

namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from) {
  if (needle.empty()) return from;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      if (std::tolower(static_cast<unsigned char>(hay[i + j])) !=
          std::tolower(static_cast<unsigned char>(needle[j]))) {
        match = false;
        break;
      }
    }
    if (match) return i;
  }
  return std::string_view::npos;
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x110000) {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

std::string decode_entities(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out += s[i];
      continue;
    }
    auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out += s[i];
      continue;
    }
    std::string_view name = s.substr(i + 1, semi - i - 1);
    if (name == "amp") out += '&';
    else if (name == "lt") out += '<';
    else if (name == "gt") out += '>';
    else if (name == "quot") out += '"';
    else if (name == "apos") out += '\'';
    else if (name.size() > 1 && name[0] == '#') {
      bool hex = name[1] == 'x' || name[1] == 'X';
      std::string digits(name.substr(hex ? 2 : 1));
      try {
        append_utf8(out, std::stoul(digits, nullptr, hex ? 16 : 10));
      } catch (const std::exception&) {
        out += s.substr(i, semi - i + 1);
      }
    } else {
      out += s.substr(i, semi - i + 1);
    }
    i = semi;
  }
  return out;
}

struct Tag {
  std::string name;  // lowercase
  bool closing = false;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::size_t end = 0;  // index one past '>'

  const std::string* attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes) {
      if (k == key) return &v;
    }
    return nullptr;
  }
};

// Parses a tag starting at html[pos] == '<'. Returns nullopt if it is not a tag.
std::optional<Tag> read_tag(std::string_view html, std::size_t pos) {
  Tag tag;
  std::size_t i = pos + 1;
  if (i < html.size() && html[i] == '/') {
    tag.closing = true;
    ++i;
  }
  std::size_t name_start = i;
  while (i < html.size() && (std::isalnum(static_cast<unsigned char>(html[i])) != 0)) ++i;
  if (i == name_start) return std::nullopt;
  tag.name = to_lower(html.substr(name_start, i - name_start));

  for (;;) {
    while (i < html.size() && (std::isspace(static_cast<unsigned char>(html[i])) != 0 || html[i] == '/')) ++i;
    if (i >= html.size()) {
      tag.end = html.size();
      return tag;
    }
    if (html[i] == '>') {
      tag.end = i + 1;
      return tag;
    }
    std::size_t key_start = i;
    while (i < html.size() && std::isspace(static_cast<unsigned char>(html[i])) == 0 && html[i] != '=' &&
           html[i] != '>' && html[i] != '/') {
      ++i;
    }
    std::string key = to_lower(html.substr(key_start, i - key_start));
    while (i < html.size() && std::isspace(static_cast<unsigned char>(html[i])) != 0) ++i;
    std::string value;
    if (i < html.size() && html[i] == '=') {
      ++i;
      while (i < html.size() && std::isspace(static_cast<unsigned char>(html[i])) != 0) ++i;
      if (i < html.size() && (html[i] == '"' || html[i] == '\'')) {
        char quote = html[i++];
        auto close = html.find(quote, i);
        if (close == std::string_view::npos) close = html.size();
        value = decode_entities(html.substr(i, close - i));
        i = std::min(close + 1, html.size());
      } else {
        std::size_t v_start = i;
        while (i < html.size() && std::isspace(static_cast<unsigned char>(html[i])) == 0 && html[i] != '>') ++i;
        value = decode_entities(html.substr(v_start, i - v_start));
      }
    }
    if (!key.empty()) tag.attributes.emplace_back(std::move(key), std::move(value));
  }
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n\f");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n\f");
  return std::string(s.substr(b, e - b + 1));
}

bool has_token(std::string_view list, std::string_view token) {
  std::string lower = to_lower(list);
  std::size_t i = 0;
  while (i < lower.size()) {
    while (i < lower.size() && std::isspace(static_cast<unsigned char>(lower[i])) != 0) ++i;
    std::size_t start = i;
    while (i < lower.size() && std::isspace(static_cast<unsigned char>(lower[i])) == 0) ++i;
    if (std::string_view(lower).substr(start, i - start) == token) return true;
  }
  return false;
}

}  // namespace

AnnotationExtract extract_annotations(std::string_view html, const Iri& base_url) {
  AnnotationExtract out;
  auto resolve = [&](const std::string& href) -> std::optional<Iri> {
    auto resolved = resolve_reference(base_url.str(), trim(href));
    if (resolved) {
      std::string url = strip_fragment(*resolved);
      if (is_valid_iri(url)) return make_iri(url);
    }
    ++out.dropped;
    return std::nullopt;
  };

  std::size_t pos = 0;
  std::size_t block_index = 0;
  while ((pos = html.find('<', pos)) != std::string_view::npos) {
    if (html.substr(pos, 4) == "<!--") {
      auto end = html.find("-->", pos + 4);
      pos = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    auto tag = read_tag(html, pos);
    if (!tag) {
      ++pos;
      continue;
    }
    std::size_t element_begin = pos;
    pos = tag->end;
    if (tag->closing) continue;

    if (tag->name == "script" || tag->name == "style") {
      auto close = find_ci(html, "</" + tag->name, pos);
      std::size_t content_end = close == std::string_view::npos ? html.size() : close;
      std::size_t content_begin = pos;
      if (close == std::string_view::npos) {
        pos = html.size();
      } else {
        auto gt = html.find('>', close);
        pos = gt == std::string_view::npos ? html.size() : gt + 1;
      }
      const std::string* type = tag->attribute("type");
      if (tag->name == "script" && type != nullptr && to_lower(trim(*type)) == kTriplesMediaType) {
        out.inline_blocks.push_back({block_index++, std::string(html.substr(content_begin, content_end - content_begin)),
                                     element_begin, pos});
      }
    } else if (tag->name == "a") {
      if (const std::string* href = tag->attribute("href")) {
        if (auto iri = resolve(*href)) out.outbound_links.push_back(*iri);
      }
    } else if (tag->name == "link") {
      const std::string* rel = tag->attribute("rel");
      const std::string* href = tag->attribute("href");
      if (rel != nullptr && href != nullptr && has_token(*rel, kMetaLinkRel)) {
        if (auto iri = resolve(*href)) out.linked_refs.push_back(*iri);
      }
    }
  }
  return out;
}

std::vector<InlineBlock> find_inline_blocks(std::string_view html) {
  static const Iri kNoBase = make_iri("about:blank");
  return extract_annotations(html, kNoBase).inline_blocks;
}

}  // namespace cris
