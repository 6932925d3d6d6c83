#include "cris/generator.hpp"

#include <algorithm>
#include <cctype>

#include <json.hpp>

#include "cris/serde.hpp"

namespace cris {

namespace {

using nlohmann::json;

bool is_record_id(std::string_view id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
  });
}

RecordValue parse_value(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_object() && v.size() == 1 && v.contains("@id") && v["@id"].is_string()) {
    return RecordRef{v["@id"].get<std::string>()};
  }
  throw RecordFileError(where + ": value must be a string or {\"@id\": string}");
}

Iri expand_token(std::string_view token) {
  if (token.find(':') != std::string_view::npos) return make_iri(token);
  return vocab::cerif(token);
}

}  // namespace

RecordFile parse_record_file(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw RecordFileError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw RecordFileError("record file must be a JSON object");

  RecordFile rf;
  if (doc.contains("base_uri")) {
    if (!doc["base_uri"].is_string()) throw RecordFileError("base_uri must be a string");
    rf.base_uri = doc["base_uri"].get<std::string>();
  }
  if (!doc.contains("records") || !doc["records"].is_array()) {
    throw RecordFileError("record file needs a \"records\" array");
  }
  std::set<std::string> ids;
  for (const auto& r : doc["records"]) {
    if (!r.is_object() || !r.contains("id") || !r["id"].is_string() || !r.contains("type") ||
        !r["type"].is_string()) {
      throw RecordFileError("each record needs string \"id\" and \"type\"");
    }
    Record rec{r["id"].get<std::string>(), r["type"].get<std::string>(), {}};
    if (!is_record_id(rec.id)) throw RecordFileError("invalid record id '" + rec.id + "'");
    if (!ids.insert(rec.id).second) throw RecordFileError("duplicate record id '" + rec.id + "'");
    if (r.contains("properties")) {
      if (!r["properties"].is_object()) throw RecordFileError(rec.id + ": properties must be an object");
      for (const auto& [name, values] : r["properties"].items()) {
        auto& out = rec.properties[name];
        std::string where = rec.id + "." + name;
        if (values.is_array()) {
          for (const auto& v : values) out.push_back(parse_value(v, where));
        } else {
          out.push_back(parse_value(values, where));
        }
      }
    }
    rf.records.push_back(std::move(rec));
  }
  return rf;
}

GeneratedAnnotation generate(const RecordFile& rf, const Schema& schema, const ClosureTable& /*ct*/,
                             const GeneratorOptions& options) {
  if (!is_valid_iri(rf.base_uri)) throw RecordFileError("base URI '" + rf.base_uri + "' is not an absolute IRI");

  GeneratedAnnotation out;
  for (const auto& rec : rf.records) {
    if (!is_record_id(rec.id)) throw RecordFileError("invalid record id '" + rec.id + "'");
    if (!out.subject_uris.emplace(rec.id, make_iri(rf.base_uri + rec.id)).second) {
      throw RecordFileError("duplicate record id '" + rec.id + "'");
    }
  }

  const Iri type = vocab::iri(vocab::kType);
  for (const auto& rec : rf.records) {
    const Iri& subject = out.subject_uris.at(rec.id);
    Iri cls = [&] {
      try {
        return expand_token(rec.type);
      } catch (const MalformedIri&) {
        throw UnknownType(rec.id + ": unknown type '" + rec.type + "'");
      }
    }();
    if (!schema.classes.contains(cls)) throw UnknownType(rec.id + ": unknown type '" + rec.type + "'");
    out.triples.emplace(subject, type, cls);

    for (const auto& [name, values] : rec.properties) {
      Iri prop = expand_token(name);
      if (!schema.properties.contains(prop)) {
        std::string message = rec.id + ": unknown property '" + name + "'";
        if (options.strict) throw UnknownProperty(message);
        out.warnings.push_back(std::move(message));
      }
      for (const auto& v : values) {
        if (const auto* text = std::get_if<std::string>(&v)) {
          out.triples.emplace(subject, prop, Literal(*text));
          continue;
        }
        const std::string& ref = std::get<RecordRef>(v).id;
        if (auto it = out.subject_uris.find(ref); it != out.subject_uris.end()) {
          out.triples.emplace(subject, prop, it->second);
        } else if (is_valid_iri(ref)) {
          out.triples.emplace(subject, prop, make_iri(ref));
        } else {
          throw DanglingReference(rec.id + "." + name + ": reference '" + ref + "' does not resolve");
        }
      }
    }
  }
  return out;
}

namespace {

std::size_t find_head_close(std::string_view html) {
  for (std::size_t i = 0; i + 7 <= html.size(); ++i) {
    if (html[i] != '<' || html[i + 1] != '/') continue;
    std::string name;
    for (std::size_t j = i + 2; j < i + 6; ++j) name += static_cast<char>(std::tolower(static_cast<unsigned char>(html[j])));
    if (name == "head" && (html[i + 6] == '>' || std::isspace(static_cast<unsigned char>(html[i + 6])) != 0)) return i;
  }
  return std::string_view::npos;
}

}  // namespace

std::string embed(const std::set<Triple>& triples, std::string_view html) {
  std::string page;
  std::size_t cursor = 0;
  for (const auto& block : find_inline_blocks(html)) {
    page.append(html.substr(cursor, block.element_begin - cursor));
    cursor = block.element_end;
    if (cursor < html.size() && html[cursor] == '\n') ++cursor;
  }
  page.append(html.substr(cursor));

  // FIXME: a literal containing "</script" ends the block early; the triple
  // grammar has no escape for '<', so such literals cannot be embedded.
  std::string element = "<script type=\"" + std::string(kTriplesMediaType) + "\">\n" + serialize(triples) +
                        "</script>\n";
  std::size_t at = find_head_close(page);
  page.insert(at == std::string::npos ? 0 : at, element);
  return page;
}

std::string embed(const GeneratedAnnotation& annotation, std::string_view html) {
  return embed(annotation.triples, html);
}

}  // namespace cris
