#include "cris/server.hpp"

#include <functional>
#include <set>

#include <httplib.h>

namespace cris {

using nlohmann::json;

nlohmann::json term_to_json(const Term& term) {
  switch (term.kind()) {
    case Term::Kind::kIri: return {{"iri", term.value()}};
    case Term::Kind::kBlank: return {{"blank", term.value()}};
    case Term::Kind::kLiteral: {
      json j{{"literal", term.value()}};
      if (!term.language().empty()) j["lang"] = term.language();
      return j;
    }
  }
  return nullptr;
}

nlohmann::json table_to_json(const BindingTable& table) {
  json rows = json::array();
  for (const auto& row : table.rows) {
    json r = json::array();
    for (const auto& t : row) r.push_back(term_to_json(t));
    rows.push_back(std::move(r));
  }
  return {{"columns", table.columns}, {"rows", std::move(rows)}};
}

nlohmann::json stats_to_json(const StoreStats& stats) {
  json sources = json::array();
  for (const auto& s : stats.sources) {
    sources.push_back({{"source", s.source.str()}, {"triples", s.triples}, {"latest_fetch", format_utc(s.latest_fetch)}});
  }
  return {{"triples", stats.triples},
          {"subjects", stats.subjects},
          {"predicates", stats.predicates},
          {"sources", std::move(sources)}};
}

nlohmann::json class_tree(const Schema& schema) {
  // Roots: classes whose every superclass lies on a cycle through them
  // (no superclass outside their own strongly connected component).
  ClosureTable ct = closure(schema);
  std::vector<Iri> roots;
  for (const auto& c : schema.classes) {
    bool root = true;
    for (const auto& parent : schema.direct_superclasses(c)) {
      if (!is_subclass(ct, parent, c)) {
        root = false;
        break;
      }
    }
    // Members of one root cycle: keep only the smallest as an entry point.
    if (root) {
      for (const auto& other : roots) {
        if (is_subclass(ct, c, other) && is_subclass(ct, other, c)) root = false;
      }
    }
    if (root) roots.push_back(c);
  }

  std::set<Iri> on_path;
  std::function<json(const Iri&)> node = [&](const Iri& c) {
    on_path.insert(c);
    json children = json::array();
    for (const auto& child : schema.direct_subclasses(c)) {
      if (!on_path.contains(child)) children.push_back(node(child));
    }
    on_path.erase(c);
    auto label = schema.labels.find(c);
    return json{{"iri", c.str()},
                {"label", label == schema.labels.end() ? json(nullptr) : json(label->second)},
                {"children", std::move(children)}};
  };
  json out = json::array();
  for (const auto& r : roots) out.push_back(node(r));
  return out;
}

std::vector<Triple> effective_schema_triples(const Repository& repository, const Snapshot& snap) {
  auto view = repository.schema_for(snap);
  const Term type(vocab::iri(vocab::kType));
  const Term label(vocab::iri(vocab::kLabel));
  const std::set<Term> structural{Term(vocab::iri(vocab::kSubClassOf)), Term(vocab::iri(vocab::kSubPropertyOf)),
                                  Term(vocab::iri(vocab::kDomain)), Term(vocab::iri(vocab::kRange))};
  const std::set<Term> meta{Term(vocab::iri(vocab::kClass)), Term(vocab::iri(vocab::kProperty))};

  std::vector<Triple> out = repository.base_schema();
  for (const auto& t : snap.triples()) {
    bool schema_triple = structural.contains(t.predicate()) || (t.predicate() == type && meta.contains(t.object()));
    if (!schema_triple && t.predicate() == label && t.subject().is_iri()) {
      Iri s = t.subject().as_iri();
      schema_triple = view->schema.classes.contains(s) || view->schema.properties.contains(s);
    }
    if (schema_triple) out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

constexpr const char* kJson = "application/json";

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message,
                std::optional<std::size_t> position = std::nullopt, json extra = json::object()) {
  json body = std::move(extra);
  body["code"] = code;
  body["message"] = message;
  if (position) body["position"] = *position;
  res.status = status;
  res.set_content(body.dump(), kJson);
}

std::string default_code(int status) {
  switch (status) {
    case 400: return "BAD_REQUEST";
    case 404: return "NOT_FOUND";
    case 405: return "METHOD_NOT_ALLOWED";
    case 413: return "PAYLOAD_TOO_LARGE";
    case 414: return "URI_TOO_LONG";
    default: return "HTTP_" + std::to_string(status);
  }
}

}  // namespace

struct Server::Impl {
  Repository& repo;
  ServerOptions options;
  httplib::Server http;

  Impl(Repository& r, ServerOptions o) : repo(r), options(std::move(o)) {
    http.set_payload_max_length(options.body_limit);
    http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        send_error(res, res.status, default_code(res.status), httplib::status_message(res.status));
      }
    });
    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string message = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        message = e.what();
      } catch (...) {
      }
      send_error(res, 500, "INTERNAL", message);
    });
    if (!options.cors_origin.empty()) {
      http.set_post_routing_handler([origin = options.cors_origin](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Vary", "Origin");
      });
      http.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
      });
    }

    http.Post("/query", [this](const httplib::Request& req, httplib::Response& res) { query(req, res); });
    http.Post("/statements", [this](const httplib::Request& req, httplib::Response& res) { statements(req, res); });
    http.Get("/classes", [this](const httplib::Request&, httplib::Response& res) {
      auto view = repo.schema_for(repo.store().snapshot());
      res.set_content(class_tree(view->schema).dump(), kJson);
    });
    http.Get("/resources/(.+)", [this](const httplib::Request& req, httplib::Response& res) { resource(req, res); });
    http.Get("/stats", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(stats_to_json(repo.store().snapshot().stats()).dump(), kJson);
    });
    http.Get("/schema", [this](const httplib::Request&, httplib::Response& res) {
      Snapshot snap = repo.store().snapshot();
      res.set_content(serialize(effective_schema_triples(repo, snap)), "application/n-triples; charset=utf-8");
    });
  }

  void query(const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("q") || !body["q"].is_string()) {
      send_error(res, 400, "BAD_REQUEST", "expected a JSON object with string field \"q\"");
      return;
    }
    try {
      res.set_content(table_to_json(repo.query(body["q"].get<std::string>())).dump(), kJson);
    } catch (const SyntaxError& e) {
      send_error(res, 400, "QUERY_SYNTAX", e.what(), e.position());
    } catch (const UnboundVariable& e) {
      send_error(res, 400, "UNBOUND_VARIABLE", e.what(), e.position());
    } catch (const UnknownPrefix& e) {
      send_error(res, 400, "UNKNOWN_PREFIX", e.what());
    } catch (const MalformedIri& e) {
      send_error(res, 400, "QUERY_SYNTAX", e.what());
    }
  }

  void statements(const httplib::Request& req, httplib::Response& res) {
    std::optional<SourceId> source;
    try {
      source = req.has_param("source") ? SourceId::parse(req.get_param_value("source")) : SourceId::local();
    } catch (const MalformedIri& e) {
      send_error(res, 400, "BAD_SOURCE", e.what());
      return;
    }
    MergeMode mode = options.default_merge_mode;
    if (req.has_param("mode")) {
      std::string m = req.get_param_value("mode");
      if (m == "accumulate") {
        mode = MergeMode::kAccumulate;
      } else if (m == "replace-source") {
        mode = MergeMode::kReplaceSource;
      } else {
        send_error(res, 400, "BAD_MODE", "mode must be accumulate or replace-source");
        return;
      }
    }

    ParseOutcome parsed = parse_triples(req.body, source->str());
    json errors = json::array();
    for (const auto& e : parsed.errors) errors.push_back({{"line", e.line}, {"message", e.message}});
    if (parsed.triples.empty() && !parsed.errors.empty()) {
      send_error(res, 400, "BAD_TRIPLES", "no line could be parsed", std::nullopt, {{"errors", errors}});
      return;
    }
    MergeResult merged = repo.store().merge(parsed, *source, now_utc(), mode);
    json body{{"added", merged.added}, {"duplicate", merged.duplicate}, {"removed", merged.removed},
              {"errors", std::move(errors)}};
    res.set_content(body.dump(), kJson);
  }

  void resource(const httplib::Request& req, httplib::Response& res) {
    std::string iri = req.matches[1];
    if (!is_valid_iri(iri)) {
      send_error(res, 400, "BAD_IRI", "'" + iri + "' is not an absolute IRI");
      return;
    }
    Snapshot snap = repo.store().snapshot();
    auto triples = snap.match(Term(make_iri(iri)), std::nullopt, std::nullopt);
    if (triples.empty()) {
      send_error(res, 404, "NOT_FOUND", "no triples with subject " + iri);
      return;
    }
    json out_triples = json::array();
    std::set<std::string> sources;
    for (const auto& t : triples) {
      json prov = json::array();
      for (const auto& p : snap.provenance(t)) {
        prov.push_back({{"source", p.source.str()}, {"fetched_at", format_utc(p.fetched_at)}});
        sources.insert(p.source.str());
      }
      out_triples.push_back({{"subject", term_to_json(t.subject())},
                             {"predicate", term_to_json(t.predicate())},
                             {"object", term_to_json(t.object())},
                             {"provenance", std::move(prov)}});
    }
    json body{{"iri", iri}, {"triples", std::move(out_triples)}, {"sources", sources}};
    res.set_content(body.dump(), kJson);
  }
};

Server::Server(Repository& repository, ServerOptions options)
    : impl_(std::make_unique<Impl>(repository, std::move(options))) {}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  if (port == 0) return impl_->http.bind_to_any_port(host);
  return impl_->http.bind_to_port(host, port) ? port : -1;
}

bool Server::listen() { return impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_) impl_->http.stop();
}

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace cris
