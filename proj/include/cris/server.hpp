#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include <json.hpp>

#include "cris/query.hpp"
#include "cris/repository.hpp"
#include "cris/store.hpp"

namespace cris {

struct ServerOptions {
  /// Value for Access-Control-Allow-Origin; empty disables CORS headers.
  std::string cors_origin;
  std::size_t body_limit = 8 * 1024 * 1024;
  /// Merge mode of POST /statements when no `mode` parameter is given.
  MergeMode default_merge_mode = MergeMode::kAccumulate;
};

/// HTTP/JSON interface over a Repository:
///   POST /query          {"q": "..."}             -> {"columns": [...], "rows": [[term...]...]}
///   POST /statements     triple text, ?source=&mode= -> {"added", "duplicate", "removed", "errors"}
///   GET  /classes        class tree
///   GET  /resources/{iri} triples with that subject plus provenance
///   GET  /stats          store statistics
///   GET  /schema         effective schema as triple text
/// Non-2xx responses carry {"code", "message"} and, for query errors, "position".
class Server {
 public:
  Server(Repository& repository, ServerOptions options = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds to host:port (port 0 picks a free port). Returns the bound port,
  /// or -1 on failure.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Requires a successful bind().
  bool listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

nlohmann::json term_to_json(const Term& term);
nlohmann::json table_to_json(const BindingTable& table);
nlohmann::json stats_to_json(const StoreStats& stats);
/// Roots first; children ordered canonically. Nodes: {"iri", "label", "children"}.
nlohmann::json class_tree(const Schema& schema);
/// Base schema plus schema declarations present in the snapshot.
std::vector<Triple> effective_schema_triples(const Repository& repository, const Snapshot& snap);

}  // namespace cris
