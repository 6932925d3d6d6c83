// cris: command-line front end for harvesting, generation, querying and serving.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cris/error.hpp"
#include "cris/generator.hpp"
#include "cris/harvester.hpp"
#include "cris/repository.hpp"
#include "cris/schema.hpp"
#include "cris/serde.hpp"
#include "cris/server.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cris::Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cris::Error("cannot write " + path);
  out << content;
}

std::vector<cris::Triple> parse_strict(const std::string& text, const std::string& origin) {
  auto parsed = cris::parse_triples(text, origin);
  if (!parsed.errors.empty()) {
    const auto& e = parsed.errors.front();
    throw cris::Error(origin + ":" + std::to_string(e.line) + ": " + e.message);
  }
  return parsed.triples;
}

std::vector<cris::Triple> load_base_schema(const std::string& path) {
  if (path.empty()) return cris::bundled_cerif_schema();
  return parse_strict(read_file(path), path);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string render_term(const cris::Term& t) { return t.str(); }

cris::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CRIS retrieval engine"};
  app.require_subcommand(1);

  // crawl
  auto* crawl = app.add_subcommand("crawl", "Harvest annotations from web pages into a store directory");
  std::string seeds_file, allow, out_dir, report_file;
  std::size_t depth = 2, max_pages = 100, parallel = 1;
  long delay_ms = 1000, timeout_ms = 10000;
  bool accumulate = false, no_robots = false;
  crawl->add_option("--seeds", seeds_file, "File with one seed URL per line")->required();
  crawl->add_option("--allow", allow, "Comma-separated host allowlist (default: seed hosts)");
  crawl->add_option("--depth", depth, "Maximum link depth")->capture_default_str();
  crawl->add_option("--max-pages", max_pages, "Maximum number of fetches")->capture_default_str();
  crawl->add_option("--delay", delay_ms, "Per-host delay in milliseconds")->capture_default_str();
  crawl->add_option("--parallel", parallel, "Concurrent fetches across hosts")->capture_default_str();
  crawl->add_option("--timeout", timeout_ms, "Per-request timeout in milliseconds")->capture_default_str();
  crawl->add_option("--out", out_dir, "Store directory (loaded first if present)")->required();
  crawl->add_flag("--accumulate", accumulate, "Keep earlier triples of re-fetched documents");
  crawl->add_flag("--no-robots", no_robots, "Ignore robots.txt");
  crawl->add_option("--report", report_file, "Write the crawl report as JSON lines");

  // generate
  auto* gen = app.add_subcommand("generate", "Generate annotation triples from a JSON record file");
  std::string gen_in, gen_base, gen_out, gen_schema;
  bool gen_strict = false;
  gen->add_option("--in", gen_in, "Record file")->required();
  gen->add_option("--base", gen_base, "Base URI for minted subjects (overrides base_uri in the file)");
  gen->add_flag("--strict", gen_strict, "Treat unknown properties as errors");
  gen->add_option("--schema", gen_schema, "Schema triple file (default: bundled)");
  gen->add_option("--out", gen_out, "Output triple file")->required();

  // embed
  auto* emb = app.add_subcommand("embed", "Embed an annotation file into an HTML page");
  std::string emb_ann, emb_html, emb_out;
  emb->add_option("--annotation", emb_ann, "Triple file")->required();
  emb->add_option("--html", emb_html, "Input page")->required();
  emb->add_option("--out", emb_out, "Output page")->required();

  // query
  auto* qry = app.add_subcommand("query", "Evaluate a query against a store directory");
  std::string q_store, q_schema, q_text;
  qry->add_option("--store", q_store, "Store directory")->required();
  qry->add_option("--schema", q_schema, "Schema triple file (default: bundled)");
  qry->add_option("query", q_text, "Query text")->required();

  // validate
  auto* val = app.add_subcommand("validate", "Check a store directory against its effective schema");
  std::string v_store, v_schema;
  val->add_option("--store", v_store, "Store directory")->required();
  val->add_option("--schema", v_schema, "Schema triple file (default: bundled)");

  // serve
  auto* srv = app.add_subcommand("serve", "Serve the HTTP query and update interface");
  std::string s_store, s_schema, s_bind = "127.0.0.1:7878", s_cors;
  srv->add_option("--store", s_store, "Store directory (writes are persisted there)")->required();
  srv->add_option("--schema", s_schema, "Schema triple file (default: bundled)");
  srv->add_option("--bind", s_bind, "ADDR:PORT")->capture_default_str();
  srv->add_option("--cors", s_cors, "Allowed browser origin");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*crawl) {
      cris::CrawlConfig config;
      std::istringstream seeds(read_file(seeds_file));
      for (std::string line; std::getline(seeds, line);) {
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#') continue;
        auto e = line.find_last_not_of(" \t\r");
        std::string url = line.substr(b, e - b + 1);
        if (!cris::is_valid_iri(url)) throw cris::ConfigError("invalid seed URL: " + url);
        config.seeds.push_back(cris::make_iri(url));
      }
      config.host_allowlist = split_list(allow);
      config.max_depth = depth;
      config.max_pages = max_pages;
      config.per_host_delay = std::chrono::milliseconds(delay_ms);
      config.fetch_parallelism = parallel;
      config.timeout = std::chrono::milliseconds(timeout_ms);
      config.respect_robots = !no_robots;
      config.merge_mode = accumulate ? cris::MergeMode::kAccumulate : cris::MergeMode::kReplaceSource;
      cris::check_config(config);

      cris::Store store;
      store.load(out_dir);
      auto report = cris::crawl(config, store);
      std::filesystem::create_directories(out_dir);
      cris::export_store(store, out_dir);
      if (!report_file.empty()) write_file(report_file, cris::report_to_json_lines(report));
      std::cerr << "fetched " << report.fetched << ", skipped " << report.skipped << ", failed " << report.failed
                << ", triples added " << report.triples_added << "\n";
      return report.fetched > 0 ? 0 : 1;
    }

    if (*gen) {
      auto records = cris::parse_record_file(read_file(gen_in));
      if (!gen_base.empty()) records.base_uri = gen_base;
      auto schema = cris::load_schema(load_base_schema(gen_schema));
      auto ct = cris::closure(schema);
      auto annotation = cris::generate(records, schema, ct, {gen_strict});
      for (const auto& w : annotation.warnings) std::cerr << "warning: " << w << "\n";
      write_file(gen_out, cris::serialize(annotation.triples));
      return 0;
    }

    if (*emb) {
      auto triples = parse_strict(read_file(emb_ann), emb_ann);
      write_file(emb_out, cris::embed(std::set<cris::Triple>(triples.begin(), triples.end()), read_file(emb_html)));
      return 0;
    }

    if (*qry) {
      cris::Repository repo(load_base_schema(q_schema));
      repo.store().load(q_store);
      auto table = repo.query(q_text);
      for (std::size_t i = 0; i < table.columns.size(); ++i) std::cout << (i ? "\t" : "") << table.columns[i];
      std::cout << "\n";
      for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) std::cout << (i ? "\t" : "") << render_term(row[i]);
        std::cout << "\n";
      }
      return 0;
    }

    if (*val) {
      cris::Repository repo(load_base_schema(v_schema));
      repo.store().load(v_store);
      auto snap = repo.store().snapshot();
      auto view = repo.schema_for(snap);
      std::vector<cris::Triple> data(snap.triples().begin(), snap.triples().end());
      auto report = cris::validate(data, view->schema, view->closure);
      for (const auto& f : report.findings) {
        std::cout << (f.severity == cris::Severity::kError ? "error" : "warning") << "\t" << f.triple.str() << "\t"
                  << f.message << "\n";
      }
      for (const auto& t : view->rejected) std::cout << "rejected\t" << t.str() << "\n";
      return report.error_count() == 0 ? 0 : 1;
    }

    if (*srv) {
      auto colon = s_bind.rfind(':');
      if (colon == std::string::npos) throw cris::ConfigError("--bind expects ADDR:PORT");
      std::string host = s_bind.substr(0, colon);
      int port = std::stoi(s_bind.substr(colon + 1));

      cris::Repository repo(load_base_schema(s_schema));
      repo.store().load(s_store);
      std::filesystem::create_directories(s_store);
      repo.store().persist_to(s_store);

      cris::ServerOptions options;
      options.cors_origin = s_cors;
      cris::Server server(repo, options);
      int bound = server.bind(host, port);
      if (bound < 0) throw cris::ConfigError("cannot bind " + s_bind);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on " << host << ":" << bound << "\n";
      server.listen();
      g_server = nullptr;
      return 0;
    }
  } catch (const cris::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
